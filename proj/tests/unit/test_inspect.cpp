// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "mathlm/errors.hpp"
#include "mathlm/inspect.hpp"

using namespace mathlm;

namespace {

std::string golden(const std::string& name) {
  std::ifstream in(std::string(MATHLM_GOLDEN_DIR) + "/" + name);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("inspect matches the golden pipeline dump") {
  Vocabulary v = Vocabulary::load(std::string(MATHLM_GOLDEN_DIR) + "/fixture_vocab.json");
  std::string out = inspect_expression("newvelocity = 9.8t", v);
  CHECK(out == golden("newvelocity_inspect.txt"));
  CHECK(out.find("<O^U>  OovHead [0]") != std::string::npos);
  CHECK(out.find("<O^N>  NumHead [1,0]") != std::string::npos);
  CHECK(out.find("latex: \\operatorname{newvelocity}=9.8t") != std::string::npos);
}

TEST_CASE("inspect shows positions and position codes") {
  Vocabulary v(TextVocab(), MathVocab::default_vocab());
  std::string out = inspect_expression("a+2", v);
  CHECK(out.find(R"("positions":[[],[0],[1],[2]])") != std::string::npos);
  CHECK(position_code_string(TreePosition{}) == "-");
  CHECK(position_code_string(TreePosition{0}) == "101010101010");
  CHECK(position_code_string(TreePosition{5, 63}) == "101010011001 010101010101");

  InspectOptions plain;
  plain.bits = false;
  CHECK(inspect_expression("a+2", v, plain).find("101010") == std::string::npos);

  try {
    inspect_expression("a+(2", v);
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(e.offset() == 2);
  }
}
