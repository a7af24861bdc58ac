#include <cstdio>
#include <fstream>
#include <string>

#include <doctest.h>

#include "esdirk/errors.hpp"
#include "esdirk/tableau_io.hpp"

using namespace esdirk;

namespace {

const char* kEsdirk23Text = R"(# three-stage method, gamma = 1 - 1/sqrt(2)
name: sample23
0
0.29289321881345254  0.29289321881345254
0.35355339059327373  0.35355339059327373  0.29289321881345254
b:    0.35355339059327373  0.35355339059327373  0.29289321881345254
bhat: 0.21548220313557542  0.6868867239626912  0.09763107290173336
c:    0  0.5857864376269049  1
p: 2
phat: 3
)";

int error_line(std::string_view text) {
  try {
    parse_tableau(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_SUITE("tableau_io") {

TEST_CASE("decimal tableau with embedded weights") {
  const auto parsed = parse_tableau(kEsdirk23Text);
  const auto& t = parsed.tableau;
  CHECK(t.name == "sample23");
  CHECK(t.stages() == 3);
  CHECK(parsed.claimed_order == 2);
  CHECK(parsed.claimed_embedded_order == 3);
  CHECK(t.has_embedded());
  CHECK(t.flags.esdirk);
  CHECK(t.flags.stiffly_accurate);
  CHECK(t.a(2, 1) == 0.35355339059327373);
}

TEST_CASE("rational entries") {
  const auto parsed = parse_tableau(
      "0\n1/2 1/2\nb: 1/2 1/2\nc: 0 1\n");
  CHECK(parsed.tableau.a(1, 0) == 0.5);
  CHECK(parsed.tableau.b(1) == 0.5);
  CHECK_FALSE(parsed.tableau.has_embedded());
  CHECK_FALSE(parsed.claimed_order.has_value());
}

TEST_CASE("errors carry line and column") {
  try {
    parse_tableau("0\n1/2 abc\nb: 1/2 1/2\nc: 0 1\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 5);
    CHECK(std::string(e.what()).find(":2:5:") != std::string::npos);
  }
  CHECK(error_line("0\n1 2 3\nb: 1 0\nc: 0 1\n") == 2);   // row too long
  CHECK(error_line("0\n1/0 1\nb: 0 1\nc: 0 1\n") == 2);   // zero denominator
  CHECK(error_line("0\n0.5 0.5\nb: 1\nc: 0 1\n") == 3);    // short weight row
  CHECK(error_line("0\n0.5 0.5\nb: 0.5 0.5\n") > 0);       // missing c
  CHECK(error_line("0\n0.5 0.5\nc: 0 1\nb: 0.5 0.5\nfoo: 1\n") == 5);
}

TEST_CASE("load from file") {
  const std::string path = "esdirk_io_test_tableau.txt";
  {
    std::ofstream out(path);
    out << kEsdirk23Text;
  }
  const auto parsed = load_tableau(path);
  CHECK(parsed.tableau.stages() == 3);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_tableau("does/not/exist.txt"), NotFoundError);
}

}
