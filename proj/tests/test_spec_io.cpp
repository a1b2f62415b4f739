#include <cmath>
#include <string>

#include <gtest/gtest.h>

#include "bpcalc/errors.hpp"
#include "bpcalc/spec_io.hpp"
#include "support.hpp"

using namespace bpcalc;
using test::rvec;
using test::scalar;

namespace {

std::vector<BernsteinSpec> samples() {
  const double awkward = 0.1 + 0.2;  // not representable in short decimal form
  return {
      BernsteinSpec::fractional_power(awkward),
      BernsteinSpec::fractional_power(1.0 / 3.0, 2),
      BernsteinSpec::log(3),
      BernsteinSpec::compound_poisson({{rvec({1.0 / 7.0, 2.0}), 2.0 / 3.0}, {rvec({0.0, 1e-300}), 5e-17}}),
      BernsteinSpec::linear(-std::sqrt(2.0), rvec({M_PI, 0.0})),
      BernsteinSpec::triple(LevyTriple(-0.125, rvec({0.5}), {{rvec({3.0}), 1.0 / 3.0}},
                                       {{rvec({2.0}), DensityKind::Stable, 0.7, 0.3},
                                        {rvec({1.0}), DensityKind::Gamma, 0.0, std::exp(1.0)}})),
      BernsteinSpec::ray_sum({{rvec({1.0, 1.0 / 3.0}), 0.1, share(BernsteinSpec::fractional_power(0.6))},
                              {rvec({0.0, 2.0}), 1.0, share(BernsteinSpec::compound_poisson(0.3, 1.7))}}),
  };
}

}  // namespace

TEST(SpecIo, RoundTripIsLossless) {
  for (const auto& spec : samples()) {
    const std::string text = serialize_spec(spec);
    const BernsteinSpec back = parse_spec(text);
    EXPECT_EQ(back.family(), spec.family());
    EXPECT_EQ(back.dimension(), spec.dimension());
    EXPECT_EQ(serialize_spec(back), text);
    for (const auto& s : log_grid(spec.dimension(), 1e-2, 1e2, 3)) {
      EXPECT_EQ(eval_psi_closure(back, s), eval_psi_closure(spec, s)) << text;
    }
  }
}

TEST(SpecIo, ParsesJsonDocuments) {
  const BernsteinSpec s = parse_spec(R"({"family": "frac", "alpha": 0.5})");
  EXPECT_NEAR(eval_psi(s, scalar(-4.0)), -2.0, 1e-15);
  const BernsteinSpec c = parse_spec(R"({"family": "cpoisson", "atoms": [[1.0, 2.0]]})");
  EXPECT_NEAR(eval_psi(c, scalar(-1.0)), 2.0 * std::expm1(-1.0), 1e-15);
}

TEST(SpecIo, ParseErrorNamesKeyAndLine) {
  try {
    parse_spec("family: frac\nalpha: abc\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.key(), "alpha");
    EXPECT_EQ(e.line(), 2);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  try {
    parse_spec("family: frac\nalpha: 1.5\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.key(), "alpha");
    EXPECT_EQ(e.line(), 2);
  }
  try {
    parse_spec("alpha: 0.5\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.key(), "family");
  }
  try {
    parse_spec("family: raysum\nrays:\n  - direction: [1]\n    inner: {family: wat}\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.key(), "family");
    EXPECT_EQ(e.line(), 4);
  }
  EXPECT_THROW(parse_spec("family: [unclosed\n"), ParseError);
  EXPECT_THROW(parse_spec("family: cpoisson\natoms: [[1.0]]\n"), ParseError);
}
