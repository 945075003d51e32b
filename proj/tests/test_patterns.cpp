#include <doctest.h>

#include "ringsnake/patterns.hpp"
#include "ringsnake/reduction.hpp"
#include "ringsnake/solver.hpp"

using namespace ringsnake;

namespace {

RingModel ring(int N, int m, double d = 0.0) {
  RingModel model;
  model.N = N;
  model.m = m;
  model.d = d;
  return model;
}

PatternLabel L(const char* text) { return parse_label(text); }

double gap(const Vec<double>& a, const Vec<double>& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_SUITE("patterns") {
  TEST_CASE("label grammar round trip") {
    for (const char* text : {"U:3", "V:1", "W23", "W24+", "W24-", "W3-", "A+:2", "A-:1", "B:3", "C+:1", "C-:2", "D:1",
                             "hom-", "hom+", "zero"})
      CHECK(to_string(parse_label(text)) == text);
    CHECK_THROWS_AS(parse_label("U:"), Error);
    CHECK_THROWS_AS(parse_label("U:x"), Error);
    CHECK_THROWS_AS(parse_label("Q:1"), Error);
  }

  TEST_CASE("range checks name the valid k range") {
    try {
      validate_label(L("U:99"), ring(6, 1));
      FAIL("no exception");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidLabel);
      CHECK(std::string(e.what()).find("1..4") != std::string::npos);
    }
    CHECK_THROWS_AS(validate_label(L("A+:4"), ring(6, 3)), Error);
    CHECK_THROWS_AS(validate_label(L("W23"), ring(8, 3)), Error);
    CHECK_THROWS_AS(validate_label(L("W24+"), ring(6, 2)), Error);
    CHECK_NOTHROW(validate_label(L("W3-"), ring(8, 3)));
  }

  TEST_CASE("pattern layouts") {
    const double mu = 0.5;
    const auto rt = roots(Nonlinearity::cubic_quintic(), mu);
    CHECK(gap(make_pattern(L("U:4"), ring(6, 1), mu), Vec<double>::Constant(6, rt.u_plus)) == 0.0);

    Vec<double> w(6);
    w << rt.u_plus, rt.u_minus, rt.u_minus, 0.0, rt.u_minus, rt.u_minus;
    CHECK(gap(make_pattern(L("W23"), ring(6, 2), mu), w) == 0.0);

    Vec<double> a(6);
    a << rt.u_plus, rt.u_plus, rt.u_minus, rt.u_minus, rt.u_minus, rt.u_minus;
    CHECK(gap(make_pattern(L("B:2"), ring(6, 3), mu), a) == 0.0);
  }

  TEST_CASE("anti-continuum residual vanishes for every pattern") {
    for (auto [N, m] : {std::pair{6, 1}, {6, 2}, {8, 3}, {9, 2}, {6, 3}, {20, 10}}) {
      const RingModel model = ring(N, m);
      for (const auto& label : candidate_labels(model))
        for (double mu = 0.1; mu < 0.95; mu += 0.1)
          CHECK(residual(model, make_pattern(label, model, mu), mu).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  TEST_CASE("reflection invariance of the ring families") {
    for (auto [N, m] : {std::pair{6, 1}, {6, 2}, {7, 2}, {8, 3}}) {
      const RingModel model = ring(N, m);
      for (const auto& label : candidate_labels(model)) {
        const Vec<double> U = make_pattern(label, model, 0.37);
        CHECK(gap(reflect(U), U) == 0.0);
      }
    }
  }

  TEST_CASE("boundary identities of the sparse families") {
    const RingModel model = ring(8, 1);
    for (int k = 2; k <= 5; ++k)
      CHECK(gap(make_pattern({PatternFamily::Ubar, k - 1}, model, 0.0), make_pattern({PatternFamily::Vbar, k}, model, 0.0)) ==
            0.0);
    for (int k = 1; k <= 5; ++k)
      CHECK(gap(make_pattern({PatternFamily::Ubar, k}, model, 1.0), make_pattern({PatternFamily::Vbar, k}, model, 1.0)) ==
            0.0);
  }

  TEST_CASE("boundary identities of the special rings") {
    const RingModel m62 = ring(6, 2), m83 = ring(8, 3);
    auto P = [](const char* l, const RingModel& m, double mu) { return make_pattern(L(l), m, mu); };
    CHECK(gap(P("W23", m62, 0.0), P("U:1", m62, 0.0)) == 0.0);
    CHECK(gap(P("W23", m62, 1.0), P("U:3", m62, 1.0)) == 0.0);
    CHECK(gap(P("W24-", m83, 0.0), P("U:1", m83, 0.0)) == 0.0);
    CHECK(gap(P("W24+", m83, 1.0), P("W24-", m83, 1.0)) == 0.0);
    CHECK(gap(P("W3-", m83, 0.0), P("W24+", m83, 0.0)) == 0.0);
    CHECK(gap(P("W3-", m83, 1.0), P("U:4", m83, 1.0)) == 0.0);
  }

  TEST_CASE("boundary identities of the block families") {
    const RingModel model = ring(6, 3);
    for (int k = 1; k <= 3; ++k) {
      auto P = [&](PatternFamily f, double mu) { return make_pattern({f, k}, model, mu); };
      using F = PatternFamily;
      CHECK(gap(P(F::Aminus, 0.0), P(F::Cminus, 0.0)) == 0.0);
      CHECK(gap(P(F::Aminus, 1.0), P(F::Aplus, 1.0)) == 0.0);
      CHECK(gap(P(F::Aplus, 0.0), P(F::B, 0.0)) == 0.0);
      CHECK(gap(P(F::B, 1.0), P(F::D, 1.0)) == 0.0);
      CHECK(gap(P(F::Cplus, 0.0), P(F::D, 0.0)) == 0.0);
      CHECK(gap(P(F::Cminus, 1.0), P(F::Cplus, 1.0)) == 0.0);
    }
  }

  TEST_CASE("classification") {
    const RingModel m8 = ring(8, 1);
    auto got = classify(make_pattern(L("U:2"), m8, 0.4), m8, 0.4, 1e-6);
    REQUIRE(got);
    CHECK(*got == L("U:2"));

    const auto rt = roots(m8.nonlinearity, 0.3);
    got = classify(Vec<double>::Constant(8, rt.u_minus), m8, 0.3, 1e-6);
    REQUIRE(got);
    CHECK(*got == L("hom-"));

    Vec<double> far = make_pattern(L("U:2"), m8, 0.4);
    far(0) += 0.5;
    CHECK_FALSE(classify(far, m8, 0.4, 0.1));
  }

  TEST_CASE("classification survives the coupling perturbation") {
    const RingModel model = ring(6, 1, 0.002);
    const ReducedSystem sys(model, SymmetryReduction::kappa(6));
    const Vec<double> seed = sys.reduction.project(make_pattern(L("U:2"), model, 0.5));
    const auto sol = newton_solve([&](const Vec<double>& x) { return sys.F(x, 0.5); },
                                  [&](const Vec<double>& x) { return sys.J(x, 0.5); }, seed);
    const auto got = classify(sys.full_state(sol.x), model, 0.5, 0.1);
    REQUIRE(got);
    CHECK(*got == L("U:2"));
  }

  TEST_CASE("default classification tolerance") {
    CHECK(default_classify_tol(1e-3) == doctest::Approx(0.3));
    CHECK(default_classify_tol(0.0) == doctest::Approx(3e-6));
  }
}
