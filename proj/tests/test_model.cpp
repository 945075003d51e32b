#include <doctest.h>

#include <cmath>
#include <random>

#include "ringsnake/model.hpp"

using namespace ringsnake;
using doctest::Approx;

namespace {

RingModel ring(int N, int m, double d) {
  RingModel model;
  model.N = N;
  model.m = m;
  model.d = d;
  return model;
}

Vec<double> random_state(int N, std::mt19937& rng, double lo = -1.5, double hi = 1.5) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Vec<double> U(N);
  for (int n = 0; n < N; ++n) U(n) = dist(rng);
  return U;
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("cubic-quintic values") {
    const auto nl = Nonlinearity::cubic_quintic();
    CHECK(eval_f(nl, 0.0, 0.37) == 0.0);
    CHECK(eval_f(nl, 1.0, 1.0) == 0.0);
    CHECK(std::abs(eval_f(nl, std::sqrt(2.0), 0.0)) < 1e-14);
    CHECK(eval_f(nl, 0.7, 0.3) == Approx(-0.3 * 0.7 + 2 * std::pow(0.7, 3) - std::pow(0.7, 5)).epsilon(1e-15));
  }

  TEST_CASE("oddness") {
    for (const auto& nl : {Nonlinearity::cubic_quintic(), Nonlinearity::normal_form_cubic(),
                           Nonlinearity::odd_polynomial({0.1, -0.5, 2.0, -1.0})})
      for (double u : {0.1, 0.6, 1.3})
        for (double mu : {0.05, 0.4, 0.9}) CHECK(eval_f(nl, -u, mu) == -eval_f(nl, u, mu));
  }

  TEST_CASE("partial derivatives") {
    const auto nl = Nonlinearity::cubic_quintic();
    CHECK(eval_f_u(nl, 1.0, 1.0) == 0.0);
    CHECK(eval_f_u(nl, 0.0, 0.5) == -0.5);
    CHECK(eval_f_mu(nl, 0.8, 0.2) == -0.8);
    const double h = 1e-6, u = 0.7, mu = 0.3;
    const double fd = (eval_f(nl, u + h, mu) - eval_f(nl, u - h, mu)) / (2 * h);
    CHECK(std::abs(fd - eval_f_u(nl, u, mu)) <= 1e-8 * std::abs(fd));
  }

  TEST_CASE("roots of the cubic-quintic") {
    const auto nl = Nonlinearity::cubic_quintic();
    auto r = roots(nl, 1.0);
    CHECK(r.u_minus == 1.0);
    CHECK(r.u_plus == 1.0);
    r = roots(nl, 0.0);
    CHECK(r.u_minus == 0.0);
    CHECK(r.u_plus == Approx(std::sqrt(2.0)).epsilon(1e-15));
    r = roots(nl, 0.75);
    CHECK(r.u_minus == Approx(std::sqrt(0.5)).epsilon(1e-14));
    CHECK(r.u_plus == Approx(std::sqrt(1.5)).epsilon(1e-14));
    CHECK(std::abs(eval_f(nl, r.u_minus, 0.75)) < 1e-12);
    CHECK(std::abs(eval_f(nl, r.u_plus, 0.75)) < 1e-12);
    CHECK_THROWS_AS(roots(nl, 1.2), Error);
    CHECK_THROWS_AS(roots(nl, -0.1), Error);
  }

  TEST_CASE("bistability signs on (0, 1)") {
    const auto nl = Nonlinearity::cubic_quintic();
    for (double mu = 0.05; mu < 1.0; mu += 0.05) {
      const auto r = roots(nl, mu);
      CHECK(0.0 < r.u_minus);
      CHECK(r.u_minus < r.u_plus);
      CHECK(eval_f_u(nl, 0.0, mu) < 0.0);
      CHECK(eval_f_u(nl, r.u_minus, mu) > 0.0);
      CHECK(eval_f_u(nl, r.u_plus, mu) < 0.0);
    }
  }

  TEST_CASE("roots of a generic odd polynomial") {
    // -mu u + u^3 - u^5: u^2 = (1 +- sqrt(1 - 4 mu)) / 2.
    const auto nl = Nonlinearity::normal_form_cubic();
    const double mu = 0.2, s = std::sqrt(1 - 4 * mu);
    const auto r = roots(nl, mu);
    CHECK(r.u_minus == Approx(std::sqrt((1 - s) / 2)).epsilon(1e-12));
    CHECK(r.u_plus == Approx(std::sqrt((1 + s) / 2)).epsilon(1e-12));
  }

  TEST_CASE("coupling rows") {
    const Vec<double> c = Vec<double>::Constant(6, 0.37);
    for (int m = 1; m <= 3; ++m)
      for (int n = 0; n < 6; ++n) CHECK(std::abs(coupling_row(ring(6, m, 1.0), c, n)) < 1e-15);
    const Vec<double> e1 = Vec<double>::Unit(6, 0);
    CHECK(coupling_row(ring(6, 1, 1.0), e1, 1) == 1.0);
    CHECK(coupling_row(ring(6, 2, 1.0), e1, 0) == -4.0);
    // All-to-all: -N u_n + sum_j u_j.
    CHECK(coupling_row(ring(6, 3, 1.0), e1, 0) == -5.0);
    CHECK(coupling_row(ring(6, 3, 1.0), e1, 3) == 1.0);
  }

  TEST_CASE("coupling matrix rows sum to zero and match the rows") {
    std::mt19937 rng(7);
    for (auto [N, m] : {std::pair{6, 1}, {8, 3}, {9, 2}, {20, 10}, {7, 3}}) {
      const Mat<double> L = coupling_matrix(N, m);
      CHECK(L.rowwise().sum().cwiseAbs().maxCoeff() < 1e-14);
      const Vec<double> U = random_state(N, rng);
      const Vec<double> LU = L * U;
      for (int n = 0; n < N; ++n) CHECK(LU(n) == Approx(coupling_row(ring(N, m, 1.0), U, n)).epsilon(1e-13));
    }
  }

  TEST_CASE("homogeneous and anti-continuum residuals vanish") {
    const auto model = ring(6, 1, 0.3);
    const auto r = roots(model.nonlinearity, 0.4);
    CHECK(residual(model, Vec<double>::Constant(6, r.u_minus), 0.4).cwiseAbs().maxCoeff() < 1e-14);
    const auto m0 = ring(6, 1, 0.0);
    Vec<double> U = Vec<double>::Zero(6);
    U(0) = r.u_plus;
    CHECK(residual(m0, U, 0.4).cwiseAbs().maxCoeff() < 1e-14);
  }

  TEST_CASE("seed residual is concentrated at the active node and its neighbours") {
    const auto model = ring(6, 1, 0.005);
    Vec<double> U = Vec<double>::Zero(6);
    U(0) = roots(model.nonlinearity, 0.5).u_plus;
    const Vec<double> F = residual(model, U, 0.5).cwiseAbs();
    CHECK(F.maxCoeff() > 0.0);
    const double small = std::max({F(2), F(3), F(4)});
    CHECK(std::min({F(0), F(1), F(5)}) > small);
  }

  TEST_CASE("jacobian: uncoupled limit and finite differences") {
    std::mt19937 rng(11);
    const Vec<double> U = random_state(8, rng);
    const Mat<double> J0 = jacobian(ring(8, 3, 0.0), U, 0.3);
    CHECK((J0 - Mat<double>(J0.diagonal().asDiagonal())).norm() == 0.0);

    const auto model = ring(8, 3, 0.05);
    const Mat<double> J = jacobian(model, U, 0.3);
    const double h = 1e-6;
    Mat<double> fd(8, 8);
    for (int j = 0; j < 8; ++j) {
      Vec<double> p = U, q = U;
      p(j) += h;
      q(j) -= h;
      fd.col(j) = (residual(model, p, 0.3) - residual(model, q, 0.3)) / (2 * h);
    }
    CHECK((J - fd).cwiseAbs().maxCoeff() / J.cwiseAbs().maxCoeff() < 1e-6);
  }

  TEST_CASE("jacobian commutes with the shift at shift-invariant states") {
    const auto model = ring(7, 2, 0.1);
    const Vec<double> U = Vec<double>::Constant(7, 0.8);
    const Mat<double> J = jacobian(model, U, 0.4);
    Mat<double> P = Mat<double>::Zero(7, 7);
    for (int n = 0; n < 7; ++n) P((n + 1) % 7, n) = 1.0;
    CHECK((P * J - J * P).cwiseAbs().maxCoeff() < 1e-14);
  }

  TEST_CASE("residual is odd for odd nonlinearities") {
    std::mt19937 rng(3);
    const auto model = ring(9, 2, 0.02);
    const Vec<double> U = random_state(9, rng);
    CHECK((residual(model, Vec<double>(-U), 0.6) + residual(model, U, 0.6)).cwiseAbs().maxCoeff() < 1e-15);
  }

  TEST_CASE("model validation") {
    CHECK_THROWS_AS(ring(2, 1, 0.1).validate(), Error);
    CHECK_THROWS_AS(ring(6, 4, 0.1).validate(), Error);
    CHECK_THROWS_AS(ring(6, 0, 0.1).validate(), Error);
    CHECK_THROWS_AS(ring(6, 1, -0.1).validate(), Error);
    CHECK(ring(6, 3, 0.1).all_to_all());
    CHECK(ring(7, 3, 0.1).all_to_all());
    CHECK_FALSE(ring(8, 3, 0.1).all_to_all());
  }
}
