#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ringsnake/errors.hpp"

namespace ringsnake {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

enum class NonlinearityKind { CubicQuintic, NormalFormCubic, NormalFormFold, CustomOddPolynomial };

/// Bistable scalar law f(u, mu).
///
/// Odd kinds are written as f = -mu*u + sum_j c_j u^(2j+1) with `coefficients`
/// holding c_0, c_1, ... (linear, cubic, quintic, ...). CubicQuintic is
/// {0, 2, -1} and NormalFormCubic is {0, 1, -1}. NormalFormFold is the local
/// quadratic model (1 - mu) - (u - 1)^2 near the upper saddle-node; it is not
/// odd and ignores `coefficients`.
struct Nonlinearity {
  NonlinearityKind kind = NonlinearityKind::CubicQuintic;
  std::vector<double> coefficients{0.0, 2.0, -1.0};

  static Nonlinearity cubic_quintic() { return {NonlinearityKind::CubicQuintic, {0.0, 2.0, -1.0}}; }
  static Nonlinearity normal_form_cubic() { return {NonlinearityKind::NormalFormCubic, {0.0, 1.0, -1.0}}; }
  static Nonlinearity normal_form_fold() { return {NonlinearityKind::NormalFormFold, {}}; }
  static Nonlinearity odd_polynomial(std::vector<double> coeffs) {
    if (coeffs.empty()) throw Error(ErrorCode::ConfigError, "odd polynomial needs at least one coefficient");
    return {NonlinearityKind::CustomOddPolynomial, std::move(coeffs)};
  }

  bool is_odd() const { return kind != NonlinearityKind::NormalFormFold; }
};

inline std::string to_string(NonlinearityKind kind) {
  switch (kind) {
    case NonlinearityKind::CubicQuintic: return "cubic-quintic";
    case NonlinearityKind::NormalFormCubic: return "normal-cubic";
    case NonlinearityKind::NormalFormFold: return "normal-fold";
    case NonlinearityKind::CustomOddPolynomial: return "poly";
  }
  return "unknown";
}

template <typename Scalar>
Scalar eval_f(const Nonlinearity& nl, Scalar u, Scalar mu) {
  if (nl.kind == NonlinearityKind::NormalFormFold) {
    const Scalar du = u - Scalar(1);
    return (Scalar(1) - mu) - du * du;
  }
  // Horner in u^2 on the odd part.
  const Scalar u2 = u * u;
  Scalar acc(0);
  for (auto it = nl.coefficients.rbegin(); it != nl.coefficients.rend(); ++it) acc = acc * u2 + Scalar(*it);
  return -mu * u + acc * u;
}

template <typename Scalar>
Scalar eval_f_u(const Nonlinearity& nl, Scalar u, Scalar mu) {
  if (nl.kind == NonlinearityKind::NormalFormFold) return Scalar(-2) * (u - Scalar(1));
  const Scalar u2 = u * u;
  Scalar acc(0);
  const auto n = static_cast<int>(nl.coefficients.size());
  for (int j = n - 1; j >= 0; --j) acc = acc * u2 + Scalar(2 * j + 1) * Scalar(nl.coefficients[j]);
  return -mu + acc;
}

template <typename Scalar>
Scalar eval_f_mu(const Nonlinearity& nl, Scalar u, Scalar /*mu*/) {
  if (nl.kind == NonlinearityKind::NormalFormFold) return Scalar(-1);
  return -u;
}

/// Nonnegative roots 0 <= u_minus <= u_plus of f(., mu).
struct Roots {
  double zero = 0.0;
  double u_minus = 0.0;
  double u_plus = 0.0;
};

namespace detail {

// Positive roots of w -> f(sqrt w, mu)/sqrt w, a polynomial in w = u^2.
inline std::vector<double> positive_square_roots(const Nonlinearity& nl, double mu) {
  std::vector<double> p(nl.coefficients.begin(), nl.coefficients.end());
  if (p.empty()) return {};
  p[0] -= mu;
  auto eval = [&](double w) {
    double acc = 0.0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * w + *it;
    return acc;
  };
  auto deriv = [&](double w) {
    double acc = 0.0;
    for (int j = static_cast<int>(p.size()) - 1; j >= 1; --j) acc = acc * w + j * p[j];
    return acc;
  };
  double lead = std::abs(p.back());
  double bound = 1.0;
  if (lead > 0.0)
    for (double c : p) bound = std::max(bound, 1.0 + std::abs(c) / lead);

  std::vector<double> out;
  const int samples = 4000;
  double w0 = 0.0;
  double f0 = eval(w0);
  for (int i = 1; i <= samples; ++i) {
    const double w1 = bound * i / samples;
    const double f1 = eval(w1);
    if (f0 == 0.0 && i > 1) out.push_back(w0);
    if (f0 * f1 < 0.0) {
      double a = w0, b = w1, fa = f0;
      for (int it = 0; it < 200 && b - a > 1e-17 * std::max(1.0, b); ++it) {
        const double c = 0.5 * (a + b);
        const double fc = eval(c);
        if (fa * fc <= 0.0) {
          b = c;
        } else {
          a = c;
          fa = fc;
        }
      }
      double w = 0.5 * (a + b);
      for (int it = 0; it < 3; ++it) {
        const double dp = deriv(w);
        if (dp == 0.0) break;
        const double next = w - eval(w) / dp;
        if (next < w0 || next > w1) break;
        w = next;
      }
      out.push_back(w);
    }
    w0 = w1;
    f0 = f1;
  }
  return out;
}

}  // namespace detail

inline Roots roots(const Nonlinearity& nl, double mu) {
  if (nl.kind == NonlinearityKind::NormalFormFold) {
    if (mu > 1.0) throw Error(ErrorCode::NoThreeRoots, "normal-fold model has no roots above mu = 1");
    const double s = std::sqrt(1.0 - mu);
    return {std::numeric_limits<double>::quiet_NaN(), 1.0 - s, 1.0 + s};
  }
  if (nl.kind == NonlinearityKind::CubicQuintic) {
    if (!(mu >= 0.0 && mu <= 1.0))
      throw Error(ErrorCode::NoThreeRoots, "cubic-quintic roots need 0 <= mu <= 1, got " + std::to_string(mu));
    const double s = std::sqrt(1.0 - mu);
    // u_minus^2 = 1 - s rewritten to avoid cancellation at small mu.
    return {0.0, std::sqrt(mu / (1.0 + s)), std::sqrt(1.0 + s)};
  }
  auto w = detail::positive_square_roots(nl, mu);
  if (w.size() == 1 && mu <= 0.0) return {0.0, 0.0, std::sqrt(w[0])};
  if (w.size() != 2)
    throw Error(ErrorCode::NoThreeRoots,
                "expected two positive roots at mu = " + std::to_string(mu) + ", found " + std::to_string(w.size()));
  return {0.0, std::sqrt(w[0]), std::sqrt(w[1])};
}

/// Ring of N nodes with symmetric m-neighbour coupling of strength d.
/// m == N/2 (integer division) is the all-to-all regime.
struct RingModel {
  int N = 20;
  int m = 1;
  double d = 0.005;
  Nonlinearity nonlinearity{};

  bool all_to_all() const { return m == N / 2; }
  int half() const { return N / 2; }
  int index_set_size() const { return N / 2 + 1; }

  void validate() const {
    if (N < 3) throw Error(ErrorCode::ConfigError, "N must be at least 3");
    if (m < 1 || m > N / 2)
      throw Error(ErrorCode::ConfigError, "m must satisfy 1 <= m <= " + std::to_string(N / 2));
    if (!(d >= 0.0) || !std::isfinite(d)) throw Error(ErrorCode::ConfigError, "d must be finite and nonnegative");
  }
};

/// (Delta_m U)_n, n zero-based, indices taken modulo N.
template <typename Derived>
typename Derived::Scalar coupling_row(const RingModel& model, const Eigen::MatrixBase<Derived>& U, int n) {
  using Scalar = typename Derived::Scalar;
  const int N = model.N;
  if (model.all_to_all()) return U.sum() - Scalar(N) * U(n);
  Scalar acc = Scalar(-2 * model.m) * U(n);
  for (int j = 1; j <= model.m; ++j) acc += U((n + j) % N) + U((n - j % N + N) % N);
  return acc;
}

template <typename Derived>
Vec<typename Derived::Scalar> apply_coupling(const RingModel& model, const Eigen::MatrixBase<Derived>& U) {
  using Scalar = typename Derived::Scalar;
  const int N = model.N;
  Vec<Scalar> out(N);
  if (model.all_to_all()) {
    const Scalar total = U.sum();
    for (int n = 0; n < N; ++n) out(n) = total - Scalar(N) * U(n);
    return out;
  }
  for (int n = 0; n < N; ++n) out(n) = coupling_row(model, U, n);
  return out;
}

/// Dense circulant coupling matrix; rows sum to zero.
template <typename Scalar = double>
Mat<Scalar> coupling_matrix(int N, int m) {
  Mat<Scalar> L = Mat<Scalar>::Zero(N, N);
  if (m == N / 2) {
    L.setOnes();
    L.diagonal().array() -= Scalar(N);
    return L;
  }
  for (int n = 0; n < N; ++n) {
    L(n, n) -= Scalar(2 * m);
    for (int j = 1; j <= m; ++j) {
      L(n, (n + j) % N) += Scalar(1);
      L(n, (n - j % N + N) % N) += Scalar(1);
    }
  }
  return L;
}

template <typename Derived>
Vec<typename Derived::Scalar> residual(const RingModel& model, const Eigen::MatrixBase<Derived>& U,
                                       typename Derived::Scalar mu) {
  using Scalar = typename Derived::Scalar;
  const auto& nl = model.nonlinearity;
  Vec<Scalar> F = Scalar(model.d) * apply_coupling(model, U);
  F += U.unaryExpr([&](Scalar u) { return eval_f(nl, u, mu); });
  return F;
}

template <typename Derived>
Mat<typename Derived::Scalar> jacobian(const RingModel& model, const Eigen::MatrixBase<Derived>& U,
                                       typename Derived::Scalar mu) {
  using Scalar = typename Derived::Scalar;
  const auto& nl = model.nonlinearity;
  Mat<Scalar> J = Scalar(model.d) * coupling_matrix<Scalar>(model.N, model.m);
  J.diagonal() += U.unaryExpr([&](Scalar u) { return eval_f_u(nl, u, mu); });
  return J;
}

template <typename Derived>
Vec<typename Derived::Scalar> residual_mu(const RingModel& model, const Eigen::MatrixBase<Derived>& U,
                                          typename Derived::Scalar mu) {
  using Scalar = typename Derived::Scalar;
  const auto& nl = model.nonlinearity;
  return U.unaryExpr([&](Scalar u) { return eval_f_mu(nl, u, mu); });
}

/// Cyclic shift: result(n + shift) = U(n).
template <typename Derived>
Vec<typename Derived::Scalar> rotate(const Eigen::MatrixBase<Derived>& U, int shift = 1) {
  const auto N = static_cast<int>(U.size());
  Vec<typename Derived::Scalar> out(N);
  for (int n = 0; n < N; ++n) out(((n + shift) % N + N) % N) = U(n);
  return out;
}

/// Reflection fixing node 0: result(n) = U(-n mod N).
template <typename Derived>
Vec<typename Derived::Scalar> reflect(const Eigen::MatrixBase<Derived>& U) {
  const auto N = static_cast<int>(U.size());
  Vec<typename Derived::Scalar> out(N);
  for (int n = 0; n < N; ++n) out(n) = U((N - n) % N);
  return out;
}

}  // namespace ringsnake
