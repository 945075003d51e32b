#pragma once

#include <string>
#include <vector>

#include "ringsnake/model.hpp"

namespace ringsnake {

enum class ReductionKind { Full, Kappa, TwoBlock };

/// Embedding/projection pair onto a fixed-point subspace of the ring.
///
/// Every full index has an owner (the reduced coordinate it copies) and every
/// reduced coordinate has a representative full index. Kappa keeps indices
/// 0..N/2 and mirrors u(N - n) = u(n); TwoBlock sets the first k entries to
/// x(0) and the last N - k to x(1).
class SymmetryReduction {
 public:
  static SymmetryReduction full(int N) {
    SymmetryReduction r(ReductionKind::Full, N, 0);
    for (int n = 0; n < N; ++n) {
      r.owner_.push_back(n);
      r.rep_.push_back(n);
    }
    return r;
  }

  static SymmetryReduction kappa(int N) {
    SymmetryReduction r(ReductionKind::Kappa, N, 0);
    const int dim = N / 2 + 1;
    for (int n = 0; n < N; ++n) r.owner_.push_back(n < dim ? n : N - n);
    for (int n = 0; n < dim; ++n) r.rep_.push_back(n);
    return r;
  }

  static SymmetryReduction two_block(int N, int k) {
    if (k < 1 || k > N - 1)
      throw Error(ErrorCode::ConfigError, "two-block split needs 1 <= k <= N-1, got k=" + std::to_string(k));
    SymmetryReduction r(ReductionKind::TwoBlock, N, k);
    for (int n = 0; n < N; ++n) r.owner_.push_back(n < k ? 0 : 1);
    r.rep_ = {0, k};
    return r;
  }

  ReductionKind kind() const { return kind_; }
  int N() const { return N_; }
  int k() const { return k_; }
  int reduced_dim() const { return static_cast<int>(rep_.size()); }
  const std::vector<int>& owner() const { return owner_; }
  const std::vector<int>& representatives() const { return rep_; }

  template <typename Derived>
  Vec<typename Derived::Scalar> embed(const Eigen::MatrixBase<Derived>& x) const {
    check_size(x.size(), reduced_dim(), "embed");
    Vec<typename Derived::Scalar> U(N_);
    for (int n = 0; n < N_; ++n) U(n) = x(owner_[n]);
    return U;
  }

  template <typename Derived>
  Vec<typename Derived::Scalar> project(const Eigen::MatrixBase<Derived>& U) const {
    check_size(U.size(), N_, "project");
    Vec<typename Derived::Scalar> x(reduced_dim());
    for (int i = 0; i < reduced_dim(); ++i) x(i) = U(rep_[i]);
    return x;
  }

  Mat<double> embedding_matrix() const {
    Mat<double> E = Mat<double>::Zero(N_, reduced_dim());
    for (int n = 0; n < N_; ++n) E(n, owner_[n]) = 1.0;
    return E;
  }

  /// Throws IncompatibleReduction unless the subspace is invariant under the
  /// model's symmetry group.
  void check_compatible(const RingModel& model) const {
    if (model.N != N_)
      throw Error(ErrorCode::IncompatibleReduction,
                  "reduction built for N=" + std::to_string(N_) + " used with N=" + std::to_string(model.N));
    if (kind_ == ReductionKind::TwoBlock && !model.all_to_all())
      throw Error(ErrorCode::IncompatibleReduction, "two-block reduction requires all-to-all coupling (m = N/2)");
  }

 private:
  SymmetryReduction(ReductionKind kind, int N, int k) : kind_(kind), N_(N), k_(k) {
    if (N < 3) throw Error(ErrorCode::ConfigError, "reduction needs N >= 3");
  }

  static void check_size(Eigen::Index got, int want, const char* what) {
    if (got != want)
      throw Error(ErrorCode::DimensionMismatch, std::string(what) + ": expected length " + std::to_string(want) +
                                                    ", got " + std::to_string(got));
  }

  ReductionKind kind_;
  int N_;
  int k_;
  std::vector<int> owner_;
  std::vector<int> rep_;
};

inline std::string to_string(const SymmetryReduction& red) {
  switch (red.kind()) {
    case ReductionKind::Full: return "full";
    case ReductionKind::Kappa: return "kappa";
    case ReductionKind::TwoBlock: return "twoblock:" + std::to_string(red.k());
  }
  return "?";
}

/// Inverse of to_string: "full", "kappa" or "twoblock:<k>".
inline SymmetryReduction parse_reduction(const std::string& text, int N) {
  if (text == "full") return SymmetryReduction::full(N);
  if (text == "kappa") return SymmetryReduction::kappa(N);
  if (text.starts_with("twoblock:")) {
    try {
      std::size_t used = 0;
      const int k = std::stoi(text.substr(9), &used);
      if (used == text.size() - 9) return SymmetryReduction::two_block(N, k);
    } catch (const std::logic_error&) {
    }
  }
  throw Error(ErrorCode::ConfigError, "unknown symmetry '" + text + "' (full, kappa or twoblock:<k>)");
}

template <typename Derived>
Vec<typename Derived::Scalar> reduced_residual(const SymmetryReduction& red, const RingModel& model,
                                               const Eigen::MatrixBase<Derived>& x, typename Derived::Scalar mu) {
  red.check_compatible(model);
  return red.project(residual(model, red.embed(x), mu));
}

/// P J E: rows at the representatives, columns summed over each owner class.
template <typename Derived>
Mat<typename Derived::Scalar> reduced_jacobian(const SymmetryReduction& red, const RingModel& model,
                                               const Eigen::MatrixBase<Derived>& x, typename Derived::Scalar mu) {
  using Scalar = typename Derived::Scalar;
  red.check_compatible(model);
  const Mat<Scalar> J = jacobian(model, red.embed(x), mu);
  const int r = red.reduced_dim();
  Mat<Scalar> Jr = Mat<Scalar>::Zero(r, r);
  const auto& owner = red.owner();
  const auto& rep = red.representatives();
  for (int i = 0; i < r; ++i)
    for (int c = 0; c < model.N; ++c) Jr(i, owner[c]) += J(rep[i], c);
  return Jr;
}

template <typename Derived>
Vec<typename Derived::Scalar> reduced_residual_mu(const SymmetryReduction& red, const RingModel& model,
                                                  const Eigen::MatrixBase<Derived>& x, typename Derived::Scalar mu) {
  red.check_compatible(model);
  return red.project(residual_mu(model, red.embed(x), mu));
}

/// A model restricted to a fixed-point subspace, as seen by the solvers.
struct ReducedSystem {
  RingModel model;
  SymmetryReduction reduction;

  ReducedSystem(RingModel m, SymmetryReduction r) : model(std::move(m)), reduction(std::move(r)) {
    model.validate();
    reduction.check_compatible(model);
  }

  int dim() const { return reduction.reduced_dim(); }
  Vec<double> F(const Vec<double>& x, double mu) const { return reduced_residual(reduction, model, x, mu); }
  Mat<double> J(const Vec<double>& x, double mu) const { return reduced_jacobian(reduction, model, x, mu); }
  Vec<double> F_mu(const Vec<double>& x, double mu) const { return reduced_residual_mu(reduction, model, x, mu); }
  Vec<double> full_state(const Vec<double>& x) const { return reduction.embed(x); }
};

}  // namespace ringsnake
