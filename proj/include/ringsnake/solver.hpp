#pragma once

#include <Eigen/LU>

#include <cmath>
#include <string>

#include "ringsnake/model.hpp"

namespace ringsnake {

enum class Damping { None, Armijo };

struct NewtonOptions {
  double tol_residual = 1e-10;  // max-norm
  double tol_step = 1e-12;
  int max_iters = 25;
  Damping damping = Damping::None;
  double backtrack = 0.5;
  double min_step = 1.0 / 64.0;
  double divergence_bound = 1e6;
};

template <typename Scalar>
struct NewtonResult {
  Vec<Scalar> x;
  int iterations = 0;
  Scalar residual_norm = Scalar(0);
};

/// Dense LU with partial pivoting. Pivots below 1e-14 relative to the
/// largest entry (floored at 1) raise SingularJacobian.
template <typename Scalar, typename Rhs>
Vec<Scalar> lu_solve(const Mat<Scalar>& A, const Eigen::MatrixBase<Rhs>& b) {
  using std::abs;
  if (A.rows() != A.cols() || A.rows() != b.size())
    throw Error(ErrorCode::DimensionMismatch, "lu_solve: incompatible shapes");
  const Eigen::PartialPivLU<Mat<Scalar>> lu(A);
  Scalar scale = A.cwiseAbs().maxCoeff();
  if (scale < Scalar(1)) scale = Scalar(1);
  const Scalar smallest = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(smallest > Scalar(1e-14) * scale))
    throw Error(ErrorCode::SingularJacobian, "pivot " + std::to_string(static_cast<double>(smallest)));
  return lu.solve(b.template cast<Scalar>());
}

template <typename ResidualFn, typename JacobianFn, typename Derived>
NewtonResult<typename Derived::Scalar> newton_solve(ResidualFn&& F, JacobianFn&& J,
                                                    const Eigen::MatrixBase<Derived>& seed,
                                                    const NewtonOptions& opts = {}) {
  using Scalar = typename Derived::Scalar;
  if (!seed.allFinite()) throw Error(ErrorCode::NoConvergence, "seed is not finite");
  NewtonResult<Scalar> res;
  res.x = seed;
  Vec<Scalar> r = F(res.x);
  res.residual_norm = r.cwiseAbs().maxCoeff();
  for (int it = 0;; ++it) {
    if (res.residual_norm <= Scalar(opts.tol_residual)) {
      res.iterations = it;
      return res;
    }
    if (it == opts.max_iters)
      throw Error(ErrorCode::NoConvergence, "residual " + std::to_string(static_cast<double>(res.residual_norm)) +
                                                " after " + std::to_string(it) + " iterations");
    const Vec<Scalar> dx = lu_solve<Scalar>(J(res.x), r);
    Scalar lambda(1);
    Vec<Scalar> trial = res.x - dx;
    Vec<Scalar> r_trial = F(trial);
    if (opts.damping == Damping::Armijo) {
      while (!(r_trial.cwiseAbs().maxCoeff() < res.residual_norm) && lambda > Scalar(opts.min_step)) {
        lambda *= Scalar(opts.backtrack);
        trial = res.x - lambda * dx;
        r_trial = F(trial);
      }
    }
    res.x = std::move(trial);
    r = std::move(r_trial);
    res.residual_norm = r.cwiseAbs().maxCoeff();
    if (!res.x.allFinite() || res.x.cwiseAbs().maxCoeff() > Scalar(opts.divergence_bound))
      throw Error(ErrorCode::Diverged, "iterate left the bounded region");
    if ((lambda * dx).cwiseAbs().maxCoeff() < Scalar(opts.tol_step) && res.residual_norm > Scalar(opts.tol_residual))
      throw Error(ErrorCode::NoConvergence, "step below tolerance with residual " +
                                                std::to_string(static_cast<double>(res.residual_norm)));
  }
}

/// Solves [[J, b_col], [b_row^T, corner]] x = rhs.
template <typename DJ, typename DC, typename DR, typename DRhs>
Vec<typename DJ::Scalar> bordered_solve(const Eigen::MatrixBase<DJ>& J, const Eigen::MatrixBase<DC>& b_col,
                                        const Eigen::MatrixBase<DR>& b_row, typename DJ::Scalar corner,
                                        const Eigen::MatrixBase<DRhs>& rhs) {
  using Scalar = typename DJ::Scalar;
  const auto n = J.rows();
  if (J.cols() != n || b_col.size() != n || b_row.size() != n || rhs.size() != n + 1)
    throw Error(ErrorCode::DimensionMismatch, "bordered_solve: incompatible shapes");
  Mat<Scalar> A(n + 1, n + 1);
  A.topLeftCorner(n, n) = J;
  A.topRightCorner(n, 1) = b_col;
  A.bottomLeftCorner(1, n) = b_row.transpose();
  A(n, n) = corner;
  return lu_solve<Scalar>(A, rhs);
}

}  // namespace ringsnake
