#include "ringsnake/continuation.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ringsnake {

namespace {

Vec<double> join(const Vec<double>& x, double mu) {
  Vec<double> y(x.size() + 1);
  y << x, mu;
  return y;
}

Mat<double> extended_jacobian(const ReducedSystem& sys, const Vec<double>& x, double mu) {
  const auto n = x.size();
  Mat<double> A(n, n + 1);
  A.leftCols(n) = sys.J(x, mu);
  A.col(n) = sys.F_mu(x, mu);
  return A;
}

// Least right singular vector of [J | F_mu]; no rank check.
Vec<double> least_singular_direction(const Mat<double>& A) {
  Eigen::JacobiSVD<Mat<double>> svd(A, Eigen::ComputeFullV);
  return svd.matrixV().col(A.cols() - 1);
}

double det_reduced(const ReducedSystem& sys, const Vec<double>& x, double mu) {
  return Eigen::PartialPivLU<Mat<double>>(sys.J(x, mu)).determinant();
}

int positive_eigenvalues(const ReducedSystem& sys, const Vec<double>& x, double mu) {
  Eigen::EigenSolver<Mat<double>> es(sys.J(x, mu), false);
  return static_cast<int>((es.eigenvalues().real().array() > 0.0).count());
}

// Bordered Newton on F = 0, t.(y - yp) = 0. With polish, one more step is
// taken after convergence; near branch points J is badly conditioned and the
// residual tolerance alone leaves the state loose.
std::optional<Vec<double>> correct(const ReducedSystem& sys, const Vec<double>& yp, const Vec<double>& t,
                                   const ContinuationOptions& opts, bool polish = false) {
  const auto n = sys.dim();
  Vec<double> y = yp;
  auto bordered_residual = [&](const Vec<double>& z) {
    Vec<double> g(n + 1);
    g << sys.F(z.head(n), z(n)), t.dot(z - yp);
    return g;
  };
  auto newton_step = [&](const Vec<double>& z, const Vec<double>& g) -> std::optional<Vec<double>> {
    Mat<double> B(n + 1, n + 1);
    B.topRows(n) = extended_jacobian(sys, z.head(n), z(n));
    B.row(n) = t.transpose();
    try {
      return Vec<double>(z - lu_solve<double>(B, g));
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  for (int it = 0; it <= opts.corrector_iters; ++it) {
    const Vec<double> g = bordered_residual(y);
    if (!g.allFinite()) return std::nullopt;
    if (g.cwiseAbs().maxCoeff() <= opts.newton.tol_residual) {
      if (polish) {
        auto z = newton_step(y, g);
        if (z && z->allFinite() && bordered_residual(*z).cwiseAbs().maxCoeff() <= g.cwiseAbs().maxCoeff()) return z;
      }
      return y;
    }
    if (it == opts.corrector_iters) break;
    auto z = newton_step(y, g);
    if (!z) return std::nullopt;
    y = std::move(*z);
    if (!y.allFinite() || y.cwiseAbs().maxCoeff() > opts.newton.divergence_bound) return std::nullopt;
  }
  return std::nullopt;
}

// Newton on (F, J phi, phi0.phi - 1) in (x, mu, phi) from a bracketed guess.
std::optional<Vec<double>> refine_singular_point(const ReducedSystem& sys, const Vec<double>& x0, double mu0,
                                                 const ContinuationOptions& opts) {
  const auto n = x0.size();
  Eigen::JacobiSVD<Mat<double>> svd(sys.J(x0, mu0), Eigen::ComputeFullV);
  const Vec<double> phi0 = svd.matrixV().col(n - 1);
  Vec<double> z(2 * n + 1);
  z << x0, mu0, phi0;
  const double h = 1e-7;
  for (int it = 0; it < 20; ++it) {
    auto G = [&](const Vec<double>& w) {
      Vec<double> g(2 * n + 1);
      const Vec<double> x = w.head(n);
      g << sys.F(x, w(n)), sys.J(x, w(n)) * w.tail(n), phi0.dot(w.tail(n)) - 1.0;
      return g;
    };
    const Vec<double> g = G(z);
    if (!g.allFinite()) return std::nullopt;
    if (g.cwiseAbs().maxCoeff() < 1e-13) return z;
    // Exact blocks for F and the normalization, central differences for J phi.
    Mat<double> D = Mat<double>::Zero(2 * n + 1, 2 * n + 1);
    const Vec<double> x = z.head(n), phi = z.tail(n);
    const double mu = z(n);
    const Mat<double> J = sys.J(x, mu);
    D.block(0, 0, n, n) = J;
    D.block(0, n, n, 1) = sys.F_mu(x, mu);
    for (Eigen::Index j = 0; j <= n; ++j) {
      Vec<double> zp = z.head(n + 1), zm = z.head(n + 1);
      zp(j) += h;
      zm(j) -= h;
      D.block(n, j, n, 1) = (sys.J(zp.head(n), zp(n)) * phi - sys.J(zm.head(n), zm(n)) * phi) / (2.0 * h);
    }
    D.block(n, n + 1, n, n) = J;
    D.block(2 * n, n + 1, 1, n) = phi0.transpose();
    try {
      z -= lu_solve<double>(D, g);
    } catch (const Error&) {
      return std::nullopt;
    }
    if (!z.allFinite() || z.cwiseAbs().maxCoeff() > opts.newton.divergence_bound) return std::nullopt;
  }
  return std::nullopt;
}

bool near_homogeneous(const Vec<double>& U, double d) {
  return U.maxCoeff() - U.minCoeff() < std::max(10.0 * d, 1e-4);
}

struct Tracer {
  const ReducedSystem& sys;
  const ContinuationOptions& opts;
  double tol;
  int n;

  ContinuationPoint make_point(const Vec<double>& y, const Vec<double>& t) const {
    ContinuationPoint p;
    p.x = y.head(n);
    p.mu = y(n);
    p.U = sys.full_state(p.x);
    p.tangent = t;
    p.stability = opts.compute_stability ? stability_index(sys.model, p.U, p.mu) : 0;
    p.label = classify(p.U, sys.model, p.mu, tol);
    return p;
  }

  Vec<double> y_of(const ContinuationPoint& p) const { return join(p.x, p.mu); }

  // Point at arclength s along a's tangent.
  std::optional<ContinuationPoint> on_segment(const ContinuationPoint& a, double s) const {
    const Vec<double> ya = y_of(a);
    auto y = correct(sys, ya + s * a.tangent, a.tangent, opts, true);
    if (!y || (*y - ya - s * a.tangent).norm() > std::abs(s) + 1e-10) return std::nullopt;
    Vec<double> t;
    try {
      t = tangent(sys, y->head(n), (*y)(n), &a.tangent);
    } catch (const Error&) {
      t = a.tangent;
    }
    return make_point(*y, t);
  }

  double det(const ContinuationPoint& p) const { return det_reduced(sys, p.x, p.mu); }
};

Vec<double> null_vector_of(const ReducedSystem& sys, const Vec<double>& x, double mu) {
  Eigen::JacobiSVD<Mat<double>> svd(sys.J(x, mu), Eigen::ComputeFullV);
  Vec<double> v = svd.matrixV().col(x.size() - 1);
  // Sign: first clearly nonzero entry positive.
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-8) {
      if (v(i) < 0) v = -v;
      break;
    }
  }
  return v;
}

bool guard_fires(const StopGuard& g, const std::optional<PatternLabel>& label, double mu, double delta,
                 double mu_max) {
  if (!label || !(*label == g.label)) return false;
  return g.end == StopGuard::End::Low ? mu < 2.0 * delta * mu_max : mu > (1.0 - 2.0 * delta) * mu_max;
}

}  // namespace

void ContinuationOptions::validate() const {
  if (!(ds_min > 0.0 && ds_min <= ds_init && ds_init <= ds_max))
    throw Error(ErrorCode::ConfigError, "step sizes must satisfy 0 < ds_min <= ds_init <= ds_max");
  if (max_steps < 1) throw Error(ErrorCode::ConfigError, "max_steps must be positive");
  if (!(mu_lo < mu_hi)) throw Error(ErrorCode::ConfigError, "mu window is empty");
  if (!(event_tol > 0.0)) throw Error(ErrorCode::ConfigError, "event_tol must be positive");
  if (!(bistable_mu_max > 0.0)) throw Error(ErrorCode::ConfigError, "bistable_mu_max must be positive");
  if (!(max_corrector_ratio > 0.0)) throw Error(ErrorCode::ConfigError, "max_corrector_ratio must be positive");
}

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Fold: return "Fold";
    case EventKind::BranchPoint: return "BranchPoint";
    case EventKind::WindowExit: return "WindowExit";
    case EventKind::LabelStop: return "LabelStop";
    case EventKind::Closure: return "Closure";
  }
  return "?";
}

const char* to_string(Termination termination) {
  switch (termination) {
    case Termination::MaxSteps: return "MaxSteps";
    case Termination::WindowExit: return "WindowExit";
    case Termination::LabelStop: return "LabelStop";
    case Termination::Closure: return "Closure";
    case Termination::StepCollapse: return "StepCollapse";
    case Termination::Sampled: return "Sampled";
  }
  return "?";
}

int Branch::count(EventKind kind) const {
  return static_cast<int>(std::count_if(events.begin(), events.end(), [&](const auto& e) { return e.kind == kind; }));
}

std::vector<std::pair<int, PatternLabel>> Branch::labels() const {
  std::vector<std::pair<int, PatternLabel>> out;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (points[i].label) out.emplace_back(static_cast<int>(i), *points[i].label);
  return out;
}

std::vector<int> Branch::stability() const {
  std::vector<int> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.stability);
  return out;
}

std::vector<PatternLabel> Branch::label_sequence() const {
  std::vector<PatternLabel> out;
  for (const auto& p : points)
    if (p.label && (out.empty() || !(out.back() == *p.label))) out.push_back(*p.label);
  return out;
}

std::vector<double> Branch::event_mus(EventKind kind) const {
  std::vector<double> out;
  for (const auto& e : events)
    if (e.kind == kind) out.push_back(e.mu);
  return out;
}

Vec<double> tangent(const ReducedSystem& sys, const Vec<double>& x, double mu, const Vec<double>* previous) {
  const auto n = x.size();
  const Mat<double> A = extended_jacobian(sys, x, mu);
  if (previous) {
    if (previous->size() != n + 1) throw Error(ErrorCode::DimensionMismatch, "previous tangent has wrong length");
    Mat<double> B(n + 1, n + 1);
    B.topRows(n) = A;
    B.row(n) = previous->transpose();
    Vec<double> rhs = Vec<double>::Zero(n + 1);
    rhs(n) = 1.0;
    Vec<double> t = lu_solve<double>(B, rhs).normalized();
    if (t.dot(*previous) < 0.0) t = -t;
    return t;
  }
  Eigen::JacobiSVD<Mat<double>> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv(n - 1) < 1e-10 * std::max(1.0, sv(0)))
    throw Error(ErrorCode::SingularJacobian, "extended Jacobian is rank deficient");
  Vec<double> t = svd.matrixV().col(n);
  if (t(n) < 0.0) t = -t;
  return t;
}

int stability_index(const RingModel& model, const Vec<double>& U, double mu) {
  Eigen::SelfAdjointEigenSolver<Mat<double>> es(jacobian(model, U, mu), Eigen::EigenvaluesOnly);
  return static_cast<int>((es.eigenvalues().array() > 1e-10).count());
}

LocatedEvent locate_fold(const ReducedSystem& sys, const ContinuationPoint& a, const ContinuationPoint& b,
                         const ContinuationOptions& opts) {
  const int n = sys.dim();
  const double tol = opts.classify_tol > 0 ? opts.classify_tol : default_classify_tol(sys.model.d);
  Tracer tr{sys, opts, tol, n};
  if (!(a.tangent(n) * b.tangent(n) < 0.0))
    throw Error(ErrorCode::NoSignChange, "tangent mu-components do not change sign");
  double lo = 0.0, hi = a.tangent.dot(tr.y_of(b) - tr.y_of(a));
  double glo = a.tangent(n), ghi = b.tangent(n);
  ContinuationPoint best = std::abs(glo) < std::abs(ghi) ? a : b;
  double gbest = std::min(std::abs(glo), std::abs(ghi));
  int side = 0;
  for (int it = 0; it < 100 && gbest > opts.event_tol && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    // Illinois variant of regula falsi, bisecting when the secant stalls.
    double s = hi - ghi * (hi - lo) / (ghi - glo);
    if (!(s > lo && s < hi) || it % 4 == 3) s = 0.5 * (lo + hi);
    auto p = tr.on_segment(a, s);
    if (!p) {
      s = 0.5 * (lo + hi);
      p = tr.on_segment(a, s);
      if (!p) break;
    }
    const double g = p->tangent(n);
    if (std::abs(g) < gbest) {
      gbest = std::abs(g);
      best = *p;
    }
    if (g * glo > 0.0) {
      lo = s;
      glo = g;
      if (side == -1) ghi *= 0.5;
      side = -1;
    } else {
      hi = s;
      ghi = g;
      if (side == 1) glo *= 0.5;
      side = 1;
    }
  }
  LocatedEvent out{best, {}};
  out.event.kind = EventKind::Fold;
  out.event.mu = best.mu;
  out.event.tangent_mu = best.tangent(n);
  return out;
}

LocatedEvent locate_branch_point(const ReducedSystem& sys, const ContinuationPoint& a, const ContinuationPoint& b,
                                 const ContinuationOptions& opts) {
  const int n = sys.dim();
  const double tol = opts.classify_tol > 0 ? opts.classify_tol : default_classify_tol(sys.model.d);
  Tracer tr{sys, opts, tol, n};
  double dlo = tr.det(a);
  const double dhi = tr.det(b);
  if (!(dlo * dhi < 0.0)) throw Error(ErrorCode::NoSignChange, "determinant does not change sign");
  double lo = 0.0, hi = a.tangent.dot(tr.y_of(b) - tr.y_of(a));
  ContinuationPoint best = b;
  for (int it = 0; it < 80 && hi - lo > 1e-13 * std::max(1.0, std::abs(hi)); ++it) {
    const double s = 0.5 * (lo + hi);
    auto p = tr.on_segment(a, s);
    if (!p) break;
    best = *p;
    const double dm = tr.det(*p);
    if (dm * dlo > 0.0) {
      lo = s;
      dlo = dm;
    } else {
      hi = s;
    }
  }
  if (auto refined = refine_singular_point(sys, best.x, best.mu, opts);
      refined && (refined->head(n + 1) - tr.y_of(best)).cwiseAbs().maxCoeff() < 0.05) {
    best = tr.make_point(refined->head(n + 1), best.tangent);
  }
  // The tangent is ill-conditioned at the branch point itself; use the chord.
  best.tangent = (tr.y_of(b) - tr.y_of(a)).normalized();
  if (best.tangent.dot(a.tangent) < 0.0) best.tangent = -best.tangent;
  LocatedEvent out{best, {}};
  out.event.kind = EventKind::BranchPoint;
  out.event.mu = best.mu;
  out.event.tangent_mu = best.tangent(n);
  out.event.null_vector = null_vector_of(sys, best.x, best.mu);
  return out;
}

namespace {

// Events strictly between accepted points a and b, in arclength order.
std::vector<LocatedEvent> segment_events(const Tracer& tr, const ContinuationPoint& a, const ContinuationPoint& b,
                                         double det_a, double det_b) {
  const int n = tr.n;
  std::vector<LocatedEvent> out;
  const bool fold = a.tangent(n) * b.tangent(n) < 0.0;
  if (!fold) {
    if (det_a * det_b < 0.0) out.push_back(locate_branch_point(tr.sys, a, b, tr.opts));
    return out;
  }
  LocatedEvent f = locate_fold(tr.sys, a, b, tr.opts);
  const double s1 = a.tangent.dot(tr.y_of(b) - tr.y_of(a));
  const double sf = a.tangent.dot(tr.y_of(f.point) - tr.y_of(a));
  const double h = std::min({std::max(1e-4 * s1, 1e-9), 0.5 * sf, 0.5 * (s1 - sf)});
  std::optional<ContinuationPoint> before, after;
  if (h > 1e-13) {
    before = tr.on_segment(a, sf - h);
    after = tr.on_segment(a, sf + h);
  }
  const double det_before = before ? tr.det(*before) : det_a;
  const double det_after = after ? tr.det(*after) : det_b;
  if (before && det_a * det_before < 0.0) out.push_back(locate_branch_point(tr.sys, a, *before, tr.opts));
  out.push_back(f);
  // No determinant sign change across the fold itself: a branch point sits on it.
  if (det_before * det_after > 0.0) {
    LocatedEvent bp = f;
    bp.event.kind = EventKind::BranchPoint;
    bp.event.null_vector = null_vector_of(tr.sys, f.point.x, f.point.mu);
    out.push_back(bp);
  }
  if (after && det_after * det_b < 0.0) out.push_back(locate_branch_point(tr.sys, *after, b, tr.opts));
  // A bracketed branch point refined onto the fold is the co-located one.
  std::vector<LocatedEvent> unique;
  for (auto& le : out) {
    const bool dup = le.event.kind == EventKind::BranchPoint &&
                     std::any_of(unique.begin(), unique.end(), [&](const LocatedEvent& u) {
                       return u.event.kind == EventKind::BranchPoint &&
                              (tr.y_of(u.point) - tr.y_of(le.point)).cwiseAbs().maxCoeff() < 1e-6;
                     });
    if (!dup) unique.push_back(std::move(le));
  }
  return unique;
}

void append_events(Branch& br, std::vector<LocatedEvent> located) {
  for (auto& le : located) {
    const bool same_point = !br.events.empty() && le.event.kind == EventKind::BranchPoint &&
                            br.events.back().kind == EventKind::Fold &&
                            br.points.back().mu == le.point.mu && br.points.back().x == le.point.x;
    if (!same_point) br.points.push_back(le.point);
    le.event.point_index = static_cast<int>(br.points.size()) - 1;
    br.events.push_back(std::move(le.event));
  }
}

}  // namespace

Branch trace_branch(const ReducedSystem& sys, const Vec<double>& x0, double mu0, const ContinuationOptions& opts,
                    int direction) {
  Vec<double> dir = Vec<double>::Zero(sys.dim() + 1);
  dir(sys.dim()) = direction >= 0 ? 1.0 : -1.0;
  return trace_branch(sys, x0, mu0, opts, dir);
}

Branch trace_branch(const ReducedSystem& sys, const Vec<double>& x0, double mu0, const ContinuationOptions& opts,
                    const Vec<double>& direction) {
  opts.validate();
  const int n = sys.dim();
  if (x0.size() != n || direction.size() != n + 1)
    throw Error(ErrorCode::DimensionMismatch, "seed or direction has the wrong length");
  const double tol = opts.classify_tol > 0 ? opts.classify_tol : default_classify_tol(sys.model.d);
  Tracer tr{sys, opts, tol, n};

  Vec<double> x_seed;
  try {
    x_seed = newton_solve([&](const Vec<double>& v) { return sys.F(v, mu0); },
                          [&](const Vec<double>& v) { return sys.J(v, mu0); }, x0, opts.newton)
                 .x;
  } catch (const Error& e) {
    throw Error(ErrorCode::SeedNotConverged, e.what());
  }

  Vec<double> t;
  try {
    t = tangent(sys, x_seed, mu0, &direction);
  } catch (const Error&) {
    t = least_singular_direction(extended_jacobian(sys, x_seed, mu0));
    if (t.dot(direction) < 0.0) t = -t;
  }

  Branch br;
  br.points.push_back(tr.make_point(join(x_seed, mu0), t));
  const Vec<double> y0 = join(x_seed, mu0);
  int ref = -1, ref_step = 0;
  Vec<double> y_ref;
  double det_prev = tr.det(br.points.back());
  int npos_prev = positive_eigenvalues(sys, x_seed, mu0);
  double ds = opts.ds_init;
  int easy = 0;
  double max_dist = 0.0;
  const double cos_max = std::cos(opts.max_turn_deg * std::numbers::pi / 180.0);

  auto check_stop = [&](const ContinuationPoint& p) -> std::optional<EventKind> {
    if (p.mu < opts.mu_lo || p.mu > opts.mu_hi) return EventKind::WindowExit;
    if (opts.stop_on_exceptional)
      for (const auto& g : opts.stop_labels)
        if (guard_fires(g, p.label, p.mu, opts.exceptional_delta, opts.bistable_mu_max)) return EventKind::LabelStop;
    return std::nullopt;
  };

  if (auto stop = check_stop(br.points.back())) {
    br.events.push_back({*stop, mu0, 0, t(n), {}});
    br.termination = *stop == EventKind::WindowExit ? Termination::WindowExit : Termination::LabelStop;
    return br;
  }

  for (int step = 1; step <= opts.max_steps; ++step) {
    const ContinuationPoint& cur = br.points.back();
    const Vec<double> y = tr.y_of(cur);
    double h = ds;
    if (near_homogeneous(cur.U, sys.model.d)) h = std::min(h, opts.ds_init / 10.0);

    std::optional<ContinuationPoint> next;
    double det_next = 0.0;
    int npos_next = 0;
    while (!next) {
      auto yn = correct(sys, y + h * cur.tangent, cur.tangent, opts);
      if (yn) {
        Vec<double> tn;
        bool ok = true;
        try {
          tn = tangent(sys, yn->head(n), (*yn)(n), &cur.tangent);
        } catch (const Error&) {
          ok = false;
        }
        // A corrector that travels far from the predictor has usually found
        // a neighbouring branch.
        if (ok)
          ok = tn.dot(cur.tangent) >= cos_max && (*yn - y).norm() <= 2.0 * h &&
               (*yn - y - h * cur.tangent).norm() <= opts.max_corrector_ratio * h;
        if (ok) {
          npos_next = positive_eigenvalues(sys, yn->head(n), (*yn)(n));
          ok = std::abs(npos_next - npos_prev) <= 1 || h < 16.0 * opts.ds_min;
        }
        if (ok) {
          next = tr.make_point(*yn, tn);
          det_next = tr.det(*next);
          break;
        }
      }
      h *= 0.5;
      easy = 0;
      if (h < opts.ds_min) {
        br.termination = Termination::StepCollapse;
        throw StepCollapseError("step size fell below ds_min at mu = " + std::to_string(cur.mu), std::move(br));
      }
    }
    ds = h;
    if (++easy >= 4) {
      ds = std::min(ds * 1.3, opts.ds_max);
      easy = 0;
    }

    append_events(br, segment_events(tr, br.points.back(), *next, det_prev, det_next));
    br.points.push_back(std::move(*next));
    det_prev = det_next;
    npos_prev = npos_next;

    const ContinuationPoint& p = br.points.back();
    if (auto stop = check_stop(p)) {
      br.events.push_back({*stop, p.mu, static_cast<int>(br.points.size()) - 1, p.tangent(n), {}});
      br.termination = *stop == EventKind::WindowExit ? Termination::WindowExit : Termination::LabelStop;
      return br;
    }

    if (opts.detect_closure) {
      // Closure is tested against a reference point a little way along the
      // branch: seeds from branch switching sit next to a crossing.
      const Vec<double> yp = tr.y_of(p);
      if (ref < 0) {
        if ((yp - y0).norm() >= 10.0 * opts.ds_init) {
          ref = static_cast<int>(br.points.size()) - 1;
          y_ref = yp;
          ref_step = step;
        }
        continue;
      }
      const double dist = (yp - y_ref).norm();
      max_dist = std::max(max_dist, dist);
      const double ahead = p.tangent.dot(y_ref - yp);
      const ContinuationPoint& anchor = br.points[ref];
      if (step - ref_step >= 10 && max_dist > 5e-3 && dist < 1.5 * ds && ahead > 0.0 &&
          p.tangent.dot(anchor.tangent) > 0.9) {
        auto yc = correct(sys, yp + ahead * p.tangent, p.tangent, opts, true);
        if (yc && (*yc - y_ref).cwiseAbs().maxCoeff() < opts.closure_tol) {
          const ContinuationPoint closing = anchor;
          append_events(br, segment_events(tr, p, closing, det_prev, tr.det(closing)));
          br.points.push_back(closing);
          br.closure_residual = (*yc - y_ref).cwiseAbs().maxCoeff();
          // The wrap pass retraced everything before the reference point.
          br.points.erase(br.points.begin(), br.points.begin() + ref);
          std::vector<BranchEvent> kept;
          for (auto& e : br.events)
            if (e.point_index >= ref) {
              e.point_index -= ref;
              kept.push_back(std::move(e));
            }
          br.events = std::move(kept);
          br.events.push_back({EventKind::Closure, closing.mu, static_cast<int>(br.points.size()) - 1,
                               closing.tangent(n), {}});
          br.termination = Termination::Closure;
          return br;
        }
      }
    }
  }
  br.termination = Termination::MaxSteps;
  return br;
}

SwitchSeed switch_branch(const ReducedSystem& sys, const Branch& branch, int event_index, int direction,
                         double epsilon, int max_retries, const ContinuationOptions& opts) {
  const int n = sys.dim();
  if (event_index < 0 || event_index >= static_cast<int>(branch.events.size()) ||
      branch.events[event_index].kind != EventKind::BranchPoint)
    throw Error(ErrorCode::NullVectorNotFound, "event is not a branch point");
  const BranchEvent& ev = branch.events[event_index];
  const ContinuationPoint& bp = branch.points.at(ev.point_index);
  Vec<double> phi = ev.null_vector.size() == n ? ev.null_vector : null_vector_of(sys, bp.x, bp.mu);
  // Branch direction from the neighbouring regular points.
  const int i = ev.point_index;
  const int last = static_cast<int>(branch.points.size()) - 1;
  const auto& before = branch.points[std::max(i - 1, 0)];
  const auto& after = branch.points[std::min(i + 1, last)];
  Vec<double> t = join(after.x, after.mu) - join(before.x, before.mu);
  if (t.norm() > 0.0) t.normalize();
  else t = bp.tangent;
  Vec<double> v = Vec<double>::Zero(n + 1);
  v.head(n) = phi;
  if (t.size() == n + 1) v -= v.dot(t) * t;
  if (v.norm() < 1e-6) throw Error(ErrorCode::NullVectorNotFound, "null vector is parallel to the branch tangent");
  v.normalize();
  if (direction < 0) v = -v;

  const Vec<double> ybp = join(bp.x, bp.mu);
  const double scale = std::max(1.0, bp.x.cwiseAbs().maxCoeff());
  double eps = epsilon;
  for (int attempt = 0; attempt <= max_retries; ++attempt, eps /= 10.0) {
    auto y = correct(sys, ybp + eps * scale * v, v, opts, true);
    if (!y) continue;
    // Back on the original branch when the offset along phi has collapsed.
    const double offset = phi.dot(y->head(n) - bp.x);
    if (std::abs(offset) < 0.1 * eps * scale * std::abs(phi.dot(v.head(n)))) continue;
    return {y->head(n), (*y)(n), v, eps};
  }
  throw Error(ErrorCode::FallbackToOriginalBranch,
              "no seed off the original branch for epsilon down to " + std::to_string(eps * 10.0));
}

Branch sample_homogeneous_branch(const ReducedSystem& sys, double u_lo, double u_hi, int samples,
                                 const ContinuationOptions& opts) {
  if (samples < 2 || !(u_lo < u_hi)) throw Error(ErrorCode::ConfigError, "need at least two samples on u_lo < u_hi");
  const int n = sys.dim();
  const auto& nl = sys.model.nonlinearity;
  const double tol = opts.classify_tol > 0 ? opts.classify_tol : default_classify_tol(sys.model.d);
  Tracer tr{sys, opts, tol, n};

  auto mu_of = [&](double u) {
    double mu = 0.5;
    for (int it = 0; it < 4; ++it) mu -= eval_f(nl, u, mu) / eval_f_mu(nl, u, mu);
    return mu;
  };
  auto point_at = [&](double u, const Vec<double>* prev) {
    const Vec<double> x = Vec<double>::Constant(n, u);
    const double mu = mu_of(u);
    Vec<double> t;
    try {
      t = tangent(sys, x, mu, prev);
    } catch (const Error&) {
      t = least_singular_direction(extended_jacobian(sys, x, mu));
      if (prev && t.dot(*prev) < 0.0) t = -t;
    }
    return tr.make_point(join(x, mu), t);
  };

  Branch br;
  br.homogeneous = true;
  br.termination = Termination::Sampled;
  Vec<double> dir = Vec<double>::Zero(n + 1);
  dir.head(n).setConstant(1.0);
  br.points.push_back(point_at(u_lo, &dir));
  double det_prev = tr.det(br.points.back());
  for (int i = 1; i < samples; ++i) {
    const double u = u_lo + (u_hi - u_lo) * i / (samples - 1);
    ContinuationPoint p = point_at(u, &br.points.back().tangent);
    const double det_p = tr.det(p);
    if (det_prev * det_p < 0.0) {
      double a = br.points.back().x(0), b = u, da = det_prev;
      for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, b); ++it) {
        const double c = 0.5 * (a + b);
        const double dc = tr.det(point_at(c, &br.points.back().tangent));
        if (dc * da > 0.0) {
          a = c;
          da = dc;
        } else {
          b = c;
        }
      }
      ContinuationPoint q = point_at(0.5 * (a + b), &br.points.back().tangent);
      BranchEvent ev{EventKind::BranchPoint, q.mu, 0, q.tangent(n), null_vector_of(sys, q.x, q.mu)};
      br.points.push_back(std::move(q));
      ev.point_index = static_cast<int>(br.points.size()) - 1;
      br.events.push_back(std::move(ev));
    }
    br.points.push_back(std::move(p));
    det_prev = det_p;
  }
  return br;
}

}  // namespace ringsnake
