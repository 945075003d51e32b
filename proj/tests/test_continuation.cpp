#include <doctest.h>

#include <cmath>

#include "ringsnake/diagram.hpp"

using namespace ringsnake;

namespace {

RingModel ring(int N, int m, double d) {
  RingModel model;
  model.N = N;
  model.m = m;
  model.d = d;
  return model;
}

ContinuationOptions snake_options(const RingModel& model) {
  ContinuationOptions opts = effective_options(model, {});
  opts.stop_labels = exceptional_guards(model);
  return opts;
}

// Independent fold oracle: Newton with a finite-difference Jacobian on
// F(x, mu) = 0, J(x, mu) phi = 0, phi0 . phi = 1.
struct FoldSolution {
  Vec<double> x;
  double mu;
};

FoldSolution extended_fold(const ReducedSystem& sys, Vec<double> x, double mu, Vec<double> phi) {
  const int n = sys.dim();
  const Vec<double> phi0 = phi.normalized();
  auto G = [&](const Vec<double>& z) {
    const Vec<double> xs = z.head(n), ps = z.segment(n, n);
    const double m = z(2 * n);
    Vec<double> g(2 * n + 1);
    g.head(n) = sys.F(xs, m);
    g.segment(n, n) = sys.J(xs, m) * ps;
    g(2 * n) = phi0.dot(ps) - 1.0;
    return g;
  };
  Vec<double> z(2 * n + 1);
  z << x, phi0, mu;
  for (int it = 0; it < 50; ++it) {
    const Vec<double> g = G(z);
    if (g.cwiseAbs().maxCoeff() < 1e-13) break;
    Mat<double> A(2 * n + 1, 2 * n + 1);
    for (int j = 0; j < 2 * n + 1; ++j) {
      Vec<double> p = z, q = z;
      p(j) += 1e-7;
      q(j) -= 1e-7;
      A.col(j) = (G(p) - G(q)) / 2e-7;
    }
    z -= A.partialPivLu().solve(g);
  }
  REQUIRE(G(z).cwiseAbs().maxCoeff() < 1e-11);
  return {z.head(n), z(2 * n)};
}

// Homogeneous branch points of the two-block system solve
// f_u(u_-(mu), mu) = N d, the determinant of its non-constant mode.
double homogeneous_bp(const RingModel& model, double lo, double hi) {
  auto g = [&](double mu) {
    return eval_f_u(model.nonlinearity, roots(model.nonlinearity, mu).u_minus, mu) - model.N * model.d;
  };
  double glo = g(lo);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi), gm = g(mid);
    if ((gm < 0) == (glo < 0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_SUITE("continuation") {
  TEST_CASE("tangent on the uncoupled homogeneous branch") {
    const ReducedSystem sys(ring(4, 1, 0.0), SymmetryReduction::full(4));
    const double mu = 0.5, u = roots(sys.model.nonlinearity, mu).u_minus;
    const Vec<double> x = Vec<double>::Constant(4, u);
    const Vec<double> t = tangent(sys, x, mu);
    CHECK(t.norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(t(4) > 0.0);
    // Implicit differentiation: du/dmu = -f_mu / f_u = u / f_u.
    const double dudmu = u / eval_f_u(sys.model.nonlinearity, u, mu);
    for (int i = 0; i < 4; ++i) CHECK(t(i) / t(4) == doctest::Approx(dudmu).epsilon(1e-10));
    const Vec<double> back = -t;
    CHECK((tangent(sys, x, mu, &back) + t).norm() < 1e-12);
  }

  TEST_CASE("stability counts at the uncoupled limit") {
    const RingModel model = ring(6, 1, 0.0);
    // Uncoupled nodes contribute f_u(u_n) each; only u- nodes have f_u > 0.
    for (const auto& label : candidate_labels(model)) {
      const Vec<double> U = make_pattern<double>(label, model, 0.4);
      int unstable = 0;
      for (int n = 0; n < 6; ++n) unstable += eval_f_u(model.nonlinearity, U(n), 0.4) > 0.0;
      CAPTURE(to_string(label));
      CHECK(stability_index(model, U, 0.4) == unstable);
    }
    CHECK(stability_index(model, make_pattern<double>({PatternFamily::Vbar, 1}, model, 0.4), 0.4) == 1);
    CHECK(stability_index(model, make_pattern<double>({PatternFamily::HomogeneousMinus, 0}, model, 0.4), 0.4) == 6);
  }

  TEST_CASE("first fold from the single-node seed") {
    const RingModel model = ring(6, 1, 0.005);
    const ReducedSystem sys(model, SymmetryReduction::kappa(6));
    const Vec<double> x0 = sys.reduction.project(make_pattern<double>({PatternFamily::Ubar, 1}, model, 0.5));
    const Branch br = trace_branch(sys, x0, 0.5, snake_options(model), -1);
    const auto seq = br.label_sequence();
    REQUIRE(!seq.empty());
    CHECK(seq.front() == PatternLabel{PatternFamily::Ubar, 1});
    const auto folds = br.event_mus(EventKind::Fold);
    REQUIRE(!folds.empty());
    // Leading law 3 d^(2/3) = 0.0877 to 15%; with the diagonal coupling term
    // -2 m d carried along it is 3 d^(2/3) - 2 d.
    const double lead = 3 * std::cbrt(0.005 * 0.005);
    CHECK(std::abs(folds.front() / lead - 1) < 0.15);
    CHECK(std::abs(folds.front() / (lead - 2 * 0.005) - 1) < 0.01);
  }

  TEST_CASE("leftmost fold at d = 1e-3") {
    const RingModel model = ring(6, 1, 1e-3);
    const Diagram dg = build_diagram(model);
    const auto folds = dg.branches[0].event_mus(EventKind::Fold);
    REQUIRE(!folds.empty());
    const double lo = *std::min_element(folds.begin(), folds.end());
    CHECK(std::abs(lo / (0.03 - 2e-3) - 1) < 0.01);
  }

  TEST_CASE("located folds satisfy the extended fold system") {
    const RingModel model = ring(6, 1, 0.005);
    const ReducedSystem sys(model, SymmetryReduction::kappa(6));
    const Diagram dg = build_diagram(model);
    const Branch& br = dg.branches[0];
    int seen = 0;
    for (const auto& e : br.events) {
      if (e.kind != EventKind::Fold) continue;
      ++seen;
      CHECK(std::abs(e.tangent_mu) < 1e-6);
      const auto& p = br.points[e.point_index];
      Eigen::JacobiSVD<Mat<double>> svd(sys.J(p.x, p.mu), Eigen::ComputeFullV);
      const Vec<double> phi = svd.matrixV().col(sys.dim() - 1);
      Vec<double> x = p.x;
      x.array() += 1e-4;
      const FoldSolution f = extended_fold(sys, x, p.mu + 1e-4, phi);
      CHECK(std::abs(f.mu - e.mu) < 1e-8);
      CHECK((f.x - p.x).cwiseAbs().maxCoeff() < 1e-5);
    }
    CHECK(seen == 6);
  }

  TEST_CASE("scalar fold oracle") {
    // d - u + u^3 = 0 folds at (u, d) = (1/sqrt 3, 2/(3 sqrt 3)).
    auto F = [](const Vec<double>& z) {
      return Vec<double>((Vec<double>(2) << z(1) - z(0) + std::pow(z(0), 3), -1 + 3 * z(0) * z(0)).finished());
    };
    auto J = [](const Vec<double>& z) {
      return Mat<double>((Mat<double>(2, 2) << -1 + 3 * z(0) * z(0), 1.0, 6 * z(0), 0.0).finished());
    };
    const auto sol = newton_solve(F, J, Vec<double>((Vec<double>(2) << 0.5, 0.3).finished()));
    CHECK(sol.x(0) == doctest::Approx(1 / std::sqrt(3.0)).epsilon(1e-12));
    CHECK(sol.x(1) == doctest::Approx(2 / (3 * std::sqrt(3.0))).epsilon(1e-12));

    // sqrt(2) a d - mu u + 2u^3 folds at mu = 3 a^(2/3) d^(2/3): 0.08772 at a=1, d=0.005.
    const double d = 0.005;
    auto G = [&](const Vec<double>& z) {
      return Vec<double>(
          (Vec<double>(2) << std::sqrt(2.0) * d - z(1) * z(0) + 2 * std::pow(z(0), 3), -z(1) + 6 * z(0) * z(0))
              .finished());
    };
    auto H = [&](const Vec<double>& z) {
      return Mat<double>((Mat<double>(2, 2) << -z(1) + 6 * z(0) * z(0), -z(0), 12 * z(0), -1.0).finished());
    };
    const auto fold = newton_solve(G, H, Vec<double>((Vec<double>(2) << 0.1, 0.1).finished()));
    CHECK(fold.x(1) == doctest::Approx(0.0877205).epsilon(1e-6));
  }

  TEST_CASE("homogeneous fold of the quadratic normal form sits at mu = 1") {
    RingModel model = ring(6, 3, 0.01);
    model.nonlinearity = Nonlinearity::normal_form_fold();
    const ReducedSystem sys(model, SymmetryReduction::two_block(6, 1));
    ContinuationOptions opts;
    opts.stop_on_exceptional = false;
    opts.compute_stability = false;
    opts.max_steps = 4000;
    opts.ds_init = 0.01;
    opts.mu_lo = 0.5;
    const Branch br = trace_branch(sys, Vec<double>::Constant(2, 1.5), 0.75, opts, +1);
    const auto folds = br.event_mus(EventKind::Fold);
    REQUIRE(folds.size() == 1);
    CHECK(std::abs(folds[0] - 1.0) < 1e-9);
    // Block-breaking eigenvalue f_u - N d = 2 sqrt(1 - mu) - N d on the lower arc.
    const auto bps = br.event_mus(EventKind::BranchPoint);
    REQUIRE(bps.size() == 1);
    CHECK(std::abs(bps[0] - (1 - std::pow(6 * 0.01 / 2, 2))) < 1e-9);
  }

  TEST_CASE("homogeneous branch points of the two-block system") {
    const RingModel model = ring(6, 3, 1e-3);
    ContinuationOptions opts;
    opts.bistable_mu_max = bistable_mu_max(model.nonlinearity);
    std::vector<double> left;
    for (int k = 1; k <= 3; ++k) {
      const ReducedSystem sys(model, SymmetryReduction::two_block(6, k));
      const Branch hom = sample_homogeneous_branch(sys, 1e-4, 1.0 - 1e-7, 4000, opts);
      const auto bps = hom.event_mus(EventKind::BranchPoint);
      REQUIRE(bps.size() == 2);
      const double lo = std::min(bps[0], bps[1]), hi = std::max(bps[0], bps[1]);
      CHECK(std::abs(lo / 0.003 - 1) < 0.10);
      CHECK(std::abs(lo - homogeneous_bp(model, 1e-6, 0.5)) < 1e-9);
      CHECK(std::abs((1 - hi) / std::pow(6 * 1e-3 / 4, 2) - 1) < 0.10);
      CHECK(std::abs(hi - homogeneous_bp(model, 0.5, 1.0 - 1e-12)) < 1e-9);
      left.push_back(lo);
    }
    CHECK(*std::max_element(left.begin(), left.end()) - *std::min_element(left.begin(), left.end()) < 5e-6);
  }

  TEST_CASE("no homogeneous branch points without coupling") {
    const ReducedSystem sys(ring(6, 3, 0.0), SymmetryReduction::two_block(6, 1));
    const Branch hom = sample_homogeneous_branch(sys, 1e-3, 1.0 - 1e-4, 2000);
    CHECK(hom.count(EventKind::BranchPoint) == 0);
  }

  TEST_CASE("branch switching picks the block direction") {
    const RingModel model = ring(6, 3, 1e-3);
    const ReducedSystem sys(model, SymmetryReduction::two_block(6, 1));
    const Branch hom = sample_homogeneous_branch(sys, 1e-4, 1.0 - 1e-7, 4000);
    int e = 0;
    while (hom.events[e].kind != EventKind::BranchPoint) ++e;
    const SwitchSeed up = switch_branch(sys, hom, e, +1);
    const SwitchSeed down = switch_branch(sys, hom, e, -1);
    CHECK(up.x(0) > up.x(1));
    CHECK(down.x(0) < down.x(1));
    CHECK(sys.F(up.x, up.mu).cwiseAbs().maxCoeff() < 1e-9);
  }

  TEST_CASE("homogeneous seed follows the homogeneous branch") {
    const RingModel model = ring(6, 1, 0.005);
    const ReducedSystem sys(model, SymmetryReduction::kappa(6));
    ContinuationOptions opts = effective_options(model, {});
    opts.stop_on_exceptional = false;
    const double u = roots(model.nonlinearity, 0.5).u_minus;
    const Branch br = trace_both_ways(sys, Vec<double>::Constant(sys.dim(), u), 0.5, opts);
    // Branch points on the way leave the corrector ill-conditioned, so the
    // spread sits above the Newton tolerance but far below any pattern scale.
    for (const auto& p : br.points) {
      CHECK(p.U.maxCoeff() - p.U.minCoeff() < 1e-6);
      CHECK(std::abs(eval_f(model.nonlinearity, p.U(0), p.mu)) < 1e-9);
    }
    CHECK(br.count(EventKind::WindowExit) >= 1);
  }

  TEST_CASE("all-to-all loop closes") {
    const Diagram dg = build_diagram(ring(6, 3, 1e-3), [] {
      DiagramOptions o;
      o.k = 1;
      return o;
    }());
    REQUIRE(dg.branches.size() == 2);
    CHECK(dg.branches[1].termination == Termination::Closure);
    CHECK(dg.branches[1].count(EventKind::Closure) == 1);
    CHECK(dg.branches[1].closure_residual < 1e-6);
  }

  TEST_CASE("step control keeps consecutive tangents within 30 degrees") {
    const Diagram dg = build_diagram(ring(6, 1, 0.005));
    const Branch& br = dg.branches[0];
    const double cos30 = std::cos(30.0 * std::acos(-1.0) / 180.0);
    int checked = 0;
    for (std::size_t i = 1; i < br.points.size(); ++i) {
      const auto& a = br.points[i - 1].tangent;
      const auto& b = br.points[i].tangent;
      if (a.size() == 0 || b.size() == 0) continue;
      // The join at the seed pairs two tangents of opposite traversal.
      if (a.dot(b) < 0) continue;
      CHECK(a.dot(b) >= cos30 - 1e-12);
      ++checked;
    }
    CHECK(checked > 100);
  }

  TEST_CASE("option validation") {
    ContinuationOptions opts;
    opts.ds_init = 1.0;
    CHECK_THROWS_AS(opts.validate(), Error);
    opts = {};
    opts.mu_lo = 2.0;
    CHECK_THROWS_AS(opts.validate(), Error);
  }
}
