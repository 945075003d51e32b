#include "ringsnake/diagram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ringsnake {

const char* to_string(DiagramMode mode) {
  switch (mode) {
    case DiagramMode::SparseSnake: return "sparse";
    case DiagramMode::Special62: return "special62";
    case DiagramMode::Special83: return "special83";
    case DiagramMode::AllToAll: return "alltoall";
    case DiagramMode::GenericM: return "generic";
  }
  return "?";
}

const char* to_string(GammaMatch match) {
  switch (match) {
    case GammaMatch::Sparse: return "Sparse";
    case GammaMatch::G62: return "G62";
    case GammaMatch::G83: return "G83";
    case GammaMatch::AllToAll_k: return "AllToAll_k";
    case GammaMatch::None: return "None";
  }
  return "?";
}

DiagramMode parse_mode(const std::string& text) {
  for (auto m : {DiagramMode::SparseSnake, DiagramMode::Special62, DiagramMode::Special83, DiagramMode::AllToAll,
                 DiagramMode::GenericM})
    if (text == to_string(m)) return m;
  throw Error(ErrorCode::ConfigError,
              "unknown mode '" + text + "' (expected sparse, special62, special83, alltoall or generic)");
}

DiagramMode auto_mode(const RingModel& model) {
  if (model.all_to_all()) return DiagramMode::AllToAll;
  if (is_special_62(model)) return DiagramMode::Special62;
  if (is_special_83(model)) return DiagramMode::Special83;
  if (model.m <= 2) return DiagramMode::SparseSnake;
  return DiagramMode::GenericM;
}

std::vector<PatternLabel> gamma_sequence(GammaMatch match, const RingModel& model, int k) {
  const int r = model.index_set_size();
  using F = PatternFamily;
  switch (match) {
    case GammaMatch::Sparse: {
      std::vector<PatternLabel> out;
      for (int j = 1; j <= r; ++j) {
        out.push_back({F::Vbar, j});
        out.push_back({F::Ubar, j});
      }
      return out;
    }
    case GammaMatch::G62:
      return {{F::Vbar, 1}, {F::Ubar, 1}, {F::W23, 0}, {F::Ubar, 3}, {F::Vbar, 4}};
    case GammaMatch::G83:
      return {{F::Vbar, 1}, {F::Ubar, 1}, {F::W24minus, 0}, {F::W24plus, 0}, {F::W3minus, 0}, {F::Ubar, 4}, {F::Vbar, 5}};
    case GammaMatch::AllToAll_k:
      return {{F::Aminus, k}, {F::Aplus, k}, {F::B, k}, {F::Cplus, k}, {F::Cminus, k}, {F::D, k}};
    case GammaMatch::None:
      return {};
  }
  return {};
}

bool contains_in_order(const std::vector<PatternLabel>& seq, const std::vector<PatternLabel>& expected) {
  auto it = seq.begin();
  for (const auto& e : expected) {
    it = std::find(it, seq.end(), e);
    if (it == seq.end()) return false;
    ++it;
  }
  return true;
}

std::vector<StopGuard> exceptional_guards(const RingModel& model) {
  const int r = model.index_set_size();
  return {{{PatternFamily::Vbar, 1}, StopGuard::End::Low},
          {{PatternFamily::Vbar, r}, StopGuard::End::High},
          {{PatternFamily::Ubar, r}, StopGuard::End::High}};
}

namespace {

Branch trace_or_partial(const ReducedSystem& sys, const Vec<double>& x0, double mu0, const ContinuationOptions& opts,
                        const Vec<double>& direction, std::string* note) {
  try {
    return trace_branch(sys, x0, mu0, opts, direction);
  } catch (const StepCollapseError& e) {
    if (note) *note += std::string(note->empty() ? "" : "; ") + e.what();
    return e.partial();
  }
}

Vec<double> mu_direction(int dim, double sign) {
  Vec<double> dir = Vec<double>::Zero(dim + 1);
  dir(dim) = sign;
  return dir;
}

// u at the fold of the homogeneous branch, i.e. the maximizer of mu_h(u).
double homogeneous_fold_u(const Nonlinearity& nl) {
  if (nl.kind == NonlinearityKind::CubicQuintic || nl.kind == NonlinearityKind::NormalFormFold) return 1.0;
  auto mu_h = [&](double u) {
    double mu = 0.5;
    for (int it = 0; it < 4; ++it) mu -= eval_f(nl, u, mu) / eval_f_mu(nl, u, mu);
    return mu;
  };
  const double u_top = roots(nl, 0.0).u_plus;
  double best = 0.0, best_u = 0.5 * u_top;
  for (int i = 1; i < 2000; ++i) {
    const double u = u_top * i / 2000.0;
    if (mu_h(u) > best) {
      best = mu_h(u);
      best_u = u;
    }
  }
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = best_u - u_top / 2000.0, b = best_u + u_top / 2000.0;
  while (b - a > 1e-13) {
    const double x1 = b - g * (b - a), x2 = a + g * (b - a);
    if (mu_h(x1) > mu_h(x2)) b = x2; else a = x1;
  }
  return 0.5 * (a + b);
}

}  // namespace

double bistable_mu_max(const Nonlinearity& nl) {
  const double u = homogeneous_fold_u(nl);
  double mu = 0.5;
  for (int it = 0; it < 50; ++it) mu -= eval_f(nl, u, mu) / eval_f_mu(nl, u, mu);
  return mu;
}

namespace {

double polyline_distance(const Branch& br, const Vec<double>& y) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < br.points.size(); ++i) {
    const auto& p = br.points[i];
    const auto& q = br.points[i + 1];
    Vec<double> a(p.x.size() + 1), b(q.x.size() + 1);
    a << p.x, p.mu;
    b << q.x, q.mu;
    const Vec<double> ab = b - a;
    const double len2 = ab.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((y - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, (a + t * ab - y).norm());
  }
  return best;
}

std::vector<PatternLabel> spliced_labels(const Diagram& dg, int b) {
  std::vector<PatternLabel> out;
  const auto& br = dg.branches[b];
  for (std::size_t i = 0; i < br.points.size(); ++i) {
    if (br.points[i].label) out.push_back(*br.points[i].label);
    for (std::size_t c = 0; c < dg.branches.size(); ++c)
      if (dg.origins[c].parent == b && dg.origins[c].point_index == static_cast<int>(i)) {
        auto sub = spliced_labels(dg, static_cast<int>(c));
        out.insert(out.end(), sub.begin(), sub.end());
      }
  }
  return out;
}

}  // namespace

Branch trace_both_ways(const ReducedSystem& sys, const Vec<double>& x0, double mu0, const ContinuationOptions& opts) {
  std::string note;
  Branch plus = trace_or_partial(sys, x0, mu0, opts, mu_direction(sys.dim(), 1.0), &note);
  Branch minus = trace_or_partial(sys, x0, mu0, opts, mu_direction(sys.dim(), -1.0), &note);

  Branch out;
  const int P = static_cast<int>(plus.points.size());
  for (int i = P - 1; i >= 0; --i) {
    out.points.push_back(plus.points[i]);
    out.points.back().tangent = -out.points.back().tangent;
  }
  for (auto it = plus.events.rbegin(); it != plus.events.rend(); ++it) {
    BranchEvent e = *it;
    e.point_index = P - 1 - e.point_index;
    e.tangent_mu = -e.tangent_mu;
    out.events.push_back(std::move(e));
  }
  for (std::size_t i = 1; i < minus.points.size(); ++i) out.points.push_back(minus.points[i]);
  for (auto e : minus.events) {
    e.point_index += P - 1;
    out.events.push_back(std::move(e));
  }
  out.termination = minus.termination;
  return out;
}

void summarize(Diagram& dg) {
  auto& s = dg.summary;
  s.fold_count = 0;
  s.closed = false;
  s.closure_residual = 0.0;
  std::vector<std::pair<Vec<double>, double>> bps;
  for (const auto& br : dg.branches) {
    s.fold_count += br.count(EventKind::Fold);
    if (br.termination == Termination::Closure) {
      s.closed = true;
      s.closure_residual = std::max(s.closure_residual, br.closure_residual);
    }
    for (const auto& e : br.events) {
      if (e.kind != EventKind::BranchPoint) continue;
      const auto& p = br.points[e.point_index];
      const bool seen = std::any_of(bps.begin(), bps.end(), [&](const auto& q) {
        return std::abs(q.second - p.mu) < 1e-6 && (q.first - p.U).cwiseAbs().maxCoeff() < 1e-6;
      });
      if (!seen) bps.emplace_back(p.U, p.mu);
    }
  }
  s.branch_point_count = static_cast<int>(bps.size());

  if (dg.origins.size() != dg.branches.size()) dg.origins.resize(dg.branches.size());
  std::vector<PatternLabel> seq;
  for (std::size_t b = 0; b < dg.branches.size(); ++b) {
    if (dg.origins[b].parent >= 0) continue;
    auto sub = spliced_labels(dg, static_cast<int>(b));
    seq.insert(seq.end(), sub.begin(), sub.end());
  }
  s.label_sequence.clear();
  for (const auto& l : seq)
    if (s.label_sequence.empty() || !(s.label_sequence.back() == l)) s.label_sequence.push_back(l);

  const auto& model = dg.model;
  auto matches = [&](GammaMatch g) { return contains_in_order(s.label_sequence, gamma_sequence(g, model, dg.k)); };
  s.gamma_match = GammaMatch::None;
  switch (dg.mode) {
    case DiagramMode::SparseSnake:
      if (matches(GammaMatch::Sparse)) s.gamma_match = GammaMatch::Sparse;
      break;
    case DiagramMode::GenericM:
      if (model.N % 2 == 0 && model.m == model.N / 2 - 1) {
        s.note += std::string(s.note.empty() ? "" : "; ") + "almost all-to-all coupling has no Gamma expectation";
      } else if (matches(GammaMatch::Sparse)) {
        s.gamma_match = GammaMatch::Sparse;
      }
      break;
    case DiagramMode::Special62:
      if (matches(GammaMatch::G62)) s.gamma_match = GammaMatch::G62;
      break;
    case DiagramMode::Special83:
      if (matches(GammaMatch::G83)) s.gamma_match = GammaMatch::G83;
      break;
    case DiagramMode::AllToAll: {
      const auto want = gamma_sequence(GammaMatch::AllToAll_k, model, dg.k);
      const bool all_seen = std::all_of(want.begin(), want.end(), [&](const PatternLabel& l) {
        return std::find(s.label_sequence.begin(), s.label_sequence.end(), l) != s.label_sequence.end();
      });
      if (s.closed && all_seen) s.gamma_match = GammaMatch::AllToAll_k;
      break;
    }
  }
}

ContinuationOptions effective_options(const RingModel& model, const DiagramOptions& opts) {
  ContinuationOptions cont = opts.cont;
  if (opts.cap_steps_at_d && model.d > 0.0) {
    cont.ds_max = std::min(cont.ds_max, model.d);
    cont.ds_init = std::min(cont.ds_init, cont.ds_max);
    // A snake has about N arcs of length below 2.
    cont.max_steps = std::max(cont.max_steps, static_cast<int>(4.0 * model.N / cont.ds_max));
  }
  cont.bistable_mu_max = bistable_mu_max(model.nonlinearity);
  return cont;
}

Diagram build_diagram(const RingModel& model, const DiagramOptions& opts) {
  model.validate();
  Diagram dg;
  dg.model = model;
  dg.mode = opts.mode ? *opts.mode : auto_mode(model);
  const int N = model.N;

  if (dg.mode == DiagramMode::AllToAll && !model.all_to_all())
    throw Error(ErrorCode::ConfigError, "alltoall mode needs m = N/2");
  if (dg.mode == DiagramMode::Special62 && !is_special_62(model))
    throw Error(ErrorCode::ConfigError, "special62 mode needs N=6, m=2");
  if (dg.mode == DiagramMode::Special83 && !is_special_83(model))
    throw Error(ErrorCode::ConfigError, "special83 mode needs N=8, m=3");

  ContinuationOptions cont = effective_options(model, opts);
  const double seed_mu = opts.seed_mu.value_or(0.5 * cont.bistable_mu_max);
  std::string& note = dg.summary.note;

  if (dg.mode == DiagramMode::AllToAll) {
    if (opts.k < 1 || opts.k > model.half())
      throw Error(ErrorCode::ConfigError, "k must lie in 1.." + std::to_string(model.half()));
    dg.k = opts.k;
    dg.reduction = "twoblock:" + std::to_string(opts.k);
    const ReducedSystem sys(model, SymmetryReduction::two_block(N, opts.k));
    Branch hom = sample_homogeneous_branch(sys, 1e-4, homogeneous_fold_u(model.nonlinearity) - 1e-7,
                                           opts.homogeneous_samples, cont);
    const auto bp = std::find_if(hom.events.begin(), hom.events.end(),
                                 [](const BranchEvent& e) { return e.kind == EventKind::BranchPoint; });
    dg.branches.push_back(std::move(hom));
    dg.origins.push_back({});
    if (bp == dg.branches[0].events.end()) {
      note = "no branch point on the homogeneous branch";
    } else {
      const int e = static_cast<int>(bp - dg.branches[0].events.begin());
      const SwitchSeed seed = switch_branch(sys, dg.branches[0], e, +1, opts.switch_epsilon, 2, cont);
      dg.branches.push_back(trace_or_partial(sys, seed.x, seed.mu, cont, seed.direction, &note));
      dg.origins.push_back({0, bp->point_index});
    }
    summarize(dg);
    return dg;
  }

  if (cont.stop_labels.empty()) cont.stop_labels = exceptional_guards(model);
  const ReducedSystem sys(model, SymmetryReduction::kappa(N));
  const Vec<double> x0 = sys.reduction.project(make_pattern<double>({PatternFamily::Ubar, 1}, model, seed_mu));
  dg.branches.push_back(trace_both_ways(sys, x0, seed_mu, cont));
  dg.origins.push_back({});

  if (dg.mode == DiagramMode::SparseSnake || dg.mode == DiagramMode::GenericM) {
    // The homogeneous u+ state is the top rung U:r; the snake itself stops
    // short of it at the exceptional end.
    const double delta = cont.exceptional_delta, top = cont.bistable_mu_max;
    const double u_lo = roots(model.nonlinearity, (1.0 - 2.0 * delta) * top).u_plus;
    const double u_hi = roots(model.nonlinearity, 2.0 * delta * top).u_plus;
    dg.branches.push_back(sample_homogeneous_branch(sys, u_lo, u_hi, 200, cont));
    dg.origins.push_back({});
  }

  if (dg.mode == DiagramMode::Special83) {
    const Branch primary = dg.branches[0];
    for (std::size_t e = 0; e < primary.events.size(); ++e) {
      const auto& ev = primary.events[e];
      if (ev.kind != EventKind::BranchPoint) continue;
      // Nodes 2 and 4 (one-based) can be exchanged on this ring; the W
      // families live in u2 = u4, so antisymmetric null vectors are skipped.
      if (std::abs(ev.null_vector(1) - ev.null_vector(3)) > 1e-6) continue;
      const auto& p = primary.points[ev.point_index];
      const Vec<double> ybp = (Vec<double>(p.x.size() + 1) << p.x, p.mu).finished();
      bool visited = false;
      for (std::size_t b = 1; b < dg.branches.size() && !visited; ++b)
        visited = polyline_distance(dg.branches[b], ybp) < 1e-3;
      if (visited) continue;
      try {
        const SwitchSeed seed = switch_branch(sys, primary, static_cast<int>(e), +1, opts.switch_epsilon, 2, cont);
        dg.branches.push_back(trace_or_partial(sys, seed.x, seed.mu, cont, seed.direction, &note));
        dg.origins.push_back({0, primary.events[e].point_index});
      } catch (const Error& err) {
        note += std::string(note.empty() ? "" : "; ") + "switch at mu=" + std::to_string(primary.events[e].mu) +
                " failed: " + err.what();
      }
    }
  }
  summarize(dg);
  return dg;
}

}  // namespace ringsnake
