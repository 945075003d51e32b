#include "ringsnake/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "ringsnake/errors.hpp"

namespace ringsnake {

bool VerificationReport::exponents_ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const LawCheck& c) { return c.exponent_ok; });
}

bool VerificationReport::all_ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const LawCheck& c) { return c.exponent_ok && c.coefficient_ok; });
}

void parallel_for(int count, int threads, const std::function<void(int)>& job) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::max(1, std::min(threads, count));
  std::atomic<int> next{0};
  std::exception_ptr first;
  std::mutex guard;
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        job(i);
      } catch (...) {
        std::lock_guard lock(guard);
        if (!first) first = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

namespace {

// Label at the arclength midpoint of points [lo, hi], or the nearest labelled
// point to it.
std::optional<PatternLabel> arc_label(const Branch& br, int lo, int hi) {
  if (hi <= lo) return br.points[lo].label;
  std::vector<double> s(hi - lo + 1, 0.0);
  for (int j = lo + 1; j <= hi; ++j) {
    const auto& p = br.points[j];
    const auto& q = br.points[j - 1];
    s[j - lo] = s[j - lo - 1] + std::hypot((p.x - q.x).norm(), p.mu - q.mu);
  }
  const double half = 0.5 * s.back();
  int mid = lo;
  while (mid < hi && s[mid - lo] < half) ++mid;
  for (int off = 0; off <= hi - lo; ++off) {
    if (mid - off >= lo && br.points[mid - off].label) return br.points[mid - off].label;
    if (mid + off <= hi && br.points[mid + off].label) return br.points[mid + off].label;
  }
  return std::nullopt;
}

}  // namespace

std::pair<std::optional<PatternLabel>, std::optional<PatternLabel>> fold_neighbour_labels(const Branch& br,
                                                                                          int event_index) {
  const int i = br.events.at(event_index).point_index;
  int lo = 0, hi = static_cast<int>(br.points.size()) - 1;
  for (int e = event_index - 1; e >= 0; --e)
    if (br.events[e].point_index < i) {
      lo = br.events[e].point_index;
      break;
    }
  for (int e = event_index + 1; e < static_cast<int>(br.events.size()); ++e)
    if (br.events[e].point_index > i) {
      hi = br.events[e].point_index;
      break;
    }
  return {arc_label(br, lo, i), arc_label(br, i, hi)};
}

namespace {

bool is_pair(const std::pair<std::optional<PatternLabel>, std::optional<PatternLabel>>& got, const PatternLabel& a,
             const PatternLabel& b) {
  if (!got.first || !got.second) return false;
  return (*got.first == a && *got.second == b) || (*got.first == b && *got.second == a);
}

// One row of the sweep: the event the law describes at a given d, if found.
struct Detection {
  double d = 0.0;
  std::optional<double> mu;
};

struct Pending {
  AsymptoticLaw law;
  std::string tag;
  double coefficient_tol = 0.0;
  std::vector<Detection> rows;
};

LawCheck finish(const Pending& p, double exponent_tol) {
  LawCheck c;
  c.law = p.law;
  c.event_tag = p.tag;
  c.coefficient_tol = p.coefficient_tol;
  std::vector<std::pair<double, double>> samples;
  std::vector<std::string> missing;
  for (const auto& row : p.rows) {
    if (!row.mu) {
      std::ostringstream os;
      os << row.d;
      missing.push_back(os.str());
      continue;
    }
    c.d_samples.push_back(row.d);
    c.detected.push_back(*row.mu);
    const double pred = p.law.predict(row.d);
    c.predicted.push_back(pred);
    const double ord_pred = p.law.from_right ? 1.0 - pred : pred;
    const double ord_got = p.law.from_right ? 1.0 - *row.mu : *row.mu;
    c.max_rel_err = std::max(c.max_rel_err, std::abs(ord_got - ord_pred) / std::abs(ord_pred));
    samples.emplace_back(row.d, *row.mu);
  }
  if (!missing.empty()) {
    c.note = "event not found at d =";
    for (const auto& m : missing) c.note += " " + m;
  }
  try {
    c.fit = fit_power_law(samples, p.law.from_right ? PowerLawModel::OneMinusMu : PowerLawModel::Mu);
    c.exponent_ok = std::abs(c.fit->p - p.law.exponent) <= exponent_tol;
    c.coefficient_ok = std::abs(c.fit->A / p.law.prefactor - 1.0) <= p.coefficient_tol;
  } catch (const Error& e) {
    if (!c.note.empty()) c.note += "; ";
    c.note += e.what();
  }
  return c;
}

Frame frame_of(const Nonlinearity& nl) {
  return nl.kind == NonlinearityKind::NormalFormCubic ? Frame::NormalForm : Frame::RawCubicQuintic;
}

RingModel with_d(RingModel model, double d) {
  model.d = d;
  return model;
}

std::vector<LawCheck> verify_sparse(const RingModel& model, const VerifyOptions& opts) {
  const Frame frame = frame_of(model.nonlinearity);
  const int m = model.m;
  const PatternLabel U_m{PatternFamily::Ubar, m}, V_m1{PatternFamily::Vbar, m + 1}, U_m1{PatternFamily::Ubar, m + 1};
  const bool right_end = model.nonlinearity.kind == NonlinearityKind::CubicQuintic;

  Pending left{fold_left_law(frame, m), to_string(U_m) + "/" + to_string(V_m1), opts.left_coefficient_tol, {}};
  Pending right{fold_right_law(frame, m), to_string(U_m1) + "/" + to_string(V_m1), opts.right_coefficient_tol, {}};
  const auto n = static_cast<int>(opts.d_sweep.size());
  left.rows.resize(n);
  right.rows.resize(n);

  parallel_for(n, opts.threads, [&](int i) {
    const double d = opts.d_sweep[i];
    left.rows[i].d = right.rows[i].d = d;
    const Diagram dg = build_diagram(with_d(model, d), opts.diagram);
    const Branch& br = dg.branches.front();
    for (int e = 0; e < static_cast<int>(br.events.size()); ++e) {
      if (br.events[e].kind != EventKind::Fold) continue;
      const auto labels = fold_neighbour_labels(br, e);
      if (!left.rows[i].mu && is_pair(labels, U_m, V_m1) && br.events[e].mu < 0.5) left.rows[i].mu = br.events[e].mu;
      if (!right.rows[i].mu && is_pair(labels, U_m1, V_m1) && br.events[e].mu > 0.5)
        right.rows[i].mu = br.events[e].mu;
    }
  });

  std::vector<LawCheck> out{finish(left, opts.exponent_tol)};
  if (right_end) out.push_back(finish(right, opts.exponent_tol));
  return out;
}

std::vector<LawCheck> verify_alltoall(const RingModel& model, const VerifyOptions& opts) {
  const Frame frame = frame_of(model.nonlinearity);
  const int N = model.N;
  std::vector<int> ks = opts.ks;
  if (ks.empty())
    for (int k = 1; k <= N / 2; ++k) ks.push_back(k);
  for (int k : ks)
    if (k < 1 || k > N / 2) throw Error(ErrorCode::ConfigError, "k must satisfy 1 <= k <= " + std::to_string(N / 2));

  const auto n = static_cast<int>(opts.d_sweep.size());
  const auto nk = static_cast<int>(ks.size());
  // Per k: BP left, BP right, A fold, C fold, left corner, right corner.
  constexpr int kLaws = 6;
  std::vector<Pending> pending;
  for (int k : ks) {
    const std::string ks_ = std::to_string(k);
    pending.push_back({branch_point_left_law(frame, N), "homogeneous, k=" + ks_, opts.left_coefficient_tol, {}});
    pending.push_back({branch_point_right_law(frame, N), "homogeneous, k=" + ks_, opts.right_coefficient_tol, {}});
    auto a = fold_right_law(frame, N - k);
    a.params.N = N;
    a.params.k = k;
    pending.push_back({a, "A-:" + ks_ + "/A+:" + ks_, opts.right_coefficient_tol, {}});
    auto c = fold_right_law(frame, k);
    c.params.N = N;
    c.params.k = k;
    pending.push_back({c, "C+:" + ks_ + "/C-:" + ks_, opts.right_coefficient_tol, {}});
    pending.push_back({fold_alltoall_leftcorner_law(N, k), "lowest loop fold", opts.left_coefficient_tol, {}});
    pending.push_back({fold_alltoall_rightcorner_law(frame, N, k), "highest loop fold", opts.right_coefficient_tol, {}});
  }
  for (auto& p : pending) p.rows.resize(n);

  parallel_for(n * nk, opts.threads, [&](int job) {
    const int ik = job / n, i = job % n;
    const int k = ks[ik];
    const double d = opts.d_sweep[i];
    Pending* row = &pending[ik * kLaws];
    for (int l = 0; l < kLaws; ++l) row[l].rows[i].d = d;

    DiagramOptions dopts = opts.diagram;
    dopts.mode = DiagramMode::AllToAll;
    dopts.k = k;
    const Diagram dg = build_diagram(with_d(model, d), dopts);

    const auto bps = dg.branches.front().event_mus(EventKind::BranchPoint);
    if (!bps.empty()) {
      row[0].rows[i].mu = *std::min_element(bps.begin(), bps.end());
      row[1].rows[i].mu = *std::max_element(bps.begin(), bps.end());
    }
    if (dg.branches.size() < 2) return;
    const Branch& loop = dg.branches[1];
    const PatternLabel am{PatternFamily::Aminus, k}, ap{PatternFamily::Aplus, k};
    const PatternLabel cp{PatternFamily::Cplus, k}, cm{PatternFamily::Cminus, k};
    std::optional<double> lowest, highest;
    for (int e = 0; e < static_cast<int>(loop.events.size()); ++e) {
      const auto& ev = loop.events[e];
      if (ev.kind != EventKind::Fold) continue;
      const auto labels = fold_neighbour_labels(loop, e);
      if (!row[2].rows[i].mu && is_pair(labels, am, ap) && ev.mu > 0.5) row[2].rows[i].mu = ev.mu;
      if (!row[3].rows[i].mu && is_pair(labels, cp, cm) && ev.mu > 0.5) row[3].rows[i].mu = ev.mu;
      if (!lowest || ev.mu < *lowest) lowest = ev.mu;
      if (!highest || ev.mu > *highest) highest = ev.mu;
    }
    row[4].rows[i].mu = lowest;
    row[5].rows[i].mu = highest;
  });

  std::vector<LawCheck> out;
  for (const auto& p : pending) out.push_back(finish(p, opts.exponent_tol));
  return out;
}

}  // namespace

VerificationReport verify_laws(const RingModel& model, const VerifyOptions& opts) {
  model.validate();
  if (opts.d_sweep.size() < 3)
    throw Error(ErrorCode::InsufficientSamples,
                "d-sweep needs at least 3 values, got " + std::to_string(opts.d_sweep.size()));
  for (double d : opts.d_sweep)
    if (!(d > 0.0)) throw Error(ErrorCode::ConfigError, "d-sweep values must be positive");

  VerificationReport report;
  report.model = model;
  report.alltoall = model.all_to_all();
  report.exponent_tol = opts.exponent_tol;
  report.checks = report.alltoall ? verify_alltoall(model, opts) : verify_sparse(model, opts);
  return report;
}

}  // namespace ringsnake
