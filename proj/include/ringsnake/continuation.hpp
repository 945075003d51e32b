#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "ringsnake/patterns.hpp"
#include "ringsnake/reduction.hpp"
#include "ringsnake/solver.hpp"

namespace ringsnake {

/// Stop rule for the exceptional ends of a branch: fires when the point
/// classifies as `label` while mu is below 2*delta*mu_max (Low) or above
/// (1 - 2*delta)*mu_max (High), mu_max being the top of the bistable range.
struct StopGuard {
  enum class End { Low, High };
  PatternLabel label;
  End end = End::Low;
};

struct ContinuationOptions {
  double ds_init = 1e-3;
  double ds_min = 1e-8;
  double ds_max = 1e-2;
  int max_steps = 50000;
  double mu_lo = -0.05;
  double mu_hi = 1.05;
  std::vector<StopGuard> stop_labels;
  bool stop_on_exceptional = true;
  double exceptional_delta = 0.02;
  double bistable_mu_max = 1.0;
  double event_tol = 1e-9;
  double classify_tol = 0.0;  // 0 selects default_classify_tol(d)
  NewtonOptions newton{};
  int corrector_iters = 12;
  double max_turn_deg = 30.0;
  double max_corrector_ratio = 0.25;  // corrector displacement / step
  bool detect_closure = true;
  double closure_tol = 1e-6;
  bool compute_stability = true;

  void validate() const;
};

enum class EventKind { Fold, BranchPoint, WindowExit, LabelStop, Closure };

const char* to_string(EventKind kind);

struct BranchEvent {
  EventKind kind = EventKind::Fold;
  double mu = 0.0;
  int point_index = 0;
  double tangent_mu = 0.0;
  Vec<double> null_vector;  // reduced coordinates, branch points only
};

struct ContinuationPoint {
  Vec<double> x;  // reduced coordinates
  double mu = 0.0;
  Vec<double> U;  // embedded full state
  Vec<double> tangent;
  int stability = 0;
  std::optional<PatternLabel> label;
};

enum class Termination { MaxSteps, WindowExit, LabelStop, Closure, StepCollapse, Sampled };

const char* to_string(Termination termination);

struct Branch {
  std::vector<ContinuationPoint> points;
  std::vector<BranchEvent> events;
  Termination termination = Termination::MaxSteps;
  double closure_residual = 0.0;
  bool homogeneous = false;

  int count(EventKind kind) const;
  std::vector<std::pair<int, PatternLabel>> labels() const;
  std::vector<int> stability() const;
  /// Labels in order with consecutive repeats and unclassified points removed.
  std::vector<PatternLabel> label_sequence() const;
  std::vector<double> event_mus(EventKind kind) const;
};

class StepCollapseError : public Error {
 public:
  StepCollapseError(const std::string& what, Branch partial)
      : Error(ErrorCode::StepCollapse, what), partial_(std::move(partial)) {}
  const Branch& partial() const { return partial_; }

 private:
  Branch partial_;
};

/// Unit null vector of [J | F_mu] at (x, mu). With a previous tangent the
/// result is oriented along it; without one it points towards increasing mu.
Vec<double> tangent(const ReducedSystem& sys, const Vec<double>& x, double mu,
                    const Vec<double>* previous = nullptr);

/// Count of full-Jacobian eigenvalues with real part above 1e-10.
int stability_index(const RingModel& model, const Vec<double>& U, double mu);

/// Pseudo-arclength tracing from a seed. `direction` is an orientation hint in
/// (x, mu) space for the first tangent.
Branch trace_branch(const ReducedSystem& sys, const Vec<double>& x0, double mu0, const ContinuationOptions& opts,
                    const Vec<double>& direction);
Branch trace_branch(const ReducedSystem& sys, const Vec<double>& x0, double mu0, const ContinuationOptions& opts,
                    int direction = 1);

/// Result of an event search between two accepted points.
struct LocatedEvent {
  ContinuationPoint point;
  BranchEvent event;
};

/// Fold between two points whose tangents have opposite mu-components.
LocatedEvent locate_fold(const ReducedSystem& sys, const ContinuationPoint& a, const ContinuationPoint& b,
                         const ContinuationOptions& opts);

/// Branch point between two points where det J changes sign without a fold.
LocatedEvent locate_branch_point(const ReducedSystem& sys, const ContinuationPoint& a, const ContinuationPoint& b,
                                 const ContinuationOptions& opts);

struct SwitchSeed {
  Vec<double> x;
  double mu = 0.0;
  Vec<double> direction;  // orientation hint for trace_branch
  double epsilon = 0.0;   // offset actually used
};

/// Seed on the branch crossing `branch` at the branch point `event_index`.
/// Tries epsilon, epsilon/10, ... (max_retries extra attempts) before raising
/// FallbackToOriginalBranch.
SwitchSeed switch_branch(const ReducedSystem& sys, const Branch& branch, int event_index, int direction,
                         double epsilon = 1e-4, int max_retries = 2, const ContinuationOptions& opts = {});

/// Homogeneous branch U = (u, ..., u), mu solving f(u, mu) = 0, sampled
/// uniformly in u on [u_lo, u_hi]. Branch points are located by bisection on
/// det J along the branch.
Branch sample_homogeneous_branch(const ReducedSystem& sys, double u_lo, double u_hi, int samples,
                                 const ContinuationOptions& opts = {});

}  // namespace ringsnake
