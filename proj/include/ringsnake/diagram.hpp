#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ringsnake/continuation.hpp"

namespace ringsnake {

enum class DiagramMode { SparseSnake, Special62, Special83, AllToAll, GenericM };
enum class GammaMatch { Sparse, G62, G83, AllToAll_k, None };

const char* to_string(DiagramMode mode);
const char* to_string(GammaMatch match);
DiagramMode parse_mode(const std::string& text);

/// all-to-all, then the two special rings, then m <= 2 as the sparse snake.
DiagramMode auto_mode(const RingModel& model);

struct DiagramSummary {
  int fold_count = 0;
  int branch_point_count = 0;
  bool closed = false;
  double closure_residual = 0.0;
  std::vector<PatternLabel> label_sequence;
  GammaMatch gamma_match = GammaMatch::None;
  std::string note;
};

/// Where a branch was switched off another one; parent = -1 for roots.
struct BranchOrigin {
  int parent = -1;
  int point_index = -1;
};

struct Diagram {
  RingModel model;
  DiagramMode mode = DiagramMode::SparseSnake;
  int k = 0;  // block size for AllToAll
  std::string reduction = "kappa";  // see parse_reduction
  std::vector<Branch> branches;
  std::vector<BranchOrigin> origins;  // parallel to branches
  DiagramSummary summary;
};

struct DiagramOptions {
  std::optional<DiagramMode> mode;  // empty selects auto_mode
  int k = 1;
  ContinuationOptions cont;
  std::optional<double> seed_mu;  // empty: middle of the bistable range
  int homogeneous_samples = 4000;
  double switch_epsilon = 1e-4;
  // Neighbouring branches near mu = 0 and mu = 1 sit O(d) apart, so larger
  // steps can land on the wrong one.
  bool cap_steps_at_d = true;
};

/// Largest mu on the homogeneous branch; f is bistable on (0, this).
double bistable_mu_max(const Nonlinearity& nl);

/// Expected visiting order of a Gamma set; empty for None.
std::vector<PatternLabel> gamma_sequence(GammaMatch match, const RingModel& model, int k = 1);

/// True when `expected` occurs in order (not necessarily adjacent) in `seq`.
bool contains_in_order(const std::vector<PatternLabel>& seq, const std::vector<PatternLabel>& expected);

/// Exceptional-end guards V:1 (low) and V:r (high), plus U:r at the high end.
std::vector<StopGuard> exceptional_guards(const RingModel& model);

/// Traces both directions from a seed and joins them into one branch running
/// from the +1 end through the seed to the -1 end.
Branch trace_both_ways(const ReducedSystem& sys, const Vec<double>& x0, double mu0, const ContinuationOptions& opts);

/// Continuation options build_diagram actually runs with: steps capped at d
/// when requested and the bistable range filled in.
ContinuationOptions effective_options(const RingModel& model, const DiagramOptions& opts);

Diagram build_diagram(const RingModel& model, const DiagramOptions& opts = {});

/// Recomputes counts, label sequence and gamma match from the branches.
void summarize(Diagram& diagram);

}  // namespace ringsnake
