#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ringsnake/asymptotics.hpp"
#include "ringsnake/diagram.hpp"

namespace ringsnake {

struct VerifyOptions {
  std::vector<double> d_sweep{1e-4, 3e-4, 1e-3, 3e-3, 1e-2};
  std::vector<int> ks;  // all-to-all block sizes, empty means 1..N/2
  int threads = 0;      // 0 uses the hardware concurrency
  double exponent_tol = 0.02;
  double left_coefficient_tol = 0.05;
  double right_coefficient_tol = 0.02;
  DiagramOptions diagram;
};

/// One law checked against events detected over a d-sweep. `detected` is
/// parallel to `d_samples`; values of d where the event was not found are
/// listed in `note` and left out of both.
struct LawCheck {
  AsymptoticLaw law;
  std::string event_tag;  // which fold or branch point was picked
  std::vector<double> d_samples;
  std::vector<double> predicted;
  std::vector<double> detected;
  std::optional<PowerLawFit> fit;
  double max_rel_err = 0.0;  // relative to mu, or to 1 - mu for right-end laws
  double coefficient_tol = 0.0;
  bool exponent_ok = false;
  bool coefficient_ok = false;
  std::string note;
};

struct VerificationReport {
  RingModel model;
  bool alltoall = false;
  double exponent_tol = 0.0;
  std::vector<LawCheck> checks;

  bool exponents_ok() const;
  bool all_ok() const;
};

/// Labels of the two arcs meeting at a fold, each read at the arclength
/// midpoint between the fold and the neighbouring event.
std::pair<std::optional<PatternLabel>, std::optional<PatternLabel>> fold_neighbour_labels(const Branch& branch,
                                                                                          int event_index);

/// Runs the diagram for every d in the sweep (and every k for all-to-all
/// rings), extracts the events each law describes and fits them.
VerificationReport verify_laws(const RingModel& model, const VerifyOptions& opts = {});

/// Runs `count` jobs on at most `threads` workers; the first exception is
/// rethrown after all workers finish.
void parallel_for(int count, int threads, const std::function<void(int)>& job);

}  // namespace ringsnake
