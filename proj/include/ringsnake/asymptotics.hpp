#pragma once

#include <string>
#include <utility>
#include <vector>

namespace ringsnake {

enum class LawEvent {
  FoldLeft,
  FoldRight,
  BranchPointLeft,
  BranchPointRight,
  FoldAllToAllLeftCorner,
  FoldAllToAllRightCorner,
};

/// NormalForm: f = -mu u + u^3 near mu = 0 and f = (1 - mu) - (u - 1)^2
/// near mu = 1. RawCubicQuintic: f = -mu u + 2u^3 - u^5 itself.
enum class Frame { NormalForm, RawCubicQuintic };

enum class Provenance { PaperStated, OracleDerived };

const char* to_string(LawEvent event);
const char* to_string(Frame frame);
const char* to_string(Provenance provenance);

struct LawParams {
  int N = 0;
  int m = 0;
  int k = 0;
  double a = 0.0;  // active neighbours of the interface node (left folds)
  double c = 0.0;  // inactive neighbours (right folds)
};

/// Leading-order event location mu(d) = A d^p, or mu(d) = 1 - A d^p when
/// measured from the right end.
struct AsymptoticLaw {
  LawEvent event = LawEvent::FoldLeft;
  Frame frame = Frame::RawCubicQuintic;
  LawParams params;
  double prefactor = 0.0;
  double exponent = 1.0;
  bool from_right = false;
  Provenance provenance = Provenance::PaperStated;

  double predict(double d) const;
  std::string name() const;
};

AsymptoticLaw fold_left_law(Frame frame, double a);
AsymptoticLaw fold_right_law(Frame frame, double c);
AsymptoticLaw branch_point_left_law(Frame frame, int N);
AsymptoticLaw branch_point_right_law(Frame frame, int N);
AsymptoticLaw fold_alltoall_leftcorner_law(int N, int k);
AsymptoticLaw fold_alltoall_rightcorner_law(Frame frame, int N, int k);

double fold_left(Frame frame, double a, double d);
double fold_right(Frame frame, double c, double d);
double branch_point_left(Frame frame, int N, double d);
double branch_point_right(Frame frame, int N, double d);
double fold_alltoall_rightcorner(Frame frame, int N, int k, double d);

/// Prefactor stated for the m = 1 left fold in normal-form coordinates, kept
/// next to the value 3 (1/4)^(1/3) that follows from the unified law at a = 1.
inline constexpr double kLeftFoldStatedPrefactor = 2.3811015779523;  // 3 / 2^(1/3)

struct LeftCornerPoint {
  double v1 = 0.0;
  double v2 = 0.0;
  double d = 0.0;
  double mu = 0.0;
};

/// Leading-order blow-up branch near (v, mu, d) = 0 for all-to-all coupling,
/// parametrized by the angle phi of (v1, v2) and the radius s. In the raw
/// frame s is the raw amplitude, so d and mu pick up a factor 2.
LeftCornerPoint alltoall_leftcorner_parametrization(int N, int k, double phi, double s,
                                                    Frame frame = Frame::NormalForm);

/// mu/d along the left-corner branch.
double mu_tilde(int N, int k, double phi);
double mu_tilde_prime(int N, int k, double phi);

struct MuTildeMinimum {
  double phi = 0.0;
  double value = 0.0;
};

/// Golden-section minimum of mu_tilde on (0, pi/4].
MuTildeMinimum mu_tilde_minimum(int N, int k);

enum class PowerLawModel { Mu, OneMinusMu };

struct PowerLawFit {
  double A = 0.0;
  double p = 0.0;
  double max_rel_residual = 0.0;
};

/// Least squares in log-log coordinates. Needs at least 3 samples whose d
/// values span a decade.
PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& samples, PowerLawModel model);

}  // namespace ringsnake
