#include "ringsnake/asymptotics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ringsnake/errors.hpp"

namespace ringsnake {

const char* to_string(LawEvent event) {
  switch (event) {
    case LawEvent::FoldLeft: return "fold_left";
    case LawEvent::FoldRight: return "fold_right";
    case LawEvent::BranchPointLeft: return "branch_point_left";
    case LawEvent::BranchPointRight: return "branch_point_right";
    case LawEvent::FoldAllToAllLeftCorner: return "fold_alltoall_leftcorner";
    case LawEvent::FoldAllToAllRightCorner: return "fold_alltoall_rightcorner";
  }
  return "?";
}

const char* to_string(Frame frame) {
  return frame == Frame::NormalForm ? "normal-form" : "raw-cubic-quintic";
}

const char* to_string(Provenance provenance) {
  return provenance == Provenance::PaperStated ? "paper-stated" : "oracle-derived";
}

double AsymptoticLaw::predict(double d) const {
  const double term = prefactor * std::pow(d, exponent);
  return from_right ? 1.0 - term : term;
}

std::string AsymptoticLaw::name() const {
  std::string out = to_string(event);
  if (params.N) out += " N=" + std::to_string(params.N);
  if (params.k) out += " k=" + std::to_string(params.k);
  if (params.a > 0) out += " a=" + std::to_string(static_cast<int>(params.a));
  if (params.c > 0) out += " c=" + std::to_string(static_cast<int>(params.c));
  return out;
}

AsymptoticLaw fold_left_law(Frame frame, double a) {
  AsymptoticLaw law;
  law.event = LawEvent::FoldLeft;
  law.frame = frame;
  law.params.a = a;
  law.exponent = 2.0 / 3.0;
  if (frame == Frame::NormalForm) {
    law.prefactor = 3.0 * std::cbrt(a * a / 4.0);
    law.provenance = Provenance::PaperStated;
  } else {
    law.prefactor = 3.0 * std::cbrt(a * a);
    law.provenance = Provenance::OracleDerived;
  }
  return law;
}

AsymptoticLaw fold_right_law(Frame frame, double c) {
  AsymptoticLaw law;
  law.event = LawEvent::FoldRight;
  law.frame = frame;
  law.params.c = c;
  law.prefactor = c;
  law.exponent = 1.0;
  law.from_right = true;
  law.provenance = Provenance::PaperStated;
  return law;
}

AsymptoticLaw branch_point_left_law(Frame frame, int N) {
  AsymptoticLaw law;
  law.event = LawEvent::BranchPointLeft;
  law.frame = frame;
  law.params.N = N;
  law.prefactor = N / 2.0;
  law.exponent = 1.0;
  law.provenance = Provenance::PaperStated;
  return law;
}

AsymptoticLaw branch_point_right_law(Frame frame, int N) {
  AsymptoticLaw law;
  law.event = LawEvent::BranchPointRight;
  law.frame = frame;
  law.params.N = N;
  law.exponent = 2.0;
  law.from_right = true;
  if (frame == Frame::NormalForm) {
    law.prefactor = N * N / 4.0;
    law.provenance = Provenance::PaperStated;
  } else {
    // f ~ (1 - mu) - 4 (u - 1)^2 near the saddle-node.
    law.prefactor = N * N / 16.0;
    law.provenance = Provenance::OracleDerived;
  }
  return law;
}

AsymptoticLaw fold_alltoall_leftcorner_law(int N, int k) {
  AsymptoticLaw law;
  law.event = LawEvent::FoldAllToAllLeftCorner;
  law.frame = Frame::NormalForm;
  law.params.N = N;
  law.params.k = k;
  law.prefactor = mu_tilde_minimum(N, k).value;
  law.exponent = 1.0;
  law.provenance = Provenance::OracleDerived;
  return law;
}

AsymptoticLaw fold_alltoall_rightcorner_law(Frame frame, int N, int k) {
  if (k < 1 || k > N / 2) throw Error(ErrorCode::ConfigError, "right-corner law needs 1 <= k <= N/2");
  AsymptoticLaw law;
  law.event = LawEvent::FoldAllToAllRightCorner;
  law.frame = frame;
  law.params.N = N;
  law.params.k = k;
  law.exponent = 2.0;
  law.from_right = true;
  const double kk = static_cast<double>(k) * (N - k);
  if (frame == Frame::NormalForm) {
    law.prefactor = kk;
    law.provenance = Provenance::PaperStated;
  } else {
    // Same blow-up with the quadratic coefficient 4 in place of 1.
    law.prefactor = kk / 4.0;
    law.provenance = Provenance::OracleDerived;
  }
  return law;
}

double fold_left(Frame frame, double a, double d) { return fold_left_law(frame, a).predict(d); }
double fold_right(Frame frame, double c, double d) { return fold_right_law(frame, c).predict(d); }
double branch_point_left(Frame frame, int N, double d) { return branch_point_left_law(frame, N).predict(d); }
double branch_point_right(Frame frame, int N, double d) { return branch_point_right_law(frame, N).predict(d); }
double fold_alltoall_rightcorner(Frame frame, int N, int k, double d) {
  return fold_alltoall_rightcorner_law(frame, N, k).predict(d);
}

LeftCornerPoint alltoall_leftcorner_parametrization(int N, int k, double phi, double s, Frame frame) {
  if (!(phi > 0.0 && phi < std::numbers::pi / 2))
    throw Error(ErrorCode::DomainError, "phi must lie in (0, pi/2), got " + std::to_string(phi));
  const double c = std::cos(phi), sn = std::sin(phi);
  const double den = k * c + (N - k) * sn;
  const double scale = frame == Frame::NormalForm ? 1.0 : 2.0;
  LeftCornerPoint p;
  p.v1 = s * c;
  p.v2 = s * sn;
  p.d = scale * (c + sn) * c * sn / den * s * s;
  p.mu = scale * (k * c * c * c + (N - k) * sn * sn * sn) / den * s * s;
  return p;
}

double mu_tilde(int N, int k, double phi) {
  const double c = std::cos(phi), s = std::sin(phi);
  return (k * c * c * c + (N - k) * s * s * s) / ((c + s) * c * s);
}

double mu_tilde_prime(int N, int k, double phi) {
  const double c = std::cos(phi), s = std::sin(phi);
  const double num = k * c * c * c + (N - k) * s * s * s;
  const double den = (c + s) * c * s;
  const double dnum = 3.0 * c * s * ((N - k) * s - k * c);
  // d/dphi [(c + s) c s] = (c - s) c s + (c + s)(c^2 - s^2)
  const double dden = (c - s) * c * s + (c + s) * (c * c - s * s);
  return (dnum * den - num * dden) / (den * den);
}

MuTildeMinimum mu_tilde_minimum(int N, int k) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 1e-6, b = std::numbers::pi / 4;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = mu_tilde(N, k, x1), f2 = mu_tilde(N, k, x2);
  while (b - a > 1e-12) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = mu_tilde(N, k, x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = mu_tilde(N, k, x2);
    }
  }
  MuTildeMinimum out{0.5 * (a + b), 0.0};
  out.value = mu_tilde(N, k, out.phi);
  // The minimum may sit on the boundary phi = pi/4 (k = N/2).
  const double edge = mu_tilde(N, k, std::numbers::pi / 4);
  if (edge <= out.value) out = {std::numbers::pi / 4, edge};
  return out;
}

PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& samples, PowerLawModel model) {
  if (samples.size() < 3)
    throw Error(ErrorCode::InsufficientSamples, "power-law fit needs at least 3 samples, got " +
                                                    std::to_string(samples.size()));
  double dmin = samples.front().first, dmax = dmin;
  for (const auto& [d, mu] : samples) {
    dmin = std::min(dmin, d);
    dmax = std::max(dmax, d);
  }
  if (!(dmin > 0.0) || dmax < 10.0 * dmin * (1.0 - 1e-12))
    throw Error(ErrorCode::InsufficientSamples, "d samples must be positive and span at least one decade");

  const auto n = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto [d, mu] = samples[i];
    const double value = model == PowerLawModel::Mu ? mu : 1.0 - mu;
    if (!(value > 0.0)) throw Error(ErrorCode::DomainError, "power-law fit needs positive ordinates");
    X(i, 0) = 1.0;
    X(i, 1) = std::log(d);
    y(i) = std::log(value);
  }
  const Eigen::Vector2d beta = X.colPivHouseholderQr().solve(y);
  PowerLawFit fit{std::exp(beta(0)), beta(1), 0.0};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double predicted = fit.A * std::pow(samples[i].first, fit.p);
    const double actual = std::exp(y(i));
    fit.max_rel_residual = std::max(fit.max_rel_residual, std::abs(predicted - actual) / actual);
  }
  return fit;
}

}  // namespace ringsnake
