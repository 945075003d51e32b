#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ringsnake/model.hpp"

namespace ringsnake {

// Enum order doubles as the classification tie-break order.
enum class PatternFamily {
  Ubar,
  Vbar,
  W23,
  W24plus,
  W24minus,
  W3minus,
  Aplus,
  Aminus,
  B,
  Cplus,
  Cminus,
  D,
  HomogeneousMinus,
  HomogeneousPlus,
  Zero,
};

struct PatternLabel {
  PatternFamily family = PatternFamily::Zero;
  int k = 0;

  friend bool operator==(const PatternLabel&, const PatternLabel&) = default;
};

inline bool family_has_index(PatternFamily f) {
  switch (f) {
    case PatternFamily::Ubar:
    case PatternFamily::Vbar:
    case PatternFamily::Aplus:
    case PatternFamily::Aminus:
    case PatternFamily::B:
    case PatternFamily::Cplus:
    case PatternFamily::Cminus:
    case PatternFamily::D:
      return true;
    default:
      return false;
  }
}

inline bool is_block_family(PatternFamily f) {
  return f == PatternFamily::Aplus || f == PatternFamily::Aminus || f == PatternFamily::B ||
         f == PatternFamily::Cplus || f == PatternFamily::Cminus || f == PatternFamily::D;
}

inline std::string to_string(const PatternLabel& label) {
  auto indexed = [&](const char* prefix) { return std::string(prefix) + std::to_string(label.k); };
  switch (label.family) {
    case PatternFamily::Ubar: return indexed("U:");
    case PatternFamily::Vbar: return indexed("V:");
    case PatternFamily::W23: return "W23";
    case PatternFamily::W24plus: return "W24+";
    case PatternFamily::W24minus: return "W24-";
    case PatternFamily::W3minus: return "W3-";
    case PatternFamily::Aplus: return indexed("A+:");
    case PatternFamily::Aminus: return indexed("A-:");
    case PatternFamily::B: return indexed("B:");
    case PatternFamily::Cplus: return indexed("C+:");
    case PatternFamily::Cminus: return indexed("C-:");
    case PatternFamily::D: return indexed("D:");
    case PatternFamily::HomogeneousMinus: return "hom-";
    case PatternFamily::HomogeneousPlus: return "hom+";
    case PatternFamily::Zero: return "zero";
  }
  return "?";
}

/// Parses the label grammar ("U:3", "W24+", "hom-", ...). Range checks need a
/// model and live in validate_label.
inline PatternLabel parse_label(std::string_view text) {
  struct Named {
    std::string_view name;
    PatternFamily family;
  };
  static constexpr Named plain[] = {
      {"W23", PatternFamily::W23},          {"W24+", PatternFamily::W24plus},
      {"W24-", PatternFamily::W24minus},    {"W3-", PatternFamily::W3minus},
      {"hom-", PatternFamily::HomogeneousMinus}, {"hom+", PatternFamily::HomogeneousPlus},
      {"zero", PatternFamily::Zero},
  };
  for (const auto& p : plain)
    if (text == p.name) return {p.family, 0};

  static constexpr Named prefixed[] = {
      {"U:", PatternFamily::Ubar},   {"V:", PatternFamily::Vbar},    {"A+:", PatternFamily::Aplus},
      {"A-:", PatternFamily::Aminus}, {"B:", PatternFamily::B},       {"C+:", PatternFamily::Cplus},
      {"C-:", PatternFamily::Cminus}, {"D:", PatternFamily::D},
  };
  for (const auto& p : prefixed) {
    if (!text.starts_with(p.name)) continue;
    auto digits = text.substr(p.name.size());
    int k = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || digits.empty())
      throw Error(ErrorCode::InvalidLabel, "bad index in label '" + std::string(text) + "'");
    return {p.family, k};
  }
  throw Error(ErrorCode::InvalidLabel, "unknown pattern label '" + std::string(text) + "'");
}

inline bool is_special_62(const RingModel& model) { return model.N == 6 && model.m == 2; }
inline bool is_special_83(const RingModel& model) { return model.N == 8 && model.m == 3; }

inline void validate_label(const PatternLabel& label, const RingModel& model) {
  const int r = model.index_set_size();
  const int half = model.half();
  const auto name = to_string(label);
  switch (label.family) {
    case PatternFamily::Ubar:
    case PatternFamily::Vbar:
      if (label.k < 1 || label.k > r)
        throw Error(ErrorCode::InvalidLabel,
                    name + " out of range for N=" + std::to_string(model.N) + ": valid k is 1.." + std::to_string(r));
      return;
    case PatternFamily::W23:
      if (!is_special_62(model)) throw Error(ErrorCode::InvalidLabel, name + " is defined only for N=6, m=2");
      return;
    case PatternFamily::W24plus:
    case PatternFamily::W24minus:
    case PatternFamily::W3minus:
      if (!is_special_83(model)) throw Error(ErrorCode::InvalidLabel, name + " is defined only for N=8, m=3");
      return;
    case PatternFamily::Aplus:
    case PatternFamily::Aminus:
    case PatternFamily::B:
    case PatternFamily::Cplus:
    case PatternFamily::Cminus:
    case PatternFamily::D:
      if (label.k < 1 || label.k > half)
        throw Error(ErrorCode::InvalidLabel,
                    name + " out of range for N=" + std::to_string(model.N) + ": valid k is 1.." + std::to_string(half));
      return;
    default:
      return;
  }
}

/// Values on the representative indices 0..N/2 of a reflection-symmetric
/// pattern, or std::nullopt for the two-block families.
template <typename Scalar = double>
std::optional<Vec<Scalar>> pattern_on_index_set(const PatternLabel& label, const RingModel& model, const Roots& rt) {
  const Scalar up(rt.u_plus), um(rt.u_minus), zero(0);
  const int r = model.index_set_size();
  Vec<Scalar> v = Vec<Scalar>::Zero(r);
  auto set = [&](std::initializer_list<int> one_based, Scalar value) {
    for (int n : one_based) v(n - 1) = value;
  };
  switch (label.family) {
    case PatternFamily::Ubar:
      v.head(label.k).setConstant(up);
      return v;
    case PatternFamily::Vbar:
      v.head(label.k - 1).setConstant(up);
      v(label.k - 1) = um;
      return v;
    case PatternFamily::W23:
      set({1}, up);
      set({2, 3}, um);
      return v;
    case PatternFamily::W24plus:
    case PatternFamily::W24minus:
      set({1}, up);
      set({2, 4}, label.family == PatternFamily::W24plus ? up : um);
      set({3, 5}, zero);
      return v;
    case PatternFamily::W3minus:
      set({1, 2, 4}, up);
      set({3}, um);
      return v;
    case PatternFamily::HomogeneousMinus:
      v.setConstant(um);
      return v;
    case PatternFamily::HomogeneousPlus:
      v.setConstant(up);
      return v;
    case PatternFamily::Zero:
      return v;
    default:
      return std::nullopt;
  }
}

/// Full N-vector of a pattern at d = 0. Reflection-symmetric families are
/// extended by u(N - n) = u(n) (zero-based); block families fill the first k
/// entries and then the remaining N - k.
template <typename Scalar = double>
Vec<Scalar> make_pattern(const PatternLabel& label, const RingModel& model, const Roots& rt) {
  validate_label(label, model);
  const int N = model.N;
  Vec<Scalar> U(N);
  if (auto half = pattern_on_index_set<Scalar>(label, model, rt)) {
    const int r = model.index_set_size();
    for (int n = 0; n < r; ++n) U(n) = (*half)(n);
    for (int n = r; n < N; ++n) U(n) = (*half)(N - n);
    return U;
  }
  const Scalar up(rt.u_plus), um(rt.u_minus), zero(0);
  Scalar first = zero, second = zero;
  switch (label.family) {
    case PatternFamily::Aplus: first = up; break;
    case PatternFamily::Aminus: first = um; break;
    case PatternFamily::B: first = up; second = um; break;
    case PatternFamily::Cplus: second = up; break;
    case PatternFamily::Cminus: second = um; break;
    case PatternFamily::D: first = um; second = up; break;
    default: break;
  }
  U.head(label.k).setConstant(first);
  U.tail(N - label.k).setConstant(second);
  return U;
}

template <typename Scalar = double>
Vec<Scalar> make_pattern(const PatternLabel& label, const RingModel& model, double mu) {
  if (!(mu >= 0.0 && mu <= 1.0))
    throw Error(ErrorCode::DomainError, "patterns are defined for 0 <= mu <= 1, got " + std::to_string(mu));
  return make_pattern<Scalar>(label, model, roots(model.nonlinearity, mu));
}

/// Labels that classify() compares against. All-to-all models use the
/// two-block families, other rings the reflection-symmetric ones.
inline std::vector<PatternLabel> candidate_labels(const RingModel& model) {
  std::vector<PatternLabel> out;
  if (model.all_to_all()) {
    for (auto f : {PatternFamily::Aplus, PatternFamily::Aminus, PatternFamily::B, PatternFamily::Cplus,
                   PatternFamily::Cminus, PatternFamily::D})
      for (int k = 1; k <= model.half(); ++k) out.push_back({f, k});
  } else {
    for (auto f : {PatternFamily::Ubar, PatternFamily::Vbar})
      for (int k = 1; k <= model.index_set_size(); ++k) out.push_back({f, k});
    if (is_special_62(model)) out.push_back({PatternFamily::W23, 0});
    if (is_special_83(model)) {
      out.push_back({PatternFamily::W24plus, 0});
      out.push_back({PatternFamily::W24minus, 0});
      out.push_back({PatternFamily::W3minus, 0});
    }
  }
  out.push_back({PatternFamily::HomogeneousMinus, 0});
  out.push_back({PatternFamily::HomogeneousPlus, 0});
  out.push_back({PatternFamily::Zero, 0});
  std::sort(out.begin(), out.end(), [](const PatternLabel& a, const PatternLabel& b) {
    return a.family != b.family ? a.family < b.family : a.k < b.k;
  });
  return out;
}

inline double default_classify_tol(double d) { return 3.0 * std::max(std::cbrt(d), 1e-6); }

/// Nearest pattern in max-norm within tol; mu is clamped into [0, 1] first.
template <typename Derived>
std::optional<PatternLabel> classify(const Eigen::MatrixBase<Derived>& U, const RingModel& model, double mu,
                                     double tol) {
  mu = std::clamp(mu, 0.0, 1.0);
  Roots rt;
  try {
    rt = roots(model.nonlinearity, mu);
  } catch (const Error&) {
    return std::nullopt;
  }
  std::optional<PatternLabel> best;
  double best_dist = tol;
  for (const auto& label : candidate_labels(model)) {
    const Vec<double> P = make_pattern<double>(label, model, rt);
    const double dist = (U.template cast<double>() - P).cwiseAbs().maxCoeff();
    // Strict comparison keeps the earlier label on ties.
    if (dist < best_dist || (!best && dist <= tol)) {
      best = label;
      best_dist = dist;
    }
  }
  return best;
}

}  // namespace ringsnake
