#include "ringsnake/export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "ringsnake/errors.hpp"

namespace ringsnake {

using nlohmann::json;

namespace {

template <typename Derived>
json vec_json(const Eigen::MatrixBase<Derived>& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vec<double> vec_from(const json& j) {
  Vec<double> v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

template <typename Enum, std::size_t K>
Enum enum_from(const std::string& text, const Enum (&values)[K], const char* what) {
  for (Enum e : values)
    if (text == to_string(e)) return e;
  throw Error(ErrorCode::ConfigError, std::string("unknown ") + what + " '" + text + "'");
}

constexpr EventKind kEventKinds[] = {EventKind::Fold, EventKind::BranchPoint, EventKind::WindowExit,
                                     EventKind::LabelStop, EventKind::Closure};
constexpr Termination kTerminations[] = {Termination::MaxSteps,  Termination::WindowExit,   Termination::LabelStop,
                                         Termination::Closure,   Termination::StepCollapse, Termination::Sampled};
constexpr DiagramMode kModes[] = {DiagramMode::SparseSnake, DiagramMode::Special62, DiagramMode::Special83,
                                  DiagramMode::AllToAll, DiagramMode::GenericM};
constexpr GammaMatch kGammas[] = {GammaMatch::Sparse, GammaMatch::G62, GammaMatch::G83, GammaMatch::AllToAll_k,
                                  GammaMatch::None};

std::string fmt(double v, const char* spec = "%.17g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

json to_json(const RingModel& model) {
  return {{"N", model.N},
          {"m", model.m},
          {"d", model.d},
          {"nonlinearity", {{"kind", to_string(model.nonlinearity.kind)}, {"coefficients", model.nonlinearity.coefficients}}}};
}

RingModel model_from_json(const json& j) {
  RingModel model;
  model.N = j.at("N").get<int>();
  model.m = j.at("m").get<int>();
  model.d = j.at("d").get<double>();
  // The nonlinearity is {"kind", "coefficients"}; a bare kind string is
  // accepted too.
  std::string kind = "cubic-quintic";
  std::vector<double> coeffs;
  if (j.contains("nonlinearity")) {
    const json& nl = j["nonlinearity"];
    if (nl.is_string()) {
      kind = nl.get<std::string>();
    } else {
      kind = nl.value("kind", kind);
      coeffs = nl.value("coefficients", coeffs);
    }
  }
  if (kind == "cubic-quintic" || kind == "CubicQuintic") {
    model.nonlinearity = Nonlinearity::cubic_quintic();
  } else if (kind == "normal-cubic" || kind == "NormalFormCubic") {
    model.nonlinearity = Nonlinearity::normal_form_cubic();
  } else if (kind == "normal-fold" || kind == "NormalFormFold") {
    model.nonlinearity = Nonlinearity::normal_form_fold();
  } else if (kind == "poly" || kind == "CustomOddPolynomial") {
    model.nonlinearity = Nonlinearity::odd_polynomial(coeffs);
  } else {
    throw Error(ErrorCode::ConfigError, "unknown nonlinearity '" + kind + "'");
  }
  model.validate();
  return model;
}

json to_json(const Diagram& dg) {
  json branches = json::array();
  for (std::size_t b = 0; b < dg.branches.size(); ++b) {
    const Branch& br = dg.branches[b];
    const BranchOrigin origin = b < dg.origins.size() ? dg.origins[b] : BranchOrigin{};
    json points = json::array();
    for (const auto& p : br.points) {
      points.push_back({{"mu", p.mu},
                        {"u", vec_json(p.U)},
                        {"l2norm", p.U.norm()},
                        {"stability", p.stability},
                        {"label", p.label ? json(to_string(*p.label)) : json(nullptr)}});
    }
    json events = json::array();
    for (const auto& e : br.events) {
      json ev = {{"kind", to_string(e.kind)}, {"mu", e.mu}, {"point_index", e.point_index}, {"tangent_mu", e.tangent_mu}};
      if (e.null_vector.size() > 0) ev["null_vector"] = vec_json(e.null_vector);
      events.push_back(std::move(ev));
    }
    branches.push_back({{"id", static_cast<int>(b)},
                        {"parent", origin.parent},
                        {"origin_point", origin.point_index},
                        {"homogeneous", br.homogeneous},
                        {"termination", to_string(br.termination)},
                        {"closure_residual", br.closure_residual},
                        {"points", std::move(points)},
                        {"events", std::move(events)}});
  }
  json labels = json::array();
  for (const auto& l : dg.summary.label_sequence) labels.push_back(to_string(l));
  return {{"model", to_json(dg.model)},
          {"mode", to_string(dg.mode)},
          {"k", dg.k},
          {"reduction", dg.reduction},
          {"branches", std::move(branches)},
          {"summary",
           {{"fold_count", dg.summary.fold_count},
            {"branch_point_count", dg.summary.branch_point_count},
            {"closed", dg.summary.closed},
            {"closure_residual", dg.summary.closure_residual},
            {"label_sequence", std::move(labels)},
            {"gamma_match", to_string(dg.summary.gamma_match)},
            {"note", dg.summary.note}}}};
}

Diagram diagram_from_json(const json& j) {
  Diagram dg;
  dg.model = model_from_json(j.at("model"));
  dg.mode = enum_from(j.value("mode", std::string("sparse")), kModes, "mode");
  dg.k = j.value("k", 0);
  dg.reduction = j.value("reduction", std::string("kappa"));
  const SymmetryReduction red = parse_reduction(dg.reduction, dg.model.N);

  for (const auto& jb : j.at("branches")) {
    Branch br;
    br.homogeneous = jb.value("homogeneous", false);
    br.termination = enum_from(jb.value("termination", std::string("MaxSteps")), kTerminations, "termination");
    br.closure_residual = jb.value("closure_residual", 0.0);
    for (const auto& jp : jb.at("points")) {
      ContinuationPoint p;
      p.mu = jp.at("mu").get<double>();
      p.U = vec_from(jp.at("u"));
      if (p.U.size() != dg.model.N)
        throw Error(ErrorCode::DimensionMismatch, "point has " + std::to_string(p.U.size()) + " entries, N is " +
                                                      std::to_string(dg.model.N));
      p.x = red.project(p.U);
      p.stability = jp.value("stability", 0);
      if (jp.contains("label") && !jp["label"].is_null()) p.label = parse_label(jp["label"].get<std::string>());
      br.points.push_back(std::move(p));
    }
    for (const auto& je : jb.at("events")) {
      BranchEvent e;
      e.kind = enum_from(je.at("kind").get<std::string>(), kEventKinds, "event kind");
      e.mu = je.at("mu").get<double>();
      e.point_index = je.at("point_index").get<int>();
      e.tangent_mu = je.value("tangent_mu", 0.0);
      if (je.contains("null_vector")) e.null_vector = vec_from(je["null_vector"]);
      br.events.push_back(std::move(e));
    }
    dg.branches.push_back(std::move(br));
    dg.origins.push_back({jb.value("parent", -1), jb.value("origin_point", -1)});
  }

  const json& js = j.at("summary");
  dg.summary.fold_count = js.at("fold_count").get<int>();
  dg.summary.branch_point_count = js.at("branch_point_count").get<int>();
  dg.summary.closed = js.at("closed").get<bool>();
  dg.summary.closure_residual = js.value("closure_residual", 0.0);
  for (const auto& l : js.at("label_sequence")) dg.summary.label_sequence.push_back(parse_label(l.get<std::string>()));
  dg.summary.gamma_match = enum_from(js.at("gamma_match").get<std::string>(), kGammas, "gamma match");
  dg.summary.note = js.value("note", std::string());
  return dg;
}

std::string export_json(const Diagram& diagram) { return to_json(diagram).dump(1) + "\n"; }

std::string export_csv(const Diagram& dg) {
  std::string out = "branch_id,point_index,mu,l2norm,stability,label\n";
  for (std::size_t b = 0; b < dg.branches.size(); ++b) {
    const auto& pts = dg.branches[b].points;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto& p = pts[i];
      out += std::to_string(b) + "," + std::to_string(i) + "," + fmt(p.mu) + "," + fmt(p.U.norm()) + "," +
             std::to_string(p.stability) + "," + (p.label ? to_string(*p.label) : std::string()) + "\n";
    }
  }
  return out;
}

std::string render_svg(const Diagram& dg, const SvgStyle& st) {
  double mu_lo = std::numeric_limits<double>::infinity(), mu_hi = -mu_lo;
  double n_lo = mu_lo, n_hi = -mu_lo;
  for (const auto& br : dg.branches)
    for (const auto& p : br.points) {
      mu_lo = std::min(mu_lo, p.mu);
      mu_hi = std::max(mu_hi, p.mu);
      n_lo = std::min(n_lo, p.U.norm());
      n_hi = std::max(n_hi, p.U.norm());
    }
  if (!std::isfinite(mu_lo)) mu_lo = 0.0, mu_hi = 1.0, n_lo = 0.0, n_hi = 1.0;
  if (mu_hi - mu_lo < 1e-12) mu_hi = mu_lo + 1.0;
  if (n_hi - n_lo < 1e-12) n_hi = n_lo + 1.0;

  const double w = st.width - 2.0 * st.margin, h = st.height - 2.0 * st.margin;
  auto X = [&](double mu) { return st.margin + w * (mu - mu_lo) / (mu_hi - mu_lo); };
  auto Y = [&](double n) { return st.margin + h * (1.0 - (n - n_lo) / (n_hi - n_lo)); };
  auto c = [](double v) { return fmt(v, "%.2f"); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << st.width << "\" height=\"" << st.height
     << "\" viewBox=\"0 0 " << st.width << " " << st.height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<rect x=\"" << st.margin << "\" y=\"" << st.margin << "\" width=\"" << c(w) << "\" height=\"" << c(h)
     << "\" fill=\"none\" stroke=\"#888\"/>\n";
  os << "<text x=\"" << c(st.margin + w / 2) << "\" y=\"" << st.height - st.margin / 3
     << "\" font-size=\"14\" text-anchor=\"middle\">mu</text>\n";
  os << "<text x=\"" << st.margin / 3 << "\" y=\"" << c(st.margin + h / 2)
     << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 " << st.margin / 3 << " "
     << c(st.margin + h / 2) << ")\">|U|</text>\n";
  for (const auto& [v, anchor] : {std::pair{mu_lo, "start"}, std::pair{mu_hi, "end"}})
    os << "<text x=\"" << c(X(v)) << "\" y=\"" << c(st.margin + h + 16) << "\" font-size=\"11\" text-anchor=\""
       << anchor << "\">" << fmt(v, "%.4g") << "</text>\n";
  for (double v : {n_lo, n_hi})
    os << "<text x=\"" << st.margin - 4 << "\" y=\"" << c(Y(v) + 4) << "\" font-size=\"11\" text-anchor=\"end\">"
       << fmt(v, "%.4g") << "</text>\n";

  for (std::size_t b = 0; b < dg.branches.size(); ++b) {
    const Branch& br = dg.branches[b];
    os << "<polyline class=\"branch\" data-branch=\"" << b << "\" fill=\"none\" stroke=\"black\" stroke-width=\""
       << st.stroke << "\"";
    if (br.homogeneous) os << " stroke-dasharray=\"1,3\"";
    os << " points=\"";
    for (std::size_t i = 0; i < br.points.size(); ++i)
      os << (i ? " " : "") << c(X(br.points[i].mu)) << "," << c(Y(br.points[i].U.norm()));
    os << "\"/>\n";
  }
  const double r = st.marker;
  for (const auto& br : dg.branches)
    for (const auto& e : br.events) {
      if (e.point_index < 0 || e.point_index >= static_cast<int>(br.points.size())) continue;
      const double x = X(e.mu), y = Y(br.points[e.point_index].U.norm());
      switch (e.kind) {
        case EventKind::Fold:
          os << "<circle class=\"fold\" cx=\"" << c(x) << "\" cy=\"" << c(y) << "\" r=\"" << r
             << "\" fill=\"black\"/>\n";
          break;
        case EventKind::BranchPoint:
          os << "<path class=\"branch-point\" d=\"M" << c(x - r) << "," << c(y - r) << " L" << c(x + r) << ","
             << c(y + r) << " M" << c(x - r) << "," << c(y + r) << " L" << c(x + r) << "," << c(y - r)
             << "\" stroke=\"red\" stroke-width=\"1.5\"/>\n";
          break;
        case EventKind::LabelStop:
          os << "<rect class=\"label-stop\" x=\"" << c(x - r) << "\" y=\"" << c(y - r) << "\" width=\"" << 2 * r
             << "\" height=\"" << 2 * r << "\" fill=\"none\" stroke=\"blue\" stroke-width=\"1.5\"/>\n";
          break;
        default:
          break;
      }
    }
  os << "</svg>\n";
  return os.str();
}

json to_json(const VerificationReport& report) {
  json laws = json::array();
  for (const auto& c : report.checks) {
    const auto& law = c.law;
    laws.push_back({{"law", law.name()},
                    {"event", to_string(law.event)},
                    {"event_tag", c.event_tag},
                    {"frame", to_string(law.frame)},
                    {"provenance", to_string(law.provenance)},
                    {"params",
                     {{"N", law.params.N}, {"m", law.params.m}, {"k", law.params.k}, {"a", law.params.a},
                      {"c", law.params.c}}},
                    {"prefactor", law.prefactor},
                    {"exponent", law.exponent},
                    {"from_right", law.from_right},
                    {"d_samples", c.d_samples},
                    {"predicted", c.predicted},
                    {"detected", c.detected},
                    {"fitted_A", c.fit ? json(c.fit->A) : json(nullptr)},
                    {"fitted_p", c.fit ? json(c.fit->p) : json(nullptr)},
                    {"fit_residual", c.fit ? json(c.fit->max_rel_residual) : json(nullptr)},
                    {"max_rel_err", c.max_rel_err},
                    {"coefficient_tol", c.coefficient_tol},
                    {"exponent_ok", c.exponent_ok},
                    {"coefficient_ok", c.coefficient_ok},
                    {"note", c.note}});
  }
  return {{"model", to_json(report.model)},
          {"alltoall", report.alltoall},
          {"exponent_tol", report.exponent_tol},
          {"exponents_ok", report.exponents_ok()},
          {"all_ok", report.all_ok()},
          {"laws", std::move(laws)}};
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot rename into " + path.string());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace ringsnake
