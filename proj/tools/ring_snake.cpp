// ring_snake: bifurcation diagrams of bistable rings from the command line.
//
//   ring_snake diagram --N 8 --m 3 --d 0.002 --out run83
//   ring_snake branch --N 6 --m 1 --seed U:1 --mu 0.5
//   ring_snake verify --N 6 --m 1 --d-sweep 1e-4,3e-4,1e-3,3e-3,1e-2
//   ring_snake plot --from run83/diagram.json
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure,
// 3 verify found a fitted exponent outside tolerance.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ringsnake/diagram.hpp"
#include "ringsnake/errors.hpp"
#include "ringsnake/export.hpp"
#include "ringsnake/verify.hpp"

namespace fs = std::filesystem;
using namespace ringsnake;

namespace {

struct Settings {
  int N = 20;
  int m = 1;
  double d = 0.005;
  std::string nonlinearity = "cubic-quintic";
  std::string out = "out";
  std::string symmetry;
  std::string mode;
  int k = 1;
  std::string seed = "U:1";
  double mu = 0.0;
  std::vector<double> d_sweep;
  std::vector<double> mu_window;
  bool alltoall = false;
  std::string from;
  std::string model_file;
  bool json = false, csv = false, svg = false;
  ContinuationOptions cont;
};

struct Outputs {
  bool json, csv, svg;
};

Outputs outputs(const Settings& s) {
  if (!s.json && !s.csv && !s.svg) return {true, true, true};
  return {s.json, s.csv, s.svg};
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

Nonlinearity parse_nonlinearity(const std::string& text) {
  if (text == "cubic-quintic") return Nonlinearity::cubic_quintic();
  if (text == "normal-cubic") return Nonlinearity::normal_form_cubic();
  if (text.starts_with("poly:")) {
    std::vector<double> coeffs;
    std::stringstream ss(text.substr(5));
    for (std::string item; std::getline(ss, item, ',');) {
      try {
        std::size_t used = 0;
        coeffs.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::logic_error&) {
        throw Error(ErrorCode::ConfigError, "bad polynomial coefficient '" + item + "'");
      }
    }
    return Nonlinearity::odd_polynomial(std::move(coeffs));
  }
  throw Error(ErrorCode::ConfigError,
              "unknown nonlinearity '" + text + "' (cubic-quintic, normal-cubic or poly:c0,c1,...)");
}

nlohmann::json load_json(const std::string& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, "cannot parse " + path + ": " + e.what());
  }
}

// Schema errors in user-supplied JSON are configuration errors.
template <typename Fn>
auto from_json_or_config_error(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, path + ": " + e.what());
  }
}

// Model from --model when given, then any explicit flags on top.
RingModel make_model(const Settings& s, const CLI::App& app) {
  RingModel model;
  if (!s.model_file.empty()) {
    const auto j = load_json(s.model_file);
    model = from_json_or_config_error(s.model_file, [&] { return model_from_json(j); });
  }
  const bool file = !s.model_file.empty();
  if (!file || app.count("--N") > 0) model.N = s.N;
  if (!file || app.count("--m") > 0) model.m = s.m;
  if (!file || app.count("--d") > 0) model.d = s.d;
  if (!file || app.count("--nonlinearity") > 0) model.nonlinearity = parse_nonlinearity(s.nonlinearity);
  if (s.alltoall) model.m = model.N / 2;
  model.validate();
  return model;
}

ContinuationOptions make_cont(const Settings& s) {
  ContinuationOptions cont = s.cont;
  if (!s.mu_window.empty()) {
    if (s.mu_window.size() != 2 || !(s.mu_window[0] < s.mu_window[1]))
      throw Error(ErrorCode::ConfigError, "--mu-window needs lo,hi with lo < hi");
    cont.mu_lo = s.mu_window[0];
    cont.mu_hi = s.mu_window[1];
  }
  cont.validate();
  return cont;
}

int thread_cap() {
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("RING_SNAKE_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || cap < 1)
      throw Error(ErrorCode::ConfigError, "RING_SNAKE_THREADS must be a positive integer");
    threads = std::min<long>(threads, cap);
  }
  return threads;
}

std::string summary_text(const Diagram& dg) {
  std::ostringstream os;
  const auto& s = dg.summary;
  os << "model: N=" << dg.model.N << " m=" << dg.model.m << " d=" << fmt(dg.model.d)
     << " f=" << to_string(dg.model.nonlinearity.kind) << "\n";
  os << "mode: " << to_string(dg.mode);
  if (dg.mode == DiagramMode::AllToAll) os << " k=" << dg.k;
  os << "\nreduction: " << dg.reduction << "\n";
  os << "fold_count: " << s.fold_count << "\n";
  os << "branch_point_count: " << s.branch_point_count << "\n";
  os << "closed: " << (s.closed ? "true" : "false");
  if (s.closed) os << " (residual " << fmt(s.closure_residual) << ")";
  os << "\ngamma_match: " << to_string(s.gamma_match) << "\n";
  os << "label_sequence:";
  for (const auto& l : s.label_sequence) os << " " << to_string(l);
  os << "\n";
  for (std::size_t b = 0; b < dg.branches.size(); ++b) {
    const Branch& br = dg.branches[b];
    os << "branch " << b << (br.homogeneous ? " (homogeneous)" : "") << ": " << br.points.size() << " points, "
       << br.count(EventKind::Fold) << " folds, " << br.count(EventKind::BranchPoint)
       << " branch points, termination " << to_string(br.termination) << "\n";
    for (const auto& e : br.events) {
      if (e.kind != EventKind::Fold && e.kind != EventKind::BranchPoint && e.kind != EventKind::LabelStop) continue;
      os << "  " << to_string(e.kind) << " mu=" << fmt(e.mu);
      const auto& p = br.points[e.point_index];
      if (p.label) os << " " << to_string(*p.label);
      os << "\n";
    }
  }
  if (!s.note.empty()) os << "note: " << s.note << "\n";
  return os.str();
}

void write_diagram(const Diagram& dg, const Settings& s, const std::string& stem) {
  const fs::path dir(s.out);
  fs::create_directories(dir);
  const Outputs o = outputs(s);
  if (o.json) write_file_atomic(dir / (stem + ".json"), export_json(dg));
  if (o.csv) write_file_atomic(dir / (stem + ".csv"), export_csv(dg));
  if (o.svg) write_file_atomic(dir / (stem + ".svg"), render_svg(dg));
  const std::string text = summary_text(dg);
  write_file_atomic(dir / "summary.txt", text);
  std::cout << text;
}

DiagramOptions make_diagram_options(const Settings& s, const CLI::App& sub) {
  DiagramOptions opts;
  opts.cont = make_cont(s);
  if (!s.mode.empty()) opts.mode = parse_mode(s.mode);
  opts.k = s.k;
  if (sub.count("--mu") > 0) opts.seed_mu = s.mu;
  return opts;
}

int cmd_diagram(const Settings& s, const CLI::App& app) {
  const RingModel model = make_model(s, app);
  const Diagram dg = build_diagram(model, make_diagram_options(s, app));
  write_diagram(dg, s, "diagram");
  return 0;
}

int cmd_branch(const Settings& s, const CLI::App& app) {
  const RingModel model = make_model(s, app);
  const PatternLabel label = parse_label(s.seed);
  validate_label(label, model);

  std::string symmetry = s.symmetry;
  if (symmetry.empty()) symmetry = is_block_family(label.family) ? "twoblock:" + std::to_string(label.k) : "kappa";
  const SymmetryReduction red = parse_reduction(symmetry, model.N);
  const ReducedSystem sys(model, red);

  DiagramOptions dopts = make_diagram_options(s, app);
  ContinuationOptions cont = effective_options(model, dopts);
  const double mu = app.count("--mu") > 0 ? s.mu : 0.5 * cont.bistable_mu_max;
  if (cont.stop_labels.empty() && red.kind() != ReductionKind::TwoBlock) cont.stop_labels = exceptional_guards(model);

  const Vec<double> x0 = red.project(make_pattern<double>(label, model, mu));
  Diagram dg;
  dg.model = model;
  dg.mode = model.all_to_all() ? DiagramMode::AllToAll : auto_mode(model);
  dg.k = red.kind() == ReductionKind::TwoBlock ? red.k() : 0;
  dg.reduction = to_string(red);
  Branch br = trace_both_ways(sys, x0, mu, cont);
  br.homogeneous = label.family == PatternFamily::HomogeneousMinus || label.family == PatternFamily::HomogeneousPlus ||
                   label.family == PatternFamily::Zero;
  dg.branches.push_back(std::move(br));
  dg.origins.push_back({});
  summarize(dg);
  write_diagram(dg, s, "branch");
  return 0;
}

std::string verify_text(const VerificationReport& r) {
  std::ostringstream os;
  os << "model: N=" << r.model.N << " m=" << r.model.m << " f=" << to_string(r.model.nonlinearity.kind)
     << (r.alltoall ? " (all-to-all)" : "") << "\n";
  for (const auto& c : r.checks) {
    os << c.law.name() << " [" << c.event_tag << "]: ";
    if (c.fit) {
      os << "A=" << fmt(c.fit->A) << " (law " << fmt(c.law.prefactor) << "), p=" << fmt(c.fit->p) << " (law "
         << fmt(c.law.exponent) << ")";
    } else {
      os << "no fit";
    }
    os << ", exponent " << (c.exponent_ok ? "ok" : "FAIL") << ", coefficient " << (c.coefficient_ok ? "ok" : "off");
    if (!c.note.empty()) os << " (" << c.note << ")";
    os << "\n";
  }
  os << "exponents: " << (r.exponents_ok() ? "ok" : "FAIL") << "\n";
  return os.str();
}

std::string verify_csv(const VerificationReport& r) {
  std::string out = "law,event_tag,d,predicted,detected\n";
  for (const auto& c : r.checks)
    for (std::size_t i = 0; i < c.d_samples.size(); ++i) {
      char row[128];
      std::snprintf(row, sizeof row, "%.17g,%.17g,%.17g", c.d_samples[i], c.predicted[i], c.detected[i]);
      out += c.law.name() + "," + c.event_tag + "," + row + "\n";
    }
  return out;
}

int cmd_verify(const Settings& s, const CLI::App& app) {
  const RingModel model = make_model(s, app);
  VerifyOptions opts;
  if (!s.d_sweep.empty()) opts.d_sweep = s.d_sweep;
  if (app.count("--k") > 0) opts.ks = {s.k};
  opts.threads = thread_cap();
  opts.diagram = make_diagram_options(s, app);
  const VerificationReport report = verify_laws(model, opts);

  const fs::path dir(s.out);
  fs::create_directories(dir);
  const Outputs o = outputs(s);
  if (o.json) write_file_atomic(dir / "verify.json", to_json(report).dump(1) + "\n");
  if (o.csv) write_file_atomic(dir / "verify.csv", verify_csv(report));
  const std::string text = verify_text(report);
  write_file_atomic(dir / "summary.txt", text);
  std::cout << text;
  return report.exponents_ok() ? 0 : 3;
}

int cmd_plot(const Settings& s) {
  if (s.from.empty()) throw Error(ErrorCode::ConfigError, "plot needs --from <diagram.json>");
  const auto j = load_json(s.from);
  const Diagram dg = from_json_or_config_error(s.from, [&] { return diagram_from_json(j); });
  const fs::path dir(s.out);
  fs::create_directories(dir);
  const fs::path target = dir / (fs::path(s.from).stem().string() + ".svg");
  write_file_atomic(target, render_svg(dg));
  std::cout << "wrote " << target.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Settings s;
  CLI::App app{"Bifurcation diagrams of localized states on bistable rings"};
  app.set_config("--config", "", "TOML or INI file with flag values; flags given on the command line win");
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--model", s.model_file, "model JSON {N, m, d, nonlinearity}; explicit flags override it")
      ->check(CLI::ExistingFile);
  app.add_option("--N", s.N, "ring size")->capture_default_str();
  app.add_option("--m", s.m, "coupling range")->capture_default_str();
  app.add_option("--d", s.d, "coupling strength")->capture_default_str();
  app.add_option("--nonlinearity", s.nonlinearity, "cubic-quintic, normal-cubic or poly:c0,c1,...")
      ->capture_default_str();
  app.add_option("--out", s.out, "output directory")->capture_default_str();
  app.add_option("--symmetry", s.symmetry, "full, kappa or twoblock:<k> (branch)");
  app.add_option("--mode", s.mode, "sparse, special62, special83, alltoall or generic");
  app.add_option("--k", s.k, "all-to-all block size")->capture_default_str();
  app.add_option("--seed", s.seed, "seed pattern label (branch)")->capture_default_str();
  app.add_option("--mu", s.mu, "seed parameter; default is the middle of the bistable range");
  app.add_option("--d-sweep", s.d_sweep, "comma separated d values (verify)")->delimiter(',');
  app.add_flag("--alltoall", s.alltoall, "use m = N/2");
  app.add_flag("--json", s.json, "write JSON (with --csv/--svg: only the formats named)");
  app.add_flag("--csv", s.csv, "write CSV");
  app.add_flag("--svg", s.svg, "write SVG");
  app.add_option("--ds", s.cont.ds_init, "initial arclength step")->capture_default_str();
  app.add_option("--ds-max", s.cont.ds_max, "largest arclength step (capped at d)")->capture_default_str();
  app.add_option("--max-steps", s.cont.max_steps, "steps per direction")->capture_default_str();
  app.add_option("--mu-window", s.mu_window, "lo,hi window on mu")->delimiter(',');
  app.add_option("--stop-on-exceptional", s.cont.stop_on_exceptional, "stop at the exceptional end patterns")
      ->capture_default_str();
  app.add_option("--newton-tol", s.cont.newton.tol_residual, "Newton residual tolerance")->capture_default_str();
  app.add_option("--newton-iters", s.cont.newton.max_iters, "Newton iteration limit")->capture_default_str();

  auto* branch = app.add_subcommand("branch", "trace one branch from a seed pattern");
  auto* diagram = app.add_subcommand("diagram", "build the full diagram for the ring");
  auto* verify = app.add_subcommand("verify", "fit event locations over a d-sweep against the asymptotic laws");
  auto* plot = app.add_subcommand("plot", "render a diagram JSON as SVG");
  plot->add_option("--from", s.from, "diagram JSON written by diagram or branch")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (branch->parsed()) return cmd_branch(s, app);
    if (diagram->parsed()) return cmd_diagram(s, app);
    if (verify->parsed()) return cmd_verify(s, app);
    if (plot->parsed()) return cmd_plot(s);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.is_config() ? 1 : 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
