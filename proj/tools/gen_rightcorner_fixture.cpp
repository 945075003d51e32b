// Regenerates tests/fixtures/rightcorner_raw.json: the highest fold on the
// all-to-all loop of the cubic-quintic ring, detected by two-block
// continuation, with a log-log fit of 1 - mu = A d^p per block size.
//
//   gen_rightcorner_fixture [output path]

#include <algorithm>
#include <cmath>
#include <iostream>
#include <optional>
#include <vector>

#include "ringsnake/diagram.hpp"
#include "ringsnake/export.hpp"

using namespace ringsnake;

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : "tests/fixtures/rightcorner_raw.json";
  constexpr int N = 6;
  const std::vector<double> ds{1e-3, 2e-3, 4e-3, 5e-3};
  const std::vector<double> fit_ds{1e-3, 2e-3, 4e-3};

  nlohmann::json out;
  out["nonlinearity"] = "cubic-quintic";
  out["N"] = N;
  out["fit_d"] = fit_ds;
  out["cases"] = nlohmann::json::array();
  try {
    for (int k = 1; k <= N / 2; ++k) {
      nlohmann::json c{{"k", k}, {"samples", nlohmann::json::array()}};
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (double d : ds) {
        RingModel model;
        model.N = N;
        model.m = N / 2;
        model.d = d;
        DiagramOptions opts;
        opts.mode = DiagramMode::AllToAll;
        opts.k = k;
        const Diagram dg = build_diagram(model, opts);
        if (dg.branches.size() < 2) throw Error(ErrorCode::NoConvergence, "no loop branch at d=" + std::to_string(d));
        const auto folds = dg.branches[1].event_mus(EventKind::Fold);
        if (folds.empty()) throw Error(ErrorCode::NoConvergence, "no fold on the loop at d=" + std::to_string(d));
        double mu = folds.front();
        for (double f : folds) mu = std::max(mu, f);
        c["samples"].push_back({{"d", d}, {"mu", mu}});
        if (std::find(fit_ds.begin(), fit_ds.end(), d) == fit_ds.end()) continue;
        const double x = std::log(d), y = std::log(1.0 - mu);
        sx += x, sy += y, sxx += x * x, sxy += x * y;
      }
      const double n = static_cast<double>(fit_ds.size());
      const double p = (n * sxy - sx * sy) / (n * sxx - sx * sx);
      c["fit"] = {{"A", std::exp((sy - p * sx) / n)}, {"p", p}};
      std::cout << "k=" << k << " A=" << c["fit"]["A"] << " p=" << p << "\n";
      out["cases"].push_back(std::move(c));
    }
    write_file_atomic(path, out.dump(1) + "\n");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::cout << "wrote " << path << "\n";
  return 0;
}
