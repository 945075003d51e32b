#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ringsnake/diagram.hpp"

using namespace ringsnake;

namespace {

RingModel ring(int N, int m, double d) {
  RingModel model;
  model.N = N;
  model.m = m;
  model.d = d;
  return model;
}

// Norms at the folds of the primary branch whose mu lies below `split`.
std::vector<double> fold_norms(const Branch& br, double split, bool below) {
  std::vector<double> out;
  for (const auto& e : br.events)
    if (e.kind == EventKind::Fold && (e.mu < split) == below) out.push_back(br.points[e.point_index].U.norm());
  return out;
}

}  // namespace

TEST_SUITE("diagram") {
  TEST_CASE("mode selection") {
    CHECK(auto_mode(ring(20, 1, 0.01)) == DiagramMode::SparseSnake);
    CHECK(auto_mode(ring(20, 2, 0.01)) == DiagramMode::SparseSnake);
    CHECK(auto_mode(ring(6, 2, 0.01)) == DiagramMode::Special62);
    CHECK(auto_mode(ring(8, 3, 0.01)) == DiagramMode::Special83);
    CHECK(auto_mode(ring(8, 4, 0.01)) == DiagramMode::AllToAll);
    CHECK(auto_mode(ring(9, 4, 0.01)) == DiagramMode::AllToAll);
    CHECK(auto_mode(ring(20, 5, 0.01)) == DiagramMode::GenericM);
    for (auto m : {DiagramMode::SparseSnake, DiagramMode::Special62, DiagramMode::Special83, DiagramMode::AllToAll,
                   DiagramMode::GenericM})
      CHECK(parse_mode(to_string(m)) == m);
    CHECK_THROWS_AS(parse_mode("zigzag"), Error);
  }

  TEST_CASE("gamma sequences") {
    const auto model = ring(10, 1, 0.01);
    const auto sparse = gamma_sequence(GammaMatch::Sparse, model);
    REQUIRE(sparse.size() == 12);
    CHECK(sparse.front() == PatternLabel{PatternFamily::Vbar, 1});
    CHECK(sparse.back() == PatternLabel{PatternFamily::Ubar, 6});
    CHECK(gamma_sequence(GammaMatch::G62, ring(6, 2, 0.01)).size() == 5);
    CHECK(gamma_sequence(GammaMatch::G83, ring(8, 3, 0.01)).size() == 7);
    CHECK(gamma_sequence(GammaMatch::AllToAll_k, ring(6, 3, 0.01), 2).at(2) == PatternLabel{PatternFamily::B, 2});
    CHECK(gamma_sequence(GammaMatch::None, model).empty());

    const std::vector<PatternLabel> seq{{PatternFamily::Vbar, 1}, {PatternFamily::W23, 0}, {PatternFamily::Ubar, 1}};
    CHECK(contains_in_order(seq, {{PatternFamily::Vbar, 1}, {PatternFamily::Ubar, 1}}));
    CHECK_FALSE(contains_in_order(seq, {{PatternFamily::Ubar, 1}, {PatternFamily::Vbar, 1}}));
    CHECK(contains_in_order(seq, {}));
  }

  TEST_CASE("effective options") {
    DiagramOptions opts;
    opts.cont.ds_max = 0.05;
    opts.cont.ds_init = 0.02;
    auto cont = effective_options(ring(10, 1, 0.004), opts);
    CHECK(cont.ds_max == 0.004);
    CHECK(cont.ds_init == 0.004);
    CHECK(cont.max_steps >= 10000);
    CHECK(cont.bistable_mu_max == doctest::Approx(1.0));
    opts.cap_steps_at_d = false;
    cont = effective_options(ring(10, 1, 0.004), opts);
    CHECK(cont.ds_max == 0.05);
    RingModel nc = ring(10, 1, 0.004);
    nc.nonlinearity = Nonlinearity::normal_form_cubic();
    CHECK(effective_options(nc, {}).bistable_mu_max == doctest::Approx(0.25).epsilon(1e-9));
  }

  TEST_CASE("sparse snake on a short ring") {
    const Diagram dg = build_diagram(ring(6, 1, 0.005));
    CHECK(dg.mode == DiagramMode::SparseSnake);
    CHECK(dg.summary.gamma_match == GammaMatch::Sparse);
    REQUIRE(dg.branches.size() == 2);
    CHECK(dg.branches[1].homogeneous);
    CHECK_FALSE(dg.branches[0].homogeneous);

    // Folds alternate between the two ends and the norms increase up the snake.
    const auto& snake = dg.branches[0];
    const auto lefts = fold_norms(snake, 0.5, true), rights = fold_norms(snake, 0.5, false);
    CHECK(lefts.size() >= 2);
    CHECK(rights.size() >= 2);
    CHECK(std::abs(static_cast<int>(lefts.size()) - static_cast<int>(rights.size())) <= 1);
    CHECK(std::is_sorted(lefts.begin(), lefts.end()) != std::is_sorted(lefts.rbegin(), lefts.rend()));
    std::vector<double> fold_mu = snake.event_mus(EventKind::Fold);
    for (std::size_t i = 1; i < fold_mu.size(); ++i) CHECK((fold_mu[i] < 0.5) != (fold_mu[i - 1] < 0.5));

    // Stable arcs run between a right fold below and a left fold above.
    const auto st = snake.stability();
    CHECK(std::count(st.begin(), st.end(), 0) > 0);
    CHECK(*std::max_element(st.begin(), st.end()) >= 1);
  }

  TEST_CASE("special ring N=6, m=2") {
    const Diagram dg = build_diagram(ring(6, 2, 0.005));
    CHECK(dg.mode == DiagramMode::Special62);
    CHECK(dg.summary.gamma_match == GammaMatch::G62);
  }

  TEST_CASE("special ring N=8, m=3") {
    const Diagram dg = build_diagram(ring(8, 3, 0.005));
    CHECK(dg.mode == DiagramMode::Special83);
    CHECK(dg.summary.gamma_match == GammaMatch::G83);
    CHECK(dg.summary.branch_point_count >= 1);
    CHECK(dg.branches.size() >= 2);
  }

  TEST_CASE("all-to-all loops") {
    for (int k = 1; k <= 3; ++k) {
      CAPTURE(k);
      DiagramOptions opts;
      opts.k = k;
      const Diagram dg = build_diagram(ring(6, 3, 0.005), opts);
      CHECK(dg.mode == DiagramMode::AllToAll);
      CHECK(dg.reduction == "twoblock:" + std::to_string(k));
      REQUIRE(dg.branches.size() == 2);
      CHECK(dg.branches[0].homogeneous);
      CHECK(dg.origins[1].parent == 0);
      CHECK(dg.summary.closed);
      CHECK(dg.summary.closure_residual < 1e-6);
      CHECK(dg.summary.gamma_match == GammaMatch::AllToAll_k);
      CHECK(dg.summary.branch_point_count == 2);
    }
    DiagramOptions bad;
    bad.k = 4;
    CHECK_THROWS_AS(build_diagram(ring(6, 3, 0.005), bad), Error);
    bad.k = 1;
    bad.mode = DiagramMode::AllToAll;
    CHECK_THROWS_AS(build_diagram(ring(6, 1, 0.005), bad), Error);
  }

  TEST_CASE("almost all-to-all carries no expectation") {
    const Diagram dg = build_diagram(ring(10, 4, 0.005));
    CHECK(dg.mode == DiagramMode::GenericM);
    CHECK(dg.summary.gamma_match == GammaMatch::None);
    CHECK(dg.summary.note.find("almost all-to-all") != std::string::npos);
  }
}
