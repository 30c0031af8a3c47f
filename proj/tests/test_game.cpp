#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "gossip_nash/game.hpp"
#include "oracles.hpp"

using namespace gossip_nash;

namespace {

UndirectedGraph example_gi() { return build_graph(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}, {0, 2}}); }

GameDefinition example_game() { return make_quadratic_game(example_gi(), 4.0, 1.0, -4.0, {0.0, 10.0}); }

GameDefinition wanet_game(std::uint64_t seed = 3) { return make_wanet_game(generate_wanet_spec(15, 16, seed)); }

/// One player, J = x⁴ on [-5, 5].
GameDefinition quartic_game() {
  auto cost = [](Vertex, double x, std::span<const double>) -> std::optional<double> { return x * x * x * x; };
  auto grad = [](Vertex, double x, std::span<const double>) -> std::optional<double> { return 4.0 * x * x * x; };
  return GameDefinition("quartic", UndirectedGraph(1, std::vector<Edge>{}), {{-5.0, 5.0}}, cost, grad);
}

std::vector<double> random_feasible(const GameDefinition& g, std::mt19937_64& rng) {
  std::vector<double> x(g.size());
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = g.bounds(i).lo + unit(rng) * g.bounds(i).width();
  return *shrink_to_domain(g, x);
}

}  // namespace

TEST(Quadratic, GradientAtOriginIsLinearTerm) {
  const auto g = make_quadratic_game(example_gi(), {4, 5, 6, 7}, std::vector<double>(5, 1.0), {-1, -2, -3, -4},
                                     std::vector<Interval>(4, {-10.0, 10.0}));
  const auto f = g.pseudo_gradient(std::vector<double>(4, 0.0));
  ASSERT_TRUE(f);
  EXPECT_EQ(*f, (std::vector<double>{-1, -2, -3, -4}));
}

TEST(Quadratic, TwoPlayerClosedForm) {
  const auto g = make_quadratic_game(build_graph(2, {{0, 1}}), {2.0, 2.0}, std::vector<double>{1.0}, {-2.0, -2.0},
                                     std::vector<Interval>(2, {0.0, 10.0}));
  ASSERT_TRUE(g.known_ne());
  EXPECT_NEAR((*g.known_ne())[0], 2.0 / 3.0, 1e-14);
  EXPECT_NEAR((*g.known_ne())[1], 2.0 / 3.0, 1e-14);
}

TEST(Quadratic, DecoupledGameClampsEachPlayer) {
  const auto g = make_quadratic_game(build_graph(3, {{0, 1}, {1, 2}}), {2.0, 4.0, 1.0}, std::vector<double>{0.0, 0.0},
                                     {-4.0, 8.0, -30.0}, std::vector<Interval>(3, {0.0, 10.0}));
  const auto& ne = *g.known_ne();
  EXPECT_NEAR(ne[0], 2.0, 1e-12);
  EXPECT_NEAR(ne[1], 0.0, 1e-12);  // -8/4 clamped
  EXPECT_NEAR(ne[2], 10.0, 1e-12);  // 30 clamped
}

TEST(Quadratic, ExampleEquilibriumMatchesLinearSolve) {
  const auto g = example_game();
  const auto ref = oracle::quadratic_ne(example_gi(), 4.0, 1.0, -4.0);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR((*g.known_ne())[i], ref[i], 1e-13);
  EXPECT_LT(fixed_point_residual(g, *g.known_ne(), 0.1), 1e-8);
}

TEST(Quadratic, ActiveBoxConstraintUsesProjectedSolve) {
  // Unconstrained solution of (3I + A) x = 6 on a triangle is x = 1.2; the box caps it at 1.
  const auto g = make_quadratic_game(complete_graph(3), 3.0, 1.0, -6.0, {0.0, 1.0});
  for (double v : *g.known_ne()) EXPECT_NEAR(v, 1.0, 1e-12);
  NeSolverOptions opts;
  opts.tol = 1e-12;
  const auto sol = solve_ne_centralized(g, opts);
  for (double v : sol.x) EXPECT_NEAR(v, 1.0, 1e-10);
}

TEST(Quadratic, RejectsMissingDominance) {
  EXPECT_THROW(make_quadratic_game(example_gi(), 2.0, 1.0, 0.0, {0.0, 1.0}), GameError);
}

TEST(Quadratic, DeclaredConstants) {
  const auto g = example_game();
  const auto& d = g.declared();
  Eigen::MatrixXd m = 4.0 * Eigen::MatrixXd::Identity(4, 4);
  const auto gi = example_gi();
  for (const Edge& e : gi.edges()) m(e.u, e.v) = m(e.v, e.u) = 1.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  EXPECT_NEAR(*d.strong_monotonicity, es.eigenvalues().minCoeff(), 1e-12);
  EXPECT_NEAR(*d.lipschitz, es.eigenvalues().maxCoeff(), 1e-12);
  // Player 0 has three unit couplings.
  EXPECT_NEAR(*d.neighbor_lipschitz, std::sqrt(3.0), 1e-12);
  // |4·10 + 3·10 - 4| at the top corner.
  EXPECT_NEAR(*d.gradient_bound, 66.0, 1e-12);
}

TEST(Quadratic, CentralizedSolverMatchesClosedForm) {
  const auto g = example_game();
  NeSolverOptions opts;
  opts.tol = 1e-12;
  const auto sol = solve_ne_centralized(g, opts);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(sol.x[i], (*g.known_ne())[i], 1e-10);
}

TEST(Game, OutOfBoxProfileRejected) {
  const auto g = example_game();
  EXPECT_THROW(g.pseudo_gradient(std::vector<double>{0, 0, 0, 11}), GameError);
  EXPECT_THROW(g.gradient(0, 0.0, std::vector<double>{1.0}), GameError);  // wrong arity
}

TEST(Game, GradientIgnoresNonNeighbors) {
  for (const auto& g : {example_game(), wanet_game()}) {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 50; ++t) {
      auto x = random_feasible(g, rng);
      const auto f = *g.pseudo_gradient(x);
      for (Vertex i = 0; i < g.size(); ++i)
        for (Vertex j = 0; j < g.size(); ++j) {
          if (j == i || g.interference().has_edge(i, j)) continue;
          auto y = x;
          y[j] = g.bounds(j).lo;
          const auto nb = g.neighbor_values(y, i);
          EXPECT_EQ(*g.gradient(i, y[i], nb), f[i]);
          EXPECT_EQ(*g.cost(i, y[i], nb), *g.cost(i, x[i], g.neighbor_values(x, i)));
        }
    }
  }
}

TEST(Game, AnalyticGradientMatchesCentralDifferences) {
  for (const auto& g : {example_game(), wanet_game(), wanet_game(8)}) {
    std::mt19937_64 rng(9);
    for (int t = 0; t < 1000; ++t) {
      const auto x = random_feasible(g, rng);
      for (Vertex i = 0; i < g.size(); ++i) {
        const auto nb = g.neighbor_values(x, i);
        const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
        const auto fd = fd_gradient(g, i, x[i], nb, h);
        ASSERT_TRUE(fd);
        const double exact = *g.gradient(i, x[i], nb);
        EXPECT_LT(std::abs(*fd - exact) / std::max(1.0, std::abs(exact)), 1e-5) << g.name();
      }
    }
  }
}

TEST(Game, MonotonicityProbe) {
  for (const auto& g : {example_game(), wanet_game()}) {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 1000; ++t) {
      const auto x = random_feasible(g, rng);
      const auto y = random_feasible(g, rng);
      const auto fx = *g.pseudo_gradient(x);
      const auto fy = *g.pseudo_gradient(y);
      double inner = 0.0, dist = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        inner += (fx[i] - fy[i]) * (x[i] - y[i]);
        dist += (x[i] - y[i]) * (x[i] - y[i]);
      }
      if (dist > 0.0) {
        EXPECT_GT(inner, 0.0) << g.name();
      }
    }
  }
}

TEST(FiniteDifference, ExactForQuadratics) {
  const auto g = example_game();
  const std::vector<double> nb{1.0, 2.0, 3.0};
  for (double c : {1e-3, 0.1, 1.0, 3.0}) EXPECT_NEAR(*fd_gradient(g, 0, 2.5, nb, c), *g.gradient(0, 2.5, nb), 1e-10);
}

TEST(FiniteDifference, QuarticHandValue) {
  const auto g = quartic_game();
  const double fd = *fd_gradient(g, 0, 1.0, {}, 0.1);
  EXPECT_NEAR(fd, 4.04, 1e-12);
  // η = 24 bounds the third derivative on [0.9, 1.1].
  EXPECT_LE(std::abs(fd - 4.0), 24.0 / 6.0 * 0.01 + 1e-12);
}

TEST(FiniteDifference, RejectsNonPositivePerturbation) {
  const auto g = quartic_game();
  EXPECT_THROW(fd_gradient(g, 0, 1.0, {}, 0.0), GameError);
  EXPECT_THROW(fd_gradient_in_box(g, 0, 1.0, {}, -1.0), GameError);
}

TEST(FiniteDifference, WanetErrorShrinksQuadratically) {
  const auto g = wanet_game();
  std::mt19937_64 rng(13);
  const auto x = random_feasible(g, rng);
  for (Vertex i = 0; i < g.size(); ++i) {
    const auto nb = g.neighbor_values(x, i);
    const double exact = *g.gradient(i, x[i], nb);
    const double e1 = std::abs(*fd_gradient(g, i, x[i], nb, 1e-2) - exact);
    const double e2 = std::abs(*fd_gradient(g, i, x[i], nb, 5e-3) - exact);
    if (e1 < 1e-9) continue;  // below the cancellation floor
    EXPECT_NEAR(e1 / e2, 4.0, 0.2);
  }
}

TEST(FiniteDifference, ErrorWithinThirdDerivativeBound) {
  const auto g = wanet_game();
  std::mt19937_64 rng(31);
  for (int t = 0; t < 100; ++t) {
    const auto x = random_feasible(g, rng);
    for (Vertex i = 0; i < g.size(); ++i) {
      const auto nb = g.neighbor_values(x, i);
      const double c = 0.05;
      const auto fd = fd_gradient(g, i, x[i], nb, c);
      if (!fd) continue;
      // Local η: largest third derivative on [x - c, x + c], from second
      // differences of the analytic gradient.
      double eta = 0.0;
      const double h = 1e-3;
      for (int s = 0; s <= 20; ++s) {
        const double p = x[i] - c + 2.0 * c * s / 20.0;
        const auto gp = g.gradient(i, p + h, nb), g0 = g.gradient(i, p, nb), gm = g.gradient(i, p - h, nb);
        if (gp && g0 && gm) eta = std::max(eta, std::abs(*gp - 2.0 * *g0 + *gm) / (h * h));
      }
      EXPECT_LE(std::abs(*fd - *g.gradient(i, x[i], nb)), 1.01 * eta / 6.0 * c * c + 1e-12);
    }
  }
}

TEST(FiniteDifference, ClipsAtBoxEdges) {
  const auto g = example_game();
  const std::vector<double> nb{1.0, 1.0, 1.0};
  const auto at_lo = fd_gradient_in_box(g, 0, 0.0, nb, 0.1);
  EXPECT_TRUE(at_lo.one_sided);
  ASSERT_TRUE(at_lo.value);
  // Forward difference of a quadratic: gradient at the midpoint 0.05.
  EXPECT_NEAR(*at_lo.value, *g.gradient(0, 0.05, nb), 1e-12);
  const auto inside = fd_gradient_in_box(g, 0, 5.0, nb, 0.1);
  EXPECT_FALSE(inside.one_sided);
  EXPECT_NEAR(*inside.value, *g.gradient(0, 5.0, nb), 1e-10);
}

TEST(FiniteDifference, DefaultScheduleIsSummable) {
  const FdSchedule fd;
  EXPECT_DOUBLE_EQ(fd.at(0), 0.1);
  EXPECT_NEAR(fd.at(15), 0.05, 1e-15);
  // Σ (1/ν) c(ν)² ~ Σ ν^{-3/2}: tail beyond 10^5 is about 2·0.01/√(10^5).
  double head = 0.0, total = 0.0;
  for (std::uint64_t nu = 1; nu <= 1'000'000; ++nu) {
    const double term = fd.at(nu) * fd.at(nu) / static_cast<double>(nu);
    total += term;
    if (nu <= 100'000) head = total;
  }
  EXPECT_LT(total - head, 1e-4);
}

TEST(Wanet, SharedLinkGivesEdge) {
  WanetSpec spec;
  spec.paths = {{0}, {0}};
  spec.capacities = {10.0};
  spec.chi = {10.0, 10.0};
  spec.bounds = {{0.0, 10.0}, {0.0, 10.0}};
  const auto g = make_wanet_game(spec);
  EXPECT_EQ(g.interference(), build_graph(2, {{0, 1}}));
}

TEST(Wanet, DomainGuardAtCapacity) {
  WanetSpec spec;
  spec.paths = {{0}, {0}};
  spec.capacities = {10.0};
  spec.chi = {10.0, 10.0};
  spec.bounds = {{0.0, 10.0}, {0.0, 10.0}};
  const auto g = make_wanet_game(spec);
  EXPECT_FALSE(g.gradient(0, 6.0, std::vector<double>{4.0}));
  EXPECT_FALSE(g.cost(0, 5.0, std::vector<double>{5.0 - 1e-7}));
  EXPECT_TRUE(g.cost(0, 5.0, std::vector<double>{4.99}));
}

TEST(Wanet, RejectsInvalidParameters) {
  WanetSpec spec;
  spec.paths = {{0}};
  spec.capacities = {10.0};
  spec.chi = {10.0};
  spec.bounds = {{0.0, 10.0}};
  spec.kappa = 0.0;
  EXPECT_THROW(make_wanet_game(spec), GameError);
  spec.kappa = 1.0;
  spec.paths = {{1}};
  EXPECT_THROW(make_wanet_game(spec), GameError);
}

TEST(Wanet, SingleUserMatchesBisection) {
  WanetSpec spec;
  spec.paths = {{0}};
  spec.capacities = {10.0};
  spec.chi = {10.0};
  spec.bounds = {{0.0, 10.0}};
  const auto g = make_wanet_game(spec);
  // 1/(10 - x)² = 10/(x + 1).
  const double ref = oracle::bisect_increasing(
      [](double x) -> std::optional<double> {
        if (x >= 10.0) return std::nullopt;
        return 1.0 / ((10.0 - x) * (10.0 - x)) - 10.0 / (x + 1.0);
      },
      0.0, 10.0);
  NeSolverOptions opts;
  opts.tol = 1e-12;
  const auto sol = solve_ne_centralized(g, opts);
  EXPECT_NEAR(sol.x[0], ref, 1e-9);
}

TEST(Wanet, GeneratedInstanceShape) {
  const auto spec = generate_wanet_spec(15, 16, 3);
  EXPECT_EQ(spec.paths.size(), 15u);
  EXPECT_EQ(spec.capacities.size(), 16u);
  const auto g = make_wanet_game(spec);
  EXPECT_TRUE(is_connected(g.interference()));
  EXPECT_FALSE(is_complete(g.interference()));
  EXPECT_EQ(generate_wanet_spec(15, 16, 3).paths, spec.paths);
}

TEST(Wanet, CentralizedEquilibriumMatchesBestResponse) {
  const auto g = wanet_game();
  NeSolverOptions opts;
  opts.tol = 1e-10;
  const auto sol = solve_ne_centralized(g, opts);
  EXPECT_LE(sol.residual, 1e-9);
  EXPECT_LE(fixed_point_residual(g, sol.x, 0.1), 1e-9);

  // Gauss-Seidel best responses, each a 1-D bisection on the own-action gradient.
  std::vector<double> x = *shrink_to_domain(g, g.midpoint());
  for (int sweep = 0; sweep < 10000; ++sweep) {
    double change = 0.0;
    for (Vertex i = 0; i < g.size(); ++i) {
      const auto nb = g.neighbor_values(x, i);
      const double br = oracle::bisect_increasing([&](double v) { return g.gradient(i, v, nb); }, g.bounds(i).lo,
                                                  g.bounds(i).hi);
      change = std::max(change, std::abs(br - x[i]));
      x[i] = br;
    }
    if (change < 1e-13) break;
  }
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(sol.x[i], x[i], 1e-6);
}

TEST(Constants, DeclaredValuesWin) {
  const auto g = example_game();
  const auto k = estimate_constants(g, 200);
  EXPECT_EQ(k.lipschitz, *g.declared().lipschitz);
  EXPECT_EQ(k.strong_monotonicity, *g.declared().strong_monotonicity);
  EXPECT_EQ(k.gradient_bound, *g.declared().gradient_bound);
}

TEST(Constants, SampledWanetConstantsArePositive) {
  const auto g = wanet_game();
  const auto k = estimate_constants(g, 2000, 5);
  EXPECT_GT(k.samples, 1000u);
  EXPECT_GT(k.lipschitz, 0.0);
  EXPECT_GT(k.strong_monotonicity, 0.0);
  EXPECT_GT(k.neighbor_lipschitz, 0.0);
  EXPECT_GT(k.gradient_bound, 0.0);
  EXPECT_GE(k.lipschitz, k.strong_monotonicity);
}
