#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gossip_nash/graph.hpp"

namespace gossip_nash {

class GameError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Closed action interval Ω_i = [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double clamp(double v) const { return std::clamp(v, lo, hi); }
  bool contains(double v) const { return v >= lo && v <= hi; }
  double midpoint() const { return 0.5 * (lo + hi); }
  double width() const { return hi - lo; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Per-player evaluator: (player, own action, neighbor actions ascending by id).
/// An empty result means the point lies outside the function's domain.
using LocalFunction = std::function<std::optional<double>(Vertex, double, std::span<const double>)>;

/// Constants a game may state analytically; anything left empty is estimated
/// by sampling when needed.
struct DeclaredConstants {
  std::optional<double> gradient_bound;       // C
  std::optional<double> lipschitz;            // ρ, Lipschitz constant of F
  std::optional<double> strong_monotonicity;  // μ
  std::optional<double> neighbor_lipschitz;   // L = max L_i
  std::optional<double> own_lipschitz;        // max σ_i
  std::optional<double> third_derivative;     // η
};

/// N-player game on an interference graph with scalar box-constrained actions.
class GameDefinition {
 public:
  GameDefinition() = default;

  GameDefinition(std::string name, UndirectedGraph interference, std::vector<Interval> bounds, LocalFunction cost,
                 LocalFunction gradient)
      : name_(std::move(name)),
        interference_(std::move(interference)),
        bounds_(std::move(bounds)),
        cost_(std::move(cost)),
        gradient_(std::move(gradient)) {
    if (bounds_.size() != interference_.size()) throw GameError("one action interval per player required");
    for (const Interval& b : bounds_)
      if (!(b.lo <= b.hi) || !std::isfinite(b.lo) || !std::isfinite(b.hi))
        throw GameError("action intervals must be non-empty and bounded");
  }

  const std::string& name() const { return name_; }
  std::size_t size() const { return interference_.size(); }
  const UndirectedGraph& interference() const { return interference_; }
  const std::vector<Interval>& bounds() const { return bounds_; }
  const Interval& bounds(Vertex i) const { return bounds_.at(i); }

  std::optional<double> cost(Vertex i, double own, std::span<const double> neighbors) const {
    check_arity(i, neighbors);
    return cost_(i, own, neighbors);
  }

  std::optional<double> gradient(Vertex i, double own, std::span<const double> neighbors) const {
    check_arity(i, neighbors);
    return gradient_(i, own, neighbors);
  }

  /// x^i_{-i}: the neighbor entries of a full action profile.
  std::vector<double> neighbor_values(std::span<const double> x, Vertex i) const {
    std::vector<double> out;
    out.reserve(interference_.degree(i));
    for (Vertex j : interference_.neighbors(i)) out.push_back(x[j]);
    return out;
  }

  bool in_box(std::span<const double> x) const {
    if (x.size() != size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!bounds_[i].contains(x[i])) return false;
    return true;
  }

  std::vector<double> project(std::span<const double> x) const {
    if (x.size() != size()) throw GameError("profile dimension mismatch");
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = bounds_[i].clamp(x[i]);
    return out;
  }

  std::vector<double> midpoint() const {
    std::vector<double> out;
    for (const Interval& b : bounds_) out.push_back(b.midpoint());
    return out;
  }

  /// F(x) = [∇_{x_i} J_i(x^i)]_i. Throws for profiles outside Ω; empty when
  /// some J_i is not evaluable there.
  std::optional<std::vector<double>> pseudo_gradient(std::span<const double> x) const {
    if (!in_box(x)) throw GameError("pseudo_gradient: profile outside the action box");
    return pseudo_gradient_unchecked(x);
  }

  std::optional<std::vector<double>> pseudo_gradient_unchecked(std::span<const double> x) const {
    std::vector<double> f(size());
    for (Vertex i = 0; i < size(); ++i) {
      const auto nb = neighbor_values(x, i);
      const auto g = gradient_(i, x[i], nb);
      if (!g) return std::nullopt;
      f[i] = *g;
    }
    return f;
  }

  const std::optional<std::vector<double>>& known_ne() const { return known_ne_; }
  void set_known_ne(std::vector<double> x) { known_ne_ = std::move(x); }

  const DeclaredConstants& declared() const { return declared_; }
  void set_declared(DeclaredConstants d) { declared_ = d; }

 private:
  void check_arity(Vertex i, std::span<const double> neighbors) const {
    if (neighbors.size() != interference_.degree(i)) throw GameError("neighbor vector does not match N_I(i)");
  }

  std::string name_;
  UndirectedGraph interference_;
  std::vector<Interval> bounds_;
  LocalFunction cost_;
  LocalFunction gradient_;
  std::optional<std::vector<double>> known_ne_;
  DeclaredConstants declared_;
};

// ---------------------------------------------------------------------------
// Finite-difference gradients

/// (J_i(x_i + c, ·) - J_i(x_i - c, ·)) / 2c.
inline std::optional<double> fd_gradient(const GameDefinition& game, Vertex i, double own,
                                         std::span<const double> neighbors, double c) {
  if (!(c > 0.0)) throw GameError("finite-difference perturbation must be positive");
  const auto up = game.cost(i, own + c, neighbors);
  const auto down = game.cost(i, own - c, neighbors);
  if (!up || !down) return std::nullopt;
  return (*up - *down) / (2.0 * c);
}

struct FdEstimate {
  std::optional<double> value;
  bool one_sided = false;
};

/// Difference quotient with both probe points clipped to Ω_i. Away from the
/// box edges this is the symmetric quotient; at an edge it degrades to a
/// one-sided (or asymmetric) difference.
inline FdEstimate fd_gradient_in_box(const GameDefinition& game, Vertex i, double own,
                                     std::span<const double> neighbors, double c) {
  if (!(c > 0.0)) throw GameError("finite-difference perturbation must be positive");
  const Interval& box = game.bounds(i);
  const double lo = std::max(box.lo, own - c);
  const double hi = std::min(box.hi, own + c);
  FdEstimate out;
  out.one_sided = (lo != own - c) || (hi != own + c);
  if (!(hi > lo)) return out;
  const auto up = game.cost(i, hi, neighbors);
  const auto down = game.cost(i, lo, neighbors);
  if (up && down) out.value = (*up - *down) / (hi - lo);
  return out;
}

/// Perturbation schedule c = c0 (ν + 1)^(-decay). With α = 1/ν and the default
/// decay 1/4, Σ α c² ~ Σ ν^(-3/2) is finite.
struct FdSchedule {
  double c0 = 0.1;
  double decay = 0.25;

  double at(std::uint64_t updates) const { return c0 * std::pow(static_cast<double>(updates) + 1.0, -decay); }
};

// ---------------------------------------------------------------------------
// Benchmark games

/// J_i = ½ q_i x_i² + x_i Σ_j b_ij x_j + c_i x_i with symmetric edge weights b_ij.
///
/// `coupling` holds one weight per edge of `graph`, in `graph.edges()` order.
inline GameDefinition make_quadratic_game(const UndirectedGraph& graph, std::vector<double> q,
                                          std::span<const double> coupling, std::vector<double> c,
                                          std::vector<Interval> bounds);

// ---------------------------------------------------------------------------
// Constants and the centralized oracle

struct GameConstants {
  double gradient_bound = 0.0;       // C
  double lipschitz = 0.0;            // ρ
  double strong_monotonicity = 0.0;  // μ
  double neighbor_lipschitz = 0.0;   // L
  double own_lipschitz = 0.0;        // max σ_i
  double third_derivative = 0.0;     // η
  std::size_t samples = 0;
};

namespace detail {

inline bool evaluable(const GameDefinition& game, std::span<const double> x) {
  return game.pseudo_gradient_unchecked(x).has_value();
}

}  // namespace detail

/// Moves x toward the lower corner of the box until every F_i is evaluable.
inline std::optional<std::vector<double>> shrink_to_domain(const GameDefinition& game, std::vector<double> x,
                                                           int max_halvings = 60) {
  x = game.project(x);
  for (int t = 0; t <= max_halvings; ++t) {
    if (detail::evaluable(game, x)) return x;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = game.bounds(i).lo + 0.5 * (x[i] - game.bounds(i).lo);
  }
  return std::nullopt;
}

/// Estimates ρ, μ, L, σ, C and η from random evaluable points of Ω (sampled
/// uniformly, then shrunk toward the lower corner when outside the domain).
/// Declared constants take precedence over the estimates.
inline GameConstants estimate_constants(const GameDefinition& game, std::size_t samples = 10000,
                                        std::uint64_t seed = 1) {
  const std::size_t n = game.size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&]() -> std::optional<std::vector<double>> {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = game.bounds(i).lo + unit(rng) * game.bounds(i).width();
    return shrink_to_domain(game, std::move(x));
  };

  GameConstants k;
  k.strong_monotonicity = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < samples; ++t) {
    auto x = draw();
    auto y = draw();
    if (!x || !y) continue;
    const auto fx = game.pseudo_gradient_unchecked(*x);
    const auto fy = game.pseudo_gradient_unchecked(*y);
    if (!fx || !fy) continue;
    ++k.samples;
    double dist2 = 0.0, fdist2 = 0.0, inner = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dx = (*x)[i] - (*y)[i];
      const double df = (*fx)[i] - (*fy)[i];
      dist2 += dx * dx;
      fdist2 += df * df;
      inner += dx * df;
      k.gradient_bound = std::max({k.gradient_bound, std::abs((*fx)[i]), std::abs((*fy)[i])});
    }
    if (dist2 > 1e-24) {
      k.lipschitz = std::max(k.lipschitz, std::sqrt(fdist2 / dist2));
      k.strong_monotonicity = std::min(k.strong_monotonicity, inner / dist2);
    }

    // Partial Lipschitz constants: vary own action only / neighbors only.
    for (Vertex i = 0; i < n; ++i) {
      const auto ux = game.neighbor_values(*x, i);
      const auto uy = game.neighbor_values(*y, i);
      const auto g_own_y = game.gradient(i, (*y)[i], ux);
      const auto g_nb_y = game.gradient(i, (*x)[i], uy);
      const double gx = (*fx)[i];
      if (g_own_y && std::abs((*x)[i] - (*y)[i]) > 1e-12)
        k.own_lipschitz = std::max(k.own_lipschitz, std::abs(gx - *g_own_y) / std::abs((*x)[i] - (*y)[i]));
      double du2 = 0.0;
      for (std::size_t a = 0; a < ux.size(); ++a) du2 += (ux[a] - uy[a]) * (ux[a] - uy[a]);
      if (g_nb_y && du2 > 1e-24) k.neighbor_lipschitz = std::max(k.neighbor_lipschitz, std::abs(gx - *g_nb_y) / std::sqrt(du2));

      // Third derivative of J_i in x_i via a second difference of the gradient.
      const double h = 1e-3 * std::max(1.0, game.bounds(i).width());
      const auto gp = game.gradient(i, (*x)[i] + h, ux);
      const auto gm = game.gradient(i, (*x)[i] - h, ux);
      if (gp && gm) k.third_derivative = std::max(k.third_derivative, std::abs(*gp - 2.0 * gx + *gm) / (h * h));
    }
  }
  if (!std::isfinite(k.strong_monotonicity)) k.strong_monotonicity = 0.0;

  const DeclaredConstants& d = game.declared();
  if (d.gradient_bound) k.gradient_bound = *d.gradient_bound;
  if (d.lipschitz) k.lipschitz = *d.lipschitz;
  if (d.strong_monotonicity) k.strong_monotonicity = *d.strong_monotonicity;
  if (d.neighbor_lipschitz) k.neighbor_lipschitz = *d.neighbor_lipschitz;
  if (d.own_lipschitz) k.own_lipschitz = *d.own_lipschitz;
  if (d.third_derivative) k.third_derivative = *d.third_derivative;
  return k;
}

/// ‖x - T_Ω[x - α F(x)]‖; +inf when F is not evaluable at x.
inline double fixed_point_residual(const GameDefinition& game, std::span<const double> x, double alpha) {
  const auto f = game.pseudo_gradient_unchecked(x);
  if (!f) return std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double next = game.bounds(i).clamp(x[i] - alpha * (*f)[i]);
    sum += (x[i] - next) * (x[i] - next);
  }
  return std::sqrt(sum);
}

class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, double last_residual)
      : std::runtime_error(what), last_residual_(last_residual) {}
  double last_residual() const { return last_residual_; }

 private:
  double last_residual_;
};

struct NeSolverOptions {
  double tol = 1e-10;
  std::size_t max_iter = 1'000'000;
  std::optional<double> step;  // initial step; default 1/(ρ̂ + μ̂), or 1e-2 without estimates
  double residual_step = 0.1;  // α in the reported residual ‖x - T_Ω[x - α F(x)]‖
  std::optional<std::vector<double>> start;
  std::size_t constant_samples = 2000;
};

struct NeSolution {
  std::vector<double> x;
  double residual = 0.0;  // measured with residual_step
  double step = 0.0;      // last accepted extragradient step
  std::size_t iterations = 0;
};

/// Extragradient iteration y = T_Ω[x - αF(x)], x ← T_Ω[x - αF(y)] with
/// backtracking: α halves until α‖F(y) - F(x)‖ ≤ 0.9‖y - x‖ and both points are
/// evaluable, then grows by 10% for the next iteration.
inline NeSolution solve_ne_centralized(const GameDefinition& game, const NeSolverOptions& opts = {}) {
  constexpr double kTheta = 0.9;
  constexpr double kGrowth = 1.1;
  constexpr double kMinStep = 1e-14;
  double alpha = 1e-2;
  if (opts.step) {
    alpha = *opts.step;
  } else {
    const GameConstants k = estimate_constants(game, opts.constant_samples, 7);
    if (k.lipschitz + k.strong_monotonicity > 0.0) alpha = 1.0 / (k.lipschitz + k.strong_monotonicity);
  }
  if (!(alpha > 0.0)) throw GameError("oracle step size must be positive");

  auto start = shrink_to_domain(game, opts.start ? *opts.start : game.midpoint());
  if (!start) throw NonConvergence("no evaluable starting point", std::numeric_limits<double>::infinity());
  std::vector<double> x = std::move(*start);
  const std::size_t n = x.size();

  auto step_from = [&](const std::vector<double>& base, const std::vector<double>& dir, double a) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = game.bounds(i).clamp(base[i] - a * dir[i]);
    return out;
  };
  auto distance = [](const std::vector<double>& u, const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += (u[i] - v[i]) * (u[i] - v[i]);
    return std::sqrt(s);
  };

  double residual = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < opts.max_iter; ++it) {
    const auto f = game.pseudo_gradient_unchecked(x);
    if (!f) throw NonConvergence("iterate left the domain", residual);
    residual = distance(x, step_from(x, *f, opts.residual_step));
    if (residual <= opts.tol) return {x, residual, alpha, it};

    for (;;) {
      if (alpha < kMinStep) throw NonConvergence("step size underflow", residual);
      const std::vector<double> y = step_from(x, *f, alpha);
      const auto fy = game.pseudo_gradient_unchecked(y);
      if (!fy || alpha * distance(*fy, *f) > kTheta * distance(y, x)) {
        alpha *= 0.5;
        continue;
      }
      std::vector<double> next = step_from(x, *fy, alpha);
      if (!detail::evaluable(game, next)) {
        alpha *= 0.5;
        continue;
      }
      x.swap(next);
      alpha *= kGrowth;
      break;
    }
  }
  throw NonConvergence("centralized solver did not converge", residual);
}

// ---------------------------------------------------------------------------

inline GameDefinition make_quadratic_game(const UndirectedGraph& graph, std::vector<double> q,
                                          std::span<const double> coupling, std::vector<double> c,
                                          std::vector<Interval> bounds) {
  const std::size_t n = graph.size();
  if (q.size() != n || c.size() != n) throw GameError("quadratic game: q and c need one entry per player");
  if (coupling.size() != graph.edge_count()) throw GameError("quadratic game: one coupling weight per edge required");

  // weights[i][a] = b_{i, N(i)[a]}
  std::vector<std::vector<double>> weights(n);
  for (Vertex i = 0; i < n; ++i) weights[i].assign(graph.degree(i), 0.0);
  const auto& edges = graph.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto& nu = graph.neighbors(edges[e].u);
    const auto& nv = graph.neighbors(edges[e].v);
    weights[edges[e].u][std::lower_bound(nu.begin(), nu.end(), edges[e].v) - nu.begin()] = coupling[e];
    weights[edges[e].v][std::lower_bound(nv.begin(), nv.end(), edges[e].u) - nv.begin()] = coupling[e];
  }
  for (Vertex i = 0; i < n; ++i) {
    double off = 0.0;
    for (double w : weights[i]) off += std::abs(w);
    if (!(q[i] > off)) throw GameError("quadratic game: q_i must dominate the coupling row sum of player " + std::to_string(i));
  }

  auto cost = [q, c, weights](Vertex i, double own, std::span<const double> nb) -> std::optional<double> {
    double coupling_term = 0.0;
    for (std::size_t a = 0; a < nb.size(); ++a) coupling_term += weights[i][a] * nb[a];
    return 0.5 * q[i] * own * own + own * coupling_term + c[i] * own;
  };
  auto grad = [q, c, weights](Vertex i, double own, std::span<const double> nb) -> std::optional<double> {
    double coupling_term = 0.0;
    for (std::size_t a = 0; a < nb.size(); ++a) coupling_term += weights[i][a] * nb[a];
    return q[i] * own + coupling_term + c[i];
  };

  GameDefinition game("quadratic", graph, bounds, cost, grad);

  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs(n);
  for (Vertex i = 0; i < n; ++i) {
    m(i, i) = q[i];
    rhs[i] = -c[i];
    for (std::size_t a = 0; a < graph.degree(i); ++a) m(i, graph.neighbors(i)[a]) = weights[i][a];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  DeclaredConstants d;
  d.lipschitz = eig.eigenvalues().cwiseAbs().maxCoeff();
  d.strong_monotonicity = eig.eigenvalues().minCoeff();
  d.third_derivative = 0.0;
  double big_l = 0.0, big_sigma = 0.0, big_c = 0.0;
  for (Vertex i = 0; i < n; ++i) {
    double row2 = 0.0;
    for (double w : weights[i]) row2 += w * w;
    big_l = std::max(big_l, std::sqrt(row2));
    big_sigma = std::max(big_sigma, q[i]);
    // |∇_i J_i| is affine in the profile, so its maximum sits at a box corner.
    double hi = c[i], lo = c[i];
    auto extend = [&](double coef, const Interval& b) {
      hi += std::max(coef * b.lo, coef * b.hi);
      lo += std::min(coef * b.lo, coef * b.hi);
    };
    extend(q[i], bounds[i]);
    for (std::size_t a = 0; a < graph.degree(i); ++a) extend(weights[i][a], bounds[graph.neighbors(i)[a]]);
    big_c = std::max({big_c, std::abs(hi), std::abs(lo)});
  }
  d.neighbor_lipschitz = big_l;
  d.own_lipschitz = big_sigma;
  d.gradient_bound = big_c;
  game.set_declared(d);

  const Eigen::VectorXd unconstrained = m.ldlt().solve(rhs);
  std::vector<double> ne(unconstrained.data(), unconstrained.data() + n);
  if (!game.in_box(ne)) {
    NeSolverOptions opts;
    opts.tol = 1e-13;
    opts.step = 1.0 / (*d.lipschitz + *d.strong_monotonicity);
    ne = solve_ne_centralized(game, opts).x;
  }
  game.set_known_ne(std::move(ne));
  return game;
}

/// Uniform-weight convenience overload: every edge gets the same coupling b.
inline GameDefinition make_quadratic_game(const UndirectedGraph& graph, double q, double b, double c, Interval box) {
  const std::size_t n = graph.size();
  std::vector<double> coupling(graph.edge_count(), b);
  return make_quadratic_game(graph, std::vector<double>(n, q), coupling, std::vector<double>(n, c),
                             std::vector<Interval>(n, box));
}


// ---------------------------------------------------------------------------
// Wireless ad-hoc network congestion game

/// User i routes flow x_i over the links R_i = paths[i]. Link L carries the sum
/// of the flows of all users whose path contains it.
struct WanetSpec {
  std::vector<std::vector<std::size_t>> paths;
  std::vector<double> capacities;
  double kappa = 1.0;
  std::vector<double> chi;
  std::vector<Interval> bounds;
  double capacity_margin = 1e-6;  // loads at or above C - margin are outside the domain
};

/// Users are adjacent when their paths share a link.
inline UndirectedGraph wanet_interference_graph(const std::vector<std::vector<std::size_t>>& paths,
                                                std::size_t links) {
  std::vector<std::vector<Vertex>> users(links);
  for (Vertex i = 0; i < paths.size(); ++i)
    for (std::size_t l : paths[i]) {
      if (l >= links) throw GameError("path references an unknown link");
      users[l].push_back(i);
    }
  std::vector<Edge> edges;
  for (const auto& on_link : users)
    for (std::size_t a = 0; a < on_link.size(); ++a)
      for (std::size_t b = a + 1; b < on_link.size(); ++b)
        if (on_link[a] != on_link[b]) edges.emplace_back(on_link[a], on_link[b]);
  return UndirectedGraph(paths.size(), edges);
}

inline GameDefinition make_wanet_game(const WanetSpec& spec) {
  const std::size_t n = spec.paths.size();
  const std::size_t links = spec.capacities.size();
  if (n == 0) throw GameError("wanet: no users");
  if (!(spec.kappa > 0.0)) throw GameError("wanet: kappa must be positive");
  if (spec.chi.size() != n || spec.bounds.size() != n) throw GameError("wanet: chi and bounds need one entry per user");
  for (double c : spec.capacities)
    if (!(c > 0.0)) throw GameError("wanet: capacities must be positive");
  for (double x : spec.chi)
    if (!(x > 0.0)) throw GameError("wanet: chi must be positive");
  for (const auto& p : spec.paths) {
    if (p.empty()) throw GameError("wanet: every user needs a non-empty path");
    std::vector<std::size_t> sorted(p);
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw GameError("wanet: repeated link in a path");
  }

  UndirectedGraph g = wanet_interference_graph(spec.paths, links);

  // For user i and each link on its path: capacity and the positions (within
  // the neighbor vector of i) of the other users on that link.
  struct LinkTerm {
    double capacity;
    std::vector<std::size_t> others;
  };
  std::vector<std::vector<LinkTerm>> terms(n);
  for (Vertex i = 0; i < n; ++i) {
    const auto& nb = g.neighbors(i);
    for (std::size_t l : spec.paths[i]) {
      LinkTerm t{spec.capacities[l], {}};
      for (std::size_t a = 0; a < nb.size(); ++a) {
        const auto& pj = spec.paths[nb[a]];
        if (std::find(pj.begin(), pj.end(), l) != pj.end()) t.others.push_back(a);
      }
      terms[i].push_back(std::move(t));
    }
  }

  const double kappa = spec.kappa;
  const double margin = spec.capacity_margin;
  const std::vector<double> chi = spec.chi;
  // Returns Σ_L κ/(C_L - load_L)^power, or nothing when a link is saturated.
  auto barrier = [terms, kappa, margin](Vertex i, double own, std::span<const double> nb,
                                        int power) -> std::optional<double> {
    double sum = 0.0;
    for (const LinkTerm& t : terms[i]) {
      double load = own;
      for (std::size_t a : t.others) load += nb[a];
      const double slack = t.capacity - load;
      if (!(slack > margin)) return std::nullopt;
      sum += kappa / (power == 1 ? slack : slack * slack);
    }
    return sum;
  };
  auto cost = [barrier, chi](Vertex i, double own, std::span<const double> nb) -> std::optional<double> {
    if (!(own > -1.0)) return std::nullopt;
    const auto b = barrier(i, own, nb, 1);
    if (!b) return std::nullopt;
    return *b - chi[i] * std::log(own + 1.0);
  };
  auto grad = [barrier, chi](Vertex i, double own, std::span<const double> nb) -> std::optional<double> {
    if (!(own > -1.0)) return std::nullopt;
    const auto b = barrier(i, own, nb, 2);
    if (!b) return std::nullopt;
    return *b - chi[i] / (own + 1.0);
  };
  return GameDefinition("wanet", std::move(g), spec.bounds, cost, grad);
}

/// Random instance: links form a chain 0..links-1 and each user routes over a
/// contiguous run of 1..max_hops links. Redrawn until the interference graph
/// is connected and not complete.
inline WanetSpec generate_wanet_spec(std::size_t users, std::size_t links, std::uint64_t seed, std::size_t max_hops = 3,
                                     double capacity = 10.0, double chi = 10.0, Interval box = {0.0, 10.0},
                                     double kappa = 1.0) {
  if (users < 3 || links < 1 || max_hops < 1) throw GameError("wanet generator: instance too small");
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    WanetSpec spec;
    spec.capacities.assign(links, capacity);
    spec.chi.assign(users, chi);
    spec.bounds.assign(users, box);
    spec.kappa = kappa;
    for (std::size_t i = 0; i < users; ++i) {
      const std::size_t hops = 1 + rng() % std::min(max_hops, links);
      const std::size_t start = rng() % (links - hops + 1);
      std::vector<std::size_t> path;
      for (std::size_t h = 0; h < hops; ++h) path.push_back(start + h);
      spec.paths.push_back(std::move(path));
    }
    const UndirectedGraph g = wanet_interference_graph(spec.paths, links);
    if (is_connected(g) && !is_complete(g)) return spec;
  }
  throw GameError("wanet generator: no connected, non-complete instance found");
}

}  // namespace gossip_nash
