#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gossip_nash/graph.hpp"
#include "gossip_nash/layout.hpp"

namespace gossip_nash {

class RateError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Inputs of the constant-step rate bound.
struct RateInputs {
  double gamma = 0.0;
  double alpha_max = 0.0;
  double alpha_min = 0.0;
  double p_max = 0.0;
  double p_min = 0.0;
  double gradient_bound = 0.0;       // C
  double neighbor_lipschitz = 0.0;   // L
  double lipschitz = 0.0;            // ρ
  double strong_monotonicity = 0.0;  // μ
  double x_max = 0.0;
  double x_min = 0.0;  // lower bound on |x_i(0)|
  std::size_t players = 0;
};

inline void check_rate_inputs(const RateInputs& in) {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw RateError(std::string(what) + " must be positive and finite");
  };
  positive(in.alpha_max, "alpha_max");
  positive(in.alpha_min, "alpha_min");
  positive(in.p_max, "p_max");
  positive(in.p_min, "p_min");
  positive(in.gradient_bound, "C");
  positive(in.neighbor_lipschitz, "L");
  positive(in.lipschitz, "rho");
  positive(in.strong_monotonicity, "mu");
  positive(in.x_max, "x_max");
  positive(in.x_min, "x_min");
  if (in.players == 0) throw RateError("N must be positive");
  if (!(in.gamma >= 0.0 && in.gamma < 1.0)) throw RateError("gamma must lie in [0, 1)");
  if (in.alpha_min > in.alpha_max || in.p_min > in.p_max || in.x_min > in.x_max)
    throw RateError("min/max inputs are inverted");
}

struct PhiResult {
  double phi = 0.0;
  bool admissible = false;  // 0 < φ < 1
};

/// φ = 1 + (1 + ρ² + 2α_max) p_max α_max - (1 + ρ² + 2μ) p_min α_min.
inline PhiResult compute_phi(const RateInputs& in) {
  const double rho2 = in.lipschitz * in.lipschitz;
  const double phi = 1.0 + (1.0 + rho2 + 2.0 * in.alpha_max) * in.p_max * in.alpha_max -
                     (1.0 + rho2 + 2.0 * in.strong_monotonicity) * in.p_min * in.alpha_min;
  return {phi, phi > 0.0 && phi < 1.0};
}

struct RateConstants {
  double c1 = 0, c2 = 0, c21 = 0, c3 = 0, c4 = 0, c41 = 0, c5 = 0, c51 = 0, c6 = 0, c7 = 0, c8 = 0;
  double a = 0, b = 0;
};

/// C₁ … C₈, a and b. `d_star` is the steady-state offset; leaving it empty
/// takes d*² = C₇, i.e. b = 0.
inline RateConstants constants_chain(const RateInputs& in, std::optional<double> d_star = std::nullopt) {
  check_rate_inputs(in);
  const PhiResult phi = compute_phi(in);
  if (!phi.admissible)
    throw RateError("phi = " + std::to_string(phi.phi) + " is outside (0, 1); the step sizes are not admissible");

  const double n = static_cast<double>(in.players);
  const double am = in.alpha_max;
  const double c = in.gradient_bound;
  const double l = in.neighbor_lipschitz;
  const double sg = std::sqrt(in.gamma);
  const double sqrt2 = std::sqrt(2.0);
  const double xm2 = in.x_max * in.x_max;

  RateConstants k;
  k.c1 = std::max(am * c, in.x_max);
  k.c2 = std::sqrt(n) * in.x_max;
  k.c21 = (2.0 * sqrt2 * k.c1 + 2.0 * am * c) / (1.0 - sg);
  k.c3 = std::max(xm2, am * am * c * c + 2.0 * am * c * k.c1);
  k.c4 = c * k.c2 * am / (1.0 - sg / 2.0);
  k.c41 = (2.0 * sqrt2 / 3.0 * k.c3 + 2.0 * (1.0 + sqrt2) * am * c * k.c1 + c * k.c21 * am * sg + 2.0 * am * am * c * c) /
              (1.0 - sg / 2.0) +
          n * xm2 * sg / 2.0;
  k.c5 = (2.0 * sqrt2 * k.c4 + 4.0 * am * c * k.c2) / (1.0 - in.gamma);
  k.c51 = (4.0 / 3.0 * k.c3 + 4.0 * am * am * c * c + (2.0 * sqrt2 * k.c41 + 4.0 * am * c * k.c21) * sg) / (1.0 - in.gamma) +
          in.gamma * n * xm2;
  k.c6 = std::max(n * xm2, 4.0 * n * c * c * in.p_max * am * am + 2.0 * l * l * in.p_max * k.c51);
  k.c7 = k.c6 / (1.0 - phi.phi);
  k.c8 = 2.0 * l * l * in.p_max * k.c5 / (1.0 - phi.phi);
  const double xmin2 = in.x_min * in.x_min;
  k.a = k.c8 / xmin2;
  const double d2 = d_star ? (*d_star) * (*d_star) : k.c7;
  k.b = (k.c7 - d2) / xmin2;
  return k;
}

/// log(a / (ε³ - b)) / log(1/√γ); empty when ε³ ≤ b or γ = 0.
inline std::optional<double> n_av_lower_bound(const RateConstants& k, double gamma, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw RateError("epsilon must lie in (0, 1)");
  const double slack = epsilon * epsilon * epsilon - k.b;
  if (!(slack > 0.0) || !(gamma > 0.0) || !(gamma < 1.0)) return std::nullopt;
  return std::log(k.a / slack) / std::log(1.0 / std::sqrt(gamma));
}

struct NavPoint {
  double gamma = 0.0;
  double epsilon = 0.0;
  std::optional<double> bound;
};

struct RateReport {
  PhiResult phi;
  RateConstants constants;
  std::optional<double> d_star;
  double d_star_sq_bound = 0.0;  // C₇
  std::vector<NavPoint> n_av_curve;
};

/// Bound on a (γ, ε) grid with every other input held fixed.
inline std::vector<NavPoint> n_av_curve(RateInputs in, const std::vector<double>& gammas,
                                        const std::vector<double>& epsilons,
                                        std::optional<double> d_star = std::nullopt) {
  std::vector<NavPoint> out;
  for (double g : gammas) {
    in.gamma = g;
    const RateConstants k = constants_chain(in, d_star);
    for (double e : epsilons) out.push_back({g, e, n_av_lower_bound(k, g, e)});
  }
  return out;
}

inline RateReport rate_report(const RateInputs& in, const std::vector<double>& epsilons,
                              std::optional<double> d_star = std::nullopt, const std::vector<double>& gammas = {}) {
  RateReport r;
  r.phi = compute_phi(in);
  r.constants = constants_chain(in, d_star);
  r.d_star = d_star;
  r.d_star_sq_bound = r.constants.c7;
  r.n_av_curve = n_av_curve(in, gammas.empty() ? std::vector<double>{in.gamma} : gammas, epsilons, d_star);
  return r;
}

/// The nine-point grid 0.1, 0.2, …, 0.9.
inline std::vector<double> default_gamma_grid() {
  std::vector<double> g;
  for (int t = 1; t <= 9; ++t) g.push_back(t / 10.0);
  return g;
}

// ---------------------------------------------------------------------------
// Per-iteration time

struct IterationTime {
  double sparse = 0.0;    // estimates kept for interferers only
  double complete = 0.0;  // estimates kept for every player
};

/// p_ij = (1/N)(1/deg_C(i) + 1/deg_C(j)).
inline double pair_probability(const UndirectedGraph& communication, Vertex i, Vertex j) {
  const double n = static_cast<double>(communication.size());
  return (1.0 / static_cast<double>(communication.degree(i)) + 1.0 / static_cast<double>(communication.degree(j))) / n;
}

/// Expected time per round with exchange cost r per estimate and gradient cost s.
inline IterationTime iteration_time_model(const EstimateLayout& layout, const UndirectedGraph& communication, double r,
                                          double s) {
  const std::size_t n = layout.players();
  if (communication.size() != n) throw GraphError("communication graph size mismatch");
  const UndirectedGraph& gi = layout.graph();
  const double nn = static_cast<double>(n);
  IterationTime t;
  for (Vertex i = 0; i < n; ++i) {
    for (Vertex j : communication.neighbors(i)) {
      const double pij = pair_probability(communication, i, j);
      std::size_t shared = 0;
      for (Vertex d : gi.neighbors(i))
        if (d == j || gi.has_edge(j, d)) ++shared;
      const double mi = static_cast<double>(layout.block_size(i));
      t.sparse += pij / nn * (static_cast<double>(shared) * r + mi / nn * s);
      t.complete += pij / nn * ((nn - 1.0) * r + s);
    }
  }
  return t;
}

}  // namespace gossip_nash
