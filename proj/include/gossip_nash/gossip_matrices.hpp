#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "gossip_nash/graph.hpp"
#include "gossip_nash/layout.hpp"

namespace gossip_nash {

/// One gossip event: `initiator` woke up and contacted `responder`.
struct GossipPair {
  Vertex initiator = 0;
  Vertex responder = 0;
};

/// Two slots whose values are replaced by their mean.
struct SlotPair {
  std::size_t first = 0;
  std::size_t second = 0;
};

/// Slots averaged by W(k) for a pair: (s_{i,l}, s_{j,l}) for l ∈ ind(i, j).
inline std::vector<SlotPair> averaged_slots(const EstimateLayout& layout, Vertex i, Vertex j) {
  std::vector<SlotPair> out;
  for (Vertex l : layout.ind(i, j)) out.push_back({layout.slot(i, l), layout.slot(j, l)});
  return out;
}

/// Communication matrix of one gossip event, kept in its rank-structured form
/// W = I - ½ Σ (e_a - e_b)(e_a - e_b)ᵀ over the averaged slot pairs.
class GossipMatrix {
 public:
  GossipMatrix(const EstimateLayout& layout, GossipPair pair)
      : pair_(pair), dimension_(layout.dimension()), slots_(averaged_slots(layout, pair.initiator, pair.responder)) {}

  GossipPair pair() const { return pair_; }
  std::size_t dimension() const { return dimension_; }
  const std::vector<SlotPair>& slots() const { return slots_; }

  /// x ← W x, touching only the 2·|ind| affected entries.
  void apply_in_place(std::span<double> x) const {
    if (x.size() != dimension_) throw std::invalid_argument("apply_w: dimension mismatch");
    for (const SlotPair& p : slots_) {
      const double mean = 0.5 * (x[p.first] + x[p.second]);
      x[p.first] = mean;
      x[p.second] = mean;
    }
  }

  std::vector<double> apply(std::span<const double> x) const {
    std::vector<double> out(x.begin(), x.end());
    apply_in_place(out);
    return out;
  }

  Eigen::MatrixXd dense() const {
    Eigen::MatrixXd w = Eigen::MatrixXd::Identity(dimension_, dimension_);
    for (const SlotPair& p : slots_) {
      w(p.first, p.first) -= 0.5;
      w(p.second, p.second) -= 0.5;
      w(p.first, p.second) += 0.5;
      w(p.second, p.first) += 0.5;
    }
    return w;
  }

 private:
  GossipPair pair_;
  std::size_t dimension_;
  std::vector<SlotPair> slots_;
};

inline GossipMatrix build_w(const EstimateLayout& layout, const UndirectedGraph& communication, Vertex i, Vertex j) {
  if (!communication.has_edge(i, j)) throw std::invalid_argument("gossip pair is not a communication edge");
  return GossipMatrix(layout, {i, j});
}

inline std::vector<double> apply_w(const EstimateLayout& layout, GossipPair pair, std::span<const double> x) {
  return GossipMatrix(layout, pair).apply(x);
}

/// Cutoff separating unit eigenvalues of W̄ from the rest.
inline constexpr double kUnitEigenvalueTolerance = 1e-9;

/// Largest eigenvalue strictly below 1 - kUnitEigenvalueTolerance; 0 if none.
inline double second_largest_eigenvalue(const Eigen::VectorXd& eigenvalues) {
  double best = 0.0;
  bool found = false;
  for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) {
    const double v = eigenvalues[k];
    if (v < 1.0 - kUnitEigenvalueTolerance && (!found || v > best)) {
      best = v;
      found = true;
    }
  }
  return found ? std::max(best, 0.0) : 0.0;
}

/// Expected-matrix quantities of the uniform wake-up / uniform-neighbor scheduler.
struct SpectralCore {
  Eigen::MatrixXd w_bar;      // E[W(k)]
  Eigen::MatrixXd q_expect;   // E[QᵀQ] = W̄ - H H̄
  Eigen::MatrixXd r;          // I - H H̄
  Eigen::VectorXd eig_w_bar;  // ascending
  double gamma = 0.0;         // λ₂(W̄)
};

/// W̄ = I - 1/(2N) Σ_i 1/deg_C(i) Σ_{j∈N_C(i)} Σ_{l∈ind(i,j)} (E_l^i - E_l^j)(E_l^i - E_l^j)ᵀ.
inline Eigen::MatrixXd expected_w_matrix(const EstimateLayout& layout, const UndirectedGraph& communication) {
  const std::size_t n = layout.players();
  const std::size_t m = layout.dimension();
  if (communication.size() != n) throw std::invalid_argument("communication graph size mismatch");
  Eigen::MatrixXd w = Eigen::MatrixXd::Identity(m, m);
  for (Vertex i = 0; i < n; ++i) {
    const auto& nbrs = communication.neighbors(i);
    if (nbrs.empty()) throw std::invalid_argument("player without communication neighbors");
    const double weight = 1.0 / (2.0 * static_cast<double>(n) * static_cast<double>(nbrs.size()));
    for (Vertex j : nbrs) {
      for (const SlotPair& p : averaged_slots(layout, i, j)) {
        w(p.first, p.first) -= weight;
        w(p.second, p.second) -= weight;
        w(p.first, p.second) += weight;
        w(p.second, p.first) += weight;
      }
    }
  }
  return w;
}

inline SpectralCore expected_w(const EstimateLayout& layout, const UndirectedGraph& communication) {
  SpectralCore core;
  core.w_bar = expected_w_matrix(layout, communication);
  const Eigen::MatrixXd hh = layout.h() * layout.h_bar();
  const auto m = static_cast<Eigen::Index>(layout.dimension());
  core.r = Eigen::MatrixXd::Identity(m, m) - hh;
  core.q_expect = core.w_bar - hh;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(core.w_bar, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigensolver failed on expected communication matrix");
  core.eig_w_bar = solver.eigenvalues();
  core.gamma = second_largest_eigenvalue(core.eig_w_bar);
  return core;
}

/// Largest eigenvalue of a symmetric matrix.
inline double lambda_max(const Eigen::MatrixXd& symmetric) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
  return solver.eigenvalues().maxCoeff();
}

/// Maximum absolute residuals of the structural identities of W(k), W̄, Q(k) and R.
struct IdentityReport {
  double w_idempotent = 0.0;     // WᵀW - W
  double w_fixes_h = 0.0;        // W H - H
  double ht_w = 0.0;             // Hᵀ W - Hᵀ
  double ht_w_h = 0.0;           // Hᵀ W H - diag(m)
  double ht_h = 0.0;             // Hᵀ H - diag(m)
  double h_bar_h = 0.0;          // H̄ H - I
  double ones_h = 0.0;           // 1ᵀ H - mᵀ
  double w_stochastic = 0.0;     // row/column sums of W minus 1
  double w_bar_stochastic = 0.0; // row/column sums of W̄ minus 1
  double w_symmetric = 0.0;
  double q_annihilates_hz = 0.0; // Q(k) H z
  double qtq_form = 0.0;         // Q(k)ᵀQ(k) - (W(k) - H H̄)
  double rtr_spectrum = 0.0;     // distance of eig(RᵀR) from {0, 1}
  double r_norm = 0.0;           // ‖R‖₂
  std::size_t rtr_unit_multiplicity = 0;
  std::size_t events = 0;

  double max_residual() const {
    return std::max({w_idempotent, w_fixes_h, ht_w, ht_w_h, ht_h, h_bar_h, ones_h, w_stochastic, w_bar_stochastic,
                     w_symmetric, q_annihilates_hz, qtq_form, rtr_spectrum});
  }
};

inline IdentityReport verify_identities(const EstimateLayout& layout, const UndirectedGraph& communication,
                                        std::uint64_t seed = 0, int probes = 20) {
  IdentityReport rep;
  const auto n = static_cast<Eigen::Index>(layout.players());
  const auto m = static_cast<Eigen::Index>(layout.dimension());
  const Eigen::MatrixXd h = layout.h();
  const Eigen::MatrixXd hbar = layout.h_bar();
  const Eigen::MatrixXd hh = h * hbar;
  Eigen::VectorXd mvec(n);
  for (Eigen::Index j = 0; j < n; ++j) mvec[j] = static_cast<double>(layout.block_size(static_cast<Vertex>(j)));
  const Eigen::MatrixXd diag_m = mvec.asDiagonal();

  rep.ht_h = (h.transpose() * h - diag_m).cwiseAbs().maxCoeff();
  rep.h_bar_h = (hbar * h - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
  rep.ones_h = (Eigen::RowVectorXd::Ones(m) * h - mvec.transpose()).cwiseAbs().maxCoeff();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Eigen::VectorXd> hz;
  for (int t = 0; t < probes; ++t) {
    Eigen::VectorXd z(n);
    for (Eigen::Index j = 0; j < n; ++j) z[j] = normal(rng);
    hz.push_back(h * z);
  }

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m);
  for (const Edge& e : communication.edges()) {
    const Eigen::MatrixXd w = GossipMatrix(layout, {e.u, e.v}).dense();
    ++rep.events;
    rep.w_idempotent = std::max(rep.w_idempotent, (w.transpose() * w - w).cwiseAbs().maxCoeff());
    rep.w_fixes_h = std::max(rep.w_fixes_h, (w * h - h).cwiseAbs().maxCoeff());
    rep.ht_w = std::max(rep.ht_w, (h.transpose() * w - h.transpose()).cwiseAbs().maxCoeff());
    rep.ht_w_h = std::max(rep.ht_w_h, (h.transpose() * w * h - diag_m).cwiseAbs().maxCoeff());
    rep.w_stochastic = std::max({rep.w_stochastic, (w * ones - ones).cwiseAbs().maxCoeff(),
                                 (w.transpose() * ones - ones).cwiseAbs().maxCoeff()});
    rep.w_symmetric = std::max(rep.w_symmetric, (w - w.transpose()).cwiseAbs().maxCoeff());
    const Eigen::MatrixXd q = w - hh * w;
    for (const auto& v : hz) rep.q_annihilates_hz = std::max(rep.q_annihilates_hz, (q * v).cwiseAbs().maxCoeff());
    rep.qtq_form = std::max(rep.qtq_form, (q.transpose() * q - (w - hh)).cwiseAbs().maxCoeff());
  }

  const Eigen::MatrixXd w_bar = expected_w_matrix(layout, communication);
  rep.w_bar_stochastic = std::max((w_bar * ones - ones).cwiseAbs().maxCoeff(),
                                  (w_bar.transpose() * ones - ones).cwiseAbs().maxCoeff());

  const Eigen::MatrixXd r = Eigen::MatrixXd::Identity(m, m) - hh;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(r.transpose() * r, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigensolver failed on RᵀR");
  for (Eigen::Index k = 0; k < m; ++k) {
    const double v = solver.eigenvalues()[k];
    const double d = std::min(std::abs(v), std::abs(v - 1.0));
    rep.rtr_spectrum = std::max(rep.rtr_spectrum, d);
    if (std::abs(v - 1.0) < 1e-8) ++rep.rtr_unit_multiplicity;
  }
  rep.r_norm = std::sqrt(std::max(0.0, solver.eigenvalues().maxCoeff()));
  return rep;
}

}  // namespace gossip_nash
