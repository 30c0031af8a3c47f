#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "gossip_nash/graph.hpp"

namespace gossip_nash {

/// A player's view of a stacked estimate vector: its own coordinate plus the
/// coordinates of its interference neighbors (ascending player id).
struct LocalEstimate {
  double own = 0.0;
  std::vector<double> others;
};

/// Indexing of the stacked temporary-estimate vector.
///
/// Player i holds one slot per member of Ñ(i) = N(i) ∪ {i}, ordered by player
/// id, and the blocks are stacked by player. Slots are 0-based here; the
/// 1-based value s_ij is `slot(i, j) + 1`.
class EstimateLayout {
 public:
  EstimateLayout() = default;

  explicit EstimateLayout(UndirectedGraph graph) : graph_(std::move(graph)) {
    const std::size_t n = graph_.size();
    if (n < 2) throw GraphError("layout needs at least two players");
    if (!is_connected(graph_)) throw GraphError("layout graph must be connected");

    block_size_.resize(n);
    for (Vertex i = 0; i < n; ++i) block_size_[i] = graph_.degree(i) + 1;

    // s_ij = sum_{l<=j} B(i,l) + sum_{r<i} m_r, with B = A + I.
    slot_.assign(n * n, kNoSlot);
    offset_.resize(n);
    std::size_t preceding = 0;
    for (Vertex i = 0; i < n; ++i) {
      offset_[i] = preceding;
      std::size_t running = 0;
      for (Vertex j = 0; j < n; ++j) {
        running += b(i, j);
        if (b(i, j)) slot_[i * n + j] = running + preceding - 1;
      }
      preceding += block_size_[i];
    }
    dimension_ = preceding;

    others_.resize(n);
    slot_owner_.resize(dimension_);
    slot_subject_.resize(dimension_);
    for (Vertex i = 0; i < n; ++i) {
      for (Vertex j = 0; j < n; ++j) {
        const std::size_t s = slot_[i * n + j];
        if (s == kNoSlot) continue;
        slot_owner_[s] = i;
        slot_subject_[s] = j;
        if (j != i) others_[i].push_back(s);
      }
    }
  }

  const UndirectedGraph& graph() const { return graph_; }
  std::size_t players() const { return graph_.size(); }

  /// m = Σ m_i.
  std::size_t dimension() const { return dimension_; }

  /// m_i = deg(i) + 1.
  std::size_t block_size(Vertex i) const { return block_size_.at(i); }
  const std::vector<std::size_t>& block_sizes() const { return block_size_; }

  /// First slot of player i's block.
  std::size_t block_offset(Vertex i) const { return offset_.at(i); }

  /// B(i,j) = A(i,j) + δ_ij.
  int b(Vertex i, Vertex j) const { return (i == j || graph_.has_edge(i, j)) ? 1 : 0; }

  bool holds(Vertex i, Vertex j) const { return slot_.at(i * players() + j) != kNoSlot; }

  /// Slot of player i's estimate of player j, if i keeps one.
  std::optional<std::size_t> find_slot(Vertex i, Vertex j) const {
    const std::size_t s = slot_.at(i * players() + j);
    if (s == kNoSlot) return std::nullopt;
    return s;
  }

  std::size_t slot(Vertex i, Vertex j) const {
    const std::size_t s = slot_.at(i * players() + j);
    if (s == kNoSlot) throw std::out_of_range("player does not hold an estimate of that player");
    return s;
  }

  std::size_t self_slot(Vertex i) const { return slot(i, i); }

  /// I(i): slots of i's estimates of its neighbors, ascending neighbor id.
  const std::vector<std::size_t>& other_slots(Vertex i) const { return others_.at(i); }

  Vertex slot_owner(std::size_t s) const { return slot_owner_.at(s); }
  Vertex slot_subject(std::size_t s) const { return slot_subject_.at(s); }

  /// ind(i,j) = {d : B(i,d) B(j,d) = 1}.
  std::vector<Vertex> ind(Vertex i, Vertex j) const {
    std::vector<Vertex> out;
    for (Vertex d = 0; d < players(); ++d)
      if (b(i, d) && b(j, d)) out.push_back(d);
    return out;
  }

  /// H (m×N): column j has a one at every slot holding an estimate of j.
  Eigen::MatrixXd h() const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dimension_, players());
    for (std::size_t s = 0; s < dimension_; ++s) out(s, slot_subject_[s]) = 1.0;
    return out;
  }

  /// H̄ = diag(1./m) Hᵀ.
  Eigen::MatrixXd h_bar() const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(players(), dimension_);
    for (std::size_t s = 0; s < dimension_; ++s) {
      const Vertex j = slot_subject_[s];
      out(j, s) = 1.0 / static_cast<double>(block_size_[j]);
    }
    return out;
  }

  Eigen::MatrixXi b_matrix() const {
    Eigen::MatrixXi out(players(), players());
    for (Vertex i = 0; i < players(); ++i)
      for (Vertex j = 0; j < players(); ++j) out(i, j) = b(i, j);
    return out;
  }

  /// H z: every slot gets the value of the player it refers to.
  std::vector<double> replicate(std::span<const double> z) const {
    if (z.size() != players()) throw std::invalid_argument("replicate: expected one value per player");
    std::vector<double> out(dimension_);
    for (std::size_t s = 0; s < dimension_; ++s) out[s] = z[slot_subject_[s]];
    return out;
  }

  /// z = H̄ x: per-player mean of all estimates of that player.
  std::vector<double> average(std::span<const double> x) const {
    if (x.size() != dimension_) throw std::invalid_argument("average: dimension mismatch");
    std::vector<double> z(players(), 0.0);
    for (std::size_t s = 0; s < dimension_; ++s) z[slot_subject_[s]] += x[s];
    for (Vertex j = 0; j < players(); ++j) z[j] /= static_cast<double>(block_size_[j]);
    return z;
  }

  LocalEstimate extract(std::span<const double> xbar, Vertex i) const {
    if (xbar.size() != dimension_) throw std::invalid_argument("extract: dimension mismatch");
    LocalEstimate out;
    out.own = xbar[self_slot(i)];
    out.others.reserve(others_.at(i).size());
    for (std::size_t s : others_[i]) out.others.push_back(xbar[s]);
    return out;
  }

 private:
  static constexpr std::size_t kNoSlot = static_cast<std::size_t>(-1);

  UndirectedGraph graph_;
  std::size_t dimension_ = 0;
  std::vector<std::size_t> block_size_;
  std::vector<std::size_t> offset_;
  std::vector<std::size_t> slot_;
  std::vector<std::vector<std::size_t>> others_;
  std::vector<Vertex> slot_owner_;
  std::vector<Vertex> slot_subject_;
};

inline EstimateLayout build_layout(const UndirectedGraph& g) { return EstimateLayout(g); }

inline LocalEstimate extract_estimate(const EstimateLayout& layout, std::span<const double> xbar, Vertex i) {
  return layout.extract(xbar, i);
}

}  // namespace gossip_nash
