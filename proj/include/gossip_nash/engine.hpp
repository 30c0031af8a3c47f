#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gossip_nash/game.hpp"
#include "gossip_nash/gossip_matrices.hpp"
#include "gossip_nash/graph.hpp"
#include "gossip_nash/layout.hpp"
#include "gossip_nash/rng.hpp"

namespace gossip_nash {

enum class GradientMode { exact, finite_difference };

inline const char* to_string(GradientMode m) { return m == GradientMode::exact ? "exact" : "fd"; }

/// α_{k,i}: 1/ν_k(i) (diminishing) or a fixed per-player value (constant).
struct StepSchedule {
  enum class Kind { diminishing, constant };
  Kind kind = Kind::diminishing;
  std::vector<double> alpha;  // constant mode: one value for all players, or one per player

  static StepSchedule diminishing() { return {}; }
  static StepSchedule constant(double a) { return {Kind::constant, {a}}; }
  static StepSchedule constant(std::vector<double> a) { return {Kind::constant, std::move(a)}; }

  double at(Vertex i, std::uint64_t updates) const {
    if (kind == Kind::diminishing) return 1.0 / static_cast<double>(updates);
    return alpha.size() == 1 ? alpha[0] : alpha.at(i);
  }

  double max_alpha() const { return *std::max_element(alpha.begin(), alpha.end()); }
  double min_alpha() const { return *std::min_element(alpha.begin(), alpha.end()); }
};

inline const char* to_string(StepSchedule::Kind k) {
  return k == StepSchedule::Kind::diminishing ? "diminishing" : "constant";
}

/// What a player does when its gradient cannot be evaluated at its current
/// action and estimates: keep the action (skip), or move to the lower end of
/// its box (retreat), which is the projected step for a cost that blows up at
/// the edge of its domain.
enum class DomainPolicy { skip, retreat };

inline const char* to_string(DomainPolicy p) { return p == DomainPolicy::skip ? "skip" : "retreat"; }

struct EngineConfig {
  GradientMode gradient = GradientMode::exact;
  DomainPolicy domain_policy = DomainPolicy::skip;
  StepSchedule steps;
  FdSchedule fd;
  /// Keep x_i when the projected step lands where J_i cannot be evaluated
  /// against the player's own estimates.
  bool reject_infeasible_steps = true;
  /// Consecutive rounds without any accepted local step before run() gives up.
  std::uint64_t stall_limit = 1'000'000;
};

struct EngineCounters {
  std::uint64_t local_updates = 0;      // accepted local steps
  std::uint64_t skipped_steps = 0;      // gradient not evaluable at the current point
  std::uint64_t retreats = 0;           // of those, steps sent to the lower bound
  std::uint64_t rejected_steps = 0;     // projected step left the domain
  std::uint64_t one_sided_fd = 0;       // FD quotient clipped at the box
  std::uint64_t exchanged_entries = 0;  // estimate entries sent, both directions

  friend bool operator==(const EngineCounters&, const EngineCounters&) = default;
};

struct EngineState {
  std::vector<double> x_tilde;
  std::vector<std::uint64_t> nu;
  std::uint64_t k = 0;
  SchedulerRng rng;
  EngineCounters counters;
  std::uint64_t idle_rounds = 0;

  friend bool operator==(const EngineState&, const EngineState&) = default;
};

class EngineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrajectorySample {
  std::uint64_t k = 0;
  std::vector<double> x;
  double norm_err = std::numeric_limits<double>::quiet_NaN();  // ‖x - x*‖ / ‖x*‖
  double consensus_err = 0.0;                                   // ‖x̃ - H H̄ x̃‖
  double action_consensus_err = 0.0;                            // ‖x - H̄ x̃‖
};

struct Trajectory {
  std::uint64_t stride = 1;
  std::vector<TrajectorySample> samples;
};

/// p_i = 1/N + (1/N) Σ_{j∈N_C(i)} 1/deg_C(j).
inline std::vector<double> wake_probabilities(const UndirectedGraph& communication) {
  const std::size_t n = communication.size();
  if (!is_connected(communication)) throw GraphError("wake_probabilities: communication graph must be connected");
  std::vector<double> p(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (Vertex i = 0; i < n; ++i) {
    double s = 0.0;
    for (Vertex j : communication.neighbors(i)) s += 1.0 / static_cast<double>(communication.degree(j));
    p[i] = inv_n + inv_n * s;
  }
  return p;
}

/// Asynchronous gossip NE seeking over a fixed layout, communication graph and game.
///
/// The layout graph may be any connected supergraph of the game's interference
/// graph (the complete graph gives the all-to-all variant); every player must
/// be able to refresh each interferer's estimate from some communication
/// neighbor.
class GossipEngine {
 public:
  GossipEngine(EstimateLayout layout, UndirectedGraph communication, std::shared_ptr<const GameDefinition> game,
               EngineConfig config = {})
      : layout_(std::move(layout)), comm_(std::move(communication)), game_(std::move(game)), cfg_(std::move(config)) {
    const std::size_t n = layout_.players();
    if (!game_) throw std::invalid_argument("engine needs a game");
    if (game_->size() != n || comm_.size() != n) throw GraphError("layout, communication graph and game disagree on N");
    if (!is_connected(comm_)) throw GraphError("communication graph must be connected");
    if (!game_->interference().is_subgraph_of(layout_.graph()))
      throw GraphError("layout graph must contain the interference graph");
    if (!check_neighbor_union(layout_.graph(), comm_))
      throw GraphError("some player cannot reach an interferer's estimate through its communication neighbors");
    if (cfg_.steps.kind == StepSchedule::Kind::constant) {
      if (cfg_.steps.alpha.size() != 1 && cfg_.steps.alpha.size() != n)
        throw std::invalid_argument("constant step schedule needs one value or one per player");
      for (double a : cfg_.steps.alpha)
        if (!(a > 0.0)) throw std::invalid_argument("step sizes must be positive");
    }

    pair_matrices_.resize(n);
    interferer_slots_.resize(n);
    for (Vertex i = 0; i < n; ++i) {
      for (Vertex j : comm_.neighbors(i)) pair_matrices_[i].emplace_back(layout_, GossipPair{i, j});
      for (Vertex j : game_->interference().neighbors(i)) interferer_slots_[i].push_back(layout_.slot(i, j));
    }
  }

  const EstimateLayout& layout() const { return layout_; }
  const UndirectedGraph& communication() const { return comm_; }
  const GameDefinition& game() const { return *game_; }
  const EngineConfig& config() const { return cfg_; }

  /// x̃(0) = H z0 for a common initial profile z0 (box midpoint, pulled into the
  /// cost domain when needed, by default).
  EngineState init_state(std::uint64_t seed, std::optional<std::vector<double>> z0 = std::nullopt) const {
    std::vector<double> z;
    if (z0) {
      z = std::move(*z0);
    } else {
      auto feasible = shrink_to_domain(*game_, game_->midpoint());
      if (!feasible) throw EngineError("no evaluable initial profile");
      z = std::move(*feasible);
    }
    return init_state_from_estimates(seed, layout_.replicate(z));
  }

  /// Start from arbitrary per-player estimates, given in slot order.
  EngineState init_state_from_estimates(std::uint64_t seed, std::vector<double> x_tilde) const {
    if (x_tilde.size() != layout_.dimension()) throw std::invalid_argument("initial estimate vector has wrong size");
    for (std::size_t s = 0; s < x_tilde.size(); ++s)
      if (!game_->bounds(layout_.slot_subject(s)).contains(x_tilde[s]))
        throw std::invalid_argument("initial estimate outside the owner's action box");
    EngineState st;
    st.x_tilde = std::move(x_tilde);
    st.nu.assign(layout_.players(), 0);
    st.rng = SchedulerRng(seed);
    return st;
  }

  /// Draws (i_k, j_k): i_k uniform over V, j_k uniform over N_C(i_k).
  GossipPair draw_pair(EngineState& st) const {
    const auto i = static_cast<Vertex>(uniform_below(st.rng.wake, layout_.players()));
    const auto& nb = comm_.neighbors(i);
    const auto a = uniform_below(st.rng.neighbor, nb.size());
    return {i, nb[a]};
  }

  /// One round for a given pair: gossip, local steps of both players, write-back.
  void step(EngineState& st, GossipPair pair) const {
    const Vertex i = pair.initiator;
    const Vertex j = pair.responder;
    const auto& nb = comm_.neighbors(i);
    const auto it = std::lower_bound(nb.begin(), nb.end(), j);
    if (it == nb.end() || *it != j) throw std::invalid_argument("gossip pair is not a communication edge");
    const GossipMatrix& w = pair_matrices_[i][static_cast<std::size_t>(it - nb.begin())];

    const double own_i = st.x_tilde[layout_.self_slot(i)];
    const double own_j = st.x_tilde[layout_.self_slot(j)];
    w.apply_in_place(st.x_tilde);
    st.counters.exchanged_entries += 2 * w.slots().size();

    const double next_i = local_step(st, i, own_i);
    const double next_j = local_step(st, j, own_j);
    st.x_tilde[layout_.self_slot(i)] = next_i;
    st.x_tilde[layout_.self_slot(j)] = next_j;
    ++st.k;
  }

  void gossip_round(EngineState& st) const {
    const std::uint64_t accepted = st.counters.local_updates;
    step(st, draw_pair(st));
    st.idle_rounds = (st.counters.local_updates == accepted) ? st.idle_rounds + 1 : 0;
    if (st.idle_rounds >= cfg_.stall_limit)
      throw EngineError("no player could take a local step for " + std::to_string(st.idle_rounds) + " rounds");
  }

  /// Runs `rounds` rounds, sampling metrics at k = 0, every `stride` rounds and at the end.
  Trajectory run(EngineState& st, std::uint64_t rounds, std::uint64_t stride = 1,
                 const std::optional<std::vector<double>>& reference = std::nullopt) const {
    if (rounds == 0) throw std::invalid_argument("rounds must be positive");
    if (stride == 0) throw std::invalid_argument("sample stride must be positive");
    Trajectory tr;
    tr.stride = stride;
    tr.samples.push_back(sample(st, reference));
    for (std::uint64_t r = 1; r <= rounds; ++r) {
      gossip_round(st);
      if (r % stride == 0 || r == rounds) tr.samples.push_back(sample(st, reference));
    }
    return tr;
  }

  std::vector<double> actions(const EngineState& st) const {
    std::vector<double> x(layout_.players());
    for (Vertex i = 0; i < x.size(); ++i) x[i] = st.x_tilde[layout_.self_slot(i)];
    return x;
  }

  /// ‖x̃ - H H̄ x̃‖.
  double consensus_error(const EngineState& st) const {
    const auto z = layout_.average(st.x_tilde);
    double sum = 0.0;
    for (std::size_t s = 0; s < st.x_tilde.size(); ++s) {
      const double d = st.x_tilde[s] - z[layout_.slot_subject(s)];
      sum += d * d;
    }
    return std::sqrt(sum);
  }

  TrajectorySample sample(const EngineState& st, const std::optional<std::vector<double>>& reference) const {
    TrajectorySample out;
    out.k = st.k;
    out.x = actions(st);
    out.consensus_err = consensus_error(st);
    const auto z = layout_.average(st.x_tilde);
    double ac = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) ac += (out.x[i] - z[i]) * (out.x[i] - z[i]);
    out.action_consensus_err = std::sqrt(ac);
    if (reference) out.norm_err = normalized_error(out.x, *reference);
    return out;
  }

  /// ‖x - x*‖ / ‖x*‖, or the plain distance when x* = 0.
  static double normalized_error(std::span<const double> x, std::span<const double> ref) {
    if (x.size() != ref.size()) throw std::invalid_argument("normalized_error: size mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      num += (x[i] - ref[i]) * (x[i] - ref[i]);
      den += ref[i] * ref[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
  }

 private:
  double local_step(EngineState& st, Vertex p, double own) const {
    const std::uint64_t nu = ++st.nu[p];
    const double alpha = cfg_.steps.at(p, nu);
    std::vector<double> view;
    view.reserve(interferer_slots_[p].size());
    for (std::size_t s : interferer_slots_[p]) view.push_back(st.x_tilde[s]);

    std::optional<double> g;
    if (cfg_.gradient == GradientMode::exact) {
      g = game_->gradient(p, own, view);
    } else {
      const FdEstimate fd = fd_gradient_in_box(*game_, p, own, view, cfg_.fd.at(nu));
      if (fd.one_sided) ++st.counters.one_sided_fd;
      g = fd.value;
    }
    if (!g) {
      ++st.counters.skipped_steps;
      if (cfg_.domain_policy == DomainPolicy::retreat && own != game_->bounds(p).lo) {
        ++st.counters.retreats;
        ++st.counters.local_updates;
        return game_->bounds(p).lo;
      }
      return own;
    }
    const double next = game_->bounds(p).clamp(own - alpha * *g);
    if (cfg_.reject_infeasible_steps && !game_->cost(p, next, view)) {
      ++st.counters.rejected_steps;
      return own;
    }
    ++st.counters.local_updates;
    return next;
  }

  EstimateLayout layout_;
  UndirectedGraph comm_;
  std::shared_ptr<const GameDefinition> game_;
  EngineConfig cfg_;
  std::vector<std::vector<GossipMatrix>> pair_matrices_;  // [i][a] for the a-th communication neighbor of i
  std::vector<std::vector<std::size_t>> interferer_slots_;
};

}  // namespace gossip_nash
