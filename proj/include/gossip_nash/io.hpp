#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gossip_nash/engine.hpp"
#include "gossip_nash/gossip_matrices.hpp"
#include "gossip_nash/graph.hpp"
#include "gossip_nash/layout.hpp"
#include "gossip_nash/rate.hpp"

namespace gossip_nash {

using Json = nlohmann::json;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Graphs: {"n": N, "edges": [[u, v], ...]}

inline Json graph_to_json(const UndirectedGraph& g) {
  Json edges = Json::array();
  for (const Edge& e : g.edges()) edges.push_back({e.u, e.v});
  return {{"n", g.size()}, {"edges", edges}};
}

inline std::vector<Edge> edges_from_json(const Json& j) {
  if (!j.is_array()) throw IoError("edge list must be an array");
  std::vector<Edge> out;
  for (const Json& e : j) {
    if (!e.is_array() || e.size() < 2) throw IoError("edges are [u, v] pairs");
    out.emplace_back(e[0].get<Vertex>(), e[1].get<Vertex>());
  }
  return out;
}

inline UndirectedGraph graph_from_json(const Json& j) {
  return UndirectedGraph(j.at("n").get<std::size_t>(), edges_from_json(j.at("edges")));
}

// ---------------------------------------------------------------------------
// Layout dump

inline Json layout_to_json(const EstimateLayout& layout) {
  Json slots = Json::array();
  for (std::size_t s = 0; s < layout.dimension(); ++s)
    slots.push_back({{"slot", s}, {"owner", layout.slot_owner(s)}, {"subject", layout.slot_subject(s)}});
  // s[i][j]: 1-based position of player i's estimate of player j, 0 when not held.
  Json table = Json::array();
  for (Vertex i = 0; i < layout.players(); ++i) {
    Json row = Json::array();
    for (Vertex j = 0; j < layout.players(); ++j) row.push_back(layout.holds(i, j) ? layout.slot(i, j) + 1 : 0);
    table.push_back(row);
  }
  return {{"players", layout.players()},
          {"dimension", layout.dimension()},
          {"block_sizes", layout.block_sizes()},
          {"slots", slots},
          {"s", table}};
}

// ---------------------------------------------------------------------------
// Reports

inline Json identity_report_to_json(const IdentityReport& r) {
  return {{"w_idempotent", r.w_idempotent},
          {"w_fixes_h", r.w_fixes_h},
          {"ht_w", r.ht_w},
          {"ht_w_h", r.ht_w_h},
          {"ht_h", r.ht_h},
          {"h_bar_h", r.h_bar_h},
          {"ones_h", r.ones_h},
          {"w_stochastic", r.w_stochastic},
          {"w_bar_stochastic", r.w_bar_stochastic},
          {"w_symmetric", r.w_symmetric},
          {"q_annihilates_hz", r.q_annihilates_hz},
          {"qtq_form", r.qtq_form},
          {"rtr_spectrum", r.rtr_spectrum},
          {"r_norm", r.r_norm},
          {"rtr_unit_multiplicity", r.rtr_unit_multiplicity},
          {"events", r.events},
          {"max_residual", r.max_residual()}};
}

inline Json communication_report_to_json(const CommunicationReport& r) {
  auto edges = [](const std::vector<Edge>& es) {
    Json a = Json::array();
    for (const Edge& e : es) a.push_back({e.u, e.v});
    return a;
  };
  return {{"pass", r.pass},
          {"same_size", r.same_size},
          {"sandwich", r.sandwich},
          {"lower_bound_holds", r.lower_bound_holds},
          {"upper_bound_holds", r.upper_bound_holds},
          {"two_hop_fallback", r.two_hop_fallback},
          {"communication_connected", r.communication_connected},
          {"far_pairs", edges(r.far_pairs)},
          {"missing_lower", edges(r.missing_lower)},
          {"extra_upper", edges(r.extra_upper)}};
}

inline Json spectral_core_to_json(const SpectralCore& core, const EstimateLayout& layout) {
  std::vector<double> eig(core.eig_w_bar.data(), core.eig_w_bar.data() + core.eig_w_bar.size());
  return {{"gamma", core.gamma}, {"m", layout.dimension()}, {"eig_wbar", eig}};
}

inline Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

inline Json rate_constants_to_json(const RateConstants& k) {
  return {{"C1", k.c1}, {"C2", k.c2}, {"C21", k.c21}, {"C3", k.c3}, {"C4", k.c4}, {"C41", k.c41}, {"C5", k.c5},
          {"C51", k.c51}, {"C6", k.c6}, {"C7", k.c7}, {"C8", k.c8}, {"a", k.a}, {"b", k.b}};
}

inline Json rate_inputs_to_json(const RateInputs& in) {
  return {{"gamma", in.gamma},
          {"alpha_max", in.alpha_max},
          {"alpha_min", in.alpha_min},
          {"p_max", in.p_max},
          {"p_min", in.p_min},
          {"C", in.gradient_bound},
          {"L", in.neighbor_lipschitz},
          {"rho", in.lipschitz},
          {"mu", in.strong_monotonicity},
          {"x_max", in.x_max},
          {"x_min", in.x_min},
          {"N", in.players}};
}

inline Json rate_report_to_json(const RateReport& r) {
  Json curve = Json::array();
  for (const NavPoint& p : r.n_av_curve)
    curve.push_back({{"gamma", p.gamma}, {"eps", p.epsilon}, {"bound", optional_number(p.bound)}});
  return {{"phi", r.phi.phi},
          {"phi_admissible", r.phi.admissible},
          {"constants", rate_constants_to_json(r.constants)},
          {"d_star", optional_number(r.d_star)},
          {"d_star_sq_bound", r.d_star_sq_bound},
          {"n_av_curve", curve}};
}

inline Json counters_to_json(const EngineCounters& c) {
  return {{"local_updates", c.local_updates},
          {"skipped_steps", c.skipped_steps},
          {"retreats", c.retreats},
          {"rejected_steps", c.rejected_steps},
          {"one_sided_fd", c.one_sided_fd},
          {"exchanged_entries", c.exchanged_entries}};
}

// ---------------------------------------------------------------------------
// Text formatting

/// Shortest text that round-trips a double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw IoError("malformed number '" + s + "'");
  return v;
}

// ---------------------------------------------------------------------------
// Trajectory CSV: k, x_1..x_N, norm_err, consensus_err

inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  if (tr.samples.empty()) throw IoError("empty trajectory");
  const std::size_t n = tr.samples.front().x.size();
  os << "k";
  for (std::size_t i = 1; i <= n; ++i) os << ",x_" << i;
  os << ",norm_err,consensus_err\n";
  for (const TrajectorySample& s : tr.samples) {
    os << s.k;
    for (double v : s.x) os << ',' << format_double(v);
    os << ',' << format_double(s.norm_err) << ',' << format_double(s.consensus_err) << '\n';
  }
}

inline void write_trajectory_csv(const std::string& path, const Trajectory& tr) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  write_trajectory_csv(os, tr);
  if (!os) throw IoError("write failed: " + path);
}

/// Reads a trajectory back; the action-consensus column is not stored and
/// comes back as NaN.
inline Trajectory read_trajectory_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("trajectory file is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 4 || header.front() != "k" || header[header.size() - 2] != "norm_err" ||
      header.back() != "consensus_err")
    throw IoError("unexpected trajectory header");
  const std::size_t n = header.size() - 3;

  Trajectory tr;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != header.size()) throw IoError("trajectory row has the wrong number of columns");
    TrajectorySample s;
    s.k = std::stoull(cells[0]);
    for (std::size_t i = 0; i < n; ++i) s.x.push_back(parse_double(cells[1 + i]));
    s.norm_err = parse_double(cells[n + 1]);
    s.consensus_err = parse_double(cells[n + 2]);
    s.action_consensus_err = std::numeric_limits<double>::quiet_NaN();
    tr.samples.push_back(std::move(s));
  }
  if (tr.samples.size() >= 2) tr.stride = tr.samples[1].k - tr.samples[0].k;
  return tr;
}

inline Trajectory read_trajectory_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  return read_trajectory_csv(is);
}

inline Json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  try {
    return Json::parse(is);
  } catch (const Json::parse_error& e) {
    throw IoError(path + ": " + e.what());
  }
}

inline void write_json_file(const std::string& path, const Json& j) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os << j.dump(2) << '\n';
  if (!os) throw IoError("write failed: " + path);
}

}  // namespace gossip_nash
