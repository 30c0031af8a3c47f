#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "gossip_nash/engine.hpp"
#include "gossip_nash/game.hpp"
#include "gossip_nash/gossip_matrices.hpp"
#include "gossip_nash/graph.hpp"
#include "gossip_nash/io.hpp"
#include "gossip_nash/layout.hpp"
#include "gossip_nash/rate.hpp"

namespace gossip_nash {

/// Malformed or inconsistent experiment configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr int kConfigSchema = 1;
/// Largest residual accepted by the identity suite during validation.
inline constexpr double kIdentityTolerance = 1e-10;

struct SpectralSettings {
  double exchange_time = 1.0;  // r
  double gradient_time = 1.0;  // s
  std::vector<double> epsilons{0.25, 0.5, 0.75};
  std::vector<double> gammas = default_gamma_grid();
  double alpha = 0.1;  // step used for the rate bound when the run itself uses diminishing steps
  std::size_t constant_samples = 10000;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::filesystem::path base_dir = ".";
  Json game;                                 // resolved game object
  std::string communication = "auto:Gm";     // auto:Gm | auto:GI | complete | explicit
  std::vector<Edge> communication_edges;     // explicit mode
  std::vector<Edge> gm_edge_order;           // optional order for auto:Gm
  std::string layout = "interference";       // interference | complete
  EngineConfig engine;
  std::optional<std::vector<double>> init;   // common initial profile
  std::uint64_t rounds = 1000;
  std::uint64_t sample_stride = 100;
  std::vector<std::uint64_t> seeds{1};
  std::filesystem::path output_dir = "out";
  unsigned threads = 0;  // 0: one per seed, capped by the hardware
  SpectralSettings spectral;
};

namespace detail {

inline std::vector<Interval> parse_bounds(const Json& j, std::size_t n) {
  auto one = [](const Json& b) {
    if (!b.is_array() || b.size() != 2) throw ConfigError("bounds are [lo, hi]");
    return Interval{b[0].get<double>(), b[1].get<double>()};
  };
  if (j.is_array() && j.size() == 2 && j[0].is_number()) return std::vector<Interval>(n, one(j));
  if (!j.is_array() || j.size() != n) throw ConfigError("bounds: one [lo, hi] or one per player");
  std::vector<Interval> out;
  for (const Json& b : j) out.push_back(one(b));
  return out;
}

inline std::vector<double> scalar_or_list(const Json& j, std::size_t n, const char* what) {
  if (j.is_number()) return std::vector<double>(n, j.get<double>());
  if (!j.is_array() || j.size() != n) throw ConfigError(std::string(what) + ": a number or one value per player");
  return j.get<std::vector<double>>();
}

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace detail

/// Builds a game from its JSON description:
///   {"type": "quadratic", "players": N, "edges": [[u, v] or [u, v, b], ...], "q", "b", "c", "bounds"}
///   {"type": "wanet", "paths", "capacities", "kappa", "chi", "bounds"}
///   {"type": "wanet_generated", "users", "links", "seed", "max_hops", "capacity", "chi", "bounds", "kappa"}
inline GameDefinition game_from_json(const Json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "quadratic") {
    const auto n = j.at("players").get<std::size_t>();
    std::vector<Edge> edges;
    std::vector<double> weights;
    const double default_b = j.value("b", 0.0);
    for (const Json& e : j.at("edges")) {
      if (!e.is_array() || e.size() < 2 || e.size() > 3) throw ConfigError("quadratic edges are [u, v] or [u, v, b]");
      edges.emplace_back(e[0].get<Vertex>(), e[1].get<Vertex>());
      weights.push_back(e.size() == 3 ? e[2].get<double>() : default_b);
    }
    UndirectedGraph g(n, edges);
    if (g.edge_count() != edges.size()) throw ConfigError("quadratic edges contain duplicates");
    std::vector<double> coupling(g.edge_count());
    for (std::size_t t = 0; t < edges.size(); ++t) {
      const auto it = std::lower_bound(g.edges().begin(), g.edges().end(), edges[t]);
      coupling[static_cast<std::size_t>(it - g.edges().begin())] = weights[t];
    }
    return make_quadratic_game(g, detail::scalar_or_list(j.at("q"), n, "q"), coupling,
                               detail::scalar_or_list(j.at("c"), n, "c"), detail::parse_bounds(j.at("bounds"), n));
  }
  if (type == "wanet") {
    WanetSpec spec;
    spec.paths = j.at("paths").get<std::vector<std::vector<std::size_t>>>();
    spec.capacities = j.at("capacities").get<std::vector<double>>();
    spec.kappa = j.value("kappa", 1.0);
    spec.chi = detail::scalar_or_list(j.at("chi"), spec.paths.size(), "chi");
    spec.bounds = detail::parse_bounds(j.at("bounds"), spec.paths.size());
    spec.capacity_margin = j.value("capacity_margin", 1e-6);
    return make_wanet_game(spec);
  }
  if (type == "wanet_generated") {
    const Json b = j.value("bounds", Json::array({0.0, 10.0}));
    const WanetSpec spec =
        generate_wanet_spec(j.value("users", std::size_t{15}), j.value("links", std::size_t{16}),
                            j.value("seed", std::uint64_t{1}), j.value("max_hops", std::size_t{3}),
                            j.value("capacity", 10.0), j.value("chi", 10.0),
                            Interval{b.at(0).get<double>(), b.at(1).get<double>()}, j.value("kappa", 1.0));
    return make_wanet_game(spec);
  }
  throw ConfigError("unknown game type '" + type + "'");
}

inline ExperimentConfig parse_config(const Json& j, const std::filesystem::path& base_dir = ".") {
  try {
    if (j.value("schema", kConfigSchema) != kConfigSchema) throw ConfigError("unsupported config schema");
    ExperimentConfig cfg;
    cfg.base_dir = base_dir;
    cfg.name = j.value("name", cfg.name);

    const Json& game = j.at("game");
    if (game.is_string()) {
      const auto path = detail::resolve(base_dir, game.get<std::string>());
      if (!std::filesystem::exists(path)) throw ConfigError("game file not found: " + path.string());
      cfg.game = read_json_file(path.string());
    } else if (game.contains("file")) {
      const auto path = detail::resolve(base_dir, game.at("file").get<std::string>());
      if (!std::filesystem::exists(path)) throw ConfigError("game file not found: " + path.string());
      cfg.game = read_json_file(path.string());
    } else {
      cfg.game = game;
    }

    if (j.contains("communication")) {
      const Json& c = j.at("communication");
      if (c.is_string()) {
        cfg.communication = c.get<std::string>();
        if (cfg.communication != "auto:Gm" && cfg.communication != "auto:GI" && cfg.communication != "complete")
          throw ConfigError("communication must be auto:Gm, auto:GI, complete or an edge list");
      } else {
        cfg.communication = "explicit";
        cfg.communication_edges = edges_from_json(c);
      }
    }
    if (j.contains("gm_edge_order")) cfg.gm_edge_order = edges_from_json(j.at("gm_edge_order"));
    cfg.layout = j.value("layout", cfg.layout);
    if (cfg.layout != "interference" && cfg.layout != "complete")
      throw ConfigError("layout must be interference or complete");

    if (j.contains("engine")) {
      const Json& e = j.at("engine");
      const std::string grad = e.value("gradient", "exact");
      if (grad == "exact") cfg.engine.gradient = GradientMode::exact;
      else if (grad == "fd") cfg.engine.gradient = GradientMode::finite_difference;
      else throw ConfigError("gradient must be exact or fd");
      if (e.contains("steps")) {
        const Json& s = e.at("steps");
        if (s.is_string()) {
          if (s.get<std::string>() != "diminishing") throw ConfigError("steps: diminishing or {\"constant\": alpha}");
          cfg.engine.steps = StepSchedule::diminishing();
        } else {
          const Json& a = s.at("constant");
          cfg.engine.steps = a.is_number() ? StepSchedule::constant(a.get<double>())
                                           : StepSchedule::constant(a.get<std::vector<double>>());
        }
      }
      const std::string policy = e.value("domain_policy", "skip");
      if (policy == "skip") cfg.engine.domain_policy = DomainPolicy::skip;
      else if (policy == "retreat") cfg.engine.domain_policy = DomainPolicy::retreat;
      else throw ConfigError("domain_policy must be skip or retreat");
      cfg.engine.fd.c0 = e.value("fd_c0", cfg.engine.fd.c0);
      cfg.engine.fd.decay = e.value("fd_decay", cfg.engine.fd.decay);
      cfg.engine.reject_infeasible_steps = e.value("reject_infeasible_steps", cfg.engine.reject_infeasible_steps);
      cfg.engine.stall_limit = e.value("stall_limit", cfg.engine.stall_limit);
    }
    if (j.contains("init")) cfg.init = j.at("init").get<std::vector<double>>();
    cfg.rounds = j.value("rounds", cfg.rounds);
    cfg.sample_stride = j.value("sample_stride", cfg.sample_stride);
    if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    cfg.output_dir = detail::resolve(base_dir, j.value("output_dir", std::string("out")));
    cfg.threads = j.value("threads", 0u);

    if (j.contains("spectral")) {
      const Json& s = j.at("spectral");
      cfg.spectral.exchange_time = s.value("r", cfg.spectral.exchange_time);
      cfg.spectral.gradient_time = s.value("s", cfg.spectral.gradient_time);
      if (s.contains("epsilons")) cfg.spectral.epsilons = s.at("epsilons").get<std::vector<double>>();
      if (s.contains("gammas")) cfg.spectral.gammas = s.at("gammas").get<std::vector<double>>();
      cfg.spectral.alpha = s.value("alpha", cfg.spectral.alpha);
      cfg.spectral.constant_samples = s.value("constant_samples", cfg.spectral.constant_samples);
    }

    if (cfg.seeds.empty()) throw ConfigError("seeds must be non-empty");
    if (cfg.rounds == 0) throw ConfigError("rounds must be positive");
    if (cfg.sample_stride == 0) throw ConfigError("sample_stride must be positive");
    return cfg;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
}

inline ExperimentConfig load_config(const std::string& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config not found: " + path);
  Json j;
  try {
    j = read_json_file(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return parse_config(j, std::filesystem::path(path).parent_path());
}

/// Game, graphs and layout built from a config.
struct ExperimentSetup {
  std::shared_ptr<const GameDefinition> game;
  GraphPair graphs;
  EstimateLayout layout;
};

inline ExperimentSetup build_setup(const ExperimentConfig& cfg) {
  ExperimentSetup s;
  try {
    s.game = std::make_shared<const GameDefinition>(game_from_json(cfg.game));
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("game: ") + e.what());
  }
  const UndirectedGraph& gi = s.game->interference();
  if (!is_connected(gi)) throw ConfigError("interference graph must be connected");
  const UndirectedGraph gm = maximal_triangle_free_spanning_subgraph(gi, cfg.gm_edge_order);
  UndirectedGraph gc;
  if (cfg.communication == "auto:Gm") gc = gm;
  else if (cfg.communication == "auto:GI") gc = gi;
  else if (cfg.communication == "complete") gc = complete_graph(gi.size());
  else gc = UndirectedGraph(gi.size(), cfg.communication_edges);
  s.graphs = GraphPair{gi, gc, gm};
  s.layout = EstimateLayout(cfg.layout == "complete" ? complete_graph(gi.size()) : gi);
  return s;
}

/// Initial common profile used by runs: the configured one, or the box
/// midpoint pulled into the cost domain.
inline std::vector<double> initial_profile(const ExperimentConfig& cfg, const GameDefinition& game) {
  if (cfg.init) {
    if (!game.in_box(*cfg.init)) throw ConfigError("init must lie inside the action box");
    return *cfg.init;
  }
  auto z = shrink_to_domain(game, game.midpoint());
  if (!z) throw EngineError("no evaluable initial profile");
  return *z;
}

// ---------------------------------------------------------------------------
// validate

struct ValidationResult {
  bool pass = false;
  std::vector<std::string> failures;
  Json report;
};

inline std::string edge_text(const Edge& e) { return "(" + std::to_string(e.u) + "," + std::to_string(e.v) + ")"; }

inline ValidationResult cmd_validate(const ExperimentConfig& cfg) {
  ValidationResult v;
  const ExperimentSetup s = build_setup(cfg);
  const CommunicationReport comm = validate_communication_graph(s.graphs);
  if (!comm.pass) {
    std::string far;
    for (const Edge& e : comm.far_pairs) far += " " + edge_text(e);
    v.failures.push_back("communication graph is neither between G_m and G_I nor within two hops of every interfering pair;"
                         " interfering pairs more than two hops apart:" + far);
  }
  if (!comm.communication_connected) v.failures.push_back("communication graph is not connected");

  Json union_report = Json::object();
  for (Vertex i = 0; i < s.layout.players(); ++i) {
    const auto missing = unreachable_interferers(s.layout.graph(), s.graphs.communication, i);
    if (missing.empty()) continue;
    union_report[std::to_string(i)] = missing;
    std::string list;
    for (Vertex t : missing) list += " " + std::to_string(t);
    v.failures.push_back("player " + std::to_string(i) + " cannot refresh estimates of:" + list);
  }

  Json spectral = nullptr;
  Json identities = nullptr;
  if (comm.communication_connected) {
    const IdentityReport ids = verify_identities(s.layout, s.graphs.communication);
    identities = identity_report_to_json(ids);
    if (!(ids.max_residual() < kIdentityTolerance))
      v.failures.push_back("matrix identity residual " + format_double(ids.max_residual()) + " exceeds tolerance");
    const SpectralCore core = expected_w(s.layout, s.graphs.communication);
    spectral = spectral_core_to_json(core, s.layout);
    if (!(core.gamma >= 0.0 && core.gamma < 1.0)) v.failures.push_back("gamma outside [0, 1)");
  }

  v.pass = v.failures.empty();
  v.report = {{"name", cfg.name},
              {"pass", v.pass},
              {"failures", v.failures},
              {"interference", graph_to_json(s.graphs.interference)},
              {"communication", graph_to_json(s.graphs.communication)},
              {"triangle_free", graph_to_json(s.graphs.triangle_free)},
              {"layout", layout_to_json(s.layout)},
              {"communication_check", communication_report_to_json(comm)},
              {"unreachable_interferers", union_report},
              {"identities", identities},
              {"spectral", spectral}};
  return v;
}

// ---------------------------------------------------------------------------
// oracle

struct OracleResult {
  std::vector<double> x;
  std::string source;  // closed_form | centralized
  double residual = 0.0;
  std::size_t iterations = 0;
};

inline OracleResult compute_oracle(const GameDefinition& game) {
  OracleResult o;
  if (game.known_ne()) {
    o.x = *game.known_ne();
    o.source = "closed_form";
    o.residual = fixed_point_residual(game, o.x, 0.1);
    return o;
  }
  NeSolverOptions opts;
  opts.tol = 1e-10;
  const NeSolution sol = solve_ne_centralized(game, opts);
  o.x = sol.x;
  o.source = "centralized";
  o.residual = sol.residual;
  o.iterations = sol.iterations;
  return o;
}

inline Json oracle_to_json(const OracleResult& o) {
  return {{"x", o.x}, {"source", o.source}, {"residual", o.residual}, {"iterations", o.iterations}};
}

inline Json cmd_oracle(const ExperimentConfig& cfg) {
  const ExperimentSetup s = build_setup(cfg);
  const OracleResult o = compute_oracle(*s.game);
  return {{"name", cfg.name}, {"game", s.game->name()}, {"players", s.game->size()}, {"oracle", oracle_to_json(o)}};
}

// ---------------------------------------------------------------------------
// run

struct TrajectoryStats {
  std::uint64_t final_k = 0;
  double final_norm_err = 0.0;
  double final_consensus_err = 0.0;
  double initial_consensus_err = 0.0;
  double tail_min_norm_err = 0.0;  // min over samples with k ≥ (1 - tail) · final_k
  std::size_t samples = 0;
};

inline TrajectoryStats summarize_trajectory(const Trajectory& tr, double tail = 0.2) {
  if (tr.samples.empty()) throw std::invalid_argument("empty trajectory");
  TrajectoryStats st;
  const TrajectorySample& last = tr.samples.back();
  st.final_k = last.k;
  st.final_norm_err = last.norm_err;
  st.final_consensus_err = last.consensus_err;
  st.initial_consensus_err = tr.samples.front().consensus_err;
  st.samples = tr.samples.size();
  const double start = (1.0 - tail) * static_cast<double>(last.k);
  st.tail_min_norm_err = std::numeric_limits<double>::infinity();
  for (const TrajectorySample& s : tr.samples)
    if (static_cast<double>(s.k) >= start) st.tail_min_norm_err = std::min(st.tail_min_norm_err, s.norm_err);
  if (std::isnan(last.norm_err)) st.tail_min_norm_err = last.norm_err;
  return st;
}

inline Json stats_to_json(const TrajectoryStats& s) {
  return {{"final_k", s.final_k},
          {"final_norm_err", s.final_norm_err},
          {"final_consensus_err", s.final_consensus_err},
          {"initial_consensus_err", s.initial_consensus_err},
          {"tail_min_norm_err", s.tail_min_norm_err},
          {"samples", s.samples}};
}

struct SeedResult {
  std::uint64_t seed = 0;
  Trajectory trajectory;
  TrajectoryStats stats;
  EngineCounters counters;
  double wall_seconds = 0.0;
  std::string error;
  std::string csv_path;
};

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::uint64_t> rounds;
};

inline void apply_overrides(ExperimentConfig& cfg, const RunOverrides& o) {
  if (o.seed) cfg.seeds = {*o.seed};
  if (o.output_dir) cfg.output_dir = *o.output_dir;
  if (o.rounds) {
    if (*o.rounds == 0) throw ConfigError("rounds must be positive");
    cfg.rounds = *o.rounds;
  }
}

struct RunResult {
  std::vector<SeedResult> seeds;  // sorted by seed
  std::optional<OracleResult> oracle;
  std::string oracle_error;
  Json summary;
};

inline std::string metadata_path(const std::filesystem::path& dir, std::uint64_t seed) {
  return (dir / ("run_seed" + std::to_string(seed) + ".json")).string();
}
inline std::string trajectory_path(const std::filesystem::path& dir, std::uint64_t seed) {
  return (dir / ("trajectory_seed" + std::to_string(seed) + ".csv")).string();
}

/// Runs every seed (in parallel), writes one trajectory CSV and one metadata
/// JSON per seed plus summary.json, and returns the results sorted by seed.
inline RunResult cmd_run(const ExperimentConfig& cfg) {
  const ExperimentSetup s = build_setup(cfg);
  RunResult out;
  try {
    out.oracle = compute_oracle(*s.game);
  } catch (const std::exception& e) {
    out.oracle_error = e.what();
  }
  std::optional<std::vector<double>> reference;
  if (out.oracle) reference = out.oracle->x;

  const GossipEngine engine(s.layout, s.graphs.communication, s.game, cfg.engine);
  const std::vector<double> z0 = initial_profile(cfg, *s.game);
  std::filesystem::create_directories(cfg.output_dir);

  std::vector<SeedResult> results(cfg.seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t t = next++; t < cfg.seeds.size(); t = next++) {
      SeedResult& r = results[t];
      r.seed = cfg.seeds[t];
      const auto started = std::chrono::steady_clock::now();
      try {
        EngineState st = engine.init_state(r.seed, z0);
        r.trajectory = engine.run(st, cfg.rounds, cfg.sample_stride, reference);
        r.counters = st.counters;
        r.stats = summarize_trajectory(r.trajectory);
        r.csv_path = trajectory_path(cfg.output_dir, r.seed);
        write_trajectory_csv(r.csv_path, r.trajectory);
      } catch (const std::exception& e) {
        r.error = e.what();
      }
      r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(cfg.threads ? cfg.threads : hw, cfg.seeds.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::sort(results.begin(), results.end(), [](const SeedResult& a, const SeedResult& b) { return a.seed < b.seed; });

  Json per_seed = Json::array();
  double max_err = 0.0;
  bool any_error = false;
  for (const SeedResult& r : results) {
    Json meta = {{"seed", r.seed},
                 {"mode", to_string(cfg.engine.gradient)},
                 {"schedule", to_string(cfg.engine.steps.kind)},
                 {"domain_policy", to_string(cfg.engine.domain_policy)},
                 {"rounds", cfg.rounds},
                 {"sample_stride", cfg.sample_stride},
                 {"wall_seconds", r.wall_seconds},
                 {"counters", counters_to_json(r.counters)},
                 {"skipped_steps", r.counters.skipped_steps}};
    if (cfg.engine.steps.kind == StepSchedule::Kind::constant) meta["alpha"] = cfg.engine.steps.alpha;
    if (cfg.engine.gradient == GradientMode::finite_difference)
      meta["fd"] = {{"c0", cfg.engine.fd.c0}, {"decay", cfg.engine.fd.decay}};
    if (!r.error.empty()) {
      meta["error"] = r.error;
      any_error = true;
    } else {
      meta["stats"] = stats_to_json(r.stats);
      meta["trajectory"] = std::filesystem::path(r.csv_path).filename().string();
      max_err = std::max(max_err, r.stats.final_norm_err);
    }
    write_json_file(metadata_path(cfg.output_dir, r.seed), meta);
    per_seed.push_back(meta);
  }

  out.summary = {{"name", cfg.name},
                 {"game", s.game->name()},
                 {"players", s.game->size()},
                 {"layout", cfg.layout},
                 {"estimate_dimension", s.layout.dimension()},
                 {"communication", graph_to_json(s.graphs.communication)},
                 {"runs", per_seed}};
  if (out.oracle) {
    out.summary["oracle"] = oracle_to_json(*out.oracle);
    if (!any_error) out.summary["max_final_norm_err"] = max_err;
  } else {
    out.summary["oracle"] = {{"error", out.oracle_error}};
  }
  write_json_file((cfg.output_dir / "summary.json").string(), out.summary);
  out.seeds = std::move(results);
  return out;
}

// ---------------------------------------------------------------------------
// spectral

/// Rate-bound inputs for a setup: sampled (or declared) game constants, wake
/// probabilities of the uniform scheduler and the constant step sizes.
inline RateInputs rate_inputs_for(const GameDefinition& game, const UndirectedGraph& communication, double gamma,
                                  const StepSchedule& steps, std::span<const double> init,
                                  std::size_t constant_samples = 10000, std::uint64_t seed = 1) {
  const GameConstants k = estimate_constants(game, constant_samples, seed);
  const auto p = wake_probabilities(communication);
  RateInputs in;
  in.gamma = gamma;
  in.alpha_max = steps.max_alpha();
  in.alpha_min = steps.min_alpha();
  in.p_max = *std::max_element(p.begin(), p.end());
  in.p_min = *std::min_element(p.begin(), p.end());
  in.gradient_bound = k.gradient_bound;
  in.neighbor_lipschitz = k.neighbor_lipschitz;
  in.lipschitz = k.lipschitz;
  in.strong_monotonicity = k.strong_monotonicity;
  in.players = game.size();
  for (const Interval& b : game.bounds()) in.x_max = std::max({in.x_max, std::abs(b.lo), std::abs(b.hi)});
  in.x_min = std::numeric_limits<double>::infinity();
  for (double v : init) in.x_min = std::min(in.x_min, std::abs(v));
  return in;
}

inline void write_nav_curve_csv(const std::string& path, const std::vector<NavPoint>& curve) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os << "gamma,eps,bound\n";
  for (const NavPoint& p : curve)
    os << format_double(p.gamma) << ',' << format_double(p.epsilon) << ',' << (p.bound ? format_double(*p.bound) : "")
       << '\n';
}

/// γ for the configured layout and for the complete layout over the same
/// communication graph, the per-round time model, and the averaging-time
/// bound over a γ grid (taking d*² = C₇). Writes spectral.json and nav_curve.csv.
inline Json cmd_spectral(const ExperimentConfig& cfg) {
  const ExperimentSetup s = build_setup(cfg);
  const UndirectedGraph& gc = s.graphs.communication;
  if (!is_connected(gc)) throw ConfigError("communication graph must be connected");
  const std::size_t n = s.layout.players();
  const EstimateLayout sparse(s.game->interference());
  const EstimateLayout full(complete_graph(n));
  const SpectralCore core_sparse = expected_w(sparse, gc);
  const SpectralCore core_full = expected_w(full, gc);
  const IdentityReport ids = verify_identities(sparse, gc);
  const IterationTime t = iteration_time_model(sparse, gc, cfg.spectral.exchange_time, cfg.spectral.gradient_time);

  Json report = {{"name", cfg.name},
                 {"gamma", core_sparse.gamma},
                 {"m", sparse.dimension()},
                 {"residuals", identity_report_to_json(ids)},
                 {"eig_wbar", spectral_core_to_json(core_sparse, sparse)["eig_wbar"]},
                 {"complete_layout", spectral_core_to_json(core_full, full)},
                 {"time_model", {{"r", cfg.spectral.exchange_time},
                                 {"s", cfg.spectral.gradient_time},
                                 {"t_av_sparse", t.sparse},
                                 {"t_av_complete", t.complete}}}};

  const StepSchedule steps = cfg.engine.steps.kind == StepSchedule::Kind::constant
                                 ? cfg.engine.steps
                                 : StepSchedule::constant(cfg.spectral.alpha);
  std::filesystem::create_directories(cfg.output_dir);
  const std::string curve_path = (cfg.output_dir / "nav_curve.csv").string();
  try {
    const auto z0 = initial_profile(cfg, *s.game);
    const RateInputs in =
        rate_inputs_for(*s.game, gc, core_sparse.gamma, steps, z0, cfg.spectral.constant_samples);
    report["rate_inputs"] = rate_inputs_to_json(in);
    const PhiResult phi = compute_phi(in);
    report["phi"] = phi.phi;
    report["phi_admissible"] = phi.admissible;
    if (phi.admissible) {
      const RateReport rr = rate_report(in, cfg.spectral.epsilons, std::nullopt, cfg.spectral.gammas);
      report["rate"] = rate_report_to_json(rr);
      write_nav_curve_csv(curve_path, rr.n_av_curve);
      report["nav_curve"] = std::filesystem::path(curve_path).filename().string();
    } else {
      report["rate_error"] = "phi outside (0, 1): no bound for these step sizes";
    }
  } catch (const RateError& e) {
    report["rate_error"] = e.what();
  }
  write_json_file((cfg.output_dir / "spectral.json").string(), report);
  return report;
}

}  // namespace gossip_nash
