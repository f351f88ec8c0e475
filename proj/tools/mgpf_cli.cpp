// mgpf: command-line front end.
//
//   mgpf gen-dataset --config c.json --out dir
//   mgpf plan --scenario s.json --provider oracle|files|euclidean [--masks dir] --seed S --out result.json
//   mgpf bench --spec spec.json --out dir
//   mgpf render --scenario s.json --result r.json --out img.svg
//   mgpf graph-dump --scenario s.json --provider P --out g.json
//
// Exit codes: 0 success, 1 planner failure, 2 usage or input error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mgpf/bench.hpp"
#include "mgpf/config.hpp"
#include "mgpf/dataset.hpp"
#include "mgpf/mgpf.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kPlannerFailure = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw UsageError("cannot open " + p.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("malformed JSON in " + p.string() + ": " + e.what());
  }
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw mgpf::Error("cannot write " + p.string());
  out << text;
}

// Planner flags shared by plan, render and graph-dump. Unset flags leave the
// config (defaults or --config file) untouched.
struct PlannerFlags {
  std::string config_path;
  std::optional<double> k1, k2, step, goal_radius, goal_bias, rewire_radius;
  std::optional<std::size_t> budget;
  std::optional<int> region_radius, guide_radius;

  void attach(CLI::App* app, bool sampling) {
    app->add_option("--config", config_path, "planner config JSON")->check(CLI::ExistingFile);
    app->add_option("--region-radius", region_radius, "oracle region dilation (cells)");
    app->add_option("--guide-radius", guide_radius, "oracle guideline dilation (cells)");
    if (!sampling) return;
    app->add_option("--k1", k1, "guideline threshold: u > k1 samples the guideline");
    app->add_option("--k2", k2, "region threshold: u < k2 samples the region");
    app->add_option("--step", step, "steer length");
    app->add_option("--goal-radius", goal_radius, "goal connection radius");
    app->add_option("--goal-bias", goal_bias, "goal sampling probability");
    app->add_option("--budget", budget, "samples per leg");
    app->add_option("--rewire-radius", rewire_radius, "RRT* neighbourhood cap");
  }

  mgpf::PlannerConfig resolve() const {
    mgpf::PlannerConfig c;
    if (!config_path.empty()) c = mgpf::planner_config_from_json(read_json(config_path));
    if (k1) c.sampler.k1 = *k1;
    if (k2) c.sampler.k2 = *k2;
    if (step) c.rrt.step = *step;
    if (goal_radius) c.rrt.goal_radius = *goal_radius;
    if (goal_bias) c.rrt.goal_bias = *goal_bias;
    if (budget) c.rrt.max_samples = *budget;
    if (rewire_radius) c.rrt.rewire_radius = *rewire_radius;
    if (region_radius) c.oracle.region_radius = *region_radius;
    if (guide_radius) c.oracle.guide_radius = *guide_radius;
    c.validate();
    return c;
  }
};

mgpf::ProviderKind provider_kind(const std::string& name) {
  try {
    return mgpf::parse_provider_kind(name);
  } catch (const mgpf::Error& e) {
    throw UsageError(e.what());
  }
}

mgpf::Scenario load_scenario_or_usage(const fs::path& p) {
  try {
    return mgpf::load_scenario(p);
  } catch (const mgpf::Error& e) {
    throw UsageError(e.what());
  }
}

bool is_unreachable(const mgpf::Error& e) { return std::string_view(e.what()).find("unreachable") != std::string_view::npos; }

int cmd_gen_dataset(const fs::path& config_path, const fs::path& out) {
  mgpf::DatasetConfig config;
  try {
    config = mgpf::dataset_config_from_json(read_json(config_path));
  } catch (const mgpf::Error& e) {
    throw UsageError(e.what());
  }
  const mgpf::Dataset ds = mgpf::generate_dataset(config);
  mgpf::export_dataset(ds, out);
  if (config.scenario_count > 0) {
    fs::create_directories(out / "scenarios");
    mgpf::Rng rng(mgpf::derive_seed(config.seed, 0x5ce7));
    for (int k = 0; k < config.scenario_count; ++k) {
      const mgpf::GridMap map = mgpf::generate_map(config, rng);
      const int goals = config.goals_min + static_cast<int>(rng.below(config.goals_max - config.goals_min + 1));
      char stem[32];
      std::snprintf(stem, sizeof(stem), "scenario_%03d", k);
      const mgpf::Scenario s = mgpf::generate_scenario(map, goals, rng, config, stem);
      mgpf::save_scenario(s, out / "scenarios" / (std::string(stem) + ".json"), std::string(stem) + ".png");
    }
  }
  std::cout << "wrote " << ds.records.size() << " samples";
  if (config.scenario_count > 0) std::cout << " and " << config.scenario_count << " scenarios";
  std::cout << " to " << out.string() << '\n';
  return kOk;
}

int cmd_plan(const fs::path& scenario_path, const std::string& provider_name, const fs::path& masks,
             std::uint64_t seed, const fs::path& out, const PlannerFlags& flags, bool timing) {
  const mgpf::Scenario scenario = load_scenario_or_usage(scenario_path);
  const auto kind = provider_kind(provider_name);
  mgpf::PlannerConfig cfg;
  try {
    cfg = flags.resolve();
  } catch (const mgpf::Error& e) {
    throw UsageError(e.what());
  }
  cfg.set_seed(seed);
  if (kind == mgpf::ProviderKind::files && masks.empty()) throw UsageError("--provider files requires --masks");
  const auto provider = mgpf::make_provider(kind, cfg.oracle, masks);

  mgpf::PlanResult result;
  result.provider = mgpf::to_string(kind);
  std::string failure;
  try {
    result = mgpf::pke_rrt(scenario, *provider, cfg.sampler, cfg.rrt);
  } catch (const mgpf::Error& e) {
    if (!is_unreachable(e)) throw;
    failure = e.what();
  }
  if (result.success && !mgpf::validate_solution(scenario, result).ok()) {
    result.success = false;
    failure = "solution failed validation";
  }
  nlohmann::json j = mgpf::result_to_json(result, scenario.name, timing);
  j["seed"] = seed;
  j["config"] = mgpf::to_json(cfg);
  if (!failure.empty()) j["error"] = failure;
  write_text(out, j.dump(2) + "\n");
  if (!result.success) {
    std::cerr << "planning failed" << (failure.empty() ? "" : ": " + failure) << '\n';
    return kPlannerFailure;
  }
  std::printf("success: %zu legs, length %.3f, %zu samples\n", result.legs.size(), result.total_length,
              result.total_samples());
  return kOk;
}

int cmd_bench(const fs::path& spec_path, const fs::path& out, std::optional<unsigned> threads) {
  mgpf::BenchSpec spec;
  try {
    spec = mgpf::load_bench_spec(spec_path);
  } catch (const mgpf::Error& e) {
    throw UsageError(e.what());
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("bench spec: ") + e.what());
  }
  if (threads) spec.threads = *threads;
  const mgpf::BenchResult res = mgpf::run_bench(spec);
  mgpf::write_bench_outputs(spec, res, out);
  std::cout << mgpf::results_csv(res.rows);
  for (const auto& row : res.rows) {
    if (!row.error.empty()) return kPlannerFailure;
  }
  return kOk;
}

int cmd_render(const fs::path& scenario_path, const fs::path& result_path, const fs::path& masks,
               const fs::path& out, const PlannerFlags& flags) {
  const mgpf::Scenario scenario = load_scenario_or_usage(scenario_path);
  mgpf::PlanResult result;
  try {
    result = mgpf::result_from_json(read_json(result_path));
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("malformed result: ") + e.what());
  }
  if (result.legs.empty()) throw UsageError("result has no legs to render");

  std::optional<mgpf::WeightedGraph> graph;
  if (result.provider == "oracle" || (result.provider == "files" && !masks.empty())) {
    const auto provider = mgpf::make_provider(provider_kind(result.provider), flags.resolve().oracle, masks);
    graph = mgpf::build_graph(scenario, *provider);
  }
  write_text(out, mgpf::render_svg(scenario, result, graph ? &*graph : nullptr));
  return kOk;
}

int cmd_graph_dump(const fs::path& scenario_path, const std::string& provider_name, const fs::path& masks,
                   const fs::path& out, const PlannerFlags& flags) {
  const mgpf::Scenario scenario = load_scenario_or_usage(scenario_path);
  const auto kind = provider_kind(provider_name);
  if (kind == mgpf::ProviderKind::files && masks.empty()) throw UsageError("--provider files requires --masks");
  const auto provider = mgpf::make_provider(kind, flags.resolve().oracle, masks);
  try {
    const mgpf::WeightedGraph g = mgpf::build_graph(scenario, *provider);
    nlohmann::json j = mgpf::graph_to_json(g);
    j["provider"] = provider_name;
    j["scenario"] = scenario.name;
    write_text(out, j.dump(2) + "\n");
  } catch (const mgpf::Error& e) {
    if (!is_unreachable(e)) throw;
    std::cerr << e.what() << '\n';
    return kPlannerFailure;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-goal path finding with prior-guided RRT"};
  app.set_version_flag("--version", std::string("mgpf ") + MGPF_VERSION + " (C++" + std::to_string(__cplusplus / 100 % 100) +
                                        ", " + __DATE__ + ")");
  app.require_subcommand(1);

  std::string config_path, scenario_path, provider = "oracle", masks, out, spec_path, result_path;
  std::uint64_t seed = 0;
  bool timing = false;
  std::optional<unsigned> threads;

  auto* gen = app.add_subcommand("gen-dataset", "generate maps, labeled pairs and scenarios");
  gen->add_option("--config", config_path, "dataset config JSON")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", out, "output directory")->required();

  PlannerFlags plan_flags;
  auto* plan = app.add_subcommand("plan", "plan a closed multi-goal path");
  plan->add_option("--scenario", scenario_path, "scenario JSON")->required()->check(CLI::ExistingFile);
  plan->add_option("--provider", provider, "prior provider")->check(CLI::IsMember({"oracle", "files", "euclidean"}));
  plan->add_option("--masks", masks, "prior directory for the files provider")->check(CLI::ExistingDirectory);
  plan->add_option("--seed", seed, "base seed");
  plan->add_option("--out", out, "result JSON")->required();
  plan->add_flag("--timing", timing, "include wall-clock fields in the result");
  plan_flags.attach(plan, true);

  auto* bench = app.add_subcommand("bench", "run the benchmark protocol");
  bench->add_option("--spec", spec_path, "bench spec JSON")->required()->check(CLI::ExistingFile);
  bench->add_option("--out", out, "output directory")->required();
  bench->add_option("--threads", threads, "worker threads (0: all cores)");

  PlannerFlags render_flags;
  auto* render = app.add_subcommand("render", "draw a result as SVG");
  render->add_option("--scenario", scenario_path, "scenario JSON")->required()->check(CLI::ExistingFile);
  render->add_option("--result", result_path, "result JSON")->required()->check(CLI::ExistingFile);
  render->add_option("--masks", masks, "prior directory for files-provider results")->check(CLI::ExistingDirectory);
  render->add_option("--out", out, "SVG file")->required();
  render_flags.attach(render, false);

  PlannerFlags dump_flags;
  auto* dump = app.add_subcommand("graph-dump", "write the prior-weighted graph as JSON");
  dump->add_option("--scenario", scenario_path, "scenario JSON")->required()->check(CLI::ExistingFile);
  dump->add_option("--provider", provider, "prior provider")->required()->check(
      CLI::IsMember({"oracle", "files", "euclidean"}));
  dump->add_option("--masks", masks, "prior directory for the files provider")->check(CLI::ExistingDirectory);
  dump->add_option("--out", out, "graph JSON")->required();
  dump_flags.attach(dump, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*gen) return cmd_gen_dataset(config_path, out);
    if (*plan) return cmd_plan(scenario_path, provider, masks, seed, out, plan_flags, timing);
    if (*bench) return cmd_bench(spec_path, out, threads);
    if (*render) return cmd_render(scenario_path, result_path, masks, out, render_flags);
    if (*dump) return cmd_graph_dump(scenario_path, provider, masks, out, dump_flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
