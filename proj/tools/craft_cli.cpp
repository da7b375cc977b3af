#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "craft/config.hpp"
#include "craft/dataset_io.hpp"
#include "craft/errors.hpp"
#include "craft/eval.hpp"
#include "craft/experiment.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace craft;

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> seeds;
  std::string out = ".";
  std::optional<unsigned> threads;
  std::string algorithm;
  std::string data_a;
  std::string data_b;
  std::vector<std::size_t> sizes;
  std::string manifest;
};

RunConfig resolve(const Options& o) {
  RunConfig c = o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
  if (o.seed) c.data_seed = *o.seed;
  if (o.seeds) {
    if (*o.seeds < 1) throw ConfigError("--seeds must be positive");
    c.seeds = *o.seeds;
  }
  if (o.threads) c.threads = *o.threads;
  if (!o.algorithm.empty()) c.algorithm = o.algorithm;
  if (!o.sizes.empty()) c.sizes = o.sizes;
  return c;
}

void write_text(const fs::path& path, const std::string& text) {
  if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

ToyData load_or_generate(const Options& o, const RunConfig& c) {
  if (o.data_a.empty() != o.data_b.empty()) throw ConfigError("--data-a and --data-b must be given together");
  if (o.data_a.empty()) return generate_toy_data(c, c.n, c.env_seed, c.data_seed, c.threads);
  ToyData d;
  d.a = load_dataset(o.data_a);
  d.b = load_dataset(o.data_b);
  if (d.a.horizon != d.b.horizon) {
    throw DataError("horizon mismatch: " + o.data_a + " has H=" + std::to_string(d.a.horizon) + ", " + o.data_b +
                    " has H=" + std::to_string(d.b.horizon));
  }
  if (d.a.horizon != c.horizon || d.a.obs_length != c.width || d.b.obs_length != c.width) {
    throw DataError("datasets do not match the [env] block (H=" + std::to_string(c.horizon) +
                    ", M=" + std::to_string(c.width) + ")");
  }
  d.env = build_toy_env(c.horizon, c.width, c.env_seed);
  return d;
}

int cmd_generate(const Options& o) {
  const RunConfig c = resolve(o);
  const ToyData d = generate_toy_data(c, c.n, c.env_seed, c.data_seed, c.threads);
  const fs::path dir(o.out);
  fs::create_directories(dir);
  save_dataset(dir / "dataset_A.txt", d.a);
  save_dataset(dir / "dataset_B.txt", d.b);
  json manifest{{"command", "generate"},
                {"config", config_json(c)},
                {"env_seed", c.env_seed},
                {"data_seed", c.data_seed},
                {"files", {"dataset_A.txt", "dataset_B.txt"}}};
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  std::cout << "wrote " << (dir / "dataset_A.txt").string() << " and " << (dir / "dataset_B.txt").string() << " (n="
            << c.n << " per agent)\n";
  return 0;
}

int cmd_run(const Options& o) {
  const RunConfig c = resolve(o);
  const ToyData d = load_or_generate(o, c);
  if (c.algorithm == "draft" && d.a.horizon != 2) throw PreconditionError("draft requires H = 2 data");
  const AlgorithmResult r = run_toy_algorithm(c.algorithm, d, c, c.threads);

  json result{{"command", "run"},
              {"algorithm", r.algorithm},
              {"config", config_json(c)},
              {"env_seed", c.env_seed},
              {"data_seed", c.data_seed},
              {"params", params_json(preprocess(c.craft))},
              {"per_h", r.per_h},
              {"average", r.average},
              {"details", r.details}};
  if (!r.error.empty()) result["error"] = r.error;
  const fs::path dir(o.out);
  fs::create_directories(dir);
  write_text(dir / "results.json", result.dump(2) + "\n");
  std::ostringstream csv;
  csv << "h,accuracy\n" << std::fixed << std::setprecision(6);
  for (std::size_t h = 0; h < r.per_h.size(); ++h) {
    double s = 0.0;
    for (double v : r.per_h[h]) s += v;
    csv << h << "," << s / static_cast<double>(r.per_h[h].size()) << "\n";
  }
  write_text(dir / "per_h.csv", csv.str());
  std::cout << r.algorithm << ": average accuracy " << std::fixed << std::setprecision(4) << r.average << "\n";
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  if (!r.error.empty()) {
    std::cerr << "error: " << r.error << "\n";
    return 4;
  }
  return 0;
}

int cmd_table(const Options& o) {
  const RunConfig c = resolve(o);
  const ComparisonTable t = reproduce_table1(c, c.threads, [](const std::string& line) { std::cerr << line << "\n"; });
  const fs::path dir(o.out);
  fs::create_directories(dir);
  write_text(dir / "table1.csv", table_csv(t));
  write_text(dir / "table1.json", table_json(t).dump(2) + "\n");
  std::cout << table_csv(t);
  if (t.low_confidence) std::cout << "note: fewer than 5 seeds, low confidence\n";
  return 0;
}

int cmd_check(const Options& o) {
  const RunConfig c = resolve(o);
  const ToyData d = load_or_generate(o, c);
  AssumptionBounds bounds{c.craft.alpha, c.craft.nu, c.craft.eta};
  const AssumptionReport rep = check_assumptions(d.a, d.b, bounds);
  json v = json::array();
  for (const auto& x : rep.violations) {
    v.push_back({{"h", x.h}, {"states", x.states}, {"inequality", x.inequality}, {"value", x.value}, {"bound", x.bound}});
  }
  json out{{"nu_hat", rep.nu_hat},
           {"nu_prime_hat", rep.nu_prime_hat},
           {"eta_hat", rep.eta_hat},
           {"alpha_hat", std::isfinite(rep.alpha_hat) ? json(rep.alpha_hat) : json("inf")},
           {"violations", v}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_inspect(const Options& o) {
  std::ifstream in(o.manifest);
  if (!in) throw DataError(o.manifest + ": cannot open");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(o.manifest + ": " + e.what());
  }
  if (j.contains("command")) std::cout << "command: " << j["command"].get<std::string>() << "\n";
  if (j.contains("config")) std::cout << "config hash: " << j["config"]["hash"].get<std::string>() << "\n";
  if (j.contains("params")) std::cout << "params: " << j["params"].dump() << "\n";
  if (j.contains("algorithm")) {
    std::cout << "algorithm: " << j["algorithm"].get<std::string>() << "  average: " << j["average"].dump() << "\n";
  }
  if (j.contains("error")) std::cout << "error: " << j["error"].get<std::string>() << "\n";
  if (j.contains("cells")) {
    for (const auto& c : j["cells"]) {
      std::cout << std::left << std::setw(12) << c["algorithm"].get<std::string>() << " n=" << std::setw(6)
                << c["n"].get<std::size_t>() << " mean=" << std::fixed << std::setprecision(4) << c["mean"].get<double>()
                << " se=" << c["std_error"].get<double>() << "\n";
    }
  }
  if (j.contains("details") && j["details"].contains("steps")) {
    for (const auto& s : j["details"]["steps"]) {
      std::cout << "h=" << s["h"] << " predictor=(" << s["predictor"]["enc_h"] << "," << s["predictor"]["enc_next"]
                << ") table=" << s["predictor"]["table"].dump() << " windows=";
      std::size_t windows = 0;
      for (const auto& sc : s["scans"]) windows += sc["windows"].size();
      std::cout << windows << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CRAFT latent state discovery from two agents' action-free trajectories"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "INI run configuration")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "data seed override");
    sub->add_option("--threads", o.threads, "worker threads (speed only)");
    sub->add_option("--out", o.out, "output directory");
  };
  auto* gen = app.add_subcommand("generate", "simulate and save both agents' datasets");
  common(gen);
  auto* run = app.add_subcommand("run", "run one algorithm and report per-timestep accuracy");
  common(run);
  run->add_option("--algorithm", o.algorithm, "craft | draft | single-obs | paired-obs")
      ->check(CLI::IsMember({"craft", "draft", "single-obs", "paired-obs"}));
  run->add_option("--data-a", o.data_a, "dataset file for agent A");
  run->add_option("--data-b", o.data_b, "dataset file for agent B");
  auto* table = app.add_subcommand("reproduce-table1", "multi-seed comparison of CRAFT and both baselines");
  common(table);
  table->add_option("--seeds", o.seeds, "number of seeds");
  table->add_option("--sizes", o.sizes, "trajectories per agent")->delimiter(',');
  auto* check = app.add_subcommand("check-assumptions", "empirical coverage and separation report");
  common(check);
  check->add_option("--data-a", o.data_a, "dataset file for agent A");
  check->add_option("--data-b", o.data_b, "dataset file for agent B");
  auto* inspect = app.add_subcommand("inspect", "summarise a manifest or results file");
  inspect->add_option("manifest", o.manifest, "JSON file written by another command")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) return cmd_generate(o);
    if (*run) return cmd_run(o);
    if (*table) return cmd_table(o);
    if (*check) return cmd_check(o);
    return cmd_inspect(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition failed: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
