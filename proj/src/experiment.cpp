#include "craft/experiment.hpp"

#include <cmath>
#include <iomanip>
#include <mutex>
#include <sstream>

#include "craft/baselines.hpp"
#include "craft/errors.hpp"
#include "craft/eval.hpp"
#include "craft/observations.hpp"
#include "craft/parallel.hpp"

namespace craft {

using nlohmann::json;

ToyData generate_toy_data(const RunConfig& config, std::size_t n, std::uint64_t env_seed, std::uint64_t data_seed,
                          unsigned threads) {
  ToyData d;
  d.env = build_toy_env(config.horizon, config.width, env_seed);
  const auto pa = make_policy(config.policy_a, d.env.model.num_actions);
  const auto pb = make_policy(config.policy_b, d.env.model.num_actions);
  d.a = generate_dataset(d.env.model, *pa, n, Agent::A, derive_seed(data_seed, {0x41}), threads);
  d.b = generate_dataset(d.env.model, *pb, n, Agent::B, derive_seed(data_seed, {0x42}), threads);
  return d;
}

json params_json(const PreprocessedParams& p) {
  return json{{"alpha_clipped", p.alpha_clipped},
              {"xi", p.xi},
              {"n_xi", p.n_xi},
              {"eta_effective", p.eta_effective},
              {"grid", p.grid.values()}};
}

json config_json(const RunConfig& c) {
  auto policy = [](const PolicyConfig& p) { return json{{"kind", p.kind}, {"stay", p.stay}, {"action", p.action}}; };
  return json{{"env", {{"kind", c.env_kind}, {"H", c.horizon}, {"M", c.width}, {"seed", c.env_seed}}},
              {"agents", {{"n", c.n}, {"a", policy(c.policy_a)}, {"b", policy(c.policy_b)}}},
              {"algo",
               {{"name", c.algorithm},
                {"alpha", c.craft.alpha},
                {"eta", c.craft.eta},
                {"nu", c.craft.nu},
                {"max_states", c.craft.max_states}}},
              {"run", {{"seed", c.data_seed}, {"seeds", c.seeds}, {"sizes", c.sizes}}},
              {"hash", config_hash(c)}};
}

namespace {

json encoder_json(const LearnedEncoder& e, const EncoderClass& cls) {
  if (e.is_constant()) return json{{"constant", e.constant}};
  return json{{"member", *e.member}, {"describe", cls.describe(*e.member)}, {"relabel", e.relabel}};
}

}  // namespace

json craft_output_json(const CraftOutput& out, const HypothesisFamily& family) {
  json j;
  j["params"] = params_json(out.params);
  json encoders = json::array();
  for (std::size_t h = 0; h < out.encoders.size(); ++h) encoders.push_back(encoder_json(out.encoders[h], *family.encoders[h]));
  j["encoders"] = encoders;
  json steps = json::array();
  for (const auto& s : out.steps) {
    json step;
    step["h"] = s.h;
    step["predictor"] = {{"enc_h", s.predictor.enc_h},
                         {"enc_next", s.predictor.enc_next},
                         {"rows", s.predictor.rows},
                         {"cols", s.predictor.cols},
                         {"table", s.predictor.table}};
    step["predictor_loss"] = s.predictor_loss;
    step["q_thresh"] = s.q_thresh;
    step["count_threshold"] = s.count_threshold;
    step["encoder_loss"] = s.encoder_loss;
    json scans = json::array();
    for (const auto& sc : s.scans) {
      json scan{{"state", sc.state}, {"histogram", sc.histogram}, {"skipped", sc.skipped}};
      json windows = json::array();
      for (const auto& w : sc.windows) {
        json attempts = json::array();
        for (const auto& a : w.attempts) {
          attempts.push_back({{"candidate", a.candidate}, {"classifier", a.classifier}, {"loss", a.loss}, {"merged", a.merged}});
        }
        windows.push_back({{"trigger", w.trigger},
                           {"lo", w.lo},
                           {"hi", w.hi},
                           {"size_a", w.size_a},
                           {"size_b", w.size_b},
                           {"state", w.state},
                           {"created", w.created},
                           {"merge_attempts", attempts}});
      }
      scan["windows"] = windows;
      scans.push_back(scan);
    }
    step["scans"] = scans;
    steps.push_back(step);
  }
  j["steps"] = steps;
  json sizes = json::array();
  for (const auto& states : out.assignment.steps) {
    json row = json::array();
    for (const auto& s : states) row.push_back({{"a", s.a.size()}, {"b", s.b.size()}});
    sizes.push_back(row);
  }
  j["state_sizes"] = sizes;
  j["warnings"] = out.warnings;
  return j;
}

std::vector<std::size_t> misassignment_profile(const CraftOutput& out, const TrajectoryDataset& a,
                                               const TrajectoryDataset& b) {
  if (!a.labeled() || !b.labeled()) throw DataError("misassignment profile needs labelled datasets");
  std::vector<std::size_t> profile;
  for (std::size_t h = 0; h < out.assignment.steps.size(); ++h) {
    std::vector<int> la;
    std::vector<int> lb;
    for (const auto& t : a.trajectories) la.push_back((*t.labels)[h]);
    for (const auto& t : b.trajectories) lb.push_back((*t.labels)[h]);
    profile.push_back(misassigned_count(out.assignment.steps[h], la, lb));
  }
  return profile;
}

AlgorithmResult run_toy_algorithm(const std::string& algorithm, const ToyData& data, const RunConfig& config,
                                  unsigned threads) {
  const ToyEnvSpec& spec = *data.env.params;
  const int H = spec.horizon;
  const ActionFreeData a(data.a);
  const ActionFreeData b(data.b);
  const auto phi = toy_encoder_class(spec);
  const auto g = toy_classifier_class(spec);
  AlgorithmResult r;
  r.algorithm = algorithm;

  if (algorithm == "craft") {
    const HypothesisFamily family = HypothesisFamily::repeated(H, phi, g);
    try {
      const CraftOutput out = craft_run(a, b, config.craft, family, threads);
      for (int h = 0; h < H; ++h) {
        r.per_h.push_back({population_accuracy_toy(out.encoders[static_cast<std::size_t>(h)], *phi, spec, h)});
      }
      r.warnings = out.warnings;
      r.details = craft_output_json(out, family);
      if (data.a.labeled() && data.b.labeled()) r.details["misassigned"] = misassignment_profile(out, data.a, data.b);
    } catch (const PreconditionError& e) {
      r.error = e.what();
      r.per_h.assign(static_cast<std::size_t>(H), {0.5});
      r.per_h[0] = {1.0};
    }
  } else if (algorithm == "draft") {
    const DraftOutput out = draft_run(a, b, *g);
    for (int h = 0; h < H; ++h) {
      r.per_h.push_back({population_accuracy_toy(out.encoders[static_cast<std::size_t>(h)], *g, spec, h)});
    }
    r.details = {{"loss", out.loss}, {"encoders", {encoder_json(out.encoders[0], *g), encoder_json(out.encoders[1], *g)}}};
  } else if (algorithm == "single-obs") {
    const std::vector<std::shared_ptr<const EncoderClass>> classes(static_cast<std::size_t>(H), phi);
    const SingleObsResult out = single_obs_baseline(a, b, classes, threads);
    json chosen = json::array();
    for (int h = 0; h < H; ++h) {
      const MiScore& s = out.best[static_cast<std::size_t>(h)];
      r.per_h.push_back({population_accuracy_toy(s.first, *phi, spec, h)});
      chosen.push_back({{"coordinate", s.first}, {"mi", s.mi}});
    }
    r.details = {{"chosen", chosen}};
  } else if (algorithm == "paired-obs") {
    const std::vector<std::shared_ptr<const EncoderClass>> classes(static_cast<std::size_t>(H), phi);
    const PairedObsResult out = paired_obs_baseline(a, b, classes, threads);
    r.per_h.assign(static_cast<std::size_t>(H), {});
    json chosen = json::array();
    for (int h = 0; h + 1 < H; ++h) {
      const MiScore& s = out.windows[static_cast<std::size_t>(h)];
      r.per_h[static_cast<std::size_t>(h)].push_back(population_accuracy_toy(s.first, *phi, spec, h));
      r.per_h[static_cast<std::size_t>(h + 1)].push_back(population_accuracy_toy(s.second, *phi, spec, h + 1));
      chosen.push_back({{"h", h}, {"first", s.first}, {"second", s.second}, {"mi", s.mi}});
    }
    r.details = {{"chosen", chosen}};
  } else {
    throw ConfigError("unknown algorithm '" + algorithm + "'");
  }
  r.average = average_accuracy(r.per_h, algorithm == "paired-obs");
  return r;
}

ComparisonTable reproduce_table1(const RunConfig& config, unsigned threads,
                                 const std::function<void(const std::string&)>& progress) {
  ComparisonTable table;
  table.config = config;
  table.low_confidence = config.seeds < 5;
  const auto& algos = table_algorithms();
  const std::size_t n_sizes = config.sizes.size();
  const auto seeds = static_cast<std::size_t>(config.seeds);

  // results[seed][size][algo]
  std::vector<std::vector<std::vector<AlgorithmResult>>> results(
      seeds, std::vector<std::vector<AlgorithmResult>>(n_sizes, std::vector<AlgorithmResult>(algos.size())));
  std::mutex progress_mutex;
  parallel_for(seeds, threads, [&](std::size_t k) {
    for (std::size_t si = 0; si < n_sizes; ++si) {
      const ToyData data = generate_toy_data(config, config.sizes[si], config.env_seed + k, config.data_seed + k, 1);
      for (std::size_t ai = 0; ai < algos.size(); ++ai) results[k][si][ai] = run_toy_algorithm(algos[ai], data, config, 1);
      if (progress) {
        std::ostringstream msg;
        msg << "seed " << k << " n=" << config.sizes[si] << ":";
        for (std::size_t ai = 0; ai < algos.size(); ++ai) {
          msg << " " << algos[ai] << "=" << std::fixed << std::setprecision(4) << results[k][si][ai].average;
        }
        const std::lock_guard lock(progress_mutex);
        progress(msg.str());
      }
    }
  });

  const std::string hash = config_hash(config);
  for (std::size_t ai = 0; ai < algos.size(); ++ai) {
    for (std::size_t si = 0; si < n_sizes; ++si) {
      TableCell cell;
      cell.algorithm = algos[ai];
      cell.n = config.sizes[si];
      for (std::size_t k = 0; k < seeds; ++k) {
        const AlgorithmResult& r = results[k][si][ai];
        cell.per_seed.push_back(r.average);
        if (!r.error.empty()) ++cell.failures;
      }
      double sum = 0.0;
      for (double v : cell.per_seed) sum += v;
      cell.mean = sum / static_cast<double>(seeds);
      if (seeds > 1) {
        double ss = 0.0;
        for (double v : cell.per_seed) ss += (v - cell.mean) * (v - cell.mean);
        cell.std_error = std::sqrt(ss / static_cast<double>(seeds - 1)) / std::sqrt(static_cast<double>(seeds));
      }
      table.cells.push_back(cell);
    }
  }
  for (std::size_t k = 0; k < seeds; ++k) {
    for (std::size_t si = 0; si < n_sizes; ++si) {
      for (std::size_t ai = 0; ai < algos.size(); ++ai) {
        const AlgorithmResult& r = results[k][si][ai];
        json row{{"algorithm", r.algorithm},
                 {"n", config.sizes[si]},
                 {"env_seed", config.env_seed + k},
                 {"data_seed", config.data_seed + k},
                 {"config_hash", hash},
                 {"params", params_json(preprocess(config.craft))},
                 {"average", r.average},
                 {"per_h", r.per_h},
                 {"warnings", r.warnings.size()}};
        if (!r.error.empty()) row["error"] = r.error;
        if (r.details.contains("misassigned")) row["misassigned"] = r.details["misassigned"];
        table.runs.push_back(row);
      }
    }
  }
  return table;
}

std::string table_csv(const ComparisonTable& table) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << "algorithm,n,seeds,mean_accuracy,std_error,failures\n";
  for (const auto& c : table.cells) {
    os << c.algorithm << "," << c.n << "," << c.per_seed.size() << "," << std::fixed << std::setprecision(6) << c.mean
       << "," << c.std_error << "," << c.failures << "\n";
  }
  return os.str();
}

json table_json(const ComparisonTable& table) {
  json cells = json::array();
  for (const auto& c : table.cells) {
    cells.push_back({{"algorithm", c.algorithm},
                     {"n", c.n},
                     {"mean", c.mean},
                     {"std_error", c.std_error},
                     {"failures", c.failures},
                     {"per_seed", c.per_seed}});
  }
  return json{{"config", config_json(table.config)},
              {"params", params_json(preprocess(table.config.craft))},
              {"low_confidence", table.low_confidence},
              {"cells", cells},
              {"runs", table.runs}};
}

}  // namespace craft
