#include "craft/dataset_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "craft/errors.hpp"

namespace craft {

namespace {

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& msg) {
  throw DataError(source + ":" + std::to_string(line) + ": " + msg);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_int(std::string_view text, long long& value) {
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  return ec == std::errc{} && ptr == end;
}

long long header_field(const std::string& source, std::string_view token, std::string_view key) {
  if (token.substr(0, key.size() + 1) != std::string(key) + "=") {
    fail(source, 1, "expected header field '" + std::string(key) + "=', found '" + std::string(token) + "'");
  }
  long long v = 0;
  if (!parse_int(token.substr(key.size() + 1), v) || v < 0) {
    fail(source, 1, "header field '" + std::string(key) + "' is not a non-negative integer");
  }
  return v;
}

}  // namespace

void write_dataset(std::ostream& out, const TrajectoryDataset& dataset) {
  const bool labeled = dataset.labeled();
  out << "EXBMDP v1 agent=" << agent_tag(dataset.agent) << " H=" << dataset.horizon << " obslen=" << dataset.obs_length
      << " n=" << dataset.size() << " labeled=" << (labeled ? 1 : 0) << '\n';
  for (const auto& t : dataset.trajectories) {
    for (std::size_t h = 0; h < t.observations.size(); ++h) {
      if (h) out << ' ';
      out << t.observations[h].to_string();
    }
    if (labeled) {
      out << " |";
      for (int s : *t.labels) out << ' ' << s;
    }
    out << '\n';
  }
}

TrajectoryDataset read_dataset(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) fail(source, 1, "missing header");
  const auto head = split_ws(line);
  if (head.size() != 7 || head[0] != "EXBMDP" || head[1] != "v1") {
    fail(source, 1, "header must read 'EXBMDP v1 agent=<A|B> H=<int> obslen=<int> n=<int> labeled=<0|1>'");
  }
  TrajectoryDataset ds;
  if (head[2] != "agent=A" && head[2] != "agent=B") fail(source, 1, "agent must be A or B");
  ds.agent = head[2].back() == 'A' ? Agent::A : Agent::B;
  ds.horizon = static_cast<int>(header_field(source, head[3], "H"));
  ds.obs_length = static_cast<std::size_t>(header_field(source, head[4], "obslen"));
  const auto n = static_cast<std::size_t>(header_field(source, head[5], "n"));
  const long long labeled = header_field(source, head[6], "labeled");
  if (labeled > 1) fail(source, 1, "labeled must be 0 or 1");
  if (ds.horizon < 1) fail(source, 1, "H must be positive");

  ds.trajectories.reserve(n);
  std::size_t lineno = 1;
  while (ds.trajectories.size() < n) {
    if (!std::getline(in, line)) fail(source, lineno + 1, "expected " + std::to_string(n) + " trajectory lines, found " + std::to_string(ds.trajectories.size()));
    ++lineno;
    const auto tokens = split_ws(line);
    const auto bar = std::find(tokens.begin(), tokens.end(), std::string_view("|"));
    const bool has_bar = bar != tokens.end();
    if (has_bar != (labeled == 1)) {
      fail(source, lineno, labeled ? "missing '|' label separator" : "unexpected '|' in unlabeled dataset");
    }
    const auto n_obs = static_cast<std::size_t>(bar - tokens.begin());
    if (n_obs != static_cast<std::size_t>(ds.horizon)) {
      fail(source, lineno, "expected " + std::to_string(ds.horizon) + " observation tokens, found " + std::to_string(n_obs));
    }
    Trajectory t;
    t.observations.reserve(n_obs);
    for (std::size_t k = 0; k < n_obs; ++k) {
      if (tokens[k].size() != ds.obs_length) {
        fail(source, lineno, "observation " + std::to_string(k) + " has length " + std::to_string(tokens[k].size()) +
                                 ", expected " + std::to_string(ds.obs_length));
      }
      try {
        t.observations.push_back(BitVector::from_string(tokens[k]));
      } catch (const std::invalid_argument& e) {
        fail(source, lineno, "observation " + std::to_string(k) + ": " + e.what());
      }
    }
    if (has_bar) {
      const auto n_labels = static_cast<std::size_t>(tokens.end() - bar - 1);
      if (n_labels != static_cast<std::size_t>(ds.horizon)) {
        fail(source, lineno, "expected " + std::to_string(ds.horizon) + " latent labels, found " + std::to_string(n_labels));
      }
      std::vector<int> labels;
      labels.reserve(n_labels);
      for (auto it = bar + 1; it != tokens.end(); ++it) {
        long long v = 0;
        if (!parse_int(*it, v) || v < 0) fail(source, lineno, "latent label '" + std::string(*it) + "' is not a non-negative integer");
        labels.push_back(static_cast<int>(v));
      }
      if (labels.front() != 0) fail(source, lineno, "first latent label must be 0");
      t.labels = std::move(labels);
    }
    ds.trajectories.push_back(std::move(t));
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (!split_ws(line).empty()) fail(source, lineno, "trailing content after " + std::to_string(n) + " trajectories");
  }
  return ds;
}

void save_dataset(const std::filesystem::path& path, const TrajectoryDataset& dataset) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  write_dataset(out, dataset);
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

TrajectoryDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return read_dataset(in, path.string());
}

}  // namespace craft
