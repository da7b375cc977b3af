#include "craft/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <set>
#include <sstream>

#include "craft/errors.hpp"

namespace craft {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

class LineParser {
 public:
  LineParser(std::string source, int line) : source_(std::move(source)), line_(line) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(source_ + ":" + std::to_string(line_) + ": " + msg);
  }

  template <class T>
  T integer(const std::string& key, const std::string& v) const {
    T out{};
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end) fail("key '" + key + "' expects an integer, got '" + v + "'");
    return out;
  }

  double real(const std::string& key, const std::string& v) const {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end || !std::isfinite(out)) {
      fail("key '" + key + "' expects a real number, got '" + v + "'");
    }
    return out;
  }

  std::vector<std::size_t> size_list(const std::string& key, const std::string& v) const {
    std::vector<std::size_t> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const std::string t = trim(item);
      if (t.empty()) fail("key '" + key + "' has an empty list entry");
      out.push_back(integer<std::size_t>(key, t));
    }
    if (out.empty()) fail("key '" + key + "' needs at least one value");
    return out;
  }

 private:
  std::string source_;
  int line_;
};

void apply_policy_key(PolicyConfig& p, const std::string& field, const std::string& key, const std::string& v,
                      const LineParser& lp) {
  if (field == "policy") {
    if (v != "uniform" && v != "sticky" && v != "constant") {
      lp.fail("key '" + key + "' must be uniform, sticky or constant");
    }
    p.kind = v;
  } else if (field == "stay") {
    p.stay = lp.real(key, v);
    if (p.stay < 0.0 || p.stay > 1.0) lp.fail("key '" + key + "' must lie in [0, 1]");
  } else {
    p.action = lp.integer<int>(key, v);
    if (p.action < 0) lp.fail("key '" + key + "' must be non-negative");
  }
}

}  // namespace

RunConfig parse_config(std::istream& in, const std::string& source) {
  RunConfig c;
  std::string section;
  std::set<std::string> seen;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    LineParser lp(source, line_no);
    std::string line = raw;
    if (const auto hash = line.find_first_of("#;"); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') lp.fail("unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section != "env" && section != "agents" && section != "algo" && section != "run") {
        lp.fail("unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) lp.fail("expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (section.empty()) lp.fail("key '" + key + "' appears before any section");
    if (key.empty()) lp.fail("empty key");
    if (value.empty()) lp.fail("key '" + key + "' has no value");
    if (!seen.insert(section + "." + key).second) lp.fail("duplicate key '" + key + "' in [" + section + "]");

    if (section == "env") {
      if (key == "kind") {
        if (value != "toy") lp.fail("only kind = toy is supported");
        c.env_kind = value;
      } else if (key == "H") {
        c.horizon = lp.integer<int>(key, value);
        if (c.horizon < 2) lp.fail("H must be at least 2");
      } else if (key == "M") {
        c.width = lp.integer<std::size_t>(key, value);
        if (c.width < 2) lp.fail("M must be at least 2");
      } else if (key == "seed") {
        c.env_seed = lp.integer<std::uint64_t>(key, value);
      } else {
        lp.fail("unknown key '" + key + "' in [env]");
      }
    } else if (section == "agents") {
      if (key == "n") {
        c.n = lp.integer<std::size_t>(key, value);
        if (c.n == 0) lp.fail("n must be positive");
      } else if (key == "policy_a" || key == "stay_a" || key == "action_a") {
        apply_policy_key(c.policy_a, key.substr(0, key.size() - 2), key, value, lp);
      } else if (key == "policy_b" || key == "stay_b" || key == "action_b") {
        apply_policy_key(c.policy_b, key.substr(0, key.size() - 2), key, value, lp);
      } else {
        lp.fail("unknown key '" + key + "' in [agents]");
      }
    } else if (section == "algo") {
      if (key == "name") {
        if (value != "craft" && value != "draft" && value != "single-obs" && value != "paired-obs") {
          lp.fail("algorithm must be craft, draft, single-obs or paired-obs");
        }
        c.algorithm = value;
      } else if (key == "alpha") {
        c.craft.alpha = lp.real(key, value);
        if (c.craft.alpha <= 0.0) lp.fail("alpha must be positive");
      } else if (key == "eta") {
        c.craft.eta = lp.real(key, value);
        if (c.craft.eta <= 0.0 || c.craft.eta > 0.5) lp.fail("eta must lie in (0, 0.5]");
      } else if (key == "nu") {
        c.craft.nu = lp.real(key, value);
        if (c.craft.nu <= 0.0 || c.craft.nu > 1.0) lp.fail("nu must lie in (0, 1]");
      } else if (key == "max_states") {
        c.craft.max_states = lp.integer<int>(key, value);
        if (c.craft.max_states < 1) lp.fail("max_states must be positive");
      } else {
        lp.fail("unknown key '" + key + "' in [algo]");
      }
    } else {
      if (key == "seed") {
        c.data_seed = lp.integer<std::uint64_t>(key, value);
      } else if (key == "seeds") {
        c.seeds = lp.integer<int>(key, value);
        if (c.seeds < 1) lp.fail("seeds must be positive");
      } else if (key == "sizes") {
        c.sizes = lp.size_list(key, value);
        for (std::size_t s : c.sizes) {
          if (s == 0) lp.fail("sizes must be positive");
        }
      } else if (key == "threads") {
        c.threads = lp.integer<unsigned>(key, value);
      } else {
        lp.fail("unknown key '" + key + "' in [run]");
      }
    }
  }
  if (in.bad()) throw ConfigError(source + ": read error");
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  return parse_config(in, path.string());
}

std::string to_ini(const RunConfig& c) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17);
  auto policy = [&](const PolicyConfig& p, char tag) {
    os << "policy_" << tag << " = " << p.kind << "\n";
    os << "stay_" << tag << " = " << p.stay << "\n";
    os << "action_" << tag << " = " << p.action << "\n";
  };
  os << "[env]\nkind = " << c.env_kind << "\nH = " << c.horizon << "\nM = " << c.width << "\nseed = " << c.env_seed
     << "\n\n[agents]\nn = " << c.n << "\n";
  policy(c.policy_a, 'a');
  policy(c.policy_b, 'b');
  os << "\n[algo]\nname = " << c.algorithm << "\nalpha = " << c.craft.alpha << "\neta = " << c.craft.eta
     << "\nnu = " << c.craft.nu << "\nmax_states = " << c.craft.max_states << "\n\n[run]\nseed = " << c.data_seed
     << "\nseeds = " << c.seeds << "\nsizes = ";
  for (std::size_t i = 0; i < c.sizes.size(); ++i) os << (i ? "," : "") << c.sizes[i];
  os << "\nthreads = " << c.threads << "\n";
  return os.str();
}

std::string config_hash(const RunConfig& config) {
  // threads never changes results, so it is left out of the hash
  RunConfig canonical = config;
  canonical.threads = 1;
  const std::string text = to_ini(canonical);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::shared_ptr<const Policy> make_policy(const PolicyConfig& p, int num_actions) {
  if (p.kind == "uniform") return std::make_shared<UniformPolicy>(num_actions);
  if (p.kind == "sticky") return std::make_shared<StickyPolicy>(num_actions, p.stay);
  if (p.kind == "constant") {
    if (p.action >= num_actions) throw ConfigError("constant policy action out of range");
    return std::make_shared<ConstantPolicy>(p.action);
  }
  throw ConfigError("unknown policy kind '" + p.kind + "'");
}

}  // namespace craft
