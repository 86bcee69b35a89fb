#include "dpps/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

namespace dpps {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_words(std::string_view s) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) words.push_back(s.substr(start, i - start));
  }
  return words;
}

double to_real(std::string_view word, std::string_view what) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), x);
  if (ec != std::errc() || ptr != word.data() + word.size() || !std::isfinite(x))
    throw ConfigError(std::string(what) + ": expected a real number, got '" + std::string(word) + "'");
  return x;
}

std::uint64_t to_unsigned(std::string_view word, std::string_view what) {
  std::uint64_t x = 0;
  const auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), x);
  if (ec != std::errc() || ptr != word.data() + word.size())
    throw ConfigError(std::string(what) + ": expected a nonnegative integer, got '" + std::string(word) + "'");
  return x;
}

std::vector<double> to_reals(std::string_view value, std::string_view what) {
  std::vector<double> out;
  for (auto w : split_words(value)) out.push_back(to_real(w, what));
  return out;
}

void expect_arity(const std::vector<std::string_view>& words, std::size_t n, std::string_view usage) {
  if (words.size() != n) throw ConfigError("expected '" + std::string(usage) + "'");
}

MixtureComponent parse_component(std::string_view text) {
  const auto w = split_words(text);
  if (w.size() >= 2 && w[1] == "point") {
    expect_arity(w, 3, "WEIGHT point X");
    return {to_real(w[0], "mixture weight"), PointMass{to_real(w[2], "point location")}};
  }
  if (w.size() >= 2 && w[1] == "beta") {
    expect_arity(w, 4, "WEIGHT beta A B");
    return {to_real(w[0], "mixture weight"), BetaComponent{to_real(w[2], "beta a"), to_real(w[3], "beta b")}};
  }
  throw ConfigError("mixture component must be 'WEIGHT point X' or 'WEIGHT beta A B', got '" +
                    std::string(trim(text)) + "'");
}

// Wraps library validation errors so callers see one exception type.
template <class F>
auto validated(F&& make) {
  try {
    return make();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

struct AgentSection {
  std::string name;
  std::size_t line = 0;
  std::map<std::string, std::pair<std::string, std::size_t>> keys;  // key -> (value, line)
};

const std::set<std::string, std::less<>> kTopLevelKeys = {
    "env", "env_seed", "arm", "horizon", "replications", "seed",
    "threads", "thinning", "quantiles", "trace", "summary",
};

bool agent_key_allowed(std::string_view type, std::string_view key) {
  if (key == "type") return true;
  if (type == "dpps")
    return key == "alpha" || key == "truncation" || key == "base" || key.starts_with("base.");
  if (type == "npts") return key == "pseudo_rewards";
  if (type == "ucb") return key == "c";
  return false;
}

AgentSpec build_agent(const AgentSection& section, std::string_view origin) {
  auto where = [&](std::size_t line) { return std::string(origin) + ":" + std::to_string(line) + ": "; };
  const auto type_it = section.keys.find("type");
  if (type_it == section.keys.end())
    throw ConfigError(where(section.line) + "agent '" + section.name + "' needs a 'type' key");
  const std::string& type = type_it->second.first;
  if (type != "dpps" && type != "npts" && type != "beta_ts" && type != "generalized_ts" && type != "ucb")
    throw ConfigError(where(type_it->second.second) + "unknown agent type '" + type +
                      "' (expected dpps, npts, beta_ts, generalized_ts or ucb)");
  for (const auto& [key, entry] : section.keys)
    if (!agent_key_allowed(type, key))
      throw ConfigError(where(entry.second) + "unknown key '" + key + "' for agent type " + type);

  AgentSpec spec;
  spec.name = section.name;
  // Re-tags value errors with the line they came from.
  auto value_of = [&](const std::string& key, auto&& convert) {
    const auto& [value, line] = section.keys.at(key);
    try {
      return convert(value);
    } catch (const ConfigError& e) {
      throw ConfigError(where(line) + e.what());
    }
  };

  if (type == "dpps") {
    DppsSpec d;
    if (section.keys.contains("alpha"))
      d.alpha = value_of("alpha", [](const std::string& v) {
        const double a = to_real(trim(v), "alpha");
        if (!(a > 0.0)) throw ConfigError("alpha must be positive");
        return a;
      });
    if (section.keys.contains("truncation"))
      d.truncation = value_of("truncation", [](const std::string& v) {
        const auto n = to_unsigned(trim(v), "truncation");
        if (n < 1) throw ConfigError("truncation must be at least 1");
        return static_cast<std::size_t>(n);
      });
    if (section.keys.contains("base"))
      d.base = value_of("base", [](const std::string& v) { return parse_base_measure(v); });
    for (const auto& [key, entry] : section.keys) {
      if (!key.starts_with("base.")) continue;
      const auto arm = value_of(key, [&](const std::string&) {
        return static_cast<std::size_t>(to_unsigned(std::string_view(key).substr(5), "arm index in '" + key + "'"));
      });
      d.arm_bases.insert_or_assign(arm, value_of(key, [](const std::string& v) { return parse_base_measure(v); }));
    }
    spec.kind = std::move(d);
  } else if (type == "npts") {
    NptsSpec n;
    if (section.keys.contains("pseudo_rewards"))
      n.pseudo_rewards = value_of("pseudo_rewards", [](const std::string& v) {
        auto r = to_reals(v, "pseudo_rewards");
        if (r.empty()) throw ConfigError("pseudo_rewards needs at least one value");
        return r;
      });
    spec.kind = std::move(n);
  } else if (type == "beta_ts") {
    spec.kind = BetaTsSpec{};
  } else if (type == "generalized_ts") {
    spec.kind = GeneralizedTsSpec{};
  } else {
    UcbSpec u;
    if (section.keys.contains("c"))
      u.exploration = value_of("c", [](const std::string& v) {
        const double c = to_real(trim(v), "c");
        if (!(c >= 0.0)) throw ConfigError("c must be nonnegative");
        return c;
      });
    spec.kind = u;
  }
  return spec;
}

}  // namespace

BaseMeasure parse_base_measure(std::string_view text) {
  const auto w = split_words(text);
  if (w.empty()) throw ConfigError("empty base measure");
  return validated([&]() -> BaseMeasure {
    if (w[0] == "beta") {
      expect_arity(w, 3, "beta A B");
      return BaseMeasure(BetaDist{to_real(w[1], "beta a"), to_real(w[2], "beta b")});
    }
    if (w[0] == "gaussian") {
      expect_arity(w, 3, "gaussian MU SIGMA");
      return BaseMeasure(GaussianDist{to_real(w[1], "gaussian mu"), to_real(w[2], "gaussian sigma")});
    }
    if (w[0] == "uniform") {
      expect_arity(w, 3, "uniform LO HI");
      return BaseMeasure(UniformDist{to_real(w[1], "uniform lo"), to_real(w[2], "uniform hi")});
    }
    if (w[0] == "atoms") {
      if (w.size() < 2) throw ConfigError("expected 'atoms X1 X2 ...'");
      std::vector<double> pts;
      for (std::size_t i = 1; i < w.size(); ++i) pts.push_back(to_real(w[i], "atom"));
      return BaseMeasure(EmpiricalAtoms{std::move(pts)});
    }
    throw ConfigError("unknown base measure '" + std::string(w[0]) + "' (expected beta, gaussian, uniform or atoms)");
  });
}

ArmDistribution parse_arm(std::string_view text, const std::filesystem::path& base_dir) {
  const auto w = split_words(text);
  if (w.empty()) throw ConfigError("empty arm description");
  ArmDistribution arm = validated([&]() -> ArmDistribution {
    if (w[0] == "bernoulli") {
      expect_arity(w, 2, "bernoulli P");
      return BernoulliArm{to_real(w[1], "bernoulli p")};
    }
    if (w[0] == "scaled_beta") {
      expect_arity(w, 3, "scaled_beta MEAN CONCENTRATION");
      return ScaledBetaArm{to_real(w[1], "scaled_beta mean"), to_real(w[2], "scaled_beta concentration")};
    }
    if (w[0] == "gaussian") {
      expect_arity(w, 3, "gaussian MU SIGMA");
      return GaussianArm{to_real(w[1], "gaussian mu"), to_real(w[2], "gaussian sigma")};
    }
    if (w[0] == "empirical") {
      expect_arity(w, 2, "empirical FILE");
      std::filesystem::path file(w[1]);
      if (file.is_relative() && !base_dir.empty()) file = base_dir / file;
      try {
        auto pool = read_real_column(file);
        if (pool.empty()) throw ConfigError("empirical arm file '" + file.string() + "' holds no values");
        return EmpiricalArm{std::move(pool)};
      } catch (const DataFileError& e) {
        throw ConfigError(e.what());
      }
    }
    if (w[0] == "mixture") {
      const auto rest = trim(text.substr(text.find("mixture") + 7));
      MixtureArm m;
      std::size_t start = 0;
      while (start <= rest.size()) {
        const auto bar = rest.find('|', start);
        const auto piece = rest.substr(start, bar == std::string_view::npos ? std::string_view::npos : bar - start);
        m.components.push_back(parse_component(piece));
        if (bar == std::string_view::npos) break;
        start = bar + 1;
      }
      return m;
    }
    throw ConfigError("unknown arm type '" + std::string(w[0]) +
                      "' (expected bernoulli, scaled_beta, gaussian, empirical or mixture)");
  });
  validated([&] { return arm_mean(arm); });
  return arm;
}

ExperimentConfig parse_run_config(std::string_view text, std::string_view origin,
                                  const std::filesystem::path& base_dir) {
  auto where = [&](std::size_t line) { return std::string(origin) + ":" + std::to_string(line) + ": "; };

  ExperimentConfig config;
  config.trace_path = "trace.csv";
  config.summary_path = "summary.json";
  std::vector<AgentSection> sections;
  std::set<std::string, std::less<>> seen_top;
  std::optional<std::size_t> env_line;
  std::optional<std::size_t> arm_line;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const auto line = trim(raw);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where(line_no) + "unterminated section header");
      const auto words = split_words(line.substr(1, line.size() - 2));
      if (words.size() != 2 || words[0] != "agent")
        throw ConfigError(where(line_no) + "section header must be '[agent NAME]'");
      for (const auto& s : sections)
        if (s.name == words[1]) throw ConfigError(where(line_no) + "duplicate agent name '" + std::string(words[1]) + "'");
      sections.push_back({std::string(words[1]), line_no, {}});
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where(line_no) + "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError(where(line_no) + "missing key before '='");
    if (value.empty()) throw ConfigError(where(line_no) + "missing value for key '" + key + "'");

    if (!sections.empty()) {
      auto& keys = sections.back().keys;
      if (keys.contains(key)) throw ConfigError(where(line_no) + "duplicate key '" + key + "'");
      keys.emplace(key, std::pair{value, line_no});
      continue;
    }

    if (!kTopLevelKeys.contains(key)) throw ConfigError(where(line_no) + "unknown key '" + key + "'");
    if (key != "arm" && !seen_top.insert(key).second)
      throw ConfigError(where(line_no) + "duplicate key '" + key + "'");
    try {
      if (key == "env") {
        config.env.standard = validated([&] { return parse_standard_env(value); });
        env_line = line_no;
      } else if (key == "env_seed") {
        config.env.instance_seed = to_unsigned(value, "env_seed");
      } else if (key == "arm") {
        config.env.arms.push_back(parse_arm(value, base_dir));
        if (!arm_line) arm_line = line_no;
      } else if (key == "horizon") {
        config.horizon = to_unsigned(value, "horizon");
      } else if (key == "replications") {
        config.replications = to_unsigned(value, "replications");
      } else if (key == "seed") {
        config.master_seed = to_unsigned(value, "seed");
      } else if (key == "threads") {
        config.threads = to_unsigned(value, "threads");
      } else if (key == "thinning") {
        config.thinning = to_unsigned(value, "thinning");
      } else if (key == "quantiles") {
        const auto q = to_reals(value, "quantiles");
        if (q.size() != 2) throw ConfigError("quantiles needs two values");
        config.quantiles = {q[0], q[1]};
      } else if (key == "trace") {
        config.trace_path = value;
      } else if (key == "summary") {
        config.summary_path = value;
      }
    } catch (const ConfigError& e) {
      throw ConfigError(where(line_no) + e.what());
    }
  }

  if (env_line && arm_line)
    throw ConfigError(where(*arm_line) + "'arm' lines cannot be combined with 'env' (line " +
                      std::to_string(*env_line) + ")");
  if (!env_line && !arm_line) throw ConfigError(std::string(origin) + ": missing 'env' or 'arm' lines");
  if (sections.empty()) throw ConfigError(std::string(origin) + ": no [agent NAME] sections");
  for (const auto& s : sections) config.agents.push_back(build_agent(s, origin));

  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string(origin) + ": " + e.what());
  }
  // Catch per-arm mistakes such as base.9 on a 6-arm problem before running.
  const std::size_t arms = make_env(config.env).num_arms();
  for (const auto& spec : config.agents) {
    try {
      make_agent(spec, arms);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string(origin) + ": " + e.what());
    }
  }
  return config;
}

ExperimentConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.string(), path.parent_path());
}

}  // namespace dpps
