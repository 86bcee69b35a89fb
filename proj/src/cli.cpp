#include "dpps/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "dpps/config.hpp"
#include "dpps/plot.hpp"

namespace dpps {

namespace {

namespace fs = std::filesystem;

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::string out_dir;
};

// Relative output paths land in --out-dir when it is given.
fs::path output_path(const GlobalOptions& g, const fs::path& p) {
  if (g.out_dir.empty() || p.is_absolute()) return p;
  return fs::path(g.out_dir) / p;
}

void ensure_parent(const fs::path& p) {
  const fs::path parent = p.parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) throw IoError("cannot create output directory '" + parent.string() + "': " + ec.message());
}

std::string sci(double x, int digits = 3) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(digits) << x;
  return os.str();
}

int cmd_run(const GlobalOptions& g, const std::string& config_path, std::ostream& out) {
  ExperimentConfig config = load_run_config(config_path);
  if (g.seed) config.master_seed = *g.seed;
  if (g.threads) config.threads = *g.threads;
  config.trace_path = output_path(g, config.trace_path);
  config.summary_path = output_path(g, config.summary_path);
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  const ExperimentResult result = run_experiment(config);
  ensure_parent(config.trace_path);
  ensure_parent(config.summary_path);
  write_trace_csv(config.trace_path, result, config.horizon, config.thinning);
  write_summary_json(config.summary_path, result.summaries);

  out << "horizon " << config.horizon << ", " << config.replications << " replications, seed "
      << config.master_seed << "\n";
  out << std::left << std::setw(18) << "agent" << std::right << std::setw(14) << "final mean" << std::setw(14)
      << "q_lo" << std::setw(14) << "q_hi" << std::setw(12) << "seconds" << "\n";
  for (const auto& s : result.summaries) {
    out << std::left << std::setw(18) << s.name << std::right << std::fixed << std::setprecision(3)
        << std::setw(14) << s.mean.back() << std::setw(14) << s.q_lo.back() << std::setw(14) << s.q_hi.back()
        << std::setw(12) << s.runtime_seconds << "\n";
  }
  out.unsetf(std::ios::floatfield);
  out << "trace:   " << config.trace_path.string() << "\n";
  out << "summary: " << config.summary_path.string() << "\n";
  return kExitOk;
}

int cmd_plot(const GlobalOptions& g, const std::string& summary_path, const std::string& svg_path,
             const std::string& title, std::ostream& out) {
  const auto summaries = read_summary_json(summary_path);
  if (summaries.empty()) throw IoError("summary file '" + summary_path + "' holds no agents");
  PlotStyle style;
  style.title = title;
  const fs::path target = output_path(g, svg_path);
  ensure_parent(target);
  write_file_atomically(target, render_regret_svg(summaries, style));
  out << "plot: " << target.string() << "\n";
  return kExitOk;
}

int cmd_diagnose(const GlobalOptions& g, double alpha, std::size_t truncation, double r, std::ostream& out) {
  const TruncationReport rep = diagnose_truncation(alpha, truncation, r, g.seed.value_or(1));
  out << "stick-breaking weights of one DP(alpha = " << alpha << ") prior draw, N = " << truncation << "\n";
  out << std::setw(6) << "i" << std::setw(14) << "weight" << "\n";
  for (std::size_t i = 0; i < rep.weights.size(); ++i)
    out << std::setw(6) << i + 1 << std::setw(14) << sci(rep.weights[i]) << (rep.weights[i] < kWeightThreshold ? "  *" : "")
        << "\n";
  out << "weights below " << sci(kWeightThreshold, 0) << " (*): " << rep.below_threshold << " of " << truncation << "\n";
  out << "E[T_N] (r = " << r << "): " << sci(rep.expected_tail) << "\n";
  out << "E[U_N] (r = " << r << "): " << sci(rep.expected_tail_u) << "\n";
  if (truncation == 1)
    out << "warning: N = 1 keeps a single atom; the neglected tail mass is 1 and every draw is a point mass\n";
  if (rep.recommended_truncation > 0)
    out << "recommendation: E[T_N] exceeds " << sci(kWeightThreshold, 0) << "; use N >= " << rep.recommended_truncation
        << "\n";
  else
    out << "truncation is adequate: E[T_N] <= " << sci(kWeightThreshold, 0) << "\n";
  return kExitOk;
}

struct DensityOptions {
  std::string data;
  double alpha = 2.0;
  std::string base = "gaussian 10 1";
  std::size_t truncation = kDefaultTruncation;
  std::size_t draws = 200;
  std::vector<double> quantiles{0.05, 0.95};
  std::size_t grid_points = 201;
  std::optional<double> grid_min;
  std::optional<double> grid_max;
  std::string csv = "density.csv";
  std::string svg = "density.svg";
};

int cmd_density(const GlobalOptions& g, const DensityOptions& o, std::ostream& out) {
  if (o.quantiles.size() != 2 || !(o.quantiles[0] > 0.0 && o.quantiles[0] < o.quantiles[1] && o.quantiles[1] < 1.0))
    throw ConfigError("--quantiles needs two values with 0 < lower < upper < 1");
  if (o.grid_points < 2) throw ConfigError("--grid-points must be at least 2");
  if (o.draws < 1) throw ConfigError("--draws must be at least 1");
  const BaseMeasure base = parse_base_measure(o.base);
  DPParams params = [&] {
    try {
      return DPParams(o.alpha, base, o.truncation);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }();

  std::vector<double> data;
  try {
    data = read_real_column(o.data);
  } catch (const DataFileError& e) {
    throw ConfigError(e.what());
  }

  auto [lo, hi] = base.range();
  for (double x : data) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  const double pad = 0.05 * (hi - lo > 0.0 ? hi - lo : 1.0);
  lo = o.grid_min.value_or(lo - pad);
  hi = o.grid_max.value_or(hi + pad);
  if (!(hi > lo)) throw ConfigError("--grid-max must exceed --grid-min");

  std::vector<double> grid(o.grid_points);
  for (std::size_t i = 0; i < grid.size(); ++i)
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid.size() - 1);

  Rng rng = make_stream(g.seed.value_or(1), StreamDomain::kGeneric, 0, 0);
  const double probs[] = {o.quantiles[0], 0.5, o.quantiles[1]};
  const auto q = posterior_cdf_quantiles(data, params, o.draws, grid, probs, rng);

  CdfEnvelopeSeries series;
  series.grid = grid;
  series.observations = data;
  std::string csv = "x,lower,median,upper\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    series.lower.push_back(q[i][0]);
    series.median.push_back(q[i][1]);
    series.upper.push_back(q[i][2]);
    csv += format_double(grid[i]) + ',' + format_double(q[i][0]) + ',' + format_double(q[i][1]) + ',' +
           format_double(q[i][2]) + '\n';
  }
  PlotStyle style;
  style.title = data.empty() ? "DP prior CDF envelope" : "DP posterior CDF envelope (n = " + std::to_string(data.size()) + ")";

  const fs::path csv_path = output_path(g, o.csv);
  const fs::path svg_path = output_path(g, o.svg);
  ensure_parent(csv_path);
  ensure_parent(svg_path);
  write_file_atomically(csv_path, csv);
  write_file_atomically(svg_path, render_cdf_svg(series, style));
  out << (data.empty() ? "no observations: prior-only envelope\n" : "observations: " + std::to_string(data.size()) + "\n");
  out << "csv: " << csv_path.string() << "\n";
  out << "svg: " << svg_path.string() << "\n";
  return kExitOk;
}

}  // namespace

TruncationReport diagnose_truncation(double alpha, std::size_t truncation, double r, std::uint64_t seed) {
  if (!(r > 0.0)) throw std::invalid_argument("r must be positive");
  const DPParams params(alpha, BaseMeasure::uniform01(), truncation);
  Rng rng = make_stream(seed, StreamDomain::kGeneric, 0, 0);
  TruncationReport rep;
  const RandomMeasure draw = stick_breaking_prior(params, rng);
  for (const Atom& a : draw.atoms()) {
    rep.weights.push_back(a.weight);
    rep.below_threshold += a.weight < kWeightThreshold;
  }
  const TruncationTail tail = expected_truncation_tail(alpha, r, truncation);
  rep.expected_tail = tail.expected_tail_power;
  rep.expected_tail_u = tail.expected_power_sum;
  if (rep.expected_tail > kWeightThreshold) {
    // (alpha / (alpha + r))^(N - 1) <= threshold, then nudge for rounding.
    const double ratio = std::log(alpha / (alpha + r));
    auto n = static_cast<std::size_t>(std::ceil(std::log(kWeightThreshold) / ratio)) + 1;
    while (n > 1 && expected_truncation_tail(alpha, r, n - 1).expected_tail_power <= kWeightThreshold) --n;
    while (expected_truncation_tail(alpha, r, n).expected_tail_power > kWeightThreshold) ++n;
    rep.recommended_truncation = n;
  }
  return rep;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dirichlet process posterior sampling bandit toolkit", "dpps"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Master seed (overrides the config file)");
  auto* threads_opt =
      app.add_option("--threads", threads, "Worker threads (overrides the config file)")->check(CLI::PositiveNumber);
  app.add_option("--out-dir", g.out_dir, "Directory for relative output paths");

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config_path, "Config file")->required();

  std::string summary_path;
  std::string svg_path = "regret.svg";
  std::string title;
  auto* plot = app.add_subcommand("plot", "Render a summary JSON file as an SVG regret plot");
  plot->add_option("summary", summary_path, "Summary JSON written by `run`")->required();
  plot->add_option("svg", svg_path, "Output SVG")->capture_default_str();
  plot->add_option("--title", title, "Plot title");

  double alpha = kDefaultAlpha;
  std::size_t truncation = kDefaultTruncation;
  double r = 1.0;
  auto* diagnose = app.add_subcommand("diagnose", "Stick-breaking weight table and truncation tail");
  diagnose->add_option("--alpha", alpha, "Concentration")->capture_default_str();
  diagnose->add_option("--truncation,-N", truncation, "Number of atoms N")->capture_default_str();
  diagnose->add_option("--r", r, "Tail moment order")->capture_default_str();

  DensityOptions d;
  auto* density = app.add_subcommand("density", "Posterior CDF envelope of a data file");
  density->add_option("data", d.data, "One real per line; may be empty")->required();
  density->add_option("--alpha", d.alpha, "Concentration")->capture_default_str();
  density->add_option("--base", d.base, "Base measure, e.g. 'gaussian 10 1' or 'beta 1 1'")->capture_default_str();
  density->add_option("--truncation,-N", d.truncation, "Prior atoms")->capture_default_str();
  density->add_option("--draws", d.draws, "Posterior draws")->capture_default_str();
  density->add_option("--quantiles", d.quantiles, "Lower and upper band quantiles")->expected(2)->capture_default_str();
  density->add_option("--grid-points", d.grid_points, "Grid size")->capture_default_str();
  density->add_option("--grid-min", d.grid_min, "Grid start");
  density->add_option("--grid-max", d.grid_max, "Grid end");
  density->add_option("--csv", d.csv, "Output CSV (x,lower,median,upper)")->capture_default_str();
  density->add_option("--svg", d.svg, "Output SVG")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "dpps: " << e.what() << "\n";
    if (app.get_subcommands().empty()) err << "run 'dpps --help' for usage\n";
    return kExitUsage;
  }
  if (*seed_opt) g.seed = seed;
  if (*threads_opt) g.threads = threads;

  try {
    if (*run) return cmd_run(g, config_path, out);
    if (*plot) return cmd_plot(g, summary_path, svg_path, title, out);
    if (*diagnose) {
      try {
        return cmd_diagnose(g, alpha, truncation, r, out);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    }
    if (*density) return cmd_density(g, d, out);
  } catch (const ConfigError& e) {
    err << "dpps: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    err << "dpps: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "dpps: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace dpps
