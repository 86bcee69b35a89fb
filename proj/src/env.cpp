#include "dpps/env.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace dpps {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double component_mean(const MixtureComponent& c) {
  return std::visit(Overloaded{
                        [](const BetaComponent& b) { return b.a / (b.a + b.b); },
                        [](const PointMass& p) { return p.at; },
                    },
                    c.dist);
}

void validate_arm(const ArmDistribution& arm) {
  std::visit(
      Overloaded{
          [](const BernoulliArm& a) {
            if (!(a.p >= 0.0 && a.p <= 1.0)) throw std::invalid_argument("bernoulli arm needs p in [0, 1]");
          },
          [](const ScaledBetaArm& a) {
            if (!(a.mean > 0.0 && a.mean < 1.0))
              throw std::invalid_argument("scaled beta arm needs mean in (0, 1)");
            if (!(a.concentration > 0.0))
              throw std::invalid_argument("scaled beta arm needs concentration > 0");
          },
          [](const GaussianArm& a) {
            if (!std::isfinite(a.mu) || !(a.sigma >= 0.0))
              throw std::invalid_argument("gaussian arm needs finite mu and sigma >= 0");
          },
          [](const MixtureArm& a) {
            if (a.components.empty()) throw std::invalid_argument("mixture arm needs components");
            double total = 0.0;
            for (const auto& c : a.components) {
              if (!(c.weight >= 0.0)) throw std::invalid_argument("mixture weights must be nonnegative");
              if (const auto* b = std::get_if<BetaComponent>(&c.dist); b && !(b->a > 0.0 && b->b > 0.0))
                throw std::invalid_argument("mixture beta component needs a, b > 0");
              total += c.weight;
            }
            if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("mixture weights must sum to 1");
          },
          [](const EmpiricalArm& a) {
            if (a.pool.empty()) throw std::invalid_argument("empirical arm needs a nonempty pool");
          },
      },
      arm);
}

// Fixed surrogate table for the crop-yield environment: each arm is a spike
// at zero (failed harvest), a main Beta bump at low-to-mid yield and one or
// two smaller high-yield bumps, giving right-skewed multimodal rewards on the
// normalized yield scale. Arm index 2 is optimal.
struct CropArmRow {
  double zero_weight;
  std::vector<std::array<double, 3>> bumps;  // weight, a, b
};

const std::vector<CropArmRow>& crop_yield_table() {
  static const std::vector<CropArmRow> table = {
      {0.10, {{0.68, 5, 14}, {0.22, 14, 7}}},
      {0.12, {{0.63, 6, 13}, {0.25, 15, 6}}},
      {0.07, {{0.63, 8, 14}, {0.22, 16, 6}, {0.08, 30, 4}}},
      {0.20, {{0.60, 6, 12}, {0.20, 16, 6}}},
      {0.05, {{0.75, 6, 15}, {0.20, 12, 7}}},
      {0.28, {{0.50, 7, 12}, {0.16, 15, 6}, {0.06, 28, 4}}},
      {0.15, {{0.70, 4, 12}, {0.15, 12, 6}}},
  };
  return table;
}

}  // namespace

double arm_mean(const ArmDistribution& arm) {
  validate_arm(arm);
  return std::visit(Overloaded{
                        [](const BernoulliArm& a) { return a.p; },
                        [](const ScaledBetaArm& a) { return a.mean; },
                        [](const GaussianArm& a) { return a.mu; },
                        [](const MixtureArm& a) {
                          double m = 0.0;
                          for (const auto& c : a.components) m += c.weight * component_mean(c);
                          return m;
                        },
                        [](const EmpiricalArm& a) {
                          double s = 0.0;
                          for (double x : a.pool) s += x;
                          return s / static_cast<double>(a.pool.size());
                        },
                    },
                    arm);
}

double sample_arm(const ArmDistribution& arm, Rng& rng) {
  return std::visit(
      Overloaded{
          [&](const BernoulliArm& a) { return bernoulli(a.p, rng) ? 1.0 : 0.0; },
          [&](const ScaledBetaArm& a) {
            return beta(a.mean * a.concentration, (1.0 - a.mean) * a.concentration, rng);
          },
          [&](const GaussianArm& a) { return a.sigma > 0.0 ? normal(a.mu, a.sigma, rng) : a.mu; },
          [&](const MixtureArm& a) {
            const double u = uniform_open(rng);
            double cum = 0.0;
            const MixtureComponent* chosen = &a.components.back();
            for (const auto& c : a.components) {
              cum += c.weight;
              if (u < cum) {
                chosen = &c;
                break;
              }
            }
            return std::visit(Overloaded{
                                  [&](const BetaComponent& b) { return beta(b.a, b.b, rng); },
                                  [](const PointMass& p) { return p.at; },
                              },
                              chosen->dist);
          },
          [&](const EmpiricalArm& a) {
            std::uniform_int_distribution<std::size_t> pick(0, a.pool.size() - 1);
            return a.pool[pick(rng)];
          },
      },
      arm);
}

std::string describe_arm(const ArmDistribution& arm) {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&](const BernoulliArm& a) { os << "bernoulli(" << a.p << ")"; },
                 [&](const ScaledBetaArm& a) { os << "scaled_beta(" << a.mean << ", " << a.concentration << ")"; },
                 [&](const GaussianArm& a) { os << "gaussian(" << a.mu << ", " << a.sigma << ")"; },
                 [&](const MixtureArm& a) { os << "mixture(" << a.components.size() << " components)"; },
                 [&](const EmpiricalArm& a) { os << "empirical(" << a.pool.size() << " samples)"; },
             },
             arm);
  return os.str();
}

BanditEnv::BanditEnv(std::vector<ArmDistribution> arms) : arms_(std::move(arms)) {
  if (arms_.empty()) throw std::invalid_argument("bandit environment needs at least one arm");
  true_means_.reserve(arms_.size());
  for (const auto& arm : arms_) true_means_.push_back(arm_mean(arm));
  const auto best = std::max_element(true_means_.begin(), true_means_.end());
  optimal_arm_ = static_cast<std::size_t>(best - true_means_.begin());
  optimal_mean_ = *best;
}

double BanditEnv::sample_reward(std::size_t arm, Rng& rng) const {
  if (arm >= arms_.size())
    throw std::out_of_range("arm index " + std::to_string(arm) + " out of range for " +
                            std::to_string(arms_.size()) + "-arm environment");
  return sample_arm(arms_[arm], rng);
}

double BanditEnv::instant_regret(std::size_t arm) const {
  if (arm >= arms_.size()) throw std::out_of_range("arm index out of range");
  return optimal_mean_ - true_means_[arm];
}

bool BanditEnv::bounded_unit_interval() const {
  return std::all_of(arms_.begin(), arms_.end(), [](const ArmDistribution& arm) {
    return std::visit(Overloaded{
                          [](const BernoulliArm&) { return true; },
                          [](const ScaledBetaArm&) { return true; },
                          [](const GaussianArm& a) { return a.sigma == 0.0 && a.mu >= 0.0 && a.mu <= 1.0; },
                          [](const MixtureArm& a) {
                            return std::all_of(a.components.begin(), a.components.end(), [](const auto& c) {
                              const auto* p = std::get_if<PointMass>(&c.dist);
                              return !p || (p->at >= 0.0 && p->at <= 1.0);
                            });
                          },
                          [](const EmpiricalArm& a) {
                            return std::all_of(a.pool.begin(), a.pool.end(),
                                               [](double x) { return x >= 0.0 && x <= 1.0; });
                          },
                      },
                      arm);
  });
}

StandardEnv parse_standard_env(std::string_view name) {
  if (name == "bernoulli6") return StandardEnv::kBernoulli6;
  if (name == "beta6") return StandardEnv::kBeta6;
  if (name == "gauss7") return StandardEnv::kGauss7;
  if (name == "cropyield7") return StandardEnv::kCropYield7;
  throw std::invalid_argument("unknown environment '" + std::string(name) +
                              "' (expected bernoulli6, beta6, gauss7 or cropyield7)");
}

std::string_view standard_env_name(StandardEnv env) {
  switch (env) {
    case StandardEnv::kBernoulli6: return "bernoulli6";
    case StandardEnv::kBeta6: return "beta6";
    case StandardEnv::kGauss7: return "gauss7";
    case StandardEnv::kCropYield7: return "cropyield7";
  }
  return "?";
}

BanditEnv make_standard_env(StandardEnv which, Rng& rng) {
  std::vector<ArmDistribution> arms;
  switch (which) {
    case StandardEnv::kBernoulli6:
      for (double m : kSixArmMeans) arms.emplace_back(BernoulliArm{m});
      break;
    case StandardEnv::kBeta6:
      for (double m : kSixArmMeans) arms.emplace_back(ScaledBetaArm{m, kScaledBetaConcentration});
      break;
    case StandardEnv::kGauss7:
      // mu_k ~ N(0, 0.5), sigma_k = |psi_k| with psi_k ~ N(0, 0.5); 0.5 is the
      // standard deviation.
      for (int k = 0; k < 7; ++k) {
        const double mu = normal(0.0, 0.5, rng);
        const double sigma = std::abs(normal(0.0, 0.5, rng));
        arms.emplace_back(GaussianArm{mu, sigma});
      }
      break;
    case StandardEnv::kCropYield7:
      for (const auto& row : crop_yield_table()) {
        MixtureArm arm;
        arm.components.push_back({row.zero_weight, PointMass{0.0}});
        for (const auto& [w, a, b] : row.bumps) arm.components.push_back({w, BetaComponent{a, b}});
        arms.emplace_back(std::move(arm));
      }
      break;
  }
  return BanditEnv(std::move(arms));
}

BanditEnv make_standard_env(std::string_view name, Rng& rng) {
  return make_standard_env(parse_standard_env(name), rng);
}

std::vector<double> read_real_column(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataFileError("cannot open data file '" + path.string() + "'");
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string_view token(line.data() + first, last - first + 1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(value))
      throw DataFileError(path.string() + ":" + std::to_string(line_no) + ": not a real number: '" +
                          std::string(token) + "'");
    values.push_back(value);
  }
  return values;
}

}  // namespace dpps
