#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fiscrisk/panel.hpp"
#include "fiscrisk/survival.hpp"

namespace fiscrisk {

enum class CovariateLaw { uniform01, standard_normal, product_pair };

CovariateLaw covariate_law_from_string(const std::string& name);
const char* to_string(CovariateLaw law);

struct SimParams {
  int n_subjects = 200;
  Eigen::VectorXd true_beta;
  double baseline_rate = 0.1;    // events per year, constant baseline hazard
  double censor_horizon = 25.0;  // years
  CovariateLaw covariate_law = CovariateLaw::uniform01;
  std::uint64_t seed = 0;
};

struct SimReport {
  int replicates = 0;        // replicates that produced a fit
  int failed = 0;            // replicates whose fit errored, excluded above
  Eigen::VectorXd mean_beta_hat;
  Eigen::VectorXd bias;
  Eigen::VectorXd empirical_coverage;  // 95% Wald CI coverage per coefficient
  std::string rng = "mt19937_64 seeded via splitmix64(master, replicate)";
};

// Deterministic per-replicate seed derivation; safe to evaluate in any order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

// Deterministic RNG: uniforms come straight from mt19937_64 bits and normals
// from Box-Muller, so streams reproduce across platforms and standard
// library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform01();  // in (0, 1)
  double standard_normal();

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Inverts the constant-baseline hazard: T = -log(U) / (rate * exp(beta'x)),
// censors at the horizon, and discretizes to whole years by ceiling, which
// deliberately produces tied durations. Column j of `design` is predictor
// names[j].
SpellSet simulate_from_design(const Eigen::MatrixXd& design,
                              const std::vector<std::string>& names,
                              const Eigen::VectorXd& true_beta, double rate,
                              double horizon, Rng& rng);

SpellSet simulate_spells(const SimParams& p);

SimReport coverage_experiment(const SimParams& p, int replicates,
                              TieMethod ties);

}  // namespace fiscrisk
