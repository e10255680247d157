#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

#include "fiscrisk/panel.hpp"

namespace fiscrisk {

enum class TieMethod { breslow, efron, exact };

TieMethod tie_method_from_string(const std::string& name);
const char* to_string(TieMethod m);

// Predictor list plus interaction pairs. An interaction (a, b) expands to a
// product column named "a:b" appended after the plain predictors.
struct ModelSpec {
  std::vector<std::string> predictors;
  std::vector<std::pair<std::string, std::string>> interactions;

  // Expanded, ordered column names; throws on duplicates.
  std::vector<std::string> expanded_names() const;
  std::size_t size() const;
};

struct FitConfig {
  int max_iter = 50;
  double grad_tol = 1e-8;        // converged when max |U| below this
  double loglik_tol = 1e-10;     // ... or |delta loglik| below this
  int max_halvings = 10;
  double beta_cap = 50.0;        // |beta| beyond this is monotone likelihood
  int exact_tie_cap = 30;        // largest tie multiplicity the exact method accepts
  double flat_probe_step = 5.0;  // see fit_cox: post-convergence flatness probe
  double flat_probe_tol = 1e-6;
};

struct CoxFit {
  ModelSpec spec;
  Eigen::VectorXd beta;
  Eigen::VectorXd se;
  Eigen::MatrixXd cov;      // inverse observed information
  double loglik = 0.0;      // maximized partial log-likelihood
  double loglik_null = 0.0; // at beta = 0
  double aic = 0.0;
  TieMethod ties = TieMethod::efron;
  int n_spells = 0;
  int n_events = 0;
  int iterations = 0;
  bool converged = false;
};

struct BaselineHazard {
  std::vector<int> times;          // event durations, ascending
  std::vector<double> increments;  // Breslow steps at each event duration
};

double partial_loglik(const SpellSet& spells, const Eigen::VectorXd& beta,
                      TieMethod ties, const FitConfig& cfg = {});

// Gradient U(beta) and observed information I(beta) = -Hessian of the
// selected partial log-likelihood.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> score_and_information(
    const SpellSet& spells, const Eigen::VectorXd& beta, TieMethod ties,
    const FitConfig& cfg = {});

// Newton-Raphson from beta = 0 with step-halving. Throws Error(model) on
// constant predictors, monotone likelihood, or a singular information matrix.
CoxFit fit_cox(const SpellSet& spells, const ModelSpec& spec, TieMethod ties,
               const FitConfig& cfg = {});

std::vector<std::pair<double, double>> wald_ci(const CoxFit& fit, double level);

double aic(int k, double loglik);
double hazard_ratio(double beta_j);

// Two-sided Wald z-test p-value.
double wald_p_value(double beta_j, double se_j);

// "***", "**", "*", or "" for p < 0.001 / 0.01 / 0.05 (strict).
std::string significance_stars(double p);

BaselineHazard baseline_hazard(const CoxFit& fit, const SpellSet& spells);

// Standard normal helpers (quantile/cdf), shared by wald_ci and the report
// renderers.
double normal_quantile(double p);
double normal_cdf(double x);

}  // namespace fiscrisk
