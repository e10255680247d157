#include "fiscrisk/simgen.hpp"

#include <cmath>
#include <cstdio>

#include "fiscrisk/errors.hpp"

namespace fiscrisk {

CovariateLaw covariate_law_from_string(const std::string& name) {
  if (name == "uniform01") return CovariateLaw::uniform01;
  if (name == "standard_normal") return CovariateLaw::standard_normal;
  if (name == "product_pair") return CovariateLaw::product_pair;
  fail(ErrorCategory::invalid, "unknown covariate law '" + name + "'");
}

const char* to_string(CovariateLaw law) {
  switch (law) {
    case CovariateLaw::uniform01: return "uniform01";
    case CovariateLaw::standard_normal: return "standard_normal";
    case CovariateLaw::product_pair: return "product_pair";
  }
  return "?";
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  // splitmix64 finalizer on (master, stream); order-independent by design
  std::uint64_t z = master + (stream + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double Rng::uniform01() {
  // 53 random bits into (0, 1); the +0.5 offset keeps 0 out of range
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::standard_normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u = uniform01();
  double v = uniform01();
  double r = std::sqrt(-2.0 * std::log(u));
  double theta = 2.0 * M_PI * v;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

SpellSet simulate_from_design(const Eigen::MatrixXd& design,
                              const std::vector<std::string>& names,
                              const Eigen::VectorXd& true_beta, double rate,
                              double horizon, Rng& rng) {
  const Eigen::Index n = design.rows();
  if (n < 2) fail(ErrorCategory::invalid, "need at least 2 subjects");
  if (design.cols() != true_beta.size() ||
      static_cast<Eigen::Index>(names.size()) != design.cols())
    fail(ErrorCategory::invalid, "design, names and beta sizes disagree");
  if (!(rate > 0.0) || !std::isfinite(rate))
    fail(ErrorCategory::invalid, "baseline rate must be positive and finite");
  if (!(horizon >= 1.0) || !std::isfinite(horizon))
    fail(ErrorCategory::invalid, "censoring horizon must be >= 1 year");

  Eigen::VectorXd eta = design * true_beta;

  SpellSet out;
  out.predictor_names = names;
  out.spells.reserve(n);
  std::size_t events = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double u = rng.uniform01();
    double t = -std::log(u) / (rate * std::exp(eta[i]));
    bool event = t <= horizon;
    double observed = event ? t : horizon;
    int duration = static_cast<int>(std::ceil(observed));
    duration = std::max(duration, 1);

    char label[16];
    std::snprintf(label, sizeof(label), "S%04d", static_cast<int>(i));
    Spell s;
    s.subject = label;
    s.entry = 0;
    s.exit = duration;
    s.event = event;
    s.covariates = design.row(i).transpose();
    out.spells.push_back(std::move(s));
    if (event) ++events;
  }
  if (events == 0)
    fail(ErrorCategory::data,
         "simulation produced zero events; increase the horizon or the rate");
  return out;
}

SpellSet simulate_spells(const SimParams& p) {
  if (p.n_subjects < 2) fail(ErrorCategory::invalid, "n_subjects must be >= 2");
  if (!p.true_beta.allFinite())
    fail(ErrorCategory::invalid, "true_beta must be finite");
  const Eigen::Index k = p.true_beta.size();
  if (p.covariate_law == CovariateLaw::product_pair && k != 3)
    fail(ErrorCategory::invalid,
         "product_pair law requires exactly 3 coefficients (x1, x2, x1*x2)");
  if (k < 1) fail(ErrorCategory::invalid, "true_beta must have >= 1 entry");

  Rng rng(p.seed);
  Eigen::MatrixXd design(p.n_subjects, k);
  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < k; ++j) names.push_back("x" + std::to_string(j + 1));

  for (Eigen::Index i = 0; i < p.n_subjects; ++i) {
    switch (p.covariate_law) {
      case CovariateLaw::uniform01:
        for (Eigen::Index j = 0; j < k; ++j) design(i, j) = rng.uniform01();
        break;
      case CovariateLaw::standard_normal:
        for (Eigen::Index j = 0; j < k; ++j) design(i, j) = rng.standard_normal();
        break;
      case CovariateLaw::product_pair: {
        double x1 = rng.uniform01();
        double x2 = rng.uniform01();
        design(i, 0) = x1;
        design(i, 1) = x2;
        design(i, 2) = x1 * x2;
        break;
      }
    }
  }
  return simulate_from_design(design, names, p.true_beta, p.baseline_rate,
                              p.censor_horizon, rng);
}

SimReport coverage_experiment(const SimParams& p, int replicates,
                              TieMethod ties) {
  if (replicates < 1) fail(ErrorCategory::invalid, "replicates must be >= 1");
  const Eigen::Index k = p.true_beta.size();

  ModelSpec spec;
  for (Eigen::Index j = 0; j < k; ++j)
    spec.predictors.push_back("x" + std::to_string(j + 1));

  SimReport report;
  Eigen::VectorXd sum_beta = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd covered = Eigen::VectorXd::Zero(k);

  for (int r = 0; r < replicates; ++r) {
    SimParams rep = p;
    rep.seed = derive_seed(p.seed, static_cast<std::uint64_t>(r));
    try {
      SpellSet spells = simulate_spells(rep);
      CoxFit fit = fit_cox(spells, spec, ties);
      auto cis = wald_ci(fit, 0.95);
      sum_beta += fit.beta;
      for (Eigen::Index j = 0; j < k; ++j)
        if (cis[j].first <= p.true_beta[j] && p.true_beta[j] <= cis[j].second)
          covered[j] += 1.0;
      ++report.replicates;
    } catch (const Error&) {
      ++report.failed;
    }
  }

  if (report.replicates == 0)
    fail(ErrorCategory::model, "every replicate failed to fit");
  report.mean_beta_hat = sum_beta / report.replicates;
  report.bias = report.mean_beta_hat - p.true_beta;
  report.empirical_coverage = covered / report.replicates;
  return report;
}

}  // namespace fiscrisk
