#include "fiscrisk/survival.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numeric>
#include <set>

#include "fiscrisk/errors.hpp"

namespace fiscrisk {

TieMethod tie_method_from_string(const std::string& name) {
  if (name == "breslow") return TieMethod::breslow;
  if (name == "efron") return TieMethod::efron;
  if (name == "exact") return TieMethod::exact;
  fail(ErrorCategory::invalid, "unknown tie method '" + name +
                                   "' (expected breslow, efron, or exact)");
}

const char* to_string(TieMethod m) {
  switch (m) {
    case TieMethod::breslow: return "breslow";
    case TieMethod::efron: return "efron";
    case TieMethod::exact: return "exact";
  }
  return "?";
}

std::vector<std::string> ModelSpec::expanded_names() const {
  std::vector<std::string> names = predictors;
  for (const auto& [a, b] : interactions) names.push_back(a + ":" + b);
  std::set<std::string> seen;
  for (const auto& n : names)
    if (!seen.insert(n).second)
      fail(ErrorCategory::schema, "duplicate predictor '" + n + "' after expansion");
  return names;
}

std::size_t ModelSpec::size() const { return expanded_names().size(); }

namespace {

// Spells rearranged for risk-set walks: rows sorted by duration descending,
// so the risk set at any event duration is a prefix.
struct CoxData {
  Eigen::MatrixXd x;            // n x k, sorted order
  std::vector<int> duration;    // sorted descending
  std::vector<char> event;
  int n = 0;
  int k = 0;
  int n_events = 0;
};

CoxData prepare(const SpellSet& spells) {
  CoxData d;
  d.n = static_cast<int>(spells.spells.size());
  d.k = static_cast<int>(spells.predictor_names.size());
  if (d.n == 0) fail(ErrorCategory::data, "no spells to fit");

  std::vector<int> order(d.n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return spells.spells[a].duration() > spells.spells[b].duration();
  });

  d.x.resize(d.n, d.k);
  d.duration.resize(d.n);
  d.event.resize(d.n);
  for (int i = 0; i < d.n; ++i) {
    const Spell& s = spells.spells[order[i]];
    if (s.duration() < 1)
      fail(ErrorCategory::data, "spell for " + s.subject + " has duration < 1");
    if (s.covariates.size() != d.k)
      fail(ErrorCategory::data, "spell covariate length mismatch for " + s.subject);
    d.x.row(i) = s.covariates.transpose();
    d.duration[i] = s.duration();
    d.event[i] = s.event ? 1 : 0;
    if (s.event) ++d.n_events;
  }
  if (d.n_events == 0) fail(ErrorCategory::data, "spell set contains no events");
  return d;
}

// Elementary symmetric polynomials e_0..e_d of w[0..m): the exact discrete
// likelihood denominator and its derivatives all reduce to these.
void esp(const std::vector<double>& w, int d, std::vector<double>& e) {
  e.assign(d + 1, 0.0);
  e[0] = 1.0;
  int seen = 0;
  for (double wj : w) {
    ++seen;
    for (int q = std::min(d, seen); q >= 1; --q) e[q] += wj * e[q - 1];
  }
}

// e_q over the set minus one item, derived from the full array by deflation.
void esp_deflate(const std::vector<double>& e, double wj, int d,
                 std::vector<double>& out) {
  out.assign(d + 1, 0.0);
  out[0] = 1.0;
  for (int q = 1; q <= d; ++q) out[q] = e[q] - wj * out[q - 1];
}

// Accumulator interface shared by the three tie methods. All three walk the
// same duration-descending order and see the same prefix sums.
struct Accum {
  double loglik = 0.0;
  Eigen::VectorXd score;
  Eigen::MatrixXd info;
  bool want_derivatives = false;

  explicit Accum(int k, bool derivatives)
      : score(Eigen::VectorXd::Zero(k)),
        info(Eigen::MatrixXd::Zero(k, k)),
        want_derivatives(derivatives) {}
};

void add_breslow(Accum& acc, int d, double sum_eta_d,
                 const Eigen::VectorXd& s_d, double s0,
                 const Eigen::VectorXd& s1, const Eigen::MatrixXd& s2) {
  acc.loglik += sum_eta_d - d * std::log(s0);
  if (!acc.want_derivatives) return;
  Eigen::VectorXd mean = s1 / s0;
  acc.score += s_d - d * mean;
  acc.info += d * (s2 / s0 - mean * mean.transpose());
}

void add_efron(Accum& acc, int d, double sum_eta_d, const Eigen::VectorXd& s_d,
               double s0, const Eigen::VectorXd& s1, const Eigen::MatrixXd& s2,
               double s0d, const Eigen::VectorXd& s1d,
               const Eigen::MatrixXd& s2d) {
  acc.loglik += sum_eta_d;
  if (acc.want_derivatives) acc.score += s_d;
  for (int l = 0; l < d; ++l) {
    double f = static_cast<double>(l) / d;
    double den = s0 - f * s0d;
    acc.loglik -= std::log(den);
    if (!acc.want_derivatives) continue;
    Eigen::VectorXd v = (s1 - f * s1d) / den;
    acc.score -= v;
    acc.info += (s2 - f * s2d) / den - v * v.transpose();
  }
}

// Exact discrete contribution for one event duration: d tied events against
// a risk set whose centered weights are w[0..m), with covariate rows
// x.row(0..m) in the same order.
void add_exact(Accum& acc, const std::vector<double>& w, int d,
               const Eigen::MatrixXd& x, double sum_eta_d,
               const Eigen::VectorXd& s_d) {
  const int m = static_cast<int>(w.size());
  const int k = static_cast<int>(acc.score.size());

  std::vector<double> e;
  esp(w, d, e);
  double ed = e[d];

  // centering keeps ed in range; it cannot be zero with positive weights
  acc.loglik += sum_eta_d - std::log(ed);
  if (!acc.want_derivatives) return;

  // gradient: d/dbeta log e_d = sum_j e_{d-1}(R\j) w_j x_j / e_d
  Eigen::VectorXd g = Eigen::VectorXd::Zero(k);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(k, k);
  std::vector<double> ej, ejk;
  for (int j = 0; j < m; ++j) {
    esp_deflate(e, w[j], d, ej);
    Eigen::VectorXd xj = x.row(j).transpose();
    double aj = ej[d - 1] * w[j];
    g += aj * xj;
    h += aj * xj * xj.transpose();
    if (d >= 2) {
      // second derivative cross terms need e_{d-2} over R\{j,j2}
      for (int j2 = j + 1; j2 < m; ++j2) {
        esp_deflate(ej, w[j2], d - 1, ejk);
        double c = ejk[d - 2] * w[j] * w[j2];
        Eigen::VectorXd xj2 = x.row(j2).transpose();
        Eigen::MatrixXd cross = c * xj * xj2.transpose();
        h += cross + cross.transpose();
      }
    }
  }
  g /= ed;
  h /= ed;
  acc.score += s_d - g;
  acc.info += h - g * g.transpose();
}

Accum evaluate(const CoxData& d, const Eigen::VectorXd& beta, TieMethod ties,
               const FitConfig& cfg, bool derivatives) {
  if (beta.size() != d.k)
    fail(ErrorCategory::invalid, "beta length does not match predictor count");

  Eigen::VectorXd eta = d.x * beta;
  Eigen::VectorXd w = eta.array().exp();

  Accum acc(d.k, derivatives);
  double s0 = 0.0;
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(d.k);
  Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(d.k, d.k);

  int i = 0;
  while (i < d.n) {
    int t = d.duration[i];
    int group_end = i;
    // everyone tied at this duration joins the risk set before any event
    // at this duration is scored
    double s0d = 0.0, sum_eta_d = 0.0;
    Eigen::VectorXd s1d = Eigen::VectorXd::Zero(d.k);
    Eigen::MatrixXd s2d = Eigen::MatrixXd::Zero(d.k, d.k);
    std::vector<int> dead_rows;
    while (group_end < d.n && d.duration[group_end] == t) {
      int row = group_end;
      Eigen::VectorXd xr = d.x.row(row).transpose();
      s0 += w[row];
      s1 += w[row] * xr;
      if (derivatives) s2 += w[row] * xr * xr.transpose();
      if (d.event[row]) {
        dead_rows.push_back(row);
        sum_eta_d += eta[row];
        s0d += w[row];
        s1d += w[row] * xr;
        if (derivatives) s2d += w[row] * xr * xr.transpose();
      }
      ++group_end;
    }

    int nd = static_cast<int>(dead_rows.size());
    if (nd > 0) {
      Eigen::VectorXd s_d = Eigen::VectorXd::Zero(d.k);
      for (int row : dead_rows) s_d += d.x.row(row).transpose();

      switch (ties) {
        case TieMethod::breslow:
          add_breslow(acc, nd, sum_eta_d, s_d, s0, s1, s2);
          break;
        case TieMethod::efron:
          add_efron(acc, nd, sum_eta_d, s_d, s0, s1, s2, s0d, s1d, s2d);
          break;
        case TieMethod::exact: {
          if (nd > cfg.exact_tie_cap)
            fail(ErrorCategory::capacity,
                 "exact tie method: " + std::to_string(nd) +
                     " tied events at duration " + std::to_string(t) +
                     " exceeds the cap of " + std::to_string(cfg.exact_tie_cap) +
                     "; use the efron method instead");
          // risk set = prefix [0, group_end); center eta for stable weights
          double eta_max = eta.head(group_end).maxCoeff();
          std::vector<double> wr(group_end);
          for (int r = 0; r < group_end; ++r) wr[r] = std::exp(eta[r] - eta_max);
          double centered_sum_eta = sum_eta_d - nd * eta_max;
          add_exact(acc, wr, nd, d.x.topRows(group_end), centered_sum_eta, s_d);
          break;
        }
      }
    }
    i = group_end;
  }
  return acc;
}

// loglik-only evaluation for line search and probes: non-finite values mean
// the candidate overflowed and behave like -infinity
double eval_loglik(const CoxData& d, const Eigen::VectorXd& beta,
                   TieMethod ties, const FitConfig& cfg) {
  double ll = evaluate(d, beta, ties, cfg, false).loglik;
  return std::isfinite(ll) ? ll : -std::numeric_limits<double>::infinity();
}

}  // namespace

double partial_loglik(const SpellSet& spells, const Eigen::VectorXd& beta,
                      TieMethod ties, const FitConfig& cfg) {
  CoxData d = prepare(spells);
  double ll = evaluate(d, beta, ties, cfg, false).loglik;
  if (!std::isfinite(ll))
    fail(ErrorCategory::numeric, "partial log-likelihood is not finite");
  return ll;
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> score_and_information(
    const SpellSet& spells, const Eigen::VectorXd& beta, TieMethod ties,
    const FitConfig& cfg) {
  CoxData d = prepare(spells);
  Accum acc = evaluate(d, beta, ties, cfg, true);
  if (!std::isfinite(acc.loglik) || !acc.score.allFinite() ||
      !acc.info.allFinite())
    fail(ErrorCategory::numeric, "score/information is not finite");
  return {acc.score, acc.info};
}

double aic(int k, double loglik) {
  if (k < 0) fail(ErrorCategory::invalid, "k must be >= 0");
  return 2.0 * k - 2.0 * loglik;
}

double hazard_ratio(double beta_j) { return std::exp(beta_j); }

double normal_quantile(double p) {
  boost::math::normal_distribution<double> norm;
  return boost::math::quantile(norm, p);
}

double normal_cdf(double x) {
  boost::math::normal_distribution<double> norm;
  return boost::math::cdf(norm, x);
}

double wald_p_value(double beta_j, double se_j) {
  if (se_j <= 0.0) fail(ErrorCategory::invalid, "standard error must be > 0");
  double z = std::abs(beta_j / se_j);
  return 2.0 * normal_cdf(-z);
}

std::string significance_stars(double p) {
  if (p < 0.0 || p > 1.0)
    fail(ErrorCategory::invalid, "p-value must lie in [0, 1]");
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

CoxFit fit_cox(const SpellSet& spells, const ModelSpec& spec, TieMethod ties,
               const FitConfig& cfg) {
  std::vector<std::string> names = spec.expanded_names();
  if (names != spells.predictor_names)
    fail(ErrorCategory::schema,
         "spell set predictors do not match the model spec");
  CoxData d = prepare(spells);

  CoxFit fit;
  fit.spec = spec;
  fit.ties = ties;
  fit.n_spells = d.n;
  fit.n_events = d.n_events;

  const int k = d.k;
  if (k == 0) {
    fit.beta.resize(0);
    fit.se.resize(0);
    fit.cov.resize(0, 0);
    fit.loglik = evaluate(d, fit.beta, ties, cfg, false).loglik;
    fit.loglik_null = fit.loglik;
    fit.aic = aic(0, fit.loglik);
    fit.converged = true;
    return fit;
  }

  for (int j = 0; j < k; ++j) {
    double lo = d.x.col(j).minCoeff(), hi = d.x.col(j).maxCoeff();
    if (lo == hi)
      fail(ErrorCategory::model, "predictor '" + names[j] +
                                     "' is constant across all spells");
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
  double loglik = eval_loglik(d, beta, ties, cfg);
  if (!std::isfinite(loglik))
    fail(ErrorCategory::numeric, "partial log-likelihood is not finite at beta = 0");
  fit.loglik_null = loglik;

  bool converged = false;
  int iter = 0;
  for (; iter < cfg.max_iter && !converged; ++iter) {
    Accum acc = evaluate(d, beta, ties, cfg, true);
    if (!acc.score.allFinite() || !acc.info.allFinite())
      fail(ErrorCategory::numeric, "score/information overflowed during fitting");
    if (acc.score.lpNorm<Eigen::Infinity>() < cfg.grad_tol) {
      converged = true;
      break;
    }

    Eigen::LDLT<Eigen::MatrixXd> ldlt(acc.info);
    Eigen::VectorXd pivots = ldlt.vectorD();
    double pmax = pivots.cwiseAbs().maxCoeff();
    if (ldlt.info() != Eigen::Success || pivots.minCoeff() <= 1e-12 * pmax)
      fail(ErrorCategory::model, "information matrix is singular");
    Eigen::VectorXd delta = ldlt.solve(acc.score);

    // step-halving: shrink until the log-likelihood does not decrease
    double step = 1.0;
    Eigen::VectorXd candidate;
    double cand_loglik = -std::numeric_limits<double>::infinity();
    for (int h = 0; h <= cfg.max_halvings; ++h) {
      candidate = beta + step * delta;
      cand_loglik = eval_loglik(d, candidate, ties, cfg);
      if (cand_loglik >= loglik) break;
      step *= 0.5;
    }
    if (cand_loglik < loglik) {
      // no admissible step improves the objective; stationary only if the
      // remaining gap is within tolerance, otherwise report non-convergence
      converged = (loglik - cand_loglik) < cfg.loglik_tol;
      break;
    }

    double delta_loglik = cand_loglik - loglik;
    beta = candidate;
    loglik = cand_loglik;

    for (int j = 0; j < k; ++j)
      if (std::abs(beta[j]) > cfg.beta_cap)
        fail(ErrorCategory::model,
             "monotone likelihood: coefficient for '" + names[j] +
                 "' diverged beyond " + std::to_string(cfg.beta_cap));

    if (delta_loglik < cfg.loglik_tol) converged = true;
  }

  if (!converged) {
    int worst = 0;
    beta.cwiseAbs().maxCoeff(&worst);
    fail(ErrorCategory::model, "no convergence after " +
                                   std::to_string(cfg.max_iter) +
                                   " iterations (worst predictor '" +
                                   names[worst] + "')");
  }

  // A gradient this small can also mean the likelihood is still rising
  // toward a flat asymptote (monotone likelihood stalls the gradient long
  // before |beta| reaches the cap). Probe each axis: a genuine maximum
  // drops by ~probe^2 * I_jj / 2, a monotone direction stays level or rises.
  for (int j = 0; j < k; ++j) {
    for (double sign : {1.0, -1.0}) {
      Eigen::VectorXd probe = beta;
      probe[j] += sign * cfg.flat_probe_step;
      double ll = eval_loglik(d, probe, ties, cfg);
      if (ll >= loglik - cfg.flat_probe_tol)
        fail(ErrorCategory::model,
             "monotone likelihood: partial likelihood is flat or increasing "
             "in '" + names[j] + "'");
    }
  }

  Accum final_acc = evaluate(d, beta, ties, cfg, true);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(final_acc.info);
  Eigen::VectorXd pivots = ldlt.vectorD();
  if (ldlt.info() != Eigen::Success || pivots.minCoeff() <= 0.0)
    fail(ErrorCategory::model,
         "information matrix is not positive definite at the optimum");

  fit.beta = beta;
  fit.cov = ldlt.solve(Eigen::MatrixXd::Identity(k, k));
  fit.cov = 0.5 * (fit.cov + fit.cov.transpose().eval());  // enforce symmetry
  fit.se = fit.cov.diagonal().cwiseSqrt();
  fit.loglik = loglik;
  fit.aic = aic(k, loglik);
  fit.iterations = iter;
  fit.converged = true;
  return fit;
}

std::vector<std::pair<double, double>> wald_ci(const CoxFit& fit, double level) {
  if (!fit.converged)
    fail(ErrorCategory::model, "confidence intervals require a converged fit");
  if (level <= 0.0 || level >= 1.0)
    fail(ErrorCategory::invalid, "confidence level must lie in (0, 1)");
  double z = normal_quantile(0.5 * (1.0 + level));
  std::vector<std::pair<double, double>> out;
  out.reserve(fit.beta.size());
  for (Eigen::Index j = 0; j < fit.beta.size(); ++j)
    out.emplace_back(fit.beta[j] - z * fit.se[j], fit.beta[j] + z * fit.se[j]);
  return out;
}

BaselineHazard baseline_hazard(const CoxFit& fit, const SpellSet& spells) {
  if (!fit.converged)
    fail(ErrorCategory::model, "baseline hazard requires a converged fit");
  CoxData d = prepare(spells);
  if (fit.beta.size() != d.k)
    fail(ErrorCategory::invalid, "fit and spell set disagree on predictors");

  Eigen::VectorXd w = (d.x * fit.beta).array().exp();
  BaselineHazard bh;
  double s0 = 0.0;
  int i = 0;
  while (i < d.n) {
    int t = d.duration[i];
    int nd = 0;
    while (i < d.n && d.duration[i] == t) {
      s0 += w[i];
      nd += d.event[i] ? 1 : 0;
      ++i;
    }
    if (nd > 0) {
      bh.times.push_back(t);
      bh.increments.push_back(nd / s0);
    }
  }
  // walk was duration-descending; report ascending
  std::reverse(bh.times.begin(), bh.times.end());
  std::reverse(bh.increments.begin(), bh.increments.end());
  return bh;
}

}  // namespace fiscrisk
