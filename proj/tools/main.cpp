#include <CLI11.hpp>
#include <Eigen/Core>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "fiscrisk/complexity.hpp"
#include "fiscrisk/csv.hpp"
#include "fiscrisk/errors.hpp"
#include "fiscrisk/ladder.hpp"
#include "fiscrisk/panel.hpp"
#include "fiscrisk/report.hpp"
#include "fiscrisk/simgen.hpp"
#include "fiscrisk/survival.hpp"

using nlohmann::json;
using namespace fiscrisk;

namespace {

struct CommonOpts {
  std::string panel_path;
  std::string eci_path;           // merged country,eci_trade,eci_research
  std::string eci_trade_path;     // complexity-module output
  std::string eci_research_path;
  std::string window = "1998:2021";
  int reentry_gap = 1;
  int covariate_lag = 0;
  std::string ties = "efron";
  double alpha = 0.05;
  std::string format = "markdown";
  std::string out;
  std::uint64_t seed = 42;
};

SpellConfig parse_window(const CommonOpts& o) {
  SpellConfig cfg;
  auto sep = o.window.find(':');
  if (sep == std::string::npos)
    fail(ErrorCategory::invalid, "--window expects START:END, got '" + o.window + "'");
  try {
    cfg.window_start = std::stoi(o.window.substr(0, sep));
    cfg.window_end = std::stoi(o.window.substr(sep + 1));
  } catch (...) {
    fail(ErrorCategory::invalid, "--window expects START:END, got '" + o.window + "'");
  }
  cfg.reentry_gap = o.reentry_gap;
  cfg.covariate_lag = o.covariate_lag;
  return cfg;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCategory::io, "cannot open '" + path + "' for writing");
  out << text;
  if (!out) fail(ErrorCategory::io, "failed writing '" + path + "'");
}

EciMap load_eci(const CommonOpts& o) {
  EciMap eci;
  if (!o.eci_path.empty()) {
    csv::Table t = csv::read_file(o.eci_path);
    int c = t.require_column("country");
    int trade = t.require_column("eci_trade");
    int research = t.require_column("eci_research");
    for (std::size_t i = 0; i < t.rows.size(); ++i)
      eci[t.rows[i][c]] = {
          csv::parse_double(t.rows[i][trade], o.eci_path, t.line_numbers[i]),
          csv::parse_double(t.rows[i][research], o.eci_path, t.line_numbers[i])};
    return eci;
  }
  if (o.eci_trade_path.empty() || o.eci_research_path.empty())
    fail(ErrorCategory::invalid,
         "provide either --eci or both --eci-trade and --eci-research");
  auto load_one = [](const std::string& path) {
    std::map<std::string, double> scores;
    csv::Table t = csv::read_file(path);
    int c = t.require_column("country");
    int v = t.require_column("eci");
    for (std::size_t i = 0; i < t.rows.size(); ++i)
      scores[t.rows[i][c]] =
          csv::parse_double(t.rows[i][v], path, t.line_numbers[i]);
    return scores;
  };
  auto trade = load_one(o.eci_trade_path);
  auto research = load_one(o.eci_research_path);
  for (const auto& [country, value] : trade) {
    auto it = research.find(country);
    if (it != research.end()) eci[country] = {value, it->second};
  }
  return eci;
}

// spec argument: named ladder spec, a JSON file, or inline "a+b+a:b"
ModelSpec parse_spec(const std::string& arg) {
  if (arg == "baseline" || arg == "final" || arg.rfind("model", 0) == 0)
    return named_spec(arg);
  std::ifstream in(arg);
  if (in) {
    json j = json::parse(in, nullptr, true, true);
    ModelSpec spec;
    spec.predictors = j.at("predictors").get<std::vector<std::string>>();
    if (j.contains("interactions"))
      for (const auto& pair : j.at("interactions"))
        spec.interactions.emplace_back(pair.at(0).get<std::string>(),
                                       pair.at(1).get<std::string>());
    return spec;
  }
  ModelSpec spec;
  std::stringstream ss(arg);
  std::string term;
  while (std::getline(ss, term, '+')) {
    if (term.empty()) continue;
    auto sep = term.find(':');
    if (sep == std::string::npos)
      spec.predictors.push_back(term);
    else
      spec.interactions.emplace_back(term.substr(0, sep), term.substr(sep + 1));
  }
  if (spec.predictors.empty() && spec.interactions.empty())
    fail(ErrorCategory::invalid, "empty model spec '" + arg + "'");
  return spec;
}

SpellSet build_attached(const CommonOpts& o, const ModelSpec& spec,
                        AttachReport* attach_report = nullptr) {
  if (o.panel_path.empty()) fail(ErrorCategory::invalid, "--panel is required");
  Panel panel = load_panel_file(o.panel_path);
  SpellConfig cfg = parse_window(o);
  SpellSet spells = build_spells(panel, cfg);
  EciMap eci = load_eci(o);
  return attach_covariates(spells, panel, eci, spec, cfg, attach_report);
}

std::vector<double> parse_beta(const std::string& arg) {
  std::vector<double> beta;
  std::stringstream ss(arg);
  std::string term;
  while (std::getline(ss, term, ','))
    beta.push_back(csv::parse_double(term, "--beta", 0));
  if (beta.empty()) fail(ErrorCategory::invalid, "--beta must list coefficients");
  return beta;
}

int run(int argc, char** argv) {
  CLI::App app{"Fiscal-crisis survival toolkit: economic complexity scores, "
               "crisis spells, Cox proportional-hazards fits, the ten-model "
               "AIC ladder, and simulation experiments"};
  app.require_subcommand(1);
  app.footer("Environment overrides use the FISCRISK_ prefix, e.g. FISCRISK_SEED.");

  CommonOpts o;

  auto add_common = [&](CLI::App* cmd, bool with_panel) {
    if (with_panel) {
      cmd->add_option("--panel", o.panel_path, "panel CSV (country,year,crisis,growth,interest,rqe,rle)");
      cmd->add_option("--eci", o.eci_path, "merged ECI CSV (country,eci_trade,eci_research)");
      cmd->add_option("--eci-trade", o.eci_trade_path, "trade ECI CSV from the eci subcommand");
      cmd->add_option("--eci-research", o.eci_research_path, "research ECI CSV from the eci subcommand");
      cmd->add_option("--window", o.window, "sample window, START:END")->capture_default_str();
      cmd->add_option("--reentry-gap", o.reentry_gap, "years before re-entry after an episode")->capture_default_str();
      cmd->add_option("--covariate-lag", o.covariate_lag, "covariates taken at entry + lag")->capture_default_str();
    }
    cmd->add_option("--format", o.format, "csv, markdown, or json")
        ->envname("FISCRISK_FORMAT")->capture_default_str();
    cmd->add_option("--out", o.out, "output path (default stdout)")->envname("FISCRISK_OUT");
    cmd->add_option("--seed", o.seed, "random seed")->envname("FISCRISK_SEED")->capture_default_str();
  };

  // --- eci ---
  std::string eci_input, eci_output;
  double threshold = 1.0;
  auto* cmd_eci = app.add_subcommand("eci", "Compute complexity scores from a long-form activity CSV");
  cmd_eci->add_option("--input", eci_input, "CSV with country,activity,value")->required();
  cmd_eci->add_option("--threshold", threshold, "RCA binarization threshold")->capture_default_str();
  cmd_eci->add_option("--output,--out", eci_output, "output CSV (country,eci,raw,rank)");
  cmd_eci->callback([&] {
    ActivityMatrix m = ActivityMatrix::from_csv_file(eci_input);
    EciScores scores = eci_from_raw(m, threshold);
    std::ostringstream out;
    write_eci_csv(out, scores);
    write_output(eci_output, out.str());
    if (scores.degenerate)
      std::cerr << "warning: all complexity scores are equal\n";
  });

  // --- spells ---
  auto* cmd_spells = app.add_subcommand("spells", "Convert a panel into survival spells");
  add_common(cmd_spells, true);
  cmd_spells->callback([&] {
    if (o.panel_path.empty()) fail(ErrorCategory::invalid, "--panel is required");
    Panel panel = load_panel_file(o.panel_path);
    SpellConfig cfg = parse_window(o);
    SpellBuildReport report;
    SpellSet spells = build_spells(panel, cfg, &report);
    std::ostringstream out;
    csv::write_row(out, {"country", "entry", "exit", "duration", "event"});
    for (const auto& s : spells.spells)
      csv::write_row(out, {s.subject, std::to_string(s.entry),
                           std::to_string(s.exit), std::to_string(s.duration()),
                           s.event ? "1" : "0"});
    write_output(o.out, out.str());
    for (const auto& c : report.countries_without_spells)
      std::cerr << "warning: " << c << " contributes no spells (observed only in crisis)\n";
  });

  // --- fit ---
  std::string spec_arg;
  auto* cmd_fit = app.add_subcommand("fit", "Fit one Cox model");
  add_common(cmd_fit, true);
  cmd_fit->add_option("--spec", spec_arg, "model name (model1..model10, baseline, final), JSON file, or inline a+b+a:b")->required();
  cmd_fit->add_option("--ties", o.ties, "breslow, efron, or exact")->capture_default_str();
  cmd_fit->add_option("--alpha", o.alpha, "CI significance level")->capture_default_str();
  cmd_fit->callback([&] {
    if (o.alpha <= 0.0 || o.alpha >= 1.0)
      fail(ErrorCategory::invalid, "--alpha must lie in (0, 1)");
    ModelSpec spec = parse_spec(spec_arg);
    SpellSet spells = build_attached(o, spec);
    CoxFit fit = fit_cox(spells, spec, tie_method_from_string(o.ties));
    double level = 1.0 - o.alpha;
    TableFormat fmt = table_format_from_string(o.format);
    if (fmt == TableFormat::json)
      write_output(o.out, fit_to_json(fit, level).dump(2) + "\n");
    else
      write_output(o.out, render_regression_table(std::vector<CoxFit>{fit},
                                                  fmt, level));
  });

  // --- ladder ---
  std::string json_out, aic_out, tidy_out;
  auto* cmd_ladder = app.add_subcommand("ladder", "Fit the ten-model AIC ladder");
  add_common(cmd_ladder, true);
  cmd_ladder->add_option("--ties", o.ties, "breslow, efron, or exact")->capture_default_str();
  cmd_ladder->add_option("--alpha", o.alpha, "CI significance level")->capture_default_str();
  cmd_ladder->add_option("--json", json_out, "also write the full-precision JSON result here");
  cmd_ladder->add_option("--aic-out", aic_out, "also write figure data (model,AIC) here");
  cmd_ladder->add_option("--tidy-out", tidy_out, "also write the tidy coefficient CSV here");
  cmd_ladder->callback([&] {
    SpellSet spells = build_attached(o, ladder_union_spec());
    LadderResult ladder = run_ladder(spells, tie_method_from_string(o.ties));
    double level = 1.0 - o.alpha;
    TableFormat fmt = table_format_from_string(o.format);
    if (fmt == TableFormat::json)
      write_output(o.out, ladder_to_json(ladder, level).dump(2) + "\n");
    else
      write_output(o.out, render_regression_table(ladder.models, fmt, level));
    if (!json_out.empty())
      write_output(json_out, ladder_to_json(ladder, level).dump(2) + "\n");
    if (!aic_out.empty()) write_output(aic_out, emit_aic_figure_data(ladder));
    if (!tidy_out.empty())
      write_output(tidy_out,
                   render_regression_table(ladder.models, TableFormat::csv, level));
    if (!ladder.best_index)
      fail(ErrorCategory::model, "no ladder model converged");
  });

  // --- robustness ---
  std::string rob_spec = "final";
  auto* cmd_rob = app.add_subcommand("robustness", "Compare exact, Breslow, and Efron fits of one spec");
  add_common(cmd_rob, true);
  cmd_rob->add_option("--spec", rob_spec, "model spec (default: final)")->capture_default_str();
  cmd_rob->add_option("--alpha", o.alpha, "CI significance level")->capture_default_str();
  cmd_rob->callback([&] {
    ModelSpec spec = parse_spec(rob_spec);
    SpellSet spells = build_attached(o, spec);
    RobustnessResult result = run_robustness(spells, spec);
    double level = 1.0 - o.alpha;
    write_output(o.out, render_regression_table(
                            result.fits, table_format_from_string(o.format), level));
  });

  // --- simulate ---
  int n_subjects = 200;
  std::string beta_arg = "0.5,-0.5";
  double rate = 0.1, horizon = 25.0;
  std::string law = "uniform01";
  auto* cmd_sim = app.add_subcommand("simulate", "Draw one synthetic spell set with known coefficients");
  add_common(cmd_sim, false);
  cmd_sim->add_option("--n", n_subjects, "subjects")->capture_default_str();
  cmd_sim->add_option("--beta", beta_arg, "true coefficients, comma separated")->capture_default_str();
  cmd_sim->add_option("--rate", rate, "baseline hazard (events/year)")->capture_default_str();
  cmd_sim->add_option("--horizon", horizon, "censoring horizon in years")->capture_default_str();
  cmd_sim->add_option("--law", law, "uniform01, standard_normal, or product_pair")->capture_default_str();
  cmd_sim->callback([&] {
    SimParams p;
    p.n_subjects = n_subjects;
    auto beta = parse_beta(beta_arg);
    p.true_beta = Eigen::Map<const Eigen::VectorXd>(beta.data(), beta.size());
    p.baseline_rate = rate;
    p.censor_horizon = horizon;
    p.covariate_law = covariate_law_from_string(law);
    p.seed = o.seed;
    SpellSet spells = simulate_spells(p);
    std::ostringstream out;
    std::vector<std::string> header = {"subject", "entry", "exit", "duration", "event"};
    for (const auto& n : spells.predictor_names) header.push_back(n);
    csv::write_row(out, header);
    for (const auto& s : spells.spells) {
      std::vector<std::string> row = {s.subject, std::to_string(s.entry),
                                      std::to_string(s.exit),
                                      std::to_string(s.duration()),
                                      s.event ? "1" : "0"};
      for (Eigen::Index j = 0; j < s.covariates.size(); ++j)
        row.push_back(csv::format_double(s.covariates[j]));
      csv::write_row(out, row);
    }
    write_output(o.out, out.str());
  });

  // --- coverage ---
  int replicates = 500;
  auto* cmd_cov = app.add_subcommand("coverage", "Estimator bias and CI coverage over many replicates");
  add_common(cmd_cov, false);
  cmd_cov->add_option("--n", n_subjects, "subjects per replicate")->capture_default_str();
  cmd_cov->add_option("--beta", beta_arg, "true coefficients, comma separated")->capture_default_str();
  cmd_cov->add_option("--rate", rate, "baseline hazard (events/year)")->capture_default_str();
  cmd_cov->add_option("--horizon", horizon, "censoring horizon in years")->capture_default_str();
  cmd_cov->add_option("--law", law, "uniform01, standard_normal, or product_pair")->capture_default_str();
  cmd_cov->add_option("--replicates", replicates, "number of replicates")->capture_default_str();
  cmd_cov->add_option("--ties", o.ties, "breslow, efron, or exact")->capture_default_str();
  cmd_cov->callback([&] {
    SimParams p;
    p.n_subjects = n_subjects;
    auto beta = parse_beta(beta_arg);
    p.true_beta = Eigen::Map<const Eigen::VectorXd>(beta.data(), beta.size());
    p.baseline_rate = rate;
    p.censor_horizon = horizon;
    p.covariate_law = covariate_law_from_string(law);
    p.seed = o.seed;
    SimReport report = coverage_experiment(p, replicates, tie_method_from_string(o.ties));
    json j;
    j["replicates"] = report.replicates;
    j["failed"] = report.failed;
    j["mean_beta_hat"] = std::vector<double>(report.mean_beta_hat.begin(), report.mean_beta_hat.end());
    j["bias"] = std::vector<double>(report.bias.begin(), report.bias.end());
    j["coverage"] = std::vector<double>(report.empirical_coverage.begin(), report.empirical_coverage.end());
    j["rng"] = report.rng;
    j["params"] = {{"n", p.n_subjects},
                   {"beta", std::vector<double>(p.true_beta.begin(), p.true_beta.end())},
                   {"rate", p.baseline_rate},
                   {"horizon", p.censor_horizon},
                   {"law", to_string(p.covariate_law)},
                   {"seed", p.seed},
                   {"ties", o.ties}};
    write_output(o.out, j.dump(2) + "\n");
  });

  // --- report ---
  std::string fits_path;
  auto* cmd_report = app.add_subcommand("report", "Render tables from a saved fit or ladder JSON");
  add_common(cmd_report, false);
  cmd_report->add_option("--fits", fits_path, "JSON from `fit --format json` or `ladder --json`")->required();
  cmd_report->add_option("--aic-out", aic_out, "also write figure data here (ladder input only)");
  cmd_report->callback([&] {
    std::ifstream in(fits_path);
    if (!in) fail(ErrorCategory::io, "cannot open '" + fits_path + "' for reading");
    json j = json::parse(in, nullptr, true, true);
    TableFormat fmt = table_format_from_string(o.format);
    if (j.contains("models")) {
      LadderResult ladder = ladder_from_json(j);
      // render with the level the fits were saved with
      double level = 0.95;
      for (const auto& m : j.at("models"))
        if (m.contains("fit")) {
          level = m.at("fit").value("level", 0.95);
          break;
        }
      write_output(o.out, render_regression_table(ladder.models, fmt, level));
      if (!aic_out.empty()) write_output(aic_out, emit_aic_figure_data(ladder));
    } else {
      CoxFit fit = fit_from_json(j);
      double level = j.value("level", 0.95);
      write_output(o.out, render_regression_table(std::vector<CoxFit>{fit}, fmt, level));
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    json err;
    err["error"] = {{"category", to_string(e.category())},
                    {"code", e.exit_code()},
                    {"message", e.what()}};
    std::cerr << err.dump() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    json err;
    err["error"] = {{"category", "internal"}, {"code", 1}, {"message", e.what()}};
    std::cerr << err.dump() << '\n';
    return 1;
  }
}
