#include "fiscrisk/report.hpp"

#include <algorithm>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <sstream>

#include "fiscrisk/csv.hpp"
#include "fiscrisk/errors.hpp"

namespace fiscrisk {

using nlohmann::json;

TableFormat table_format_from_string(const std::string& name) {
  if (name == "csv") return TableFormat::csv;
  if (name == "markdown") return TableFormat::markdown;
  if (name == "json") return TableFormat::json;
  fail(ErrorCategory::invalid, "unknown format '" + name +
                                   "' (expected csv, markdown, or json)");
}

std::string display_name(const std::string& predictor) {
  if (predictor == "eciT") return "ECI (trade)";
  if (predictor == "eciR") return "ECI (research)";
  if (predictor == "growth") return "Real GDP growth";
  if (predictor == "interest") return "Interest expenses as % GDP";
  if (predictor == "rqe") return "Regulatory quality";
  if (predictor == "rle") return "Rule of law";
  auto sep = predictor.find(':');
  if (sep != std::string::npos)
    return display_name(predictor.substr(0, sep)) + " x " +
           display_name(predictor.substr(sep + 1));
  return predictor;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

// "beta stars (lo – hi)"; rounding is display-only
std::string cell(double beta, double se, double lo, double hi) {
  double p = wald_p_value(beta, se);
  std::string stars = significance_stars(p);
  std::string out = fixed(beta, 2);
  if (!stars.empty()) out += " " + stars;
  out += " (" + fixed(lo, 2) + " – " + fixed(hi, 2) + ")";
  return out;
}

// union of predictor columns across fits, in canonical display order
std::vector<std::string> collect_predictors(
    const std::vector<LadderEntry>& fits) {
  const std::vector<std::string> canonical = {
      "eciT", "eciR", "eciT:eciR", "rqe", "interest", "growth", "rle"};
  std::vector<std::string> present;
  auto add = [&](const std::string& n) {
    if (std::find(present.begin(), present.end(), n) == present.end())
      present.push_back(n);
  };
  std::vector<std::string> all;
  for (const auto& e : fits)
    for (const auto& n : e.spec.expanded_names()) all.push_back(n);
  for (const auto& n : canonical)
    if (std::find(all.begin(), all.end(), n) != all.end()) add(n);
  for (const auto& n : all)
    if (std::find(canonical.begin(), canonical.end(), n) == canonical.end())
      add(n);
  return present;
}

struct Column {
  std::vector<std::string> cells;  // aligned with the predictor list
  std::string observations = "—";
  std::string aic = "—";
  std::string loglik = "—";
  std::string note;  // failure reason, if any
};

Column build_column(const LadderEntry& e,
                    const std::vector<std::string>& predictors, double level) {
  Column col;
  col.cells.assign(predictors.size(), "");
  if (!e.fit) {
    col.note = e.error;
    return col;
  }
  const CoxFit& fit = *e.fit;
  auto names = fit.spec.expanded_names();
  auto cis = wald_ci(fit, level);
  for (std::size_t j = 0; j < names.size(); ++j) {
    auto it = std::find(predictors.begin(), predictors.end(), names[j]);
    if (it == predictors.end()) continue;
    std::size_t row = it - predictors.begin();
    col.cells[row] = cell(fit.beta[static_cast<Eigen::Index>(j)],
                          fit.se[static_cast<Eigen::Index>(j)],
                          cis[j].first, cis[j].second);
  }
  col.observations = std::to_string(fit.n_spells);
  col.aic = fixed(fit.aic, 3);
  col.loglik = fixed(fit.loglik, 3);
  return col;
}

std::string render_markdown(const std::vector<LadderEntry>& fits,
                            double level) {
  auto predictors = collect_predictors(fits);
  std::vector<Column> cols;
  for (const auto& e : fits) cols.push_back(build_column(e, predictors, level));

  std::ostringstream out;
  out << "| Predictors |";
  for (const auto& e : fits) out << ' ' << e.label << " |";
  out << '\n';
  out << "|---|";
  for (std::size_t i = 0; i < fits.size(); ++i) out << "---|";
  out << '\n';
  for (std::size_t r = 0; r < predictors.size(); ++r) {
    out << "| " << display_name(predictors[r]) << " |";
    for (const auto& c : cols) out << ' ' << c.cells[r] << " |";
    out << '\n';
  }
  out << "| Observations |";
  for (const auto& c : cols) out << ' ' << c.observations << " |";
  out << '\n';
  out << "| AIC |";
  for (const auto& c : cols) out << ' ' << c.aic << " |";
  out << '\n';
  out << "| log-Likelihood |";
  for (const auto& c : cols) out << ' ' << c.loglik << " |";
  out << '\n';
  out << "\n* p<0.05 ** p<0.01 *** p<0.001\n";
  for (std::size_t i = 0; i < fits.size(); ++i)
    if (!cols[i].note.empty())
      out << "\nModel " << fits[i].label << " failed: " << cols[i].note << '\n';
  return out.str();
}

// tidy long-form CSV, full precision
std::string render_csv(const std::vector<LadderEntry>& fits, double level) {
  std::ostringstream out;
  csv::write_row(out, {"model", "predictor", "beta", "se", "lo", "hi", "p",
                       "stars", "error"});
  for (const auto& e : fits) {
    if (!e.fit) {
      csv::write_row(out, {e.label, "", "", "", "", "", "", "", e.error});
      continue;
    }
    const CoxFit& fit = *e.fit;
    auto names = fit.spec.expanded_names();
    auto cis = wald_ci(fit, level);
    for (std::size_t j = 0; j < names.size(); ++j) {
      auto jj = static_cast<Eigen::Index>(j);
      double p = wald_p_value(fit.beta[jj], fit.se[jj]);
      csv::write_row(out, {e.label, names[j], csv::format_double(fit.beta[jj]),
                           csv::format_double(fit.se[jj]),
                           csv::format_double(cis[j].first),
                           csv::format_double(cis[j].second),
                           csv::format_double(p), significance_stars(p), ""});
    }
  }
  return out.str();
}

}  // namespace

std::string render_regression_table(const std::vector<LadderEntry>& fits,
                                    TableFormat format, double level) {
  if (fits.empty()) fail(ErrorCategory::invalid, "need at least one fit");
  switch (format) {
    case TableFormat::markdown: return render_markdown(fits, level);
    case TableFormat::csv: return render_csv(fits, level);
    case TableFormat::json: {
      json j = json::array();
      for (const auto& e : fits) {
        if (e.fit)
          j.push_back({{"label", e.label}, {"fit", fit_to_json(*e.fit, level)}});
        else
          j.push_back({{"label", e.label}, {"error", e.error}});
      }
      return j.dump(2) + "\n";
    }
  }
  fail(ErrorCategory::invalid, "unknown table format");
}

std::string render_regression_table(const std::vector<CoxFit>& fits,
                                    TableFormat format, double level) {
  std::vector<LadderEntry> entries;
  entries.reserve(fits.size());
  for (std::size_t i = 0; i < fits.size(); ++i)
    entries.push_back({std::to_string(i + 1), fits[i].spec, fits[i], ""});
  return render_regression_table(entries, format, level);
}

std::string emit_aic_figure_data(const LadderResult& ladder) {
  bool any = false;
  for (const auto& e : ladder.models)
    if (e.fit && e.fit->converged) any = true;
  if (!any) fail(ErrorCategory::model, "ladder has no converged fit");

  std::ostringstream out;
  csv::write_row(out, {"model_label", "k", "loglik", "aic", "is_best", "error"});
  for (std::size_t i = 0; i < ladder.models.size(); ++i) {
    const auto& e = ladder.models[i];
    std::string k = std::to_string(e.spec.size());
    bool is_best =
        ladder.best_index && *ladder.best_index == static_cast<int>(i);
    if (e.fit)
      csv::write_row(out, {e.label, k, csv::format_double(e.fit->loglik),
                           csv::format_double(e.fit->aic),
                           is_best ? "true" : "false", ""});
    else
      csv::write_row(out, {e.label, k, "", "", "false", e.error});
  }
  return out.str();
}

json fit_to_json(const CoxFit& fit, double level) {
  json j;
  j["spec"]["predictors"] = fit.spec.predictors;
  j["spec"]["interactions"] = json::array();
  for (const auto& [a, b] : fit.spec.interactions)
    j["spec"]["interactions"].push_back({a, b});
  j["ties"] = to_string(fit.ties);
  j["n_spells"] = fit.n_spells;
  j["n_events"] = fit.n_events;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  j["loglik"] = fit.loglik;
  j["loglik_null"] = fit.loglik_null;
  j["aic"] = fit.aic;
  j["beta"] = std::vector<double>(fit.beta.begin(), fit.beta.end());
  j["se"] = std::vector<double>(fit.se.begin(), fit.se.end());
  json cov = json::array();
  for (Eigen::Index r = 0; r < fit.cov.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < fit.cov.cols(); ++c) row.push_back(fit.cov(r, c));
    cov.push_back(std::move(row));
  }
  j["cov"] = std::move(cov);

  j["level"] = level;
  json coefs = json::array();
  auto names = fit.spec.expanded_names();
  auto cis = fit.converged ? wald_ci(fit, level)
                           : std::vector<std::pair<double, double>>{};
  for (std::size_t i = 0; i < names.size(); ++i) {
    auto ii = static_cast<Eigen::Index>(i);
    json c;
    c["name"] = names[i];
    c["beta"] = fit.beta[ii];
    c["se"] = fit.se[ii];
    if (fit.converged) {
      double p = wald_p_value(fit.beta[ii], fit.se[ii]);
      c["lo"] = cis[i].first;
      c["hi"] = cis[i].second;
      c["p"] = p;
      c["stars"] = significance_stars(p);
    }
    coefs.push_back(std::move(c));
  }
  j["coefficients"] = std::move(coefs);
  return j;
}

CoxFit fit_from_json(const json& j) {
  CoxFit fit;
  fit.spec.predictors = j.at("spec").at("predictors").get<std::vector<std::string>>();
  for (const auto& pair : j.at("spec").at("interactions"))
    fit.spec.interactions.emplace_back(pair.at(0).get<std::string>(),
                                       pair.at(1).get<std::string>());
  fit.ties = tie_method_from_string(j.at("ties").get<std::string>());
  fit.n_spells = j.at("n_spells").get<int>();
  fit.n_events = j.at("n_events").get<int>();
  fit.iterations = j.at("iterations").get<int>();
  fit.converged = j.at("converged").get<bool>();
  fit.loglik = j.at("loglik").get<double>();
  fit.loglik_null = j.at("loglik_null").get<double>();
  fit.aic = j.at("aic").get<double>();
  auto beta = j.at("beta").get<std::vector<double>>();
  auto se = j.at("se").get<std::vector<double>>();
  fit.beta = Eigen::Map<const Eigen::VectorXd>(beta.data(), beta.size());
  fit.se = Eigen::Map<const Eigen::VectorXd>(se.data(), se.size());
  const auto& cov = j.at("cov");
  fit.cov.resize(static_cast<Eigen::Index>(cov.size()),
                 static_cast<Eigen::Index>(cov.size()));
  for (std::size_t r = 0; r < cov.size(); ++r)
    for (std::size_t c = 0; c < cov[r].size(); ++c)
      fit.cov(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          cov[r][c].get<double>();
  return fit;
}

json ladder_to_json(const LadderResult& ladder, double level) {
  json j;
  j["models"] = json::array();
  for (const auto& e : ladder.models) {
    json m;
    m["label"] = e.label;
    if (e.fit)
      m["fit"] = fit_to_json(*e.fit, level);
    else {
      m["error"] = e.error;
      m["spec"]["predictors"] = e.spec.predictors;
      m["spec"]["interactions"] = json::array();
      for (const auto& [a, b] : e.spec.interactions)
        m["spec"]["interactions"].push_back({a, b});
    }
    j["models"].push_back(std::move(m));
  }
  if (ladder.best_index) j["best_index"] = *ladder.best_index;
  return j;
}

LadderResult ladder_from_json(const json& j) {
  LadderResult result;
  for (const auto& m : j.at("models")) {
    LadderEntry e;
    e.label = m.at("label").get<std::string>();
    if (m.contains("fit")) {
      e.fit = fit_from_json(m.at("fit"));
      e.spec = e.fit->spec;
    } else {
      e.error = m.value("error", std::string("unknown failure"));
      if (m.contains("spec")) {
        e.spec.predictors =
            m.at("spec").at("predictors").get<std::vector<std::string>>();
        for (const auto& pair : m.at("spec").at("interactions"))
          e.spec.interactions.emplace_back(pair.at(0).get<std::string>(),
                                           pair.at(1).get<std::string>());
      }
    }
    result.models.push_back(std::move(e));
  }
  if (j.contains("best_index"))
    result.best_index = j.at("best_index").get<int>();
  return result;
}

}  // namespace fiscrisk
