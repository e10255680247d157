#include "fiscrisk/panel.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "fiscrisk/csv.hpp"
#include "fiscrisk/errors.hpp"
#include "fiscrisk/survival.hpp"

namespace fiscrisk {

namespace {

const char* kCovariateColumns[] = {"growth", "interest", "rqe", "rle"};

std::optional<double> parse_optional(const std::string& cell,
                                     const std::string& context,
                                     std::size_t line) {
  if (cell.empty()) return std::nullopt;
  return csv::parse_double(cell, context, line);
}

}  // namespace

std::optional<double> PanelRow::covariate(const std::string& name) const {
  if (name == "growth") return growth;
  if (name == "interest") return interest;
  if (name == "rqe") return rqe;
  if (name == "rle") return rle;
  fail(ErrorCategory::schema, "unknown panel covariate '" + name + "'");
}

const PanelRow* Panel::find(const std::string& country, int year) const {
  PanelRow probe;
  probe.country = country;
  probe.year = year;
  auto it = std::lower_bound(rows.begin(), rows.end(), probe,
                             [](const PanelRow& a, const PanelRow& b) {
                               return std::tie(a.country, a.year) <
                                      std::tie(b.country, b.year);
                             });
  if (it == rows.end() || it->country != country || it->year != year)
    return nullptr;
  return &*it;
}

std::size_t SpellSet::n_events() const {
  std::size_t n = 0;
  for (const auto& s : spells) n += s.event ? 1 : 0;
  return n;
}

Panel load_panel(std::istream& in, const PanelSchema& schema,
                 const std::string& stream_name) {
  csv::Table t = csv::read(in, stream_name);

  auto mapped = [&](const std::string& role) {
    auto it = schema.columns.find(role);
    if (it == schema.columns.end())
      fail(ErrorCategory::schema, "schema does not map required role '" + role + "'");
    return t.require_column(it->second);
  };

  int c_country = mapped("country");
  int c_year = mapped("year");
  int c_crisis = mapped("crisis");
  int c_growth = mapped("growth");
  int c_interest = mapped("interest");
  int c_rqe = mapped("rqe");
  int c_rle = mapped("rle");

  Panel panel;
  for (const char* col : kCovariateColumns)
    panel.report.missing_by_column[col] = 0;

  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& cells = t.rows[i];
    std::size_t line = t.line_numbers[i];
    PanelRow row;
    row.country = cells[c_country];
    if (row.country.empty())
      fail(ErrorCategory::parse,
           stream_name + ": line " + std::to_string(line) + ": empty country code");
    row.year = csv::parse_int(cells[c_year], stream_name, line);
    const std::string& crisis = cells[c_crisis];
    if (crisis == "0")
      row.crisis = false;
    else if (crisis == "1")
      row.crisis = true;
    else
      fail(ErrorCategory::parse, stream_name + ": line " + std::to_string(line) +
                                     ": crisis flag must be 0 or 1, got '" +
                                     crisis + "'");
    row.growth = parse_optional(cells[c_growth], stream_name, line);
    row.interest = parse_optional(cells[c_interest], stream_name, line);
    row.rqe = parse_optional(cells[c_rqe], stream_name, line);
    row.rle = parse_optional(cells[c_rle], stream_name, line);

    if (!row.growth) ++panel.report.missing_by_column["growth"];
    if (!row.interest) ++panel.report.missing_by_column["interest"];
    if (!row.rqe) ++panel.report.missing_by_column["rqe"];
    if (!row.rle) ++panel.report.missing_by_column["rle"];

    panel.rows.push_back(std::move(row));
  }

  std::stable_sort(panel.rows.begin(), panel.rows.end(),
                   [](const PanelRow& a, const PanelRow& b) {
                     return std::tie(a.country, a.year) <
                            std::tie(b.country, b.year);
                   });
  for (std::size_t i = 1; i < panel.rows.size(); ++i) {
    const auto& a = panel.rows[i - 1];
    const auto& b = panel.rows[i];
    if (a.country == b.country && a.year == b.year)
      fail(ErrorCategory::data, "duplicate (country, year): (" + a.country +
                                    ", " + std::to_string(a.year) + ")");
  }
  panel.report.n_rows = panel.rows.size();
  return panel;
}

Panel load_panel_file(const std::string& path, const PanelSchema& schema) {
  std::ifstream in(path);
  if (!in) fail(ErrorCategory::io, "cannot open '" + path + "' for reading");
  return load_panel(in, schema, path);
}

SpellSet build_spells(const Panel& panel, const SpellConfig& cfg,
                      SpellBuildReport* report) {
  if (panel.empty()) fail(ErrorCategory::data, "panel is empty");
  if (cfg.window_start > cfg.window_end)
    fail(ErrorCategory::invalid, "sample window start exceeds end");
  if (cfg.reentry_gap < 1)
    fail(ErrorCategory::invalid, "re-entry gap must be >= 1 year");
  if (cfg.covariate_lag < 0)
    fail(ErrorCategory::invalid, "covariate lag must be >= 0");

  SpellBuildReport local;
  SpellSet out;

  // panel.rows is sorted by (country, year); walk one country at a time
  std::size_t i = 0;
  while (i < panel.rows.size()) {
    const std::string& country = panel.rows[i].country;
    std::vector<int> years;
    std::set<int> crisis_years;
    for (; i < panel.rows.size() && panel.rows[i].country == country; ++i) {
      int y = panel.rows[i].year;
      if (y < cfg.window_start || y > cfg.window_end) continue;
      years.push_back(y);
      if (panel.rows[i].crisis) crisis_years.insert(y);
    }
    if (years.empty()) continue;
    ++local.n_countries;

    // maximal runs of calendar-consecutive crisis years
    struct Episode { int onset; int end; };
    std::vector<Episode> episodes;
    for (int y : crisis_years) {
      if (!episodes.empty() && episodes.back().end == y - 1)
        episodes.back().end = y;
      else
        episodes.push_back({y, y});
    }

    std::size_t spells_before = out.spells.size();
    int cursor = years.front();  // first at-risk candidate year
    for (const Episode& ep : episodes) {
      if (ep.onset <= cursor) {
        // episode already running at (or starting on) the first at-risk
        // year, or it began inside a re-entry gap: no time at risk precedes
        // it, so it yields no event spell
        cursor = std::max(cursor, ep.end + cfg.reentry_gap);
        continue;
      }
      out.spells.push_back(Spell{country, cursor, ep.onset, true, {}});
      ++local.n_events;
      cursor = ep.end + cfg.reentry_gap;
    }
    int last = years.back();
    if (cursor < last) out.spells.push_back(Spell{country, cursor, last, false, {}});

    if (out.spells.size() == spells_before)
      local.countries_without_spells.push_back(country);
  }

  local.n_spells = out.spells.size();
  if (report) *report = local;
  return out;
}

SpellSet attach_covariates(const SpellSet& spells, const Panel& panel,
                           const EciMap& eci, const ModelSpec& spec,
                           const SpellConfig& cfg, AttachReport* report) {
  std::vector<std::string> names = spec.expanded_names();

  // resolve one base predictor for a spell, or nullopt if unavailable
  auto resolve = [&](const std::string& name,
                     const Spell& s) -> std::optional<double> {
    if (name == "eciT" || name == "eciR") {
      auto it = eci.find(s.subject);
      if (it == eci.end()) return std::nullopt;
      return name == "eciT" ? it->second.first : it->second.second;
    }
    const PanelRow* row = panel.find(s.subject, s.entry + cfg.covariate_lag);
    if (!row) return std::nullopt;
    return row->covariate(name);
  };

  // validate predictor names up front so unknown names are a spec error,
  // not a silent drop
  for (const auto& n : names) {
    auto sep = n.find(':');
    std::vector<std::string> parts;
    if (sep == std::string::npos)
      parts.push_back(n);
    else {
      parts.push_back(n.substr(0, sep));
      parts.push_back(n.substr(sep + 1));
    }
    for (const auto& p : parts)
      if (p != "eciT" && p != "eciR" && p != "growth" && p != "interest" &&
          p != "rqe" && p != "rle")
        fail(ErrorCategory::schema, "unknown predictor '" + p + "'");
  }

  SpellSet out;
  out.predictor_names = names;
  AttachReport local;

  for (const Spell& s : spells.spells) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(names.size()));
    bool complete = true;
    for (std::size_t j = 0; j < names.size() && complete; ++j) {
      const std::string& n = names[j];
      auto sep = n.find(':');
      if (sep == std::string::npos) {
        auto v = resolve(n, s);
        if (!v) { complete = false; break; }
        x[static_cast<Eigen::Index>(j)] = *v;
      } else {
        auto a = resolve(n.substr(0, sep), s);
        auto b = resolve(n.substr(sep + 1), s);
        if (!a || !b) { complete = false; break; }
        x[static_cast<Eigen::Index>(j)] = *a * *b;
      }
    }
    if (!complete) {
      ++local.dropped;
      continue;
    }
    Spell copy = s;
    copy.covariates = std::move(x);
    out.spells.push_back(std::move(copy));
  }

  if (report) *report = local;
  return out;
}

}  // namespace fiscrisk
