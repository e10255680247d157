#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fiscrisk {

// One country-year observation. Numeric covariates are optional: an empty
// CSV cell stays missing instead of being zero-filled.
struct PanelRow {
  std::string country;
  int year = 0;
  bool crisis = false;
  std::optional<double> growth;
  std::optional<double> interest;
  std::optional<double> rqe;
  std::optional<double> rle;

  std::optional<double> covariate(const std::string& name) const;
};

struct PanelReport {
  std::size_t n_rows = 0;
  std::map<std::string, std::size_t> missing_by_column;
};

struct Panel {
  std::vector<PanelRow> rows;  // sorted by (country, year), keys unique
  PanelReport report;

  const PanelRow* find(const std::string& country, int year) const;
  bool empty() const { return rows.empty(); }
};

// Maps the logical roles (country, year, crisis, growth, interest, rqe, rle)
// to the column names present in the input header. Defaults to identity.
struct PanelSchema {
  std::map<std::string, std::string> columns = {
      {"country", "country"},   {"year", "year"}, {"crisis", "crisis"},
      {"growth", "growth"},     {"interest", "interest"},
      {"rqe", "rqe"},           {"rle", "rle"},
  };
};

Panel load_panel(std::istream& in, const PanelSchema& schema = {},
                 const std::string& stream_name = "<stream>");
Panel load_panel_file(const std::string& path, const PanelSchema& schema = {});

// One at-risk episode. Covariates are attached later (attach_covariates) and
// are empty until then. Duration is gap time in whole years.
struct Spell {
  std::string subject;
  int entry = 0;
  int exit = 0;
  bool event = false;
  Eigen::VectorXd covariates;

  int duration() const { return exit - entry; }
};

struct SpellSet {
  std::vector<Spell> spells;
  std::vector<std::string> predictor_names;

  std::size_t n_events() const;
};

struct SpellConfig {
  int window_start = 1998;
  int window_end = 2021;
  int reentry_gap = 1;    // years after an episode's last crisis year
  int covariate_lag = 0;  // covariates taken at entry + lag
};

struct SpellBuildReport {
  std::size_t n_countries = 0;
  std::size_t n_spells = 0;
  std::size_t n_events = 0;
  // countries observed only during crisis episodes contribute no spells
  std::vector<std::string> countries_without_spells;
};

SpellSet build_spells(const Panel& panel, const SpellConfig& cfg = {},
                      SpellBuildReport* report = nullptr);

// Per-country complexity scores, one pair per country: (trade, research).
using EciMap = std::map<std::string, std::pair<double, double>>;

struct ModelSpec;  // survival.hpp

struct AttachReport {
  std::size_t dropped = 0;  // spells removed by listwise deletion
};

// Resolves the spec's predictor columns for every spell: eciT/eciR come from
// the map, the remaining names from the panel at year entry + covariate_lag,
// and interaction terms are products of their resolved parts. Spells with any
// missing value are dropped (listwise deletion).
SpellSet attach_covariates(const SpellSet& spells, const Panel& panel,
                           const EciMap& eci, const ModelSpec& spec,
                           const SpellConfig& cfg = {},
                           AttachReport* report = nullptr);

}  // namespace fiscrisk
