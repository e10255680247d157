#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "fiscrisk/ladder.hpp"
#include "fiscrisk/survival.hpp"

namespace fiscrisk {

enum class TableFormat { csv, markdown, json };

TableFormat table_format_from_string(const std::string& name);

// One column per fit, one row per predictor with cells
// "beta stars (lo – hi)", then Observations / AIC / log-Likelihood rows.
// `level` is the CI level (1 - alpha). Rounded values are display-only:
// the csv and json formats carry full precision.
std::string render_regression_table(const std::vector<LadderEntry>& fits,
                                    TableFormat format, double level = 0.95);
std::string render_regression_table(const std::vector<CoxFit>& fits,
                                    TableFormat format, double level = 0.95);

// Figure-style CSV of (model_label, k, loglik, aic, is_best, error).
std::string emit_aic_figure_data(const LadderResult& ladder);

// JSON serialization. Doubles round-trip bit-for-bit.
nlohmann::json fit_to_json(const CoxFit& fit, double level = 0.95);
CoxFit fit_from_json(const nlohmann::json& j);
nlohmann::json ladder_to_json(const LadderResult& ladder, double level = 0.95);
LadderResult ladder_from_json(const nlohmann::json& j);

// Display name of a predictor column ("eciT" -> "ECI (trade)", ...).
std::string display_name(const std::string& predictor);

}  // namespace fiscrisk
