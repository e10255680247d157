#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fiscrisk/panel.hpp"
#include "fiscrisk/survival.hpp"

namespace fiscrisk {

struct LadderEntry {
  std::string label;
  ModelSpec spec;
  std::optional<CoxFit> fit;  // empty when the model failed
  std::string error;          // failure reason when fit is empty
};

struct LadderResult {
  std::vector<LadderEntry> models;      // fixed spec order
  std::optional<int> best_index;        // minimum AIC among converged fits
};

struct RobustnessResult {
  std::vector<LadderEntry> fits;  // exact, breslow, efron
};

// The fixed ten-model registry: ECI terms alone (1-5), controls-only
// baseline (6), and ECI terms with controls (7-10).
std::vector<ModelSpec> standard_specs();
std::vector<std::string> standard_spec_labels();

// Union of every predictor the ladder uses; attaching covariates with this
// spec applies listwise deletion once so all ten fits share one sample.
ModelSpec ladder_union_spec();

// Looks up "model1".."model10", "baseline" (6) or "final" (10).
ModelSpec named_spec(const std::string& name);

// Fits all ten specs on a spell set carrying the union predictors. Per-model
// failures are recorded without aborting the ladder.
LadderResult run_ladder(const SpellSet& spells, TieMethod ties,
                        const FitConfig& cfg = {});

// Fits one spec under exact, breslow, and efron tie handling on identical
// spells; an exact-method capacity error is recorded in-row.
RobustnessResult run_robustness(const SpellSet& spells,
                                const ModelSpec& final_spec,
                                const FitConfig& cfg = {});

// Index of the minimum-AIC converged fit; ties broken by higher loglik,
// then fewer predictors. Throws Error(model) when nothing converged.
int select_best(const std::vector<CoxFit>& fits);

// Projects a union-predictor spell set onto the columns a spec needs.
SpellSet project_spells(const SpellSet& spells, const ModelSpec& spec);

}  // namespace fiscrisk
