#include "fiscrisk/ladder.hpp"

#include <algorithm>

#include "fiscrisk/errors.hpp"

namespace fiscrisk {

namespace {

const std::vector<std::string> kControls = {"rqe", "interest", "growth", "rle"};

ModelSpec with_controls(ModelSpec spec) {
  for (const auto& c : kControls) spec.predictors.push_back(c);
  return spec;
}

}  // namespace

std::vector<ModelSpec> standard_specs() {
  std::vector<ModelSpec> specs;
  specs.push_back({{"eciT"}, {}});                                    // 1
  specs.push_back({{"eciR"}, {}});                                    // 2
  specs.push_back({{"eciT", "eciR"}, {}});                            // 3
  specs.push_back({{"eciT", "eciR"}, {{"eciT", "eciR"}}});            // 4
  specs.push_back({{}, {{"eciT", "eciR"}}});                          // 5
  specs.push_back({kControls, {}});                                   // 6
  specs.push_back(with_controls({{"eciT"}, {}}));                     // 7
  specs.push_back(with_controls({{"eciR"}, {}}));                     // 8
  specs.push_back(with_controls({{}, {{"eciT", "eciR"}}}));           // 9
  specs.push_back(with_controls({{"eciT", "eciR"}, {{"eciT", "eciR"}}}));  // 10
  return specs;
}

std::vector<std::string> standard_spec_labels() {
  return {"1", "2", "3", "4", "5",
          "6 (Baseline)", "7 (ECI(trade))", "8 (ECI(research))",
          "9 (ECI(Multidimensional))", "10 (Final)"};
}

ModelSpec ladder_union_spec() {
  return with_controls({{"eciT", "eciR"}, {{"eciT", "eciR"}}});
}

ModelSpec named_spec(const std::string& name) {
  auto specs = standard_specs();
  if (name == "baseline") return specs[5];
  if (name == "final") return specs[9];
  if (name.rfind("model", 0) == 0) {
    int idx = 0;
    try {
      idx = std::stoi(name.substr(5));
    } catch (...) {
      idx = 0;
    }
    if (idx >= 1 && idx <= 10) return specs[idx - 1];
  }
  fail(ErrorCategory::invalid, "unknown model name '" + name +
                                   "' (expected model1..model10, baseline, or final)");
}

SpellSet project_spells(const SpellSet& spells, const ModelSpec& spec) {
  std::vector<std::string> wanted = spec.expanded_names();
  std::vector<Eigen::Index> cols;
  cols.reserve(wanted.size());
  for (const auto& name : wanted) {
    auto it = std::find(spells.predictor_names.begin(),
                        spells.predictor_names.end(), name);
    if (it == spells.predictor_names.end())
      fail(ErrorCategory::schema,
           "spell set is missing predictor '" + name + "'");
    cols.push_back(it - spells.predictor_names.begin());
  }

  SpellSet out;
  out.predictor_names = wanted;
  out.spells.reserve(spells.spells.size());
  for (const Spell& s : spells.spells) {
    Spell copy = s;
    copy.covariates.resize(static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j)
      copy.covariates[static_cast<Eigen::Index>(j)] = s.covariates[cols[j]];
    out.spells.push_back(std::move(copy));
  }
  return out;
}

namespace {

std::optional<int> best_entry_index(const std::vector<LadderEntry>& entries) {
  std::optional<int> best;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (!e.fit || !e.fit->converged) continue;
    if (!best) {
      best = static_cast<int>(i);
      continue;
    }
    const CoxFit& cur = *entries[*best].fit;
    const CoxFit& cand = *e.fit;
    if (cand.aic < cur.aic ||
        (cand.aic == cur.aic &&
         (cand.loglik > cur.loglik ||
          (cand.loglik == cur.loglik && cand.beta.size() < cur.beta.size()))))
      best = static_cast<int>(i);
  }
  return best;
}

}  // namespace

LadderResult run_ladder(const SpellSet& spells, TieMethod ties,
                        const FitConfig& cfg) {
  auto specs = standard_specs();
  auto labels = standard_spec_labels();

  LadderResult result;
  result.models.reserve(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    LadderEntry entry;
    entry.label = labels[i];
    entry.spec = specs[i];
    try {
      SpellSet projected = project_spells(spells, specs[i]);
      entry.fit = fit_cox(projected, specs[i], ties, cfg);
    } catch (const Error& e) {
      entry.error = e.what();
    }
    result.models.push_back(std::move(entry));
  }
  result.best_index = best_entry_index(result.models);
  return result;
}

RobustnessResult run_robustness(const SpellSet& spells,
                                const ModelSpec& final_spec,
                                const FitConfig& cfg) {
  SpellSet projected = project_spells(spells, final_spec);
  const std::pair<TieMethod, const char*> methods[] = {
      {TieMethod::exact, "Final model"},
      {TieMethod::breslow, "Breslow"},
      {TieMethod::efron, "Efron"},
  };
  RobustnessResult result;
  for (const auto& [ties, label] : methods) {
    LadderEntry entry;
    entry.label = label;
    entry.spec = final_spec;
    try {
      entry.fit = fit_cox(projected, final_spec, ties, cfg);
    } catch (const Error& e) {
      entry.error = e.what();
    }
    result.fits.push_back(std::move(entry));
  }
  return result;
}

int select_best(const std::vector<CoxFit>& fits) {
  std::vector<LadderEntry> entries;
  entries.reserve(fits.size());
  for (const auto& f : fits) entries.push_back({"", f.spec, f, ""});
  auto best = best_entry_index(entries);
  if (!best) fail(ErrorCategory::model, "no converged fits to select from");
  return *best;
}

}  // namespace fiscrisk
