#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fiscrisk/complexity.hpp"
#include "fiscrisk/errors.hpp"
#include "fiscrisk/ladder.hpp"
#include "fiscrisk/panel.hpp"
#include "fiscrisk/report.hpp"
#include "fiscrisk/simgen.hpp"
#include "fiscrisk/survival.hpp"

#include <nlohmann/json.hpp>
#include <sstream>

namespace py = pybind11;
using namespace fiscrisk;

namespace {

TieMethod ties_arg(const std::string& name) { return tie_method_from_string(name); }

}  // namespace

PYBIND11_MODULE(_fiscrisk, m) {
  m.doc() = "Survival analysis of fiscal crises with economic complexity "
            "covariates: spell construction, ECI scores, Cox fits with tie "
            "corrections, the AIC model ladder, and simulation experiments.";

  py::register_exception<Error>(m, "FiscriskError");

  // --- panel ---
  py::class_<PanelRow>(m, "PanelRow")
      .def_readonly("country", &PanelRow::country)
      .def_readonly("year", &PanelRow::year)
      .def_readonly("crisis", &PanelRow::crisis)
      .def_readonly("growth", &PanelRow::growth)
      .def_readonly("interest", &PanelRow::interest)
      .def_readonly("rqe", &PanelRow::rqe)
      .def_readonly("rle", &PanelRow::rle);

  py::class_<PanelReport>(m, "PanelReport")
      .def_readonly("n_rows", &PanelReport::n_rows)
      .def_readonly("missing_by_column", &PanelReport::missing_by_column);

  py::class_<Panel>(m, "Panel")
      .def_readonly("rows", &Panel::rows)
      .def_readonly("report", &Panel::report);

  py::class_<PanelSchema>(m, "PanelSchema")
      .def(py::init<>())
      .def_readwrite("columns", &PanelSchema::columns);

  m.def("load_panel", &load_panel_file, py::arg("path"),
        py::arg("schema") = PanelSchema{},
        "Load a country-year panel CSV (country,year,crisis,growth,interest,rqe,rle).");
  m.def("load_panel_string", [](const std::string& text) {
    std::istringstream in(text);
    return load_panel(in, PanelSchema{}, "<string>");
  });

  py::class_<Spell>(m, "Spell")
      .def(py::init([](std::string subject, int entry, int exit, bool event,
                       Eigen::VectorXd covariates) {
             return Spell{std::move(subject), entry, exit, event,
                          std::move(covariates)};
           }),
           py::arg("subject"), py::arg("entry"), py::arg("exit"),
           py::arg("event"), py::arg("covariates") = Eigen::VectorXd())
      .def_readonly("subject", &Spell::subject)
      .def_readonly("entry", &Spell::entry)
      .def_readonly("exit", &Spell::exit)
      .def_readonly("event", &Spell::event)
      .def_readonly("covariates", &Spell::covariates)
      .def_property_readonly("duration", &Spell::duration);

  py::class_<SpellSet>(m, "SpellSet")
      .def(py::init([](std::vector<Spell> spells,
                       std::vector<std::string> predictor_names) {
             return SpellSet{std::move(spells), std::move(predictor_names)};
           }),
           py::arg("spells"), py::arg("predictor_names"))
      .def_readonly("spells", &SpellSet::spells)
      .def_readonly("predictor_names", &SpellSet::predictor_names)
      .def_property_readonly("n_events", &SpellSet::n_events);

  py::class_<SpellConfig>(m, "SpellConfig")
      .def(py::init<>())
      .def_readwrite("window_start", &SpellConfig::window_start)
      .def_readwrite("window_end", &SpellConfig::window_end)
      .def_readwrite("reentry_gap", &SpellConfig::reentry_gap)
      .def_readwrite("covariate_lag", &SpellConfig::covariate_lag);

  m.def("build_spells",
        [](const Panel& panel, const SpellConfig& cfg) {
          return build_spells(panel, cfg);
        },
        py::arg("panel"), py::arg("config") = SpellConfig{});

  m.def("attach_covariates",
        [](const SpellSet& spells, const Panel& panel, const EciMap& eci,
           const ModelSpec& spec, const SpellConfig& cfg) {
          AttachReport report;
          SpellSet out = attach_covariates(spells, panel, eci, spec, cfg, &report);
          return py::make_tuple(out, report.dropped);
        },
        py::arg("spells"), py::arg("panel"), py::arg("eci"), py::arg("spec"),
        py::arg("config") = SpellConfig{},
        "Returns (spell_set, dropped_count).");

  // --- complexity ---
  py::class_<ActivityMatrix>(m, "ActivityMatrix")
      .def(py::init<std::vector<std::string>, std::vector<std::string>,
                    Eigen::MatrixXd>(),
           py::arg("countries"), py::arg("activities"), py::arg("values"))
      .def_static("from_csv", &ActivityMatrix::from_csv_file, py::arg("path"))
      .def_readonly("countries", &ActivityMatrix::countries)
      .def_readonly("activities", &ActivityMatrix::activities)
      .def_readonly("values", &ActivityMatrix::values);

  py::class_<EciScores>(m, "EciScores")
      .def_readonly("scores", &EciScores::scores)
      .def_readonly("raw", &EciScores::raw)
      .def_readonly("ranks", &EciScores::ranks)
      .def_readonly("degenerate", &EciScores::degenerate);

  m.def("rca", &rca, py::arg("matrix"));
  m.def("binarize", &binarize, py::arg("rca"), py::arg("threshold") = 1.0,
        py::arg("row_names") = std::vector<std::string>{},
        py::arg("col_names") = std::vector<std::string>{});
  m.def("diversity_ubiquity", &diversity_ubiquity, py::arg("m"));
  m.def("eci_eigen", &eci_eigen, py::arg("m"), py::arg("countries"));
  m.def("method_of_reflections", &method_of_reflections, py::arg("m"),
        py::arg("iterations"));
  m.def("eci_from_raw", &eci_from_raw, py::arg("matrix"),
        py::arg("threshold") = 1.0);

  // --- survival ---
  py::class_<ModelSpec>(m, "ModelSpec")
      .def(py::init([](std::vector<std::string> predictors,
                       std::vector<std::pair<std::string, std::string>> inter) {
             return ModelSpec{std::move(predictors), std::move(inter)};
           }),
           py::arg("predictors"),
           py::arg("interactions") =
               std::vector<std::pair<std::string, std::string>>{})
      .def_readwrite("predictors", &ModelSpec::predictors)
      .def_readwrite("interactions", &ModelSpec::interactions)
      .def("expanded_names", &ModelSpec::expanded_names);

  py::class_<FitConfig>(m, "FitConfig")
      .def(py::init<>())
      .def_readwrite("max_iter", &FitConfig::max_iter)
      .def_readwrite("grad_tol", &FitConfig::grad_tol)
      .def_readwrite("loglik_tol", &FitConfig::loglik_tol)
      .def_readwrite("exact_tie_cap", &FitConfig::exact_tie_cap);

  py::class_<CoxFit>(m, "CoxFit")
      .def_readonly("spec", &CoxFit::spec)
      .def_readonly("beta", &CoxFit::beta)
      .def_readonly("se", &CoxFit::se)
      .def_readonly("cov", &CoxFit::cov)
      .def_readonly("loglik", &CoxFit::loglik)
      .def_readonly("loglik_null", &CoxFit::loglik_null)
      .def_readonly("aic", &CoxFit::aic)
      .def_property_readonly("ties", [](const CoxFit& f) { return std::string(to_string(f.ties)); })
      .def_readonly("n_spells", &CoxFit::n_spells)
      .def_readonly("n_events", &CoxFit::n_events)
      .def_readonly("iterations", &CoxFit::iterations)
      .def_readonly("converged", &CoxFit::converged);

  py::class_<BaselineHazard>(m, "BaselineHazard")
      .def_readonly("times", &BaselineHazard::times)
      .def_readonly("increments", &BaselineHazard::increments);

  m.def("partial_loglik",
        [](const SpellSet& s, const Eigen::VectorXd& beta, const std::string& ties) {
          return partial_loglik(s, beta, ties_arg(ties));
        },
        py::arg("spells"), py::arg("beta"), py::arg("ties") = "efron");
  m.def("score_and_information",
        [](const SpellSet& s, const Eigen::VectorXd& beta, const std::string& ties) {
          return score_and_information(s, beta, ties_arg(ties));
        },
        py::arg("spells"), py::arg("beta"), py::arg("ties") = "efron");
  m.def("fit_cox",
        [](const SpellSet& s, const ModelSpec& spec, const std::string& ties,
           const FitConfig& cfg) { return fit_cox(s, spec, ties_arg(ties), cfg); },
        py::arg("spells"), py::arg("spec"), py::arg("ties") = "efron",
        py::arg("config") = FitConfig{});
  m.def("wald_ci", &wald_ci, py::arg("fit"), py::arg("level") = 0.95);
  m.def("aic", &aic, py::arg("k"), py::arg("loglik"));
  m.def("hazard_ratio", &hazard_ratio, py::arg("beta_j"));
  m.def("wald_p_value", &wald_p_value, py::arg("beta_j"), py::arg("se_j"));
  m.def("significance_stars", &significance_stars, py::arg("p"));
  m.def("baseline_hazard", &baseline_hazard, py::arg("fit"), py::arg("spells"));

  // --- ladder ---
  py::class_<LadderEntry>(m, "LadderEntry")
      .def_readonly("label", &LadderEntry::label)
      .def_readonly("spec", &LadderEntry::spec)
      .def_readonly("fit", &LadderEntry::fit)
      .def_readonly("error", &LadderEntry::error);

  py::class_<LadderResult>(m, "LadderResult")
      .def_readonly("models", &LadderResult::models)
      .def_readonly("best_index", &LadderResult::best_index);

  py::class_<RobustnessResult>(m, "RobustnessResult")
      .def_readonly("fits", &RobustnessResult::fits);

  m.def("standard_specs", &standard_specs);
  m.def("standard_spec_labels", &standard_spec_labels);
  m.def("ladder_union_spec", &ladder_union_spec);
  m.def("named_spec", &named_spec, py::arg("name"));
  m.def("run_ladder",
        [](const SpellSet& s, const std::string& ties, const FitConfig& cfg) {
          return run_ladder(s, ties_arg(ties), cfg);
        },
        py::arg("spells"), py::arg("ties") = "efron",
        py::arg("config") = FitConfig{});
  m.def("run_robustness",
        [](const SpellSet& s, const ModelSpec& spec, const FitConfig& cfg) {
          return run_robustness(s, spec, cfg);
        },
        py::arg("spells"), py::arg("final_spec"), py::arg("config") = FitConfig{});
  m.def("select_best", &select_best, py::arg("fits"));

  // --- simgen ---
  py::class_<SimParams>(m, "SimParams")
      .def(py::init<>())
      .def_readwrite("n_subjects", &SimParams::n_subjects)
      .def_readwrite("true_beta", &SimParams::true_beta)
      .def_readwrite("baseline_rate", &SimParams::baseline_rate)
      .def_readwrite("censor_horizon", &SimParams::censor_horizon)
      .def_property("covariate_law",
                    [](const SimParams& p) { return std::string(to_string(p.covariate_law)); },
                    [](SimParams& p, const std::string& law) {
                      p.covariate_law = covariate_law_from_string(law);
                    })
      .def_readwrite("seed", &SimParams::seed);

  py::class_<SimReport>(m, "SimReport")
      .def_readonly("replicates", &SimReport::replicates)
      .def_readonly("failed", &SimReport::failed)
      .def_readonly("mean_beta_hat", &SimReport::mean_beta_hat)
      .def_readonly("bias", &SimReport::bias)
      .def_readonly("empirical_coverage", &SimReport::empirical_coverage)
      .def_readonly("rng", &SimReport::rng);

  m.def("simulate_spells", &simulate_spells, py::arg("params"));
  m.def("simulate_from_design",
        [](const Eigen::MatrixXd& design, const std::vector<std::string>& names,
           const Eigen::VectorXd& beta, double rate, double horizon,
           std::uint64_t seed) {
          Rng rng(seed);
          return simulate_from_design(design, names, beta, rate, horizon, rng);
        },
        py::arg("design"), py::arg("names"), py::arg("true_beta"),
        py::arg("rate"), py::arg("horizon"), py::arg("seed"));
  m.def("coverage_experiment",
        [](const SimParams& p, int replicates, const std::string& ties) {
          return coverage_experiment(p, replicates, ties_arg(ties));
        },
        py::arg("params"), py::arg("replicates"), py::arg("ties") = "efron");

  // --- report ---
  m.def("render_regression_table",
        [](const std::vector<CoxFit>& fits, const std::string& format,
           double level) {
          return render_regression_table(fits, table_format_from_string(format),
                                         level);
        },
        py::arg("fits"), py::arg("format") = "markdown", py::arg("level") = 0.95);
  m.def("render_ladder_table",
        [](const LadderResult& ladder, const std::string& format, double level) {
          return render_regression_table(ladder.models,
                                         table_format_from_string(format), level);
        },
        py::arg("ladder"), py::arg("format") = "markdown", py::arg("level") = 0.95);
  m.def("emit_aic_figure_data", &emit_aic_figure_data, py::arg("ladder"));
  m.def("fit_to_json",
        [](const CoxFit& fit, double level) {
          return fit_to_json(fit, level).dump(2);
        },
        py::arg("fit"), py::arg("level") = 0.95);
  m.def("fit_from_json", [](const std::string& text) {
    return fit_from_json(nlohmann::json::parse(text));
  });
}
