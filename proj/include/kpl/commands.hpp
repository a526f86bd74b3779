#pragma once

#include "kpl/experiment.hpp"

#include <filesystem>

namespace kpl::exp {

/// Each command reads a validated configuration and writes only below `out`
/// (or the configured model directory).

/// train/test CSVs of a toy dataset plus dataset.json.
void run_generate_toy(const ExperimentConfig& cfg, const std::filesystem::path& out);
/// Serialized model and fit_report.json (training MSE, phase timings).
void run_fit(const ExperimentConfig& cfg, const std::filesystem::path& out);
/// predictions.csv for the test inputs on a regular grid.
void run_predict(const ExperimentConfig& cfg, const std::filesystem::path& out);
/// evaluation.json with the test MSE at the observed test locations.
void run_evaluate(const ExperimentConfig& cfg, const std::filesystem::path& out);
/// cv_scores.csv (per fold), cv_summary.csv and best_config.json.
void run_cv(const ExperimentConfig& cfg, const std::filesystem::path& out);
/// robustness_runs.csv (one row per level x repeat x method) and
/// robustness.csv (one row per level x method).
void run_robustness(const ExperimentConfig& cfg, const std::filesystem::path& out);
/// dictionary/ (reusable via dictionary.path), dl_trace.csv and dictlearn_report.json.
void run_dictlearn(const ExperimentConfig& cfg, const std::filesystem::path& out);

}  // namespace kpl::exp
