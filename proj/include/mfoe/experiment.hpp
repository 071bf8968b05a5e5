#pragma once

#include <string>
#include <vector>

#include "mfoe/analysis.hpp"
#include "mfoe/config.hpp"
#include "mfoe/gridsearch.hpp"
#include "mfoe/regularizer.hpp"

namespace mfoe {

struct MetricRecord {
    std::string id;
    double psnr = 0.0;
    double ssim = 0.0;
    double runtime_s = 0.0;
};

struct ExperimentResult {
    std::vector<MetricRecord> records;
    double mean_psnr = 0.0;
    double mean_ssim = 0.0;
    double mean_runtime_s = 0.0;

    GridSearchResult gridsearch;    // gridsearch task
    double loss_before = 0.0;       // calibrate task
    double loss_after = 0.0;
    SpectralReport spectral;        // analyze task
    std::string manifest_json;      // what was written to manifest.json
};

// Builds the model named by the config (file or builtin).
MfoeModel resolve_model(const ExperimentConfig& cfg);

// Runs the configured task, writes reconstructions (16-bit PGM + f64 array),
// measurements, metrics.csv, summary.json, and manifest.json under
// cfg.output_dir, and returns the in-memory records. Reruns with an equal
// manifest produce byte-identical numerical outputs (runtime fields excepted).
ExperimentResult run_experiment(const ExperimentConfig& cfg);

} // namespace mfoe
