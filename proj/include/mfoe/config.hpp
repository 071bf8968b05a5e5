#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mfoe/solver.hpp"
#include "mfoe/toml.hpp"

namespace mfoe {

// Parsed and validated experiment description (TOML; see README for the
// schema). Tasks: denoise, deblur, mri, ct, analyze, gridsearch, calibrate.
struct ExperimentConfig {
    std::string task;
    std::string output_dir = "out";
    std::uint64_t seed = 0;
    bool has_seed = false;
    int threads = 1;

    // model source: a weights file or a builtin ("huber-tv", "random")
    std::string model_path;
    std::string model_builtin;
    bool model_repair = false;
    double model_mu = 1e-3; // huber-tv
    int model_K = 15, model_d = 4;
    std::string model_norm_kind = "linf";

    std::vector<std::string> images;

    double sigma_w = 0.0;
    double lambda = -1.0; // < 0 selects the model default
    double sigma = -1.0;  // < 0 selects sigma_w

    SolveConfig solver = SolveConfig::reconstruction();

    // operator parameters; kind names the forward model used by gridsearch
    std::string operator_kind = "denoise";
    std::string blur_kernel;
    double mri_acceleration = 4.0;
    double mri_center_fraction = 0.08;
    int ct_angle_count = 60;
    int ct_detectors = 256;

    // gridsearch
    double gs_lambda_min = 1e-3, gs_lambda_max = 10.0;
    double gs_sigma_min = 0.01, gs_sigma_max = 0.2;
    int gs_coarse = 5, gs_fine = 5;
    bool gs_tune_sigma = true;

    // calibrate
    std::vector<std::string> cal_parameters{"lambda"};
    int cal_patch_size = 40, cal_patch_count = 16, cal_sweeps = 3;

    // analyze
    int fft_size = 1500;
    int spectral_image_size = 64;
    double surface_range = 1.0;
    int surface_samples = 101;
};

ExperimentConfig parse_experiment_config(const toml::Table& t);
ExperimentConfig load_experiment_config(const std::string& path);

// Task-specific requirements (data present, operator parameters, mandatory
// seed for stochastic steps). Throws ConfigError.
void validate_config(const ExperimentConfig& cfg);

} // namespace mfoe
