#include "mfoe/config.hpp"

#include <algorithm>

#include "mfoe/errors.hpp"

namespace mfoe {

ExperimentConfig parse_experiment_config(const toml::Table& t) {
    ExperimentConfig c;
    c.task = t.get_string("experiment.task");
    c.output_dir = t.get_string_or("experiment.output", "out");
    if (t.has("experiment.seed")) {
        c.seed = static_cast<std::uint64_t>(t.get_integer("experiment.seed"));
        c.has_seed = true;
    }
    c.threads = static_cast<int>(t.get_integer_or("experiment.threads", 1));

    c.model_path = t.get_string_or("model.path", "");
    c.model_builtin = t.get_string_or("model.builtin", "");
    c.model_repair = t.get_bool_or("model.repair", false);
    c.model_mu = t.get_number_or("model.mu", 1e-3);
    c.model_K = static_cast<int>(t.get_integer_or("model.K", 15));
    c.model_d = static_cast<int>(t.get_integer_or("model.d", 4));
    c.model_norm_kind = t.get_string_or("model.norm_kind", "linf");

    if (t.has("data.images")) c.images = t.get_string_array("data.images");

    c.sigma_w = t.get_number_or("noise.sigma_w", 0.0);
    c.lambda = t.get_number_or("regularizer.lambda", -1.0);
    c.sigma = t.get_number_or("regularizer.sigma", -1.0);

    c.solver.tolerance = t.get_number_or("solver.tolerance", 1e-5);
    c.solver.max_iterations = static_cast<int>(t.get_integer_or("solver.max_iterations", 1000));
    c.solver.step = t.get_number_or("solver.step", 0.0);

    c.operator_kind = t.get_string_or("operator.kind", "denoise");
    c.blur_kernel = t.get_string_or("operator.kernel", "");
    c.mri_acceleration = t.get_number_or("operator.acceleration", 4.0);
    c.mri_center_fraction = t.get_number_or("operator.center_fraction", 0.08);
    c.ct_angle_count = static_cast<int>(t.get_integer_or("operator.angles", 60));
    c.ct_detectors = static_cast<int>(t.get_integer_or("operator.detectors", 256));

    c.gs_lambda_min = t.get_number_or("gridsearch.lambda_min", 1e-3);
    c.gs_lambda_max = t.get_number_or("gridsearch.lambda_max", 10.0);
    c.gs_sigma_min = t.get_number_or("gridsearch.sigma_min", 0.01);
    c.gs_sigma_max = t.get_number_or("gridsearch.sigma_max", 0.2);
    c.gs_coarse = static_cast<int>(t.get_integer_or("gridsearch.coarse", 5));
    c.gs_fine = static_cast<int>(t.get_integer_or("gridsearch.fine", 5));
    c.gs_tune_sigma = t.get_bool_or("gridsearch.tune_sigma", true);

    if (t.has("calibrate.parameters"))
        c.cal_parameters = t.get_string_array("calibrate.parameters");
    c.cal_patch_size = static_cast<int>(t.get_integer_or("calibrate.patch_size", 40));
    c.cal_patch_count = static_cast<int>(t.get_integer_or("calibrate.patch_count", 16));
    c.cal_sweeps = static_cast<int>(t.get_integer_or("calibrate.sweeps", 3));

    c.fft_size = static_cast<int>(t.get_integer_or("analyze.fft_size", 1500));
    c.spectral_image_size = static_cast<int>(t.get_integer_or("analyze.image_size", 64));
    c.surface_range = t.get_number_or("analyze.surface_range", 1.0);
    c.surface_samples = static_cast<int>(t.get_integer_or("analyze.surface_samples", 101));

    return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    return parse_experiment_config(toml::parse_file(path));
}

void validate_config(const ExperimentConfig& c) {
    static const std::vector<std::string> tasks{"denoise", "deblur", "mri", "ct",
                                                "analyze", "gridsearch", "calibrate"};
    if (std::find(tasks.begin(), tasks.end(), c.task) == tasks.end())
        throw ConfigError("unknown task \"" + c.task + "\"");

    const bool has_path = !c.model_path.empty();
    const bool has_builtin = !c.model_builtin.empty();
    if (has_path == has_builtin)
        throw ConfigError("config must set exactly one of model.path or model.builtin");
    if (has_builtin && c.model_builtin != "huber-tv" && c.model_builtin != "random")
        throw ConfigError("unknown model.builtin \"" + c.model_builtin +
                          "\" (expected \"huber-tv\" or \"random\")");

    const bool needs_images = c.task != "analyze";
    if (needs_images && c.images.empty())
        throw ConfigError("task \"" + c.task + "\" requires data.images");

    if (c.task == "deblur" && c.blur_kernel.empty())
        throw ConfigError("deblur requires operator.kernel");
    if (c.task == "gridsearch") {
        static const std::vector<std::string> kinds{"denoise", "deblur", "mri", "ct"};
        if (std::find(kinds.begin(), kinds.end(), c.operator_kind) == kinds.end())
            throw ConfigError("unknown operator.kind \"" + c.operator_kind + "\"");
        if (c.operator_kind == "deblur" && c.blur_kernel.empty())
            throw ConfigError("gridsearch over deblur requires operator.kernel");
    }

    if (c.sigma_w < 0.0) throw ConfigError("noise.sigma_w must be nonnegative");
    if (c.threads < 1) throw ConfigError("experiment.threads must be >= 1");

    // any stochastic step makes the seed mandatory
    const bool stochastic = c.sigma_w > 0.0 || c.model_builtin == "random" ||
                            (c.task == "mri" && c.mri_acceleration > 1.0) ||
                            c.task == "calibrate";
    if (stochastic && !c.has_seed)
        throw ConfigError("experiment.seed is required: the run has stochastic steps");
}

} // namespace mfoe
