#include "mfoe/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>
#include <thread>

#include "mfoe/calibrate.hpp"
#include "mfoe/errors.hpp"
#include "mfoe/io.hpp"
#include "mfoe/metrics.hpp"
#include "mfoe/operators.hpp"
#include "mfoe/rng.hpp"
#include "mfoe/solver.hpp"

namespace mfoe {

namespace {

namespace fs = std::filesystem;

std::string image_id(const std::string& path) { return fs::path(path).stem().string(); }

// gridsearch tunes hyperparameters of an underlying forward model
std::string effective_task(const ExperimentConfig& cfg) {
    return cfg.task == "gridsearch" ? cfg.operator_kind : cfg.task;
}

std::unique_ptr<ForwardOperator> build_operator(const ExperimentConfig& cfg, int rows, int cols,
                                                const Image* blur_kernel) {
    const std::string task = effective_task(cfg);
    if (task == "denoise") return std::make_unique<IdentityOp>(rows, cols);
    if (task == "deblur") return std::make_unique<BlurOp>(rows, cols, *blur_kernel);
    if (task == "mri") {
        if (rows != cols) throw ConfigError("mri requires square images");
        // same-size images share one mask; the mask seed folds in n only
        const auto mask = build_mri_mask(rows, cfg.mri_acceleration, cfg.mri_center_fraction,
                                         mix_seed(cfg.seed, 0x3a5c0000u + rows));
        return std::make_unique<MriOp>(rows, mask);
    }
    if (task == "ct") {
        if (rows != cols) throw ConfigError("ct requires square images");
        return std::make_unique<CtOp>(rows, uniform_angles(cfg.ct_angle_count), cfg.ct_detectors);
    }
    throw ConfigError("no operator for task \"" + task + "\"");
}

Image initial_iterate(const ExperimentConfig& cfg, const ForwardOperator& op,
                      const std::vector<double>& y) {
    const std::string task = effective_task(cfg);
    if (task == "denoise" || task == "deblur") {
        Image x0(op.image_rows(), op.image_cols());
        std::copy(y.begin(), y.end(), x0.data.begin());
        return x0;
    }
    if (task == "mri") return op.adjoint(y); // zero-filled reconstruction
    if (task == "ct") return static_cast<const CtOp&>(op).fbp(y);
    throw ConfigError("no initialization for task \"" + task + "\"");
}

Objective make_objective(const ForwardOperator& op, const std::vector<double>& y,
                         const MfoeModel& model, double lambda, double sigma) {
    if (lambda == 0.0) {
        return [&op, &y](const Image& x, Image& grad) {
            const auto hx = op.apply(x);
            std::vector<double> r(hx.size());
            double v = 0.0;
            for (std::size_t i = 0; i < hx.size(); ++i) {
                r[i] = hx[i] - y[i];
                v += r[i] * r[i];
            }
            grad = op.adjoint(r);
            return 0.5 * v;
        };
    }
    return [&op, &y, &model, lambda, sigma](const Image& x, Image& grad) {
        const auto hx = op.apply(x);
        std::vector<double> r(hx.size());
        double v = 0.0;
        for (std::size_t i = 0; i < hx.size(); ++i) {
            r[i] = hx[i] - y[i];
            v += r[i] * r[i];
        }
        grad = op.adjoint(r);
        Image reg_grad;
        const double reg = model.value_grad(x, sigma, reg_grad);
        axpy(lambda, reg_grad, grad);
        return 0.5 * v + lambda * reg;
    };
}

nlohmann::json config_echo(const ExperimentConfig& c) {
    nlohmann::json j;
    j["task"] = c.task;
    j["output"] = c.output_dir;
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    j["model"] = {{"path", c.model_path},       {"builtin", c.model_builtin},
                  {"repair", c.model_repair},   {"mu", c.model_mu},
                  {"K", c.model_K},             {"d", c.model_d},
                  {"norm_kind", c.model_norm_kind}};
    j["images"] = c.images;
    j["noise"] = {{"sigma_w", c.sigma_w}};
    j["regularizer"] = {{"lambda", c.lambda}, {"sigma", c.sigma}};
    j["solver"] = {{"tolerance", c.solver.tolerance},
                   {"max_iterations", c.solver.max_iterations},
                   {"step", c.solver.step}};
    j["operator"] = {{"kind", c.operator_kind},
                     {"kernel", c.blur_kernel},
                     {"acceleration", c.mri_acceleration},
                     {"center_fraction", c.mri_center_fraction},
                     {"angles", c.ct_angle_count},
                     {"detectors", c.ct_detectors}};
    j["gridsearch"] = {{"lambda_min", c.gs_lambda_min}, {"lambda_max", c.gs_lambda_max},
                       {"sigma_min", c.gs_sigma_min},   {"sigma_max", c.gs_sigma_max},
                       {"coarse", c.gs_coarse},         {"fine", c.gs_fine},
                       {"tune_sigma", c.gs_tune_sigma}};
    j["calibrate"] = {{"parameters", c.cal_parameters},
                      {"patch_size", c.cal_patch_size},
                      {"patch_count", c.cal_patch_count},
                      {"sweeps", c.cal_sweeps}};
    j["analyze"] = {{"fft_size", c.fft_size},
                    {"image_size", c.spectral_image_size},
                    {"surface_range", c.surface_range},
                    {"surface_samples", c.surface_samples}};
    return j;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write output file: " + path.string());
    out << text;
    if (!out) throw ConfigError("failed writing output file: " + path.string());
}

std::string metrics_csv(const std::vector<MetricRecord>& records) {
    std::string csv = "id,psnr,ssim,runtime_s\n";
    for (const auto& r : records) {
        csv += r.id;
        csv += ',';
        csv += format_double(r.psnr);
        csv += ',';
        csv += format_double(r.ssim);
        csv += ',';
        csv += format_double(r.runtime_s);
        csv += '\n';
    }
    return csv;
}

// normalized view for PGM export of signed data
Image normalize_for_display(const Image& x) {
    double lo = x.data[0], hi = x.data[0];
    for (double v : x.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    Image out(x.rows, x.cols);
    const double span = hi - lo;
    for (std::size_t i = 0; i < x.data.size(); ++i)
        out.data[i] = span > 0.0 ? (x.data[i] - lo) / span : 0.0;
    return out;
}

struct ReconArtifact {
    MetricRecord record;
    Image recon;
    std::vector<double> measurement;
    SolveReport report;
};

// per-image reconstruction pipeline (pure; artifacts written later in order)
ReconArtifact reconstruct_one(const ExperimentConfig& cfg, const MfoeModel& model,
                              const Image& clean, const std::string& id, std::uint64_t seed_i,
                              const Image* blur_kernel, double lambda_override,
                              double sigma_override) {
    const auto op = build_operator(cfg, clean.rows, clean.cols, blur_kernel);
    const Measurement m = simulate(*op, clean, cfg.sigma_w, seed_i);

    const double lambda = lambda_override >= 0.0 ? lambda_override : model.lambda_default();
    const double sigma = sigma_override >= 0.0 ? sigma_override : cfg.sigma_w;

    SolveConfig sc = cfg.solver;
    const double h_norm = op->norm_estimate();
    const double gamma = sc.step > 0.0 ? sc.step : 1.0 / (h_norm * h_norm + lambda);

    const Objective f = make_objective(*op, m.values, model, lambda, sigma);
    const Image x0 = initial_iterate(cfg, *op, m.values);

    const auto t0 = std::chrono::steady_clock::now();
    auto [x, report] = solve(f, x0, gamma, sc);
    const auto t1 = std::chrono::steady_clock::now();

    ReconArtifact a;
    a.record.id = id;
    a.record.psnr = psnr(x, clean);
    a.record.ssim = ssim(x, clean);
    a.record.runtime_s = std::chrono::duration<double>(t1 - t0).count();
    a.recon = std::move(x);
    a.measurement = std::move(m.values);
    a.report = std::move(report);
    return a;
}

} // namespace

MfoeModel resolve_model(const ExperimentConfig& cfg) {
    if (!cfg.model_path.empty()) return load_model(cfg.model_path, cfg.model_repair);
    if (cfg.model_builtin == "huber-tv") return make_huber_tv_model(cfg.model_mu);
    if (cfg.model_builtin == "random")
        return make_random_model(cfg.model_K, cfg.model_d,
                                 norm_kind_from_string(cfg.model_norm_kind),
                                 mix_seed(cfg.seed, 0x30de1));
    throw ConfigError("config names no model");
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg);
    const MfoeModel model = resolve_model(cfg);

    fs::create_directories(cfg.output_dir);
    const fs::path out(cfg.output_dir);

    ExperimentResult result;

    nlohmann::json manifest;
    manifest["format"] = "mfoe-manifest";
    manifest["version"] = 1;
    manifest["seed"] = cfg.seed;
    manifest["model_hash"] = "fnv1a64:" + fnv1a_hex(model_to_json(model));
    manifest["config"] = config_echo(cfg);

    if (cfg.task == "analyze") {
        const Image resp = impulse_response(model);
        write_array((out / "impulse_response.mfoe").string(), resp);
        write_pgm16(normalize_for_display(resp), (out / "impulse_response.pgm").string());

        const Image mag = frequency_response(model, cfg.fft_size);
        write_array((out / "frequency_response.mfoe").string(), mag);
        write_pgm16(normalize_for_display(mag), (out / "frequency_response.pgm").string());

        result.spectral = min_singular_value(model, cfg.spectral_image_size);
        nlohmann::json sj = {{"sigma_max", result.spectral.sigma_max},
                             {"sigma_min", result.spectral.sigma_min},
                             {"iterations", result.spectral.iterations},
                             {"image_size", result.spectral.image_size}};
        write_text(out / "spectral.json", sj.dump(2) + "\n");

        if (model.d() >= 2) {
            for (int k = 0; k < model.K(); ++k) {
                const Image surf = export_potential_surface(
                    model.groups()[k], -cfg.surface_range, cfg.surface_range,
                    cfg.surface_samples);
                std::string csv;
                for (int i = 0; i < surf.rows; ++i) {
                    for (int j = 0; j < surf.cols; ++j) {
                        if (j) csv += ',';
                        csv += format_double(surf(i, j));
                    }
                    csv += '\n';
                }
                write_text(out / ("potential_surface_" + std::to_string(k) + ".csv"), csv);
            }
        }
        manifest["outputs"] = {"impulse_response", "frequency_response", "spectral"};
        result.manifest_json = manifest.dump(2) + "\n";
        write_text(out / "manifest.json", result.manifest_json);
        return result;
    }

    // data-driven tasks
    std::vector<Image> clean;
    std::vector<std::string> ids;
    for (const auto& p : cfg.images) {
        clean.push_back(read_image(p));
        ids.push_back(image_id(p));
    }

    Image blur_kernel;
    if (effective_task(cfg) == "deblur") blur_kernel = read_kernel_text(cfg.blur_kernel);

    if (cfg.task == "gridsearch") {
        // measurements fixed once per image; score = mean PSNR at (lambda, sigma)
        const GridObjective score = [&](double lambda, double sigma) {
            double acc = 0.0;
            for (std::size_t i = 0; i < clean.size(); ++i) {
                const auto a = reconstruct_one(cfg, model, clean[i], ids[i],
                                               mix_seed(cfg.seed, i), &blur_kernel, lambda,
                                               sigma);
                acc += a.record.psnr;
            }
            return acc / static_cast<double>(clean.size());
        };
        result.gridsearch =
            grid_search(score, cfg.gs_lambda_min, cfg.gs_lambda_max, cfg.gs_sigma_min,
                        cfg.gs_sigma_max, cfg.gs_coarse, cfg.gs_fine, cfg.gs_tune_sigma);

        std::string csv = "lambda,sigma,mean_psnr\n";
        for (const auto& e : result.gridsearch.evaluations)
            csv += format_double(e[0]) + "," + format_double(e[1]) + "," +
                   format_double(e[2]) + "\n";
        write_text(out / "gridsearch.csv", csv);
        nlohmann::json gj = {{"lambda", result.gridsearch.lambda},
                             {"sigma", result.gridsearch.sigma},
                             {"mean_psnr", result.gridsearch.score}};
        write_text(out / "gridsearch.json", gj.dump(2) + "\n");
        result.manifest_json = manifest.dump(2) + "\n";
        write_text(out / "manifest.json", result.manifest_json);
        return result;
    }

    if (cfg.task == "calibrate") {
        const auto patches =
            extract_patches(clean, cfg.cal_patch_size, cfg.cal_patch_count, cfg.seed);
        std::set<std::string> params(cfg.cal_parameters.begin(), cfg.cal_parameters.end());
        result.loss_before = denoising_loss(model, patches, model.lambda_default(), cfg.solver);
        auto cal = calibrate(model, patches, params, cfg.solver, cfg.cal_sweeps);
        result.loss_after = cal.loss;
        save_model(cal.model, (out / "model_calibrated.json").string());
        nlohmann::json cj = {{"loss_before", result.loss_before},
                             {"loss_after", result.loss_after},
                             {"evaluations", cal.evaluations},
                             {"lambda", cal.model.lambda_default()}};
        write_text(out / "calibrate.json", cj.dump(2) + "\n");
        result.manifest_json = manifest.dump(2) + "\n";
        write_text(out / "manifest.json", result.manifest_json);
        return result;
    }

    // reconstruction tasks: worker pool over images, ordered output stage
    std::vector<ReconArtifact> artifacts(clean.size());
    std::atomic<std::size_t> next{0};
    const int workers = std::max(1, std::min<int>(cfg.threads, static_cast<int>(clean.size())));
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                while (true) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= clean.size()) break;
                    artifacts[i] = reconstruct_one(cfg, model, clean[i], ids[i],
                                                   mix_seed(cfg.seed, i), &blur_kernel,
                                                   cfg.lambda, cfg.sigma);
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    double sp = 0.0, ss = 0.0, sr = 0.0;
    for (std::size_t i = 0; i < artifacts.size(); ++i) {
        const auto& a = artifacts[i];
        write_pgm16(a.recon, (out / ("recon_" + a.record.id + ".pgm")).string());
        write_array((out / ("recon_" + a.record.id + ".mfoe")).string(), a.recon);
        write_array((out / ("measurement_" + a.record.id + ".mfoe")).string(),
                    {a.measurement.size()}, a.measurement);
        std::string trace = "iteration,objective\n";
        for (std::size_t k = 0; k < a.report.objective_trace.size(); ++k)
            trace += std::to_string(k) + "," + format_double(a.report.objective_trace[k]) + "\n";
        write_text(out / ("trace_" + a.record.id + ".csv"), trace);
        result.records.push_back(a.record);
        sp += a.record.psnr;
        ss += a.record.ssim;
        sr += a.record.runtime_s;
    }
    const double n = static_cast<double>(artifacts.size());
    result.mean_psnr = sp / n;
    result.mean_ssim = ss / n;
    result.mean_runtime_s = sr / n;

    write_text(out / "metrics.csv", metrics_csv(result.records));
    nlohmann::json summary = {{"mean_psnr", result.mean_psnr},
                              {"mean_ssim", result.mean_ssim},
                              {"mean_runtime_s", result.mean_runtime_s}};
    write_text(out / "summary.json", summary.dump(2) + "\n");

    result.manifest_json = manifest.dump(2) + "\n";
    write_text(out / "manifest.json", result.manifest_json);
    return result;
}

} // namespace mfoe
