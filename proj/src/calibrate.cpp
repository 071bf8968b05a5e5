#include "mfoe/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mfoe/errors.hpp"
#include "mfoe/rng.hpp"

namespace mfoe {

std::vector<Patch> extract_patches(const std::vector<Image>& images, int patch_size, int count,
                                   std::uint64_t seed) {
    if (images.empty()) throw ConfigError("extract_patches: no source images");
    if (patch_size < 1) throw ConfigError("extract_patches: invalid patch size");
    for (const auto& im : images)
        if (im.rows < patch_size || im.cols < patch_size)
            throw ConfigError("extract_patches: image smaller than the patch size");

    Rng rng(mix_seed(seed, 0xbadc0de));
    std::vector<Patch> patches;
    patches.reserve(count);
    for (int i = 0; i < count; ++i) {
        const auto& im = images[i % images.size()];
        const int oy = static_cast<int>(rng.below(im.rows - patch_size + 1));
        const int ox = static_cast<int>(rng.below(im.cols - patch_size + 1));
        Patch p;
        p.clean = Image(patch_size, patch_size);
        for (int y = 0; y < patch_size; ++y)
            for (int x = 0; x < patch_size; ++x) p.clean(y, x) = im(oy + y, ox + x);
        p.sigma_m = 0.2 * (1.0 - rng.uniform()); // in (0, 0.2]
        p.noise_seed = mix_seed(seed, 0x701e0u + static_cast<std::uint64_t>(i));
        patches.push_back(std::move(p));
    }
    return patches;
}

double denoising_loss(const MfoeModel& m, const std::vector<Patch>& patches, double lambda,
                      const SolveConfig& inner) {
    if (patches.empty()) throw ConfigError("denoising_loss: empty patch set");
    double total = 0.0;
    for (const auto& p : patches) {
        if (!(p.sigma_m > 0.0)) throw ConfigError("denoising_loss: sigma_m must be positive");
        Image y = p.clean;
        Rng rng(p.noise_seed);
        const double amp = p.sigma_m * p.noise_scale;
        for (double& v : y.data) v += amp * rng.normal();
        const auto [x, report] = denoise(m, y, lambda, p.sigma_m, inner);
        double l1 = 0.0;
        for (std::size_t i = 0; i < x.data.size(); ++i)
            l1 += std::abs(x.data[i] - p.clean.data[i]);
        total += l1 / std::sqrt(p.sigma_m);
    }
    return total / static_cast<double>(patches.size());
}

namespace {

struct Knobs {
    double lambda;
    double mu_scale = 1.0;
    double tau_scale = 1.0;
    double q_scale = 1.0;
};

MfoeModel rebuild(const MfoeModel& base, const Knobs& k) {
    std::vector<MuTableEntry> table = base.mu_table();
    for (auto& e : table)
        for (double& mu : e.mu) mu = std::max(mu * k.mu_scale, 1e-9);

    std::vector<PotentialGroup> groups;
    groups.reserve(base.groups().size());
    for (std::size_t gi = 0; gi < base.groups().size(); ++gi) {
        const auto& g = base.groups()[gi];
        Eigen::MatrixXd Q = g.Q();
        if (k.q_scale != 1.0) {
            for (Eigen::Index r = 0; r < Q.rows(); ++r)
                for (Eigen::Index c = 0; c < Q.cols(); ++c)
                    if (r != c) Q(r, c) *= k.q_scale;
        }
        groups.push_back(enforce_group_constraints(Q, g.tau() * k.tau_scale,
                                                   std::max(table.front().mu[gi], 1e-9),
                                                   g.kind()));
    }
    return MfoeModel(base.filterbank(), std::move(groups), std::move(table), k.lambda);
}

} // namespace

CalibrateResult calibrate(const MfoeModel& model, const std::vector<Patch>& patches,
                          const std::set<std::string>& parameters, const SolveConfig& inner,
                          int sweeps) {
    static const std::vector<std::string> known{"lambda", "mu", "tau", "q_offdiag"};
    for (const auto& p : parameters)
        if (std::find(known.begin(), known.end(), p) == known.end())
            throw ConfigError("calibrate: unknown parameter \"" + p + "\"");

    Knobs knobs{model.lambda_default()};
    int evaluations = 0;

    const auto loss_at = [&](const Knobs& k) {
        ++evaluations;
        try {
            const MfoeModel candidate = rebuild(model, k);
            const double l = denoising_loss(candidate, patches, k.lambda, inner);
            return std::isfinite(l) ? l : std::numeric_limits<double>::infinity();
        } catch (const NumericError&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    double best_loss = loss_at(knobs);
    if (parameters.empty())
        return {rebuild(model, knobs), best_loss, evaluations};

    const auto set_knob = [](Knobs k, const std::string& name, double value) {
        if (name == "lambda") k.lambda = value;
        else if (name == "mu") k.mu_scale = value;
        else if (name == "tau") k.tau_scale = value;
        else k.q_scale = value;
        return k;
    };
    const auto get_knob = [](const Knobs& k, const std::string& name) {
        if (name == "lambda") return k.lambda;
        if (name == "mu") return k.mu_scale;
        if (name == "tau") return k.tau_scale;
        return k.q_scale;
    };

    constexpr int kEvalsPerCoordinate = 12;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;

    for (int sweep = 0; sweep < sweeps; ++sweep) {
        for (const auto& name : known) {
            if (!parameters.count(name)) continue;
            const double x0 = std::max(get_knob(knobs, name), 1e-8);
            double a = std::log(x0 / 16.0), b = std::log(x0 * 16.0);

            double best_t = std::log(x0);
            double best_f = best_loss;
            int used = 0;
            const auto probe = [&](double t) {
                ++used;
                const double f = loss_at(set_knob(knobs, name, std::exp(t)));
                if (f < best_f) {
                    best_f = f;
                    best_t = t;
                }
                return f;
            };

            double c = b - gr * (b - a), d = a + gr * (b - a);
            double fc = probe(c), fd = probe(d);
            while (used < kEvalsPerCoordinate) {
                if (fc <= fd) {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - gr * (b - a);
                    fc = probe(c);
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + gr * (b - a);
                    fd = probe(d);
                }
            }
            // monotone acceptance: move only if the best probe improved
            if (best_f < best_loss) {
                knobs = set_knob(knobs, name, std::exp(best_t));
                best_loss = best_f;
            }
        }
    }
    return {rebuild(model, knobs), best_loss, evaluations};
}

} // namespace mfoe
