#pragma once

#include <string>
#include <vector>

#include "mfoe/filterbank.hpp"
#include "mfoe/image.hpp"
#include "mfoe/potentials.hpp"

namespace mfoe {

struct MuTableEntry {
    double sigma = 0.0;
    std::vector<double> mu; // one entry per group
};

// K potential groups + filter bank + noise-level table + default strength.
// Immutable after construction; construction validates shape consistency and
// the per-group constraints.
class MfoeModel {
  public:
    MfoeModel(FilterBank fb, std::vector<PotentialGroup> groups,
              std::vector<MuTableEntry> mu_table, double lambda_default);

    const FilterBank& filterbank() const { return fb_; }
    const std::vector<PotentialGroup>& groups() const { return groups_; }
    const std::vector<MuTableEntry>& mu_table() const { return mu_table_; }
    double lambda_default() const { return lambda_; }
    int K() const { return static_cast<int>(groups_.size()); }
    int d() const { return fb_.d(); }
    NormKind norm_kind() const { return groups_.front().kind(); }

    // piecewise-linear in sigma, clamped to the table ends, floored at 1e-9
    std::vector<double> mu_for_sigma(double sigma) const;

    // R(x) and its gradient in one pass (one projection pair per coefficient
    // vector serves both).
    double value_grad(const Image& x, double sigma, Image& grad) const;

  private:
    FilterBank fb_;
    std::vector<PotentialGroup> groups_;
    std::vector<MuTableEntry> mu_table_;
    double lambda_;
};

inline double regularizer_value_grad(const MfoeModel& m, const Image& x, double sigma,
                                     Image& grad) {
    return m.value_grad(x, sigma, grad);
}

inline std::vector<double> mu_for_sigma(const MfoeModel& m, double sigma) {
    return m.mu_for_sigma(sigma);
}

// JSON weight file (stage kernels base64-encoded as little-endian f64).
// Loading validates every invariant; with repair = true, constraint
// violations are fixed by the repair rule instead of rejected.
MfoeModel load_model(const std::string& path, bool repair = false);
void save_model(const MfoeModel& m, const std::string& path);

// In-memory variants of the weight schema (used by the loaders and the hash).
std::string model_to_json(const MfoeModel& m);
MfoeModel model_from_json(const std::string& text, bool repair = false);

// Untrained model: random zero-mean spectrally-normalized bank, random
// feasible groups, default mu table mu_k(sigma) = sigma/100 + 1e-9 at knots
// {0, 0.05, 0.1, 0.15, 0.2}.
MfoeModel make_random_model(int K, int d, NormKind kind, std::uint64_t seed,
                            std::array<int, 3> sizes = {5, 5, 3},
                            std::array<int, 2> channels = {4, 8}, int norm_size = 40);

// Smoothed isotropic TV: K = 1, d = 2, horizontal/vertical finite differences
// (spectrally normalized), Q = 0, l2 norm kind, constant mu.
MfoeModel make_huber_tv_model(double mu, int norm_size = 40);

} // namespace mfoe
