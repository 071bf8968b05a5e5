#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "mfoe/image.hpp"

namespace mfoe {

struct Measurement {
    std::vector<double> values; // complex data stored interleaved re/im
    double noise_sigma = 0.0;
};

// Linear measurement operator H with exact adjoint and a cached power-
// iteration estimate of ||H||_2. Immutable; apply/adjoint are pure.
class ForwardOperator {
  public:
    virtual ~ForwardOperator() = default;

    virtual std::string kind() const = 0;
    virtual int image_rows() const = 0;
    virtual int image_cols() const = 0;
    virtual std::size_t measurement_size() const = 0;

    virtual std::vector<double> apply(const Image& x) const = 0;
    virtual Image adjoint(std::span<const double> v) const = 0;

    double norm_estimate() const; // computed once, then cached

  private:
    // behind a pointer so operators stay movable; sharing the cache across
    // copies is sound because the estimate is deterministic
    struct NormCache {
        std::once_flag once;
        double value = 0.0;
    };
    std::shared_ptr<NormCache> norm_cache_ = std::make_shared<NormCache>();
};

// Power iteration on H^T H over images; Rayleigh-quotient convergence check.
double estimate_norm(const ForwardOperator& op, double rel_tol = 1e-6, int max_iter = 2000,
                     int* iterations = nullptr);

class IdentityOp final : public ForwardOperator {
  public:
    IdentityOp(int rows, int cols);
    std::string kind() const override { return "identity"; }
    int image_rows() const override { return rows_; }
    int image_cols() const override { return cols_; }
    std::size_t measurement_size() const override {
        return static_cast<std::size_t>(rows_) * cols_;
    }
    std::vector<double> apply(const Image& x) const override;
    Image adjoint(std::span<const double> v) const override;

  private:
    int rows_, cols_;
};

// Zero-padded convolution with an arbitrary kernel (true convolution; the
// adjoint is the matching correlation).
class BlurOp final : public ForwardOperator {
  public:
    BlurOp(int rows, int cols, Image kernel);
    std::string kind() const override { return "blur"; }
    int image_rows() const override { return rows_; }
    int image_cols() const override { return cols_; }
    std::size_t measurement_size() const override {
        return static_cast<std::size_t>(rows_) * cols_;
    }
    std::vector<double> apply(const Image& x) const override;
    Image adjoint(std::span<const double> v) const override;
    const Image& kernel() const { return kernel_; }

  private:
    int rows_, cols_;
    Image kernel_;
};

// Cartesian column mask in fftshifted coordinates (center column n/2 is the
// zero frequency): floor(n*m_cf) contiguous central columns always kept, the
// rest drawn uniformly without replacement (seeded) up to floor(n/m_acc).
std::vector<int> build_mri_mask(int n, double m_acc, double m_cf, std::uint64_t seed);

// Single-coil CS-MRI: orthonormal 2-D DFT of a real n x n image restricted to
// masked k-space columns; measurements interleave re/im per (column, row).
class MriOp final : public ForwardOperator {
  public:
    MriOp(int n, std::vector<int> mask_columns);
    std::string kind() const override { return "mri"; }
    int image_rows() const override { return n_; }
    int image_cols() const override { return n_; }
    std::size_t measurement_size() const override { return 2 * mask_.size() * n_; }
    std::vector<double> apply(const Image& x) const override;
    Image adjoint(std::span<const double> v) const override;
    const std::vector<int>& mask() const { return mask_; }

  private:
    int n_;
    std::vector<int> mask_; // shifted column indices, sorted
};

// Parallel-beam Radon transform: ray-driven line integrals with bilinear
// interpolation at unit spacing along rays; detectors at unit pitch centered
// on the image. back-projection is the exact adjoint of this discretization.
class CtOp final : public ForwardOperator {
  public:
    CtOp(int n, std::vector<double> angles, int detectors);
    std::string kind() const override { return "ct"; }
    int image_rows() const override { return n_; }
    int image_cols() const override { return n_; }
    std::size_t measurement_size() const override { return angles_.size() * detectors_; }
    std::vector<double> apply(const Image& x) const override;
    Image adjoint(std::span<const double> v) const override;
    const std::vector<double>& angles() const { return angles_; }
    int detectors() const { return detectors_; }

    // Ram-Lak filtered back projection (solver initialization only)
    Image fbp(std::span<const double> sinogram) const;

  private:
    int n_;
    std::vector<double> angles_;
    int detectors_;
};

inline std::vector<double> radon(const CtOp& op, const Image& x) { return op.apply(x); }
inline Image back_project(const CtOp& op, std::span<const double> sino) {
    return op.adjoint(sino);
}

// y = Hx + w with w ~ N(0, sigma_w I), seeded.
Measurement simulate(const ForwardOperator& op, const Image& x_clean, double sigma_w,
                     std::uint64_t seed);

// uniformly spaced angles over [0, pi)
std::vector<double> uniform_angles(int count);

} // namespace mfoe
