#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mfoe/image.hpp"

namespace mfoe {

// One zero-padded convolution stage mapping in_ch planes to out_ch planes.
// Kernels act as cross-correlations ("conv" in the deep-learning sense) with
// center ((kh-1)/2, (kw-1)/2) and 'same' output size.
struct ConvStage {
    int out_ch = 0, in_ch = 0, kh = 0, kw = 0;
    std::vector<double> taps; // [((o*in_ch + i)*kh + u)*kw + v]

    ConvStage() = default;
    ConvStage(int out, int in, int h, int w)
        : out_ch(out), in_ch(in), kh(h), kw(w),
          taps(static_cast<std::size_t>(out) * in * h * w, 0.0) {}

    double& at(int o, int i, int u, int v) {
        return taps[((static_cast<std::size_t>(o) * in_ch + i) * kh + u) * kw + v];
    }
    double at(int o, int i, int u, int v) const {
        return taps[((static_cast<std::size_t>(o) * in_ch + i) * kh + u) * kw + v];
    }
};

// K groups of d filter-response channels, same spatial size as the source
// image (zero padding).
struct CoefficientStack {
    int K = 0, d = 0, rows = 0, cols = 0;
    std::vector<double> values; // [((k*d + c)*rows + i)*cols + j]

    CoefficientStack() = default;
    CoefficientStack(int K_, int d_, int r, int c)
        : K(K_), d(d_), rows(r), cols(c),
          values(static_cast<std::size_t>(K_) * d_ * r * c, 0.0) {}

    int channels() const { return K * d; }
    double* channel(int c) { return values.data() + static_cast<std::size_t>(c) * rows * cols; }
    const double* channel(int c) const {
        return values.data() + static_cast<std::size_t>(c) * rows * cols;
    }
};

// The analysis operator W: three chained zero-padded convolutions producing
// K*d channels, times a global spectral scale. Immutable after construction.
class FilterBank {
  public:
    FilterBank(std::array<ConvStage, 3> stages, double spectral_scale, int K, int d);

    int K() const { return K_; }
    int d() const { return d_; }
    const std::array<ConvStage, 3>& stages() const { return stages_; }
    double spectral_scale() const { return scale_; }

    // effective composed kernel footprint: sum of stage sizes minus 2
    int composite_rows() const { return stages_[0].kh + stages_[1].kh + stages_[2].kh - 2; }
    int composite_cols() const { return stages_[0].kw + stages_[1].kw + stages_[2].kw - 2; }
    // center of the composed kernel: stage centers accumulate
    int composite_center_row() const {
        return (stages_[0].kh - 1) / 2 + (stages_[1].kh - 1) / 2 + (stages_[2].kh - 1) / 2;
    }
    int composite_center_col() const {
        return (stages_[0].kw - 1) / 2 + (stages_[1].kw - 1) / 2 + (stages_[2].kw - 1) / 2;
    }

    CoefficientStack apply_W(const Image& x) const;
    Image apply_Wt(const CoefficientStack& c) const;

  private:
    std::array<ConvStage, 3> stages_;
    double scale_;
    int K_, d_;
};

// Effective composed filters (one per output channel), computed by full
// convolution of the stage kernels; includes the spectral scale.
std::vector<std::vector<double>> composed_filters(const FilterBank& fb, int* rows = nullptr,
                                                  int* cols = nullptr);

// Repairs the bank so every composed filter has exactly zero mean: stages 1-2
// are shifted to unit DC gain, then each third-stage kernel slice is shifted
// to zero total mean.
FilterBank project_zero_mean(const FilterBank& fb);

// Power-iteration estimate of ||W||_2 on images of the given size.
double estimate_spectral_norm(const FilterBank& fb, int rows, int cols, double rel_tol = 1e-6,
                              int max_iter = 500, int* iterations = nullptr);

// Rescales spectral_scale so the power-iteration estimate of ||W||_2 equals 1.
FilterBank normalize_spectral(const FilterBank& fb, int rows, int cols);

// Random bank: unit-variance taps, zero-mean projection, spectral
// normalization at norm_size x norm_size (the training patch size).
FilterBank make_random_filterbank(int K, int d, std::uint64_t seed,
                                  std::array<int, 3> sizes = {5, 5, 3},
                                  std::array<int, 2> channels = {4, 8}, int norm_size = 40);

} // namespace mfoe
