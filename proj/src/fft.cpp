#include "mfoe/fft.hpp"

#include <cmath>
#include <fftw3.h>
#include <map>
#include <mutex>

namespace mfoe {

namespace {

// FFTW planning is not thread-safe; execution via fftw_execute_dft is. Plans
// are created once per (rows, cols, direction) with FFTW_ESTIMATE (machine-
// deterministic) and FFTW_UNALIGNED so they apply to any buffer.
std::mutex plan_mutex;
std::map<std::tuple<int, int, int>, fftw_plan> plan_cache;

fftw_plan get_plan(int rows, int cols, int sign) {
    std::lock_guard<std::mutex> lock(plan_mutex);
    const auto key = std::make_tuple(rows, cols, sign);
    auto it = plan_cache.find(key);
    if (it != plan_cache.end()) return it->second;
    fftw_complex* tmp = fftw_alloc_complex(static_cast<std::size_t>(rows) * cols);
    fftw_plan p = fftw_plan_dft_2d(rows, cols, tmp, tmp, sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(tmp);
    plan_cache.emplace(key, p);
    return p;
}

} // namespace

void fft2_ortho(std::complex<double>* data, int rows, int cols, bool inverse) {
    fftw_plan p = get_plan(rows, cols, inverse ? FFTW_BACKWARD : FFTW_FORWARD);
    auto* raw = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(p, raw, raw);
    const double scale = 1.0 / std::sqrt(static_cast<double>(rows) * cols);
    const std::size_t n = static_cast<std::size_t>(rows) * cols;
    for (std::size_t i = 0; i < n; ++i) data[i] *= scale;
}

} // namespace mfoe
