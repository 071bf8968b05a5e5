#include "mfoe/gridsearch.hpp"

#include <algorithm>
#include <cmath>

#include "mfoe/errors.hpp"

namespace mfoe {

namespace {

std::vector<double> log_grid(double lo, double hi, int n) {
    if (!(lo > 0.0) || !(hi > 0.0)) throw ConfigError("grid_search: bounds must be positive");
    if (hi < lo) throw ConfigError("grid_search: upper bound below lower bound");
    if (n < 1) throw ConfigError("grid_search: grid size must be >= 1");
    if (n == 1 || hi == lo) return {lo};
    std::vector<double> g(n);
    const double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < n; ++i)
        g[i] = std::exp(llo + (lhi - llo) * i / (n - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

struct Incumbent {
    double lambda = 0.0, sigma = 0.0, score = -std::numeric_limits<double>::infinity();
    int li = -1, si = -1;
};

void sweep(const GridObjective& score, const std::vector<double>& lambdas,
           const std::vector<double>& sigmas, Incumbent& best,
           std::vector<std::array<double, 3>>& log) {
    for (std::size_t li = 0; li < lambdas.size(); ++li) {
        for (std::size_t si = 0; si < sigmas.size(); ++si) {
            const double s = score(lambdas[li], sigmas[si]);
            log.push_back({lambdas[li], sigmas[si], s});
            // strict improvement keeps the first (smallest lambda, then sigma)
            if (s > best.score) {
                best = {lambdas[li], sigmas[si], s, static_cast<int>(li), static_cast<int>(si)};
            }
        }
    }
}

} // namespace

GridSearchResult grid_search(const GridObjective& score, double lambda_min, double lambda_max,
                             double sigma_min, double sigma_max, int coarse, int fine,
                             bool tune_sigma) {
    const auto coarse_l = log_grid(lambda_min, lambda_max, coarse);
    const auto coarse_s =
        tune_sigma ? log_grid(sigma_min, sigma_max, coarse) : std::vector<double>{sigma_min};

    GridSearchResult result;
    Incumbent best;
    sweep(score, coarse_l, coarse_s, best, result.evaluations);

    // refine over one coarse cell on each side of the incumbent
    const auto bracket = [](const std::vector<double>& g, int i) {
        const double lo = g[static_cast<std::size_t>(std::max(i - 1, 0))];
        const double hi = g[static_cast<std::size_t>(
            std::min<int>(i + 1, static_cast<int>(g.size()) - 1))];
        return std::pair<double, double>{lo, hi};
    };
    const auto [llo, lhi] = bracket(coarse_l, best.li);
    const auto fine_l = log_grid(llo, lhi, fine);
    std::vector<double> fine_s{best.sigma};
    if (tune_sigma && coarse_s.size() > 1) {
        const auto [slo, shi] = bracket(coarse_s, best.si);
        fine_s = log_grid(slo, shi, fine);
    }
    sweep(score, fine_l, fine_s, best, result.evaluations);

    result.lambda = best.lambda;
    result.sigma = best.sigma;
    result.score = best.score;
    return result;
}

} // namespace mfoe
