#include <algorithm>
#include <cmath>
#include <limits>

#include "stylearena/errors.hpp"
#include "stylearena/rng.hpp"
#include "stylearena/stats.hpp"

namespace stylearena::stats {

double hedges_correction(std::size_t n) {
    if (n < 3) {
        throw ValidationError("Hedges' correction needs n >= 3");
    }
    return 1.0 - 3.0 / (4.0 * static_cast<double>(n - 1) - 1.0);
}

double hedges_g_diffs(std::span<const double> diffs) {
    if (diffs.size() < 3) {
        throw ValidationError("degenerate pair: Hedges' g needs at least 3 pairs");
    }
    const double sd = sample_sd(diffs);
    if (!(sd > 0.0)) {
        throw ValidationError("degenerate pair: differences have zero variance");
    }
    return mean(diffs) / sd * hedges_correction(diffs.size());
}

double hedges_g_paired(const PairedSample& s) {
    const auto d = s.diffs();
    return hedges_g_diffs(d);
}

Interval bootstrap_ci(std::span<const double> data, const Statistic& stat, std::size_t n_boot, double level,
                      std::uint64_t seed) {
    if (data.size() < 2) {
        throw ValidationError("bootstrap_ci needs at least 2 observations");
    }
    if (n_boot == 0 || !(level > 0.0 && level < 1.0)) {
        throw ValidationError("bootstrap_ci: n_boot must be positive and level in (0, 1)");
    }
    Rng rng(seed);
    std::vector<double> resample(data.size());
    std::vector<double> draws;
    draws.reserve(n_boot);
    for (std::size_t b = 0; b < n_boot; ++b) {
        for (auto& v : resample) {
            v = data[rng.below(data.size())];
        }
        const double value = stat(resample);
        if (!std::isnan(value)) {
            draws.push_back(value);
        }
    }
    if (draws.empty()) {
        throw ValidationError("bootstrap_ci: every resample was degenerate");
    }
    std::sort(draws.begin(), draws.end());
    const double alpha = 1.0 - level;
    return {quantile_sorted(draws, alpha / 2.0), quantile_sorted(draws, 1.0 - alpha / 2.0)};
}

EffectSize hedges_g_with_ci(const PairedSample& s, std::size_t n_boot, double level, std::uint64_t seed) {
    const auto d = s.diffs();
    EffectSize out;
    out.g = hedges_g_diffs(d);
    out.n_boot = n_boot;
    out.ci = bootstrap_ci(
        d,
        [](std::span<const double> r) {
            const double sd = sample_sd(r);
            if (!(sd > 0.0)) {
                return std::numeric_limits<double>::quiet_NaN();
            }
            return mean(r) / sd * hedges_correction(r.size());
        },
        n_boot, level, seed);
    out.ci_excludes_point = out.g < out.ci.low || out.g > out.ci.high;
    return out;
}

}  // namespace stylearena::stats
