#include <algorithm>
#include <cmath>
#include <numeric>

#include "stylearena/errors.hpp"
#include "stylearena/rng.hpp"
#include "stylearena/stats.hpp"

namespace stylearena::stats {

namespace {

// Sums reaching the observed |sum| within this relative slack count as ties,
// so that sign patterns equal in exact arithmetic are not lost to rounding.
constexpr double kTieSlack = 1e-12;

bool at_least_as_extreme(double perm_sum, double threshold) { return std::fabs(perm_sum) >= threshold; }

double tie_threshold(std::span<const double> diffs, double observed_sum) {
    double scale = 0.0;
    for (double d : diffs) {
        scale += std::fabs(d);
    }
    return std::fabs(observed_sum) - kTieSlack * scale;
}

}  // namespace

double exact_sign_flip_p(std::span<const double> diffs) {
    const std::size_t n = diffs.size();
    if (n == 0 || n > 30) {
        throw ValidationError("exact sign-flip enumeration supports 1..30 pairs");
    }
    const double observed = std::accumulate(diffs.begin(), diffs.end(), 0.0);
    const double threshold = tie_threshold(diffs, observed);
    const std::uint64_t patterns = std::uint64_t{1} << n;
    std::uint64_t count = 0;
    for (std::uint64_t mask = 0; mask < patterns; ++mask) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sum += ((mask >> i) & 1U) ? -diffs[i] : diffs[i];
        }
        if (at_least_as_extreme(sum, threshold)) {
            ++count;
        }
    }
    return static_cast<double>(count) / static_cast<double>(patterns);
}

TestResult perm_test_paired(const PairedSample& s, std::size_t n_perm, std::uint64_t seed, PermMode mode) {
    const std::vector<double> d = s.diffs();
    const std::size_t n = d.size();
    TestResult result;
    result.seed = seed;
    result.statistic = mean(d);

    if (std::all_of(d.begin(), d.end(), [](double v) { return v == 0.0; })) {
        result.p_value = 1.0;
        result.degenerate = true;
        result.n_perm = n_perm;
        return result;
    }

    const bool fits = n < 63 && (std::uint64_t{1} << n) <= n_perm;
    const bool exact = mode == PermMode::Exact || (mode == PermMode::Auto && fits);
    if (exact) {
        result.exact = true;
        result.n_perm = std::size_t{1} << n;
        result.p_value = exact_sign_flip_p(d);
        return result;
    }
    if (n_perm == 0) {
        throw ValidationError("perm_test_paired: n_perm must be positive");
    }

    const double observed = std::accumulate(d.begin(), d.end(), 0.0);
    const double threshold = tie_threshold(d, observed);
    Rng rng(seed);
    std::size_t count = 0;
    for (std::size_t draw = 0; draw < n_perm; ++draw) {
        double sum = 0.0;
        for (double v : d) {
            sum += rng.coin() ? -v : v;
        }
        if (at_least_as_extreme(sum, threshold)) {
            ++count;
        }
    }
    result.n_perm = n_perm;
    result.p_value = static_cast<double>(1 + count) / static_cast<double>(n_perm + 1);
    return result;
}

}  // namespace stylearena::stats
