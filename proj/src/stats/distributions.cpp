#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "stylearena/errors.hpp"
#include "stylearena/stats.hpp"

namespace stylearena::stats {

PairedSample PairedSample::make(std::vector<double> a, std::vector<double> b) {
    if (a.size() != b.size()) {
        throw ValidationError("paired sample: a and b differ in length");
    }
    if (a.size() < 2) {
        throw ValidationError("paired sample: need at least 2 pairs");
    }
    auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(a.begin(), a.end(), finite) || !std::all_of(b.begin(), b.end(), finite)) {
        throw ValidationError("paired sample: non-finite value");
    }
    return PairedSample(std::move(a), std::move(b));
}

std::vector<double> PairedSample::diffs() const {
    std::vector<double> d(a_.size());
    for (std::size_t i = 0; i < a_.size(); ++i) {
        d[i] = a_[i] - b_[i];
    }
    return d;
}

double student_t_two_sided_p(double t, double dof) {
    if (std::isinf(t)) {
        return 0.0;
    }
    boost::math::students_t dist(dof);
    return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t))));
}

double chi2_sf(double x, double dof) {
    if (x <= 0.0) {
        return 1.0;
    }
    boost::math::chi_squared dist(dof);
    return boost::math::cdf(boost::math::complement(dist, x));
}

double normal_two_sided_p(double z) {
    boost::math::normal dist;
    return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(z))));
}

double normal_quantile(double p) {
    boost::math::normal dist;
    return boost::math::quantile(dist, p);
}

double mean(std::span<const double> x) {
    if (x.empty()) {
        throw ValidationError("mean of an empty sample");
    }
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_sd(std::span<const double> x) {
    if (x.size() < 2) {
        throw ValidationError("standard deviation needs at least 2 values");
    }
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) {
        ss += (v - m) * (v - m);
    }
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

double median(std::span<const double> x) {
    if (x.empty()) {
        throw ValidationError("median of an empty sample");
    }
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    return quantile_sorted(sorted, 0.5);
}

double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) {
        throw ValidationError("quantile of an empty sample");
    }
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace stylearena::stats
