#include <algorithm>
#include <cmath>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "stylearena/errors.hpp"
#include "stylearena/stats.hpp"

namespace stylearena::stats {

double binom_cdf(std::size_t k, std::size_t n, double p) {
    if (k >= n) {
        return 1.0;
    }
    boost::math::binomial dist(static_cast<double>(n), p);
    return boost::math::cdf(dist, static_cast<double>(k));
}

double binom_sf_inclusive(std::size_t k, std::size_t n, double p) {
    if (k == 0) {
        return 1.0;
    }
    if (k > n) {
        return 0.0;
    }
    boost::math::binomial dist(static_cast<double>(n), p);
    return boost::math::cdf(boost::math::complement(dist, static_cast<double>(k - 1)));
}

Interval clopper_pearson(double k, std::size_t n, double level) {
    if (n == 0) {
        throw ValidationError("clopper_pearson: n must be positive");
    }
    const double nd = static_cast<double>(n);
    if (!(k >= 0.0 && k <= nd)) {
        throw ValidationError("clopper_pearson: k outside [0, n]");
    }
    const double alpha = 1.0 - level;
    Interval ci;
    ci.low = k <= 0.0 ? 0.0 : boost::math::ibeta_inv(k, nd - k + 1.0, alpha / 2.0);
    ci.high = k >= nd ? 1.0 : boost::math::ibeta_inv(k + 1.0, nd - k, 1.0 - alpha / 2.0);
    return ci;
}

WinRate winrate(std::size_t wins, std::size_t ties, std::size_t n, double level) {
    if (n == 0) {
        throw ValidationError("winrate: n must be positive");
    }
    if (wins + ties > n) {
        throw ValidationError("winrate: wins + ties exceeds n");
    }
    WinRate out;
    out.wins = wins;
    out.ties = ties;
    out.n = n;
    const double k_eff = static_cast<double>(wins) + 0.5 * static_cast<double>(ties);
    out.rate = k_eff / static_cast<double>(n);
    out.ci = clopper_pearson(k_eff, n, level);
    const auto k_floor = static_cast<std::size_t>(std::floor(k_eff));
    const auto k_ceil = static_cast<std::size_t>(std::ceil(k_eff));
    out.p_vs_half = std::min(1.0, 2.0 * std::min(binom_cdf(k_floor, n, 0.5), binom_sf_inclusive(k_ceil, n, 0.5)));
    return out;
}

}  // namespace stylearena::stats
