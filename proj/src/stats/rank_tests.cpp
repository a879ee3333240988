#include <algorithm>
#include <cmath>
#include <numeric>

#include "stylearena/errors.hpp"
#include "stylearena/stats.hpp"

namespace stylearena::stats {

std::vector<double> midranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i + 1;
        while (j < n && values[order[j]] == values[order[i]]) {
            ++j;
        }
        // Positions i..j-1 hold ranks i+1..j.
        const double rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t t = i; t < j; ++t) {
            ranks[order[t]] = rank;
        }
        i = j;
    }
    return ranks;
}

namespace {

// Sum of (t^3 - t) over tie groups.
double tie_term(std::span<const double> values) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    double term = 0.0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i + 1;
        while (j < sorted.size() && sorted[j] == sorted[i]) {
            ++j;
        }
        const double t = static_cast<double>(j - i);
        term += t * t * t - t;
        i = j;
    }
    return term;
}

}  // namespace

FriedmanResult friedman(const std::vector<std::vector<double>>& rows) {
    const std::size_t n = rows.size();
    if (n < 2) {
        throw ValidationError("friedman: need at least 2 rows");
    }
    const std::size_t k = rows.front().size();
    if (k < 2) {
        throw ValidationError("friedman: need at least 2 columns");
    }
    std::vector<double> rank_sums(k, 0.0);
    double ties = 0.0;
    for (const auto& row : rows) {
        if (row.size() != k) {
            throw ValidationError("friedman: ragged matrix");
        }
        for (double v : row) {
            if (!std::isfinite(v)) {
                throw ValidationError("friedman: non-finite value");
            }
        }
        const auto r = midranks(row);
        for (std::size_t j = 0; j < k; ++j) {
            rank_sums[j] += r[j];
        }
        ties += tie_term(row);
    }
    const double nd = static_cast<double>(n);
    const double kd = static_cast<double>(k);
    const double denom = 1.0 - ties / (nd * (kd * kd * kd - kd));
    if (denom <= 1e-12) {
        throw ValidationError("friedman: degenerate ranks (every row is constant)");
    }
    double sum_sq = 0.0;
    for (double rs : rank_sums) {
        sum_sq += rs * rs;
    }
    const double raw = 12.0 / (nd * kd * (kd + 1.0)) * sum_sq - 3.0 * nd * (kd + 1.0);
    FriedmanResult out;
    out.n = n;
    out.dof = static_cast<int>(k - 1);
    out.chi2 = std::max(0.0, raw / denom);
    out.p = chi2_sf(out.chi2, out.dof);
    return out;
}

WilcoxonResult wilcoxon_signed_rank(const PairedSample& s) {
    std::vector<double> d;
    for (double v : s.diffs()) {
        if (v != 0.0) {
            d.push_back(v);
        }
    }
    WilcoxonResult out;
    out.n_used = d.size();
    if (d.empty()) {
        out.degenerate = true;
        out.p = 1.0;
        return out;
    }
    std::vector<double> magnitude(d.size());
    std::transform(d.begin(), d.end(), magnitude.begin(), [](double v) { return std::fabs(v); });
    const auto ranks = midranks(magnitude);
    double w_plus = 0.0;
    double w_minus = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        (d[i] > 0 ? w_plus : w_minus) += ranks[i];
    }
    out.w = std::min(w_plus, w_minus);
    const std::size_t n = d.size();

    if (n <= 25) {
        // Mid-ranks are multiples of 1/2, so doubled ranks are integers and
        // the null distribution of 2 W+ is a subset-sum count over 2^n signs.
        std::vector<std::size_t> doubled(n);
        std::size_t total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            doubled[i] = static_cast<std::size_t>(std::llround(2.0 * ranks[i]));
            total += doubled[i];
        }
        std::vector<double> counts(total + 1, 0.0);
        counts[0] = 1.0;
        for (std::size_t r : doubled) {
            for (std::size_t v = total; v >= r; --v) {
                counts[v] += counts[v - r];
                if (v == r) {
                    break;
                }
            }
        }
        const auto observed = static_cast<std::size_t>(std::llround(2.0 * w_plus));
        double lower = 0.0;
        double upper = 0.0;
        for (std::size_t v = 0; v <= total; ++v) {
            if (v <= observed) {
                lower += counts[v];
            }
            if (v >= observed) {
                upper += counts[v];
            }
        }
        const double all = std::ldexp(1.0, static_cast<int>(n));
        out.exact = true;
        out.p = std::min(1.0, 2.0 * std::min(lower, upper) / all);
        return out;
    }

    const double nd = static_cast<double>(n);
    const double expected = nd * (nd + 1.0) / 4.0;
    const double variance = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_term(magnitude) / 48.0;
    if (!(variance > 0.0)) {
        out.degenerate = true;
        out.p = 1.0;
        return out;
    }
    const double z = std::max(0.0, std::fabs(w_plus - expected) - 0.5) / std::sqrt(variance);
    out.p = normal_two_sided_p(z);
    return out;
}

}  // namespace stylearena::stats
