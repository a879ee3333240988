#include <algorithm>
#include <numeric>

#include "stylearena/errors.hpp"
#include "stylearena/stats.hpp"

namespace stylearena::stats {

std::size_t FdrOutcome::n_rejected() const {
    return static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(), [](const FdrEntry& e) { return e.rejected; }));
}

FdrOutcome bh_fdr(std::span<const double> pvals, double q) {
    FdrOutcome out;
    out.q = q;
    const std::size_t m = pvals.size();
    out.entries.resize(m);
    if (m == 0) {
        return out;
    }
    for (double p : pvals) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw ValidationError("bh_fdr: p-values must lie in [0, 1]");
        }
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pvals[a] < pvals[b]; });

    const double md = static_cast<double>(m);
    std::size_t cutoff = 0;  // number of rejections
    for (std::size_t rank = 1; rank <= m; ++rank) {
        if (pvals[order[rank - 1]] <= static_cast<double>(rank) * q / md) {
            cutoff = rank;
        }
    }
    double running = 1.0;
    for (std::size_t rank = m; rank >= 1; --rank) {
        const std::size_t idx = order[rank - 1];
        running = std::min(running, pvals[idx] * md / static_cast<double>(rank));
        out.entries[idx].p_raw = pvals[idx];
        out.entries[idx].p_bh = running;
        out.entries[idx].rejected = rank <= cutoff;
    }
    return out;
}

}  // namespace stylearena::stats
