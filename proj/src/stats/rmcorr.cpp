#include <algorithm>
#include <cmath>
#include <map>

#include "stylearena/errors.hpp"
#include "stylearena/stats.hpp"

namespace stylearena::stats {

RmcorrResult rmcorr(std::span<const std::string> subjects, std::span<const double> x, std::span<const double> y,
                    double level) {
    const std::size_t n = subjects.size();
    if (x.size() != n || y.size() != n) {
        throw ValidationError("rmcorr: subjects, x and y differ in length");
    }
    std::map<std::string, std::vector<std::size_t>, std::less<>> members;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
            throw ValidationError("rmcorr: non-finite observation for subject " + subjects[i]);
        }
        members[subjects[i]].push_back(i);
    }
    for (const auto& [subject, rows] : members) {
        if (rows.size() < 2) {
            throw ValidationError("rmcorr: subject " + subject + " has fewer than 2 observations");
        }
    }
    const std::size_t k = members.size();
    if (n < k + 2) {
        throw ValidationError("rmcorr: dof = N - k - 1 must be at least 1");
    }

    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (const auto& [subject, rows] : members) {
        double mx = 0.0;
        double my = 0.0;
        for (std::size_t i : rows) {
            mx += x[i];
            my += y[i];
        }
        mx /= static_cast<double>(rows.size());
        my /= static_cast<double>(rows.size());
        for (std::size_t i : rows) {
            const double dx = x[i] - mx;
            const double dy = y[i] - my;
            sxy += dx * dy;
            sxx += dx * dx;
            syy += dy * dy;
        }
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) {
        throw ValidationError("rmcorr: zero within-subject variance");
    }

    RmcorrResult out;
    out.n_obs = n;
    out.n_subjects = k;
    out.dof = static_cast<int>(n - k - 1);
    out.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    const double dof = out.dof;
    if (std::fabs(out.r) >= 1.0) {
        out.p = 0.0;
    } else {
        out.p = student_t_two_sided_p(out.r * std::sqrt(dof / (1.0 - out.r * out.r)), dof);
    }
    if (out.dof <= 3) {
        out.ci = {-1.0, 1.0};
    } else {
        const double z = std::atanh(std::clamp(out.r, -1.0 + 1e-15, 1.0 - 1e-15));
        const double se = 1.0 / std::sqrt(dof - 3.0);
        const double crit = normal_quantile(0.5 + level / 2.0);
        out.ci = {std::tanh(z - crit * se), std::tanh(z + crit * se)};
    }
    return out;
}

}  // namespace stylearena::stats
