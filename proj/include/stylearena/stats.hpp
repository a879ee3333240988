#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace stylearena::stats {

struct Interval {
    double low = 0.0;
    double high = 0.0;
};

/// Per-task paired observations. Construct through make(); n >= 2, no NaN.
class PairedSample {
public:
    static PairedSample make(std::vector<double> a, std::vector<double> b);

    const std::vector<double>& a() const { return a_; }
    const std::vector<double>& b() const { return b_; }
    std::size_t n() const { return a_.size(); }
    /// a[i] - b[i].
    std::vector<double> diffs() const;
    PairedSample swapped() const { return PairedSample(b_, a_); }

private:
    PairedSample(std::vector<double> a, std::vector<double> b) : a_(std::move(a)), b_(std::move(b)) {}
    std::vector<double> a_;
    std::vector<double> b_;
};

// ---------------------------------------------------------------- permutation

enum class PermMode {
    Auto,        // exact when 2^n <= n_perm, Monte Carlo otherwise
    Exact,
    MonteCarlo,
};

struct TestResult {
    double statistic = 0.0;  // mean(a - b)
    double p_value = 1.0;
    std::size_t n_perm = 0;  // Monte-Carlo draws, or 2^n in exact mode
    bool exact = false;
    bool degenerate = false;  // all differences zero
    std::uint64_t seed = 0;
};

/// Two-sided paired permutation test on the mean difference under random
/// sign flips. Monte-Carlo p uses the add-one estimator
/// (1 + #{|mean*| >= |mean|}) / (n_perm + 1); exact mode enumerates all 2^n
/// sign patterns.
TestResult perm_test_paired(const PairedSample& s, std::size_t n_perm = 10000, std::uint64_t seed = 0,
                            PermMode mode = PermMode::Auto);

/// Exact two-sided sign-flip p-value for a vector of differences (n <= 30).
double exact_sign_flip_p(std::span<const double> diffs);

// ---------------------------------------------------------------- effect size

/// Small-sample correction J = 1 - 3 / (4 (n - 1) - 1).
double hedges_correction(std::size_t n);

/// Paired Hedges' g: mean(d) / sd(d) * J with the n-1 sd. Positive when
/// mean(a) > mean(b). Throws ValidationError("degenerate pair") when sd(d) == 0
/// or n < 3.
double hedges_g_paired(const PairedSample& s);
double hedges_g_diffs(std::span<const double> diffs);

using Statistic = std::function<double(std::span<const double>)>;

/// Percentile bootstrap CI of `stat` over resamples of `data`. Linear
/// interpolation between order statistics. Resamples where `stat` returns
/// NaN are dropped.
Interval bootstrap_ci(std::span<const double> data, const Statistic& stat, std::size_t n_boot = 1000,
                      double level = 0.95, std::uint64_t seed = 0);

/// Linear-interpolation quantile of an ascending-sorted sample.
double quantile_sorted(std::span<const double> sorted, double q);

struct EffectSize {
    double g = 0.0;
    Interval ci;
    std::size_t n_boot = 0;
    /// True when the percentile interval does not contain g; reported, never
    /// silently widened.
    bool ci_excludes_point = false;
};

EffectSize hedges_g_with_ci(const PairedSample& s, std::size_t n_boot = 1000, double level = 0.95,
                            std::uint64_t seed = 0);

// ---------------------------------------------------------------- FDR

struct FdrEntry {
    double p_raw = 0.0;
    double p_bh = 0.0;
    bool rejected = false;
};

struct FdrOutcome {
    std::vector<FdrEntry> entries;  // input order
    double q = 0.05;

    std::size_t n_rejected() const;
};

/// Benjamini-Hochberg step-up. Rejects every hypothesis ranked at or below the
/// largest i with p_(i) <= i q / m; adjusted p by the monotone cummin rule.
FdrOutcome bh_fdr(std::span<const double> pvals, double q = 0.05);

// ---------------------------------------------------------------- rmcorr

struct RmcorrResult {
    double r = 0.0;
    int dof = 0;  // N - k - 1
    double p = 1.0;
    Interval ci;
    std::size_t n_obs = 0;
    std::size_t n_subjects = 0;
};

/// Repeated-measures correlation: Pearson correlation of within-subject
/// centered x and y; p from t = r sqrt(dof / (1 - r^2)); CI by Fisher z with
/// standard error 1 / sqrt(dof - 3) (whole [-1, 1] when dof <= 3).
RmcorrResult rmcorr(std::span<const std::string> subjects, std::span<const double> x,
                    std::span<const double> y, double level = 0.95);

// ---------------------------------------------------------------- rank tests

/// 1-based mid-ranks.
std::vector<double> midranks(std::span<const double> values);

struct FriedmanResult {
    double chi2 = 0.0;
    int dof = 0;
    double p = 1.0;
    std::size_t n = 0;
};

/// Friedman omnibus over an n x k matrix (rows = blocks). Mid-ranks within
/// rows, tie-corrected statistic, chi-square tail with k - 1 dof. Throws
/// ValidationError("degenerate ranks") when every row is constant.
FriedmanResult friedman(const std::vector<std::vector<double>>& rows);

struct WilcoxonResult {
    double w = 0.0;  // min(W+, W-)
    double p = 1.0;
    bool exact = false;
    bool degenerate = false;
    std::size_t n_used = 0;  // after dropping zero differences
};

/// Wilcoxon signed-rank test. Zero differences are dropped; exact null
/// distribution of the mid-rank sum for n <= 25, else normal approximation
/// with tie and continuity corrections. Two-sided.
WilcoxonResult wilcoxon_signed_rank(const PairedSample& s);

// ---------------------------------------------------------------- binomial

struct WinRate {
    std::size_t wins = 0;
    std::size_t ties = 0;
    std::size_t n = 0;
    double rate = 0.0;  // (wins + ties / 2) / n
    Interval ci;        // Clopper-Pearson on the half-win count
    double p_vs_half = 1.0;
};

/// Ties count as half-wins. p = 2 min(P(X <= floor k), P(X >= ceil k)) under
/// Binomial(n, 1/2), capped at 1, with k = wins + ties / 2.
WinRate winrate(std::size_t wins, std::size_t ties, std::size_t n, double level = 0.95);

/// Exact Clopper-Pearson interval for k successes of n; k may be fractional.
Interval clopper_pearson(double k, std::size_t n, double level = 0.95);

/// P(X <= k) and P(X >= k) for X ~ Binomial(n, p).
double binom_cdf(std::size_t k, std::size_t n, double p);
double binom_sf_inclusive(std::size_t k, std::size_t n, double p);

// ---------------------------------------------------------------- distributions

double student_t_two_sided_p(double t, double dof);
double chi2_sf(double x, double dof);
double normal_two_sided_p(double z);
double normal_quantile(double p);

// ---------------------------------------------------------------- descriptive

double mean(std::span<const double> x);
/// Sample standard deviation (n - 1 denominator).
double sample_sd(std::span<const double> x);
double median(std::span<const double> x);

}  // namespace stylearena::stats
