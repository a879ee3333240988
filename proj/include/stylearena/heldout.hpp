#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stylearena/cache_key.hpp"
#include "stylearena/corpus.hpp"
#include "stylearena/embeddings.hpp"
#include "stylearena/report.hpp"
#include "stylearena/rng.hpp"
#include "stylearena/stats.hpp"

namespace stylearena::heldout {

/// Per participant: the control with the lower task_idx is the style demo,
/// the other is the evaluation target that no generator ever sees.
struct HeldOutAssignment {
    std::string pid;
    int demo_task_idx = 0;
    int target_task_idx = 0;
    std::string demo_text_id;
    std::string target_text_id;
};

/// One assignment per pid, in pid order. Throws ValidationError on a
/// task_idx tie between the two controls.
std::vector<HeldOutAssignment> assign_heldout(const StudyCorpus& corpus);

struct HeldOutRow {
    std::string pid;
    int task_idx = 0;
    std::string scenario;
    std::vector<double> similarity;       // per approach, table column order
    std::vector<std::size_t> word_counts;  // per approach
};

struct HeldOutTable {
    std::vector<std::string> approaches;
    std::vector<HeldOutRow> rows;  // (pid, task_idx) ascending

    std::size_t column_index(std::string_view approach) const;
    std::vector<double> column(std::size_t j) const;
    std::vector<double> column(std::string_view approach) const { return column(column_index(approach)); }
    double column_mean(std::size_t j) const;
};

/// Cosine of every approach's draft to the pid's held-out target vector.
/// Throws ValidationError naming (pid, task_idx, approach) on a missing
/// embedding.
HeldOutTable build_heldout_table(const StudyCorpus& corpus, const EmbeddingTable& embeddings,
                                 const std::vector<std::string>& approaches);

struct CeilingEstimate {
    double value = 0.0;
    std::size_t n_pairs = 0;
};

/// Mean over participants of cosine(control 1, control 2).
CeilingEstimate ceiling(const StudyCorpus& corpus, const EmbeddingTable& embeddings);

/// closure(A) = (mean_A - mean_base) / (ceiling - mean_base), in table column
/// order; the baseline column (default o4mini) is 0 by construction.
std::vector<double> gap_closure(const HeldOutTable& table, double ceiling_value,
                                std::string_view baseline = kO4Mini);

struct LeakageCheck {
    bool passed = true;
    std::vector<std::string> failures;
};

/// Asserts over the whole corpus that no target text is ever a demo, that
/// every recorded cache key is the canonical key for (tag, generator, pid,
/// task_idx) of a treatment task, and that no key refers to a target control.
LeakageCheck check_no_leakage(const StudyCorpus& corpus, const std::vector<HeldOutAssignment>& assignments,
                              const std::string& protocol_tag);

// ---------------------------------------------------------------- assessment

struct PairwiseResult {
    std::string a;
    std::string b;
    double mean_a = 0.0;
    double mean_b = 0.0;
    stats::TestResult perm;
    stats::EffectSize effect;
    double p_bh = 1.0;
    bool bh_rejected = false;
    stats::WilcoxonResult wilcoxon;
    bool wilcoxon_agrees = true;  // same decision as the permutation test at alpha
};

struct ScenarioCell {
    std::string scenario;
    std::string approach;
    std::size_t n = 0;
    double mean = 0.0;
    stats::Interval ci;
};

struct ColumnSummary {
    std::string approach;
    double mean = 0.0;
    double median = 0.0;
};

struct FinalAssessment {
    std::vector<ColumnSummary> columns;
    stats::FriedmanResult friedman;
    std::vector<PairwiseResult> pairs;  // (0,1), (0,2), ... (k-2,k-1)
    std::vector<std::pair<std::string, stats::WinRate>> winrates;  // vs human_edit
    std::vector<ScenarioCell> scenarios;
    /// Per scenario: every mimic mean > human mean > o4mini mean.
    std::map<std::string, bool> scenario_ordering;
    double human_threshold_mean = 0.0;
    double human_threshold_median = 0.0;
    std::optional<CeilingEstimate> ceiling;
    std::vector<double> gap_closure;
    std::size_t n_perm = 10000;
    std::size_t n_boot = 1000;
    double q = 0.05;

    Json to_json() const;
    /// One row per pairwise test, in pair order.
    std::string pairs_csv() const;
    /// One row per scenario x approach.
    std::string scenarios_csv() const;
};

struct AssessmentOptions {
    std::size_t n_perm = 10000;
    std::size_t n_boot = 1000;
    double q = 0.05;
    double alpha = 0.05;
};

/// Friedman omnibus, all pairwise permutation tests with g and bootstrap CIs,
/// BH-FDR over the pairs, Wilcoxon sanity check, win rates vs the human
/// post-edit and per-scenario means with bootstrap CIs. Seeds derive from
/// test names, never from execution order. Throws ValidationError("no
/// discrimination ...") when the Friedman ranks are degenerate.
FinalAssessment final_assessment(const HeldOutTable& table, const RngPolicy& rng,
                                 const AssessmentOptions& options = {},
                                 std::optional<CeilingEstimate> ceiling = std::nullopt);

std::string heldout_table_csv(const HeldOutTable& table);

// ---------------------------------------------------------------- draft audit

struct OverlapOutlier {
    std::string pid;
    int task_idx = 0;
    std::string approach;
    double overlap = 0.0;
};

struct ApproachAudit {
    std::string approach;
    std::size_t n = 0;
    double mean_overlap = 0.0;
    double max_overlap = 0.0;
    double mean_words = 0.0;
    std::size_t in_range = 0;
};

struct DraftAudit {
    std::vector<ApproachAudit> approaches;
    std::vector<OverlapOutlier> outliers;
    double threshold = 0.5;

    Json to_json() const;
};

/// Lexical overlap of every mimic draft with its pid's demo text, outliers
/// at or above `threshold`, and 100-200 word range compliance.
DraftAudit audit_drafts(const StudyCorpus& corpus, double threshold = 0.5, std::size_t lo = 100,
                        std::size_t hi = 200);

}  // namespace stylearena::heldout
