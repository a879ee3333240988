#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "stylearena/corpus.hpp"
#include "stylearena/embeddings.hpp"
#include "stylearena/linear.hpp"
#include "stylearena/report.hpp"
#include "stylearena/stats.hpp"

namespace stylearena::detect {

struct RowInfo {
    std::string pid;
    int task_idx = 0;
    std::string scenario;
    std::string text_id;
    std::string approach;  // "control" for human rows
};

/// Human rows (label 0) are both controls of every participant; AI rows
/// (label 1) are the four treatment drafts of one approach.
struct LabeledSet {
    std::string approach;
    RowMatrix x;
    std::vector<int> labels;
    std::vector<std::string> groups;  // grouping key per row, the pid
    std::vector<double> lengths;      // word counts
    std::vector<RowInfo> rows;

    std::size_t size() const { return labels.size(); }
    LabeledSet subset(std::span<const std::size_t> indices) const;
};

LabeledSet build_labeled_set(const StudyCorpus& corpus, const EmbeddingTable& embeddings,
                             const std::string& approach);

struct Fold {
    std::vector<std::string> train_pids;  // sorted
    std::vector<std::string> test_pids;   // sorted
};

struct FoldPlan {
    std::vector<Fold> folds;

    std::size_t k() const { return folds.size(); }
    Json to_json() const;
};

/// Greedy balance: distinct groups sorted by sample count descending then
/// name ascending, each assigned to the fold with the fewest samples so far
/// (lowest index on ties). Throws ValidationError when k < 2 or there are
/// fewer groups than folds.
FoldPlan group_kfold(std::span<const std::string> groups, std::size_t k = 5);

/// Row indices of `set` whose group is in the fold's train or test pid set.
std::vector<std::size_t> rows_for(const LabeledSet& set, const std::vector<std::string>& pids);

/// Mann-Whitney pair count: twice the number of (positive, negative) pairs
/// ordered correctly, plus one per tied pair.
std::uint64_t auc_twice_u(std::span<const double> scores, std::span<const int> labels);

/// P(random positive outscores random negative), ties count 1/2.
/// Computed so that roc_auc(s) == 1 - roc_auc(-s) holds bit for bit.
/// Throws ValidationError when a class is absent.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

struct CvSummary {
    std::vector<double> fold_auc;
    double mean_auc = 0.0;
    double sd_auc = 0.0;  // sample SD over folds
    stats::Interval ci;   // percentile bootstrap of the fold mean
    std::size_t n_boot = 2000;
    std::uint64_t seed = 0;

    Json to_json() const;
};

/// Fits on the train rows, returns scores for the test rows.
using FitScore = std::function<std::vector<double>(const LabeledSet& train, const LabeledSet& test)>;

/// Per-fold train/score/AUC with `fit_score`, summarised with a 2000-sample
/// bootstrap of the fold mean. `test_set` defaults to `train_set` and lets
/// the test rows come from a different approach.
CvSummary cross_validate(const LabeledSet& train_set, const LabeledSet& test_set, const FoldPlan& plan,
                         const FitScore& fit_score, std::uint64_t boot_seed, std::size_t n_boot = 2000);

struct DetectionRun {
    std::string approach;
    FoldPlan plan;
    CvSummary summary;
    std::vector<LinearModel> models;  // per fold

    Json to_json() const;
};

DetectionRun run_detection(const LabeledSet& set, const FoldPlan& plan, const SvmOptions& svm,
                           std::uint64_t boot_seed);

FitScore svm_fit_score(const SvmOptions& options = {});

// ---------------------------------------------------------------- diagnostics

/// B: labels permuted over the whole set before folding.
CvSummary diag_shuffle(const LabeledSet& set, const FoldPlan& plan, std::uint64_t seed, std::uint64_t boot_seed);
/// C: the word count alone, z-scored with train-fold statistics.
CvSummary diag_length_only(const LabeledSet& set, const FoldPlan& plan, std::uint64_t boot_seed);
/// E: PCA(k) fit on train-fold rows only, then the same SVM.
CvSummary diag_pca_svm(const LabeledSet& set, const FoldPlan& plan, std::size_t k, std::uint64_t boot_seed);
/// F: class-weighted L2 logistic regression.
CvSummary diag_l2lr(const LabeledSet& set, const FoldPlan& plan, double c, std::uint64_t boot_seed);
/// D: per fold, train on approach-A rows of train pids, test on approach-B
/// rows of test pids. Both sets must share the same pids and human rows.
CvSummary diag_cross_transfer(const LabeledSet& a, const LabeledSet& b, const FoldPlan& plan,
                              std::uint64_t boot_seed);

struct LeakageAudit {
    std::vector<std::size_t> pid_overlap;  // per fold, true pids in both train and test rows
    bool passed = true;
    std::vector<std::string> failures;

    Json to_json() const;
    std::string overlap_string() const;  // "0/0/0/0/0"
};

/// A: fails on any train/test pid overlap (measured on the rows' true pids),
/// on a plan that is not a partition of the pids, on a human class with
/// other than 2 rows per pid, or when the grouping key is not the pid.
LeakageAudit leakage_audit(const FoldPlan& plan, const LabeledSet& set);

struct CrossTransfer {
    std::string train_approach;
    std::string test_approach;
    CvSummary summary;
};

struct ApproachDiagnostics {
    std::string approach;
    LeakageAudit audit;
    CvSummary full;
    CvSummary shuffle;
    CvSummary length_only;
    CvSummary pca;
    CvSummary l2lr;
};

struct DiagnosticsReport {
    std::vector<ApproachDiagnostics> approaches;
    std::vector<CrossTransfer> cross;
    std::size_t pca_k = 32;
    double l2lr_c = 1e-3;

    bool audits_passed() const;
    Json to_json() const;
    /// Rows A-F, one column per approach.
    std::string table5_csv() const;
};

}  // namespace stylearena::detect
