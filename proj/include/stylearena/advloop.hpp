#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stylearena/corpus.hpp"
#include "stylearena/detect.hpp"
#include "stylearena/embeddings.hpp"
#include "stylearena/linear.hpp"
#include "stylearena/report.hpp"
#include "stylearena/rng.hpp"

namespace stylearena::advloop {

/// One fold's trained model plus the pid sets it was trained and tested on.
/// Cannot be modified after construction.
class FrozenDetector {
public:
    /// fold_id is 0-based. Throws ValidationError on a bad fold id.
    static FrozenDetector freeze(const detect::DetectionRun& run, std::size_t fold_id,
                                 const std::string& protocol_tag);
    /// Throws ValidationError on a malformed document or overlapping pid sets.
    static FrozenDetector from_json(const Json& j);

    const LinearModel& model() const { return model_; }
    const std::vector<std::string>& train_pids() const { return train_pids_; }
    const std::vector<std::string>& test_pids() const { return test_pids_; }
    const std::string& approach() const { return approach_; }
    std::size_t fold_id() const { return fold_id_; }
    const std::string& protocol_tag() const { return protocol_tag_; }
    std::size_t dim() const { return static_cast<std::size_t>(model_.weights.size()); }

    double margin(std::span<const double> x) const { return model_.margin(x); }
    bool is_test_pid(std::string_view pid) const;
    bool is_train_pid(std::string_view pid) const;

    Json to_json() const;

private:
    FrozenDetector(LinearModel model, std::vector<std::string> train, std::vector<std::string> test,
                   std::string approach, std::size_t fold_id, std::string protocol_tag);

    LinearModel model_;
    std::vector<std::string> train_pids_;
    std::vector<std::string> test_pids_;
    std::string approach_;
    std::size_t fold_id_;
    std::string protocol_tag_;
};

struct AdversarialTarget {
    std::string pid;
    int task_idx = 0;
    std::string scenario;
    std::string text_id;
    std::string text;  // filled when the corpus is available
    double initial_margin = 0.0;

    std::string name() const { return pid + "/" + std::to_string(task_idx); }
};

/// The k AI rows of the detector's test pids with the largest margins,
/// descending, ties by (pid, task_idx). Throws ValidationError("flipping
/// task trivial/infeasible ...") when fewer than k rows have margin > 1.
std::vector<AdversarialTarget> select_targets(const FrozenDetector& det, const detect::LabeledSet& set,
                                              std::size_t k = 5, const StudyCorpus* corpus = nullptr);

struct AuditReport {
    bool passed = true;
    std::vector<std::string> failures;

    Json to_json() const;
};

/// Train and test pid sets disjoint; every target inside the test pids;
/// every initial margin > 1.
AuditReport adversarial_leakage_audit(const FrozenDetector& det, const std::vector<AdversarialTarget>& targets);

// ---------------------------------------------------------------- loop

struct Draft {
    std::string ref;
    std::string text;
    std::optional<std::vector<double>> vector;  // supplied by in-process adversaries
};

struct StepRecord {
    std::size_t iter = 0;
    std::string draft_ref;
    double margin = 0.0;
    bool accepted = true;
    std::vector<std::string> flags;
};

struct AdversaryContext {
    std::string target;
    std::string scenario;
    std::string planning;
    const Draft& current;
    double margin;
    const std::vector<StepRecord>& history;
    std::size_t iteration;
};

/// Step contract: sees the context, the current draft and the scalar margin,
/// never the model.
class Adversary {
public:
    virtual ~Adversary() = default;
    virtual Draft step(const AdversaryContext& context) = 0;
};

/// Resolves a draft to a vector of the detector's dimension.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::vector<double> embed(const Draft& draft) = 0;
};

/// Uses the draft's own vector when present, otherwise looks the ref up in
/// the table. Throws ValidationError when neither is available.
class TableEmbedder : public Embedder {
public:
    explicit TableEmbedder(const EmbeddingTable& table) : table_(table) {}
    std::vector<double> embed(const Draft& draft) override;

private:
    const EmbeddingTable& table_;
};

enum class AcceptPolicy {
    KeepCandidate,  // the candidate always becomes the current draft
    KeepBest,       // only a strictly lower margin replaces the current draft
};

struct Trajectory {
    AdversarialTarget target;
    std::vector<StepRecord> records;  // iteration 0 .. T
    double best_margin = 0.0;
    double final_margin = 0.0;
    std::optional<std::string> error;  // set when the run was truncated

    Json summary_json() const;
};

/// Runs T adversary steps against the frozen detector. Word-range
/// violations are flagged, never fixed. An adversary or embedder failure
/// ends the trajectory early with `error` set.
Trajectory run_loop(const FrozenDetector& det, const AdversarialTarget& target, Adversary& adversary,
                    Embedder& embedder, std::size_t iterations = 20,
                    AcceptPolicy policy = AcceptPolicy::KeepCandidate, const std::string& planning = {});

using AdversaryFactory = std::function<std::unique_ptr<Adversary>(const AdversarialTarget&)>;

/// One thread per target; results are returned in target order.
std::vector<Trajectory> run_targets(const FrozenDetector& det, const std::vector<AdversarialTarget>& targets,
                                    const AdversaryFactory& make_adversary, Embedder& embedder,
                                    std::size_t iterations = 20, AcceptPolicy policy = AcceptPolicy::KeepCandidate);

/// Meta header line, then one line per (target, iteration).
std::string trajectories_jsonl(const std::vector<Trajectory>& trajectories, const Json& meta);

// ---------------------------------------------------------------- adversaries

using MarginOracle = std::function<double(std::span<const double>)>;

struct ReferenceOptions {
    double step_scale = 0.5;  // fraction of (|margin| + 1) to remove per step; 0 = identity
    std::size_t probes = 16;  // random directions per gradient estimate
    double probe_size = 1e-3;  // finite-difference step, relative to |x|
    double max_step = 0.25;    // cap on |dx| relative to |x|
    std::uint64_t seed = 0;
};

/// Test double: estimates the margin gradient from finite differences along
/// random orthonormal directions, moves the current embedding against it and
/// keeps the move only when the queried margin drops. Uses the oracle only.
class ReferenceAdversary : public Adversary {
public:
    ReferenceAdversary(MarginOracle oracle, std::vector<double> start, ReferenceOptions options);
    Draft step(const AdversaryContext& context) override;
    std::size_t queries() const { return queries_; }

private:
    double query(std::span<const double> x);

    MarginOracle oracle_;
    std::vector<double> start_;
    ReferenceOptions options_;
    Rng rng_;
    std::size_t queries_ = 0;
};

/// Runs `sh -c command` once and exchanges line-delimited JSON:
/// {"context","draft","margin","history"} -> {"draft":{"ref","text","v"?}}.
class ExecAdversary : public Adversary {
public:
    explicit ExecAdversary(const std::string& command);
    ~ExecAdversary() override;
    ExecAdversary(const ExecAdversary&) = delete;
    ExecAdversary& operator=(const ExecAdversary&) = delete;

    Draft step(const AdversaryContext& context) override;

private:
    int pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;
};

}  // namespace stylearena::advloop
