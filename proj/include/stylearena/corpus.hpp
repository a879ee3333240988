#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stylearena {

inline constexpr std::string_view kO4Mini = "o4mini";
inline constexpr std::string_view kHumanEdit = "human_edit";

/// The closed set of writing scenarios in the study.
inline constexpr std::array<std::string_view, 8> kScenarios = {
    "thank_you", "condolence", "eulogy", "personal_letter",
    "reassurance", "speech", "apology", "wedding_vows"};

bool is_known_scenario(std::string_view name);

struct TextRecord {
    std::string text_id;
    std::string text;
    std::size_t word_count = 0;
};

struct ControlText {
    int task_idx = 0;
    std::string scenario;  // may be empty; controls carry no required scenario
    TextRecord body;
};

struct TreatmentTask {
    int task_idx = 0;
    std::string scenario;
    /// Approach label -> draft. Always holds kO4Mini and kHumanEdit once
    /// loaded; mimic approaches are added from sidecar files.
    std::map<std::string, TextRecord, std::less<>> drafts;
    /// Approach label -> cache key recorded by the generator (mimics only).
    std::map<std::string, std::string, std::less<>> cache_keys;
    /// The two perceived-similarity Likert items, when surveyed.
    std::optional<std::array<double, 2>> perceived_draft;
    std::optional<std::array<double, 2>> perceived_postedit;

    const TextRecord& draft(std::string_view approach) const;
};

inline double likert_mean(const std::array<double, 2>& items) { return 0.5 * (items[0] + items[1]); }

struct Participant {
    std::string pid;
    std::array<ControlText, 2> controls;  // ordered by task_idx
    std::vector<TreatmentTask> treatments;  // exactly 4, ordered by task_idx
};

/// Participants sorted by pid; immutable once loaded.
struct StudyCorpus {
    std::vector<Participant> participants;

    const Participant& find(std::string_view pid) const;
    std::size_t n_task_observations() const;
    /// All approach labels present on every treatment task, sorted with
    /// kO4Mini and kHumanEdit first and the rest lexicographically.
    std::vector<std::string> approaches() const;
};

struct LoadReport {
    std::size_t n_pids = 0;
    std::size_t n_tasks = 0;
    std::size_t n_mimic_drafts = 0;
};

struct LoadOptions {
    bool allow_unknown_scenarios = false;
};

struct LoadedCorpus {
    StudyCorpus corpus;
    LoadReport report;
};

/// Text identifiers used as keys into the embedding table.
std::string control_text_id(std::string_view pid, int task_idx);
std::string draft_text_id(std::string_view pid, int task_idx, std::string_view approach);

/// Loads every `*.json` participant log in `path` (or the single file at
/// `path`), plus mimic sidecars from `<dir>/mimics/*.jsonl|*.json`.
LoadedCorpus load_corpus(const std::filesystem::path& path, const LoadOptions& options = {});

/// Writes one `<pid>.json` log per participant and one
/// `mimics/<approach>.jsonl` sidecar per mimic approach.
void save_corpus(const StudyCorpus& corpus, const std::filesystem::path& dir);

/// Throws ValidationError unless every participant invariant holds.
void validate_corpus(const StudyCorpus& corpus, const LoadOptions& options = {});

}  // namespace stylearena
