#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stylearena/corpus.hpp"
#include "stylearena/embeddings.hpp"
#include "stylearena/report.hpp"
#include "stylearena/rng.hpp"
#include "stylearena/stats.hpp"

namespace stylearena::hypotheses {

// Notation: C = control texts, D = o4mini drafts, E = human post-edits.
// own(x)         mean cosine of x to its author's two controls
// llm_others(x)  mean over other participants q of the mean cosine of x to
//                q's drafts (each other participant weighs once)
// homog(X)       per pid, mean over other participants q of the mean cosine
//                between the pid's X texts and q's X texts
//
// H1a   task  own(E) vs own(D)
// H1b   task  llm_others(E) vs llm_others(D)
// H1a'  task  own(E) vs llm_others(E)
// H1c   pid   mean llm_others(C) vs mean llm_others(E)
// H2a   task  cos(E, D) vs own(E)
// H2b   pid   homog(E) vs homog(D)
// H2c   pid   homog(E) vs homog(C)
// H3    rmcorr of perceived similarity (Likert mean) vs own(x) over drafts
//       and post-edits, grouped by pid.

struct HypothesisRow {
    std::string name;
    std::string unit;  // "task" or "participant"
    std::string a;
    std::string b;
    std::size_t n = 0;
    double mean_a = 0.0;
    double mean_b = 0.0;
    stats::TestResult perm;
    stats::EffectSize effect;
    double p_bh = 1.0;
    bool bh_rejected = false;
};

struct Battery {
    std::vector<HypothesisRow> rows;  // H1a, H1b, H1a', H1c, H2a, H2b, H2c
    std::optional<stats::RmcorrResult> h3;  // absent without perceived ratings
    double q = 0.05;

    Json to_json() const;
    std::string table1_csv() const;
};

struct BatteryOptions {
    std::size_t n_perm = 10000;
    std::size_t n_boot = 1000;
    double q = 0.05;
};

/// Runs the seven-hypothesis battery with BH-FDR over the seven, plus H3.
/// Throws ValidationError when an embedding is missing.
Battery run_battery(const StudyCorpus& corpus, const EmbeddingTable& embeddings, const RngPolicy& rng,
                    const BatteryOptions& options = {});

}  // namespace stylearena::hypotheses
