#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "stylearena/corpus.hpp"
#include "stylearena/embeddings.hpp"
#include "stylearena/version.hpp"

namespace stylearena {

/// Desk-scale fixture with planted author structure.
///
/// Every text embedding is `style_signal * (author/approach mix) + length
/// term + noise`, with noise of expected norm `noise`:
///   control      s * a_p
///   o4mini       s * (0.15 a_p + u_llm)
///   human_edit   s * (0.7 a_p + 0.2 u_llm)
///   mimic m      s * (f a_p + (1 - f) (0.8 u_frontier + 0.6 u_m))
/// where a_p is a unit author direction, the u_* are unit approach
/// directions and f is `mimic_fidelity`. Word counts are N(150, 20) for
/// humans and shifted by `30 * length_bias` words for AI approaches (half
/// that for the human post-edit); `length_coupling` leaks the standardized
/// word count into the embedding along a fixed direction.
struct SynthParams {
    std::size_t n_pids = 81;
    std::vector<std::string> scenarios = {kScenarios.begin(), kScenarios.end()};
    std::size_t dim = 512;
    double style_signal = 1.0;
    double length_bias = 0.0;
    double mimic_fidelity = 0.85;
    double length_coupling = 0.25;
    double noise = 1.0;
    std::vector<std::string> mimic_labels = {"mimic_A", "mimic_B"};
    std::uint64_t seed = 0;
    std::string protocol_tag = std::string(kDefaultProtocolTag);  // recorded in mimic cache keys
};

struct SynthCorpus {
    StudyCorpus corpus;
    EmbeddingTable embeddings;
};

/// Deterministic under `seed`. Throws ValidationError on degenerate
/// parameters (fewer than 2 pids, dim < 2, empty scenario list, fidelity
/// outside [0, 1], non-positive noise).
SynthCorpus synth_corpus(const SynthParams& params);

}  // namespace stylearena
