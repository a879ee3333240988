#include "stylearena/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "stylearena/cache_key.hpp"
#include "stylearena/errors.hpp"
#include "stylearena/rng.hpp"
#include "stylearena/text.hpp"
#include "stylearena/version.hpp"

namespace stylearena {

namespace {

using Vec = std::vector<double>;

constexpr double kHumanWords = 150.0;
constexpr double kWordSd = 20.0;
constexpr double kLengthShift = 30.0;

Vec unit_direction(Rng& rng, std::size_t dim) {
    Vec v(dim);
    double norm = 0.0;
    do {
        norm = 0.0;
        for (auto& x : v) {
            x = rng.normal();
            norm += x * x;
        }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (auto& x : v) {
        x /= norm;
    }
    return v;
}

void axpy(Vec& y, double a, const Vec& x) {
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] += a * x[i];
    }
}

std::vector<std::string> build_vocabulary() {
    static constexpr const char* syllables[] = {"ka", "lo", "mi", "ne", "ru", "sa", "te", "vo",
                                                "zi", "pa", "do", "fe", "gu", "hi", "ja", "wo"};
    std::vector<std::string> vocab;
    for (const char* a : syllables) {
        for (const char* b : syllables) {
            vocab.push_back(std::string(a) + b);
        }
    }
    return vocab;
}

std::string make_text(Rng& rng, std::size_t n_words, const std::vector<std::string>& vocab,
                      const std::vector<std::size_t>& preferred) {
    std::string out;
    for (std::size_t i = 0; i < n_words; ++i) {
        const bool use_preferred = !preferred.empty() && rng.uniform() < 0.5;
        const std::size_t idx = use_preferred ? preferred[rng.below(preferred.size())]
                                              : static_cast<std::size_t>(rng.below(vocab.size()));
        if (i > 0) {
            out.push_back(' ');
        }
        out += vocab[idx];
    }
    return out;
}

std::size_t draw_words(Rng& rng, double mean) {
    const double w = std::round(mean + kWordSd * rng.normal());
    return static_cast<std::size_t>(std::max(1.0, w));
}

double likert_item(Rng& rng, double similarity) {
    return std::clamp(std::round(4.0 + 3.0 * similarity + rng.normal()), 1.0, 7.0);
}

double cos_of(const Vec& a, const Vec& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return (na == 0.0 || nb == 0.0) ? 0.0 : dot / std::sqrt(na * nb);
}

}  // namespace

SynthCorpus synth_corpus(const SynthParams& params) {
    if (params.n_pids < 2) {
        throw ValidationError("synth_corpus: n_pids must be at least 2");
    }
    if (params.dim < 2) {
        throw ValidationError("synth_corpus: dim must be at least 2");
    }
    if (params.scenarios.empty()) {
        throw ValidationError("synth_corpus: scenario list is empty");
    }
    if (!(params.mimic_fidelity >= 0.0 && params.mimic_fidelity <= 1.0)) {
        throw ValidationError("synth_corpus: mimic_fidelity must lie in [0, 1]");
    }
    if (!(params.noise > 0.0) || !std::isfinite(params.style_signal) || params.style_signal < 0.0 ||
        !std::isfinite(params.length_bias) || !std::isfinite(params.length_coupling)) {
        throw ValidationError("synth_corpus: noise must be positive and signal terms finite and non-negative");
    }

    const std::size_t dim = params.dim;
    const double s = params.style_signal;
    const double f = params.mimic_fidelity;
    const double noise_sd = params.noise / std::sqrt(static_cast<double>(dim));

    Rng rng(params.seed);
    const Vec u_llm = unit_direction(rng, dim);
    const Vec u_frontier = unit_direction(rng, dim);
    const Vec u_len = unit_direction(rng, dim);
    std::vector<Vec> u_mimic;
    for (std::size_t m = 0; m < params.mimic_labels.size(); ++m) {
        u_mimic.push_back(unit_direction(rng, dim));
    }
    const auto vocab = build_vocabulary();

    SynthCorpus out{StudyCorpus{}, EmbeddingTable(dim, {"synthetic-style-encoder", "synth-v1"})};

    auto finish = [&](Vec v, std::size_t words) {
        axpy(v, params.length_coupling * (static_cast<double>(words) - kHumanWords) / kWordSd, u_len);
        for (auto& x : v) {
            x += noise_sd * rng.normal();
        }
        return v;
    };

    for (std::size_t p = 0; p < params.n_pids; ++p) {
        char pid_buf[16];
        std::snprintf(pid_buf, sizeof(pid_buf), "P%03zu", p + 1);
        const std::string pid = pid_buf;

        const Vec author = unit_direction(rng, dim);
        std::vector<std::size_t> preferred(24);
        for (auto& w : preferred) {
            w = static_cast<std::size_t>(rng.below(vocab.size()));
        }

        // Controls come either first or last in the six-task session.
        const bool controls_first = rng.coin();
        std::vector<int> control_idx = controls_first ? std::vector<int>{0, 1} : std::vector<int>{4, 5};
        std::vector<int> treatment_idx = controls_first ? std::vector<int>{2, 3, 4, 5} : std::vector<int>{0, 1, 2, 3};

        std::vector<std::string> scen = params.scenarios;
        rng.shuffle(std::span<std::string>(scen));

        Participant part;
        part.pid = pid;
        Vec own_centroid(dim, 0.0);
        for (std::size_t c = 0; c < 2; ++c) {
            const std::size_t words = draw_words(rng, kHumanWords);
            Vec v(dim, 0.0);
            axpy(v, s, author);
            v = finish(std::move(v), words);
            axpy(own_centroid, 0.5, v);
            ControlText ct;
            ct.task_idx = control_idx[c];
            ct.scenario = scen[(4 + c) % scen.size()];
            ct.body.text_id = control_text_id(pid, ct.task_idx);
            ct.body.text = make_text(rng, words, vocab, preferred);
            ct.body.word_count = word_count(ct.body.text);
            out.embeddings.insert(ct.body.text_id, std::move(v));
            part.controls[c] = std::move(ct);
        }

        for (std::size_t t = 0; t < 4; ++t) {
            TreatmentTask task;
            task.task_idx = treatment_idx[t];
            task.scenario = scen[t % scen.size()];

            auto add_draft = [&](const std::string& label, Vec v, double word_mean,
                                 const std::vector<std::size_t>& prefs) {
                const std::size_t words = draw_words(rng, word_mean);
                v = finish(std::move(v), words);
                TextRecord rec;
                rec.text_id = draft_text_id(pid, task.task_idx, label);
                rec.text = make_text(rng, words, vocab, prefs);
                rec.word_count = word_count(rec.text);
                const double sim = cos_of(v, own_centroid);
                out.embeddings.insert(rec.text_id, std::move(v));
                task.drafts.emplace(label, std::move(rec));
                return sim;
            };

            Vec o4(dim, 0.0);
            axpy(o4, 0.15 * s, author);
            axpy(o4, s, u_llm);
            const double sim_draft =
                add_draft(std::string(kO4Mini), std::move(o4), kHumanWords + kLengthShift * params.length_bias, {});

            Vec edit(dim, 0.0);
            axpy(edit, 0.7 * s, author);
            axpy(edit, 0.2 * s, u_llm);
            const double sim_edit = add_draft(std::string(kHumanEdit), std::move(edit),
                                              kHumanWords + 0.5 * kLengthShift * params.length_bias, preferred);

            for (std::size_t m = 0; m < params.mimic_labels.size(); ++m) {
                Vec mim(dim, 0.0);
                axpy(mim, f * s, author);
                axpy(mim, (1.0 - f) * 0.8 * s, u_frontier);
                axpy(mim, (1.0 - f) * 0.6 * s, u_mimic[m]);
                add_draft(params.mimic_labels[m], std::move(mim),
                          kHumanWords + kLengthShift * params.length_bias, preferred);
                task.cache_keys.emplace(
                    params.mimic_labels[m],
                    CacheKey{params.protocol_tag, params.mimic_labels[m], pid, task.task_idx}.canonical());
            }

            task.perceived_draft = std::array<double, 2>{likert_item(rng, sim_draft), likert_item(rng, sim_draft)};
            task.perceived_postedit = std::array<double, 2>{likert_item(rng, sim_edit), likert_item(rng, sim_edit)};
            part.treatments.push_back(std::move(task));
        }
        out.corpus.participants.push_back(std::move(part));
    }
    validate_corpus(out.corpus, LoadOptions{.allow_unknown_scenarios = true});
    return out;
}

}  // namespace stylearena
