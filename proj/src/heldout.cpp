#include "stylearena/heldout.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "stylearena/errors.hpp"
#include "stylearena/text.hpp"

namespace stylearena::heldout {

std::vector<HeldOutAssignment> assign_heldout(const StudyCorpus& corpus) {
    std::vector<HeldOutAssignment> out;
    out.reserve(corpus.participants.size());
    for (const auto& p : corpus.participants) {
        const ControlText* first = &p.controls[0];
        const ControlText* second = &p.controls[1];
        if (first->task_idx == second->task_idx) {
            throw ValidationError("participant " + p.pid + ": both controls share task_idx " +
                                  std::to_string(first->task_idx));
        }
        if (second->task_idx < first->task_idx) {
            std::swap(first, second);
        }
        out.push_back({p.pid, first->task_idx, second->task_idx, first->body.text_id, second->body.text_id});
    }
    return out;
}

std::size_t HeldOutTable::column_index(std::string_view approach) const {
    auto it = std::find(approaches.begin(), approaches.end(), approach);
    if (it == approaches.end()) {
        throw ValidationError("held-out table has no column '" + std::string(approach) + "'");
    }
    return static_cast<std::size_t>(it - approaches.begin());
}

std::vector<double> HeldOutTable::column(std::size_t j) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        out.push_back(r.similarity.at(j));
    }
    return out;
}

double HeldOutTable::column_mean(std::size_t j) const { return stats::mean(column(j)); }

HeldOutTable build_heldout_table(const StudyCorpus& corpus, const EmbeddingTable& embeddings,
                                 const std::vector<std::string>& approaches) {
    if (approaches.empty()) {
        throw ValidationError("build_heldout_table: no approaches requested");
    }
    HeldOutTable table;
    table.approaches = approaches;
    const auto assignments = assign_heldout(corpus);
    for (const auto& as : assignments) {
        const Participant& p = corpus.find(as.pid);
        if (!embeddings.contains(as.target_text_id)) {
            throw ValidationError("missing embedding for held-out target of pid " + as.pid);
        }
        const auto target = embeddings.at(as.target_text_id);
        for (const auto& task : p.treatments) {
            HeldOutRow row;
            row.pid = p.pid;
            row.task_idx = task.task_idx;
            row.scenario = task.scenario;
            for (const auto& approach : approaches) {
                auto it = task.drafts.find(approach);
                if (it == task.drafts.end() || !embeddings.contains(it->second.text_id)) {
                    throw ValidationError("missing embedding for (" + p.pid + ", " + std::to_string(task.task_idx) +
                                          ", " + approach + ")");
                }
                row.similarity.push_back(cosine(embeddings.at(it->second.text_id), target));
                row.word_counts.push_back(it->second.word_count);
            }
            table.rows.push_back(std::move(row));
        }
    }
    std::sort(table.rows.begin(), table.rows.end(), [](const HeldOutRow& x, const HeldOutRow& y) {
        return std::tie(x.pid, x.task_idx) < std::tie(y.pid, y.task_idx);
    });
    return table;
}

CeilingEstimate ceiling(const StudyCorpus& corpus, const EmbeddingTable& embeddings) {
    if (corpus.participants.empty()) {
        throw ValidationError("ceiling: empty corpus");
    }
    double total = 0.0;
    for (const auto& p : corpus.participants) {
        for (const auto& c : p.controls) {
            if (!embeddings.contains(c.body.text_id)) {
                throw ValidationError("ceiling: missing control embedding for pid " + p.pid + " task " +
                                      std::to_string(c.task_idx));
            }
        }
        total += cosine(embeddings.at(p.controls[0].body.text_id), embeddings.at(p.controls[1].body.text_id));
    }
    return {total / static_cast<double>(corpus.participants.size()), corpus.participants.size()};
}

std::vector<double> gap_closure(const HeldOutTable& table, double ceiling_value, std::string_view baseline) {
    const double base = table.column_mean(table.column_index(baseline));
    const double span = ceiling_value - base;
    if (!(span > 1e-12)) {
        throw ValidationError("gap_closure: ceiling must exceed the baseline mean");
    }
    std::vector<double> out;
    for (std::size_t j = 0; j < table.approaches.size(); ++j) {
        out.push_back(table.approaches[j] == baseline ? 0.0 : (table.column_mean(j) - base) / span);
    }
    return out;
}

LeakageCheck check_no_leakage(const StudyCorpus& corpus, const std::vector<HeldOutAssignment>& assignments,
                              const std::string& protocol_tag) {
    LeakageCheck out;
    auto fail = [&](std::string msg) {
        out.passed = false;
        out.failures.push_back(std::move(msg));
    };
    std::set<std::string> targets;
    for (const auto& as : assignments) {
        if (as.demo_text_id == as.target_text_id) {
            fail("pid " + as.pid + ": demo and target are the same text");
        }
        if (as.demo_task_idx >= as.target_task_idx) {
            fail("pid " + as.pid + ": demo does not have the lower task_idx");
        }
        targets.insert(as.target_text_id);
    }
    for (const auto& as : assignments) {
        if (targets.contains(as.demo_text_id)) {
            fail("pid " + as.pid + ": demo text " + as.demo_text_id + " is some participant's target");
        }
    }
    for (const auto& p : corpus.participants) {
        for (const auto& task : p.treatments) {
            for (const auto& [generator, key] : task.cache_keys) {
                for (const auto& c : p.controls) {
                    if (key == CacheKey{protocol_tag, generator, p.pid, c.task_idx}.canonical()) {
                        fail("cache key for " + generator + " refers to control task " + std::to_string(c.task_idx) +
                             " of pid " + p.pid);
                    }
                }
                if (targets.contains(key)) {
                    fail("cache key " + key + " is a target text id");
                }
                const std::string expected = CacheKey{protocol_tag, generator, p.pid, task.task_idx}.canonical();
                if (key != expected) {
                    fail("cache key for (" + p.pid + ", " + std::to_string(task.task_idx) + ", " + generator +
                         ") was not produced under protocol " + protocol_tag);
                }
            }
        }
    }
    return out;
}

DraftAudit audit_drafts(const StudyCorpus& corpus, double threshold, std::size_t lo, std::size_t hi) {
    DraftAudit out;
    out.threshold = threshold;
    const auto assignments = assign_heldout(corpus);
    std::map<std::string, ApproachAudit> per;
    for (std::size_t i = 0; i < corpus.participants.size(); ++i) {
        const auto& p = corpus.participants[i];
        const std::string& demo = p.controls[0].task_idx == assignments[i].demo_task_idx ? p.controls[0].body.text
                                                                                          : p.controls[1].body.text;
        for (const auto& task : p.treatments) {
            for (const auto& [label, rec] : task.drafts) {
                if (label == kO4Mini || label == kHumanEdit) {
                    continue;
                }
                auto& a = per[label];
                a.approach = label;
                const double overlap = lexical_overlap(rec.text, demo);
                ++a.n;
                a.mean_overlap += overlap;
                a.max_overlap = std::max(a.max_overlap, overlap);
                a.mean_words += static_cast<double>(rec.word_count);
                if (rec.word_count >= lo && rec.word_count <= hi) {
                    ++a.in_range;
                }
                if (overlap >= threshold) {
                    out.outliers.push_back({p.pid, task.task_idx, label, overlap});
                }
            }
        }
    }
    for (auto& [label, a] : per) {
        a.mean_overlap /= static_cast<double>(a.n);
        a.mean_words /= static_cast<double>(a.n);
        out.approaches.push_back(a);
    }
    return out;
}

Json DraftAudit::to_json() const {
    Json j;
    j["threshold"] = threshold;
    j["approaches"] = Json::array();
    for (const auto& a : approaches) {
        Json e;
        e["approach"] = a.approach;
        e["n"] = a.n;
        e["mean_overlap"] = a.mean_overlap;
        e["max_overlap"] = a.max_overlap;
        e["mean_words"] = a.mean_words;
        e["in_range"] = a.in_range;
        j["approaches"].push_back(std::move(e));
    }
    j["outliers"] = Json::array();
    for (const auto& o : outliers) {
        Json e;
        e["pid"] = o.pid;
        e["task_idx"] = o.task_idx;
        e["approach"] = o.approach;
        e["overlap"] = o.overlap;
        j["outliers"].push_back(std::move(e));
    }
    return j;
}

}  // namespace stylearena::heldout
