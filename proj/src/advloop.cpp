#include "stylearena/advloop.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "stylearena/errors.hpp"
#include "stylearena/text.hpp"

namespace stylearena::advloop {

namespace {

std::vector<std::string> sorted_unique(std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

}  // namespace

FrozenDetector::FrozenDetector(LinearModel model, std::vector<std::string> train, std::vector<std::string> test,
                               std::string approach, std::size_t fold_id, std::string protocol_tag)
    : model_(std::move(model)),
      train_pids_(sorted_unique(std::move(train))),
      test_pids_(sorted_unique(std::move(test))),
      approach_(std::move(approach)),
      fold_id_(fold_id),
      protocol_tag_(std::move(protocol_tag)) {
    std::vector<std::string> shared;
    std::set_intersection(train_pids_.begin(), train_pids_.end(), test_pids_.begin(), test_pids_.end(),
                          std::back_inserter(shared));
    if (!shared.empty()) {
        throw ValidationError("frozen detector: pid " + shared.front() + " is in both train and test pids");
    }
}

FrozenDetector FrozenDetector::freeze(const detect::DetectionRun& run, std::size_t fold_id,
                                      const std::string& protocol_tag) {
    if (fold_id >= run.models.size() || fold_id >= run.plan.k()) {
        throw ValidationError("fold id " + std::to_string(fold_id) + " out of range for a " +
                              std::to_string(run.plan.k()) + "-fold run (fold ids are 0-based)");
    }
    const auto& fold = run.plan.folds[fold_id];
    return FrozenDetector(run.models[fold_id], fold.train_pids, fold.test_pids, run.approach, fold_id, protocol_tag);
}

FrozenDetector FrozenDetector::from_json(const Json& j) {
    try {
        return FrozenDetector(LinearModel::from_json(j), j.at("train_pids").get<std::vector<std::string>>(),
                              j.at("test_pids").get<std::vector<std::string>>(), j.at("approach").get<std::string>(),
                              j.at("fold_id").get<std::size_t>(), j.at("protocol_tag").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("detector file: ") + e.what());
    }
}

bool FrozenDetector::is_test_pid(std::string_view pid) const {
    return std::binary_search(test_pids_.begin(), test_pids_.end(), pid);
}

bool FrozenDetector::is_train_pid(std::string_view pid) const {
    return std::binary_search(train_pids_.begin(), train_pids_.end(), pid);
}

Json FrozenDetector::to_json() const {
    Json j = model_.to_json();
    j["train_pids"] = train_pids_;
    j["test_pids"] = test_pids_;
    j["protocol_tag"] = protocol_tag_;
    j["approach"] = approach_;
    j["fold_id"] = fold_id_;
    return j;
}

std::vector<AdversarialTarget> select_targets(const FrozenDetector& det, const detect::LabeledSet& set,
                                              std::size_t k, const StudyCorpus* corpus) {
    if (static_cast<std::size_t>(set.x.cols()) != det.dim()) {
        throw ValidationError("select_targets: set dimension does not match the detector");
    }
    std::vector<AdversarialTarget> rows;
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (set.labels[i] != 1 || !det.is_test_pid(set.rows[i].pid)) {
            continue;
        }
        const auto& info = set.rows[i];
        AdversarialTarget t;
        t.pid = info.pid;
        t.task_idx = info.task_idx;
        t.scenario = info.scenario;
        t.text_id = info.text_id;
        const auto row = set.x.row(static_cast<Eigen::Index>(i));
        t.initial_margin = det.margin(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
        if (corpus != nullptr) {
            for (const auto& task : corpus->find(info.pid).treatments) {
                if (task.task_idx == info.task_idx) {
                    t.text = task.draft(det.approach()).text;
                }
            }
        }
        rows.push_back(std::move(t));
    }
    std::sort(rows.begin(), rows.end(), [](const AdversarialTarget& a, const AdversarialTarget& b) {
        if (a.initial_margin != b.initial_margin) {
            return a.initial_margin > b.initial_margin;
        }
        return std::tie(a.pid, a.task_idx) < std::tie(b.pid, b.task_idx);
    });
    const auto decisive = static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [](const auto& t) { return t.initial_margin > 1.0; }));
    if (k == 0 || decisive < k) {
        throw ValidationError("flipping task trivial/infeasible: " + std::to_string(decisive) +
                              " test-fold AI rows with margin > 1, " + std::to_string(k) + " requested");
    }
    rows.resize(k);
    return rows;
}

Json AuditReport::to_json() const {
    Json j;
    j["passed"] = passed;
    j["failures"] = failures;
    return j;
}

AuditReport adversarial_leakage_audit(const FrozenDetector& det, const std::vector<AdversarialTarget>& targets) {
    AuditReport r;
    auto fail = [&](std::string msg) {
        r.passed = false;
        r.failures.push_back(std::move(msg));
    };
    for (const auto& pid : det.train_pids()) {
        if (det.is_test_pid(pid)) {
            fail("train and test pid sets share " + pid);
        }
    }
    for (const auto& t : targets) {
        if (det.is_train_pid(t.pid)) {
            fail("target " + t.name() + ": pid " + t.pid + " is in the training pids");
        }
        if (!det.is_test_pid(t.pid)) {
            fail("target " + t.name() + ": pid " + t.pid + " is not in the test pids");
        }
        if (!(t.initial_margin > 1.0)) {
            fail("target " + t.name() + ": initial margin " + std::to_string(t.initial_margin) +
                 " is not decisively positive");
        }
    }
    return r;
}

std::vector<double> TableEmbedder::embed(const Draft& draft) {
    if (draft.vector) {
        if (draft.vector->size() != table_.dim()) {
            throw ValidationError("draft " + draft.ref + ": vector has dim " + std::to_string(draft.vector->size()) +
                                  ", expected " + std::to_string(table_.dim()));
        }
        for (double v : *draft.vector) {
            if (!std::isfinite(v)) {
                throw ValidationError("draft " + draft.ref + ": non-finite vector");
            }
        }
        return *draft.vector;
    }
    if (!table_.contains(draft.ref)) {
        throw ValidationError("cannot embed draft " + draft.ref + ": no vector supplied and ref not in table");
    }
    const auto v = table_.at(draft.ref);
    return {v.begin(), v.end()};
}

Trajectory run_loop(const FrozenDetector& det, const AdversarialTarget& target, Adversary& adversary,
                    Embedder& embedder, std::size_t iterations, AcceptPolicy policy, const std::string& planning) {
    Trajectory tr;
    tr.target = target;
    auto flags_for = [](const Draft& d) {
        std::vector<std::string> flags;
        if (!d.text.empty() && !in_range(d.text)) {
            flags.push_back("word_range");
        }
        return flags;
    };

    Draft current{target.text_id, target.text, std::nullopt};
    double margin = 0.0;
    try {
        margin = det.margin(embedder.embed(current));
    } catch (const std::exception& e) {
        tr.error = std::string("iteration 0: ") + e.what();
        return tr;
    }
    tr.records.push_back({0, current.ref, margin, true, flags_for(current)});
    tr.best_margin = margin;

    for (std::size_t it = 1; it <= iterations; ++it) {
        Draft candidate;
        double m = 0.0;
        try {
            const AdversaryContext ctx{target.name(), target.scenario, planning, current, margin, tr.records, it};
            candidate = adversary.step(ctx);
            m = det.margin(embedder.embed(candidate));
        } catch (const std::exception& e) {
            tr.error = "iteration " + std::to_string(it) + ": " + e.what();
            break;
        }
        const bool accepted = policy == AcceptPolicy::KeepCandidate || m < margin;
        tr.records.push_back({it, candidate.ref, m, accepted, flags_for(candidate)});
        tr.best_margin = std::min(tr.best_margin, m);
        if (accepted) {
            current = std::move(candidate);
            margin = m;
        }
    }
    tr.final_margin = margin;
    return tr;
}

std::vector<Trajectory> run_targets(const FrozenDetector& det, const std::vector<AdversarialTarget>& targets,
                                    const AdversaryFactory& make_adversary, Embedder& embedder,
                                    std::size_t iterations, AcceptPolicy policy) {
    std::vector<std::unique_ptr<Adversary>> adversaries;
    for (const auto& t : targets) {
        adversaries.push_back(make_adversary(t));
    }
    std::vector<Trajectory> out(targets.size());
    std::vector<std::thread> threads;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        threads.emplace_back([&, i] {
            out[i] = run_loop(det, targets[i], *adversaries[i], embedder, iterations, policy);
        });
    }
    for (auto& t : threads) {
        t.join();
    }
    return out;
}

Json Trajectory::summary_json() const {
    Json j;
    j["target"] = target.name();
    j["pid"] = target.pid;
    j["task_idx"] = target.task_idx;
    j["scenario"] = target.scenario;
    j["initial_margin"] = target.initial_margin;
    j["best_margin"] = best_margin;
    j["final_margin"] = final_margin;
    j["n_records"] = records.size();
    j["crossed_zero"] = final_margin < 0.0;
    if (error) {
        j["error"] = *error;
    }
    return j;
}

std::string trajectories_jsonl(const std::vector<Trajectory>& trajectories, const Json& meta) {
    std::ostringstream out;
    Json head;
    head["meta"] = meta;
    out << head.dump() << '\n';
    for (const auto& t : trajectories) {
        for (const auto& r : t.records) {
            Json j;
            j["target"] = t.target.name();
            j["iter"] = r.iter;
            j["margin"] = r.margin;
            j["accepted"] = r.accepted;
            j["flags"] = r.flags;
            j["draft_ref"] = r.draft_ref;
            out << j.dump() << '\n';
        }
        if (t.error) {
            Json j;
            j["target"] = t.target.name();
            j["error"] = *t.error;
            out << j.dump() << '\n';
        }
    }
    return out.str();
}

}  // namespace stylearena::advloop
