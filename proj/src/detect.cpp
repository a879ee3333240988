#include "stylearena/detect.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "stylearena/errors.hpp"

namespace stylearena::detect {

LabeledSet LabeledSet::subset(std::span<const std::size_t> indices) const {
    LabeledSet out;
    out.approach = approach;
    out.x.resize(static_cast<Eigen::Index>(indices.size()), x.cols());
    for (std::size_t r = 0; r < indices.size(); ++r) {
        const std::size_t i = indices[r];
        out.x.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(i));
        out.labels.push_back(labels[i]);
        out.groups.push_back(groups[i]);
        out.lengths.push_back(lengths[i]);
        out.rows.push_back(rows[i]);
    }
    return out;
}

LabeledSet build_labeled_set(const StudyCorpus& corpus, const EmbeddingTable& embeddings,
                             const std::string& approach) {
    LabeledSet set;
    set.approach = approach;
    std::vector<std::span<const double>> vectors;
    auto add = [&](const Participant& p, int task_idx, const std::string& scenario, const TextRecord& rec,
                   const std::string& label, int y) {
        if (!embeddings.contains(rec.text_id)) {
            throw ValidationError("missing embedding for pid " + p.pid + " task_idx " + std::to_string(task_idx) +
                                  " (" + label + ")");
        }
        vectors.push_back(embeddings.at(rec.text_id));
        set.labels.push_back(y);
        set.groups.push_back(p.pid);
        set.lengths.push_back(static_cast<double>(rec.word_count));
        set.rows.push_back({p.pid, task_idx, scenario, rec.text_id, label});
    };
    for (const auto& p : corpus.participants) {
        for (const auto& c : p.controls) {
            add(p, c.task_idx, c.scenario, c.body, "control", 0);
        }
        for (const auto& t : p.treatments) {
            add(p, t.task_idx, t.scenario, t.draft(approach), approach, 1);
        }
    }
    set.x.resize(static_cast<Eigen::Index>(vectors.size()), static_cast<Eigen::Index>(embeddings.dim()));
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        for (std::size_t d = 0; d < vectors[i].size(); ++d) {
            set.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = vectors[i][d];
        }
    }
    return set;
}

Json FoldPlan::to_json() const {
    Json j = Json::array();
    for (std::size_t f = 0; f < folds.size(); ++f) {
        Json e;
        e["fold_id"] = f;
        e["train_pids"] = folds[f].train_pids;
        e["test_pids"] = folds[f].test_pids;
        j.push_back(std::move(e));
    }
    return j;
}

FoldPlan group_kfold(std::span<const std::string> groups, std::size_t k) {
    if (k < 2) {
        throw ValidationError("group_kfold: k must be at least 2");
    }
    std::map<std::string, std::size_t> counts;
    for (const auto& g : groups) {
        ++counts[g];
    }
    if (counts.size() < k) {
        throw ValidationError("group_kfold: " + std::to_string(counts.size()) + " groups for " + std::to_string(k) +
                              " folds");
    }
    std::vector<std::pair<std::string, std::size_t>> order(counts.begin(), counts.end());
    std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

    std::vector<std::size_t> load(k, 0);
    std::vector<std::vector<std::string>> tests(k);
    for (const auto& [g, n] : order) {
        const auto f = static_cast<std::size_t>(std::min_element(load.begin(), load.end()) - load.begin());
        load[f] += n;
        tests[f].push_back(g);
    }
    FoldPlan plan;
    for (std::size_t f = 0; f < k; ++f) {
        Fold fold;
        std::sort(tests[f].begin(), tests[f].end());
        fold.test_pids = tests[f];
        for (const auto& [g, n] : counts) {
            if (!std::binary_search(fold.test_pids.begin(), fold.test_pids.end(), g)) {
                fold.train_pids.push_back(g);
            }
        }
        plan.folds.push_back(std::move(fold));
    }
    return plan;
}

std::vector<std::size_t> rows_for(const LabeledSet& set, const std::vector<std::string>& pids) {
    const std::set<std::string, std::less<>> wanted(pids.begin(), pids.end());
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < set.groups.size(); ++i) {
        if (wanted.count(set.groups[i]) != 0) {
            out.push_back(i);
        }
    }
    return out;
}

std::uint64_t auc_twice_u(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) {
        throw ValidationError("roc_auc: scores and labels differ in length");
    }
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (double s : scores) {
        if (std::isnan(s)) {
            throw ValidationError("roc_auc: NaN score");
        }
    }
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::uint64_t twice_u = 0;
    std::uint64_t neg_below = 0;
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        std::uint64_t pos = 0;
        std::uint64_t neg = 0;
        while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
            (labels[idx[j]] == 1 ? pos : neg) += 1;
            ++j;
        }
        twice_u += 2 * pos * neg_below + pos * neg;
        neg_below += neg;
        i = j;
    }
    return twice_u;
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
    std::uint64_t n_pos = 0;
    std::uint64_t n_neg = 0;
    for (int y : labels) {
        if (y == 1) {
            ++n_pos;
        } else if (y == 0) {
            ++n_neg;
        } else {
            throw ValidationError("roc_auc: labels must be 0 or 1");
        }
    }
    if (n_pos == 0 || n_neg == 0) {
        throw ValidationError("roc_auc: both classes must be present");
    }
    const std::uint64_t twice_u = auc_twice_u(scores, labels);
    const std::uint64_t denom = 2 * n_pos * n_neg;
    // Lower half is snapped to the grid where 1 - a is exact; the upper half
    // is its complement, so s and -s mirror bit for bit.
    auto lower = [denom](std::uint64_t t) {
        const double a = static_cast<double>(t) / static_cast<double>(denom);
        return 1.0 - (1.0 - a);
    };
    if (2 * twice_u > denom) {
        return 1.0 - lower(denom - twice_u);
    }
    return lower(twice_u);
}

Json CvSummary::to_json() const {
    Json j;
    j["fold_auc"] = fold_auc;
    j["mean_auc"] = mean_auc;
    j["sd_auc"] = sd_auc;
    j["ci"] = interval_json(ci);
    j["n_boot"] = n_boot;
    j["seed"] = seed;
    return j;
}

CvSummary cross_validate(const LabeledSet& train_set, const LabeledSet& test_set, const FoldPlan& plan,
                         const FitScore& fit_score, std::uint64_t boot_seed, std::size_t n_boot) {
    if (plan.k() < 2) {
        throw ValidationError("cross_validate: plan has fewer than 2 folds");
    }
    CvSummary out;
    for (const auto& fold : plan.folds) {
        const auto tr = rows_for(train_set, fold.train_pids);
        const auto te = rows_for(test_set, fold.test_pids);
        const LabeledSet train = train_set.subset(tr);
        const LabeledSet test = test_set.subset(te);
        const auto scores = fit_score(train, test);
        out.fold_auc.push_back(roc_auc(scores, test.labels));
    }
    out.mean_auc = stats::mean(out.fold_auc);
    out.sd_auc = stats::sample_sd(out.fold_auc);
    out.n_boot = n_boot;
    out.seed = boot_seed;
    out.ci = stats::bootstrap_ci(
        out.fold_auc, [](std::span<const double> r) { return stats::mean(r); }, n_boot, 0.95, boot_seed);
    return out;
}

FitScore svm_fit_score(const SvmOptions& options) {
    return [options](const LabeledSet& train, const LabeledSet& test) {
        const LinearModel m = train_linear_svm(train.x, train.labels, options);
        const Eigen::VectorXd s = m.margins(test.x);
        return std::vector<double>(s.data(), s.data() + s.size());
    };
}

DetectionRun run_detection(const LabeledSet& set, const FoldPlan& plan, const SvmOptions& svm,
                           std::uint64_t boot_seed) {
    DetectionRun run;
    run.approach = set.approach;
    run.plan = plan;
    auto fit = [&](const LabeledSet& train, const LabeledSet& test) {
        run.models.push_back(train_linear_svm(train.x, train.labels, svm));
        const Eigen::VectorXd s = run.models.back().margins(test.x);
        return std::vector<double>(s.data(), s.data() + s.size());
    };
    run.summary = cross_validate(set, set, plan, fit, boot_seed);
    return run;
}

Json DetectionRun::to_json() const {
    Json j;
    j["approach"] = approach;
    j["summary"] = summary.to_json();
    j["folds"] = plan.to_json();
    j["models"] = Json::array();
    for (const auto& m : models) {
        j["models"].push_back(m.to_json());
    }
    return j;
}

}  // namespace stylearena::detect
