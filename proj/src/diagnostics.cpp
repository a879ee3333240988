#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "stylearena/detect.hpp"
#include "stylearena/errors.hpp"
#include "stylearena/pca.hpp"
#include "stylearena/rng.hpp"

namespace stylearena::detect {

namespace {

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

CvSummary diag_shuffle(const LabeledSet& set, const FoldPlan& plan, std::uint64_t seed, std::uint64_t boot_seed) {
    std::size_t n_pos = 0;
    for (int y : set.labels) {
        n_pos += y == 1 ? 1 : 0;
    }
    if (n_pos < 2 || set.size() - n_pos < 2) {
        throw ValidationError("diag_shuffle: need at least 2 rows per class");
    }
    LabeledSet shuffled = set;
    Rng rng(seed);
    rng.shuffle(std::span<int>(shuffled.labels));
    return cross_validate(shuffled, shuffled, plan, svm_fit_score(), boot_seed);
}

CvSummary diag_length_only(const LabeledSet& set, const FoldPlan& plan, std::uint64_t boot_seed) {
    LabeledSet lengths = set;
    lengths.x = Eigen::Map<const Eigen::VectorXd>(set.lengths.data(), static_cast<Eigen::Index>(set.lengths.size()));
    auto fit = [](const LabeledSet& train, const LabeledSet& test) {
        const double mu = train.x.col(0).mean();
        const double var = (train.x.col(0).array() - mu).square().sum() / static_cast<double>(train.size() - 1);
        const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
        LabeledSet tr = train;
        LabeledSet te = test;
        tr.x = (train.x.array() - mu) / sd;
        te.x = (test.x.array() - mu) / sd;
        return svm_fit_score()(tr, te);
    };
    return cross_validate(lengths, lengths, plan, fit, boot_seed);
}

CvSummary diag_pca_svm(const LabeledSet& set, const FoldPlan& plan, std::size_t k, std::uint64_t boot_seed) {
    if (k == 0 || k > static_cast<std::size_t>(set.x.cols())) {
        throw ValidationError("diag_pca_svm: k=" + std::to_string(k) + " exceeds dimension " +
                              std::to_string(set.x.cols()));
    }
    auto fit = [k](const LabeledSet& train, const LabeledSet& test) {
        const PcaModel pca = fit_pca(train.x, k);
        LabeledSet tr = train;
        LabeledSet te = test;
        tr.x = pca.transform(train.x);
        te.x = pca.transform(test.x);
        return svm_fit_score()(tr, te);
    };
    return cross_validate(set, set, plan, fit, boot_seed);
}

CvSummary diag_l2lr(const LabeledSet& set, const FoldPlan& plan, double c, std::uint64_t boot_seed) {
    auto fit = [c](const LabeledSet& train, const LabeledSet& test) {
        LogisticOptions opt;
        opt.c = c;
        return to_vector(train_logistic(train.x, train.labels, opt).margins(test.x));
    };
    return cross_validate(set, set, plan, fit, boot_seed);
}

CvSummary diag_cross_transfer(const LabeledSet& a, const LabeledSet& b, const FoldPlan& plan,
                              std::uint64_t boot_seed) {
    if (a.x.cols() != b.x.cols()) {
        throw ValidationError("diag_cross_transfer: dimension mismatch");
    }
    return cross_validate(a, b, plan, svm_fit_score(), boot_seed);
}

Json LeakageAudit::to_json() const {
    Json j;
    j["pid_overlap"] = pid_overlap;
    j["passed"] = passed;
    j["failures"] = failures;
    return j;
}

std::string LeakageAudit::overlap_string() const {
    std::string s;
    for (std::size_t f = 0; f < pid_overlap.size(); ++f) {
        s += (f ? "/" : "") + std::to_string(pid_overlap[f]);
    }
    return s;
}

LeakageAudit leakage_audit(const FoldPlan& plan, const LabeledSet& set) {
    LeakageAudit audit;
    auto fail = [&](std::string msg) {
        audit.passed = false;
        audit.failures.push_back(std::move(msg));
    };

    if (set.groups.size() != set.size() || set.rows.size() != set.size()) {
        fail("grouping dropped: " + std::to_string(set.groups.size()) + " group keys for " +
             std::to_string(set.size()) + " rows");
    } else {
        for (std::size_t i = 0; i < set.size(); ++i) {
            if (set.groups[i] != set.rows[i].pid) {
                fail("grouping dropped: row " + std::to_string(i) + " grouped by '" + set.groups[i] + "', pid " +
                     set.rows[i].pid);
                break;
            }
        }
    }

    std::map<std::string, std::size_t> human;
    std::set<std::string> pids;
    for (std::size_t i = 0; i < set.rows.size(); ++i) {
        pids.insert(set.rows[i].pid);
        if (set.labels[i] == 0) {
            ++human[set.rows[i].pid];
        }
    }
    for (const auto& pid : pids) {
        const std::size_t n = human.count(pid) ? human[pid] : 0;
        if (n != 2) {
            fail("human class undersampled: pid " + pid + " has " + std::to_string(n) + " control rows, expected 2");
        }
    }

    std::map<std::string, std::size_t> test_count;
    for (const auto& fold : plan.folds) {
        for (const auto& g : fold.test_pids) {
            ++test_count[g];
        }
    }
    std::set<std::string> keys(set.groups.begin(), set.groups.end());
    for (const auto& g : keys) {
        const std::size_t n = test_count.count(g) ? test_count[g] : 0;
        if (n != 1) {
            fail("plan is not a partition: group " + g + " is in " + std::to_string(n) + " test folds");
        }
    }

    if (set.groups.size() == set.size() && set.rows.size() == set.size()) {
        for (std::size_t f = 0; f < plan.folds.size(); ++f) {
            std::set<std::string> train_true;
            std::set<std::string> test_true;
            for (std::size_t i : rows_for(set, plan.folds[f].train_pids)) {
                train_true.insert(set.rows[i].pid);
            }
            for (std::size_t i : rows_for(set, plan.folds[f].test_pids)) {
                test_true.insert(set.rows[i].pid);
            }
            std::vector<std::string> shared;
            std::set_intersection(train_true.begin(), train_true.end(), test_true.begin(), test_true.end(),
                                  std::back_inserter(shared));
            audit.pid_overlap.push_back(shared.size());
            if (!shared.empty()) {
                fail("fold " + std::to_string(f) + ": " + std::to_string(shared.size()) +
                     " pids in both train and test, first " + shared.front());
            }
        }
    }
    return audit;
}

bool DiagnosticsReport::audits_passed() const {
    return std::all_of(approaches.begin(), approaches.end(), [](const auto& a) { return a.audit.passed; });
}

Json DiagnosticsReport::to_json() const {
    Json j;
    j["pca_k"] = pca_k;
    j["l2lr_C"] = l2lr_c;
    j["approaches"] = Json::array();
    for (const auto& a : approaches) {
        Json e;
        e["approach"] = a.approach;
        e["A_leakage"] = a.audit.to_json();
        e["full"] = a.full.to_json();
        e["B_shuffle"] = a.shuffle.to_json();
        e["C_length_only"] = a.length_only.to_json();
        e["E_pca_svm"] = a.pca.to_json();
        e["F_l2lr"] = a.l2lr.to_json();
        j["approaches"].push_back(std::move(e));
    }
    j["D_cross_transfer"] = Json::array();
    for (const auto& c : cross) {
        Json e;
        e["train"] = c.train_approach;
        e["test"] = c.test_approach;
        e["summary"] = c.summary.to_json();
        j["D_cross_transfer"].push_back(std::move(e));
    }
    j["audits_passed"] = audits_passed();
    return j;
}

std::string DiagnosticsReport::table5_csv() const {
    std::ostringstream out;
    out << "row,diagnostic";
    for (const auto& a : approaches) {
        out << ',' << a.approach;
    }
    out << '\n';
    auto numeric_row = [&](const char* id, const std::string& label, auto getter) {
        out << id << ',' << label;
        for (const auto& a : approaches) {
            out << ',' << format_number(getter(a));
        }
        out << '\n';
    };
    numeric_row("headline", "full linear SVM", [](const auto& a) { return a.full.mean_auc; });
    out << "A,pid overlap per fold";
    for (const auto& a : approaches) {
        out << ',' << a.audit.overlap_string();
    }
    out << '\n';
    numeric_row("B", "shuffled labels", [](const auto& a) { return a.shuffle.mean_auc; });
    numeric_row("C", "length only", [](const auto& a) { return a.length_only.mean_auc; });
    numeric_row("E", "PCA(" + std::to_string(pca_k) + ") + linear SVM", [](const auto& a) { return a.pca.mean_auc; });
    numeric_row("F", "L2-LR C=" + format_number(l2lr_c), [](const auto& a) { return a.l2lr.mean_auc; });
    for (const auto& c : cross) {
        out << "D,train " << c.train_approach << " -> test " << c.test_approach;
        for (const auto& a : approaches) {
            out << ',';
            if (a.approach == c.test_approach) {
                out << format_number(c.summary.mean_auc);
            }
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace stylearena::detect
