// Acceptance gate: one PASS/FAIL line per criterion, exit 1 on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "oracles/oracles.hpp"
#include "stylearena/advloop.hpp"
#include "stylearena/cli.hpp"
#include "stylearena/detect.hpp"
#include "stylearena/errors.hpp"
#include "stylearena/heldout.hpp"
#include "stylearena/hypotheses.hpp"
#include "stylearena/stats.hpp"
#include "stylearena/synth.hpp"
#include "unit/test_util.hpp"

using namespace stylearena;
namespace fs = std::filesystem;

namespace {

enum class Verdict { Pass, Fail, Skip };

struct Outcome {
    Verdict verdict;
    std::string detail;
};

Outcome pass_if(bool ok, std::string detail) { return {ok ? Verdict::Pass : Verdict::Fail, std::move(detail)}; }

std::string fmt(double v, int prec = 4) {
    std::ostringstream s;
    s << std::setprecision(prec) << v;
    return s.str();
}

std::vector<double> normals(Rng& rng, std::size_t n, double shift = 0.0) {
    std::vector<double> v(n);
    for (auto& x : v) {
        x = rng.normal() + shift;
    }
    return v;
}

// ------------------------------------------------------------------ stats

Outcome permutation_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(20240601);
    const std::size_t n_perm = 10000;
    std::size_t exact_mismatch = 0;
    std::size_t outside = 0;
    double worst = 0.0;
    double z_sum = 0.0, z_sq = 0.0;
    std::size_t z_n = 0;
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 2 + rng.below(11);
        const auto s = stats::PairedSample::make(normals(rng, n, 0.4 * rng.uniform()), normals(rng, n));
        const auto d = s.diffs();
        const double exact = oracle::sign_flip_p(d);
        if (stats::perm_test_paired(s, n_perm, 0, stats::PermMode::Exact).p_value != exact) {
            ++exact_mismatch;
        }
        const double mc = stats::perm_test_paired(s, n_perm, 1000 + rep, stats::PermMode::MonteCarlo).p_value;
        // add-one estimator: allow its 1/(n+1) offset on top of 3 SE
        const double se = std::sqrt(exact * (1.0 - exact) / static_cast<double>(n_perm));
        const double dev = std::fabs(mc - exact);
        worst = std::max(worst, se > 0 ? dev / se : 0.0);
        if (se > 0) {
            const double z = (mc - exact) / se;
            z_sum += z;
            z_sq += z * z;
            ++z_n;
        }
        if (dev > 3.0 * se + 1.0 / static_cast<double>(n_perm + 1)) {
            ++outside;
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return pass_if(exact_mismatch == 0 && outside == 0 && secs < 30.0,
                   "exact mismatches " + std::to_string(exact_mismatch) + "/200, MC outside 3SE " +
                       std::to_string(outside) + "/200 (worst " + fmt(worst, 3) + " SE; z mean " + fmt(z_sum / z_n, 2) + ", z sd " +
                       fmt(std::sqrt(z_sq / z_n - (z_sum / z_n) * (z_sum / z_n)), 3) + "), " + fmt(secs, 3) + " s");
}

Outcome effect_size_oracle() {
    const double g = stats::hedges_g_paired(stats::PairedSample::make({1, 2, 3}, {0, 0, 0}));
    Rng rng(77);
    std::size_t broken = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t n = 3 + rng.below(40);
        const auto a = normals(rng, n, rng.normal());
        const auto b = normals(rng, n);
        const double ab = stats::hedges_g_paired(stats::PairedSample::make(a, b));
        const double ba = stats::hedges_g_paired(stats::PairedSample::make(b, a));
        broken += ab == -ba ? 0 : 1;
    }
    return pass_if(std::fabs(g - 1.1429) <= 1e-4 && std::fabs(g - 8.0 / 7.0) <= 1e-6 && broken == 0,
                   "g(1,2,3) = " + fmt(g, 10) + ", antisymmetry failures " + std::to_string(broken) + "/1000");
}

Outcome bh_oracle() {
    Rng rng(5150);
    std::size_t bad = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t m = 1 + rng.below(20);
        std::vector<double> p(m);
        for (auto& x : p) {
            x = rng.uniform() < 0.3 ? rng.uniform() * 0.01 : rng.uniform();
        }
        const auto got = stats::bh_fdr(p, 0.05);
        const auto want = oracle::bh(p, 0.05);
        for (std::size_t i = 0; i < m; ++i) {
            if (got.entries[i].rejected != want.rejected[i] ||
                std::fabs(got.entries[i].p_bh - want.adjusted[i]) > 1e-12 * std::max(1.0, want.adjusted[i])) {
                ++bad;
                break;
            }
        }
    }
    return pass_if(bad == 0, "vectors disagreeing with step-up oracle: " + std::to_string(bad) + "/1000");
}

Outcome rmcorr_fixture() {
    const std::vector<std::string> subj{"A", "A", "B", "B"};
    const auto r = stats::rmcorr(subj, std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 2, 5, 6});
    Rng rng(3);
    std::vector<std::string> s;
    std::vector<double> x, y;
    for (int p = 0; p < 12; ++p) {
        for (int t = 0; t < 4; ++t) {
            s.push_back("S" + std::to_string(p));
            x.push_back(rng.normal());
            y.push_back(0.4 * x.back() + rng.normal());
        }
    }
    const double base = stats::rmcorr(s, x, y).r;
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] += 7.0 * static_cast<double>(i / 4);
        y[i] -= 2.5 * static_cast<double>(i / 4);
    }
    const double shifted = stats::rmcorr(s, x, y).r;
    return pass_if(std::fabs(r.r - 1.0) < 1e-12 && r.dof == 1 && std::fabs(shifted - base) <= 1e-12,
                   "r = " + fmt(r.r, 12) + ", dof = " + std::to_string(r.dof) + ", shift invariance err " +
                       fmt(std::fabs(shifted - base), 3));
}

Outcome friedman_fixture() {
    const auto r = stats::friedman({{1, 2, 3}, {1, 2, 3}, {1, 2, 3}});
    bool raised = false;
    try {
        stats::friedman({{1, 1, 1}, {2, 2, 2}, {3, 3, 3}});
    } catch (const ValidationError& e) {
        raised = std::string(e.what()).find("degenerate") != std::string::npos;
    }
    return pass_if(std::fabs(r.chi2 - 6.0) < 1e-12 && raised,
                   "chi2 = " + fmt(r.chi2, 12) + ", degenerate input raises: " + (raised ? "yes" : "no"));
}

Outcome wilcoxon_agreement() {
    const double p3 = stats::wilcoxon_signed_rank(stats::PairedSample::make({1, 2, 3}, {0, 0, 0})).p;
    Rng rng(4242);
    std::size_t considered = 0, agree = 0;
    for (int rep = 0; rep < 500; ++rep) {
        const std::size_t n = 8 + rng.below(23);
        const auto s = stats::PairedSample::make(normals(rng, n, 1.2 * rng.uniform()), normals(rng, n));
        const double pp = stats::perm_test_paired(s, 10000, 9000 + rep).p_value;
        const double pw = stats::wilcoxon_signed_rank(s).p;
        if (std::fabs(pp - 0.05) > 0.02 && std::fabs(pw - 0.05) > 0.02) {
            ++considered;
            agree += (pp < 0.05) == (pw < 0.05) ? 1 : 0;
        }
    }
    const double rate = considered ? static_cast<double>(agree) / static_cast<double>(considered) : 0.0;
    return pass_if(std::fabs(p3 - 0.25) < 1e-12 && considered > 0 && rate >= 0.95,
                   "p(1,2,3) = " + fmt(p3, 6) + ", agreement " + std::to_string(agree) + "/" +
                       std::to_string(considered) + " = " + fmt(100 * rate, 4) + "%");
}

Outcome winrate_fixture() {
    const auto w = stats::winrate(37, 46, 324);
    const auto ci = stats::clopper_pearson(249, 324);
    const bool ok = std::fabs(100 * w.rate - 18.5) < 0.05 && std::fabs(100 * ci.low - 71.9) <= 0.1 &&
                    std::fabs(100 * ci.high - 81.3) <= 0.1;
    return pass_if(ok, "rate " + fmt(100 * w.rate, 4) + "%, CP [" + fmt(100 * ci.low, 4) + "%, " +
                           fmt(100 * ci.high, 4) + "%]");
}

// ------------------------------------------------------------------ detection

Outcome svm_oracle() {
    Rng rng(31337);
    double worst = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        const auto t = testutil::random_toy2d(rng, 4 + rng.below(9), 0.5 + rng.uniform());
        const auto m = train_linear_svm(t.x, t.y);
        const auto obj = [&](const std::array<double, 3>& p) {
            Eigen::VectorXd w(2);
            w << p[0], p[1];
            return svm_primal_objective(t.x, t.y, w, p[2], 1.0, m.class_weights);
        };
        const double got = svm_primal_objective(t.x, t.y, m.weights, m.bias, 1.0, m.class_weights);
        const auto best = oracle::minimize3(obj, 4.0, static_cast<std::uint64_t>(rep), oracle::hinge_kink_directions(t.x));
        worst = std::max(worst, std::fabs(got - obj(best)));
    }
    const auto cw = balanced_class_weights(std::vector<int>{0, 0, 1});
    return pass_if(worst <= 1e-4 && cw[0] == 0.75 && cw[1] == 1.5,
                   "max |objective - oracle| = " + fmt(worst, 3) + " over 50, weights (" + fmt(cw[0]) + ", " +
                       fmt(cw[1]) + ")");
}

Outcome auc_oracle() {
    Rng rng(8080);
    std::size_t bad = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t n = 2 + rng.below(49);
        std::vector<double> s(n);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = rep % 2 ? static_cast<double>(rng.below(6)) : rng.normal();
            y[i] = i < 2 ? static_cast<int>(i) : static_cast<int>(rng.below(2));
        }
        std::uint64_t pos = 0;
        for (int v : y) {
            pos += static_cast<std::uint64_t>(v);
        }
        const std::uint64_t want = oracle::twice_u(s, y);
        const double want_auc = static_cast<double>(want) / static_cast<double>(2 * pos * (n - pos));
        bad += (detect::auc_twice_u(s, y) != want || std::fabs(detect::roc_auc(s, y) - want_auc) > 1e-15) ? 1 : 0;
    }
    return pass_if(bad == 0, "fixtures disagreeing with pair counting: " + std::to_string(bad) + "/1000");
}

Outcome leakage_mutations() {
    const auto s = testutil::small_synth(30, 16, 2);
    const auto set = detect::build_labeled_set(s.corpus, s.embeddings, "mimic_A");
    const auto plan = detect::group_kfold(set.groups, 5);
    const bool baseline = detect::leakage_audit(plan, set).passed;
    const auto nogroup = testutil::drop_grouping(set);
    const bool a = !detect::leakage_audit(detect::group_kfold(nogroup.groups, 5), nogroup).passed;
    const bool b = !detect::leakage_audit(testutil::duplicate_pid(plan), set).passed;
    const auto under = testutil::undersample_humans(set);
    const bool c = !detect::leakage_audit(detect::group_kfold(under.groups, 5), under).passed;
    const int flipped = a + b + c;
    return pass_if(baseline && flipped == 3, "clean audit passes: " + std::string(baseline ? "yes" : "no") +
                                                 ", mutations caught " + std::to_string(flipped) + "/3");
}

double mean_auc(const SynthCorpus& s, const std::string& approach, std::uint64_t seed) {
    const auto set = detect::build_labeled_set(s.corpus, s.embeddings, approach);
    return detect::run_detection(set, detect::group_kfold(set.groups, 5), {}, seed).summary.mean_auc;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    const auto ra = stats::midranks(a);
    const auto rb = stats::midranks(b);
    const double ma = stats::mean(ra), mb = stats::mean(rb);
    double num = 0, da = 0, db = 0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        num += (ra[i] - ma) * (rb[i] - mb);
        da += (ra[i] - ma) * (ra[i] - ma);
        db += (rb[i] - mb) * (rb[i] - mb);
    }
    return num / std::sqrt(da * db);
}

Outcome arms_race() {
    const RngPolicy rng{0};
    const std::vector<double> fidelity{0.8, 0.84, 0.88, 0.92, 0.96};
    std::vector<double> aucs;
    for (double f : fidelity) {
        SynthParams p;
        p.mimic_fidelity = f;
        p.seed = 3;
        aucs.push_back(mean_auc(synth_corpus(p), "mimic_A", rng.seed_for("detect/bootstrap/mimic_A")));
    }
    const double rho = spearman(fidelity, aucs);
    bool strict = true;
    for (std::size_t i = 1; i < aucs.size(); ++i) {
        strict = strict && aucs[i] < aucs[i - 1];
    }

    SynthParams p;
    p.style_signal = 0.0;
    p.length_bias = 3.0;
    p.seed = 3;
    const auto s = synth_corpus(p);
    const auto set = detect::build_labeled_set(s.corpus, s.embeddings, "mimic_A");
    const auto plan = detect::group_kfold(set.groups, 5);
    const double full = detect::run_detection(set, plan, {}, 1).summary.mean_auc;
    const double len = detect::diag_length_only(set, plan, 1).mean_auc;

    std::string curve;
    for (std::size_t i = 0; i < aucs.size(); ++i) {
        curve += (i ? " " : "") + fmt(fidelity[i], 3) + ":" + fmt(aucs[i], 4);
    }
    return pass_if(rho == -1.0 && strict && len >= full - 0.05,
                   "AUC by fidelity " + curve + " (Spearman " + fmt(rho, 3) + "); length-only " + fmt(len, 4) +
                       " vs full " + fmt(full, 4));
}

Outcome reference_adversary() {
    SynthParams p;
    p.seed = 5;
    const auto s = synth_corpus(p);
    const auto set = detect::build_labeled_set(s.corpus, s.embeddings, "mimic_A");
    const auto run = detect::run_detection(set, detect::group_kfold(set.groups, 5), {}, 1);
    const auto det = advloop::FrozenDetector::freeze(run, 0, std::string(kDefaultProtocolTag));
    const std::string frozen_before = det.to_json().dump();
    const auto targets = advloop::select_targets(det, set, 5, &s.corpus);
    const bool audit_before = advloop::adversarial_leakage_audit(det, targets).passed;

    advloop::TableEmbedder emb(s.embeddings);
    const auto trs = advloop::run_targets(
        det, targets,
        [&](const advloop::AdversarialTarget& t) -> std::unique_ptr<advloop::Adversary> {
            advloop::ReferenceOptions o;
            o.seed = RngPolicy{5}.seed_for("adversarial/" + t.name());
            const auto v = emb.embed(advloop::Draft{t.text_id, {}, std::nullopt});
            return std::make_unique<advloop::ReferenceAdversary>(
                [&det](std::span<const double> x) { return det.margin(x); }, v, o);
        },
        emb, 20);

    double init = 0.0, fin = 0.0;
    bool complete = true;
    for (std::size_t i = 0; i < trs.size(); ++i) {
        complete = complete && !trs[i].error && trs[i].records.size() == 21 &&
                   trs[i].records[0].margin == targets[i].initial_margin;
        init += targets[i].initial_margin;
        fin += trs[i].final_margin;
    }
    init /= static_cast<double>(trs.size());
    fin /= static_cast<double>(trs.size());
    const bool audit_after = advloop::adversarial_leakage_audit(det, targets).passed;
    const bool untouched = det.to_json().dump() == frozen_before;
    const double drop = (init - fin) / init;
    return pass_if(drop >= 0.5 && audit_before && audit_after && complete && untouched,
                   "mean margin " + fmt(init, 4) + " -> " + fmt(fin, 4) + " (" + fmt(100 * drop, 4) +
                       "% drop), audits " + (audit_before && audit_after ? "hold" : "FAIL") +
                       ", detector unchanged " + (untouched ? "yes" : "no"));
}

// ------------------------------------------------------------------ determinism

std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) {
            out[fs::relative(e.path(), root).string()] = testutil::slurp(e.path());
        }
    }
    return out;
}

Outcome determinism() {
    testutil::TempDir tmp("acceptance_det");
    std::ostringstream sink;
    auto run_once = [&](const std::string& name) {
        const std::string root = (tmp.path() / name).string();
        int rc = cli::run({"synth", "--out", root + "/fixture", "--seed", "11"}, sink, sink);
        if (rc == 0) {
            rc = cli::run({"pipeline", "--corpus", root + "/fixture/corpus", "--embeddings",
                           root + "/fixture/embeddings.jsonl", "--out", root + "/out", "--seed", "11"},
                          sink, sink);
        }
        return rc;
    };
    const int a = run_once("a");
    const int b = run_once("b");
    if (a != 0 || b != 0) {
        return {Verdict::Fail, "pipeline exit codes " + std::to_string(a) + "/" + std::to_string(b) + ": " + sink.str()};
    }
    const auto ta = tree(tmp.path() / "a");
    const auto tb = tree(tmp.path() / "b");
    std::size_t differ = 0;
    for (const auto& [k, v] : ta) {
        auto it = tb.find(k);
        differ += (it == tb.end() || it->second != v) ? 1 : 0;
    }
    differ += tb.size() > ta.size() ? tb.size() - ta.size() : 0;
    return pass_if(differ == 0 && ta.size() > 10,
                   std::to_string(ta.size()) + " files, " + std::to_string(differ) + " differ");
}

// ------------------------------------------------------------------ study data

Outcome study_data() {
    const char* dir = std::getenv("STYLE_ARENA_STUDY_DATA");
    if (!dir || !*dir) {
        return {Verdict::Skip, "set STYLE_ARENA_STUDY_DATA to a directory with corpus/ and embeddings.jsonl"};
    }
    const char* mim = std::getenv("STYLE_ARENA_STUDY_MIMICS");
    const std::string mimics = mim && *mim ? mim : "mimic_A,mimic_B";
    const auto comma = mimics.find(',');
    const std::string opus = mimics.substr(0, comma);
    const std::string gpt = comma == std::string::npos ? "" : mimics.substr(comma + 1);

    const fs::path root(dir);
    const auto corpus = load_corpus(root / "corpus", LoadOptions{.allow_unknown_scenarios = true}).corpus;
    const auto emb = load_embeddings(root / "embeddings.jsonl");
    const RngPolicy rng{0};
    std::vector<std::string> fails;
    auto near = [&](const std::string& what, double got, double want, double tol) {
        if (!(std::fabs(got - want) <= tol)) {
            fails.push_back(what + " " + fmt(got, 4) + " vs " + fmt(want, 4));
        }
    };

    const auto battery = hypotheses::run_battery(corpus, emb, rng);
    if (!battery.h3) {
        fails.push_back("H3 missing");
    } else {
        near("H3 r", battery.h3->r, 0.244, 0.005);
        near("H3 n", static_cast<double>(battery.h3->n_obs), 648, 0);
    }

    const std::vector<std::string> cols{"o4mini", "human_edit", opus, gpt};
    const auto table = heldout::build_heldout_table(corpus, emb, cols);
    const auto fa = heldout::final_assessment(table, rng);
    const double g_ref[6] = {-0.48, -1.57, -1.61, -1.02, -1.07, -0.08};
    const bool rej_ref[6] = {true, true, true, true, true, false};
    for (std::size_t i = 0; i < 6; ++i) {
        near("g " + fa.pairs[i].a + "/" + fa.pairs[i].b, fa.pairs[i].effect.g, g_ref[i], 0.05);
        if (fa.pairs[i].bh_rejected != rej_ref[i]) {
            fails.push_back("BH decision " + fa.pairs[i].a + "/" + fa.pairs[i].b);
        }
    }
    const double rates[3] = {18.5, 76.9, 79.0};
    for (std::size_t i = 0; i < 3; ++i) {
        near("win rate " + fa.winrates[i].first, std::round(1000 * fa.winrates[i].second.rate) / 10, rates[i], 1e-9);
    }

    const double auc_ref[4] = {0.999, 0.971, 0.952, 0.931};
    const double b_row[4] = {0.472, 0.469, 0.494, 0.478};
    const double c_row[4] = {0.818, 0.565, 0.517, 0.880};
    const double e_row[4] = {0.998, 0.968, 0.925, 0.912};
    const double f_row[4] = {0.998, 0.976, 0.931, 0.926};
    std::vector<double> aucs;
    for (std::size_t i = 0; i < 4; ++i) {
        const auto set = detect::build_labeled_set(corpus, emb, cols[i]);
        const auto plan = detect::group_kfold(set.groups, 5);
        const auto full = detect::run_detection(set, plan, {}, rng.seed_for("detect/bootstrap/" + cols[i]));
        aucs.push_back(full.summary.mean_auc);
        near("AUC " + cols[i], full.summary.mean_auc, auc_ref[i], 0.01);
        near("B " + cols[i], detect::diag_shuffle(set, plan, rng.seed_for("diagnose/shuffle/" + cols[i]), 1).mean_auc,
             b_row[i], 0.02);
        near("C " + cols[i], detect::diag_length_only(set, plan, 1).mean_auc, c_row[i], 0.02);
        near("E " + cols[i], detect::diag_pca_svm(set, plan, 32, 1).mean_auc, e_row[i], 0.02);
        near("F " + cols[i], detect::diag_l2lr(set, plan, 1e-3, 1).mean_auc, f_row[i], 0.02);
    }
    if (!(aucs[0] > aucs[1] && aucs[1] > aucs[2] && aucs[2] > aucs[3])) {
        fails.push_back("AUC ordering");
    }
    std::string detail = fails.empty() ? "all study-data comparisons within tolerance" : "";
    for (const auto& f : fails) {
        detail += (detail.empty() ? "" : "; ") + f;
    }
    return pass_if(fails.empty(), detail);
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"permutation oracle", permutation_oracle},
        {"effect size oracle", effect_size_oracle},
        {"bh-fdr oracle", bh_oracle},
        {"rmcorr fixture", rmcorr_fixture},
        {"friedman fixture", friedman_fixture},
        {"wilcoxon fixture and agreement", wilcoxon_agreement},
        {"win rate and clopper-pearson", winrate_fixture},
        {"svm oracle", svm_oracle},
        {"auc oracle", auc_oracle},
        {"leakage audit mutations", leakage_mutations},
        {"synthetic arms race", arms_race},
        {"reference adversary", reference_adversary},
        {"determinism", determinism},
        {"study data (conditional)", study_data},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {Verdict::Fail, std::string("threw: ") + e.what()};
        }
        const char* tag = o.verdict == Verdict::Pass ? "PASS" : o.verdict == Verdict::Fail ? "FAIL" : "SKIP";
        failed += o.verdict == Verdict::Fail ? 1 : 0;
        std::cout << tag << "  " << name << ": " << o.detail << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
