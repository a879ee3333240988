#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "oracles/oracles.hpp"
#include "stylearena/detect.hpp"
#include "stylearena/errors.hpp"
#include "stylearena/pca.hpp"
#include "test_util.hpp"

using namespace stylearena;
using namespace stylearena::detect;

namespace {

std::vector<std::string> uniform_groups(std::size_t n_pids, std::size_t per) {
    std::vector<std::string> g;
    for (std::size_t p = 0; p < n_pids; ++p) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "P%03zu", p + 1);
        g.insert(g.end(), per, buf);
    }
    return g;
}

double svm_obj3(const testutil::Toy2d& t, const std::array<double, 3>& p, const std::array<double, 2>& cw) {
    Eigen::VectorXd w(2);
    w << p[0], p[1];
    return svm_primal_objective(t.x, t.y, w, p[2], 1.0, cw);
}

}  // namespace

TEST_SUITE("detect") {

TEST_CASE("group_kfold") {
    const auto g81 = uniform_groups(81, 6);
    const auto plan = group_kfold(g81, 5);
    REQUIRE(plan.k() == 5);
    std::vector<std::size_t> sizes;
    for (const auto& f : plan.folds) {
        sizes.push_back(f.test_pids.size());
        CHECK(f.train_pids.size() + f.test_pids.size() == 81);
    }
    CHECK(sizes == std::vector<std::size_t>{17, 16, 16, 16, 16});

    const auto p5 = group_kfold(uniform_groups(5, 3), 5);
    for (const auto& f : p5.folds) {
        CHECK(f.test_pids.size() == 1);
    }
    CHECK_THROWS_AS(group_kfold(uniform_groups(5, 3), 1), ValidationError);
    CHECK_THROWS_AS(group_kfold(uniform_groups(4, 3), 5), ValidationError);
}

TEST_CASE("group_kfold partitions random group sets") {
    Rng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n_groups = 5 + rng.below(40);
        std::vector<std::string> groups;
        for (std::size_t i = 0; i < n_groups; ++i) {
            const std::size_t reps = 1 + rng.below(7);
            groups.insert(groups.end(), reps, "g" + std::to_string(rng.below(1000)) + "_" + std::to_string(i));
        }
        const std::size_t k = 2 + rng.below(4);
        const auto plan = group_kfold(groups, k);
        std::set<std::string> all(groups.begin(), groups.end());
        std::map<std::string, int> seen;
        for (const auto& f : plan.folds) {
            std::set<std::string> tr(f.train_pids.begin(), f.train_pids.end());
            for (const auto& t : f.test_pids) {
                ++seen[t];
                CHECK_FALSE(tr.contains(t));
            }
            CHECK(tr.size() + f.test_pids.size() == all.size());
        }
        CHECK(seen.size() == all.size());
        CHECK(std::all_of(seen.begin(), seen.end(), [](const auto& kv) { return kv.second == 1; }));
    }
}

TEST_CASE("leakage audit on generated plans and mutations") {
    const auto s = testutil::small_synth(15);
    const auto set = build_labeled_set(s.corpus, s.embeddings, "mimic_A");
    CHECK(set.size() == 15 * 6);
    const auto plan = group_kfold(set.groups, 5);
    const auto ok = leakage_audit(plan, set);
    CHECK(ok.passed);
    CHECK(ok.overlap_string() == "0/0/0/0/0");

    const auto nogroup = testutil::drop_grouping(set);
    const auto a = leakage_audit(group_kfold(nogroup.groups, 5), nogroup);
    CHECK_FALSE(a.passed);
    CHECK(std::accumulate(a.pid_overlap.begin(), a.pid_overlap.end(), std::size_t{0}) > 0);

    CHECK_FALSE(leakage_audit(testutil::duplicate_pid(plan), set).passed);

    const auto under = testutil::undersample_humans(set);
    CHECK_FALSE(leakage_audit(group_kfold(under.groups, 5), under).passed);
}

TEST_CASE("auc examples") {
    const std::vector<double> s{1, 2, 3, 4};
    const std::vector<int> y{0, 1, 0, 1};
    CHECK(roc_auc(s, y) == 0.75);
    CHECK(roc_auc(std::vector<double>{0, 0, 1, 1}, std::vector<int>{0, 0, 1, 1}) == 1.0);
    CHECK(roc_auc(std::vector<double>(6, 2.0), std::vector<int>{0, 1, 0, 1, 1, 0}) == 0.5);
    CHECK_THROWS_AS(roc_auc(s, std::vector<int>{1, 1, 1, 1}), ValidationError);
    CHECK_THROWS_AS(roc_auc(s, std::vector<int>{0, 1}), ValidationError);
}

TEST_CASE("auc matches pair counting and is exactly antisymmetric") {
    Rng rng(3);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + rng.below(49);
        std::vector<double> sc(n);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            sc[i] = static_cast<double>(rng.below(8)) * 0.25;  // many ties
            y[i] = i < 2 ? static_cast<int>(i) : static_cast<int>(rng.below(2));
        }
        CHECK(auc_twice_u(sc, y) == oracle::twice_u(sc, y));
        std::vector<double> neg(n);
        std::transform(sc.begin(), sc.end(), neg.begin(), [](double v) { return -v; });
        CHECK(roc_auc(sc, y) == 1.0 - roc_auc(neg, y));
    }
}

TEST_CASE("svm 1-D symmetric toy") {
    RowMatrix x(4, 1);
    x << -1, -1, 1, 1;
    const std::vector<int> y{0, 0, 1, 1};
    const auto m = train_linear_svm(x, y);
    CHECK(m.bias == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(m.margin(std::vector<double>{1.0}) > 0.0);
    CHECK(m.margin(std::vector<double>{-1.0}) < 0.0);
}

TEST_CASE("balanced class weights") {
    const auto w = balanced_class_weights(std::vector<int>{0, 0, 1});
    CHECK(w[0] == 0.75);
    CHECK(w[1] == 1.5);
    CHECK_THROWS_AS(balanced_class_weights(std::vector<int>{0, 0}), ValidationError);
    RowMatrix x(2, 1);
    x << 1, 2;
    CHECK_THROWS_AS(train_linear_svm(x, std::vector<int>{1, 1}), ValidationError);
}

TEST_CASE("svm objective matches the small-instance oracle") {
    Rng rng(11);
    for (int trial = 0; trial < 8; ++trial) {
        const auto t = testutil::random_toy2d(rng, 4 + rng.below(9), 1.0);
        const auto m = train_linear_svm(t.x, t.y);
        const double got = svm_primal_objective(t.x, t.y, m.weights, m.bias, 1.0, m.class_weights);
        const auto best = oracle::minimize3([&](const auto& p) { return svm_obj3(t, p, m.class_weights); }, 4.0,
                                            static_cast<std::uint64_t>(trial), oracle::hinge_kink_directions(t.x));
        const double ref = svm_obj3(t, best, m.class_weights);
        INFO("got " << got << " oracle " << ref << " n " << t.y.size());
        CHECK(std::fabs(got - ref) <= 1e-4);
    }
}

TEST_CASE("svm beats the zero model and random models") {
    Rng rng(5);
    const auto t = testutil::random_toy2d(rng, 30, 0.7);
    const auto m = train_linear_svm(t.x, t.y);
    const double got = svm_primal_objective(t.x, t.y, m.weights, m.bias, 1.0, m.class_weights);
    CHECK(got <= svm_primal_objective(t.x, t.y, Eigen::VectorXd::Zero(2), 0.0, 1.0, m.class_weights));
    for (int i = 0; i < 100; ++i) {
        Eigen::VectorXd w(2);
        w << 2 * rng.normal(), 2 * rng.normal();
        CHECK(got <= svm_primal_objective(t.x, t.y, w, 2 * rng.normal(), 1.0, m.class_weights));
    }
}

TEST_CASE("duplicating the training set with C halved keeps the model") {
    Rng rng(8);
    const auto t = testutil::random_toy2d(rng, 20, 0.6);
    RowMatrix x2(40, 2);
    x2 << t.x, t.x;
    std::vector<int> y2 = t.y;
    y2.insert(y2.end(), t.y.begin(), t.y.end());
    SvmOptions a;
    a.tol = 1e-12;
    SvmOptions b = a;
    b.c = 0.5;
    const auto ma = train_linear_svm(t.x, t.y, a);
    const auto mb = train_linear_svm(x2, y2, b);
    CHECK((ma.weights - mb.weights).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(std::fabs(ma.bias - mb.bias) < 1e-8);
}

TEST_CASE("svm reports non-convergence") {
    Rng rng(2);
    const auto t = testutil::random_toy2d(rng, 30, 0.2);
    SvmOptions o;
    o.max_epochs = 1;
    o.tol = 1e-14;
    CHECK_THROWS_AS(train_linear_svm(t.x, t.y, o), ConvergenceError);
}

TEST_CASE("model json round trip") {
    Rng rng(4);
    const auto t = testutil::random_toy2d(rng, 10, 1.0);
    const auto m = train_linear_svm(t.x, t.y);
    const auto back = LinearModel::from_json(m.to_json());
    CHECK(back.weights == m.weights);
    CHECK(back.bias == m.bias);
    CHECK(back.class_weights == m.class_weights);
    CHECK(m.to_json().dump() == back.to_json().dump());
}

TEST_CASE("logistic gradient matches finite differences") {
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const auto t = testutil::random_toy2d(rng, 5 + rng.below(20), 0.5);
        const auto cw = balanced_class_weights(t.y);
        const double c = trial % 2 ? 1e-3 : 1.0;
        Eigen::VectorXd theta(3);
        theta << rng.normal(), rng.normal(), rng.normal();
        const auto g = logistic_gradient(t.x, t.y, theta, c, cw);
        Eigen::VectorXd fd(3);
        for (int k = 0; k < 3; ++k) {
            const double h = 1e-5;
            Eigen::VectorXd up = theta, dn = theta;
            up[k] += h;
            dn[k] -= h;
            fd[k] = (logistic_objective(t.x, t.y, up, c, cw) - logistic_objective(t.x, t.y, dn, c, cw)) / (2 * h);
        }
        CHECK((g - fd).norm() / std::max(1e-12, g.norm()) < 1e-6);
    }
}

TEST_CASE("logistic symmetric toy has boundary 0") {
    RowMatrix x(4, 1);
    x << -1, -2, 1, 2;
    const std::vector<int> y{0, 0, 1, 1};
    const auto m = train_logistic(x, y);
    CHECK(std::fabs(m.bias) < 1e-9);
    CHECK(m.weights[0] > 0.0);
    Eigen::VectorXd theta(2);
    theta << m.weights[0], m.bias;
    CHECK(logistic_gradient(x, y, theta, 1e-3, m.class_weights).norm() < 1e-8);
}

TEST_CASE("pca eigenvalues agree with power iteration") {
    Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        RowMatrix x(12, 5);
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            for (Eigen::Index j = 0; j < 5; ++j) {
                x(i, j) = rng.normal() * (1.0 + static_cast<double>(j));
            }
        }
        const auto model = fit_pca(x, 5);
        const RowMatrix centered = x.rowwise() - x.colwise().mean();
        const Eigen::MatrixXd cov = centered.transpose() * centered / 11.0;
        const auto ref = oracle::power_eigenvalues(cov, 5);
        for (int k = 0; k < 5; ++k) {
            CHECK(model.eigenvalues[k] == doctest::Approx(ref[static_cast<std::size_t>(k)]).epsilon(1e-8));
        }
        for (int k = 0; k < 5; ++k) {
            Eigen::Index idx;
            model.components.col(k).cwiseAbs().maxCoeff(&idx);
            CHECK(model.components(idx, k) > 0.0);
        }
    }
    RowMatrix small(3, 2);
    small.setRandom();
    CHECK_THROWS_AS(fit_pca(small, 3), ValidationError);
    CHECK_THROWS_AS(fit_pca(small, 0), ValidationError);
    CHECK_THROWS_AS(fit_pca(small.topRows(1), 1), ValidationError);
}

namespace {

/// Rank-1 embeddings: every vector is offset + t * direction.
LabeledSet rank_one(const LabeledSet& base, Rng& rng) {
    LabeledSet out = base;
    Eigen::VectorXd dir(out.x.cols());
    Eigen::VectorXd off(out.x.cols());
    for (Eigen::Index j = 0; j < dir.size(); ++j) {
        dir[j] = rng.normal();
        off[j] = rng.normal();
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double t = (out.labels[i] == 1 ? 0.8 : -0.8) + rng.normal();
        out.x.row(static_cast<Eigen::Index>(i)) = (off + t * dir).transpose();
    }
    return out;
}

}  // namespace

TEST_CASE("pca on rank-1 data is lossless") {
    Rng rng(12);
    const auto s = testutil::small_synth(20);
    const auto set = rank_one(build_labeled_set(s.corpus, s.embeddings, "mimic_A"), rng);
    const auto plan = group_kfold(set.groups, 5);
    const auto full = run_detection(set, plan, {}, 1);
    const auto pca = diag_pca_svm(set, plan, 1, 1);
    CHECK(pca.fold_auc == full.summary.fold_auc);
}

TEST_CASE("pca is fit on train-fold rows only") {
    const auto s = testutil::small_synth(15);
    const auto set = build_labeled_set(s.corpus, s.embeddings, "mimic_B");
    const auto plan = group_kfold(set.groups, 5);
    const auto got = diag_pca_svm(set, plan, 4, 1);
    for (std::size_t f = 0; f < plan.k(); ++f) {
        const auto train = set.subset(rows_for(set, plan.folds[f].train_pids));
        const auto test = set.subset(rows_for(set, plan.folds[f].test_pids));
        const auto pca = fit_pca(train.x, 4);
        const auto m = train_linear_svm(pca.transform(train.x), train.labels);
        const Eigen::VectorXd sc = m.margins(pca.transform(test.x));
        CHECK(got.fold_auc[f] == roc_auc(std::span<const double>(sc.data(), static_cast<std::size_t>(sc.size())),
                                         test.labels));
    }
}

TEST_CASE("null labels give chance AUC") {
    SynthParams p;
    p.n_pids = 81;
    p.dim = 32;
    p.seed = 4;
    const auto s = synth_corpus(p);
    auto set = build_labeled_set(s.corpus, s.embeddings, "o4mini");
    Rng rng(99);
    rng.shuffle(std::span<int>(set.labels));
    const auto run = run_detection(set, group_kfold(set.groups, 5), {}, 1);
    CHECK(run.summary.mean_auc >= 0.4);
    CHECK(run.summary.mean_auc <= 0.6);
    CHECK(run.summary.ci.low <= run.summary.ci.high);
}

TEST_CASE("identical vectors give 0.5") {
    const auto s = testutil::small_synth(10, 8);
    auto set = build_labeled_set(s.corpus, s.embeddings, "o4mini");
    for (Eigen::Index i = 0; i < set.x.rows(); ++i) {
        set.x.row(i) = set.x.row(0);
    }
    const auto run = run_detection(set, group_kfold(set.groups, 5), {}, 1);
    for (double a : run.summary.fold_auc) {
        CHECK(a == 0.5);
    }
}

TEST_CASE("detection is deterministic and strong on the planted draft direction") {
    const auto s = testutil::small_synth(20, 32);
    const auto set = build_labeled_set(s.corpus, s.embeddings, "o4mini");
    const auto plan = group_kfold(set.groups, 5);
    const auto a = run_detection(set, plan, {}, 5);
    const auto b = run_detection(set, plan, {}, 5);
    CHECK(a.to_json().dump() == b.to_json().dump());
    CHECK(a.summary.mean_auc > 0.9);
    CHECK(a.models.size() == 5);
    CHECK(a.summary.sd_auc >= 0.0);
}

TEST_CASE("length-only diagnostic") {
    const auto s = testutil::small_synth(15);
    auto set = build_labeled_set(s.corpus, s.embeddings, "mimic_A");
    const auto plan = group_kfold(set.groups, 5);
    std::fill(set.lengths.begin(), set.lengths.end(), 150.0);
    CHECK(diag_length_only(set, plan, 1).mean_auc == 0.5);

    double prev = 0.0;
    for (double bias : {0.0, 1.0, 3.0}) {
        SynthParams p;
        p.n_pids = 40;
        p.dim = 16;
        p.length_bias = bias;
        p.seed = 2;
        const auto c = synth_corpus(p);
        const auto ls = build_labeled_set(c.corpus, c.embeddings, "mimic_A");
        const double auc = diag_length_only(ls, group_kfold(ls.groups, 5), 1).mean_auc;
        CHECK(auc > prev);
        prev = auc;
    }
}

TEST_CASE("shuffle diagnostic") {
    const auto s = testutil::small_synth(40, 16);
    const auto set = build_labeled_set(s.corpus, s.embeddings, "o4mini");
    const auto plan = group_kfold(set.groups, 5);
    const auto sh = diag_shuffle(set, plan, 7, 1);
    CHECK(sh.mean_auc >= 0.3);
    CHECK(sh.mean_auc <= 0.7);

    const std::vector<std::size_t> two{0, static_cast<std::size_t>(set.size() - 1)};
    const auto tiny = set.subset(two);
    CHECK_THROWS_AS(diag_shuffle(tiny, group_kfold(tiny.groups, 2), 7, 1), ValidationError);
}

TEST_CASE("l2lr diagnostic runs and separates the planted direction") {
    const auto s = testutil::small_synth(20, 16);
    const auto set = build_labeled_set(s.corpus, s.embeddings, "o4mini");
    CHECK(diag_l2lr(set, group_kfold(set.groups, 5), 1e-3, 1).mean_auc > 0.8);
}

TEST_CASE("cross transfer") {
    const auto s = testutil::small_synth(20, 32);
    const auto a = build_labeled_set(s.corpus, s.embeddings, "mimic_A");
    const auto b = build_labeled_set(s.corpus, s.embeddings, "mimic_B");
    const auto plan = group_kfold(a.groups, 5);
    const auto same = diag_cross_transfer(a, a, plan, 3);
    const auto run = run_detection(a, plan, {}, 3);
    CHECK(same.fold_auc == run.summary.fold_auc);
    CHECK(same.ci.low == run.summary.ci.low);
    CHECK(same.ci.high == run.summary.ci.high);
    CHECK(diag_cross_transfer(a, b, plan, 3).mean_auc > 0.5);
}

}
