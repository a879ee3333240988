#include <algorithm>
#include <sstream>

#include "stylearena/errors.hpp"
#include "stylearena/heldout.hpp"

namespace stylearena::heldout {

namespace {

bool is_mimic(std::string_view label) { return label != kO4Mini && label != kHumanEdit; }

Json test_json(const stats::TestResult& t) {
    Json j;
    j["statistic"] = t.statistic;
    j["p"] = t.p_value;
    j["n_perm"] = t.n_perm;
    j["exact"] = t.exact;
    j["degenerate"] = t.degenerate;
    j["seed"] = t.seed;
    return j;
}

}  // namespace

FinalAssessment final_assessment(const HeldOutTable& table, const RngPolicy& rng, const AssessmentOptions& options,
                                 std::optional<CeilingEstimate> ceiling_estimate) {
    const std::size_t k = table.approaches.size();
    if (k < 2 || table.rows.size() < 3) {
        throw ValidationError("final_assessment: need at least 2 approaches and 3 rows");
    }
    for (const auto& row : table.rows) {
        if (row.similarity.size() != k) {
            throw ValidationError("final_assessment: incomplete row for pid " + row.pid);
        }
    }
    FinalAssessment out;
    out.n_perm = options.n_perm;
    out.n_boot = options.n_boot;
    out.q = options.q;

    std::vector<std::vector<double>> columns(k);
    for (std::size_t j = 0; j < k; ++j) {
        columns[j] = table.column(j);
        out.columns.push_back({table.approaches[j], stats::mean(columns[j]), stats::median(columns[j])});
    }

    std::vector<std::vector<double>> matrix;
    matrix.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        matrix.push_back(row.similarity);
    }
    try {
        out.friedman = stats::friedman(matrix);
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("no discrimination: ") + e.what());
    }

    std::vector<double> raw_p;
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) {
            PairwiseResult pr;
            pr.a = table.approaches[a];
            pr.b = table.approaches[b];
            pr.mean_a = out.columns[a].mean;
            pr.mean_b = out.columns[b].mean;
            const std::string name = pr.a + "_vs_" + pr.b;
            const auto sample = stats::PairedSample::make(columns[a], columns[b]);
            pr.perm = stats::perm_test_paired(sample, options.n_perm, rng.seed_for("final_assessment/perm/" + name));
            pr.effect = stats::hedges_g_with_ci(sample, options.n_boot, 0.95,
                                                rng.seed_for("final_assessment/boot/" + name));
            pr.wilcoxon = stats::wilcoxon_signed_rank(sample);
            pr.wilcoxon_agrees = (pr.perm.p_value < options.alpha) == (pr.wilcoxon.p < options.alpha);
            raw_p.push_back(pr.perm.p_value);
            out.pairs.push_back(std::move(pr));
        }
    }
    const auto fdr = stats::bh_fdr(raw_p, options.q);
    for (std::size_t i = 0; i < out.pairs.size(); ++i) {
        out.pairs[i].p_bh = fdr.entries[i].p_bh;
        out.pairs[i].bh_rejected = fdr.entries[i].rejected;
    }

    auto human = std::find(table.approaches.begin(), table.approaches.end(), kHumanEdit);
    if (human != table.approaches.end()) {
        const auto h = static_cast<std::size_t>(human - table.approaches.begin());
        out.human_threshold_mean = out.columns[h].mean;
        out.human_threshold_median = out.columns[h].median;
        for (std::size_t j = 0; j < k; ++j) {
            if (j == h) {
                continue;
            }
            std::size_t wins = 0;
            std::size_t ties = 0;
            for (std::size_t i = 0; i < table.rows.size(); ++i) {
                wins += columns[j][i] > columns[h][i] ? 1 : 0;
                ties += columns[j][i] == columns[h][i] ? 1 : 0;
            }
            out.winrates.emplace_back(table.approaches[j], stats::winrate(wins, ties, table.rows.size()));
        }
    }

    std::map<std::string, std::vector<std::size_t>> by_scenario;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        by_scenario[table.rows[i].scenario].push_back(i);
    }
    for (const auto& [scenario, idx] : by_scenario) {
        std::vector<double> means(k);
        for (std::size_t j = 0; j < k; ++j) {
            std::vector<double> values;
            for (std::size_t i : idx) {
                values.push_back(columns[j][i]);
            }
            ScenarioCell cell;
            cell.scenario = scenario;
            cell.approach = table.approaches[j];
            cell.n = values.size();
            cell.mean = stats::mean(values);
            means[j] = cell.mean;
            if (values.size() >= 2) {
                cell.ci = stats::bootstrap_ci(
                    values, [](std::span<const double> r) { return stats::mean(r); }, options.n_boot, 0.95,
                    rng.seed_for("final_assessment/scenario/" + scenario + "/" + table.approaches[j]));
            } else {
                cell.ci = {cell.mean, cell.mean};
            }
            out.scenarios.push_back(std::move(cell));
        }
        bool holds = true;
        const auto o4 = std::find(table.approaches.begin(), table.approaches.end(), kO4Mini);
        if (human != table.approaches.end() && o4 != table.approaches.end()) {
            const double mh = means[static_cast<std::size_t>(human - table.approaches.begin())];
            const double mo = means[static_cast<std::size_t>(o4 - table.approaches.begin())];
            holds = mh > mo;
            for (std::size_t j = 0; j < k; ++j) {
                if (is_mimic(table.approaches[j])) {
                    holds = holds && means[j] > mh;
                }
            }
        }
        out.scenario_ordering[scenario] = holds;
    }

    if (ceiling_estimate) {
        out.ceiling = ceiling_estimate;
        if (std::find(table.approaches.begin(), table.approaches.end(), kO4Mini) != table.approaches.end()) {
            out.gap_closure = gap_closure(table, ceiling_estimate->value);
        }
    }
    return out;
}

Json FinalAssessment::to_json() const {
    Json j;
    j["columns"] = Json::array();
    for (std::size_t c = 0; c < columns.size(); ++c) {
        Json e;
        e["approach"] = columns[c].approach;
        e["mean"] = columns[c].mean;
        e["median"] = columns[c].median;
        if (!gap_closure.empty()) {
            e["gap_closure"] = gap_closure[c];
        }
        j["columns"].push_back(std::move(e));
    }
    Json thr;
    thr["human_mean"] = human_threshold_mean;
    thr["human_median"] = human_threshold_median;
    j["threshold"] = thr;
    if (ceiling) {
        Json c;
        c["value"] = ceiling->value;
        c["n_pairs"] = ceiling->n_pairs;
        j["ceiling"] = c;
    }
    Json fr;
    fr["chi2"] = friedman.chi2;
    fr["dof"] = friedman.dof;
    fr["n"] = friedman.n;
    fr["p"] = friedman.p;
    j["friedman"] = fr;

    j["pairs"] = Json::array();
    for (const auto& p : pairs) {
        Json e;
        e["a"] = p.a;
        e["b"] = p.b;
        e["mean_a"] = p.mean_a;
        e["mean_b"] = p.mean_b;
        e["g"] = p.effect.g;
        e["g_ci"] = interval_json(p.effect.ci);
        e["n_boot"] = p.effect.n_boot;
        e["perm"] = test_json(p.perm);
        e["p_bh"] = p.p_bh;
        e["bh_rejected"] = p.bh_rejected;
        Json w;
        w["w"] = p.wilcoxon.w;
        w["p"] = p.wilcoxon.p;
        w["exact"] = p.wilcoxon.exact;
        w["agrees_with_perm"] = p.wilcoxon_agrees;
        e["wilcoxon"] = w;
        Json flags = Json::array();
        if (p.effect.ci_excludes_point) {
            flags.push_back("ci_excludes_point");
        }
        if (p.perm.degenerate) {
            flags.push_back("degenerate");
        }
        e["flags"] = flags;
        j["pairs"].push_back(std::move(e));
    }
    j["bh_q"] = q;

    j["winrates"] = Json::array();
    for (const auto& [approach, w] : winrates) {
        Json e;
        e["approach"] = approach;
        e["wins"] = w.wins;
        e["ties"] = w.ties;
        e["n"] = w.n;
        e["rate"] = w.rate;
        e["ci"] = interval_json(w.ci);
        e["p_vs_half"] = w.p_vs_half;
        j["winrates"].push_back(std::move(e));
    }

    j["scenarios"] = Json::array();
    for (const auto& c : scenarios) {
        Json e;
        e["scenario"] = c.scenario;
        e["approach"] = c.approach;
        e["n"] = c.n;
        e["mean"] = c.mean;
        e["ci"] = interval_json(c.ci);
        j["scenarios"].push_back(std::move(e));
    }
    Json ordering;
    for (const auto& [s, holds] : scenario_ordering) {
        ordering[s] = holds;
    }
    j["scenario_ordering"] = ordering;
    return j;
}

std::string FinalAssessment::pairs_csv() const {
    std::ostringstream out;
    out << "a,b,mean_a,mean_b,g,g_ci_low,g_ci_high,p_perm,p_bh,bh_rejected,wilcoxon_p,wilcoxon_agrees\n";
    for (const auto& p : pairs) {
        out << p.a << ',' << p.b << ',' << format_number(p.mean_a) << ',' << format_number(p.mean_b) << ','
            << format_number(p.effect.g) << ',' << format_number(p.effect.ci.low) << ','
            << format_number(p.effect.ci.high) << ',' << format_number(p.perm.p_value) << ','
            << format_number(p.p_bh) << ',' << (p.bh_rejected ? "true" : "false") << ','
            << format_number(p.wilcoxon.p) << ',' << (p.wilcoxon_agrees ? "true" : "false") << '\n';
    }
    return out.str();
}

std::string FinalAssessment::scenarios_csv() const {
    std::ostringstream out;
    out << "scenario,approach,n,mean,ci_low,ci_high\n";
    for (const auto& c : scenarios) {
        out << c.scenario << ',' << c.approach << ',' << c.n << ',' << format_number(c.mean) << ','
            << format_number(c.ci.low) << ',' << format_number(c.ci.high) << '\n';
    }
    return out.str();
}

std::string heldout_table_csv(const HeldOutTable& table) {
    std::ostringstream out;
    out << "pid,task_idx,scenario";
    for (const auto& a : table.approaches) {
        out << ",sim_" << a;
    }
    for (const auto& a : table.approaches) {
        out << ",words_" << a;
    }
    out << '\n';
    for (const auto& row : table.rows) {
        out << row.pid << ',' << row.task_idx << ',' << row.scenario;
        for (double s : row.similarity) {
            out << ',' << format_number(s);
        }
        for (std::size_t w : row.word_counts) {
            out << ',' << w;
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace stylearena::heldout
