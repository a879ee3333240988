#include "stylearena/hypotheses.hpp"

#include <sstream>

#include "stylearena/errors.hpp"

namespace stylearena::hypotheses {

namespace {

using Vec = std::span<const double>;

struct Vectors {
    std::vector<std::array<Vec, 2>> controls;  // per pid
    std::vector<std::vector<Vec>> drafts;      // per pid, per task
    std::vector<std::vector<Vec>> edits;
};

Vec lookup(const EmbeddingTable& emb, const std::string& id) {
    if (!emb.contains(id)) {
        throw ValidationError("missing embedding for " + id);
    }
    return emb.at(id);
}

Vectors gather(const StudyCorpus& corpus, const EmbeddingTable& emb) {
    Vectors v;
    for (const auto& p : corpus.participants) {
        v.controls.push_back({lookup(emb, p.controls[0].body.text_id), lookup(emb, p.controls[1].body.text_id)});
        std::vector<Vec> d;
        std::vector<Vec> e;
        for (const auto& t : p.treatments) {
            d.push_back(lookup(emb, t.draft(kO4Mini).text_id));
            e.push_back(lookup(emb, t.draft(kHumanEdit).text_id));
        }
        v.drafts.push_back(std::move(d));
        v.edits.push_back(std::move(e));
    }
    return v;
}

double own(const Vectors& v, std::size_t p, Vec x) {
    return 0.5 * (cosine(x, v.controls[p][0]) + cosine(x, v.controls[p][1]));
}

double mean_cos(Vec x, const std::vector<Vec>& set) {
    double s = 0.0;
    for (Vec y : set) {
        s += cosine(x, y);
    }
    return s / static_cast<double>(set.size());
}

double llm_others(const Vectors& v, std::size_t p, Vec x) {
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t q = 0; q < v.drafts.size(); ++q) {
        if (q != p) {
            s += mean_cos(x, v.drafts[q]);
            ++n;
        }
    }
    return s / static_cast<double>(n);
}

double homog(const std::vector<std::vector<Vec>>& sets, std::size_t p) {
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t q = 0; q < sets.size(); ++q) {
        if (q == p) {
            continue;
        }
        double pair_sum = 0.0;
        for (Vec x : sets[p]) {
            pair_sum += mean_cos(x, sets[q]);
        }
        s += pair_sum / static_cast<double>(sets[p].size());
        ++n;
    }
    return s / static_cast<double>(n);
}

}  // namespace

Battery run_battery(const StudyCorpus& corpus, const EmbeddingTable& embeddings, const RngPolicy& rng,
                    const BatteryOptions& options) {
    if (corpus.participants.size() < 3) {
        throw ValidationError("hypothesis battery needs at least 3 participants");
    }
    const Vectors v = gather(corpus, embeddings);
    const std::size_t np = corpus.participants.size();

    std::vector<double> own_e, own_d, llm_e, llm_d, cos_ed;
    std::vector<double> llm_c_pid, llm_e_pid, homog_e, homog_d, homog_c;
    std::vector<std::vector<Vec>> control_sets(np);
    for (std::size_t p = 0; p < np; ++p) {
        control_sets[p] = {v.controls[p][0], v.controls[p][1]};
    }
    for (std::size_t p = 0; p < np; ++p) {
        double llm_e_sum = 0.0;
        for (std::size_t t = 0; t < v.edits[p].size(); ++t) {
            own_e.push_back(own(v, p, v.edits[p][t]));
            own_d.push_back(own(v, p, v.drafts[p][t]));
            llm_e.push_back(llm_others(v, p, v.edits[p][t]));
            llm_d.push_back(llm_others(v, p, v.drafts[p][t]));
            cos_ed.push_back(cosine(v.edits[p][t], v.drafts[p][t]));
            llm_e_sum += llm_e.back();
        }
        llm_e_pid.push_back(llm_e_sum / static_cast<double>(v.edits[p].size()));
        llm_c_pid.push_back(0.5 * (llm_others(v, p, v.controls[p][0]) + llm_others(v, p, v.controls[p][1])));
        homog_e.push_back(homog(v.edits, p));
        homog_d.push_back(homog(v.drafts, p));
        homog_c.push_back(homog(control_sets, p));
    }

    struct Spec {
        const char* name;
        const char* unit;
        const char* a;
        const char* b;
        const std::vector<double>* xa;
        const std::vector<double>* xb;
    };
    const Spec specs[] = {
        {"H1a", "task", "own(E)", "own(D)", &own_e, &own_d},
        {"H1b", "task", "llm_others(E)", "llm_others(D)", &llm_e, &llm_d},
        {"H1a'", "task", "own(E)", "llm_others(E)", &own_e, &llm_e},
        {"H1c", "participant", "llm_others(C)", "llm_others(E)", &llm_c_pid, &llm_e_pid},
        {"H2a", "task", "cos(E,D)", "own(E)", &cos_ed, &own_e},
        {"H2b", "participant", "homog(E)", "homog(D)", &homog_e, &homog_d},
        {"H2c", "participant", "homog(E)", "homog(C)", &homog_e, &homog_c},
    };

    Battery out;
    out.q = options.q;
    std::vector<double> raw_p;
    for (const auto& s : specs) {
        HypothesisRow row;
        row.name = s.name;
        row.unit = s.unit;
        row.a = s.a;
        row.b = s.b;
        const auto sample = stats::PairedSample::make(*s.xa, *s.xb);
        row.n = sample.n();
        row.mean_a = stats::mean(sample.a());
        row.mean_b = stats::mean(sample.b());
        row.perm = stats::perm_test_paired(sample, options.n_perm, rng.seed_for(std::string("reproduce/perm/") + s.name));
        row.effect = stats::hedges_g_with_ci(sample, options.n_boot, 0.95,
                                             rng.seed_for(std::string("reproduce/boot/") + s.name));
        raw_p.push_back(row.perm.p_value);
        out.rows.push_back(std::move(row));
    }
    const auto fdr = stats::bh_fdr(raw_p, options.q);
    for (std::size_t i = 0; i < out.rows.size(); ++i) {
        out.rows[i].p_bh = fdr.entries[i].p_bh;
        out.rows[i].bh_rejected = fdr.entries[i].rejected;
    }

    std::vector<std::string> subjects;
    std::vector<double> perceived;
    std::vector<double> measured;
    bool complete = true;
    for (std::size_t p = 0; p < np; ++p) {
        const auto& part = corpus.participants[p];
        for (std::size_t t = 0; t < part.treatments.size(); ++t) {
            const auto& task = part.treatments[t];
            if (!task.perceived_draft || !task.perceived_postedit) {
                complete = false;
                continue;
            }
            subjects.push_back(part.pid);
            perceived.push_back(likert_mean(*task.perceived_draft));
            measured.push_back(own(v, p, v.drafts[p][t]));
            subjects.push_back(part.pid);
            perceived.push_back(likert_mean(*task.perceived_postedit));
            measured.push_back(own(v, p, v.edits[p][t]));
        }
    }
    if (complete && !subjects.empty()) {
        out.h3 = stats::rmcorr(subjects, perceived, measured);
    }
    return out;
}

Json Battery::to_json() const {
    Json j;
    j["hypotheses"] = Json::array();
    for (const auto& r : rows) {
        Json e;
        e["name"] = r.name;
        e["unit"] = r.unit;
        e["a"] = r.a;
        e["b"] = r.b;
        e["n"] = r.n;
        e["mean_a"] = r.mean_a;
        e["mean_b"] = r.mean_b;
        e["statistic"] = r.perm.statistic;
        e["p"] = r.perm.p_value;
        e["n_perm"] = r.perm.n_perm;
        e["seed"] = r.perm.seed;
        e["g"] = r.effect.g;
        e["ci"] = interval_json(r.effect.ci);
        e["p_bh"] = r.p_bh;
        e["bh_rejected"] = r.bh_rejected;
        j["hypotheses"].push_back(std::move(e));
    }
    j["bh_q"] = q;
    if (h3) {
        Json e;
        e["r"] = h3->r;
        e["dof"] = h3->dof;
        e["p"] = h3->p;
        e["ci"] = interval_json(h3->ci);
        e["n"] = h3->n_obs;
        e["n_subjects"] = h3->n_subjects;
        j["H3"] = e;
    } else {
        j["H3"] = nullptr;
    }
    return j;
}

std::string Battery::table1_csv() const {
    std::ostringstream out;
    out << "hypothesis,unit,n,statistic,g,ci_low,ci_high,p,p_bh,bh_rejected\n";
    for (const auto& r : rows) {
        out << r.name << ',' << r.unit << ',' << r.n << ',' << format_number(r.perm.statistic) << ','
            << format_number(r.effect.g) << ',' << format_number(r.effect.ci.low) << ','
            << format_number(r.effect.ci.high) << ',' << format_number(r.perm.p_value) << ','
            << format_number(r.p_bh) << ',' << (r.bh_rejected ? "true" : "false") << '\n';
    }
    if (h3) {
        out << "H3,observation," << h3->n_obs << ',' << format_number(h3->r) << ",," << format_number(h3->ci.low)
            << ',' << format_number(h3->ci.high) << ',' << format_number(h3->p) << ",,\n";
    }
    return out.str();
}

}  // namespace stylearena::hypotheses
