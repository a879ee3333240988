#include "stylearena/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>

#include <CLI11.hpp>

#include "stylearena/advloop.hpp"
#include "stylearena/corpus.hpp"
#include "stylearena/detect.hpp"
#include "stylearena/embeddings.hpp"
#include "stylearena/errors.hpp"
#include "stylearena/heldout.hpp"
#include "stylearena/hypotheses.hpp"
#include "stylearena/report.hpp"
#include "stylearena/synth.hpp"
#include "stylearena/version.hpp"

namespace stylearena::cli {

namespace fs = std::filesystem;

namespace {

struct RunConfig {
    std::string corpus;
    std::string embeddings;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> approaches;
    std::string protocol_tag = std::string(kDefaultProtocolTag);
    std::size_t folds = 5;
    std::size_t iters = 20;
    std::size_t targets = 5;
    std::size_t fold = 0;
    std::string adversary = "reference";
    std::string detector;
    std::string approach;
    std::string policy = "keep-candidate";
    double step_scale = 0.5;
    std::size_t n_perm = 10000;
    std::size_t n_boot = 1000;
    std::size_t pca_k = 32;
    double l2lr_c = 1e-3;
    bool allow_unknown_scenarios = false;

    std::uint64_t master_seed() const { return seed.value_or(0); }
    ArtifactMeta meta() const { return {master_seed(), protocol_tag}; }
};

struct SynthConfig {
    SynthParams params;
    bool binary = false;
};

struct Loaded {
    StudyCorpus corpus;
    EmbeddingTable embeddings;
};

void write_file(const fs::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
        if (ec) {
            throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
        }
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw IoError("cannot write " + path.string());
    }
    f << content;
    if (!f) {
        throw IoError("write failed: " + path.string());
    }
}

void write_json(const fs::path& path, const ArtifactMeta& meta, Json body) {
    Json doc;
    doc["meta"] = meta.to_json();
    for (auto& [k, v] : body.items()) {
        doc[k] = std::move(v);
    }
    write_file(path, doc.dump(2) + "\n");
}

void write_csv(const fs::path& path, const ArtifactMeta& meta, const std::string& body) {
    write_file(path, meta.csv_comment() + body);
}

void require(const std::string& value, const char* flag) {
    if (value.empty()) {
        throw ValidationError(std::string("missing required flag ") + flag);
    }
}

Loaded load_inputs(const RunConfig& cfg) {
    require(cfg.corpus, "--corpus");
    require(cfg.embeddings, "--embeddings");
    LoadOptions opt;
    opt.allow_unknown_scenarios = cfg.allow_unknown_scenarios;
    auto loaded = load_corpus(cfg.corpus, opt);
    return {std::move(loaded.corpus), load_embeddings(cfg.embeddings)};
}

std::vector<std::string> approaches_for(const RunConfig& cfg, const StudyCorpus& corpus) {
    const auto present = corpus.approaches();
    if (cfg.approaches.empty()) {
        return present;
    }
    for (const auto& a : cfg.approaches) {
        if (std::find(present.begin(), present.end(), a) == present.end()) {
            throw ValidationError("approach '" + a + "' is not present on every treatment task");
        }
    }
    return cfg.approaches;
}

std::string summary_tail(const RunConfig& cfg) {
    return " seed=" + std::to_string(cfg.master_seed()) + " protocol_tag=" + cfg.protocol_tag;
}

std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

// ---------------------------------------------------------------- commands

int cmd_synth(const RunConfig& cfg, SynthConfig sc, std::ostream& out) {
    require(cfg.out, "--out");
    sc.params.seed = cfg.master_seed();
    sc.params.protocol_tag = cfg.protocol_tag;
    const auto synth = synth_corpus(sc.params);
    const fs::path dir(cfg.out);
    save_corpus(synth.corpus, dir / "corpus");
    const fs::path emb = dir / (sc.binary ? "embeddings.bin" : "embeddings.jsonl");
    if (sc.binary) {
        save_embeddings_binary(synth.embeddings, emb);
    } else {
        save_embeddings_jsonl(synth.embeddings, emb);
    }
    out << "synth: " << synth.corpus.participants.size() << " pids, " << synth.embeddings.size()
        << " vectors -> " << dir.string() << summary_tail(cfg) << "\n";
    return 0;
}

int cmd_final_assessment(const RunConfig& cfg, const Loaded& in, std::ostream& out, std::ostream& err) {
    require(cfg.out, "--out");
    const fs::path dir(cfg.out);
    const auto meta = cfg.meta();
    const RngPolicy rng{cfg.master_seed()};

    const auto assignments = heldout::assign_heldout(in.corpus);
    const auto leakage = heldout::check_no_leakage(in.corpus, assignments, cfg.protocol_tag);
    const auto approaches = approaches_for(cfg, in.corpus);
    const auto table = heldout::build_heldout_table(in.corpus, in.embeddings, approaches);
    const auto ceil = heldout::ceiling(in.corpus, in.embeddings);
    heldout::AssessmentOptions opt;
    opt.n_perm = cfg.n_perm;
    opt.n_boot = cfg.n_boot;
    const auto report = heldout::final_assessment(table, rng, opt, ceil);
    const auto audit = heldout::audit_drafts(in.corpus);

    Json leak;
    leak["passed"] = leakage.passed;
    leak["failures"] = leakage.failures;
    Json assignments_json = Json::array();
    for (const auto& a : assignments) {
        assignments_json.push_back({{"pid", a.pid}, {"demo", a.demo_text_id}, {"target", a.target_text_id}});
    }
    Json body = report.to_json();
    body["leakage"] = leak;
    body["assignments"] = assignments_json;
    write_json(dir / "final_assessment.json", meta, std::move(body));
    write_json(dir / "draft_audit.json", meta, audit.to_json());
    write_csv(dir / "heldout_table.csv", meta, heldout::heldout_table_csv(table));
    write_csv(dir / "pairs.csv", meta, report.pairs_csv());
    write_csv(dir / "scenarios.csv", meta, report.scenarios_csv());

    out << "final-assessment: " << table.rows.size() << " rows";
    for (const auto& c : report.columns) {
        out << " " << c.approach << "=" << fixed3(c.mean);
    }
    out << " ceiling=" << fixed3(ceil.value) << summary_tail(cfg) << "\n";
    if (!leakage.passed) {
        for (const auto& f : leakage.failures) {
            err << "leakage: " << f << "\n";
        }
        return 2;
    }
    return 0;
}

int cmd_reproduce(const RunConfig& cfg, const Loaded& in, std::ostream& out) {
    require(cfg.out, "--out");
    const fs::path dir(cfg.out);
    hypotheses::BatteryOptions opt;
    opt.n_perm = cfg.n_perm;
    opt.n_boot = cfg.n_boot;
    const auto battery = hypotheses::run_battery(in.corpus, in.embeddings, RngPolicy{cfg.master_seed()}, opt);
    write_json(dir / "reproduce.json", cfg.meta(), battery.to_json());
    write_csv(dir / "table1.csv", cfg.meta(), battery.table1_csv());
    std::size_t rejected = 0;
    for (const auto& r : battery.rows) {
        rejected += r.bh_rejected ? 1 : 0;
    }
    out << "reproduce: " << rejected << "/" << battery.rows.size() << " hypotheses rejected at q=" << battery.q;
    if (battery.h3) {
        out << " H3 r=" << fixed3(battery.h3->r) << " n=" << battery.h3->n_obs;
    }
    out << summary_tail(cfg) << "\n";
    return 0;
}

int cmd_detect(const RunConfig& cfg, const Loaded& in, std::ostream& out) {
    require(cfg.out, "--out");
    const fs::path dir(cfg.out);
    const RngPolicy rng{cfg.master_seed()};
    Json runs = Json::array();
    std::string csv = "approach,mean_auc,ci_low,ci_high,sd_auc,fold_auc\n";
    out << "detect:";
    for (const auto& approach : approaches_for(cfg, in.corpus)) {
        const auto set = detect::build_labeled_set(in.corpus, in.embeddings, approach);
        const auto plan = detect::group_kfold(set.groups, cfg.folds);
        const auto run = detect::run_detection(set, plan, {}, rng.seed_for("detect/boot/" + approach));
        runs.push_back(run.to_json());
        std::string folds;
        for (std::size_t f = 0; f < run.summary.fold_auc.size(); ++f) {
            folds += (f ? ";" : "") + format_number(run.summary.fold_auc[f]);
            const auto frozen = advloop::FrozenDetector::freeze(run, f, cfg.protocol_tag);
            write_file(dir / "models" / (approach + "_fold" + std::to_string(f) + ".json"),
                       frozen.to_json().dump(2) + "\n");
        }
        csv += approach + "," + format_number(run.summary.mean_auc) + "," + format_number(run.summary.ci.low) + "," +
               format_number(run.summary.ci.high) + "," + format_number(run.summary.sd_auc) + "," + folds + "\n";
        out << " " << approach << "=" << fixed3(run.summary.mean_auc);
    }
    Json body;
    body["runs"] = runs;
    write_json(dir / "detection.json", cfg.meta(), std::move(body));
    write_csv(dir / "table4.csv", cfg.meta(), csv);
    out << summary_tail(cfg) << "\n";
    return 0;
}

int cmd_diagnose(const RunConfig& cfg, const Loaded& in, std::ostream& out, std::ostream& err) {
    require(cfg.out, "--out");
    const fs::path dir(cfg.out);
    const RngPolicy rng{cfg.master_seed()};
    const auto approaches = approaches_for(cfg, in.corpus);

    detect::DiagnosticsReport report;
    report.pca_k = cfg.pca_k;
    report.l2lr_c = cfg.l2lr_c;
    std::map<std::string, detect::LabeledSet> sets;
    std::optional<detect::FoldPlan> shared_plan;
    for (const auto& a : approaches) {
        sets.emplace(a, detect::build_labeled_set(in.corpus, in.embeddings, a));
        const auto& set = sets.at(a);
        const auto plan = detect::group_kfold(set.groups, cfg.folds);
        if (!shared_plan) {
            shared_plan = plan;
        }
        detect::ApproachDiagnostics d;
        d.approach = a;
        d.audit = detect::leakage_audit(plan, set);
        const std::string base = "diagnose/" + a + "/";
        d.full = detect::cross_validate(set, set, plan, detect::svm_fit_score(), rng.seed_for(base + "full"));
        d.shuffle = detect::diag_shuffle(set, plan, rng.seed_for(base + "shuffle"), rng.seed_for(base + "shuffle/boot"));
        d.length_only = detect::diag_length_only(set, plan, rng.seed_for(base + "length"));
        d.pca = detect::diag_pca_svm(set, plan, cfg.pca_k, rng.seed_for(base + "pca"));
        d.l2lr = detect::diag_l2lr(set, plan, cfg.l2lr_c, rng.seed_for(base + "l2lr"));
        report.approaches.push_back(std::move(d));
    }
    std::vector<std::string> mimics;
    for (const auto& a : approaches) {
        if (a != kO4Mini && a != kHumanEdit) {
            mimics.push_back(a);
        }
    }
    const auto& pool = mimics.size() >= 2 ? mimics : approaches;
    for (const auto& a : pool) {
        for (const auto& b : pool) {
            if (a == b) {
                continue;
            }
            report.cross.push_back({a, b,
                                    detect::diag_cross_transfer(sets.at(a), sets.at(b), *shared_plan,
                                                                rng.seed_for("diagnose/cross/" + a + "->" + b))});
        }
    }
    write_json(dir / "diagnostics.json", cfg.meta(), report.to_json());
    write_csv(dir / "table5.csv", cfg.meta(), report.table5_csv());
    out << "diagnose:";
    for (const auto& d : report.approaches) {
        out << " " << d.approach << "[full=" << fixed3(d.full.mean_auc) << " len=" << fixed3(d.length_only.mean_auc)
            << " overlap=" << d.audit.overlap_string() << "]";
    }
    out << summary_tail(cfg) << "\n";
    if (!report.audits_passed()) {
        for (const auto& d : report.approaches) {
            for (const auto& f : d.audit.failures) {
                err << "leakage (" << d.approach << "): " << f << "\n";
            }
        }
        return 2;
    }
    return 0;
}

std::string default_adversarial_approach(const StudyCorpus& corpus) {
    const auto present = corpus.approaches();
    for (const auto& a : present) {
        if (a != kO4Mini && a != kHumanEdit) {
            return a;
        }
    }
    return present.front();
}

int cmd_adversarial(const RunConfig& cfg, const Loaded& in, std::ostream& out, std::ostream& err) {
    require(cfg.out, "--out");
    const fs::path dir(cfg.out);
    const RngPolicy rng{cfg.master_seed()};

    std::optional<advloop::FrozenDetector> det;
    if (!cfg.detector.empty()) {
        std::ifstream f(cfg.detector);
        if (!f) {
            throw IoError("cannot read detector " + cfg.detector);
        }
        Json j;
        try {
            j = Json::parse(f);
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("detector " + cfg.detector + ": " + e.what());
        }
        det = advloop::FrozenDetector::from_json(j);
        if (det->protocol_tag() != cfg.protocol_tag) {
            throw ValidationError("detector protocol tag '" + det->protocol_tag() + "' differs from '" +
                                  cfg.protocol_tag + "'");
        }
    } else {
        const std::string approach = cfg.approach.empty() ? default_adversarial_approach(in.corpus) : cfg.approach;
        const auto set = detect::build_labeled_set(in.corpus, in.embeddings, approach);
        const auto plan = detect::group_kfold(set.groups, cfg.folds);
        const auto run = detect::run_detection(set, plan, {}, rng.seed_for("adversarial/boot/" + approach));
        det = advloop::FrozenDetector::freeze(run, cfg.fold, cfg.protocol_tag);
    }
    if (det->dim() != in.embeddings.dim()) {
        throw ValidationError("detector dim does not match the embeddings");
    }
    const auto set = detect::build_labeled_set(in.corpus, in.embeddings, det->approach());
    const auto targets = advloop::select_targets(*det, set, cfg.targets, &in.corpus);
    const auto audit = advloop::adversarial_leakage_audit(*det, targets);
    if (!audit.passed) {
        for (const auto& f : audit.failures) {
            err << "adversarial audit: " << f << "\n";
        }
        return 2;
    }

    advloop::AdversaryFactory factory;
    if (cfg.adversary == "reference") {
        factory = [&](const advloop::AdversarialTarget& t) -> std::unique_ptr<advloop::Adversary> {
            advloop::ReferenceOptions opt;
            opt.step_scale = cfg.step_scale;
            opt.seed = rng.seed_for("adversarial/reference/" + t.name());
            const auto start = in.embeddings.at(t.text_id);
            const advloop::FrozenDetector* d = &*det;
            return std::make_unique<advloop::ReferenceAdversary>(
                [d](std::span<const double> x) { return d->margin(x); },
                std::vector<double>(start.begin(), start.end()), opt);
        };
    } else if (cfg.adversary.rfind("exec:", 0) == 0 && cfg.adversary.size() > 5) {
        const std::string cmd = cfg.adversary.substr(5);
        factory = [cmd](const advloop::AdversarialTarget&) -> std::unique_ptr<advloop::Adversary> {
            return std::make_unique<advloop::ExecAdversary>(cmd);
        };
    } else {
        throw ValidationError("--adversary must be 'reference' or 'exec:<command>'");
    }
    advloop::AcceptPolicy policy;
    if (cfg.policy == "keep-candidate") {
        policy = advloop::AcceptPolicy::KeepCandidate;
    } else if (cfg.policy == "keep-best") {
        policy = advloop::AcceptPolicy::KeepBest;
    } else {
        throw ValidationError("--policy must be keep-candidate or keep-best");
    }

    advloop::TableEmbedder embedder(in.embeddings);
    const auto trajectories = advloop::run_targets(*det, targets, factory, embedder, cfg.iters, policy);
    const auto final_audit = advloop::adversarial_leakage_audit(*det, targets);

    Json meta = cfg.meta().to_json();
    meta["adversary"] = cfg.adversary;
    meta["iters"] = cfg.iters;
    meta["policy"] = cfg.policy;
    write_file(dir / "trajectories.jsonl", advloop::trajectories_jsonl(trajectories, meta));

    Json body;
    body["detector"] = {{"approach", det->approach()},
                        {"fold_id", det->fold_id()},
                        {"n_train_pids", det->train_pids().size()},
                        {"n_test_pids", det->test_pids().size()}};
    body["audit"] = final_audit.to_json();
    body["targets"] = Json::array();
    double initial = 0.0;
    double final_sum = 0.0;
    std::size_t crossed = 0;
    bool truncated = false;
    for (const auto& t : trajectories) {
        body["targets"].push_back(t.summary_json());
        initial += t.target.initial_margin;
        final_sum += t.final_margin;
        crossed += t.final_margin < 0.0 ? 1 : 0;
        truncated = truncated || t.error.has_value();
    }
    const double n = static_cast<double>(trajectories.size());
    body["mean_initial_margin"] = initial / n;
    body["mean_final_margin"] = final_sum / n;
    body["crossed_zero"] = crossed;
    write_json(dir / "adversarial.json", cfg.meta(), std::move(body));
    write_file(dir / "detector.json", det->to_json().dump(2) + "\n");

    out << "adversarial: " << trajectories.size() << " targets, mean margin " << fixed3(initial / n) << " -> "
        << fixed3(final_sum / n) << ", " << crossed << " crossed 0" << summary_tail(cfg) << "\n";
    if (!final_audit.passed) {
        return 2;
    }
    if (truncated) {
        for (const auto& t : trajectories) {
            if (t.error) {
                err << "trajectory " << t.target.name() << " truncated: " << *t.error << "\n";
            }
        }
        return 3;
    }
    return 0;
}

int cmd_pipeline(const RunConfig& cfg, const Loaded& in, std::ostream& out, std::ostream& err) {
    require(cfg.out, "--out");
    const fs::path dir(cfg.out);
    auto sub = [&](const char* name) {
        RunConfig c = cfg;
        c.out = (dir / name).string();
        return c;
    };
    int rc = cmd_final_assessment(sub("final_assessment"), in, out, err);
    if (rc == 0) {
        rc = cmd_reproduce(sub("reproduce"), in, out);
    }
    if (rc == 0) {
        rc = cmd_detect(sub("detect"), in, out);
    }
    if (rc == 0) {
        rc = cmd_diagnose(sub("diagnose"), in, out, err);
    }
    if (rc == 0) {
        rc = cmd_adversarial(sub("adversarial"), in, out, err);
    }
    return rc;
}

std::optional<std::uint64_t> env_seed() {
    const char* raw = std::getenv("STYLE_ARENA_SEED");
    if (raw == nullptr || *raw == '\0') {
        return std::nullopt;
    }
    try {
        std::size_t used = 0;
        const auto v = std::stoull(raw, &used, 10);
        if (used != std::string(raw).size()) {
            throw std::invalid_argument("trailing characters");
        }
        return v;
    } catch (const std::exception&) {
        throw ValidationError(std::string("STYLE_ARENA_SEED is not an unsigned integer: ") + raw);
    }
}

void add_common(CLI::App* app, RunConfig& cfg, bool needs_inputs) {
    if (needs_inputs) {
        app->add_option("--corpus", cfg.corpus, "Directory of participant logs (or a single log)");
        app->add_option("--embeddings", cfg.embeddings, "Embedding file (JSONL or binary)");
        app->add_option("--approaches", cfg.approaches, "Approach labels, comma separated")->delimiter(',');
        app->add_flag("--allow-unknown-scenarios", cfg.allow_unknown_scenarios);
    }
    app->add_option("--out", cfg.out, "Output directory");
    app->add_option("--seed", cfg.seed, "Master seed (default: $STYLE_ARENA_SEED, else 0)");
    app->add_option("--protocol-tag", cfg.protocol_tag, "Protocol tag recorded in cache keys");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"stylearena: held-out style evaluation and detection arms race"};
    app.set_version_flag("--version", std::string(version()));
    app.require_subcommand(1);

    RunConfig cfg;
    SynthConfig sc;

    auto* synth = app.add_subcommand("synth", "Write a synthetic corpus and its embeddings");
    add_common(synth, cfg, false);
    synth->add_option("--pids", sc.params.n_pids);
    synth->add_option("--dim", sc.params.dim);
    synth->add_option("--style-signal", sc.params.style_signal);
    synth->add_option("--length-bias", sc.params.length_bias);
    synth->add_option("--fidelity", sc.params.mimic_fidelity);
    synth->add_option("--length-coupling", sc.params.length_coupling);
    synth->add_option("--noise", sc.params.noise);
    synth->add_option("--mimics", sc.params.mimic_labels)->delimiter(',');
    synth->add_flag("--binary", sc.binary, "Write the binary embedding format");

    auto* reproduce = app.add_subcommand("reproduce", "Seven-hypothesis battery and H3 rmcorr");
    add_common(reproduce, cfg, true);
    reproduce->add_option("--n-perm", cfg.n_perm);
    reproduce->add_option("--n-boot", cfg.n_boot);

    auto* final_cmd = app.add_subcommand("final-assessment", "Held-out table, assessment battery, draft audit");
    add_common(final_cmd, cfg, true);
    final_cmd->add_option("--n-perm", cfg.n_perm);
    final_cmd->add_option("--n-boot", cfg.n_boot);

    auto* detect_cmd = app.add_subcommand("detect", "Leave-authors-out linear SVM detection");
    add_common(detect_cmd, cfg, true);
    detect_cmd->add_option("--folds", cfg.folds);

    auto* diagnose = app.add_subcommand("diagnose", "Detection diagnostics A-F");
    add_common(diagnose, cfg, true);
    diagnose->add_option("--folds", cfg.folds);
    diagnose->add_option("--pca-k", cfg.pca_k);
    diagnose->add_option("--l2lr-c", cfg.l2lr_c);

    auto* adversarial = app.add_subcommand("adversarial", "Adversarial rewriting loop against a frozen detector");
    add_common(adversarial, cfg, true);
    adversarial->add_option("--detector", cfg.detector, "Frozen detector JSON (from detect)");
    adversarial->add_option("--approach", cfg.approach, "Approach to train on when no --detector is given");
    adversarial->add_option("--folds", cfg.folds);
    adversarial->add_option("--fold", cfg.fold, "0-based fold id to freeze");
    adversarial->add_option("--targets", cfg.targets);
    adversarial->add_option("--iters", cfg.iters);
    adversarial->add_option("--adversary", cfg.adversary, "reference | exec:<command>");
    adversarial->add_option("--policy", cfg.policy, "keep-candidate | keep-best");
    adversarial->add_option("--step-scale", cfg.step_scale);

    auto* pipeline = app.add_subcommand("pipeline", "final-assessment, reproduce, detect, diagnose, adversarial");
    add_common(pipeline, cfg, true);
    pipeline->add_option("--folds", cfg.folds);
    pipeline->add_option("--iters", cfg.iters);
    pipeline->add_option("--targets", cfg.targets);
    pipeline->add_option("--adversary", cfg.adversary);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << version() << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return 2;
    }

    try {
        if (!cfg.seed) {
            cfg.seed = env_seed();
        }
        if (synth->parsed()) {
            return cmd_synth(cfg, sc, out);
        }
        const Loaded in = load_inputs(cfg);
        if (reproduce->parsed()) {
            return cmd_reproduce(cfg, in, out);
        }
        if (final_cmd->parsed()) {
            return cmd_final_assessment(cfg, in, out, err);
        }
        if (detect_cmd->parsed()) {
            return cmd_detect(cfg, in, out);
        }
        if (diagnose->parsed()) {
            return cmd_diagnose(cfg, in, out, err);
        }
        if (adversarial->parsed()) {
            return cmd_adversarial(cfg, in, out, err);
        }
        if (pipeline->parsed()) {
            return cmd_pipeline(cfg, in, out, err);
        }
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const ConvergenceError& e) {
        err << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 1;
    }
    err << app.help();
    return 2;
}

}  // namespace stylearena::cli
