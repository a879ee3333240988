#include "stylearena/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "stylearena/errors.hpp"
#include "stylearena/text.hpp"

namespace stylearena {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

[[noreturn]] void field_error(std::string_view who, std::string_view field, std::string_view what) {
    throw ValidationError("participant " + std::string(who) + ": field '" + std::string(field) +
                          "' " + std::string(what));
}

const json& require(const json& obj, std::string_view who, const char* field) {
    if (!obj.is_object() || !obj.contains(field)) {
        field_error(who, field, "is missing");
    }
    return obj.at(field);
}

std::string require_string(const json& obj, std::string_view who, const char* field) {
    const json& v = require(obj, who, field);
    if (!v.is_string()) {
        field_error(who, field, "must be a string");
    }
    return v.get<std::string>();
}

int require_int(const json& obj, std::string_view who, const char* field) {
    const json& v = require(obj, who, field);
    if (!v.is_number_integer()) {
        field_error(who, field, "must be an integer");
    }
    return v.get<int>();
}

std::optional<std::array<double, 2>> optional_likert(const json& obj, std::string_view who,
                                                     const char* field) {
    if (!obj.contains(field) || obj.at(field).is_null()) {
        return std::nullopt;
    }
    const json& v = obj.at(field);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        field_error(who, field, "must be an array of two numbers");
    }
    return std::array<double, 2>{v[0].get<double>(), v[1].get<double>()};
}

TextRecord make_record(std::string id, std::string text) {
    TextRecord rec;
    rec.word_count = word_count(text);
    rec.text_id = std::move(id);
    rec.text = std::move(text);
    return rec;
}

Participant parse_log(const json& doc, const std::string& source, const LoadOptions& options) {
    if (!doc.is_object()) {
        throw ValidationError(source + ": log must be a JSON object");
    }
    if (!doc.contains("pid") || !doc.at("pid").is_string()) {
        throw ValidationError(source + ": field 'pid' is missing or not a string");
    }
    Participant p;
    p.pid = doc.at("pid").get<std::string>();
    if (p.pid.empty()) {
        throw ValidationError(source + ": field 'pid' is empty");
    }
    const std::string& who = p.pid;

    const json& controls = require(doc, who, "controls");
    if (!controls.is_array()) {
        field_error(who, "controls", "must be an array");
    }
    if (controls.size() != 2) {
        field_error(who, "controls", "must hold exactly 2 entries, found " + std::to_string(controls.size()));
    }
    for (std::size_t i = 0; i < 2; ++i) {
        const json& c = controls[i];
        ControlText ct;
        const std::string ctx = who + " controls[" + std::to_string(i) + "]";
        ct.task_idx = require_int(c, ctx, "task_idx");
        ct.body = make_record(control_text_id(p.pid, ct.task_idx), require_string(c, ctx, "text"));
        if (c.contains("scenario") && c.at("scenario").is_string()) {
            ct.scenario = c.at("scenario").get<std::string>();
        }
        p.controls[i] = std::move(ct);
    }
    std::sort(p.controls.begin(), p.controls.end(),
              [](const ControlText& x, const ControlText& y) { return x.task_idx < y.task_idx; });

    const json& treatments = require(doc, who, "treatments");
    if (!treatments.is_array()) {
        field_error(who, "treatments", "must be an array");
    }
    if (treatments.size() != 4) {
        field_error(who, "treatments",
                    "must hold exactly 4 entries, found " + std::to_string(treatments.size()));
    }
    for (std::size_t i = 0; i < treatments.size(); ++i) {
        const json& t = treatments[i];
        const std::string ctx = who + " treatments[" + std::to_string(i) + "]";
        TreatmentTask task;
        task.task_idx = require_int(t, ctx, "task_idx");
        task.scenario = require_string(t, ctx, "scenario");
        if (!options.allow_unknown_scenarios && !is_known_scenario(task.scenario)) {
            field_error(ctx, "scenario", "has unknown value '" + task.scenario + "'");
        }
        task.drafts.emplace(std::string(kO4Mini),
                            make_record(draft_text_id(p.pid, task.task_idx, kO4Mini),
                                        require_string(t, ctx, "o4mini_draft")));
        task.drafts.emplace(std::string(kHumanEdit),
                            make_record(draft_text_id(p.pid, task.task_idx, kHumanEdit),
                                        require_string(t, ctx, "human_postedit")));
        task.perceived_draft = optional_likert(t, ctx, "perceived_draft");
        task.perceived_postedit = optional_likert(t, ctx, "perceived_postedit");
        p.treatments.push_back(std::move(task));
    }
    std::sort(p.treatments.begin(), p.treatments.end(),
              [](const TreatmentTask& x, const TreatmentTask& y) { return x.task_idx < y.task_idx; });
    return p;
}

void attach_mimic(StudyCorpus& corpus, const json& rec, const std::string& source) {
    if (!rec.is_object()) {
        throw ValidationError(source + ": mimic record must be a JSON object");
    }
    for (const char* field : {"pid", "approach", "text"}) {
        if (!rec.contains(field) || !rec.at(field).is_string()) {
            throw ValidationError(source + ": mimic record field '" + field + "' missing or not a string");
        }
    }
    if (!rec.contains("task_idx") || !rec.at("task_idx").is_number_integer()) {
        throw ValidationError(source + ": mimic record field 'task_idx' missing or not an integer");
    }
    const auto pid = rec.at("pid").get<std::string>();
    const auto approach = rec.at("approach").get<std::string>();
    const int task_idx = rec.at("task_idx").get<int>();
    if (approach.empty() || approach == kO4Mini || approach == kHumanEdit) {
        throw ValidationError(source + ": mimic approach label '" + approach + "' is reserved or empty");
    }
    auto it = std::find_if(corpus.participants.begin(), corpus.participants.end(),
                           [&](const Participant& p) { return p.pid == pid; });
    if (it == corpus.participants.end()) {
        throw ValidationError(source + ": mimic draft for unknown pid " + pid);
    }
    auto task = std::find_if(it->treatments.begin(), it->treatments.end(),
                             [&](const TreatmentTask& t) { return t.task_idx == task_idx; });
    if (task == it->treatments.end()) {
        throw ValidationError(source + ": participant " + pid + " has no treatment task " +
                              std::to_string(task_idx));
    }
    if (task->drafts.contains(approach)) {
        throw ValidationError(source + ": duplicate mimic draft (" + pid + ", " + std::to_string(task_idx) +
                              ", " + approach + ")");
    }
    task->drafts.emplace(approach, make_record(draft_text_id(pid, task_idx, approach),
                                               rec.at("text").get<std::string>()));
    if (rec.contains("cache_key") && rec.at("cache_key").is_string()) {
        task->cache_keys.emplace(approach, rec.at("cache_key").get<std::string>());
    }
}

std::vector<fs::path> sorted_entries(const fs::path& dir, std::initializer_list<std::string_view> exts) {
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) {
            continue;
        }
        const std::string ext = entry.path().extension().string();
        if (std::find(exts.begin(), exts.end(), ext) != exts.end()) {
            out.push_back(entry.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

json parse_json(const std::string& content, const std::string& source) {
    try {
        return json::parse(content);
    } catch (const json::parse_error& e) {
        throw ValidationError(source + ": malformed JSON (" + e.what() + ")");
    }
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << content;
}

}  // namespace

bool is_known_scenario(std::string_view name) {
    return std::find(kScenarios.begin(), kScenarios.end(), name) != kScenarios.end();
}

const TextRecord& TreatmentTask::draft(std::string_view approach) const {
    auto it = drafts.find(approach);
    if (it == drafts.end()) {
        throw ValidationError("treatment task " + std::to_string(task_idx) + " has no draft for approach '" +
                              std::string(approach) + "'");
    }
    return it->second;
}

const Participant& StudyCorpus::find(std::string_view pid) const {
    auto it = std::lower_bound(participants.begin(), participants.end(), pid,
                               [](const Participant& p, std::string_view key) { return p.pid < key; });
    if (it == participants.end() || it->pid != pid) {
        throw ValidationError("unknown pid " + std::string(pid));
    }
    return *it;
}

std::size_t StudyCorpus::n_task_observations() const {
    std::size_t n = 0;
    for (const auto& p : participants) {
        n += p.controls.size() + p.treatments.size();
    }
    return n;
}

std::vector<std::string> StudyCorpus::approaches() const {
    std::map<std::string, std::size_t> counts;
    std::size_t n_tasks = 0;
    for (const auto& p : participants) {
        for (const auto& t : p.treatments) {
            ++n_tasks;
            for (const auto& [label, rec] : t.drafts) {
                ++counts[label];
            }
        }
    }
    std::vector<std::string> out;
    for (auto fixed : {kO4Mini, kHumanEdit}) {
        if (counts[std::string(fixed)] == n_tasks && n_tasks > 0) {
            out.emplace_back(fixed);
        }
    }
    for (const auto& [label, n] : counts) {
        if (label != kO4Mini && label != kHumanEdit && n == n_tasks) {
            out.push_back(label);
        }
    }
    return out;
}

std::string control_text_id(std::string_view pid, int task_idx) {
    return std::string(pid) + "/control/" + std::to_string(task_idx);
}

std::string draft_text_id(std::string_view pid, int task_idx, std::string_view approach) {
    return std::string(pid) + "/" + std::to_string(task_idx) + "/" + std::string(approach);
}

void validate_corpus(const StudyCorpus& corpus, const LoadOptions& options) {
    std::set<std::string> seen;
    for (const auto& p : corpus.participants) {
        if (!seen.insert(p.pid).second) {
            throw ValidationError("duplicate pid " + p.pid);
        }
        if (p.treatments.size() != 4) {
            throw ValidationError("participant " + p.pid + ": expected 4 treatment tasks, found " +
                                  std::to_string(p.treatments.size()));
        }
        std::set<int> indices;
        for (const auto& c : p.controls) {
            if (!indices.insert(c.task_idx).second) {
                throw ValidationError("participant " + p.pid + ": duplicate control task_idx " +
                                      std::to_string(c.task_idx));
            }
        }
        for (const auto& t : p.treatments) {
            if (!indices.insert(t.task_idx).second) {
                throw ValidationError("participant " + p.pid + ": duplicate task_idx " +
                                      std::to_string(t.task_idx));
            }
            if (!options.allow_unknown_scenarios && !is_known_scenario(t.scenario)) {
                throw ValidationError("participant " + p.pid + ": unknown scenario '" + t.scenario + "'");
            }
            if (!t.drafts.contains(kO4Mini) || !t.drafts.contains(kHumanEdit)) {
                throw ValidationError("participant " + p.pid + ": task " + std::to_string(t.task_idx) +
                                      " lacks the o4mini draft or the human post-edit");
            }
        }
    }
}

LoadedCorpus load_corpus(const fs::path& path, const LoadOptions& options) {
    if (!fs::exists(path)) {
        throw IoError("corpus path does not exist: " + path.string());
    }
    std::vector<fs::path> logs;
    fs::path dir = path;
    if (fs::is_directory(path)) {
        logs = sorted_entries(path, {".json"});
    } else {
        logs.push_back(path);
        dir = path.parent_path();
    }
    if (logs.empty()) {
        throw ValidationError("no logs found in " + path.string());
    }

    LoadedCorpus out;
    std::set<std::string> pids;
    for (const auto& log : logs) {
        const std::string source = log.filename().string();
        Participant p = parse_log(parse_json(read_file(log), source), source, options);
        if (!pids.insert(p.pid).second) {
            throw ValidationError(source + ": duplicate pid " + p.pid);
        }
        out.corpus.participants.push_back(std::move(p));
    }
    std::sort(out.corpus.participants.begin(), out.corpus.participants.end(),
              [](const Participant& x, const Participant& y) { return x.pid < y.pid; });

    const fs::path mimic_dir = dir / "mimics";
    if (fs::is_directory(mimic_dir)) {
        for (const auto& file : sorted_entries(mimic_dir, {".jsonl", ".json"})) {
            const std::string source = "mimics/" + file.filename().string();
            const std::string content = read_file(file);
            if (file.extension() == ".json") {
                const json doc = parse_json(content, source);
                if (doc.is_array()) {
                    for (const auto& rec : doc) {
                        attach_mimic(out.corpus, rec, source);
                        ++out.report.n_mimic_drafts;
                    }
                } else {
                    attach_mimic(out.corpus, doc, source);
                    ++out.report.n_mimic_drafts;
                }
                continue;
            }
            std::istringstream lines(content);
            std::string line;
            std::size_t line_no = 0;
            while (std::getline(lines, line)) {
                ++line_no;
                if (line.find_first_not_of(" \t\r") == std::string::npos) {
                    continue;
                }
                attach_mimic(out.corpus, parse_json(line, source + ":" + std::to_string(line_no)),
                             source + ":" + std::to_string(line_no));
                ++out.report.n_mimic_drafts;
            }
        }
    }

    validate_corpus(out.corpus, options);
    out.report.n_pids = out.corpus.participants.size();
    out.report.n_tasks = out.corpus.n_task_observations();
    return out;
}

void save_corpus(const StudyCorpus& corpus, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir / "mimics", ec);
    if (ec) {
        throw IoError("cannot create " + (dir / "mimics").string() + ": " + ec.message());
    }
    std::map<std::string, std::string> sidecars;
    for (const auto& p : corpus.participants) {
        ordered_json doc;
        doc["pid"] = p.pid;
        doc["controls"] = ordered_json::array();
        for (const auto& c : p.controls) {
            ordered_json cj;
            cj["task_idx"] = c.task_idx;
            if (!c.scenario.empty()) {
                cj["scenario"] = c.scenario;
            }
            cj["text"] = c.body.text;
            doc["controls"].push_back(std::move(cj));
        }
        doc["treatments"] = ordered_json::array();
        for (const auto& t : p.treatments) {
            ordered_json tj;
            tj["task_idx"] = t.task_idx;
            tj["scenario"] = t.scenario;
            tj["o4mini_draft"] = t.draft(kO4Mini).text;
            tj["human_postedit"] = t.draft(kHumanEdit).text;
            if (t.perceived_draft) {
                tj["perceived_draft"] = *t.perceived_draft;
            }
            if (t.perceived_postedit) {
                tj["perceived_postedit"] = *t.perceived_postedit;
            }
            doc["treatments"].push_back(std::move(tj));
            for (const auto& [label, rec] : t.drafts) {
                if (label == kO4Mini || label == kHumanEdit) {
                    continue;
                }
                ordered_json mj;
                mj["pid"] = p.pid;
                mj["task_idx"] = t.task_idx;
                mj["approach"] = label;
                mj["text"] = rec.text;
                auto key = t.cache_keys.find(label);
                mj["cache_key"] = key == t.cache_keys.end() ? std::string() : key->second;
                sidecars[label] += mj.dump() + "\n";
            }
        }
        write_file(dir / (p.pid + ".json"), doc.dump(2) + "\n");
    }
    for (const auto& [label, content] : sidecars) {
        write_file(dir / "mimics" / (label + ".jsonl"), content);
    }
}

}  // namespace stylearena
