#include <charconv>

#include "stylearena/report.hpp"
#include "stylearena/version.hpp"

namespace stylearena {

std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

Json interval_json(const stats::Interval& ci) { return Json::array({ci.low, ci.high}); }

Json TestRecord::to_json() const {
    Json j;
    j["name"] = name;
    j["statistic"] = statistic;
    j["p"] = p;
    j["g"] = g ? Json(*g) : Json(nullptr);
    j["ci"] = ci ? interval_json(*ci) : Json(nullptr);
    j["n"] = n;
    j["n_perm"] = n_perm;
    j["seed"] = seed;
    j["flags"] = flags;
    return j;
}

Json ArtifactMeta::to_json() const {
    Json j;
    j["version"] = std::string(version());
    j["master_seed"] = master_seed;
    j["protocol_tag"] = protocol_tag;
    return j;
}

std::string ArtifactMeta::csv_comment() const {
    return "# version=" + std::string(version()) + " master_seed=" + std::to_string(master_seed) +
           " protocol_tag=" + protocol_tag + "\n";
}

}  // namespace stylearena
