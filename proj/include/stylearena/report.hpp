#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stylearena/stats.hpp"

namespace stylearena {

using Json = nlohmann::ordered_json;

/// Flat per-test record: {name, statistic, p, g, ci, n, n_perm, seed, flags}.
struct TestRecord {
    std::string name;
    double statistic = 0.0;
    double p = 1.0;
    std::optional<double> g;
    std::optional<stats::Interval> ci;
    std::size_t n = 0;
    std::size_t n_perm = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> flags;

    Json to_json() const;
};

/// Provenance block embedded in every artifact.
struct ArtifactMeta {
    std::uint64_t master_seed = 0;
    std::string protocol_tag;

    Json to_json() const;
    /// "# version=... master_seed=... protocol_tag=..." header for CSV files.
    std::string csv_comment() const;
};

Json interval_json(const stats::Interval& ci);

/// Shortest round-trip decimal form; used for every CSV cell.
std::string format_number(double v);

}  // namespace stylearena
