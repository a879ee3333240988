#include "stylearena/embeddings.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "stylearena/errors.hpp"

namespace stylearena {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr char kMagic[5] = {'S', 'T', 'Y', 'V', '1'};

std::uint32_t read_u32_le(std::istream& in, const std::string& what) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) {
        throw ValidationError("truncated binary embedding file while reading " + what);
    }
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_u32_le(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

EmbeddingTable load_binary(std::istream& in) {
    const std::uint32_t dim = read_u32_le(in, "dim");
    if (dim == 0) {
        throw ValidationError("binary embedding file declares dim 0");
    }
    EmbeddingTable table(dim);
    while (in.peek() != std::char_traits<char>::eof()) {
        const std::uint32_t len = read_u32_le(in, "id length");
        std::string id(len, '\0');
        if (!in.read(id.data(), len)) {
            throw ValidationError("truncated binary embedding file while reading an id");
        }
        std::vector<double> values(dim);
        for (auto& v : values) {
            const std::uint32_t bits = read_u32_le(in, "vector of " + id);
            v = static_cast<double>(std::bit_cast<float>(bits));
        }
        table.insert(std::move(id), std::move(values));
    }
    return table;
}

EmbeddingTable load_jsonl(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::optional<EmbeddingTable> table;
    static const std::regex id_pattern(R"re("id"\s*:\s*"((?:[^"\\]|\\.)*)")re");
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error&) {
            std::smatch m;
            if (std::regex_search(line, m, id_pattern)) {
                throw ValidationError("embedding line " + std::to_string(line_no) + ": id " + m[1].str() +
                                      " has a non-finite or malformed value");
            }
            throw ValidationError("embedding line " + std::to_string(line_no) + ": malformed JSON");
        }
        if (!table) {
            if (!rec.contains("dim") || !rec.at("dim").is_number_unsigned() || rec.at("dim").get<std::size_t>() == 0) {
                throw ValidationError("embedding file must start with a header record carrying a positive dim");
            }
            EncoderProvenance prov;
            if (rec.contains("encoder") && rec.at("encoder").is_string()) {
                prov.encoder = rec.at("encoder").get<std::string>();
            }
            if (rec.contains("revision") && rec.at("revision").is_string()) {
                prov.revision = rec.at("revision").get<std::string>();
            }
            table.emplace(rec.at("dim").get<std::size_t>(), std::move(prov));
            continue;
        }
        if (!rec.contains("id") || !rec.at("id").is_string()) {
            throw ValidationError("embedding line " + std::to_string(line_no) + ": missing string 'id'");
        }
        const auto id = rec.at("id").get<std::string>();
        if (!rec.contains("v") || !rec.at("v").is_array()) {
            throw ValidationError("embedding " + id + ": missing array 'v'");
        }
        std::vector<double> values;
        values.reserve(rec.at("v").size());
        for (const auto& x : rec.at("v")) {
            if (!x.is_number()) {
                throw ValidationError("embedding " + id + ": non-numeric (NaN or null) entry");
            }
            values.push_back(x.get<double>());
        }
        table->insert(id, std::move(values));
    }
    if (!table) {
        throw ValidationError("embedding file is empty (no header record)");
    }
    return std::move(*table);
}

}  // namespace

EmbeddingTable::EmbeddingTable(std::size_t dim, EncoderProvenance provenance)
    : dim_(dim), provenance_(std::move(provenance)) {
    if (dim_ == 0) {
        throw ValidationError("embedding dim must be positive");
    }
}

void EmbeddingTable::insert(std::string id, std::vector<double> values) {
    if (values.size() != dim_) {
        throw ValidationError("embedding " + id + ": dimension " + std::to_string(values.size()) +
                              " does not match table dim " + std::to_string(dim_));
    }
    if (!std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); })) {
        throw ValidationError("embedding " + id + ": contains NaN or Inf");
    }
    auto [it, inserted] = entries_.try_emplace(std::move(id), std::move(values));
    if (!inserted) {
        throw ValidationError("embedding " + it->first + ": duplicate id");
    }
}

std::span<const double> EmbeddingTable::at(std::string_view id) const {
    auto it = entries_.find(id);
    if (it == entries_.end()) {
        throw ValidationError("no embedding for text id " + std::string(id));
    }
    return it->second;
}

EmbeddingTable load_embeddings(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open embedding file " + path.string());
    }
    char head[5] = {};
    in.read(head, 5);
    if (in.gcount() == 5 && std::memcmp(head, kMagic, 5) == 0) {
        return load_binary(in);
    }
    in.clear();
    in.seekg(0);
    return load_jsonl(in);
}

void save_embeddings_jsonl(const EmbeddingTable& table, const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    ordered_json header;
    header["dim"] = table.dim();
    header["encoder"] = table.provenance().encoder;
    header["revision"] = table.provenance().revision;
    out << header.dump() << "\n";
    for (const auto& [id, values] : table.entries()) {
        ordered_json rec;
        rec["id"] = id;
        rec["v"] = values;
        out << rec.dump() << "\n";
    }
}

void save_embeddings_binary(const EmbeddingTable& table, const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out.write(kMagic, 5);
    write_u32_le(out, static_cast<std::uint32_t>(table.dim()));
    for (const auto& [id, values] : table.entries()) {
        write_u32_le(out, static_cast<std::uint32_t>(id.size()));
        out.write(id.data(), static_cast<std::streamsize>(id.size()));
        for (double v : values) {
            write_u32_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
        }
    }
}

double cosine(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) {
        throw ValidationError("cosine: dimension mismatch");
    }
    double dot = 0.0;
    double nu = 0.0;
    double nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) {
        throw ValidationError("cosine: zero vector has no direction");
    }
    return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

}  // namespace stylearena
