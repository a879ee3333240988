#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stylearena {

struct EncoderProvenance {
    std::string encoder;
    std::string revision;
};

/// text_id -> fixed-dimension vector of finite reals.
///
/// Lookups by unknown id throw; there is no default vector.
class EmbeddingTable {
public:
    explicit EmbeddingTable(std::size_t dim, EncoderProvenance provenance = {});

    /// Throws ValidationError on wrong dimension, non-finite values or a
    /// duplicate id.
    void insert(std::string id, std::vector<double> values);

    std::span<const double> at(std::string_view id) const;
    bool contains(std::string_view id) const { return entries_.find(id) != entries_.end(); }

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return entries_.size(); }
    const EncoderProvenance& provenance() const { return provenance_; }
    const std::map<std::string, std::vector<double>, std::less<>>& entries() const { return entries_; }

private:
    std::size_t dim_;
    EncoderProvenance provenance_;
    std::map<std::string, std::vector<double>, std::less<>> entries_;
};

/// Reads either the JSONL format (header record `{"dim","encoder","revision"}`
/// followed by `{"id","v"}` records) or the binary format (magic "STYV1",
/// little-endian u32 dim, then per record a u32 id length, the UTF-8 id and
/// dim little-endian f32 values). The format is detected from the magic.
EmbeddingTable load_embeddings(const std::filesystem::path& path);

void save_embeddings_jsonl(const EmbeddingTable& table, const std::filesystem::path& path);

/// Values are narrowed to f32; provenance is not stored in this format.
void save_embeddings_binary(const EmbeddingTable& table, const std::filesystem::path& path);

/// Standard cosine similarity, clamped to [-1, 1].
/// Throws ValidationError on a dimension mismatch or a zero vector.
double cosine(std::span<const double> u, std::span<const double> v);

}  // namespace stylearena
