#pragma once

#include "knowledge/corpus.hpp"
#include "knowledge/encoder.hpp"

#include <optional>
#include <string>
#include <vector>

namespace vultriage::knowledge {

struct IndexedEntry {
    KnowledgeEntry entry;
    Encoding encoding;
};

struct Scored {
    const IndexedEntry* item = nullptr;
    double score = 0.0;
};

// Immutable after construction; concurrent retrieval is safe.
//
// File layout (little-endian):
//   "VTKB" | u32 version | str fingerprint | f64 alpha | u32 dim | u32 count |
//   count x { i32 cwe | str name | str description | str example |
//             dim x f64 dense | u32 nnz | nnz x { str term | f64 weight } }
// where str = u32 byte length followed by UTF-8 bytes, and sparse terms are
// written in ascending byte order.
class KnowledgeIndex {
public:
    static constexpr std::uint32_t kVersion = 1;

    KnowledgeIndex() = default;
    KnowledgeIndex(std::vector<IndexedEntry> entries, std::string fingerprint, double alpha,
                   std::size_t dim);

    const std::vector<IndexedEntry>& entries() const { return entries_; }
    const std::string& fingerprint() const { return fingerprint_; }
    double alpha() const { return alpha_; }
    std::size_t dim() const { return dim_; }
    std::size_t size() const { return entries_.size(); }

    std::string serialize() const;
    static KnowledgeIndex deserialize(const std::string& bytes);

    void save(const std::string& path) const;
    // Throws IndexFormatError on a bad file, or when expected_fingerprint is
    // given and differs from the one recorded at build time.
    static KnowledgeIndex load(const std::string& path,
                               const std::optional<std::string>& expected_fingerprint = std::nullopt);

private:
    std::vector<IndexedEntry> entries_;
    std::string fingerprint_;
    double alpha_ = 0.5;
    std::size_t dim_ = 0;
};

// Encodes every passage. When the encoder is unavailable, vectors are reused
// from `cache` if it was built by the same encoder over the same passages;
// otherwise EncoderUnavailable propagates. Throws EmptyCorpus for no entries.
KnowledgeIndex build_knowledge_base(const std::vector<KnowledgeEntry>& corpus, const Encoder& encoder,
                                    double alpha, const KnowledgeIndex* cache = nullptr);

// alpha * cos(dense) + (1 - alpha) * sum over shared terms of the weight products.
double score(const Encoding& query, const Encoding& doc, double alpha);

// Exhaustive scoring, descending, ties by ascending CWE id. k >= size returns all.
std::vector<Scored> retrieve_top_k(const KnowledgeIndex& index, const Encoding& query, std::size_t k,
                                   double alpha);

} // namespace vultriage::knowledge
