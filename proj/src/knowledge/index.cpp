#include "knowledge/index.hpp"

#include "common/error.hpp"
#include "common/text.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

namespace vultriage::knowledge {

namespace {

class Writer {
public:
    void u32(std::uint32_t v)
    {
        for (int i = 0; i < 4; ++i)
            out_ += static_cast<char>((v >> (8 * i)) & 0xFF);
    }
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void f64(double d)
    {
        auto v = std::bit_cast<std::uint64_t>(d);
        for (int i = 0; i < 8; ++i)
            out_ += static_cast<char>((v >> (8 * i)) & 0xFF);
    }
    void str(const std::string& s)
    {
        u32(static_cast<std::uint32_t>(s.size()));
        out_ += s;
    }
    void raw(std::string_view s) { out_ += s; }
    std::string take() { return std::move(out_); }

private:
    std::string out_;
};

class Reader {
public:
    explicit Reader(const std::string& b) : b_(b) {}

    void need(std::size_t n) const
    {
        if (pos_ + n > b_.size())
            throw IndexFormatError("index file is truncated");
    }
    std::uint32_t u32()
    {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b_[pos_ + static_cast<std::size_t>(i)])) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    double f64()
    {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b_[pos_ + static_cast<std::size_t>(i)])) << (8 * i);
        pos_ += 8;
        return std::bit_cast<double>(v);
    }
    std::string str()
    {
        std::uint32_t n = u32();
        need(n);
        std::string s = b_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::string raw(std::size_t n)
    {
        need(n);
        std::string s = b_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == b_.size(); }

private:
    const std::string& b_;
    std::size_t pos_ = 0;
};

constexpr std::string_view kMagic = "VTKB";

} // namespace

KnowledgeIndex::KnowledgeIndex(std::vector<IndexedEntry> entries, std::string fingerprint, double alpha,
                               std::size_t dim)
    : entries_(std::move(entries)), fingerprint_(std::move(fingerprint)), alpha_(alpha), dim_(dim)
{
}

std::string KnowledgeIndex::serialize() const
{
    Writer w;
    w.raw(kMagic);
    w.u32(kVersion);
    w.str(fingerprint_);
    w.f64(alpha_);
    w.u32(static_cast<std::uint32_t>(dim_));
    w.u32(static_cast<std::uint32_t>(entries_.size()));
    for (const auto& ie : entries_) {
        w.i32(ie.entry.cwe_id.value());
        w.str(ie.entry.name);
        w.str(ie.entry.description);
        w.str(ie.entry.example);
        for (std::size_t i = 0; i < dim_; ++i)
            w.f64(i < ie.encoding.dense.size() ? ie.encoding.dense[i] : 0.0);
        w.u32(static_cast<std::uint32_t>(ie.encoding.sparse.size()));
        for (const auto& [term, weight] : ie.encoding.sparse) { // std::map: ascending
            w.str(term);
            w.f64(weight);
        }
    }
    return w.take();
}

KnowledgeIndex KnowledgeIndex::deserialize(const std::string& bytes)
{
    Reader r(bytes);
    if (r.raw(4) != kMagic)
        throw IndexFormatError("not a knowledge index (bad magic)");
    std::uint32_t version = r.u32();
    if (version != kVersion)
        throw IndexFormatError("unsupported index version " + std::to_string(version));
    std::string fp = r.str();
    double alpha = r.f64();
    std::size_t dim = r.u32();
    std::uint32_t count = r.u32();
    std::vector<IndexedEntry> entries;
    entries.reserve(count);
    for (std::uint32_t k = 0; k < count; ++k) {
        IndexedEntry ie;
        ie.entry.cwe_id = CweId(r.i32());
        ie.entry.name = r.str();
        ie.entry.description = r.str();
        ie.entry.example = r.str();
        ie.encoding.dense.resize(dim);
        for (std::size_t i = 0; i < dim; ++i)
            ie.encoding.dense[i] = r.f64();
        std::uint32_t nnz = r.u32();
        for (std::uint32_t i = 0; i < nnz; ++i) {
            std::string term = r.str();
            ie.encoding.sparse[term] = r.f64();
        }
        entries.push_back(std::move(ie));
    }
    if (!r.done())
        throw IndexFormatError("trailing bytes after index payload");
    return KnowledgeIndex(std::move(entries), std::move(fp), alpha, dim);
}

void KnowledgeIndex::save(const std::string& path) const
{
    text::write_file(path, serialize());
}

KnowledgeIndex KnowledgeIndex::load(const std::string& path, const std::optional<std::string>& expected)
{
    KnowledgeIndex idx = deserialize(text::read_file(path));
    if (expected && *expected != idx.fingerprint())
        throw IndexFormatError("index was built with encoder '" + idx.fingerprint() +
                               "' but the configured encoder is '" + *expected + "'");
    return idx;
}

KnowledgeIndex build_knowledge_base(const std::vector<KnowledgeEntry>& corpus, const Encoder& encoder,
                                    double alpha, const KnowledgeIndex* cache)
{
    if (corpus.empty())
        throw EmptyCorpus();
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw UsageError("alpha must lie in [0, 1]");
    std::vector<std::string> passages;
    passages.reserve(corpus.size());
    for (const auto& e : corpus)
        passages.push_back(e.passage());

    std::vector<Encoding> enc;
    try {
        enc = encoder.encode(passages);
    } catch (const EncoderUnavailable&) {
        bool reusable = cache && cache->fingerprint() == encoder.fingerprint() &&
                        cache->size() == corpus.size();
        for (std::size_t i = 0; reusable && i < corpus.size(); ++i)
            reusable = cache->entries()[i].entry.cwe_id == corpus[i].cwe_id &&
                       cache->entries()[i].entry.passage() == passages[i];
        if (!reusable)
            throw;
        for (const auto& ie : cache->entries())
            enc.push_back(ie.encoding);
    }
    std::vector<IndexedEntry> entries;
    entries.reserve(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i)
        entries.push_back({corpus[i], std::move(enc[i])});
    return KnowledgeIndex(std::move(entries), encoder.fingerprint(), alpha, encoder.dim());
}

double score(const Encoding& query, const Encoding& doc, double alpha)
{
    double dense = alpha != 0.0 ? cosine(query.dense, doc.dense) : 0.0;
    double sparse = alpha != 1.0 ? sparse_dot(query.sparse, doc.sparse) : 0.0;
    return alpha * dense + (1.0 - alpha) * sparse;
}

std::vector<Scored> retrieve_top_k(const KnowledgeIndex& index, const Encoding& query, std::size_t k,
                                   double alpha)
{
    if (index.size() == 0)
        throw EmptyCorpus();
    std::vector<Scored> all;
    all.reserve(index.size());
    for (const auto& ie : index.entries())
        all.push_back({&ie, score(query, ie.encoding, alpha)});
    auto better = [](const Scored& a, const Scored& b) {
        if (a.score != b.score)
            return a.score > b.score;
        return a.item->entry.cwe_id < b.item->entry.cwe_id;
    };
    std::size_t n = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(), better);
    all.resize(n);
    return all;
}

} // namespace vultriage::knowledge
