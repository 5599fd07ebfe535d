#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace vultriage::knowledge {

using DenseVector = std::vector<double>;
using SparseVector = std::map<std::string, double>; // term -> weight, weights >= 0

struct Encoding {
    DenseVector dense;
    SparseVector sparse;
};

// Produces both representations for a batch of texts.
class Encoder {
public:
    virtual ~Encoder() = default;
    // Throws EncoderUnavailable when the backing service cannot be used.
    virtual std::vector<Encoding> encode(const std::vector<std::string>& texts) const = 0;
    // Identifies the encoder and its parameters; stored in index files.
    virtual std::string fingerprint() const = 0;
    virtual std::size_t dim() const = 0;
};

// Lowercase alphanumeric runs.
std::vector<std::string> tokenize_terms(const std::string& text);

// Deterministic offline encoder.
// sparse: term frequency divided by the document's token count.
// dense: sum over terms of weight * r(term), where r(term) is a pseudo-random
// vector in [-1, 1]^dim seeded by the term's hash, then unit-normalised.
class ReferenceEncoder final : public Encoder {
public:
    explicit ReferenceEncoder(std::size_t dim = 64, std::uint64_t seed = 0x5eedULL)
        : dim_(dim), seed_(seed) {}

    std::vector<Encoding> encode(const std::vector<std::string>& texts) const override;
    std::string fingerprint() const override;
    std::size_t dim() const override { return dim_; }

    Encoding encode_one(const std::string& text) const;

private:
    std::size_t dim_;
    std::uint64_t seed_;
};

// Remote embedding service returning dense and sparse lexical weights.
// POST <url> {"texts": [...], "model": "..."} ->
//   {"dense": [[...], ...], "sparse": [{"term": weight, ...}, ...]}
// Dense vectors are unit-normalised on receipt.
class HttpEncoder final : public Encoder {
public:
    HttpEncoder(std::string url, std::string model, std::size_t dim, double timeout_seconds = 60.0);

    std::vector<Encoding> encode(const std::vector<std::string>& texts) const override;
    std::string fingerprint() const override;
    std::size_t dim() const override { return dim_; }

private:
    std::string url_;
    std::string model_;
    std::size_t dim_;
    double timeout_seconds_;
};

// Always fails; stands in for an unreachable service.
class OfflineEncoder final : public Encoder {
public:
    explicit OfflineEncoder(std::string fingerprint, std::size_t dim = 64)
        : fingerprint_(std::move(fingerprint)), dim_(dim) {}
    std::vector<Encoding> encode(const std::vector<std::string>& texts) const override;
    std::string fingerprint() const override { return fingerprint_; }
    std::size_t dim() const override { return dim_; }

private:
    std::string fingerprint_;
    std::size_t dim_;
};

void normalize(DenseVector& v);
double cosine(const DenseVector& a, const DenseVector& b);
double sparse_dot(const SparseVector& a, const SparseVector& b);

} // namespace vultriage::knowledge
