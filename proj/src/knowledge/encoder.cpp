#include "knowledge/encoder.hpp"

#include "common/error.hpp"
#include "common/http.hpp"
#include "common/text.hpp"

#include <json.hpp>

#include <cctype>
#include <cmath>
#include <sstream>

namespace vultriage::knowledge {

namespace {

std::uint64_t splitmix64(std::uint64_t& state)
{
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace

std::vector<std::string> tokenize_terms(const std::string& text)
{
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) {
            cur += static_cast<char>(std::tolower(c));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty())
        out.push_back(std::move(cur));
    return out;
}

void normalize(DenseVector& v)
{
    double n = 0;
    for (double x : v)
        n += x * x;
    n = std::sqrt(n);
    if (n == 0)
        return;
    for (double& x : v)
        x /= n;
}

double cosine(const DenseVector& a, const DenseVector& b)
{
    double dot = 0, na = 0, nb = 0;
    std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0 || nb == 0)
        return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

double sparse_dot(const SparseVector& a, const SparseVector& b)
{
    const SparseVector& small = a.size() <= b.size() ? a : b;
    const SparseVector& large = a.size() <= b.size() ? b : a;
    double s = 0;
    for (const auto& [t, w] : small)
        if (auto it = large.find(t); it != large.end())
            s += w * it->second;
    return s;
}

Encoding ReferenceEncoder::encode_one(const std::string& text) const
{
    Encoding e;
    auto terms = tokenize_terms(text);
    for (const auto& t : terms)
        e.sparse[t] += 1.0;
    if (!terms.empty())
        for (auto& [t, w] : e.sparse)
            w /= static_cast<double>(terms.size());
    e.dense.assign(dim_, 0.0);
    for (const auto& [t, w] : e.sparse) {
        std::uint64_t state = text::fnv1a64(t) ^ seed_;
        for (std::size_t i = 0; i < dim_; ++i) {
            double u = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53; // [0, 1)
            e.dense[i] += w * (2.0 * u - 1.0);
        }
    }
    normalize(e.dense);
    return e;
}

std::vector<Encoding> ReferenceEncoder::encode(const std::vector<std::string>& texts) const
{
    std::vector<Encoding> out;
    out.reserve(texts.size());
    for (const auto& t : texts)
        out.push_back(encode_one(t));
    return out;
}

std::string ReferenceEncoder::fingerprint() const
{
    std::ostringstream os;
    os << "reference-v1;dim=" << dim_ << ";seed=" << seed_;
    return os.str();
}

HttpEncoder::HttpEncoder(std::string url, std::string model, std::size_t dim, double timeout_seconds)
    : url_(std::move(url)), model_(std::move(model)), dim_(dim), timeout_seconds_(timeout_seconds)
{
}

std::string HttpEncoder::fingerprint() const
{
    std::ostringstream os;
    os << "http-v1;model=" << model_ << ";dim=" << dim_;
    return os.str();
}

std::vector<Encoding> HttpEncoder::encode(const std::vector<std::string>& texts) const
{
    nlohmann::json req = {{"texts", texts}, {"model", model_}};
    http::Response res;
    try {
        res = http::post_json(url_, req.dump(), {}, timeout_seconds_);
    } catch (const http::HttpFailure& e) {
        throw EncoderUnavailable(std::string("encoder service: ") + e.what());
    }
    if (res.status != 200)
        throw EncoderUnavailable("encoder service returned HTTP " + std::to_string(res.status));
    std::vector<Encoding> out;
    try {
        auto j = nlohmann::json::parse(res.body);
        const auto& dense = j.at("dense");
        const auto& sparse = j.at("sparse");
        if (dense.size() != texts.size() || sparse.size() != texts.size())
            throw EncoderUnavailable("encoder service returned a batch of the wrong size");
        for (std::size_t i = 0; i < texts.size(); ++i) {
            Encoding e;
            e.dense = dense[i].get<std::vector<double>>();
            if (e.dense.size() != dim_)
                throw EncoderUnavailable("encoder service returned dimension " +
                                         std::to_string(e.dense.size()) + ", expected " +
                                         std::to_string(dim_));
            normalize(e.dense);
            for (const auto& [term, w] : sparse[i].items()) {
                double weight = w.get<double>();
                if (weight < 0 || !std::isfinite(weight))
                    throw EncoderUnavailable("encoder service returned an invalid sparse weight");
                if (weight > 0)
                    e.sparse[term] = weight;
            }
            out.push_back(std::move(e));
        }
    } catch (const nlohmann::json::exception& e) {
        throw EncoderUnavailable(std::string("encoder service returned malformed JSON: ") + e.what());
    }
    return out;
}

std::vector<Encoding> OfflineEncoder::encode(const std::vector<std::string>&) const
{
    throw EncoderUnavailable("encoder '" + fingerprint_ + "' is offline");
}

} // namespace vultriage::knowledge
