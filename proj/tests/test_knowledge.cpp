#include "common/error.hpp"
#include "knowledge/corpus.hpp"
#include "knowledge/encoder.hpp"
#include "knowledge/index.hpp"
#include "knowledge/knowledge_path.hpp"
#include "llm/llm_client.hpp"
#include "support/retrieval_oracle.hpp"
#include "support/test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace vultriage;
using namespace vultriage::knowledge;

namespace {

KnowledgeEntry entry(int id, std::string name, std::string desc, std::string example = "")
{
    KnowledgeEntry e;
    e.cwe_id = CweId(id);
    e.name = std::move(name);
    e.description = std::move(desc);
    e.example = std::move(example);
    return e;
}

std::vector<KnowledgeEntry> toy_corpus()
{
    return load_corpus(vt_test::fixture("cwe/toy.xml"));
}

} // namespace

// ------------------------------------------------------------------ corpus

TEST(Corpus, CweIdParsing)
{
    EXPECT_EQ(CweId::parse("CWE-787").value(), 787);
    EXPECT_EQ(CweId::parse("cwe-79").value(), 79);
    EXPECT_EQ(CweId::parse(" 416 ").value(), 416);
    EXPECT_THROW(CweId::parse("CWE-"), CorpusFormatError);
    EXPECT_THROW(CweId::parse("abc"), CorpusFormatError);
    EXPECT_LT(CweId(79), CweId(416));
    EXPECT_EQ(CweId(20).str(), "CWE-20");
}

TEST(Corpus, XmlLoaderSkipsEmptyDescriptions)
{
    auto v = toy_corpus();
    // Six weaknesses in the file, one with a blank description.
    ASSERT_EQ(v.size(), 5u);
    EXPECT_EQ(v[0].cwe_id, CweId(787));
    EXPECT_EQ(v[0].name, "Out-of-bounds Write");
    EXPECT_EQ(v[0].example, "char buf[16];\nmemcpy(buf, src, len);");
    EXPECT_EQ(v[1].example, "free(p);\nuse(p->field);");
    EXPECT_TRUE(v[2].example.empty());
    EXPECT_EQ(v[4].description, "The product uses a format string that originates from an external source.");
    for (const auto& e : v)
        EXPECT_NE(e.cwe_id, CweId(999));
}

TEST(Corpus, CsvLoaderHandlesQuotingAndNewlines)
{
    auto v = load_corpus(vt_test::fixture("cwe/toy.csv"));
    ASSERT_EQ(v.size(), 3u);
    EXPECT_EQ(v[0].example, "char buf[16];\nmemcpy(buf, src, len);");
    EXPECT_EQ(v[0].description, "The product writes data past the end, or before the beginning, of the intended buffer.");
    EXPECT_NE(v[2].description.find("\"integer overflow\""), std::string::npos);
    EXPECT_TRUE(v[1].example.empty());
}

TEST(Corpus, CsvRecordParser)
{
    auto rows = parse_csv("a,\"b,c\",\"d\"\"e\"\r\n\"x\ny\",,z\n");
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"a", "b,c", "d\"e"}));
    EXPECT_EQ(rows[1], (std::vector<std::string>{"x\ny", "", "z"}));
}

TEST(Corpus, JsonlLoader)
{
    auto v = load_cwe_jsonl("{\"cwe_id\":\"CWE-20\",\"name\":\"Improper Input Validation\",\"description\":\"d\"}\n"
                            "\n"
                            "{\"cwe_id\":79,\"name\":\"XSS\",\"description\":\"x\",\"example\":\"echo $x;\"}\n");
    ASSERT_EQ(v.size(), 2u);
    EXPECT_EQ(v[1].cwe_id, CweId(79));
    EXPECT_EQ(v[1].example, "echo $x;");
}

TEST(Corpus, MalformedInputsAreRejected)
{
    EXPECT_THROW(load_cwe_xml("<Weakness_Catalog><Weakness ID=\"1\""), CorpusFormatError);
    EXPECT_THROW(load_cwe_csv("Name,Description\nx,y\n"), CorpusFormatError);
    EXPECT_THROW(load_cwe_jsonl("{not json}\n"), CorpusFormatError);
    vt_test::TempDir dir;
    text::write_file(dir.file("dup.jsonl"), "{\"cwe_id\":1,\"name\":\"a\",\"description\":\"d\"}\n"
                                            "{\"cwe_id\":1,\"name\":\"b\",\"description\":\"e\"}\n");
    EXPECT_THROW(load_corpus(dir.file("dup.jsonl")), CorpusFormatError);
    text::write_file(dir.file("x.txt"), "");
    EXPECT_THROW(load_corpus(dir.file("x.txt")), CorpusFormatError);
}

// ----------------------------------------------------------------- encoder

TEST(Encoder, ReferenceEncoderIsDeterministicAndNormalised)
{
    ReferenceEncoder enc(32, 7);
    auto a = enc.encode_one("buffer overflow in memcpy");
    auto b = enc.encode_one("buffer overflow in memcpy");
    EXPECT_EQ(a.dense, b.dense);
    EXPECT_EQ(a.sparse, b.sparse);
    double norm = 0;
    for (double x : a.dense)
        norm += x * x;
    EXPECT_NEAR(norm, 1.0, 1e-12);
    EXPECT_NEAR(a.sparse.at("buffer"), 0.25, 1e-15);
    EXPECT_NE(ReferenceEncoder(32, 7).fingerprint(), ReferenceEncoder(32, 8).fingerprint());
    EXPECT_NE(ReferenceEncoder(32, 7).fingerprint(), ReferenceEncoder(64, 7).fingerprint());
}

TEST(Encoder, SimilarTextsScoreHigher)
{
    ReferenceEncoder enc;
    auto q = enc.encode_one("use after free of a pointer");
    auto close = enc.encode_one("memory used after it has been freed through a dangling pointer");
    auto far = enc.encode_one("sql query built from request parameters");
    EXPECT_GT(score(q, close, 0.5), score(q, far, 0.5));
}

TEST(Encoder, OfflineEncoderThrows)
{
    OfflineEncoder enc("x");
    EXPECT_THROW(enc.encode({"a"}), EncoderUnavailable);
}

TEST(Encoder, Tokenizer)
{
    EXPECT_EQ(tokenize_terms("Out-of-bounds WRITE, CWE_787!"),
              (std::vector<std::string>{"out", "of", "bounds", "write", "cwe", "787"}));
}

// ----------------------------------------------------------------- scoring

TEST(Score, HandWorkedExample)
{
    // cos = 0.8, sparse overlap 0.5 * 0.4 = 0.2, alpha 0.5 -> 0.4 + 0.1
    Encoding q{{1.0, 0.0}, {{"x", 0.5}}};
    Encoding d{{0.8, 0.6}, {{"x", 0.4}, {"y", 0.9}}};
    EXPECT_NEAR(score(q, d, 0.5), 0.5, 1e-12);
    EXPECT_NEAR(score(q, d, 1.0), 0.8, 1e-12);
    EXPECT_NEAR(score(q, d, 0.0), 0.2, 1e-12);
}

TEST(Score, EndpointsIgnoreTheOtherSignal)
{
    std::mt19937_64 rng(11);
    for (int i = 0; i < 100; ++i) {
        auto q = vt_test::random_encoding(rng, 16, 10);
        auto d = vt_test::random_encoding(rng, 16, 10);
        auto d_sparse = d;
        d_sparse.sparse["t0"] += 3.0;
        d_sparse.sparse["extra"] = 1.0;
        auto d_dense = d;
        for (auto& x : d_dense.dense)
            x = -x;
        EXPECT_DOUBLE_EQ(score(q, d, 1.0), score(q, d_sparse, 1.0));
        EXPECT_DOUBLE_EQ(score(q, d, 0.0), score(q, d_dense, 0.0));
        // Affine in alpha.
        double s0 = score(q, d, 0.0), s1 = score(q, d, 1.0);
        for (double a : {0.25, 0.5, 0.75})
            EXPECT_NEAR(score(q, d, a), (1 - a) * s0 + a * s1, 1e-12);
    }
}

TEST(Retrieve, MatchesBruteForceOnRandomCorpora)
{
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> size(1, 100);
    for (int trial = 0; trial < 20; ++trial) {
        for (double alpha : {0.0, 0.3, 0.5, 0.7, 1.0}) {
            auto index = vt_test::random_index(rng, static_cast<std::size_t>(size(rng)), 8, 12, alpha);
            auto q = vt_test::random_encoding(rng, 8, 12);
            auto truth = vt_test::brute_rank(index, q, alpha);
            for (std::size_t k : {1u, 2u, 5u, 1000u}) {
                std::string why;
                EXPECT_TRUE(vt_test::matches_brute(retrieve_top_k(index, q, k, alpha), truth, k, 1e-12, &why))
                    << "trial " << trial << " alpha " << alpha << " k " << k << ": " << why;
            }
        }
    }
}

TEST(Retrieve, TiesBreakByCweId)
{
    Encoding e{{1.0, 0.0}, {}};
    std::vector<IndexedEntry> entries;
    for (int id : {300, 20, 100})
        entries.push_back({entry(id, "n", "d"), e});
    KnowledgeIndex index(entries, "fp", 0.5, 2);
    auto top = retrieve_top_k(index, e, 3, 0.5);
    ASSERT_EQ(top.size(), 3u);
    EXPECT_EQ(top[0].item->entry.cwe_id, CweId(20));
    EXPECT_EQ(top[1].item->entry.cwe_id, CweId(100));
    EXPECT_EQ(top[2].item->entry.cwe_id, CweId(300));
}

// ------------------------------------------------------------------- index

TEST(Index, RoundTripPreservesScores)
{
    ReferenceEncoder enc;
    auto corpus = toy_corpus();
    auto built = build_knowledge_base(corpus, enc, 0.5);
    vt_test::TempDir dir;
    built.save(dir.file("kb.bin"));
    auto loaded = KnowledgeIndex::load(dir.file("kb.bin"), enc.fingerprint());
    ASSERT_EQ(loaded.size(), built.size());
    EXPECT_EQ(loaded.alpha(), 0.5);
    EXPECT_EQ(loaded.dim(), enc.dim());
    for (const char* query : {"buffer overflow", "freed memory", "format string printf", "null pointer"}) {
        auto q = enc.encode_one(query);
        auto a = retrieve_top_k(built, q, built.size(), 0.5);
        auto b = retrieve_top_k(loaded, q, loaded.size(), 0.5);
        ASSERT_EQ(a.size(), b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            EXPECT_EQ(a[i].item->entry.cwe_id, b[i].item->entry.cwe_id);
            EXPECT_LE(std::abs(a[i].score - b[i].score), 1e-9);
        }
    }
    for (std::size_t i = 0; i < built.size(); ++i) {
        EXPECT_EQ(loaded.entries()[i].entry.example, built.entries()[i].entry.example);
        EXPECT_EQ(loaded.entries()[i].encoding.sparse, built.entries()[i].encoding.sparse);
    }
}

TEST(Index, ReindexingIsByteIdentical)
{
    ReferenceEncoder enc;
    auto corpus = toy_corpus();
    vt_test::TempDir dir;
    build_knowledge_base(corpus, enc, 0.5).save(dir.file("a.bin"));
    build_knowledge_base(corpus, enc, 0.5).save(dir.file("b.bin"));
    EXPECT_EQ(text::read_file(dir.file("a.bin")), text::read_file(dir.file("b.bin")));
}

TEST(Index, RejectsCorruptOrForeignFiles)
{
    ReferenceEncoder enc;
    auto bytes = build_knowledge_base(toy_corpus(), enc, 0.5).serialize();
    EXPECT_THROW(KnowledgeIndex::deserialize("XXXX" + bytes.substr(4)), IndexFormatError);
    EXPECT_THROW(KnowledgeIndex::deserialize(bytes.substr(0, bytes.size() / 2)), IndexFormatError);
    EXPECT_THROW(KnowledgeIndex::deserialize(bytes + "junk"), IndexFormatError);
    vt_test::TempDir dir;
    text::write_file(dir.file("kb.bin"), bytes);
    EXPECT_THROW(KnowledgeIndex::load(dir.file("kb.bin"), ReferenceEncoder(32).fingerprint()), IndexFormatError);
    EXPECT_THROW(KnowledgeIndex::load(dir.file("missing.bin")), Error);
}

TEST(Index, EmptyCorpusAndOfflineEncoder)
{
    ReferenceEncoder enc;
    EXPECT_THROW(build_knowledge_base({}, enc, 0.5), EmptyCorpus);
    auto corpus = toy_corpus();
    OfflineEncoder offline(enc.fingerprint());
    EXPECT_THROW(build_knowledge_base(corpus, offline, 0.5), EncoderUnavailable);
    // A cache built by the same encoder over the same passages is reused.
    auto cache = build_knowledge_base(corpus, enc, 0.5);
    auto reused = build_knowledge_base(corpus, offline, 0.5, &cache);
    EXPECT_EQ(reused.serialize(), cache.serialize());
    // A different corpus cannot use it.
    auto smaller = corpus;
    smaller.pop_back();
    EXPECT_THROW(build_knowledge_base(smaller, offline, 0.5, &cache), EncoderUnavailable);
}

// ---------------------------------------------------------- knowledge path

TEST(Queries, ParsesTwoQueries)
{
    auto q = parse_queries("Sure.\nQuery 1: buffer overflow in memcpy\nQuery 2: missing bounds check\n");
    ASSERT_EQ(q.size(), 2u);
    EXPECT_EQ(q[0].text, "buffer overflow in memcpy");
    EXPECT_EQ(q[1].text, "missing bounds check");
    EXPECT_EQ(q[0].kind, QueryKind::Predicted);
}

TEST(Queries, ToleratesMarkdown)
{
    auto q = parse_queries("- **Query 1:** integer overflow\n* query 2 : `null pointer`");
    ASSERT_EQ(q.size(), 2u);
    EXPECT_EQ(q[0].text, "integer overflow");
    EXPECT_EQ(q[1].text, "null pointer");
}

TEST(Queries, NotApplicableValuesAreDropped)
{
    auto q = parse_queries("Query 1: use after free\nQuery 2: N/A");
    ASSERT_EQ(q.size(), 1u);
    EXPECT_EQ(q[0].text, "use after free");
    auto fb = parse_queries("Query 1: None\nQuery 2: n/a");
    ASSERT_EQ(fb.size(), 1u);
    EXPECT_EQ(fb[0], fallback_query());
    EXPECT_EQ(fb[0].text, std::string(kFallbackQuery));
}

TEST(Queries, MissingLinesIsAParseError)
{
    EXPECT_THROW(parse_queries("I cannot help with that."), QueryParseError);
}

TEST(Queries, GenerateUsesOneCallAndFallsBack)
{
    auto backend = std::make_shared<llm::ScriptedBackend>();
    backend->set_default("no idea");
    llm::ChatClient client(backend, {1, 0.0, 1.0});
    graphs::SourceFunction fn;
    fn.code = "int f(void) { return 0; }";
    auto q = generate_queries(fn, client);
    EXPECT_EQ(backend->call_count(), 1u);
    ASSERT_EQ(q.size(), 1u);
    EXPECT_EQ(q[0].kind, QueryKind::Fallback);
    auto log = backend->call_log();
    EXPECT_NE(log[0].find(fn.code), std::string::npos);
    EXPECT_NE(log[0].find("Query 1:"), std::string::npos);
}

TEST(Queries, LlmFailurePropagates)
{
    auto backend = std::make_shared<llm::ScriptedBackend>();
    backend->add_rule({"", "", llm::LlmErrorKind::Transport, -1, false});
    llm::ChatClient client(backend, {1, 0.0, 1.0});
    graphs::SourceFunction fn;
    fn.code = "int f(void) { return 0; }";
    EXPECT_THROW(generate_queries(fn, client), llm::LlmError);
}

TEST(Assemble, DeduplicatesInQueryThenRankOrder)
{
    std::vector<IndexedEntry> items = {{entry(787, "A", "a"), {}}, {entry(120, "B", "b"), {}},
                                       {entry(416, "C", "c"), {}}};
    std::vector<std::vector<Scored>> per_query = {
        {{&items[0], 0.9}, {&items[1], 0.5}},
        {{&items[1], 0.8}, {&items[2], 0.7}},
    };
    auto two = assemble_knowledge(per_query, 2, 1500);
    ASSERT_EQ(two.entries.size(), 2u);
    EXPECT_EQ(two.entries[0].cwe_id, CweId(787));
    EXPECT_EQ(two.entries[1].cwe_id, CweId(120));
    auto three = assemble_knowledge(per_query, 10, 1500);
    ASSERT_EQ(three.entries.size(), 3u);
    EXPECT_EQ(three.entries[2].cwe_id, CweId(416));
    EXPECT_EQ(three.text, "CWE-787: A\nDescription: a\n\nCWE-120: B\nDescription: b\n\nCWE-416: C\nDescription: c");
}

TEST(Assemble, ExampleClipping)
{
    EXPECT_EQ(clip_example("abcdef", 0), "abcdef");
    EXPECT_EQ(clip_example("abcdef", 6), "abcdef");
    EXPECT_EQ(clip_example("abcdef", 3), "abc…");
    // "é" is two bytes; a cut inside it backs off to the boundary.
    EXPECT_EQ(clip_example("aé", 2), "a…");
    auto e = entry(787, "Out-of-bounds Write", "desc", "char b[2];");
    EXPECT_EQ(render_entry(e, 1500), "CWE-787: Out-of-bounds Write\nDescription: desc\nVulnerable example:\nchar b[2];");
}

TEST(Retrieve, KnowledgeForQueries)
{
    ReferenceEncoder enc;
    auto index = build_knowledge_base(toy_corpus(), enc, 0.5);
    KnowledgeOptions opts;
    auto ctx = retrieve_knowledge(index, enc, {{"memory used after free", QueryKind::Predicted}}, opts);
    ASSERT_FALSE(ctx.entries.empty());
    EXPECT_LE(ctx.entries.size(), opts.max_entries);
    EXPECT_EQ(ctx.entries[0].cwe_id, CweId(416));
    EXPECT_EQ(ctx.text.rfind("CWE-416: Use After Free\n", 0), 0u);
    auto fb = retrieve_knowledge(index, enc, {fallback_query()}, opts);
    EXPECT_FALSE(fb.entries.empty());
    EXPECT_THROW(retrieve_knowledge(index, OfflineEncoder(enc.fingerprint()), {fallback_query()}, opts),
                 EncoderUnavailable);
}
