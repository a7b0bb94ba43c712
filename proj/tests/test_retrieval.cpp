#include <doctest.h>

#include <random>

#include "ragcap/core/error.hpp"
#include "ragcap/retrieval/pivot_map.hpp"
#include "ragcap/retrieval/retriever.hpp"
#include "test_support.hpp"

using namespace ragcap;
using ragcap::testing::lang;
using ragcap::testing::TempDir;

namespace {

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected ragcap::Error");
  return ErrorCode::kInvalidArgument;
}

// Five captions on the unit circle, the query at angle 0.
struct Toy {
  DenseIndex en_index;
  PivotMap texts;
  std::unordered_map<std::string, std::string> images;
};

Toy toy() {
  EmbeddingMatrix m(2);
  const std::vector<std::pair<std::string, double>> rows{
      {"123", 0.1}, {"200", 0.3}, {"301", 0.5}, {"302", 0.7}, {"400", 1.2}};
  for (const auto& [id, angle] : rows) {
    m.append(id, std::vector<float>{static_cast<float>(std::cos(angle)), static_cast<float>(std::sin(angle))});
  }
  Toy t{DenseIndex::build(m, {"toy", "en", IndexKind::kCaption, ""}), {}, {}};
  const std::vector<std::tuple<std::string, std::string, std::string>> texts{
      {"123", "a dog", "un perro"},       {"200", "a dog running", "un perro corriendo"},
      {"301", "a dog", "un perro"},       {"302", "a park", "un parque"},
      {"400", "a cat", "un gato"}};
  for (const auto& [id, en, es] : texts) {
    t.texts.add(id, "en", en);
    t.texts.add(id, "es", es);
  }
  t.images = {{"123", "imgA"}, {"200", "imgA"}, {"301", "imgB"}, {"302", "imgB"}, {"400", "imgC"}};
  return t;
}

RunConfig config(int n, int m, RetrievalMode mode = RetrievalMode::kPivotEn) {
  RunConfig cfg;
  cfg.n_captions = n;
  cfg.m_concepts = m;
  cfg.retrieval_mode = mode;
  return cfg;
}

const std::vector<float> kQuery{1.0F, 0.0F};

std::vector<std::string> ids_of(const std::vector<ScoredCaption>& caps) {
  std::vector<std::string> ids;
  for (const auto& c : caps) ids.push_back(c.caption_id);
  return ids;
}

DenseIndex concept_index(const std::string& l = "en") {
  EmbeddingMatrix m(2);
  m.append("dog", std::vector<float>{1.0F, 0.0F});
  m.append("park", std::vector<float>{0.8F, 0.6F});
  m.append("cat", std::vector<float>{0.0F, 1.0F});
  return DenseIndex::build(m, {"concepts", l, IndexKind::kConcept, ""});
}

}  // namespace

TEST_CASE("pivot map lookups") {
  PivotMap map;
  map.add("123", "es", "un perro");
  CHECK(map.lookup("123", "es") == "un perro");
  CHECK(map.find("123", "en") == nullptr);
  CHECK(code_of([&] { map.add("123", "es", "otro"); }) == ErrorCode::kKeyCollision);
  try {
    map.lookup("123", "sw");
    FAIL("expected PivotMiss");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kPivotMiss);
    const std::string what = e.what();
    CHECK(what.find("123") != std::string::npos);
    CHECK(what.find("sw") != std::string::npos);
  }
  map.add("124", "en", "a cat");
  const std::vector<std::string> langs{"en", "es"};
  const auto missing = map.missing(langs);
  REQUIRE(missing.size() == 2);
  CHECK(missing[0] == std::pair<std::string, std::string>{"123", "en"});
  CHECK(missing[1] == std::pair<std::string, std::string>{"124", "es"});
}

TEST_CASE("pivot map file") {
  TempDir tmp;
  ragcap::testing::write_text(tmp / "p.jsonl", "{\"caption_id\":\"1\",\"lang\":\"en\",\"text\":\"a dog\"}\n"
                                                "{\"caption_id\":\"1\",\"lang\":\"zh\",\"text\":\"一只狗\"}\n");
  const auto map = PivotMap::load(tmp / "p.jsonl");
  CHECK(map.size() == 2);
  CHECK(map.lookup("1", "zh") == "一只狗");
  ragcap::testing::write_text(tmp / "bad.jsonl", "{\"caption_id\":\"1\",\"text\":\"a dog\"}\n");
  CHECK(code_of([&] { PivotMap::load(tmp / "bad.jsonl"); }) == ErrorCode::kCorruptFile);
}

TEST_CASE("retrieve_captions top-n in pivot mode") {
  const auto t = toy();
  const auto en = retrieve_captions(kQuery, "q", t.en_index, config(4, 0), t.texts, lang("en"));
  CHECK(ids_of(en) == std::vector<std::string>{"123", "200", "301", "302"});
  const auto es = retrieve_captions(kQuery, "q", t.en_index, config(4, 0), t.texts, lang("es"));
  REQUIRE(es.size() == 4);
  CHECK(es[0].text == "un perro");
  CHECK(es[0].score == en[0].score);
  CHECK(es[0].score == doctest::Approx(std::cos(0.1)));

  CHECK(retrieve_captions(kQuery, "q", t.en_index, config(0, 0), t.texts, lang("es")).empty());
  CHECK(retrieve_captions(kQuery, "q", t.en_index, config(9, 0), t.texts, lang("es")).size() == 5);

  try {
    retrieve_captions(kQuery, "q", t.en_index, config(4, 0), t.texts, lang("sw"));
    FAIL("expected PivotMiss");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kPivotMiss);
    CHECK(std::string(e.what()).find("'sw'") != std::string::npos);
  }
}

TEST_CASE("mode preconditions") {
  const auto t = toy();
  // direct mode demands an index in the target language
  CHECK(code_of([&] {
          retrieve_captions(kQuery, "q", t.en_index, config(4, 0, RetrievalMode::kDirect), t.texts, lang("es"));
        }) == ErrorCode::kModeMismatch);
  CHECK(retrieve_captions(kQuery, "q", t.en_index, config(4, 0, RetrievalMode::kDirect), t.texts, lang("en")).size() == 4);
  // pivot mode demands an English index
  EmbeddingMatrix m(2);
  m.append("123", std::vector<float>{1, 0});
  const auto es_index = DenseIndex::build(m, {"toy", "es", IndexKind::kCaption, ""});
  CHECK(code_of([&] { retrieve_captions(kQuery, "q", es_index, config(1, 0), t.texts, lang("es")); }) ==
        ErrorCode::kModeMismatch);
  CHECK(retrieve_captions(kQuery, "q", es_index, config(1, 0, RetrievalMode::kDirect), t.texts, lang("es"))[0].text ==
        "un perro");
  // a concept index is not a caption index
  CHECK(code_of([&] { retrieve_captions(kQuery, "q", concept_index(), config(1, 0), t.texts, lang("en")); }) ==
        ErrorCode::kModeMismatch);
}

TEST_CASE("pivot invariance of caption id order") {
  const auto t = toy();
  std::mt19937_64 rng(2);
  for (int i = 0; i < 20; ++i) {
    const auto q = ragcap::testing::random_unit(rng, 2);
    const auto en = ids_of(retrieve_captions(q, "q", t.en_index, config(4, 0), t.texts, lang("en")));
    const auto es = ids_of(retrieve_captions(q, "q", t.en_index, config(4, 0), t.texts, lang("es")));
    CHECK(en == es);
  }
}

TEST_CASE("caption filters") {
  const auto t = toy();
  RetrievalOptions opts;
  opts.caption_images = &t.images;
  opts.exclude_image_id = true;
  CHECK(ids_of(retrieve_captions(kQuery, "imgA", t.en_index, config(4, 0), t.texts, lang("en"), opts)) ==
        std::vector<std::string>{"301", "302", "400"});

  opts.exclude_image_id = false;
  opts.max_per_image = 1;
  CHECK(ids_of(retrieve_captions(kQuery, "q", t.en_index, config(4, 0), t.texts, lang("en"), opts)) ==
        std::vector<std::string>{"123", "301", "400"});

  RetrievalOptions dedup;
  dedup.dedup_texts = true;
  CHECK(ids_of(retrieve_captions(kQuery, "q", t.en_index, config(4, 0), t.texts, lang("es"), dedup)) ==
        std::vector<std::string>{"123", "200", "302", "400"});

  RetrievalOptions needs_images;
  needs_images.exclude_image_id = true;
  CHECK(code_of([&] {
          retrieve_captions(kQuery, "imgA", t.en_index, config(4, 0), t.texts, lang("en"), needs_images);
        }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("retrieve_concepts returns raw tokens") {
  const auto index = concept_index();
  const auto got = retrieve_concepts(kQuery, index, config(0, 10));
  REQUIRE(got.size() == 3);
  CHECK(got[0].token == "dog");
  CHECK(got[1].token == "park");
  CHECK(got[1].score == doctest::Approx(0.8));
  CHECK(retrieve_concepts(kQuery, index, config(0, 2)).size() == 2);
  CHECK(retrieve_concepts(kQuery, index, config(0, 0)).empty());
  const std::vector<float> wrong{1, 0, 0};
  CHECK(code_of([&] { retrieve_concepts(wrong, index, config(0, 2)); }) == ErrorCode::kDimMismatch);
}

TEST_CASE("retrieve_batch composes both retrievals in input order") {
  const auto t = toy();
  const auto concepts = concept_index("es");
  std::mt19937_64 rng(6);
  const auto queries = ragcap::testing::random_matrix(rng, 12, 2, "img");
  const auto cfg = config(3, 2);
  const auto out = retrieve_batch(queries, &t.en_index, &concepts, cfg, &t.texts, lang("es"));
  CHECK(out.failures.empty());
  REQUIRE(out.bundles.size() == 12);
  for (std::size_t i = 0; i < 12; ++i) {
    const auto& b = out.bundles[i];
    CHECK(b.image_id == queries.id(i));
    CHECK(b.mode == RetrievalMode::kPivotEn);
    CHECK(b.captions == retrieve_captions(queries.row(i), b.image_id, t.en_index, cfg, t.texts, lang("es")));
    CHECK(b.concepts == retrieve_concepts(queries.row(i), concepts, cfg));
    for (std::size_t k = 1; k < b.captions.size(); ++k) CHECK(b.captions[k - 1].score >= b.captions[k].score);
    for (const auto& c : b.captions) CHECK(std::abs(c.score) <= 1.0 + 1e-6);
  }
  RetrievalOptions single;
  single.threads = 1;
  CHECK(retrieve_batch(queries, &t.en_index, &concepts, cfg, &t.texts, lang("es"), nullptr, single).bundles ==
        out.bundles);
}

TEST_CASE("NoRAG bundles need no indices") {
  std::mt19937_64 rng(1);
  const auto queries = ragcap::testing::random_matrix(rng, 3, 2, "img");
  const auto out = retrieve_batch(queries, nullptr, nullptr, config(0, 0), nullptr, lang("fr"));
  REQUIRE(out.bundles.size() == 3);
  for (const auto& b : out.bundles) {
    CHECK(b.captions.empty());
    CHECK(b.concepts.empty());
  }
  CHECK(code_of([&] { retrieve_batch(queries, nullptr, nullptr, config(1, 0), nullptr, lang("fr")); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("concept index language must match the target") {
  const auto t = toy();
  const auto en_concepts = concept_index("en");
  std::mt19937_64 rng(1);
  const auto queries = ragcap::testing::random_matrix(rng, 2, 2, "img");
  CHECK(code_of([&] { retrieve_batch(queries, &t.en_index, &en_concepts, config(1, 1), &t.texts, lang("es")); }) ==
        ErrorCode::kModeMismatch);
}

TEST_CASE("oracle concepts bypass retrieval") {
  const auto t = toy();
  const auto concepts = concept_index("en");
  EmbeddingMatrix queries(2);
  queries.append("img1", kQuery);
  queries.append("img2", kQuery);
  const OracleMap oracle{{"img1", {"tuk-tuk", "street", "driver"}}};
  const auto out = retrieve_batch(queries, nullptr, &concepts, config(0, 2), nullptr, lang("en"), &oracle);
  REQUIRE(out.bundles.size() == 2);
  CHECK(out.bundles[0].concepts == std::vector<ScoredConcept>{{"tuk-tuk", 1.0}, {"street", 1.0}});
  CHECK(out.bundles[1].concepts[0].token == "dog");
}

TEST_CASE("pivot misses fail only the affected query") {
  auto t = toy();
  EmbeddingMatrix m(2);
  m.append("999", std::vector<float>{0.0F, -1.0F});
  m.append("123", std::vector<float>{1.0F, 0.0F});
  const auto index = DenseIndex::build(m, {"toy", "en", IndexKind::kCaption, ""});
  EmbeddingMatrix queries(2);
  queries.append("good", std::vector<float>{1.0F, 0.0F});
  queries.append("bad", std::vector<float>{0.0F, -1.0F});
  queries.append("good2", std::vector<float>{0.9F, 0.1F});
  const auto out = retrieve_batch(queries, &index, nullptr, config(1, 0), &t.texts, lang("es"));
  REQUIRE(out.bundles.size() == 2);
  CHECK(out.bundles[0].image_id == "good");
  CHECK(out.bundles[1].image_id == "good2");
  REQUIRE(out.failures.size() == 1);
  CHECK(out.failures[0].image_id == "bad");
  CHECK(out.failures[0].message.find("999") != std::string::npos);
}

TEST_CASE("bundle JSON round trip") {
  const AugmentationBundle b{"img", {{"c1", "a, b.", 0.5}}, {{"dog", 0.25}}, RetrievalMode::kDirect};
  const auto j = bundle_to_json(b);
  CHECK(j["captions"][0]["text"] == "a, b.");
  CHECK(j["captions"][0]["score"] == 0.5);
  CHECK(j["concepts"][0]["token"] == "dog");
  CHECK(j["mode"] == "direct");
  CHECK(bundle_from_json(nlohmann::json::parse(j.dump())) == b);
  CHECK(code_of([] { bundle_from_json(nlohmann::json{{"captions", 3}}); }) == ErrorCode::kCorruptFile);
}
