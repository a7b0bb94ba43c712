#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "ragcap/core/error.hpp"
#include "ragcap/core/jsonl.hpp"
#include "ragcap/metrics/bleu.hpp"
#include "ragcap/metrics/cider.hpp"
#include "ragcap/metrics/evaluate.hpp"
#include "ragcap/metrics/ngram.hpp"
#include "test_support.hpp"

using namespace ragcap;
using namespace ragcap::metrics;
using ragcap::testing::lang;
using ragcap::testing::TempDir;
using Sentence = std::vector<std::string>;

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

Sentence words(std::string_view text) {
  Sentence out;
  std::string cur;
  for (char c : text) {
    if (c == ' ') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

TokenizedInstance inst(std::string id, std::string_view cand, std::vector<std::string_view> refs) {
  TokenizedInstance t{std::move(id), words(cand), {}};
  for (auto r : refs) t.references.push_back(words(r));
  return t;
}

std::vector<TokenizedInstance> random_corpus(std::mt19937_64& rng, std::size_t images, int vocab) {
  std::uniform_int_distribution<int> word(0, vocab - 1);
  std::uniform_int_distribution<int> len(1, 12);
  std::uniform_int_distribution<int> nrefs(1, 4);
  std::vector<TokenizedInstance> corpus;
  for (std::size_t i = 0; i < images; ++i) {
    auto sentence = [&] {
      Sentence s(static_cast<std::size_t>(len(rng)));
      for (auto& w : s) w = "w" + std::to_string(word(rng));
      return s;
    };
    TokenizedInstance t{"i" + std::to_string(i), sentence(), {}};
    for (int r = nrefs(rng); r > 0; --r) t.references.push_back(sentence());
    corpus.push_back(std::move(t));
  }
  return corpus;
}

}  // namespace

TEST_CASE("count_ngrams") {
  const Sentence s{"a", "b", "a", "b"};
  const auto t = count_ngrams(s);
  CHECK(t[0].size() == 2);
  CHECK(t[0].at("a") == 2);
  CHECK(t[1].at(std::string("a\x1f" "b")) == 2);
  CHECK(t[2].size() == 2);
  CHECK(t[3].size() == 1);
  CHECK(count_ngrams(Sentence{})[0].empty());
}

TEST_CASE("idf closed forms") {
  const std::vector<TokenizedInstance> corpus{inst("1", "x", {"common only"}), inst("2", "x", {"common rare"})};
  const auto idf = compute_idf(corpus);
  CHECK(idf.images() == 2);
  CHECK(idf.idf(1, "common") == doctest::Approx(0.0));
  CHECK(idf.idf(1, "rare") == doctest::Approx(std::log(2.0)));
  CHECK(idf.df(1, "only") == 1);
  CHECK(idf.df(1, "missing") == 0);
  CHECK(idf.idf(1, "missing") == doctest::Approx(std::log(2.0)));
  CHECK(code_of([] { compute_idf({}); }) == ErrorCode::kEmptyCorpus);
}

TEST_CASE("idf document frequency matches brute force") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    const auto corpus = random_corpus(rng, 5, 8);
    std::vector<std::vector<Sentence>> refs;
    for (const auto& c : corpus) refs.push_back(c.references);
    const auto df = oracle::document_frequency(refs);
    const auto idf = compute_idf(corpus);
    for (const auto& [gram, count] : df) {
      std::string key;
      for (std::size_t i = 0; i < gram.size(); ++i) key += (i ? "\x1f" : "") + gram[i];
      CHECK(idf.df(static_cast<int>(gram.size()), key) == count);
      CHECK(idf.idf(static_cast<int>(gram.size()), key) == doctest::Approx(std::log(5.0 / count)));
    }
  }
}

TEST_CASE("CIDEr-D matches the reference implementation fixtures") {
  const auto data = nlohmann::json::parse(read_file(ragcap::testing::fixture_dir() / "cider_oracle.json"));
  REQUIRE(data.size() == 50);
  for (const auto& c : data) {
    std::vector<TokenizedInstance> corpus;
    for (const auto& im : c["images"]) {
      corpus.push_back({im["image_id"], im["candidate"].get<Sentence>(), im["references"].get<std::vector<Sentence>>()});
    }
    const auto score = cider_d(corpus);
    CHECK(std::abs(score.value - c["corpus_score"].get<double>()) <= 1e-6);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      CHECK(std::abs(score.per_image[i].second - c["images"][i]["score"].get<double>()) <= 1e-6);
    }
  }
}

TEST_CASE("CIDEr-D basic properties") {
  std::vector<TokenizedInstance> corpus{inst("a", "a dog on the grass", {"a dog on the grass", "a puppy outside"}),
                                        inst("b", "zebra zebra", {"a cat on a sofa"}),
                                        inst("c", "", {"a bus on the road"})};
  const auto s = cider_d(corpus);
  CHECK(s.per_image[0].second > 0.0);
  CHECK(s.per_image[1].second == 0.0);
  CHECK(s.per_image[2].second == 0.0);
  CHECK(s.empty_candidates == 1);
  double mean = 0.0;
  for (const auto& [id, v] : s.per_image) {
    mean += v;
    CHECK(v >= 0.0);
    CHECK(v <= 10.0);
  }
  CHECK(std::abs(mean / 3.0 - s.value) <= 1e-9);

  // Reference order does not matter.
  std::swap(corpus[0].references[0], corpus[0].references[1]);
  CHECK(cider_d(corpus).per_image[0].second == doctest::Approx(s.per_image[0].second).epsilon(1e-12));
}

TEST_CASE("single-image corpus scores zero") {
  const std::vector<TokenizedInstance> corpus{inst("a", "a dog", {"a dog"})};
  CHECK(cider_d(corpus).value == 0.0);
}

TEST_CASE("frozen idf isolates a score from unrelated images") {
  std::mt19937_64 rng(99);
  auto corpus = random_corpus(rng, 10, 20);
  const auto idf = compute_idf(corpus);
  const auto before = cider_d(corpus, idf);
  auto extended = corpus;
  extended.push_back(inst("extra", "w1 w2 w3", {"w1 w2 w4 w5"}));
  const auto after_frozen = cider_d(extended, idf);
  for (std::size_t i = 0; i < corpus.size(); ++i) CHECK(after_frozen.per_image[i].second == before.per_image[i].second);
  // Recomputing idf is the only channel through which the new image matters.
  const auto after_fresh = cider_d(extended);
  bool any_changed = false;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    any_changed = any_changed || after_fresh.per_image[i].second != before.per_image[i].second;
  }
  CHECK(any_changed);
}

TEST_CASE("BLEU closed forms") {
  const std::vector<TokenizedInstance> identity{inst("a", "the cat sat on the mat", {"the cat sat on the mat"}),
                                                inst("b", "a dog runs in the park today", {"x", "a dog runs in the park today"})};
  CHECK(bleu4(identity).value == 1.0);

  // Candidate is the first half of the reference: every n-gram matches, c = r / 2.
  const std::vector<TokenizedInstance> half{inst("a", "one two three four five", {"one two three four five six seven eight nine ten"})};
  CHECK(std::abs(bleu4(half).value - std::exp(-1.0)) <= 1e-9);

  const std::vector<TokenizedInstance> disjoint{inst("a", "alpha beta gamma delta", {"one two three four"})};
  CHECK(bleu4(disjoint).value == 0.0);
  CHECK(code_of([] { bleu4({}); }) == ErrorCode::kEmptyCorpus);
}

TEST_CASE("BLEU clipping and closest reference length") {
  // "the the the the" vs "the cat": unigram precision clipped to 1/4; no bigram matches.
  const std::vector<TokenizedInstance> c{inst("a", "the the the the", {"the cat"})};
  CHECK(bleu4(c).value == 0.0);
  CHECK(bleu4(c, BleuSmoothing::kAddOne).value > 0.0);
  // Ties between equally close reference lengths resolve to the shorter one.
  const std::vector<TokenizedInstance> tie{inst("a", "a b c d e", {"a b c d", "a b c d e f"})};
  CHECK(bleu4(tie).value == doctest::Approx(oracle::bleu4({tie[0].candidate}, {tie[0].references})));
}

TEST_CASE("BLEU matches the brute-force oracle and ignores corpus order") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 25; ++trial) {
    auto corpus = random_corpus(rng, 12, 5);
    std::vector<Sentence> cands;
    std::vector<std::vector<Sentence>> refs;
    for (const auto& c : corpus) {
      cands.push_back(c.candidate);
      refs.push_back(c.references);
    }
    const double want = oracle::bleu4(cands, refs);
    const double got = bleu4(corpus).value;
    CHECK(std::abs(got - want) <= 1e-12);
    std::shuffle(corpus.begin(), corpus.end(), rng);
    CHECK(std::abs(bleu4(corpus).value - got) <= 1e-12);
    CHECK(got >= 0.0);
    CHECK(got <= 1.0);
  }
}

TEST_CASE("metric names") {
  CHECK(parse_metric("cider_d") == Metric::kCiderD);
  CHECK(parse_metric("cider") == Metric::kCiderD);
  CHECK(parse_metric("bleu4") == Metric::kBleu4);
  CHECK(to_string(Metric::kBleu4) == "bleu4");
  CHECK(code_of([] { parse_metric("meteor"); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("evaluate_run joins files and reports") {
  TempDir tmp;
  ragcap::testing::write_text(tmp / "pred.jsonl", "{\"image_id\": \"1\", \"caption\": \"A dog on the grass.\"}\n"
                                                   "{\"image_id\": \"2\", \"caption\": \"a cat\"}\n");
  ragcap::testing::write_text(tmp / "refs.jsonl",
                              "{\"image_id\": \"2\", \"captions\": [\"a cat on a sofa\", \"a sleeping cat\"]}\n"
                              "{\"image_id\": \"1\", \"captions\": [\"a dog on the grass\"]}\n"
                              "{\"image_id\": \"3\", \"captions\": [\"unused\"]}\n");
  EvalOptions opts;
  opts.metrics = {Metric::kCiderD, Metric::kBleu4};
  const auto report = evaluate_run(tmp / "pred.jsonl", tmp / "refs.jsonl", lang("en"), opts);
  CHECK(report.n_images == 2);
  CHECK(report.tokenizer == "whitespace");
  REQUIRE(report.scores.size() == 2);
  CHECK(report.scores[0].per_image.size() == 2);
  CHECK(report.scores[0].per_image[0].first == "1");

  const auto j = report.to_json();
  REQUIRE(j.is_array());
  CHECK(j[0]["metric"] == "cider_d");
  CHECK(j[0]["per_image"].size() == 2);
  CHECK(j[0]["lang"] == "en");
  CHECK(j[0]["n_images"] == 2);
  CHECK(j[1]["metric"] == "bleu4");

  const auto single = evaluate_run(tmp / "pred.jsonl", tmp / "refs.jsonl", lang("en"));
  CHECK(single.to_json().is_object());
  CHECK(single.to_json()["corpus"].get<double>() == doctest::Approx(report.scores[0].value));
}

TEST_CASE("evaluate_run errors") {
  TempDir tmp;
  ragcap::testing::write_text(tmp / "pred.jsonl", "{\"image_id\": \"1\", \"caption\": \"x\"}\n"
                                                   "{\"image_id\": \"9\", \"caption\": \"y\"}\n");
  ragcap::testing::write_text(tmp / "refs.jsonl", "{\"image_id\": \"1\", \"captions\": [\"x\"]}\n");
  try {
    evaluate_run(tmp / "pred.jsonl", tmp / "refs.jsonl", lang("en"));
    FAIL("expected MissingReference");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMissingReference);
    CHECK(std::string(e.what()).find("9") != std::string::npos);
  }
  ragcap::testing::write_text(tmp / "dup.jsonl", "{\"image_id\": \"1\", \"caption\": \"x\"}\n"
                                                  "{\"image_id\": \"1\", \"caption\": \"y\"}\n");
  CHECK(code_of([&] { evaluate_run(tmp / "dup.jsonl", tmp / "refs.jsonl", lang("en")); }) == ErrorCode::kKeyCollision);
  ragcap::testing::write_text(tmp / "norefs.jsonl", "{\"image_id\": \"1\", \"captions\": []}\n");
  ragcap::testing::write_text(tmp / "one.jsonl", "{\"image_id\": \"1\", \"caption\": \"x\"}\n");
  CHECK(code_of([&] { evaluate_run(tmp / "one.jsonl", tmp / "norefs.jsonl", lang("en")); }) == ErrorCode::kCorruptFile);
}

TEST_CASE("evaluation tokenizes per language") {
  const std::vector<EvalInstance> corpus{{"1", "红色巴士", {"红色巴士"}, lang("zh")},
                                         {"2", "一只狗", {"一只猫"}, lang("zh")}};
  const auto report = evaluate(corpus, lang("zh"));
  CHECK(report.tokenizer == "fallback-codepoint");
  CHECK(report.scores[0].per_image[0].second > report.scores[0].per_image[1].second);
}
