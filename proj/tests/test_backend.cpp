#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "personagen/backend.hpp"
#include "personagen/embedding.hpp"
#include "personagen/json_util.hpp"
#include "personagen/mock_backend.hpp"
#include "personagen/rng.hpp"
#include "personagen/text.hpp"
#include "support/test_util.hpp"

using namespace pgen;

TEST_CASE("text helpers") {
  CHECK(trim("  a b \n") == "a b");
  CHECK(trim("") == "");
  CHECK(to_lower("AbC-9") == "abc-9");
  CHECK(tokenize("Hello, World! 42") == std::vector<std::string>{"hello", "world", "42"});
  CHECK(fold_plural("preferences") == "preference");
  CHECK(fold_plural("hobbies") == "hobby");
  CHECK(fold_plural("glass") == "glass");
  CHECK(fold_plural("bus") == "bus");  // short words keep their s
  CHECK(contains_digit("abc1"));
  CHECK(!contains_digit("abc"));
  CHECK(split("a,b,,c", ',') == std::vector<std::string>{"a", "b", "", "c"});
}

TEST_CASE("fnv1a64 golden values") {
  // Published FNV-1a reference vectors.
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
  CHECK(to_hex(0xcbf29ce484222325ULL) == "cbf29ce484222325");
  CHECK(to_hex(0x1ULL) == "0000000000000001");
  // Chaining differs from concatenation hashing only via the seed argument.
  CHECK(fnv1a64("b", fnv1a64("a")) == fnv1a64("ab"));
}

TEST_CASE("rng mappings are platform-stable") {
  // mt19937_64 output is pinned by the standard; the first draw for seed
  // 5489 is the documented reference value.
  Rng reference(5489);
  CHECK(reference.next() == 14514284786278117030ULL);

  Rng rng(42);
  double u = rng.uniform01();
  CHECK(u >= 0.0);
  CHECK(u < 1.0);
  CHECK(Rng(7).index(10) == Rng(7).index(10));
  CHECK_THROWS_AS(rng.index(0), InvalidInput);
  CHECK_THROWS_AS(rng.int_in(3, 2), InvalidInput);
  for (int i = 0; i < 100; ++i) {
    int v = rng.int_in(3, 5);
    CHECK(v >= 3);
    CHECK(v <= 5);
  }
  CHECK_THROWS_AS(rng.weighted({0.0, 0.0}), InvalidInput);
  CHECK_THROWS_AS(rng.weighted({1.0, -0.5}), InvalidInput);

  // A zero-weight entry is never drawn.
  Rng wr(3);
  for (int i = 0; i < 200; ++i) CHECK(wr.weighted({1.0, 0.0, 2.0}) != 1);

  std::vector<int> v{1, 2, 3, 4, 5};
  Rng sr(9);
  auto shuffled = v;
  sr.shuffle(shuffled);
  std::multiset<int> a(v.begin(), v.end()), b(shuffled.begin(), shuffled.end());
  CHECK(a == b);
}

TEST_CASE("backend config validation") {
  BackendConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.model_name == "mock-model");
  CHECK(cfg.api_key_env == "PGEN_API_KEY");
  CHECK(cfg.max_retries == 3);

  BackendConfig bad = cfg;
  bad.max_retries = -1;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad = cfg;
  bad.max_retries = 11;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad = cfg;
  bad.temperature = -0.1;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad = cfg;
  bad.temperature = 2.5;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad = cfg;
  bad.rate_limit = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("chat request validation") {
  ChatRequest empty;
  CHECK_THROWS_AS(empty.validate(), InvalidInput);

  ChatRequest starts_assistant;
  starts_assistant.messages.push_back({Role::kAssistant, "hello"});
  CHECK_THROWS_AS(starts_assistant.validate(), InvalidInput);

  ChatRequest ok = ChatRequest::user("hi");
  CHECK_NOTHROW(ok.validate());
  CHECK(ok.messages.size() == 1);
  CHECK(ok.messages[0].role == Role::kUser);

  ChatRequest su = ChatRequest::system_user("sys", "usr");
  CHECK(su.messages.size() == 2);
  CHECK(su.messages[0].role == Role::kSystem);
  CHECK(su.messages[1].role == Role::kUser);
}

TEST_CASE("extract_json_object") {
  CHECK(extract_json_object(R"({"a": 1})") == R"({"a": 1})");
  CHECK(extract_json_object("prefix {\"a\": {\"b\": 2}} suffix") ==
        "{\"a\": {\"b\": 2}}");
  // Braces inside strings do not end the region.
  CHECK(extract_json_object(R"({"a": "}{"})") == R"({"a": "}{"})");
  // Escaped quotes inside strings.
  CHECK(extract_json_object(R"({"a": "x\"}y"})") == R"({"a": "x\"}y"})");
  CHECK(extract_json_object("no object here") == "");
  CHECK(extract_json_object("{\"unterminated\": 1") == "");
}

TEST_CASE("json shape validation") {
  JsonShape shape{{{"name", ValueKind::kString},
                   {"tags", ValueKind::kStringList},
                   {"extra", ValueKind::kObject, false}}};
  CHECK(!shape.check(json{{"name", "x"}, {"tags", {"a", "b"}}}));
  CHECK(shape.check(json::array()).has_value());
  CHECK(shape.check(json{{"tags", {"a"}}}).has_value());        // missing name
  CHECK(shape.check(json{{"name", 5}, {"tags", {"a"}}}).has_value());
  CHECK(shape.check(json{{"name", "x"}, {"tags", "a"}}).has_value());
  CHECK(shape.check(json{{"name", "x"}, {"tags", {"a", 2}}}).has_value());
  CHECK(shape.check(json{{"name", "x"}, {"tags", {"a"}}, {"extra", "s"}})
            .has_value());  // extra must be an object when present
  CHECK(!shape.check(
      json{{"name", "x"}, {"tags", {"a"}}, {"extra", json::object()}}));
}

TEST_CASE("complete_json repairs invalid replies") {
  JsonShape shape{{{"value", ValueKind::kString}}};

  SUBCASE("first reply broken, second valid") {
    test::ScriptedBackend backend({"not json at all", R"({"value": "ok"})"});
    json out = complete_json(backend, ChatRequest::user("q"), shape);
    CHECK(out.at("value") == "ok");
    REQUIRE(backend.requests.size() == 2);
    // The retry carries the failed reply and the fixed repair instruction.
    const ChatRequest& retry = backend.requests[1];
    REQUIRE(retry.messages.size() == 3);
    CHECK(retry.messages[1].role == Role::kAssistant);
    CHECK(retry.messages[1].content == "not json at all");
    CHECK(retry.messages[2].role == Role::kUser);
    CHECK(retry.messages[2].content == std::string(kJsonRepairInstruction));
  }

  SUBCASE("shape violation also repaired") {
    test::ScriptedBackend backend({R"({"wrong": 1})", R"({"value": "ok"})"});
    json out = complete_json(backend, ChatRequest::user("q"), shape);
    CHECK(out.at("value") == "ok");
    CHECK(backend.requests.size() == 2);
  }

  SUBCASE("exhaustion raises SchemaViolation with the raw reply") {
    test::ScriptedBackend backend(
        {"bad1", "bad2", "bad3", "bad4", "never reached"});
    try {
      complete_json(backend, ChatRequest::user("q"), shape);
      FAIL("expected SchemaViolation");
    } catch (const SchemaViolation& e) {
      CHECK(e.raw_reply() == "bad4");
    }
    // max_retries=3 means 4 attempts total.
    CHECK(backend.requests.size() == 4);
  }

  SUBCASE("prose-wrapped JSON accepted") {
    test::ScriptedBackend backend({"Sure thing:\n{\"value\": \"v\"}\nCheers"});
    CHECK(complete_json(backend, ChatRequest::user("q"), shape).at("value") == "v");
  }
}

TEST_CASE("rate limiter spacing") {
  RateLimiter limiter(1000.0);
  double interval = std::chrono::duration<double>(limiter.interval()).count();
  CHECK(interval == doctest::Approx(0.001).epsilon(1e-6));
  auto a = limiter.acquire();
  auto b = limiter.acquire();
  CHECK(std::chrono::duration<double>(b - a).count() >= 0.001 - 1e-9);
  CHECK_THROWS_AS(RateLimiter(0.0), InvalidInput);
}

TEST_CASE("mock backend determinism and routing") {
  MockBackend m1 = test::make_mock(1);
  MockBackend m2 = test::make_mock(1);
  MockBackend m3 = test::make_mock(2);
  ChatRequest r = ChatRequest::user("anything goes");
  CHECK(m1.complete(r) == m2.complete(r));
  CHECK(m1.complete(r) != m3.complete(r));
  // Reply depends on the message list, including roles.
  CHECK(m1.complete(ChatRequest::user("a")) !=
        m1.complete(ChatRequest::system_user("a", "")));
}

TEST_CASE("mock embeddings: unit norm, token overlap, seed independence") {
  MockBackend a = test::make_mock(1);
  MockBackend b = test::make_mock(99);
  auto va = a.embed({"Music", "Music Taste", "Games", "Food Preference",
                     "Food Preferences"});
  auto vb = b.embed({"Music", "Music Taste", "Games", "Food Preference",
                     "Food Preferences"});
  CHECK(va == vb);  // embeddings ignore the seed

  for (const auto& v : va) CHECK(norm(v) == doctest::Approx(1.0).epsilon(1e-12));
  // Disjoint token sets are exactly orthogonal.
  CHECK(cosine(va[0], va[2]) == doctest::Approx(0.0));
  // One shared token of two: 1/sqrt(2).
  CHECK(cosine(va[0], va[1]) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  // Plural folding makes these identical.
  CHECK(cosine(va[3], va[4]) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("embedding helpers") {
  std::vector<double> x{3.0, 4.0};
  CHECK(norm(x) == doctest::Approx(5.0));
  CHECK(dot(x, x) == doctest::Approx(25.0));
  CHECK(cosine(x, {0.0, 0.0}) == 0.0);
  auto n = normalized(x);
  CHECK(norm(n) == doctest::Approx(1.0));
  CHECK_THROWS_AS(normalized(std::vector<double>{0.0, 0.0}), InvalidInput);
  auto c = centroid({{1.0, 0.0}, {0.0, 1.0}});
  CHECK(c[0] == doctest::Approx(c[1]));
  CHECK(norm(c) == doctest::Approx(1.0));
}

TEST_CASE("json file helpers") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "pgen_json_util_test";
  fs::remove_all(dir);
  CHECK_THROWS_WITH_AS(read_file(dir / "missing.json"),
                       doctest::Contains("file not found"), InvalidInput);
  write_json_file(dir / "sub" / "x.json", json{{"k", 1}});
  CHECK(parse_json_file(dir / "sub" / "x.json").at("k") == 1);
  fs::remove_all(dir);
}
