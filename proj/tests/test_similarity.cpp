#include <doctest.h>

#include <set>
#include <string>
#include <vector>

#include "personagen/mock_backend.hpp"
#include "personagen/rng.hpp"
#include "personagen/similarity.hpp"
#include "support/test_util.hpp"

using namespace pgen;

namespace {

const std::string kLifestyle = "Hobbies, Interests, and Lifestyle";

EmbedFn mock_embed() {
  return [](const std::vector<std::string>& texts) {
    std::vector<std::vector<double>> out;
    for (const std::string& t : texts) out.push_back(MockBackend::embed_one(t));
    return out;
  };
}

std::vector<ScoredCandidate> fake_scored(size_t n,
                                         const std::string& prefix = "Node") {
  std::vector<ScoredCandidate> out;
  for (size_t i = 0; i < n; ++i) {
    out.push_back(
        {AttributePath({kLifestyle, prefix + " " + std::string(1, char('A' + i))}),
         1.0 - 0.01 * static_cast<double>(i)});
  }
  return out;
}

}  // namespace

TEST_CASE("score_candidates") {
  EmbedFn embed = mock_embed();
  std::vector<std::string> core = {"guitar music", "vegan cooking"};

  CHECK_THROWS_AS(score_candidates({}, {}, embed), InvalidInput);
  CHECK(score_candidates({}, core, embed).empty());

  std::vector<AttributePath> candidates = {
      AttributePath({kLifestyle, "Music", "Guitar"}),
      AttributePath({kLifestyle, "Games", "Chess"}),
  };
  auto scored = score_candidates(candidates, core, embed);
  REQUIRE(scored.size() == 2);
  // Order is preserved and scores stay in [-1, 1].
  CHECK(scored[0].path == candidates[0]);
  CHECK(scored[1].path == candidates[1]);
  for (const auto& s : scored) {
    CHECK(s.score <= 1.0 + 1e-12);
    CHECK(s.score >= -1.0 - 1e-12);
  }
  // The guitar path shares tokens with the core; the chess path shares none
  // with either core text beyond the category labels.
  CHECK(scored[0].score > scored[1].score);

  // A candidate identical to the (single-text) core scores exactly 1.
  auto self = score_candidates({candidates[0]}, {candidates[0].joined()}, embed);
  CHECK(self[0].score == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("stratify splits tertiles deterministically") {
  SUBCASE("sizes follow (n+2)/3 and half the rest") {
    auto check_sizes = [](size_t n, size_t near, size_t middle, size_t far) {
      Strata s = stratify(fake_scored(n));
      CHECK(s.near.size() == near);
      CHECK(s.middle.size() == middle);
      CHECK(s.far.size() == far);
      CHECK(s.total() == n);
    };
    check_sizes(0, 0, 0, 0);
    check_sizes(1, 1, 0, 0);
    check_sizes(2, 1, 1, 0);
    check_sizes(3, 1, 1, 1);
    check_sizes(4, 2, 1, 1);
    check_sizes(5, 2, 2, 1);
    check_sizes(6, 2, 2, 2);
    check_sizes(7, 3, 2, 2);
    check_sizes(10, 4, 3, 3);
  }

  SUBCASE("descending score, ties broken by path text") {
    std::vector<ScoredCandidate> scored = {
        {AttributePath({kLifestyle, "B"}), 0.5},
        {AttributePath({kLifestyle, "A"}), 0.5},
        {AttributePath({kLifestyle, "C"}), 0.9},
    };
    Strata s = stratify(scored);
    REQUIRE(s.near.size() == 1);
    CHECK(s.near[0].path.joined() == kLifestyle + " -> C");
    CHECK(s.middle[0].path.joined() == kLifestyle + " -> A");
    CHECK(s.far[0].path.joined() == kLifestyle + " -> B");
    // Near scores dominate middle, middle dominate far.
    CHECK(s.near.back().score >= s.middle.front().score);
    CHECK(s.middle.back().score >= s.far.front().score);
  }
}

TEST_CASE("draw_stratum hits the 5:3:2 rates") {
  CHECK(kStratumWeights[0] == 0.5);
  CHECK(kStratumWeights[1] == 0.3);
  CHECK(kStratumWeights[2] == 0.2);
  CHECK(stratum_name(Stratum::kNear) == "near");
  CHECK(stratum_name(Stratum::kMiddle) == "middle");
  CHECK(stratum_name(Stratum::kFar) == "far");

  Rng rng(11);
  int counts[3] = {0, 0, 0};
  const int kDraws = 10000;
  for (int i = 0; i < kDraws; ++i) ++counts[static_cast<int>(draw_stratum(rng))];
  CHECK(counts[0] / double(kDraws) == doctest::Approx(0.5).epsilon(0.04));
  CHECK(counts[1] / double(kDraws) == doctest::Approx(0.3).epsilon(0.07));
  CHECK(counts[2] / double(kDraws) == doctest::Approx(0.2).epsilon(0.10));

  // Same seed, same sequence.
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) CHECK(draw_stratum(a) == draw_stratum(b));
}

TEST_CASE("sample_stratified") {
  SUBCASE("ample pools honor the 5:3:2 quotas") {
    Strata strata;
    strata.near = fake_scored(6, "Near");
    strata.middle = fake_scored(6, "Middle");
    strata.far = fake_scored(6, "Far");
    Rng rng(1);
    auto picks = sample_stratified(strata, 10, rng);
    REQUIRE(picks.size() == 10);
    // Near picks come first: 5 near, 3 middle, 2 far.
    std::set<std::string> near_keys, middle_keys, far_keys;
    for (const auto& c : strata.near) near_keys.insert(c.path.key());
    for (const auto& c : strata.middle) middle_keys.insert(c.path.key());
    for (const auto& c : strata.far) far_keys.insert(c.path.key());
    for (size_t i = 0; i < 5; ++i) CHECK(near_keys.count(picks[i].key()));
    for (size_t i = 5; i < 8; ++i) CHECK(middle_keys.count(picks[i].key()));
    for (size_t i = 8; i < 10; ++i) CHECK(far_keys.count(picks[i].key()));
  }

  SUBCASE("deficits spill to the adjacent stratum") {
    Strata strata;
    strata.near = fake_scored(8, "Near");
    strata.middle = fake_scored(8, "Middle");
    // far empty: its quota of 2 spills to middle.
    Rng rng(2);
    auto picks = sample_stratified(strata, 10, rng);
    REQUIRE(picks.size() == 10);
    std::set<std::string> near_keys;
    for (const auto& c : strata.near) near_keys.insert(c.path.key());
    size_t from_near = 0;
    for (const auto& p : picks) from_near += near_keys.count(p.key());
    CHECK(from_near == 5);  // near quota untouched, middle covers far's gap
  }

  SUBCASE("short total returns every candidate exactly once") {
    Strata strata;
    strata.near = fake_scored(2);
    strata.middle = fake_scored(1);
    Rng rng(3);
    auto picks = sample_stratified(strata, 10, rng);
    CHECK(picks.size() == 3);
  }

  SUBCASE("samples are distinct and deterministic") {
    Strata strata;
    strata.near = fake_scored(9, "Near");
    strata.middle = fake_scored(7, "Middle");
    strata.far = fake_scored(5, "Far");
    Rng r1(42), r2(42);
    auto p1 = sample_stratified(strata, 12, r1);
    auto p2 = sample_stratified(strata, 12, r2);
    REQUIRE(p1.size() == 12);
    CHECK(p1 == p2);
    std::set<std::string> seen;
    for (const auto& p : p1) seen.insert(p.key());
    CHECK(seen.size() == 12);
  }

  SUBCASE("zero requests yield nothing") {
    Strata strata;
    strata.near = fake_scored(3);
    Rng rng(4);
    CHECK(sample_stratified(strata, 0, rng).empty());
  }
}
