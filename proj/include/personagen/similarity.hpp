#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "personagen/attribute_tree.hpp"
#include "personagen/backend.hpp"
#include "personagen/embedding.hpp"
#include "personagen/error.hpp"
#include "personagen/rng.hpp"

namespace pgen {

struct ScoredCandidate {
  AttributePath path;
  double score = 0.0;
};

enum class Stratum { kNear, kMiddle, kFar };

inline std::string_view stratum_name(Stratum s) {
  switch (s) {
    case Stratum::kNear: return "near";
    case Stratum::kMiddle: return "middle";
    case Stratum::kFar: return "far";
  }
  return "near";
}

struct Strata {
  std::vector<ScoredCandidate> near;
  std::vector<ScoredCandidate> middle;
  std::vector<ScoredCandidate> far;

  std::size_t total() const { return near.size() + middle.size() + far.size(); }
};

inline constexpr std::array<double, 3> kStratumWeights = {0.5, 0.3, 0.2};

// Cosine of each candidate against the re-normalized mean of the core
// embeddings; order-preserving.
inline std::vector<ScoredCandidate> score_candidates(
    const std::vector<AttributePath>& candidates,
    const std::vector<std::string>& core, const EmbedFn& embed) {
  if (core.empty()) throw InvalidInput("empty core attribute list");
  std::vector<double> center = centroid(embed(core));
  std::vector<std::string> texts;
  texts.reserve(candidates.size());
  for (const AttributePath& c : candidates) texts.push_back(c.joined());
  std::vector<std::vector<double>> embs = texts.empty()
                                              ? std::vector<std::vector<double>>{}
                                              : embed(texts);
  if (embs.size() != candidates.size())
    throw InvalidInput("embedding batch size mismatch");
  std::vector<ScoredCandidate> out;
  out.reserve(candidates.size());
  for (size_t i = 0; i < candidates.size(); ++i) {
    double score = cosine(embs[i], center);
    if (!std::isfinite(score)) throw InvalidInput("non-finite similarity score");
    out.push_back({candidates[i], score});
  }
  return out;
}

// Tertile split of the similarity distribution: sort descending by score
// (ties by path), first third near, half the rest middle, remainder far.
inline Strata stratify(std::vector<ScoredCandidate> scored) {
  std::sort(scored.begin(), scored.end(),
            [](const ScoredCandidate& a, const ScoredCandidate& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.path.joined() < b.path.joined();
            });
  size_t n = scored.size();
  size_t near_count = (n + 2) / 3;
  size_t middle_count = (n - near_count + 1) / 2;
  Strata strata;
  for (size_t i = 0; i < n; ++i) {
    if (i < near_count)
      strata.near.push_back(std::move(scored[i]));
    else if (i < near_count + middle_count)
      strata.middle.push_back(std::move(scored[i]));
    else
      strata.far.push_back(std::move(scored[i]));
  }
  return strata;
}

// One stratum choice at the 5:3:2 rate.
inline Stratum draw_stratum(Rng& rng) {
  double u = rng.uniform01();
  if (u < kStratumWeights[0]) return Stratum::kNear;
  if (u < kStratumWeights[0] + kStratumWeights[1]) return Stratum::kMiddle;
  return Stratum::kFar;
}

namespace detail {

// First `take` elements of a seeded partial Fisher-Yates pass.
inline std::vector<const ScoredCandidate*> sample_without_replacement(
    const std::vector<ScoredCandidate>& pool, size_t take, Rng& rng) {
  std::vector<const ScoredCandidate*> ptrs;
  ptrs.reserve(pool.size());
  for (const ScoredCandidate& c : pool) ptrs.push_back(&c);
  take = std::min(take, ptrs.size());
  for (size_t i = 0; i < take; ++i) {
    size_t j = i + rng.index(ptrs.size() - i);
    std::swap(ptrs[i], ptrs[j]);
  }
  ptrs.resize(take);
  return ptrs;
}

}  // namespace detail

// Batch sampling at 5:3:2: quotas are round-half-up 0.5n and 0.3n with the
// remainder to far; a short stratum spills its deficit to the nearer
// adjacent stratum first (far -> middle -> near, middle -> near -> far,
// near -> middle -> far), farthest deficits resolved first. Returns
// min(n, total candidates) distinct paths, near picks first.
inline std::vector<AttributePath> sample_stratified(const Strata& strata, size_t n,
                                                    Rng& rng) {
  std::array<const std::vector<ScoredCandidate>*, 3> pools = {
      &strata.near, &strata.middle, &strata.far};
  std::array<size_t, 3> quota;
  quota[0] = static_cast<size_t>(std::floor(0.5 * static_cast<double>(n) + 0.5));
  quota[1] = static_cast<size_t>(std::floor(0.3 * static_cast<double>(n) + 0.5));
  quota[1] = std::min(quota[1], n - std::min(n, quota[0]));
  quota[2] = n - quota[0] - quota[1];

  std::array<size_t, 3> take;
  for (size_t s = 0; s < 3; ++s) take[s] = std::min(quota[s], pools[s]->size());

  static constexpr std::array<std::array<size_t, 2>, 3> kSpill = {
      {{1, 2}, {0, 2}, {1, 0}}};  // near->mid,far; middle->near,far; far->mid,near
  for (size_t s : {size_t{2}, size_t{1}, size_t{0}}) {
    // A stratum already topped up past its quota by an earlier spill has
    // no deficit of its own.
    size_t deficit = quota[s] > take[s] ? quota[s] - take[s] : 0;
    for (size_t target : kSpill[s]) {
      if (deficit == 0) break;
      size_t spare = pools[target]->size() - take[target];
      size_t grab = std::min(deficit, spare);
      take[target] += grab;
      deficit -= grab;
    }
  }

  std::vector<AttributePath> out;
  out.reserve(n);
  for (size_t s = 0; s < 3; ++s) {
    for (const ScoredCandidate* c :
         detail::sample_without_replacement(*pools[s], take[s], rng))
      out.push_back(c->path);
  }
  return out;
}

}  // namespace pgen
