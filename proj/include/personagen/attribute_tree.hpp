#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "personagen/backend.hpp"
#include "personagen/embedding.hpp"
#include "personagen/error.hpp"
#include "personagen/json_util.hpp"
#include "personagen/text.hpp"

namespace pgen {

inline constexpr int kMaxPathDepth = 4;  // segments including the root category
inline constexpr double kDefaultMergeThreshold = 0.70;

inline const std::vector<std::string>& root_categories() {
  static const std::vector<std::string> kRoots = {
      "Demographic Information",
      "Physical and Health Characteristics",
      "Psychological and Cognitive Aspects",
      "Cultural and Social Context",
      "Relationships and Social Networks",
      "Career and Work Identity",
      "Education and Learning",
      "Hobbies, Interests, and Lifestyle",
      "Lifestyle and Daily Routine",
      "Core Values, Beliefs, and Philosophy",
      "Emotional and Relational Skills",
      "Media Consumption and Engagement",
  };
  return kRoots;
}

// One root-to-node label chain. segments[0] is a root category.
struct AttributePath {
  std::vector<std::string> segments;

  AttributePath() = default;
  explicit AttributePath(std::vector<std::string> segs) : segments(std::move(segs)) {
    validate();
  }

  void validate() const {
    if (segments.empty()) throw InvalidInput("empty attribute path");
    if (segments.size() > kMaxPathDepth)
      throw InvalidInput("attribute path deeper than " +
                         std::to_string(kMaxPathDepth) + ": " + joined());
    for (const std::string& s : segments) {
      if (trim(s).empty()) throw InvalidInput("blank attribute path segment");
      if (trim(s) != s)
        throw InvalidInput("untrimmed attribute path segment: '" + s + "'");
      if (s.find("->") != std::string::npos ||
          s.find("\xe2\x86\x92") != std::string::npos ||
          s.find('\n') != std::string::npos)
        throw InvalidInput("separator character inside segment: '" + s + "'");
    }
  }

  std::string joined() const {
    std::string out;
    for (size_t i = 0; i < segments.size(); ++i) {
      if (i) out += " -> ";
      out += segments[i];
    }
    return out;
  }

  // Case-insensitive identity, used for deduplication.
  std::string key() const { return to_lower(joined()); }

  // Parses "A -> B -> C" (the unicode arrow is accepted as a synonym).
  static AttributePath parse(std::string_view text) {
    std::string norm(text);
    for (size_t pos = 0; (pos = norm.find("\xe2\x86\x92", pos)) != std::string::npos;)
      norm.replace(pos, 3, "->");
    std::vector<std::string> segs;
    for (std::string_view part_raw : split(norm, "->")) {
      std::string part = trim(part_raw);
      if (part.empty()) throw InvalidInput("blank segment in path: " + norm);
      segs.push_back(std::move(part));
    }
    return AttributePath(std::move(segs));
  }

  bool operator==(const AttributePath& o) const { return segments == o.segments; }
  bool operator<(const AttributePath& o) const { return segments < o.segments; }
};

// Trie over attribute paths. Node 0 is a synthetic super-root whose children
// are the 12 fixed categories; those are always present and never removed.
// source_count(n) = number of inserted paths whose prefix reaches n.
class AttributeTree {
 public:
  using NodeId = std::uint32_t;
  static constexpr NodeId kSuperRoot = 0;

  struct Node {
    std::string label;
    int source_count = 0;
    int visit_count = 0;  // runtime sampling bookkeeping, not serialized
    NodeId parent = kSuperRoot;
    std::vector<NodeId> children;
  };

  AttributeTree() {
    nodes_.push_back(Node{"root", 0, 0, kSuperRoot, {}});
    for (const std::string& r : root_categories()) {
      NodeId id = static_cast<NodeId>(nodes_.size());
      nodes_.push_back(Node{r, 0, 0, kSuperRoot, {}});
      nodes_[kSuperRoot].children.push_back(id);
    }
  }

  const Node& node(NodeId id) const { return nodes_.at(id); }
  Node& node(NodeId id) { return nodes_.at(id); }

  std::size_t node_count() const { return nodes_.size() - 1; }

  int depth(NodeId id) const {
    int d = 0;
    while (id != kSuperRoot) {
      id = nodes_.at(id).parent;
      ++d;
    }
    return d;
  }

  const std::vector<NodeId>& roots() const { return nodes_[kSuperRoot].children; }

  NodeId find_child(NodeId parent, std::string_view label) const {
    std::string want = to_lower(label);
    for (NodeId c : nodes_.at(parent).children)
      if (to_lower(nodes_[c].label) == want) return c;
    return kSuperRoot;  // super-root is never a child; doubles as "not found"
  }

  // Adds (or tops up) a child. First-seen casing of the label wins.
  NodeId add_child(NodeId parent, const std::string& label, int source_count) {
    if (depth(parent) >= kMaxPathDepth)
      throw InvalidInput("tree deeper than " + std::to_string(kMaxPathDepth));
    if (source_count < 0) throw InvalidInput("negative source_count");
    NodeId existing = find_child(parent, label);
    if (existing != kSuperRoot) {
      nodes_[existing].source_count += source_count;
      return existing;
    }
    NodeId id = static_cast<NodeId>(nodes_.size());
    nodes_.push_back(Node{label, source_count, 0, parent, {}});
    nodes_[parent].children.push_back(id);
    return id;
  }

  // Trie insertion: increments source_count by `count` along the whole chain.
  NodeId insert_path(const AttributePath& path, int count = 1) {
    path.validate();
    if (count <= 0) throw InvalidInput("path count must be positive");
    NodeId root = find_child(kSuperRoot, path.segments[0]);
    if (root == kSuperRoot)
      throw InvalidInput("unknown root category: " + path.segments[0]);
    nodes_[root].source_count += count;
    NodeId cur = root;
    for (size_t i = 1; i < path.segments.size(); ++i)
      cur = add_child(cur, path.segments[i], count);
    return cur;
  }

  std::optional<NodeId> find(const AttributePath& path) const {
    NodeId cur = kSuperRoot;
    for (const std::string& seg : path.segments) {
      cur = find_child(cur, seg);
      if (cur == kSuperRoot) return std::nullopt;
    }
    return cur;
  }

  AttributePath path_of(NodeId id) const {
    std::vector<std::string> segs;
    while (id != kSuperRoot) {
      segs.push_back(nodes_.at(id).label);
      id = nodes_.at(id).parent;
    }
    std::reverse(segs.begin(), segs.end());
    return AttributePath(std::move(segs));
  }

  // Every node below the root categories, i.e. the selectable attributes.
  std::vector<NodeId> attribute_ids() const {
    std::vector<NodeId> out;
    for (NodeId id = 1; id < nodes_.size(); ++id)
      if (nodes_[id].parent != kSuperRoot) out.push_back(id);
    return out;
  }

  // (path, multiplicity) for every node holding terminal mass, where the
  // terminal mass is source_count minus what its children account for.
  std::vector<std::pair<AttributePath, int>> enumerate_weighted() const {
    std::vector<std::pair<AttributePath, int>> out;
    for (NodeId r : roots()) walk_weighted(r, out);
    return out;
  }

  std::vector<AttributePath> enumerate_paths() const {
    std::vector<AttributePath> out;
    for (auto& [path, count] : enumerate_weighted()) out.push_back(path);
    return out;
  }

  ojson to_json() const { return node_to_json(kSuperRoot); }

  static AttributeTree from_json(const json& j) {
    AttributeTree tree;
    if (!j.is_object() || !j.contains("children"))
      throw InvalidInput("taxonomy JSON must be the super-root object");
    for (const json& child : j.at("children")) {
      NodeId root = tree.find_child(kSuperRoot, child.at("label").get<std::string>());
      if (root == kSuperRoot)
        throw InvalidInput("unknown root category in taxonomy JSON: " +
                           child.at("label").get<std::string>());
      tree.nodes_[root].source_count = child.at("source_count").get<int>();
      for (const json& grand : child.value("children", json::array()))
        tree.node_from_json(root, grand);
    }
    return tree;
  }

  void save(const std::filesystem::path& file) const {
    write_json_file(file, to_json());
  }

  static AttributeTree load(const std::filesystem::path& file) {
    return from_json(parse_json_file(file));
  }

 private:
  void walk_weighted(NodeId id,
                     std::vector<std::pair<AttributePath, int>>& out) const {
    const Node& n = nodes_[id];
    int child_mass = 0;
    for (NodeId c : n.children) child_mass += nodes_[c].source_count;
    int terminal = n.source_count - child_mass;
    if (terminal > 0) out.emplace_back(path_of(id), terminal);
    for (NodeId c : n.children) walk_weighted(c, out);
  }

  ojson node_to_json(NodeId id) const {
    const Node& n = nodes_[id];
    ojson j;
    j["label"] = n.label;
    j["source_count"] = n.source_count;
    std::vector<NodeId> kids = n.children;
    std::sort(kids.begin(), kids.end(), [this](NodeId a, NodeId b) {
      return nodes_[a].label < nodes_[b].label;
    });
    ojson children = ojson::array();
    for (NodeId c : kids) children.push_back(node_to_json(c));
    j["children"] = std::move(children);
    return j;
  }

  void node_from_json(NodeId parent, const json& j) {
    NodeId id = add_child(parent, j.at("label").get<std::string>(),
                          j.at("source_count").get<int>());
    for (const json& child : j.value("children", json::array()))
      node_from_json(id, child);
  }

  std::vector<Node> nodes_;
};

inline AttributeTree paths_to_tree(const std::vector<AttributePath>& paths) {
  AttributeTree tree;
  for (const AttributePath& p : paths) tree.insert_path(p);
  return tree;
}

namespace detail {

struct MergeNode {
  std::string label;
  int count = 0;
  std::vector<std::unique_ptr<MergeNode>> kids;
  // (label, count at group entry) for every member this node absorbed,
  // itself included; canonical label is chosen from these.
  std::vector<std::pair<std::string, int>> variants;
};

inline std::unique_ptr<MergeNode> to_merge_node(const AttributeTree& tree,
                                                AttributeTree::NodeId id) {
  auto n = std::make_unique<MergeNode>();
  n->label = tree.node(id).label;
  n->count = tree.node(id).source_count;
  for (auto c : tree.node(id).children) n->kids.push_back(to_merge_node(tree, c));
  return n;
}

// Folds src into dst when their labels already coincide: counts add and
// children fold recursively by label.
inline void fold_into(MergeNode& dst, std::unique_ptr<MergeNode> src) {
  dst.count += src->count;
  for (auto& kid : src->kids) {
    MergeNode* hit = nullptr;
    for (auto& existing : dst.kids)
      if (to_lower(existing->label) == to_lower(kid->label)) {
        hit = existing.get();
        break;
      }
    if (hit)
      fold_into(*hit, std::move(kid));
    else
      dst.kids.push_back(std::move(kid));
  }
}

inline std::string canonical_label(
    const std::vector<std::pair<std::string, int>>& variants) {
  const std::pair<std::string, int>* best = nullptr;
  for (const auto& v : variants) {
    if (!best || v.second > best->second ||
        (v.second == best->second && v.first < best->first))
      best = &v;
  }
  return best->first;
}

// Greedy pairwise merge of one sibling group, repeated to a fixed point.
// Each pass embeds the current labels once, visits members by descending
// count (ties by label), and absorbs any later member whose label cosine
// exceeds the threshold. Labels are re-canonicalized between passes so the
// result is stable under re-merging.
inline void merge_group(std::vector<std::unique_ptr<MergeNode>>& kids,
                        const EmbedFn& embed, double threshold) {
  if (kids.size() < 2) return;
  for (auto& k : kids) k->variants = {{k->label, k->count}};
  while (kids.size() >= 2) {
    std::vector<std::string> labels;
    labels.reserve(kids.size());
    for (auto& k : kids) labels.push_back(k->label);
    std::vector<std::vector<double>> embs = embed(labels);
    if (embs.size() != kids.size())
      throw InvalidInput("embedding batch size mismatch");

    std::vector<size_t> order(kids.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      if (kids[a]->count != kids[b]->count) return kids[a]->count > kids[b]->count;
      return kids[a]->label < kids[b]->label;
    });

    std::vector<bool> absorbed(kids.size(), false);
    bool changed = false;
    for (size_t oi = 0; oi < order.size(); ++oi) {
      size_t i = order[oi];
      if (absorbed[i]) continue;
      for (size_t oj = oi + 1; oj < order.size(); ++oj) {
        size_t j = order[oj];
        if (absorbed[j]) continue;
        if (cosine(embs[i], embs[j]) > threshold) {
          kids[i]->count += kids[j]->count;
          for (auto& v : kids[j]->variants) kids[i]->variants.push_back(v);
          for (auto& kid : kids[j]->kids) {
            MergeNode* hit = nullptr;
            for (auto& existing : kids[i]->kids)
              if (to_lower(existing->label) == to_lower(kid->label)) {
                hit = existing.get();
                break;
              }
            if (hit)
              fold_into(*hit, std::move(kid));
            else
              kids[i]->kids.push_back(std::move(kid));
          }
          absorbed[j] = true;
          changed = true;
        }
      }
    }
    if (!changed) break;
    std::vector<std::unique_ptr<MergeNode>> survivors;
    for (size_t i = 0; i < kids.size(); ++i)
      if (!absorbed[i]) survivors.push_back(std::move(kids[i]));
    kids = std::move(survivors);
    for (auto& k : kids) k->label = canonical_label(k->variants);
  }
  for (auto& k : kids) k->variants.clear();
}

inline void rebuild(AttributeTree& tree, AttributeTree::NodeId parent,
                    const MergeNode& n) {
  AttributeTree::NodeId id = tree.add_child(parent, n.label, n.count);
  for (const auto& kid : n.kids) rebuild(tree, id, *kid);
}

}  // namespace detail

// Semantic sibling merge at the two levels below the root categories.
// The 12 roots are never merged or relabeled; descendant subtrees of merged
// siblings are folded together label-wise.
inline AttributeTree merge_tree(const AttributeTree& input, const EmbedFn& embed,
                                double threshold = kDefaultMergeThreshold) {
  // Thresholds above the cosine maximum are legal and make merging a no-op.
  if (!(threshold > 0.0))
    throw InvalidInput("merge threshold must be positive");
  std::vector<std::unique_ptr<detail::MergeNode>> roots;
  for (auto r : input.roots()) roots.push_back(detail::to_merge_node(input, r));

  for (auto& root : roots) detail::merge_group(root->kids, embed, threshold);
  for (auto& root : roots)
    for (auto& level2 : root->kids)
      detail::merge_group(level2->kids, embed, threshold);

  AttributeTree out;
  for (auto& root : roots) {
    AttributeTree::NodeId rid = out.find_child(AttributeTree::kSuperRoot, root->label);
    out.node(rid).source_count = root->count;
    for (auto& kid : root->kids) detail::rebuild(out, rid, *kid);
  }
  return out;
}

}  // namespace pgen
