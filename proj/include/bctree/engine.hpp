#pragma once

#include <algorithm>
#include <bit>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "bctree/actions.hpp"
#include "bctree/digest.hpp"
#include "bctree/ip.hpp"
#include "bctree/rules.hpp"

namespace bctree {

class EngineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class NodeStatus { Open, Fathomed, Expanded };

inline const char* to_string(NodeStatus s) {
  switch (s) {
    case NodeStatus::Open: return "open";
    case NodeStatus::Fathomed: return "fathomed";
    case NodeStatus::Expanded: return "expanded";
  }
  return "?";
}

enum class FathomReason { None, DepthLimit, PreAction, PostAction, NoChildren };

struct SearchNode {
  int id = 0;
  int parent = -1;  // -1 for the root
  int depth = 0;
  IpInstance subproblem;
  NodeStatus status = NodeStatus::Open;
  FathomReason fathom_reason = FathomReason::None;
  std::vector<CutOrBranch> actions_taken;  // parts of selected actions, in type order
  std::vector<int> children;               // ids, in creation (= structural) order

  // Caches; set at most once during a run, cleared on synthetic path copies.
  mutable std::optional<LpResult> lp;
  mutable std::optional<double> nscore_cache;
};

// Lazily solved, memoized LP relaxation of the node's subproblem.
inline const LpResult& node_lp(const SearchNode& n) {
  if (!n.lp) n.lp = solve_lp(relax(n.subproblem));
  return *n.lp;
}

struct Incumbent {
  double objective = 0.0;
  std::vector<long long> solution;
};

struct SearchTree {
  std::vector<SearchNode> nodes;  // arena; id == index, parents precede children
  int root = 0;
  std::optional<Incumbent> incumbent;
  bool truncated = false;

  struct Stats {
    long nodes_created = 0;
    long nodes_fathomed = 0;
    long iterations = 0;
  } stats;

  const SearchNode& node(int id) const {
    if (id < 0 || id >= static_cast<int>(nodes.size()))
      throw EngineError("SearchTree: unknown node id " + std::to_string(id));
    return nodes[static_cast<std::size_t>(id)];
  }

  long size() const { return static_cast<long>(nodes.size()); }
};

using NodePath = std::vector<const SearchNode*>;

// Root..node inclusive.
inline NodePath path_of(const SearchTree& tree, int id) {
  const SearchNode* n = &tree.node(id);
  NodePath path;
  while (true) {
    path.push_back(n);
    if (n->parent < 0) break;
    n = &tree.node(n->parent);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

// Tunable run parameters. mu has one entry per action type (d <= 2 in the
// branch-and-cut instantiation); rule ids are consumed by the hook factory.
struct ScoreParams {
  std::vector<double> mu{1.0};
  double lambda = 1.0;
  std::vector<std::pair<ScoreRuleId, ScoreRuleId>> ascore_pairs;
  std::pair<ScoreRuleId, ScoreRuleId> nscore_pair{{ScoreRule::BestBound}, {ScoreRule::DepthFirst}};
  int depth_limit = 1;

  void validate() const {
    for (double m : mu)
      if (!(m >= 0.0 && m <= 1.0)) throw std::invalid_argument("ScoreParams: mu outside [0,1]");
    if (!(lambda >= 0.0 && lambda <= 1.0))
      throw std::invalid_argument("ScoreParams: lambda outside [0,1]");
    if (depth_limit < 1) throw std::invalid_argument("ScoreParams: depth_limit < 1");
  }
};

// Exact convex combination. Endpoints and equal inputs reproduce the pure
// score bit-for-bit, which the endpoint-reduction and piecewise tests rely on.
inline double combine(double s1, double s2, double mu) {
  if (mu == 1.0 || s1 == s2) return s1;
  if (mu == 0.0) return s2;
  return mu * s1 + (1.0 - mu) * s2;
}

// The hook bundle instantiating the abstract search. All hooks except fathom
// receive only the root-to-node path; fathom sees (and may update the
// incumbent of) the whole tree.
struct EngineHooks {
  int num_action_types = 1;  // d
  long max_actions = 1;      // b: |actions_i| <= b enforced per call
  int max_children = 2;      // k: |children| <= k enforced per call

  std::vector<std::function<std::vector<ActionCandidate>(const NodePath&)>> actions;
  // Returns the (ascore_1, ascore_2) pair for a candidate of the given type.
  std::vector<std::function<std::pair<double, double>(const NodePath&, const ActionCandidate&)>>
      ascore;
  std::function<std::pair<double, double>(const NodePath&)> nscore;
  std::function<bool(SearchTree&, const SearchNode&, const std::vector<CutOrBranch>*)> fathom;
  std::function<std::vector<IpInstance>(const NodePath&, const std::vector<CutOrBranch>&)> children;
};

struct PathwiseStats {
  long checks = 0;
  long mismatches = 0;
  long score_checks = 0;
};

struct RunLimits {
  long node_cap = 1000000;
  // When set, every path-wise hook call is re-evaluated on a synthetic tree
  // holding only the path (LP caches cleared) and compared bit-for-bit.
  PathwiseStats* pathwise = nullptr;
};

namespace detail {

inline bool bits_equal(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

// Standalone copy of a path; hooks evaluated on it must reproduce the
// original values exactly (Def. of path-wise functions).
struct SyntheticPath {
  std::vector<SearchNode> storage;
  NodePath path;

  explicit SyntheticPath(const NodePath& orig) {
    storage.reserve(orig.size());
    for (std::size_t i = 0; i < orig.size(); ++i) {
      SearchNode n = *orig[i];
      n.id = static_cast<int>(i);
      n.parent = i == 0 ? -1 : static_cast<int>(i - 1);
      n.children.clear();
      if (i + 1 < orig.size()) n.children.push_back(static_cast<int>(i + 1));
      n.lp.reset();
      n.nscore_cache.reset();
      storage.push_back(std::move(n));
    }
    path.reserve(storage.size());
    for (const SearchNode& n : storage) path.push_back(&n);
  }
};

template <typename F>
auto checked_eval(const NodePath& path, PathwiseStats* pw, bool is_score, F&& f) {
  auto v1 = f(path);
  if (pw) {
    SyntheticPath syn(path);
    auto v2 = f(syn.path);
    ++pw->checks;
    if (is_score) ++pw->score_checks;
    bool equal;
    if constexpr (std::is_same_v<decltype(v1), std::pair<double, double>>) {
      equal = bits_equal(v1.first, v2.first) && bits_equal(v1.second, v2.second);
    } else {
      equal = (v1 == v2);
    }
    if (!equal) ++pw->mismatches;
  }
  return v1;
}

}  // namespace detail

// The Open leaf maximizing the combined node score; ties to the smallest id.
inline int select_leaf(const SearchTree& tree, const EngineHooks& hooks, const ScoreParams& params,
                       const std::vector<int>& open_ids, PathwiseStats* pw = nullptr) {
  int best_id = -1;
  double best_score = 0.0;
  for (int id : open_ids) {
    const SearchNode& n = tree.node(id);
    double score;
    if (n.nscore_cache && !pw) {
      score = *n.nscore_cache;
    } else {
      const NodePath path = path_of(tree, id);
      const auto pair =
          detail::checked_eval(path, pw, /*is_score=*/true,
                               [&](const NodePath& p) { return hooks.nscore(p); });
      score = combine(pair.first, pair.second, params.lambda);
      n.nscore_cache = score;
    }
    if (best_id < 0 || score > best_score) {
      best_id = id;
      best_score = score;
    }
  }
  if (best_id < 0) throw EngineError("select_leaf: no open leaf");
  return best_id;
}

inline int select_leaf(const SearchTree& tree, const EngineHooks& hooks,
                       const ScoreParams& params) {
  std::vector<int> open;
  for (const SearchNode& n : tree.nodes)
    if (n.status == NodeStatus::Open) open.push_back(n.id);
  return select_leaf(tree, hooks, params, open);
}

// Argmax of the combined action score over actions_i(path); ties to the
// earliest list position. Empty candidate set yields nullopt (caller fathoms).
inline std::optional<ActionCandidate> select_action(const SearchTree& tree, int node_id,
                                                    int type, const EngineHooks& hooks,
                                                    const ScoreParams& params,
                                                    PathwiseStats* pw = nullptr) {
  const NodePath path = path_of(tree, node_id);
  const auto candidates = detail::checked_eval(
      path, pw, /*is_score=*/false, [&](const NodePath& p) { return hooks.actions[type](p); });
  if (static_cast<long>(candidates.size()) > hooks.max_actions)
    throw EngineError("actions hook exceeded the b cap");
  if (candidates.empty()) return std::nullopt;
  int best = 0;
  double best_score = 0.0;
  for (int i = 0; i < static_cast<int>(candidates.size()); ++i) {
    const auto pair = detail::checked_eval(path, pw, /*is_score=*/true, [&](const NodePath& p) {
      return hooks.ascore[type](p, candidates[i]);
    });
    const double s = combine(pair.first, pair.second, params.mu[type]);
    if (i == 0 || s > best_score) {
      best = i;
      best_score = s;
    }
  }
  return candidates[best];
}

namespace detail {

inline SearchTree run_impl(const IpInstance& root, const EngineHooks& hooks,
                           const ScoreParams& params, const RunLimits& limits,
                           bool suppress_fathom) {
  params.validate();
  root.validate();
  if (hooks.num_action_types < 1 ||
      static_cast<int>(hooks.actions.size()) != hooks.num_action_types ||
      static_cast<int>(hooks.ascore.size()) != hooks.num_action_types)
    throw EngineError("run: hooks are inconsistent with num_action_types");
  if (static_cast<int>(params.mu.size()) != hooks.num_action_types)
    throw EngineError("run: mu dimension != number of action types");

  SearchTree tree;
  tree.nodes.push_back(SearchNode{});
  tree.nodes[0].subproblem = root;
  tree.stats.nodes_created = 1;

  std::vector<int> open{0};

  auto fathom_node = [&](int id, FathomReason reason) {
    SearchNode& n = tree.nodes[static_cast<std::size_t>(id)];
    n.status = NodeStatus::Fathomed;
    n.fathom_reason = reason;
    ++tree.stats.nodes_fathomed;
  };

  while (!open.empty()) {
    if (tree.stats.nodes_created > limits.node_cap) {
      tree.truncated = true;
      break;
    }
    ++tree.stats.iterations;

    const int id = select_leaf(tree, hooks, params, open, limits.pathwise);
    open.erase(std::lower_bound(open.begin(), open.end(), id));
    SearchNode& node = tree.nodes[static_cast<std::size_t>(id)];

    if (node.depth == params.depth_limit) {
      fathom_node(id, FathomReason::DepthLimit);
      continue;
    }
    if (!suppress_fathom && hooks.fathom(tree, node, nullptr)) {
      fathom_node(id, FathomReason::PreAction);
      continue;
    }

    std::vector<CutOrBranch> taken;
    for (int type = 0; type < hooks.num_action_types; ++type) {
      auto chosen = select_action(tree, id, type, hooks, params, limits.pathwise);
      if (chosen) {
        for (CutOrBranch& part : chosen->parts) taken.push_back(std::move(part));
      }
    }
    node.actions_taken = taken;

    if (!suppress_fathom && hooks.fathom(tree, node, &taken)) {
      fathom_node(id, FathomReason::PostAction);
      continue;
    }

    const NodePath path = path_of(tree, id);
    auto kids = detail::checked_eval(path, limits.pathwise, /*is_score=*/false,
                                     [&](const NodePath& p) { return hooks.children(p, taken); });
    if (static_cast<int>(kids.size()) > hooks.max_children)
      throw EngineError("children hook exceeded the k cap");
    if (kids.empty()) {
      fathom_node(id, FathomReason::NoChildren);
      continue;
    }

    node.status = NodeStatus::Expanded;
    const int parent_depth = node.depth;  // `node` dangles once the arena grows
    for (IpInstance& kid : kids) {
      SearchNode child;
      child.id = static_cast<int>(tree.nodes.size());
      child.parent = id;
      child.depth = parent_depth + 1;
      child.subproblem = std::move(kid);
      tree.nodes[static_cast<std::size_t>(id)].children.push_back(child.id);
      open.push_back(child.id);
      tree.nodes.push_back(std::move(child));
      ++tree.stats.nodes_created;
    }
  }
  return tree;
}

}  // namespace detail

// Tree search (the multi-action form; a single action type is the d=1 case).
inline SearchTree run(const IpInstance& root, const EngineHooks& hooks, const ScoreParams& params,
                      const RunLimits& limits = {}) {
  return detail::run_impl(root, hooks, params, limits, /*suppress_fathom=*/false);
}

// The fathoming-suppressed variant: nodes close only on the depth limit or an
// empty child list.
inline SearchTree run_suppressed(const IpInstance& root, const EngineHooks& hooks,
                                 const ScoreParams& params, const RunLimits& limits = {}) {
  return detail::run_impl(root, hooks, params, limits, /*suppress_fathom=*/true);
}

namespace detail {

inline void hash_action(DigestWriter& w, const CutOrBranch& a) {
  if (a.is_branch()) {
    const Disjunction& d = a.branch();
    w.write_u8(0);
    w.write_u64(d.pi.size());
    for (long long v : d.pi) w.write_i64(v);
    w.write_i64(d.pi0);
  } else {
    const Cut& c = a.cut();
    w.write_u8(1);
    w.write_u64(c.alpha.size());
    for (double v : c.alpha) w.write_double(v);
    w.write_double(c.beta);
  }
}

}  // namespace detail

// Stable digest of the tree's shape, per-node actions, statuses and child
// order. Nodes are visited in canonical DFS preorder so the digest does not
// depend on creation order (and hence not on the node-selection policy for
// trees that are structurally equal).
inline Digest canonical_hash(const SearchTree& tree) {
  DigestWriter w;
  w.write_str("bctree-tree-v1");
  w.write_u8(tree.truncated ? 1 : 0);
  std::vector<int> stack{tree.root};
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    const SearchNode& n = tree.node(id);
    w.write_u64(static_cast<std::uint64_t>(n.depth));
    w.write_u8(static_cast<std::uint8_t>(n.status));
    w.write_u64(n.actions_taken.size());
    for (const CutOrBranch& a : n.actions_taken) detail::hash_action(w, a);
    w.write_u64(n.children.size());
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back(*it);
  }
  return w.finish();
}

// Exact structural equality; the collision-free fallback for digest equality.
inline bool structural_equal(const SearchTree& a, const SearchTree& b) {
  if (a.truncated != b.truncated) return false;
  std::vector<std::pair<int, int>> stack{{a.root, b.root}};
  while (!stack.empty()) {
    auto [ia, ib] = stack.back();
    stack.pop_back();
    const SearchNode& na = a.node(ia);
    const SearchNode& nb = b.node(ib);
    if (na.depth != nb.depth || na.status != nb.status ||
        na.actions_taken != nb.actions_taken ||
        na.children.size() != nb.children.size() || na.subproblem != nb.subproblem)
      return false;
    for (std::size_t c = 0; c < na.children.size(); ++c)
      stack.push_back({na.children[c], nb.children[c]});
  }
  return true;
}

// Debug / golden-test dump: one JSON object per node per line, creation order.
inline std::string dump_tree_jsonl(const SearchTree& tree) {
  std::ostringstream os;
  for (const SearchNode& n : tree.nodes) {
    nlohmann::json j;
    j["id"] = n.id;
    if (n.parent >= 0) j["parent"] = n.parent;
    else j["parent"] = nullptr;
    j["depth"] = n.depth;
    j["status"] = to_string(n.status);
    nlohmann::json acts = nlohmann::json::array();
    for (const CutOrBranch& a : n.actions_taken) {
      if (a.is_branch()) {
        acts.push_back({{"type", "branch"}, {"pi", a.branch().pi}, {"pi0", a.branch().pi0}});
      } else {
        acts.push_back({{"type", "cut"}, {"alpha", a.cut().alpha}, {"beta", a.cut().beta}});
      }
    }
    j["actions"] = std::move(acts);
    if (n.lp && n.lp->status == LpStatus::Optimal) j["lp_obj"] = n.lp->objective;
    else j["lp_obj"] = nullptr;
    os << j.dump() << "\n";
  }
  return os.str();
}

}  // namespace bctree
