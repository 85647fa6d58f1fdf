#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "bctree/actions.hpp"
#include "bctree/engine.hpp"
#include "bctree/scoring.hpp"

namespace bctree {

enum class BranchMode { SingleVariable, MultiVariable, GeneralDisjunction };

inline const char* to_string(BranchMode m) {
  switch (m) {
    case BranchMode::SingleVariable: return "single";
    case BranchMode::MultiVariable: return "multi";
    case BranchMode::GeneralDisjunction: return "disj";
  }
  return "?";
}

struct BncConfig {
  BranchMode branch_mode = BranchMode::SingleVariable;
  std::vector<std::vector<int>> subsets;            // MultiVariable mode
  std::vector<std::vector<long long>> disjunctions; // GeneralDisjunction mode: pi vectors
  long long coeff_cap = 100;                        // |pi_j| <= C for generated disjunctions
  int cuts_per_node = 2;                            // 0, 1 or 2
  double cut_violation_tol = 1e-6;
  double incumbent_tol = 1e-6;
  double integrality_tol = 1e-6;
  std::vector<Cut> cut_pool;                        // root-valid cuts
  // Live incumbent feeds the directed-cutoff score. The lemma verifiers
  // disable this so every action score is strictly path-wise.
  bool incumbent_scoring = true;

  void validate(const IpInstance& root) const {
    if (cuts_per_node < 0 || cuts_per_node > 2)
      throw std::invalid_argument("BncConfig: cuts_per_node must be 0, 1 or 2");
    if (!(cut_violation_tol > 0.0) || !(incumbent_tol > 0.0) || !(integrality_tol > 0.0))
      throw std::invalid_argument("BncConfig: tolerances must be positive");
    if (branch_mode == BranchMode::MultiVariable) {
      for (const auto& s : subsets) {
        if (s.empty()) throw std::invalid_argument("BncConfig: empty subset");
        for (int j : s)
          if (j < 0 || j >= root.num_vars)
            throw std::invalid_argument("BncConfig: subset index out of range");
      }
    }
    if (branch_mode == BranchMode::GeneralDisjunction) {
      for (const auto& pi : disjunctions) {
        if (static_cast<int>(pi.size()) != root.num_vars)
          throw std::invalid_argument("BncConfig: disjunction dimension mismatch");
        Disjunction d{pi, 0};
        d.validate(coeff_cap);
      }
    }
    for (const Cut& c : cut_pool) {
      c.validate();
      if (static_cast<int>(c.alpha.size()) != root.num_vars)
        throw std::invalid_argument("BncConfig: cut dimension mismatch");
    }
  }
};

// Replaces the incumbent iff the candidate strictly improves it. The
// candidate is re-verified against the root instance; an infeasible candidate
// signals an internal bug.
inline bool update_incumbent(SearchTree& tree, std::span<const long long> solution,
                             double objective) {
  const IpInstance& root = tree.node(tree.root).subproblem;
  if (static_cast<int>(solution.size()) != root.num_vars)
    throw EngineError("update_incumbent: dimension mismatch");
  if (!satisfies(root, solution))
    throw EngineError("update_incumbent: candidate infeasible for the root instance");
  if (tree.incumbent && !(objective > tree.incumbent->objective)) return false;
  tree.incumbent = Incumbent{objective, std::vector<long long>(solution.begin(), solution.end())};
  return true;
}

namespace detail {

inline std::optional<Disjunction> branch_part(const std::vector<CutOrBranch>& actions) {
  for (const CutOrBranch& a : actions)
    if (a.is_branch()) return a.branch();
  return std::nullopt;
}

inline IpInstance with_cut_rows(const IpInstance& base, const std::vector<CutOrBranch>& actions) {
  IpInstance out = base;
  for (const CutOrBranch& a : actions) {
    if (!a.is_cut()) continue;
    const Cut& c = a.cut();
    out.constraints.push_back(LinearConstraint{c.alpha, Sense::Le, c.beta, RowOrigin::Cut});
  }
  return out;
}

inline double fractional_part_distance(double v) {
  const double f = v - std::floor(v);
  return std::min(f, 1.0 - f);
}

}  // namespace detail

// Hook bundle plus the shared handle that feeds the directed-cutoff score.
// Build one per run.
struct BncHooks {
  EngineHooks hooks;
  std::shared_ptr<std::optional<std::vector<double>>> scoring_incumbent;
};

// actions_1: branching candidates at a node with a fractional optimal LP.
inline std::vector<ActionCandidate> branch_actions(const NodePath& path, const BncConfig& config) {
  const SearchNode& node = *path.back();
  const LpResult& lp = node_lp(node);
  std::vector<ActionCandidate> out;
  if (lp.status != LpStatus::Optimal) return out;
  const std::vector<double>& x = lp.solution;
  const double tol = config.integrality_tol;

  switch (config.branch_mode) {
    case BranchMode::SingleVariable: {
      for (int j = 0; j < node.subproblem.num_vars; ++j) {
        if (!node.subproblem.integral[j]) continue;
        if (std::fabs(x[j] - std::round(x[j])) <= tol) continue;
        Disjunction d;
        d.pi.assign(node.subproblem.num_vars, 0);
        d.pi[j] = 1;
        d.pi0 = static_cast<long long>(std::floor(x[j]));
        out.push_back(ActionCandidate{{make_branch(std::move(d))}});
      }
      break;
    }
    case BranchMode::MultiVariable: {
      for (const std::vector<int>& s : config.subsets) {
        double sum = 0.0;
        for (int j : s) sum += x[j];
        if (std::fabs(sum - std::round(sum)) <= tol) continue;  // the paper's S condition
        Disjunction d;
        d.pi.assign(node.subproblem.num_vars, 0);
        for (int j : s) d.pi[j] = 1;
        d.pi0 = static_cast<long long>(std::floor(sum));
        out.push_back(ActionCandidate{{make_branch(std::move(d))}});
      }
      break;
    }
    case BranchMode::GeneralDisjunction: {
      for (const std::vector<long long>& pi : config.disjunctions) {
        double v = 0.0;
        for (int j = 0; j < node.subproblem.num_vars; ++j)
          v += static_cast<double>(pi[j]) * x[j];
        if (std::fabs(v - std::round(v)) <= tol) continue;
        Disjunction d{pi, static_cast<long long>(std::floor(v))};
        d.validate(config.coeff_cap);
        out.push_back(ActionCandidate{{make_branch(std::move(d))}});
      }
      break;
    }
  }
  return out;
}

// actions_2: violated pool cuts at the node's LP optimum. With the
// two-cuts-per-node protocol the candidates are ordered pairs (pool-lex
// order); the pair score is the sum of the member scores, so the selected
// pair is the two top-scoring violated cuts.
inline std::vector<ActionCandidate> cut_actions(const NodePath& path, const BncConfig& config) {
  std::vector<ActionCandidate> out;
  if (config.cuts_per_node == 0 || config.cut_pool.empty()) return out;
  const SearchNode& node = *path.back();
  const LpResult& lp = node_lp(node);
  if (lp.status != LpStatus::Optimal) return out;
  const std::vector<double>& x = lp.solution;

  std::vector<int> violated;
  for (int i = 0; i < static_cast<int>(config.cut_pool.size()); ++i) {
    const Cut& c = config.cut_pool[i];
    if (detail::dot(c.alpha, x) > c.beta + config.cut_violation_tol) violated.push_back(i);
  }
  if (violated.empty()) return out;

  if (config.cuts_per_node >= 2 && violated.size() >= 2) {
    for (std::size_t a = 0; a < violated.size(); ++a)
      for (std::size_t b = a + 1; b < violated.size(); ++b)
        out.push_back(ActionCandidate{
            {make_cut(config.cut_pool[violated[a]]), make_cut(config.cut_pool[violated[b]])}});
  } else {
    for (int i : violated) out.push_back(ActionCandidate{{make_cut(config.cut_pool[i])}});
  }
  return out;
}

// fathom: infeasible, integral (updating the incumbent first), or dominated
// by the incumbent bound. With actions present, the node's LP is re-solved
// once with all cut rows appended.
inline bool bnc_fathom(SearchTree& tree, const SearchNode& node,
                       const std::vector<CutOrBranch>* actions, const BncConfig& config,
                       const std::shared_ptr<std::optional<std::vector<double>>>& scoring_inc) {
  bool has_cuts = false;
  if (actions)
    for (const CutOrBranch& a : *actions)
      if (a.is_cut()) has_cuts = true;

  LpResult local;
  const LpResult* lp = nullptr;
  if (has_cuts) {
    local = solve_lp(relax(detail::with_cut_rows(node.subproblem, *actions)));
    lp = &local;
  } else {
    lp = &node_lp(node);
  }

  if (lp->status == LpStatus::Infeasible) return true;
  if (lp->status != LpStatus::Optimal)
    throw EngineError("bnc_fathom: unexpected LP status");

  if (is_integral(lp->solution, node.subproblem.integral, config.integrality_tol)) {
    const IpInstance& root = tree.node(tree.root).subproblem;
    std::vector<long long> cand(root.num_vars);
    for (int j = 0; j < root.num_vars; ++j) cand[j] = std::llround(lp->solution[j]);
    double obj = 0.0;
    for (int j = 0; j < root.num_vars; ++j)
      obj += root.objective[j] * static_cast<double>(cand[j]);
    if (update_incumbent(tree, cand, obj) && config.incumbent_scoring && scoring_inc) {
      std::vector<double> xbar(cand.size());
      for (std::size_t j = 0; j < cand.size(); ++j) xbar[j] = static_cast<double>(cand[j]);
      *scoring_inc = std::move(xbar);
    }
    return true;
  }

  if (tree.incumbent && lp->objective <= tree.incumbent->objective + config.incumbent_tol)
    return true;
  return false;
}

// children: the two subproblems from the branch, each carrying the cut rows.
// Down child first. No branch action means no children (the engine fathoms).
inline std::vector<IpInstance> bnc_children(const NodePath& path,
                                            const std::vector<CutOrBranch>& actions) {
  const auto branch = detail::branch_part(actions);
  if (!branch) return {};
  const IpInstance base = detail::with_cut_rows(path.back()->subproblem, actions);
  std::vector<IpInstance> kids;
  kids.push_back(apply_branch(base, *branch, BranchSide::Down));
  kids.push_back(apply_branch(base, *branch, BranchSide::Up));
  return kids;
}

namespace detail {

inline double branch_rule_score(const NodePath& path, const Disjunction& d,
                                const ScoreRuleId& rule, std::optional<SbDeltas>& sb) {
  switch (rule.rule) {
    case ScoreRule::SBLinear:
      if (!sb) sb = strong_branch_deltas(path, d);
      return sb_linear(*sb, rule.rho);
    case ScoreRule::SBProduct:
      if (!sb) sb = strong_branch_deltas(path, d);
      return sb_product(*sb);
    case ScoreRule::MostFractional:
      return most_fractional(path, d);
    default:
      throw std::invalid_argument("branch score: rule '" + to_string(rule) +
                                  "' is not a branching rule");
  }
}

inline double cut_rule_score(const NodePath& path, const Cut& c, const ScoreRuleId& rule,
                             const std::optional<std::vector<double>>& incumbent) {
  const SearchNode& node = *path.back();
  const LpResult& lp = node_lp(node);
  switch (rule.rule) {
    case ScoreRule::Efficacy:
      return efficacy(c, lp.solution);
    case ScoreRule::Parallelism:
      return parallelism(c, node.subproblem.objective);
    case ScoreRule::DirectedCutoff:
      return directed_cutoff(c, lp.solution, incumbent);
    default:
      throw std::invalid_argument("cut score: rule '" + to_string(rule) +
                                  "' is not a cut rule");
  }
}

inline double node_rule_score(const NodePath& path, const ScoreRuleId& rule, int depth_limit) {
  switch (rule.rule) {
    case ScoreRule::BestBound:
      return best_bound_nscore(path);
    case ScoreRule::DepthFirst:
      return depth_nscore(path, depth_limit);
    default:
      throw std::invalid_argument("node score: rule '" + to_string(rule) +
                                  "' is not a node-selection rule");
  }
}

}  // namespace detail

// Number of action types the configuration produces: branching always, cut
// selection only when the protocol adds cuts.
inline int bnc_action_types(const BncConfig& config) {
  return (config.cuts_per_node > 0 && !config.cut_pool.empty()) ? 2 : 1;
}

// Uniform cap b on |actions_i| for the configuration on this instance.
inline long bnc_action_cap(const IpInstance& root, const BncConfig& config) {
  long branch_b = 0;
  switch (config.branch_mode) {
    case BranchMode::SingleVariable: branch_b = root.num_vars; break;
    case BranchMode::MultiVariable: branch_b = static_cast<long>(config.subsets.size()); break;
    case BranchMode::GeneralDisjunction:
      branch_b = static_cast<long>(config.disjunctions.size());
      break;
  }
  long cut_b = 0;
  if (bnc_action_types(config) == 2) {
    const long p = static_cast<long>(config.cut_pool.size());
    cut_b = config.cuts_per_node >= 2 ? std::max(p * (p - 1) / 2, 1L) : p;
  }
  return std::max({branch_b, cut_b, 1L});
}

inline BncHooks make_bnc_hooks(const IpInstance& root, const BncConfig& config,
                               const ScoreParams& params) {
  root.validate();
  if (!root.all_integral())
    throw std::invalid_argument("make_bnc_hooks: requires a fully integral instance");
  config.validate(root);
  const int d = bnc_action_types(config);
  if (static_cast<int>(params.mu.size()) != d)
    throw std::invalid_argument("make_bnc_hooks: mu size must equal the number of action types");
  if (static_cast<int>(params.ascore_pairs.size()) != d)
    throw std::invalid_argument("make_bnc_hooks: need one ascore pair per action type");
  if (!is_branch_rule(params.ascore_pairs[0].first.rule) ||
      !is_branch_rule(params.ascore_pairs[0].second.rule))
    throw std::invalid_argument("make_bnc_hooks: type-1 scores must be branching rules");
  if (d == 2 && (!is_cut_rule(params.ascore_pairs[1].first.rule) ||
                 !is_cut_rule(params.ascore_pairs[1].second.rule)))
    throw std::invalid_argument("make_bnc_hooks: type-2 scores must be cut rules");
  if (!is_node_rule(params.nscore_pair.first.rule) || !is_node_rule(params.nscore_pair.second.rule))
    throw std::invalid_argument("make_bnc_hooks: nscore pair must be node-selection rules");

  BncHooks out;
  out.scoring_incumbent = std::make_shared<std::optional<std::vector<double>>>();
  auto inc = out.scoring_incumbent;

  EngineHooks& h = out.hooks;
  h.num_action_types = d;
  h.max_actions = bnc_action_cap(root, config);
  h.max_children = 2;

  h.actions.push_back([config](const NodePath& p) { return branch_actions(p, config); });
  const auto branch_pair = params.ascore_pairs[0];
  h.ascore.push_back([branch_pair](const NodePath& p, const ActionCandidate& a) {
    if (a.parts.size() != 1 || !a.parts[0].is_branch())
      throw EngineError("branch ascore: malformed candidate");
    std::optional<SbDeltas> sb;
    const Disjunction& dj = a.parts[0].branch();
    const double s1 = detail::branch_rule_score(p, dj, branch_pair.first, sb);
    const double s2 = detail::branch_rule_score(p, dj, branch_pair.second, sb);
    return std::make_pair(s1, s2);
  });

  if (d == 2) {
    h.actions.push_back([config](const NodePath& p) { return cut_actions(p, config); });
    const auto cut_pair = params.ascore_pairs[1];
    const bool live = config.incumbent_scoring;
    h.ascore.push_back([cut_pair, inc, live](const NodePath& p, const ActionCandidate& a) {
      static const std::optional<std::vector<double>> kNoIncumbent;
      const auto& xbar = live ? *inc : kNoIncumbent;
      double s1 = 0.0, s2 = 0.0;
      for (const CutOrBranch& part : a.parts) {
        if (!part.is_cut()) throw EngineError("cut ascore: malformed candidate");
        s1 += detail::cut_rule_score(p, part.cut(), cut_pair.first, xbar);
        s2 += detail::cut_rule_score(p, part.cut(), cut_pair.second, xbar);
      }
      return std::make_pair(s1, s2);
    });
  }

  const auto npair = params.nscore_pair;
  const int depth_limit = params.depth_limit;
  h.nscore = [npair, depth_limit](const NodePath& p) {
    return std::make_pair(detail::node_rule_score(p, npair.first, depth_limit),
                          detail::node_rule_score(p, npair.second, depth_limit));
  };

  h.fathom = [config, inc](SearchTree& t, const SearchNode& n,
                           const std::vector<CutOrBranch>* acts) {
    return bnc_fathom(t, n, acts, config, inc);
  };

  h.children = [](const NodePath& p, const std::vector<CutOrBranch>& acts) {
    return bnc_children(p, acts);
  };

  return out;
}

enum class BncStatus { Solved, Incomplete, Truncated };

inline const char* to_string(BncStatus s) {
  switch (s) {
    case BncStatus::Solved: return "solved";
    case BncStatus::Incomplete: return "incomplete";
    case BncStatus::Truncated: return "truncated";
  }
  return "?";
}

struct BncSolveResult {
  BncStatus status = BncStatus::Solved;
  std::optional<Incumbent> incumbent;  // absent on a Solved run means infeasible
  SearchTree tree;
};

// Full branch-and-cut solve. Correctness claims apply to Solved runs: a node
// closed by the depth limit or by a missing branch action leaves the search
// Incomplete.
inline BncSolveResult bnc_solve(const IpInstance& root, const BncConfig& config,
                                const ScoreParams& params, const RunLimits& limits = {}) {
  BncHooks hooks = make_bnc_hooks(root, config, params);
  BncSolveResult res;
  res.tree = run(root, hooks.hooks, params, limits);
  res.incumbent = res.tree.incumbent;
  if (res.tree.truncated) {
    res.status = BncStatus::Truncated;
  } else {
    res.status = BncStatus::Solved;
    for (const SearchNode& n : res.tree.nodes) {
      if (n.fathom_reason == FathomReason::DepthLimit ||
          n.fathom_reason == FathomReason::NoChildren) {
        res.status = BncStatus::Incomplete;
        break;
      }
    }
  }
  return res;
}

}  // namespace bctree
