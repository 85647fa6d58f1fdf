#include "bctree/bnc.hpp"

#include <gtest/gtest.h>

#include <random>

#include "bctree/experiments.hpp"
#include "bctree/knapsack.hpp"

namespace bctree {
namespace {

IpInstance jeroslow_ip(int n) { return jeroslow_instance(n); }

IpInstance binary_ip(std::vector<double> obj, std::vector<LinearConstraint> rows) {
  IpInstance ip;
  ip.num_vars = static_cast<int>(obj.size());
  ip.objective = std::move(obj);
  ip.var_upper.assign(ip.num_vars, 1);
  ip.integral.assign(ip.num_vars, 1);
  ip.constraints = std::move(rows);
  return ip;
}

SearchTree tree_of(IpInstance ip) {
  SearchTree t;
  t.nodes.resize(1);
  t.nodes[0].subproblem = std::move(ip);
  return t;
}

BncConfig plain_config() {
  BncConfig c;
  c.cuts_per_node = 0;
  return c;
}

TEST(BncFathom, InfeasibleLp) {
  SearchTree t = tree_of(binary_ip({1.0}, {{{1.0}, Sense::Ge, 2.0, RowOrigin::Original}}));
  EXPECT_TRUE(bnc_fathom(t, t.node(0), nullptr, plain_config(), nullptr));
  EXPECT_FALSE(t.incumbent.has_value());
}

TEST(BncFathom, IntegralLpSetsIncumbent) {
  // max 3x1 + 4x2, x <= (1,1): LP optimum is integral at (1,1) with value 7.
  SearchTree t = tree_of(binary_ip({3.0, 4.0}, {}));
  EXPECT_TRUE(bnc_fathom(t, t.node(0), nullptr, plain_config(), nullptr));
  ASSERT_TRUE(t.incumbent.has_value());
  EXPECT_EQ(t.incumbent->objective, 7.0);
  EXPECT_EQ(t.incumbent->solution, (std::vector<long long>{1, 1}));
}

TEST(BncFathom, BoundDominatedByIncumbent) {
  // Fractional LP with objective 4.2 against an incumbent of 5.
  SearchTree t = tree_of(
      binary_ip({2.1, 2.1}, {{{1.0, 1.0}, Sense::Le, 2.0, RowOrigin::Original},
                             {{2.0, -2.0}, Sense::Eq, 1.0, RowOrigin::Original}}));
  t.incumbent = Incumbent{5.0, {0, 0}};
  EXPECT_TRUE(bnc_fathom(t, t.node(0), nullptr, plain_config(), nullptr));
  EXPECT_EQ(t.incumbent->objective, 5.0);
}

TEST(BncFathom, FractionalUndominatedIsNotFathomed) {
  SearchTree t = tree_of(jeroslow_ip(5));
  EXPECT_FALSE(bnc_fathom(t, t.node(0), nullptr, plain_config(), nullptr));
}

TEST(BncFathom, CutsAppendedBeforeResolve) {
  // max x1+x2 s.t. x1+x2 <= 1.5: LP fractional. The cut x1+x2 <= 1 makes the
  // re-solved LP integral, so the node fathoms and the incumbent appears.
  SearchTree t = tree_of(
      binary_ip({1.0, 1.0}, {{{1.0, 1.0}, Sense::Le, 1.5, RowOrigin::Original}}));
  BncConfig config = plain_config();
  EXPECT_FALSE(bnc_fathom(t, t.node(0), nullptr, config, nullptr));
  std::vector<CutOrBranch> acts{make_cut(Cut{{1.0, 1.0}, 1.0})};
  EXPECT_TRUE(bnc_fathom(t, t.node(0), &acts, config, nullptr));
  ASSERT_TRUE(t.incumbent.has_value());
  EXPECT_EQ(t.incumbent->objective, 1.0);
}

TEST(BncChildren, FloorCeilOfFractionalValue) {
  SearchTree t = tree_of(jeroslow_ip(3));
  const NodePath p = path_of(t, 0);
  Disjunction d;
  d.pi = {1, 0, 0};
  d.pi0 = 0;  // floor(0.4)
  const auto kids = bnc_children(p, {make_branch(d)});
  ASSERT_EQ(kids.size(), 2u);
  const LinearConstraint& down = kids[0].constraints.back();
  const LinearConstraint& up = kids[1].constraints.back();
  EXPECT_EQ(down.sense, Sense::Le);
  EXPECT_EQ(down.rhs, 0.0);
  EXPECT_EQ(up.sense, Sense::Ge);
  EXPECT_EQ(up.rhs, 1.0);
}

TEST(BncChildren, CutRowsCarriedByBothChildren) {
  SearchTree t = tree_of(jeroslow_ip(3));
  const NodePath p = path_of(t, 0);
  Disjunction d;
  d.pi = {1, 1, 1};
  d.pi0 = 1;
  const std::vector<CutOrBranch> acts{make_branch(d), make_cut(Cut{{1.0, 0.0, 0.0}, 0.0}),
                                      make_cut(Cut{{0.0, 1.0, 0.0}, 0.0})};
  const auto kids = bnc_children(p, acts);
  ASSERT_EQ(kids.size(), 2u);
  for (const IpInstance& kid : kids) {
    ASSERT_EQ(kid.constraints.size(), 4u);  // original + 2 cuts + branch
    EXPECT_EQ(kid.constraints[1].origin, RowOrigin::Cut);
    EXPECT_EQ(kid.constraints[2].origin, RowOrigin::Cut);
    EXPECT_EQ(kid.constraints[3].origin, RowOrigin::Branch);
  }
}

TEST(BncChildren, NoBranchMeansNoChildren) {
  SearchTree t = tree_of(jeroslow_ip(3));
  EXPECT_TRUE(bnc_children(path_of(t, 0), {make_cut(Cut{{1.0, 0.0, 0.0}, 0.0})}).empty());
  EXPECT_TRUE(bnc_children(path_of(t, 0), {}).empty());
}

TEST(BranchActions, SingleVariablePicksFractionalVarsInIndexOrder) {
  // LP optimum x* = (0.5, 1, 0): only variable 0 is fractional.
  SearchTree t = tree_of(binary_ip(
      {2.0, 1.0, -1.0}, {{{2.0, 0.0, 0.0}, Sense::Eq, 1.0, RowOrigin::Original}}));
  const auto acts = branch_actions(path_of(t, 0), plain_config());
  ASSERT_EQ(acts.size(), 1u);
  const Disjunction& d = acts[0].parts[0].branch();
  EXPECT_EQ(d.pi, (std::vector<long long>{1, 0, 0}));
  EXPECT_EQ(d.pi0, 0);
}

TEST(BranchActions, MultiVariableFullSetOnJeroslow) {
  BncConfig config = plain_config();
  config.branch_mode = BranchMode::MultiVariable;
  config.subsets = {{0, 1, 2, 3, 4}};
  SearchTree t = tree_of(jeroslow_ip(5));
  const auto acts = branch_actions(path_of(t, 0), config);
  ASSERT_EQ(acts.size(), 1u);  // sum x* = 2.5 is fractional
  EXPECT_EQ(acts[0].parts[0].branch().pi0, 2);
}

TEST(BranchActions, IntegralPartialSumFilteredOut) {
  // x* = (0.5, 0.5, ...): the pair subset {0,1} sums to 1 and is filtered.
  BncConfig config = plain_config();
  config.branch_mode = BranchMode::MultiVariable;
  SearchTree t = tree_of(jeroslow_ip(5));
  const LpResult& lp = node_lp(t.node(0));
  // build a subset with an integral sum from the actual vertex
  std::vector<int> ones, zeros;
  for (int j = 0; j < 5; ++j) {
    if (std::fabs(lp.solution[j] - 1.0) < 1e-9) ones.push_back(j);
    if (std::fabs(lp.solution[j]) < 1e-9) zeros.push_back(j);
  }
  ASSERT_GE(ones.size(), 1u);
  ASSERT_GE(zeros.size(), 1u);
  config.subsets = {{ones[0], zeros[0]}, {0, 1, 2, 3, 4}};
  const auto acts = branch_actions(path_of(t, 0), config);
  ASSERT_EQ(acts.size(), 1u);  // only the full set survives
  EXPECT_EQ(acts[0].parts[0].branch().pi0, 2);
}

TEST(CutActions, EmptyWhenNothingViolated) {
  BncConfig config;
  config.cuts_per_node = 2;
  config.cut_pool = {Cut{{1.0, 0.0, 0.0}, 1.0}};  // x1 <= 1 never violated
  SearchTree t = tree_of(jeroslow_ip(3));
  EXPECT_TRUE(cut_actions(path_of(t, 0), config).empty());
}

TEST(CutActions, SingleViolatedGivesSingletonAction) {
  // x* has sum 1.5; the cut sum x <= 1 is violated and alone in the pool.
  BncConfig config;
  config.cuts_per_node = 2;
  config.cut_pool = {Cut{{1.0, 1.0, 1.0}, 1.0}};
  SearchTree t = tree_of(jeroslow_ip(3));
  const auto acts = cut_actions(path_of(t, 0), config);
  ASSERT_EQ(acts.size(), 1u);
  EXPECT_EQ(acts[0].parts.size(), 1u);
}

TEST(CutActions, ThreeViolatedGiveThreePairs) {
  BncConfig config;
  config.cuts_per_node = 2;
  config.cut_pool = {Cut{{1.0, 1.0, 1.0}, 1.0}, Cut{{2.0, 2.0, 2.0}, 2.0},
                     Cut{{1.0, 1.0, 1.0}, 0.5}};
  SearchTree t = tree_of(jeroslow_ip(3));
  const auto acts = cut_actions(path_of(t, 0), config);
  ASSERT_EQ(acts.size(), 3u);  // C(3,2) pairs in lex pool order
  EXPECT_EQ(acts[0].parts[0].cut(), config.cut_pool[0]);
  EXPECT_EQ(acts[0].parts[1].cut(), config.cut_pool[1]);
  EXPECT_EQ(acts[1].parts[1].cut(), config.cut_pool[2]);
  EXPECT_EQ(acts[2].parts[0].cut(), config.cut_pool[1]);
}

TEST(CutActions, PairSelectionPicksTopTwoScores) {
  // With mu=1 and efficacy-vs-efficacy, the engine must pick the pair of the
  // two deepest cuts.
  KnapsackSpec spec;
  spec.num_items = 6;
  spec.num_knapsacks = 2;
  spec.seed = 0;  // nine violated pool cuts at the root vertex
  const KnapsackInstance inst = generate_knapsack(spec);
  RunProtocol proto;
  proto.cut_pair = {{ScoreRule::Efficacy}, {ScoreRule::Efficacy}};
  proto.mu_cut = 1.0;
  BncSetup setup = make_knapsack_setup(inst, proto);
  ASSERT_GE(setup.config.cut_pool.size(), 3u);
  BncHooks hooks = make_bnc_hooks(inst.ip, setup.config, setup.params);
  SearchTree t = tree_of(inst.ip);
  const NodePath p = path_of(t, 0);
  const auto cands = hooks.hooks.actions[1](p);
  ASSERT_GE(cands.size(), 2u);
  const auto chosen = select_action(t, 0, 1, hooks.hooks, setup.params);
  ASSERT_TRUE(chosen.has_value());
  // brute argmax over pair sums
  double best = -1e300;
  ActionCandidate best_cand;
  for (const auto& c : cands) {
    const auto s = hooks.hooks.ascore[1](p, c);
    if (s.first > best) {
      best = s.first;
      best_cand = c;
    }
  }
  EXPECT_EQ(*chosen, best_cand);
}

TEST(UpdateIncumbent, StrictImprovementRule) {
  SearchTree t = tree_of(binary_ip({2.0, 3.0}, {}));
  EXPECT_TRUE(update_incumbent(t, std::vector<long long>{1, 1}, 5.0));
  EXPECT_EQ(t.incumbent->objective, 5.0);
  EXPECT_FALSE(update_incumbent(t, std::vector<long long>{0, 1}, 4.0));  // no change
  EXPECT_EQ(t.incumbent->objective, 5.0);
  EXPECT_FALSE(update_incumbent(t, std::vector<long long>{1, 1}, 5.0));  // ties ignored
  t.nodes[0].subproblem.objective = {2.5, 3.0};
  EXPECT_TRUE(update_incumbent(t, std::vector<long long>{1, 1}, 5.5));
  EXPECT_EQ(t.incumbent->objective, 5.5);
}

TEST(UpdateIncumbent, InfeasibleCandidateIsInternalError) {
  SearchTree t = tree_of(
      binary_ip({1.0, 1.0}, {{{1.0, 1.0}, Sense::Le, 1.0, RowOrigin::Original}}));
  EXPECT_THROW(update_incumbent(t, std::vector<long long>{1, 1}, 2.0), EngineError);
}

TEST(BncSolve, JeroslowIsInfeasibleAndSolved) {
  RunProtocol proto;
  proto.cuts_per_node = 0;
  const BncSetup s = make_bnc_setup(jeroslow_ip(5), {}, proto);
  const BncSolveResult r = bnc_solve(jeroslow_ip(5), s.config, s.params, s.limits);
  EXPECT_EQ(r.status, BncStatus::Solved);
  EXPECT_FALSE(r.incumbent.has_value());
}

TEST(BncSolve, MissingBranchActionFlagsIncomplete) {
  // Multivariable mode with one subset that immediately becomes integral-sum.
  SearchTree probe = tree_of(jeroslow_ip(5));
  const LpResult& lp = node_lp(probe.node(0));
  std::vector<int> ones, zeros;
  for (int j = 0; j < 5; ++j) {
    if (std::fabs(lp.solution[j] - 1.0) < 1e-9) ones.push_back(j);
    if (std::fabs(lp.solution[j]) < 1e-9) zeros.push_back(j);
  }
  RunProtocol proto;
  proto.cuts_per_node = 0;
  proto.branch_mode = BranchMode::MultiVariable;
  proto.subsets = {{ones[0], zeros[0]}};  // integral partial sum at the root
  const BncSetup s = make_bnc_setup(jeroslow_ip(5), {}, proto);
  const BncSolveResult r = bnc_solve(jeroslow_ip(5), s.config, s.params, s.limits);
  EXPECT_EQ(r.status, BncStatus::Incomplete);
}

struct OracleCase {
  KnapsackSpec spec;
  RunProtocol proto;
};

// B&C equals brute force on random knapsacks across branch modes, cut counts
// and parameters; every run here must come out Solved.
TEST(BncSolve, OracleEquivalenceProperty) {
  std::mt19937_64 gen(314159);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int solved = 0;
  for (int t = 0; t < 40; ++t) {
    KnapsackSpec spec;
    spec.num_items = 3 + static_cast<int>(gen() % 4);  // 3..6 items
    spec.num_knapsacks = 1 + static_cast<int>(gen() % 2);
    spec.seed = gen();
    const KnapsackInstance inst = generate_knapsack(spec);
    const IpSolveResult truth = brute_force_ip(inst.ip);

    for (int mode = 0; mode < 3; ++mode) {
      RunProtocol proto;
      proto.mu_branch = unit(gen);
      proto.mu_cut = unit(gen);
      proto.lambda = unit(gen);
      proto.branch_pair = {{ScoreRule::SBLinear, 0.5}, {ScoreRule::MostFractional}};
      proto.cut_pair = cut_pair_of(static_cast<ScorePairKind>(gen() % 3));
      if (mode == 0) {
        proto.cuts_per_node = 2;
      } else if (mode == 1) {
        proto.cuts_per_node = 0;
      } else {
        proto.cuts_per_node = 1;
        proto.branch_mode = BranchMode::MultiVariable;
        proto.subsets.clear();
        for (int j = 0; j < inst.ip.num_vars; ++j) proto.subsets.push_back({j});
        std::vector<int> all(inst.ip.num_vars);
        for (int j = 0; j < inst.ip.num_vars; ++j) all[j] = j;
        proto.subsets.push_back(all);
      }
      const BncSetup s = make_knapsack_setup(inst, proto);
      const BncSolveResult r = bnc_solve(inst.ip, s.config, s.params, s.limits);
      if (r.status != BncStatus::Solved) continue;
      ++solved;
      if (truth.status == LpStatus::Infeasible) {
        EXPECT_FALSE(r.incumbent.has_value());
      } else {
        ASSERT_TRUE(r.incumbent.has_value()) << "seed " << spec.seed;
        EXPECT_NEAR(r.incumbent->objective, truth.objective, 1e-6) << "seed " << spec.seed;
      }
    }
  }
  EXPECT_GT(solved, 100);
}

// Every cut that ever entered a subproblem is satisfied by every integral
// feasible point of the root instance.
TEST(BncSolve, CutSafetyByEnumeration) {
  std::mt19937_64 gen(6);
  for (int t = 0; t < 10; ++t) {
    KnapsackSpec spec;
    spec.num_items = 5;
    spec.num_knapsacks = 2;
    spec.seed = gen();
    const KnapsackInstance inst = generate_knapsack(spec);
    RunProtocol proto;
    proto.mu_cut = 0.3;
    const BncSetup s = make_knapsack_setup(inst, proto);
    const BncSolveResult r = bnc_solve(inst.ip, s.config, s.params, s.limits);

    std::vector<Cut> added;
    for (const SearchNode& n : r.tree.nodes)
      for (const CutOrBranch& a : n.actions_taken)
        if (a.is_cut()) added.push_back(a.cut());

    std::vector<long long> x(inst.ip.num_vars, 0);
    while (true) {
      if (satisfies(inst.ip, x)) {
        for (const Cut& c : added) {
          double lhs = 0.0;
          for (int j = 0; j < inst.ip.num_vars; ++j)
            lhs += c.alpha[j] * static_cast<double>(x[j]);
          EXPECT_LE(lhs, c.beta + 1e-9);
        }
      }
      int j = 0;
      while (j < inst.ip.num_vars && x[j] == 1) x[j++] = 0;
      if (j == inst.ip.num_vars) break;
      x[j] = 1;
    }
  }
}

TEST(BncSolve, IncumbentMatchesTreeOptimumWithDirectedCutoff) {
  // Exercise the live-incumbent directed-cutoff path end to end.
  KnapsackSpec spec;
  spec.num_items = 6;
  spec.num_knapsacks = 2;
  spec.seed = 99;
  const KnapsackInstance inst = generate_knapsack(spec);
  RunProtocol proto;
  proto.cut_pair = cut_pair_of(ScorePairKind::ED);
  proto.mu_cut = 0.4;
  const BncSetup s = make_knapsack_setup(inst, proto);
  const BncSolveResult r = bnc_solve(inst.ip, s.config, s.params, s.limits);
  ASSERT_EQ(r.status, BncStatus::Solved);
  const IpSolveResult truth = brute_force_ip(inst.ip);
  ASSERT_TRUE(r.incumbent.has_value());
  EXPECT_NEAR(r.incumbent->objective, truth.objective, 1e-6);
}

TEST(MakeBncHooks, RejectsMismatchedRuleKinds) {
  const IpInstance ip = jeroslow_ip(3);
  BncConfig config = plain_config();
  ScoreParams params;
  params.depth_limit = 5;
  params.ascore_pairs = {{{ScoreRule::Efficacy}, {ScoreRule::Parallelism}}};  // cut rules
  params.mu = {0.5};
  EXPECT_THROW(make_bnc_hooks(ip, config, params), std::invalid_argument);
  params.ascore_pairs = {{{ScoreRule::MostFractional}, {ScoreRule::MostFractional}}};
  params.nscore_pair = {{ScoreRule::Efficacy}, {ScoreRule::DepthFirst}};
  EXPECT_THROW(make_bnc_hooks(ip, config, params), std::invalid_argument);
}

TEST(MakeBncHooks, RejectsMixedIntegrality) {
  IpInstance ip = jeroslow_ip(3);
  ip.integral[1] = 0;
  BncConfig config = plain_config();
  ScoreParams params;
  params.depth_limit = 5;
  params.ascore_pairs = {{{ScoreRule::MostFractional}, {ScoreRule::MostFractional}}};
  EXPECT_THROW(make_bnc_hooks(ip, config, params), std::invalid_argument);
}

}  // namespace
}  // namespace bctree
