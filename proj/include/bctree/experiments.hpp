#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bctree/bnc.hpp"
#include "bctree/engine.hpp"
#include "bctree/knapsack.hpp"
#include "bctree/rng.hpp"
#include "bctree/worker.hpp"

namespace bctree {

using BigInt = boost::multiprecision::cpp_int;

// ---------------------------------------------------------------------------
// Shared run protocol
// ---------------------------------------------------------------------------

// One branch-and-cut configuration point: rule pairs plus (mu_branch, mu_cut,
// lambda). depth_limit 0 means num_vars + 2, which single-variable branching
// on binary programs can never reach (every branch fixes a variable).
struct RunProtocol {
  std::pair<ScoreRuleId, ScoreRuleId> branch_pair{{ScoreRule::MostFractional},
                                                  {ScoreRule::MostFractional}};
  std::pair<ScoreRuleId, ScoreRuleId> cut_pair{{ScoreRule::Efficacy}, {ScoreRule::Parallelism}};
  std::pair<ScoreRuleId, ScoreRuleId> nscore_pair{{ScoreRule::BestBound},
                                                  {ScoreRule::DepthFirst}};
  double mu_branch = 1.0;
  double mu_cut = 0.5;
  double lambda = 1.0;
  BranchMode branch_mode = BranchMode::SingleVariable;
  std::vector<std::vector<int>> subsets;
  std::vector<std::vector<long long>> disjunctions;
  int cuts_per_node = 2;
  int depth_limit = 0;
  bool incumbent_scoring = true;
  long node_cap = 1000000;
};

struct BncSetup {
  BncConfig config;
  ScoreParams params;
  RunLimits limits;
};

inline BncSetup make_bnc_setup(const IpInstance& ip, std::vector<Cut> pool,
                               const RunProtocol& proto) {
  BncSetup s;
  s.config.branch_mode = proto.branch_mode;
  s.config.subsets = proto.subsets;
  s.config.disjunctions = proto.disjunctions;
  s.config.cuts_per_node = proto.cuts_per_node;
  s.config.cut_pool = std::move(pool);
  s.config.incumbent_scoring = proto.incumbent_scoring;

  s.params.depth_limit = proto.depth_limit > 0 ? proto.depth_limit : ip.num_vars + 2;
  s.params.lambda = proto.lambda;
  s.params.nscore_pair = proto.nscore_pair;
  s.params.ascore_pairs = {proto.branch_pair};
  s.params.mu = {proto.mu_branch};
  if (bnc_action_types(s.config) == 2) {
    s.params.ascore_pairs.push_back(proto.cut_pair);
    s.params.mu.push_back(proto.mu_cut);
  }
  s.limits.node_cap = proto.node_cap;
  return s;
}

inline BncSetup make_knapsack_setup(const KnapsackInstance& inst, const RunProtocol& proto) {
  return make_bnc_setup(inst.ip, proto.cuts_per_node > 0 ? extended_cover_cuts(inst)
                                                         : std::vector<Cut>{},
                        proto);
}

// ---------------------------------------------------------------------------
// Theoretical bound calculators
// ---------------------------------------------------------------------------

struct TheoreticalBounds {
  BigInt pieces_1d;       // k^(D(D-1)/2) * b^D        per-axis interval cap
  BigInt rects_2d;        // k^(D(9+D))   * b^D        2-D cap, statement form
  BigInt rects_2d_proof;  // k^(D(9+D)/2) * b^D        2-D cap, proof form
  BigInt boxes_multi;     // k^(dD(D-1)/2) * b^(dD)    d-action box cap
  double pdim_order;      // D^2 log2 k + D log2 b     order-level quantity
};

inline TheoreticalBounds theoretical_bounds(long delta, long k, long b, long d) {
  if (delta < 1 || k < 1 || b < 1 || d < 1)
    throw std::invalid_argument("theoretical_bounds: all inputs must be >= 1");
  using boost::multiprecision::pow;
  const BigInt bk(k), bb(b);
  const auto D = static_cast<unsigned>(delta);
  TheoreticalBounds out;
  out.pieces_1d = pow(bk, static_cast<unsigned>(delta * (delta - 1) / 2)) * pow(bb, D);
  out.rects_2d = pow(bk, static_cast<unsigned>(delta * (9 + delta))) * pow(bb, D);
  out.rects_2d_proof =
      pow(bk, static_cast<unsigned>(delta * (9 + delta) / 2)) * pow(bb, D);
  out.boxes_multi = pow(bk, static_cast<unsigned>(d * delta * (delta - 1) / 2)) *
                    pow(bb, static_cast<unsigned>(d * delta));
  out.pdim_order = static_cast<double>(delta) * static_cast<double>(delta) *
                       std::log2(static_cast<double>(k)) +
                   static_cast<double>(delta) * std::log2(static_cast<double>(b));
  return out;
}

// ---------------------------------------------------------------------------
// mu sweep (the cover-cut tuning experiment)
// ---------------------------------------------------------------------------

enum class ScorePairKind { EP, ED, DP };

inline const char* to_string(ScorePairKind k) {
  switch (k) {
    case ScorePairKind::EP: return "ep";
    case ScorePairKind::ED: return "ed";
    case ScorePairKind::DP: return "dp";
  }
  return "?";
}

inline std::pair<ScoreRuleId, ScoreRuleId> cut_pair_of(ScorePairKind k) {
  switch (k) {
    case ScorePairKind::EP:
      return {{ScoreRule::Efficacy}, {ScoreRule::Parallelism}};
    case ScorePairKind::ED:
      return {{ScoreRule::Efficacy}, {ScoreRule::DirectedCutoff}};
    case ScorePairKind::DP:
      return {{ScoreRule::DirectedCutoff}, {ScoreRule::Parallelism}};
  }
  throw std::invalid_argument("cut_pair_of: bad kind");
}

struct SweepConfig {
  KnapsackSpec spec;  // template; per-sample seeds are derived from `seed`
  ScorePairKind pair = ScorePairKind::EP;
  double grid_step = 0.01;
  int samples = 100;  // desk default; the paper-scale figure is 1000
  double lambda = 1.0;
  std::uint64_t seed = 0;
  int cuts_per_node = 2;
  long node_cap = 1000000;
  int jobs = 1;

  void validate() const {
    spec.validate();
    if (samples < 1) throw std::invalid_argument("SweepConfig: samples >= 1");
    if (!(grid_step > 0.0 && grid_step <= 1.0))
      throw std::invalid_argument("SweepConfig: grid_step in (0,1]");
    const double n = 1.0 / grid_step;
    if (std::fabs(n - std::round(n)) > 1e-9)
      throw std::invalid_argument("SweepConfig: grid_step must divide 1 evenly");
  }
};

struct SweepRow {
  double mu = 0.0;
  double mean = 0.0;
  double sd = 0.0;
  double min = 0.0;
  double max = 0.0;
  int n = 0;  // samples included (truncated runs are excluded)
};

struct SweepTable {
  std::vector<SweepRow> rows;
  long truncated_runs = 0;
};

// Average tree size per grid mu over a paired sample of instances: the same
// seed sequence is used at every mu, so curve differences are attributable to
// mu alone. Protocol: up to two top-scoring violated extended cover cuts per
// node, single-variable branching, best-bound node selection at lambda.
inline SweepTable sweep_mu(const SweepConfig& config) {
  config.validate();
  const long grid_n = std::lround(1.0 / config.grid_step);
  const long num_mu = grid_n + 1;

  std::vector<KnapsackInstance> instances;
  instances.reserve(static_cast<std::size_t>(config.samples));
  std::vector<std::vector<Cut>> pools;
  for (int s = 0; s < config.samples; ++s) {
    KnapsackSpec kspec = config.spec;
    kspec.seed = mix_seed(config.seed, 0x5eedULL, static_cast<std::uint64_t>(s));
    instances.push_back(generate_knapsack(kspec));
    pools.push_back(extended_cover_cuts(instances.back()));
  }

  const long total = num_mu * config.samples;
  std::vector<long> sizes(static_cast<std::size_t>(total), -1);  // -1 = truncated
  parallel_for(total, config.jobs, [&](long item) {
    const long g = item / config.samples;
    const long s = item % config.samples;
    RunProtocol proto;
    proto.cut_pair = cut_pair_of(config.pair);
    proto.mu_cut = static_cast<double>(g) / static_cast<double>(grid_n);
    proto.lambda = config.lambda;
    proto.cuts_per_node = config.cuts_per_node;
    proto.node_cap = config.node_cap;
    BncSetup setup = make_bnc_setup(instances[static_cast<std::size_t>(s)].ip,
                                    pools[static_cast<std::size_t>(s)], proto);
    const BncSolveResult res =
        bnc_solve(instances[static_cast<std::size_t>(s)].ip, setup.config, setup.params,
                  setup.limits);
    sizes[static_cast<std::size_t>(item)] =
        res.status == BncStatus::Truncated ? -1 : res.tree.stats.nodes_created;
  });

  SweepTable table;
  for (long g = 0; g < num_mu; ++g) {
    SweepRow row;
    row.mu = static_cast<double>(g) / static_cast<double>(grid_n);
    double sum = 0.0;
    double mn = std::numeric_limits<double>::infinity();
    double mx = -std::numeric_limits<double>::infinity();
    int n = 0;
    for (int s = 0; s < config.samples; ++s) {
      const long v = sizes[static_cast<std::size_t>(g * config.samples + s)];
      if (v < 0) {
        ++table.truncated_runs;
        continue;
      }
      sum += static_cast<double>(v);
      mn = std::min(mn, static_cast<double>(v));
      mx = std::max(mx, static_cast<double>(v));
      ++n;
    }
    row.n = n;
    if (n > 0) {
      row.mean = sum / n;
      row.min = mn;
      row.max = mx;
      double ss = 0.0;
      for (int s = 0; s < config.samples; ++s) {
        const long v = sizes[static_cast<std::size_t>(g * config.samples + s)];
        if (v < 0) continue;
        const double dev = static_cast<double>(v) - row.mean;
        ss += dev * dev;
      }
      row.sd = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
    }
    table.rows.push_back(row);
  }
  return table;
}

inline std::string sweep_csv(const SweepTable& t) {
  std::ostringstream os;
  os << "mu,mean,sd,min,max,n\n";
  for (const SweepRow& r : t.rows) {
    os << detail::format_double(r.mu) << "," << detail::format_double(r.mean) << ","
       << detail::format_double(r.sd) << "," << detail::format_double(r.min) << ","
       << detail::format_double(r.max) << "," << r.n << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Piecewise-constancy detection
// ---------------------------------------------------------------------------

enum class ParamAxis { MuBranch, MuCut, Lambda };

inline const char* to_string(ParamAxis a) {
  switch (a) {
    case ParamAxis::MuBranch: return "mu_branch";
    case ParamAxis::MuCut: return "mu_cut";
    case ParamAxis::Lambda: return "lambda";
  }
  return "?";
}

struct PieceInterval {
  double lo = 0.0;
  double hi = 1.0;
  Digest digest;
};

struct PieceReport {
  ParamAxis axis = ParamAxis::MuCut;
  std::vector<PieceInterval> intervals;
  std::vector<double> breakpoints;  // refined to width <= refine_tol
  long piece_count = 0;
  BigInt theoretical_cap;
  bool inconsistent = false;        // an interior probe disagreed with its piece digest
  std::string note;
};

namespace detail {

inline RunProtocol with_axis(RunProtocol proto, ParamAxis axis, double value) {
  switch (axis) {
    case ParamAxis::MuBranch: proto.mu_branch = value; break;
    case ParamAxis::MuCut: proto.mu_cut = value; break;
    case ParamAxis::Lambda: proto.lambda = value; break;
  }
  return proto;
}

// Scans eval() over [0,1] and recovers the piece structure. Breakpoints are
// bisected past refine_tol all the way to adjacent doubles, so every piece
// boundary is exact in the floating-point parameter space: a reported piece
// [lo, hi) (the last one closed) is exactly the set of parameter values
// sharing its digest, including degenerate single-point pieces such as a
// behavior change exactly at an endpoint. eval must be deterministic.
template <typename Eval>
void scan_axis(Eval&& eval, double coarse_step, double refine_tol, std::uint64_t probe_seed,
               int probes, std::vector<PieceInterval>& intervals,
               std::vector<double>& breakpoints, bool& inconsistent, std::string& note) {
  (void)refine_tol;  // boundaries are refined to exactness, well under any tol
  const long n = std::lround(1.0 / coarse_step);
  std::vector<double> ts(static_cast<std::size_t>(n + 1));
  std::vector<Digest> ds(static_cast<std::size_t>(n + 1));
  for (long i = 0; i <= n; ++i) {
    ts[static_cast<std::size_t>(i)] = static_cast<double>(i) / static_cast<double>(n);
    ds[static_cast<std::size_t>(i)] = eval(ts[static_cast<std::size_t>(i)]);
  }

  breakpoints.clear();
  std::vector<Digest> piece_digests{ds.front()};
  // A coarse cell may hide several breakpoints: refine the first one (where
  // the digest stops matching the left end), then re-examine the remainder of
  // the cell against its right-end digest.
  constexpr long kMaxBreakpoints = 100000;
  for (long i = 0; i < n; ++i) {
    double cell_lo = ts[static_cast<std::size_t>(i)];
    Digest d_lo = ds[static_cast<std::size_t>(i)];
    const double cell_hi = ts[static_cast<std::size_t>(i + 1)];
    const Digest d_hi = ds[static_cast<std::size_t>(i + 1)];
    while (!(d_lo == d_hi)) {
      if (static_cast<long>(breakpoints.size()) > kMaxBreakpoints) {
        inconsistent = true;
        note = "breakpoint budget exceeded";
        return;
      }
      double lo = cell_lo;
      double hi = cell_hi;
      Digest d_next = d_hi;
      while (true) {
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) break;  // lo and hi are adjacent doubles
        const Digest dm = eval(mid);
        if (dm == d_lo) {
          lo = mid;
        } else {
          hi = mid;
          d_next = dm;
        }
      }
      // hi is the first double with a digest different from d_lo.
      breakpoints.push_back(hi);
      piece_digests.push_back(d_next);
      cell_lo = hi;
      d_lo = d_next;
    }
  }

  intervals.clear();
  std::vector<double> edges{0.0};
  edges.insert(edges.end(), breakpoints.begin(), breakpoints.end());
  edges.push_back(1.0);
  Rng rng(probe_seed);
  for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
    PieceInterval piece;
    piece.lo = edges[e];
    piece.hi = edges[e + 1];
    piece.digest = piece_digests[e];

    // Coarse points inside the piece must already agree with its digest; a
    // disagreement means the cell scan skipped a flip-and-back narrower than
    // the coarse step.
    for (long i = 0; i <= n; ++i) {
      const double t = ts[static_cast<std::size_t>(i)];
      const bool inside = t >= piece.lo && (t < piece.hi || (e + 2 == edges.size() && t <= 1.0));
      if (inside && !(ds[static_cast<std::size_t>(i)] == piece.digest)) {
        inconsistent = true;
        note = "coarse grid disagreement inside a detected piece";
      }
    }

    // Random interior probes; a degenerate piece is probed at its point. The
    // clamp keeps a probe from rounding up onto the half-open edge.
    const double probe_max = std::nextafter(piece.hi, piece.lo);
    for (int p = 0; p < probes; ++p) {
      const double t =
          piece.hi > piece.lo ? std::min(rng.next_in(piece.lo, piece.hi), probe_max) : piece.lo;
      if (!(eval(t) == piece.digest)) {
        inconsistent = true;
        note = "interior probe mismatch";
      }
    }
    intervals.push_back(piece);
  }
}

}  // namespace detail

// Digest of the full tree-search run at one parameter point. Incumbent
// scoring is frozen so every action score is strictly path-wise, which is the
// hypothesis of the piecewise-structure results being verified.
inline Digest run_digest(const IpInstance& ip, const std::vector<Cut>& pool,
                         const RunProtocol& proto, bool suppressed = false) {
  RunProtocol p = proto;
  p.incumbent_scoring = false;
  BncSetup setup = make_bnc_setup(ip, pool, p);
  BncHooks hooks = make_bnc_hooks(ip, setup.config, setup.params);
  const SearchTree tree = suppressed
                              ? run_suppressed(ip, hooks.hooks, setup.params, setup.limits)
                              : run(ip, hooks.hooks, setup.params, setup.limits);
  if (tree.truncated) throw EngineError("run_digest: truncated run; raise the node cap");
  return canonical_hash(tree);
}

inline PieceReport find_pieces(const IpInstance& ip, const std::vector<Cut>& pool,
                               ParamAxis axis, const RunProtocol& proto,
                               double coarse_step = 1e-3, double refine_tol = 1e-7,
                               std::uint64_t probe_seed = 0, int probes = 10) {
  PieceReport report;
  report.axis = axis;
  auto eval = [&](double t) {
    return run_digest(ip, pool, detail::with_axis(proto, axis, t), /*suppressed=*/false);
  };
  detail::scan_axis(eval, coarse_step, refine_tol, mix_seed(probe_seed, 0xA11CE), probes,
                    report.intervals, report.breakpoints, report.inconsistent, report.note);
  report.piece_count = static_cast<long>(report.intervals.size());

  BncSetup setup = make_bnc_setup(ip, pool, proto);
  const long b = bnc_action_cap(ip, setup.config);
  const long delta = setup.params.depth_limit;
  const long d = bnc_action_types(setup.config);
  const TheoreticalBounds caps = theoretical_bounds(delta, 2, b, d);
  report.theoretical_cap = axis == ParamAxis::Lambda ? caps.rects_2d : caps.pieces_1d;
  return report;
}

inline std::string pieces_csv(const PieceReport& r) {
  std::ostringstream os;
  os << "lo,hi,digest\n";
  for (const PieceInterval& p : r.intervals)
    os << detail::format_double(p.lo) << "," << detail::format_double(p.hi) << ","
       << p.digest.hex() << "\n";
  return os.str();
}

// 2-D rectangles over (mu_cut, lambda), built the way the structure result
// does: mu-pieces of the fathoming-suppressed run (node-selection
// independent), then lambda-pieces of the full run inside each mu-piece.
struct Rectangle {
  double mu_lo = 0.0, mu_hi = 1.0;
  double lambda_lo = 0.0, lambda_hi = 1.0;
  Digest digest;
};

struct RectangleReport {
  std::vector<PieceInterval> mu_pieces;  // pieces of the suppressed run
  std::vector<Rectangle> rects;
  long count = 0;
  BigInt theoretical_cap;      // statement form
  BigInt theoretical_cap_proof;
  bool inconsistent = false;
  std::string note;
};

inline RectangleReport find_rectangles(const IpInstance& ip, const std::vector<Cut>& pool,
                                       const RunProtocol& proto, double coarse_step = 1e-3,
                                       double refine_tol = 1e-7, std::uint64_t probe_seed = 0,
                                       int probes = 10) {
  RectangleReport report;

  auto eval_suppressed = [&](double mu) {
    return run_digest(ip, pool, detail::with_axis(proto, ParamAxis::MuCut, mu),
                      /*suppressed=*/true);
  };
  std::vector<double> mu_breaks;
  detail::scan_axis(eval_suppressed, coarse_step, refine_tol, mix_seed(probe_seed, 0xB0B0),
                    probes, report.mu_pieces, mu_breaks, report.inconsistent, report.note);

  Rng rng(mix_seed(probe_seed, 0xC0C0));
  for (const PieceInterval& mu_piece : report.mu_pieces) {
    const double mu_mid = 0.5 * (mu_piece.lo + mu_piece.hi);
    auto eval_lambda = [&](double lambda) {
      RunProtocol p = detail::with_axis(proto, ParamAxis::MuCut, mu_mid);
      p = detail::with_axis(p, ParamAxis::Lambda, lambda);
      return run_digest(ip, pool, p, /*suppressed=*/false);
    };
    std::vector<PieceInterval> lambda_pieces;
    std::vector<double> lambda_breaks;
    detail::scan_axis(eval_lambda, coarse_step, refine_tol,
                      mix_seed(probe_seed, static_cast<std::uint64_t>(report.rects.size())),
                      probes, lambda_pieces, lambda_breaks, report.inconsistent, report.note);
    for (const PieceInterval& lp : lambda_pieces) {
      Rectangle rect;
      rect.mu_lo = mu_piece.lo;
      rect.mu_hi = mu_piece.hi;
      rect.lambda_lo = lp.lo;
      rect.lambda_hi = lp.hi;
      rect.digest = lp.digest;
      // Random probes across the half-open rectangle; degenerate extents are
      // probed at their point.
      auto draw = [&](double lo, double hi) {
        if (!(hi > lo)) return lo;
        return std::min(rng.next_in(lo, hi), std::nextafter(hi, lo));
      };
      for (int p = 0; p < probes; ++p) {
        RunProtocol pp = detail::with_axis(proto, ParamAxis::MuCut, draw(rect.mu_lo, rect.mu_hi));
        pp = detail::with_axis(pp, ParamAxis::Lambda, draw(rect.lambda_lo, rect.lambda_hi));
        if (!(run_digest(ip, pool, pp, /*suppressed=*/false) == rect.digest)) {
          report.inconsistent = true;
          report.note = "rectangle probe mismatch";
        }
      }
      report.rects.push_back(rect);
    }
  }
  report.count = static_cast<long>(report.rects.size());

  BncSetup setup = make_bnc_setup(ip, pool, proto);
  const TheoreticalBounds caps = theoretical_bounds(
      setup.params.depth_limit, 2, bnc_action_cap(ip, setup.config),
      bnc_action_types(setup.config));
  report.theoretical_cap = caps.rects_2d;
  report.theoretical_cap_proof = caps.rects_2d_proof;
  return report;
}

// ---------------------------------------------------------------------------
// Rooted-subtree verification
// ---------------------------------------------------------------------------

struct SubtreeReport {
  bool pass = false;
  bool skipped = false;  // suppressed run hit the node cap
  long nodes_checked = 0;
  long full_size = 0;
  long suppressed_size = 0;
  std::string first_violation;
};

// Runs the full search and the fathoming-suppressed search with identical
// parameters (incumbent scoring frozen) and checks that every root-to-node
// path of the full tree appears as a rooted path of the suppressed tree with
// identical actions at each non-terminal node.
inline SubtreeReport verify_rooted_subtree(const IpInstance& ip, const std::vector<Cut>& pool,
                                           const RunProtocol& proto) {
  RunProtocol p = proto;
  p.incumbent_scoring = false;
  BncSetup setup = make_bnc_setup(ip, pool, p);

  BncHooks h1 = make_bnc_hooks(ip, setup.config, setup.params);
  const SearchTree full = run(ip, h1.hooks, setup.params, setup.limits);
  BncHooks h2 = make_bnc_hooks(ip, setup.config, setup.params);
  const SearchTree supp = run_suppressed(ip, h2.hooks, setup.params, setup.limits);

  SubtreeReport report;
  report.full_size = full.size();
  report.suppressed_size = supp.size();
  if (supp.truncated) {
    report.skipped = true;
    return report;
  }
  if (full.truncated) {
    report.skipped = true;
    return report;
  }

  report.pass = true;
  std::vector<std::pair<int, int>> stack{{full.root, supp.root}};
  while (!stack.empty() && report.pass) {
    const auto [fi, si] = stack.back();
    stack.pop_back();
    ++report.nodes_checked;
    const SearchNode& fn = full.node(fi);
    const SearchNode& sn = supp.node(si);
    if (fn.subproblem != sn.subproblem) {
      report.pass = false;
      report.first_violation = "subproblem mismatch at full-tree node " + std::to_string(fi);
      break;
    }
    if (fn.status != NodeStatus::Expanded) continue;  // terminal in the full tree
    if (sn.status != NodeStatus::Expanded) {
      report.pass = false;
      report.first_violation =
          "full-tree node " + std::to_string(fi) + " expanded but suppressed node is not";
      break;
    }
    if (fn.actions_taken != sn.actions_taken) {
      report.pass = false;
      report.first_violation = "action mismatch at full-tree node " + std::to_string(fi);
      break;
    }
    if (fn.children.size() != sn.children.size()) {
      report.pass = false;
      report.first_violation = "child count mismatch at full-tree node " + std::to_string(fi);
      break;
    }
    for (std::size_t c = 0; c < fn.children.size(); ++c)
      stack.push_back({fn.children[c], sn.children[c]});
  }
  return report;
}

// ---------------------------------------------------------------------------
// Generalization gap
// ---------------------------------------------------------------------------

struct GapConfig {
  KnapsackSpec dist;  // distribution template; seeds are derived
  std::vector<long> train_sizes{50, 100, 200, 400, 800};
  long test_size = 8000;  // proxy for the expectation
  int trials = 10;
  std::vector<std::pair<double, double>> grid{{0.0, 1.0}, {0.5, 1.0}, {1.0, 1.0}};
  RunProtocol proto;
  std::uint64_t seed = 0;
  int jobs = 1;

  void validate() const {
    dist.validate();
    if (train_sizes.empty()) throw std::invalid_argument("GapConfig: empty train_sizes");
    for (std::size_t i = 1; i < train_sizes.size(); ++i)
      if (train_sizes[i] <= train_sizes[i - 1])
        throw std::invalid_argument("GapConfig: train_sizes must be strictly increasing");
    if (test_size < 10 * train_sizes.back())
      throw std::invalid_argument("GapConfig: test_size must be >= 10 * max(train_sizes)");
    if (grid.empty()) throw std::invalid_argument("GapConfig: empty grid");
    if (trials < 1) throw std::invalid_argument("GapConfig: trials >= 1");
  }
};

struct GapReport {
  std::vector<long> train_sizes;
  std::vector<double> gap;                    // sup over the grid, averaged over trials
  std::vector<std::vector<double>> per_trial; // [trial][train-size index]
  double slope = 0.0;
  bool slope_defined = false;
  double cost_cap = 0.0;  // H: largest tree size observed
  std::vector<std::pair<double, double>> grid;
};

namespace detail {

// Tree sizes of one instance across the whole (mu_cut, lambda) grid.
inline std::vector<double> grid_tree_sizes(const KnapsackInstance& inst,
                                           const std::vector<Cut>& pool,
                                           const RunProtocol& proto,
                                           const std::vector<std::pair<double, double>>& grid) {
  std::vector<double> out;
  out.reserve(grid.size());
  for (const auto& [mu, lambda] : grid) {
    RunProtocol p = proto;
    p.mu_cut = mu;
    p.lambda = lambda;
    BncSetup setup = make_bnc_setup(inst.ip, pool, p);
    const BncSolveResult res = bnc_solve(inst.ip, setup.config, setup.params, setup.limits);
    out.push_back(static_cast<double>(res.tree.stats.nodes_created));
  }
  return out;
}

}  // namespace detail

// Empirical sup-over-grid gap between training and held-out mean tree size,
// with a least-squares log-log decay fit.
inline GapReport generalization_gap(const GapConfig& config) {
  config.validate();
  const std::size_t g = config.grid.size();
  const long n_max = config.train_sizes.back();

  auto sizes_for = [&](std::uint64_t seed_tag, long index) {
    KnapsackSpec spec = config.dist;
    spec.seed = mix_seed(config.seed, seed_tag, static_cast<std::uint64_t>(index));
    const KnapsackInstance inst = generate_knapsack(spec);
    const std::vector<Cut> pool = extended_cover_cuts(inst);
    return detail::grid_tree_sizes(inst, pool, config.proto, config.grid);
  };

  // Held-out estimate of the expected tree size per grid point.
  std::vector<std::vector<double>> test_sizes(static_cast<std::size_t>(config.test_size));
  parallel_for(config.test_size, config.jobs,
               [&](long i) { test_sizes[static_cast<std::size_t>(i)] = sizes_for(0x7e57ULL, i); });
  std::vector<double> test_mean(g, 0.0);
  double cost_cap = 0.0;
  for (const auto& row : test_sizes)
    for (std::size_t j = 0; j < g; ++j) {
      test_mean[j] += row[j];
      cost_cap = std::max(cost_cap, row[j]);
    }
  for (double& m : test_mean) m /= static_cast<double>(config.test_size);

  GapReport report;
  report.train_sizes = config.train_sizes;
  report.grid = config.grid;
  report.per_trial.assign(static_cast<std::size_t>(config.trials), {});

  for (int trial = 0; trial < config.trials; ++trial) {
    std::vector<std::vector<double>> train(static_cast<std::size_t>(n_max));
    parallel_for(n_max, config.jobs, [&](long i) {
      train[static_cast<std::size_t>(i)] =
          sizes_for(mix_seed(0x7121a1ULL, static_cast<std::uint64_t>(trial)), i);
    });
    for (const auto& row : train)
      for (double v : row) cost_cap = std::max(cost_cap, v);

    // Prefix sums so every N in train_sizes reuses the same draws.
    std::vector<std::vector<double>> prefix(static_cast<std::size_t>(n_max) + 1,
                                            std::vector<double>(g, 0.0));
    for (long i = 0; i < n_max; ++i)
      for (std::size_t j = 0; j < g; ++j)
        prefix[static_cast<std::size_t>(i) + 1][j] =
            prefix[static_cast<std::size_t>(i)][j] + train[static_cast<std::size_t>(i)][j];

    for (long n : config.train_sizes) {
      double sup = 0.0;
      for (std::size_t j = 0; j < g; ++j) {
        const double train_mean = prefix[static_cast<std::size_t>(n)][j] / static_cast<double>(n);
        sup = std::max(sup, std::fabs(train_mean - test_mean[j]));
      }
      report.per_trial[static_cast<std::size_t>(trial)].push_back(sup);
    }
  }

  report.gap.assign(report.train_sizes.size(), 0.0);
  for (int trial = 0; trial < config.trials; ++trial)
    for (std::size_t k = 0; k < report.train_sizes.size(); ++k)
      report.gap[k] += report.per_trial[static_cast<std::size_t>(trial)][k];
  for (double& v : report.gap) v /= static_cast<double>(config.trials);
  report.cost_cap = cost_cap;

  // Least-squares slope of log(gap) vs log(N); undefined if any gap is zero.
  bool ok = true;
  for (double v : report.gap)
    if (!(v > 0.0)) ok = false;
  if (ok && report.train_sizes.size() >= 2) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double m = static_cast<double>(report.train_sizes.size());
    for (std::size_t k = 0; k < report.train_sizes.size(); ++k) {
      const double x = std::log(static_cast<double>(report.train_sizes[k]));
      const double y = std::log(report.gap[k]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double denom = m * sxx - sx * sx;
    if (denom > 0.0) {
      report.slope = (m * sxy - sx * sy) / denom;
      report.slope_defined = true;
    }
  }
  return report;
}

inline std::string gap_csv(const GapReport& r) {
  std::ostringstream os;
  os << "N,gap\n";
  for (std::size_t k = 0; k < r.train_sizes.size(); ++k)
    os << r.train_sizes[k] << "," << detail::format_double(r.gap[k]) << "\n";
  os << "slope," << (r.slope_defined ? detail::format_double(r.slope) : "undefined") << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// The Jeroslow separation
// ---------------------------------------------------------------------------

struct JeroslowResult {
  int n = 0;
  long single_var_nodes = 0;
  long multivar_nodes = 0;
};

// max sum x  s.t.  2 sum x = n,  x binary; infeasible for odd n. Single
// variable branching needs an exponential tree; one branch on all variables
// closes it with three nodes.
inline IpInstance jeroslow_instance(int n) {
  if (n < 3 || n > 15 || n % 2 == 0)
    throw std::invalid_argument("jeroslow: n must be odd, 3 <= n <= 15");
  IpInstance ip;
  ip.num_vars = n;
  ip.objective.assign(n, 1.0);
  ip.var_upper.assign(n, 1);
  ip.integral.assign(n, 1);
  LinearConstraint r;
  r.coeffs.assign(n, 2.0);
  r.sense = Sense::Eq;
  r.rhs = static_cast<double>(n);
  ip.constraints.push_back(std::move(r));
  return ip;
}

inline JeroslowResult jeroslow(int n) {
  const IpInstance ip = jeroslow_instance(n);
  JeroslowResult out;
  out.n = n;

  RunProtocol single;
  single.cuts_per_node = 0;
  const BncSetup s1 = make_bnc_setup(ip, {}, single);
  out.single_var_nodes =
      bnc_solve(ip, s1.config, s1.params, s1.limits).tree.stats.nodes_created;

  RunProtocol multi;
  multi.cuts_per_node = 0;
  multi.branch_mode = BranchMode::MultiVariable;
  multi.subsets = {std::vector<int>(static_cast<std::size_t>(n))};
  for (int j = 0; j < n; ++j) multi.subsets[0][static_cast<std::size_t>(j)] = j;
  const BncSetup s2 = make_bnc_setup(ip, {}, multi);
  out.multivar_nodes =
      bnc_solve(ip, s2.config, s2.params, s2.limits).tree.stats.nodes_created;
  return out;
}

}  // namespace bctree
