#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "bctree/actions.hpp"
#include "bctree/engine.hpp"

namespace bctree {

// Sentinel for an infeasible strong-branching child and for a directed-cutoff
// segment that never crosses the plane.
inline constexpr double kScoreSentinel = 1e6;
// Stand-in for -inf node scores (infeasible relaxations); kept finite so the
// convex combination stays well-defined at the lambda endpoints.
inline constexpr double kNeverSelect = -1e18;
inline constexpr double kSbProductEps = 1e-6;

namespace detail {

inline double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace detail

// Perpendicular distance from x* to the plane alpha'x = beta; positive for
// violated cuts.
inline double efficacy(const Cut& cut, std::span<const double> x) {
  cut.validate();
  if (cut.alpha.size() != x.size()) throw std::invalid_argument("efficacy: dimension mismatch");
  const double nrm = detail::norm2(cut.alpha);
  return (detail::dot(cut.alpha, x) - cut.beta) / nrm;
}

// |cos| of the angle between the objective and the cut normal, in [0,1].
inline double parallelism(const Cut& cut, std::span<const double> objective) {
  cut.validate();
  if (cut.alpha.size() != objective.size())
    throw std::invalid_argument("parallelism: dimension mismatch");
  const double no = detail::norm2(objective);
  const double na = detail::norm2(cut.alpha);
  if (no == 0.0) throw std::invalid_argument("parallelism: zero objective vector");
  const double v = std::fabs(detail::dot(cut.alpha, objective)) / (no * na);
  return std::min(v, 1.0);
}

// Distance from x* to the plane along the segment from x* toward the
// incumbent. The segment direction is y = (x* - xbar)/||x* - xbar||; the cut
// is crossed when alpha'y > 0. Falls back to efficacy when there is no
// incumbent (or xbar == x*), and to the sentinel when the segment never
// crosses the plane.
inline double directed_cutoff(const Cut& cut, std::span<const double> x,
                              const std::optional<std::vector<double>>& incumbent) {
  cut.validate();
  if (cut.alpha.size() != x.size())
    throw std::invalid_argument("directed_cutoff: dimension mismatch");
  if (!incumbent) return efficacy(cut, x);
  const std::vector<double>& xbar = *incumbent;
  if (xbar.size() != x.size()) throw std::invalid_argument("directed_cutoff: incumbent size");
  std::vector<double> diff(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) diff[j] = x[j] - xbar[j];
  const double len = detail::norm2(diff);
  if (len == 0.0) return efficacy(cut, x);
  const double denom = detail::dot(cut.alpha, diff) / len;
  if (denom > 1e-12) return (detail::dot(cut.alpha, x) - cut.beta) / denom;
  return kScoreSentinel;
}

// Node-selection scores. Both read only the final node of the path.
inline double best_bound_nscore(const NodePath& path) {
  const LpResult& lp = node_lp(*path.back());
  if (lp.status != LpStatus::Optimal) return kNeverSelect;
  return lp.objective;
}

inline double depth_nscore(const NodePath& path, int depth_limit) {
  return static_cast<double>(path.back()->depth) / static_cast<double>(depth_limit);
}

// Strong branching: objective decrease of the two child relaxations.
struct SbDeltas {
  double down = 0.0;
  double up = 0.0;
};

inline SbDeltas strong_branch_deltas(const NodePath& path, const Disjunction& d) {
  const SearchNode& node = *path.back();
  const LpResult& lp = node_lp(node);
  if (lp.status != LpStatus::Optimal)
    throw std::invalid_argument("strong_branch_deltas: node LP not optimal");
  SbDeltas out;
  const LpResult down = solve_lp(relax(apply_branch(node.subproblem, d, BranchSide::Down)));
  const LpResult up = solve_lp(relax(apply_branch(node.subproblem, d, BranchSide::Up)));
  out.down = down.status == LpStatus::Optimal ? lp.objective - down.objective : kScoreSentinel;
  out.up = up.status == LpStatus::Optimal ? lp.objective - up.objective : kScoreSentinel;
  return out;
}

inline double sb_linear(const SbDeltas& d, double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("sb_linear: rho outside [0,1]");
  const double mx = std::max(d.down, d.up);
  const double mn = std::min(d.down, d.up);
  return combine(mx, mn, rho);
}

inline double sb_product(const SbDeltas& d) {
  return std::max(d.down, kSbProductEps) * std::max(d.up, kSbProductEps);
}

// Distance of pi'x* from the nearest integer (0.5 is maximal); reduces to the
// classical most-fractional rule for single-variable disjunctions.
inline double most_fractional(const NodePath& path, const Disjunction& d) {
  const SearchNode& node = *path.back();
  const LpResult& lp = node_lp(node);
  if (lp.status != LpStatus::Optimal)
    throw std::invalid_argument("most_fractional: node LP not optimal");
  double v = 0.0;
  for (std::size_t j = 0; j < d.pi.size(); ++j)
    v += static_cast<double>(d.pi[j]) * lp.solution[j];
  const double frac = v - std::floor(v);
  return std::min(frac, 1.0 - frac);
}

}  // namespace bctree
