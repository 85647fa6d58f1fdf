#pragma once

#include <charconv>
#include <stdexcept>
#include <string>
#include <string_view>

#include "bctree/ip.hpp"

namespace bctree {

enum class ScoreRule {
  Efficacy,        // cut: perpendicular distance from x* to the plane
  Parallelism,     // cut: |cos| of angle between objective and cut normal
  DirectedCutoff,  // cut: distance from x* to the plane toward the incumbent
  BestBound,       // node: LP relaxation objective
  DepthFirst,      // node: depth / depth_limit
  SBLinear,        // branch: rho*max(deltas) + (1-rho)*min(deltas)
  SBProduct,       // branch: max(d-,eps)*max(d+,eps)
  MostFractional,  // branch: distance of pi'x* from the nearest integer
};

struct ScoreRuleId {
  ScoreRule rule = ScoreRule::Efficacy;
  double rho = 0.5;  // SBLinear weight only

  bool operator==(const ScoreRuleId&) const = default;
};

inline std::string to_string(const ScoreRuleId& id) {
  switch (id.rule) {
    case ScoreRule::Efficacy: return "efficacy";
    case ScoreRule::Parallelism: return "parallelism";
    case ScoreRule::DirectedCutoff: return "dcd";
    case ScoreRule::BestBound: return "bestbound";
    case ScoreRule::DepthFirst: return "depth";
    case ScoreRule::SBLinear: return "sblinear:" + detail::format_double(id.rho);
    case ScoreRule::SBProduct: return "sbproduct";
    case ScoreRule::MostFractional: return "mostfrac";
  }
  return "?";
}

inline ScoreRuleId parse_rule(std::string_view s) {
  if (s == "efficacy") return {ScoreRule::Efficacy};
  if (s == "parallelism") return {ScoreRule::Parallelism};
  if (s == "dcd") return {ScoreRule::DirectedCutoff};
  if (s == "bestbound") return {ScoreRule::BestBound};
  if (s == "depth") return {ScoreRule::DepthFirst};
  if (s == "sbproduct") return {ScoreRule::SBProduct};
  if (s == "mostfrac") return {ScoreRule::MostFractional};
  constexpr std::string_view prefix = "sblinear:";
  if (s.substr(0, prefix.size()) == prefix) {
    const std::string_view num = s.substr(prefix.size());
    double rho = 0.0;
    auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), rho);
    if (ec != std::errc() || p != num.data() + num.size() || !(rho >= 0.0 && rho <= 1.0))
      throw std::invalid_argument("parse_rule: sblinear weight must be in [0,1]");
    return {ScoreRule::SBLinear, rho};
  }
  throw std::invalid_argument("parse_rule: unknown rule '" + std::string(s) + "'");
}

inline bool is_cut_rule(ScoreRule r) {
  return r == ScoreRule::Efficacy || r == ScoreRule::Parallelism ||
         r == ScoreRule::DirectedCutoff;
}

inline bool is_branch_rule(ScoreRule r) {
  return r == ScoreRule::SBLinear || r == ScoreRule::SBProduct ||
         r == ScoreRule::MostFractional;
}

inline bool is_node_rule(ScoreRule r) {
  return r == ScoreRule::BestBound || r == ScoreRule::DepthFirst;
}

}  // namespace bctree
