#pragma once

#include <cmath>
#include <stdexcept>
#include <variant>
#include <vector>

#include "bctree/ip.hpp"

namespace bctree {

// Cutting plane alpha'x <= beta.
struct Cut {
  std::vector<double> alpha;
  double beta = 0.0;

  bool operator==(const Cut&) const = default;

  void validate() const {
    bool nonzero = false;
    for (double a : alpha) {
      if (!std::isfinite(a)) throw std::invalid_argument("Cut: non-finite normal");
      if (a != 0.0) nonzero = true;
    }
    if (!nonzero) throw std::invalid_argument("Cut: zero normal");
    if (!std::isfinite(beta)) throw std::invalid_argument("Cut: non-finite rhs");
  }
};

// A primitive action: either a branching disjunction or one cutting plane.
struct CutOrBranch {
  std::variant<Disjunction, Cut> value;

  bool operator==(const CutOrBranch&) const = default;

  bool is_branch() const { return std::holds_alternative<Disjunction>(value); }
  bool is_cut() const { return std::holds_alternative<Cut>(value); }
  const Disjunction& branch() const { return std::get<Disjunction>(value); }
  const Cut& cut() const { return std::get<Cut>(value); }
};

inline CutOrBranch make_branch(Disjunction d) { return {std::move(d)}; }
inline CutOrBranch make_cut(Cut c) { return {std::move(c)}; }

// One selectable action. A candidate may carry several primitive parts (the
// two-cuts-per-node protocol selects an ordered pair of cuts as one action).
struct ActionCandidate {
  std::vector<CutOrBranch> parts;

  bool operator==(const ActionCandidate&) const = default;
};

}  // namespace bctree
