#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bctree {

enum class Sense { Le, Ge, Eq };

inline const char* to_string(Sense s) {
  switch (s) {
    case Sense::Le: return "le";
    case Sense::Ge: return "ge";
    case Sense::Eq: return "eq";
  }
  return "?";
}

// Dense LP in maximization form. Variable bounds must both be finite.
struct LpProblem {
  struct Row {
    std::vector<double> coeffs;
    Sense sense = Sense::Le;
    double rhs = 0.0;
  };

  int num_vars = 0;
  std::vector<double> objective;
  std::vector<Row> rows;
  std::vector<double> lower;
  std::vector<double> upper;

  void validate() const {
    if (num_vars < 0) throw std::invalid_argument("LpProblem: negative num_vars");
    auto finite = [](double v) { return std::isfinite(v); };
    if (static_cast<int>(objective.size()) != num_vars)
      throw std::invalid_argument("LpProblem: objective length != num_vars");
    if (static_cast<int>(lower.size()) != num_vars || static_cast<int>(upper.size()) != num_vars)
      throw std::invalid_argument("LpProblem: bound vectors length != num_vars");
    for (int j = 0; j < num_vars; ++j) {
      if (!finite(objective[j]) || !finite(lower[j]) || !finite(upper[j]))
        throw std::invalid_argument("LpProblem: non-finite data");
      if (lower[j] > upper[j]) throw std::invalid_argument("LpProblem: lower > upper");
    }
    for (const Row& r : rows) {
      if (static_cast<int>(r.coeffs.size()) != num_vars)
        throw std::invalid_argument("LpProblem: row length != num_vars");
      if (!finite(r.rhs)) throw std::invalid_argument("LpProblem: non-finite rhs");
      for (double a : r.coeffs)
        if (!finite(a)) throw std::invalid_argument("LpProblem: non-finite coefficient");
    }
  }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
  }
  return "?";
}

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;          // valid iff Optimal
  std::vector<double> solution;    // valid iff Optimal
};

// Structured error for dimension mismatches and numerical breakdown; the
// solver never returns a possibly-wrong answer.
class LpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kLpFeasTol = 1e-9;
inline constexpr double kIntegralityTol = 1e-6;

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Dense two-phase primal simplex with Bland's rule on a full tableau.
// Variables are shifted by their lower bounds; upper bounds become explicit
// rows; every row gets rhs >= 0 and, where needed, an artificial variable.
// Bland's rule on both the entering and leaving choice guarantees
// termination and gives one reproducible optimum for degenerate LPs.
class SimplexTableau {
 public:
  explicit SimplexTableau(const LpProblem& p) : p_(p) {
    p.validate();
    build();
  }

  LpResult solve() {
    if (num_art_ > 0) {
      load_phase1_objective();
      const PivotOutcome out = iterate(/*allow_artificial_entering=*/false);
      if (out == PivotOutcome::Unbounded)
        throw LpError("simplex: phase-1 unbounded (internal error)");
      // Phase-1 maximizes -sum(artificials); feasible iff the optimum is ~0.
      if (obj_value() < -kLpFeasTol) return LpResult{LpStatus::Infeasible, 0.0, {}};
      drive_out_artificials();
    }
    load_phase2_objective();
    const PivotOutcome out = iterate(/*allow_artificial_entering=*/false);
    if (out == PivotOutcome::Unbounded) return LpResult{LpStatus::Unbounded, 0.0, {}};
    return extract();
  }

 private:
  enum class PivotOutcome { Optimal, Unbounded };

  static constexpr double kPivotTol = 1e-12;
  static constexpr double kReducedCostTol = 1e-9;
  static constexpr long kMaxIterations = 200000;

  const LpProblem& p_;
  int n_ = 0;           // structural (shifted) variables
  int m_ = 0;           // rows, including bound rows
  int num_slack_ = 0;
  int num_art_ = 0;
  int ncols_ = 0;       // structural + slack + artificial
  int first_art_ = 0;
  std::vector<double> tab_;    // (m_+1) x (ncols_+1); row 0 = objective row
  std::vector<int> basis_;     // basis_[i] = column basic in row i (1-based rows)
  std::vector<double> shift_;  // lower bounds

  double& at(int r, int c) { return tab_[static_cast<std::size_t>(r) * (ncols_ + 1) + c]; }
  double at(int r, int c) const { return tab_[static_cast<std::size_t>(r) * (ncols_ + 1) + c]; }
  double& rhs(int r) { return at(r, ncols_); }
  double obj_value() const { return at(0, ncols_); }

  struct NormRow {
    std::vector<double> a;
    Sense sense;
    double b;
  };

  void build() {
    n_ = p_.num_vars;
    shift_ = p_.lower;

    std::vector<NormRow> rows;
    rows.reserve(p_.rows.size() + n_);
    for (const LpProblem::Row& r : p_.rows) {
      NormRow nr{r.coeffs, r.sense, r.rhs - dot(r.coeffs, shift_)};
      rows.push_back(std::move(nr));
    }
    // Upper bounds as explicit rows on the shifted variables.
    for (int j = 0; j < n_; ++j) {
      NormRow nr;
      nr.a.assign(n_, 0.0);
      nr.a[j] = 1.0;
      nr.sense = Sense::Le;
      nr.b = p_.upper[j] - p_.lower[j];
      rows.push_back(std::move(nr));
    }
    // Normalize to rhs >= 0.
    for (NormRow& r : rows) {
      if (r.b < 0.0) {
        for (double& a : r.a) a = -a;
        r.b = -r.b;
        if (r.sense == Sense::Le) r.sense = Sense::Ge;
        else if (r.sense == Sense::Ge) r.sense = Sense::Le;
      }
    }
    m_ = static_cast<int>(rows.size());

    num_slack_ = 0;
    num_art_ = 0;
    for (const NormRow& r : rows) {
      if (r.sense != Sense::Eq) ++num_slack_;
      if (r.sense != Sense::Le) ++num_art_;
    }
    ncols_ = n_ + num_slack_ + num_art_;
    first_art_ = n_ + num_slack_;
    tab_.assign(static_cast<std::size_t>(m_ + 1) * (ncols_ + 1), 0.0);
    basis_.assign(m_ + 1, -1);

    int slack = n_;
    int art = first_art_;
    for (int i = 0; i < m_; ++i) {
      const NormRow& r = rows[i];
      const int row = i + 1;
      for (int j = 0; j < n_; ++j) at(row, j) = r.a[j];
      rhs(row) = r.b;
      if (r.sense == Sense::Le) {
        at(row, slack) = 1.0;
        basis_[row] = slack++;
      } else if (r.sense == Sense::Ge) {
        at(row, slack) = -1.0;
        ++slack;
        at(row, art) = 1.0;
        basis_[row] = art++;
      } else {
        at(row, art) = 1.0;
        basis_[row] = art++;
      }
    }
  }

  // Price out the basic columns so row 0 has zeros under the basis.
  void price_out() {
    for (int i = 1; i <= m_; ++i) {
      const double f = at(0, basis_[i]);
      if (f != 0.0) {
        for (int j = 0; j <= ncols_; ++j) at(0, j) -= f * at(i, j);
      }
    }
  }

  void load_phase1_objective() {
    for (int j = 0; j <= ncols_; ++j) at(0, j) = 0.0;
    for (int j = first_art_; j < ncols_; ++j) at(0, j) = 1.0;  // maximize -sum a
    price_out();
  }

  void load_phase2_objective() {
    for (int j = 0; j <= ncols_; ++j) at(0, j) = 0.0;
    for (int j = 0; j < n_; ++j) at(0, j) = -p_.objective[j];
    price_out();
  }

  PivotOutcome iterate(bool allow_artificial_entering) {
    const int limit = allow_artificial_entering ? ncols_ : first_art_;
    for (long it = 0; it < kMaxIterations; ++it) {
      // Bland: entering column = smallest index with improving reduced cost.
      int enter = -1;
      for (int j = 0; j < limit; ++j) {
        if (at(0, j) < -kReducedCostTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return PivotOutcome::Optimal;

      // Ratio test; ties resolved by smallest basic variable index (Bland).
      int leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      bool tiny_pivot_only = false;
      for (int i = 1; i <= m_; ++i) {
        const double a = at(i, enter);
        if (a > kPivotTol) {
          const double ratio = rhs(i) / a;
          if (ratio < best_ratio - 0.0 ||
              (ratio == best_ratio && leave >= 1 && basis_[i] < basis_[leave])) {
            best_ratio = ratio;
            leave = i;
          }
        } else if (a > 0.0) {
          tiny_pivot_only = true;
        }
      }
      if (leave < 0) {
        if (tiny_pivot_only)
          throw LpError("simplex: pivot below 1e-12 with no alternative");
        return PivotOutcome::Unbounded;
      }
      pivot(leave, enter);
    }
    throw LpError("simplex: iteration limit exceeded");
  }

  void pivot(int prow, int pcol) {
    const double piv = at(prow, pcol);
    if (!(std::fabs(piv) > kPivotTol)) throw LpError("simplex: degenerate pivot element");
    const double inv = 1.0 / piv;
    for (int j = 0; j <= ncols_; ++j) at(prow, j) *= inv;
    at(prow, pcol) = 1.0;  // clean exact unit
    for (int i = 0; i <= m_; ++i) {
      if (i == prow) continue;
      const double f = at(i, pcol);
      if (f != 0.0) {
        for (int j = 0; j <= ncols_; ++j) at(i, j) -= f * at(prow, j);
        at(i, pcol) = 0.0;
      }
    }
    basis_[prow] = pcol;
  }

  // After phase 1, pivot basic artificials out where possible; a row whose
  // non-artificial entries are all ~0 is redundant and its artificial stays
  // basic at value zero, untouched by later pivots.
  void drive_out_artificials() {
    for (int i = 1; i <= m_; ++i) {
      if (basis_[i] < first_art_) continue;
      int col = -1;
      for (int j = 0; j < first_art_; ++j) {
        if (std::fabs(at(i, j)) > kPivotTol) {
          col = j;
          break;
        }
      }
      if (col >= 0) pivot(i, col);
    }
  }

  LpResult extract() {
    std::vector<double> y(ncols_, 0.0);
    for (int i = 1; i <= m_; ++i) {
      if (rhs(i) < -1e-7) throw LpError("simplex: negative basic value (internal error)");
      y[basis_[i]] = rhs(i);
    }
    for (int j = first_art_; j < ncols_; ++j) {
      if (y[j] > kLpFeasTol) throw LpError("simplex: artificial left basic (internal error)");
    }
    LpResult res;
    res.status = LpStatus::Optimal;
    res.solution.resize(n_);
    for (int j = 0; j < n_; ++j) {
      const double v = y[j] + shift_[j];
      if (!std::isfinite(v)) throw LpError("simplex: non-finite solution value");
      res.solution[j] = v;
    }
    res.objective = dot(p_.objective, res.solution);
    if (!std::isfinite(res.objective)) throw LpError("simplex: non-finite objective");
    return res;
  }
};

}  // namespace detail

// Deterministic LP solve: identical input bits give identical output bits.
inline LpResult solve_lp(const LpProblem& p) {
  detail::SimplexTableau t(p);
  return t.solve();
}

// True iff every masked coordinate is within tol of an integer.
inline bool is_integral(std::span<const double> x, std::span<const std::uint8_t> mask,
                        double tol = kIntegralityTol) {
  if (x.size() != mask.size()) throw std::invalid_argument("is_integral: size mismatch");
  if (!(tol > 0.0)) throw std::invalid_argument("is_integral: tol must be positive");
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!mask[j]) continue;
    if (std::fabs(x[j] - std::round(x[j])) > tol) return false;
  }
  return true;
}

// Independent test oracle: enumerates every intersection of num_vars active
// hyperplanes (constraint rows and bounds), keeps the feasible ones, and
// returns the best. Only for tiny problems.
inline LpResult brute_force_lp(const LpProblem& p) {
  p.validate();
  const int n = p.num_vars;
  if (n > 8 || p.rows.size() > 10)
    throw std::invalid_argument("brute_force_lp: size guard (num_vars <= 8, rows <= 10)");
  if (n == 0) {
    // Feasibility is decided by the constant rows alone.
    for (const auto& r : p.rows) {
      const bool ok = (r.sense == Sense::Le && 0.0 <= r.rhs + kLpFeasTol) ||
                      (r.sense == Sense::Ge && 0.0 >= r.rhs - kLpFeasTol) ||
                      (r.sense == Sense::Eq && std::fabs(r.rhs) <= kLpFeasTol);
      if (!ok) return {LpStatus::Infeasible, 0.0, {}};
    }
    return {LpStatus::Optimal, 0.0, {}};
  }

  // Hyperplane set: every row as an equality, plus both bounds per variable.
  struct Plane {
    std::vector<double> a;
    double b;
  };
  std::vector<Plane> planes;
  for (const auto& r : p.rows) planes.push_back({r.coeffs, r.rhs});
  for (int j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = 1.0;
    planes.push_back({e, p.lower[j]});
    planes.push_back({e, p.upper[j]});
  }

  auto feasible = [&](const std::vector<double>& x) {
    for (int j = 0; j < n; ++j) {
      if (x[j] < p.lower[j] - 1e-7 || x[j] > p.upper[j] + 1e-7) return false;
    }
    for (const auto& r : p.rows) {
      const double v = detail::dot(r.coeffs, x);
      if (r.sense == Sense::Le && v > r.rhs + 1e-7) return false;
      if (r.sense == Sense::Ge && v < r.rhs - 1e-7) return false;
      if (r.sense == Sense::Eq && std::fabs(v - r.rhs) > 1e-7) return false;
    }
    return true;
  };

  bool any = false;
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> best_x;

  const int np = static_cast<int>(planes.size());
  std::vector<int> pick(n);
  std::vector<double> mat;  // n x (n+1) augmented system
  std::vector<double> x(n);

  auto solve_system = [&]() -> bool {
    for (int r = 0; r < n; ++r) {
      const Plane& pl = planes[pick[r]];
      for (int c = 0; c < n; ++c) mat[r * (n + 1) + c] = pl.a[c];
      mat[r * (n + 1) + n] = pl.b;
    }
    for (int col = 0; col < n; ++col) {
      int prow = col;
      double pv = std::fabs(mat[col * (n + 1) + col]);
      for (int r = col + 1; r < n; ++r) {
        const double v = std::fabs(mat[r * (n + 1) + col]);
        if (v > pv) {
          pv = v;
          prow = r;
        }
      }
      if (pv < 1e-10) return false;  // singular selection
      if (prow != col) {
        for (int c = col; c <= n; ++c) std::swap(mat[prow * (n + 1) + c], mat[col * (n + 1) + c]);
      }
      const double inv = 1.0 / mat[col * (n + 1) + col];
      for (int r = 0; r < n; ++r) {
        if (r == col) continue;
        const double f = mat[r * (n + 1) + col] * inv;
        if (f != 0.0) {
          for (int c = col; c <= n; ++c) mat[r * (n + 1) + c] -= f * mat[col * (n + 1) + c];
        }
      }
    }
    for (int r = 0; r < n; ++r) x[r] = mat[r * (n + 1) + n] / mat[r * (n + 1) + r];
    return true;
  };

  mat.assign(static_cast<std::size_t>(n) * (n + 1), 0.0);

  // Iterate over all n-subsets of planes.
  for (int i = 0; i < n; ++i) pick[i] = i;
  if (np >= n) {
    while (true) {
      if (solve_system() && feasible(x)) {
        any = true;
        const double obj = detail::dot(p.objective, x);
        if (obj > best) {
          best = obj;
          best_x = x;
        }
      }
      int i = n - 1;
      while (i >= 0 && pick[i] == np - n + i) --i;
      if (i < 0) break;
      ++pick[i];
      for (int j = i + 1; j < n; ++j) pick[j] = pick[j - 1] + 1;
    }
  }

  if (!any) return {LpStatus::Infeasible, 0.0, {}};
  return {LpStatus::Optimal, best, best_x};
}

}  // namespace bctree
