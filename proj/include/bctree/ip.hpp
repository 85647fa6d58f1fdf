#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bctree/lp.hpp"

namespace bctree {

enum class RowOrigin { Original, Branch, Cut };

inline const char* to_string(RowOrigin o) {
  switch (o) {
    case RowOrigin::Original: return "orig";
    case RowOrigin::Branch: return "branch";
    case RowOrigin::Cut: return "cut";
  }
  return "?";
}

struct LinearConstraint {
  std::vector<double> coeffs;
  Sense sense = Sense::Le;
  double rhs = 0.0;
  RowOrigin origin = RowOrigin::Original;

  bool operator==(const LinearConstraint&) const = default;
};

// Integer disjunction pi'x <= pi0  or  pi'x >= pi0 + 1.
struct Disjunction {
  std::vector<long long> pi;
  long long pi0 = 0;

  bool operator==(const Disjunction&) const = default;

  void validate(long long coeff_cap = 0) const {
    bool nonzero = false;
    for (long long v : pi) {
      if (v != 0) nonzero = true;
      if (coeff_cap > 0 && std::llabs(v) > coeff_cap)
        throw std::invalid_argument("Disjunction: coefficient exceeds cap");
    }
    if (!nonzero) throw std::invalid_argument("Disjunction: pi must not be all zero");
  }
};

// Maximization IP with variables in {0, ..., var_upper[j]} (lower bound 0).
struct IpInstance {
  int num_vars = 0;
  std::vector<double> objective;
  std::vector<LinearConstraint> constraints;
  std::vector<long long> var_upper;
  std::vector<std::uint8_t> integral;

  bool operator==(const IpInstance&) const = default;

  void validate() const {
    if (num_vars < 0) throw std::invalid_argument("IpInstance: negative num_vars");
    if (static_cast<int>(objective.size()) != num_vars ||
        static_cast<int>(var_upper.size()) != num_vars ||
        static_cast<int>(integral.size()) != num_vars)
      throw std::invalid_argument("IpInstance: vector length != num_vars");
    for (double c : objective)
      if (!std::isfinite(c)) throw std::invalid_argument("IpInstance: non-finite objective");
    for (long long u : var_upper)
      if (u < 0) throw std::invalid_argument("IpInstance: negative var_upper");
    for (const LinearConstraint& r : constraints) {
      if (static_cast<int>(r.coeffs.size()) != num_vars)
        throw std::invalid_argument("IpInstance: row length != num_vars");
      if (!std::isfinite(r.rhs)) throw std::invalid_argument("IpInstance: non-finite rhs");
      for (double a : r.coeffs)
        if (!std::isfinite(a)) throw std::invalid_argument("IpInstance: non-finite coefficient");
    }
  }

  bool all_integral() const {
    for (std::uint8_t m : integral)
      if (!m) return false;
    return true;
  }
};

// LP relaxation: integrality dropped, bounds [0, var_upper].
inline LpProblem relax(const IpInstance& ip) {
  ip.validate();
  LpProblem p;
  p.num_vars = ip.num_vars;
  p.objective = ip.objective;
  p.lower.assign(ip.num_vars, 0.0);
  p.upper.resize(ip.num_vars);
  for (int j = 0; j < ip.num_vars; ++j) p.upper[j] = static_cast<double>(ip.var_upper[j]);
  p.rows.reserve(ip.constraints.size());
  for (const LinearConstraint& r : ip.constraints) p.rows.push_back({r.coeffs, r.sense, r.rhs});
  return p;
}

enum class BranchSide { Down, Up };

// Appends the branch row for one side of a disjunction; parent is unchanged.
inline IpInstance apply_branch(const IpInstance& ip, const Disjunction& d, BranchSide side) {
  if (static_cast<int>(d.pi.size()) != ip.num_vars)
    throw std::invalid_argument("apply_branch: disjunction dimension mismatch");
  d.validate();
  IpInstance child = ip;
  LinearConstraint row;
  row.coeffs.resize(ip.num_vars);
  for (int j = 0; j < ip.num_vars; ++j) row.coeffs[j] = static_cast<double>(d.pi[j]);
  row.origin = RowOrigin::Branch;
  if (side == BranchSide::Down) {
    row.sense = Sense::Le;
    row.rhs = static_cast<double>(d.pi0);
  } else {
    row.sense = Sense::Ge;
    row.rhs = static_cast<double>(d.pi0 + 1);
  }
  child.constraints.push_back(std::move(row));
  return child;
}

struct IpSolveResult {
  LpStatus status = LpStatus::Infeasible;  // Optimal or Infeasible
  double objective = 0.0;
  std::vector<long long> solution;
};

inline bool satisfies(const IpInstance& ip, std::span<const long long> x, double tol = 1e-9) {
  for (int j = 0; j < ip.num_vars; ++j) {
    if (x[j] < 0 || x[j] > ip.var_upper[j]) return false;
  }
  for (const LinearConstraint& r : ip.constraints) {
    double v = 0.0;
    for (int j = 0; j < ip.num_vars; ++j) v += r.coeffs[j] * static_cast<double>(x[j]);
    if (r.sense == Sense::Le && v > r.rhs + tol) return false;
    if (r.sense == Sense::Ge && v < r.rhs - tol) return false;
    if (r.sense == Sense::Eq && std::fabs(v - r.rhs) > tol) return false;
  }
  return true;
}

// Ground-truth oracle: full enumeration of integral assignments.
inline IpSolveResult brute_force_ip(const IpInstance& ip) {
  ip.validate();
  if (!ip.all_integral())
    throw std::invalid_argument("brute_force_ip: requires a fully integral instance");
  double count = 1.0;
  for (long long u : ip.var_upper) {
    count *= static_cast<double>(u + 1);
    if (count > static_cast<double>(1 << 20))
      throw std::invalid_argument("brute_force_ip: size guard (assignments > 2^20)");
  }

  IpSolveResult res;
  std::vector<long long> x(ip.num_vars, 0);
  bool any = false;
  while (true) {
    if (satisfies(ip, x)) {
      double obj = 0.0;
      for (int j = 0; j < ip.num_vars; ++j) obj += ip.objective[j] * static_cast<double>(x[j]);
      if (!any || obj > res.objective) {
        res.objective = obj;
        res.solution = x;
      }
      any = true;
    }
    int j = 0;
    while (j < ip.num_vars && x[j] == ip.var_upper[j]) x[j++] = 0;
    if (j == ip.num_vars) break;
    ++x[j];
  }
  res.status = any ? LpStatus::Optimal : LpStatus::Infeasible;
  return res;
}

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, end);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline double parse_double(std::string_view tok, int line, const char* field) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size())
    throw ParseError("line " + std::to_string(line) + ": bad number in " + field);
  if (!std::isfinite(v))
    throw ParseError("line " + std::to_string(line) + ": non-finite value in " + field);
  return v;
}

inline long long parse_int(std::string_view tok, int line, const char* field) {
  long long v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size())
    throw ParseError("line " + std::to_string(line) + ": bad integer in " + field);
  return v;
}

}  // namespace detail

// Line-oriented text format (documented in the README); '#' lines are
// comments and not part of the structural representation.
inline std::string write_instance(const IpInstance& ip) {
  ip.validate();
  std::ostringstream os;
  os << "IP v1\n";
  os << "vars " << ip.num_vars << "\n";
  os << "maximize";
  for (double c : ip.objective) os << " " << detail::format_double(c);
  os << "\n";
  os << "upper";
  for (long long u : ip.var_upper) os << " " << u;
  os << "\n";
  os << "integral";
  for (std::uint8_t m : ip.integral) os << " " << (m ? 1 : 0);
  os << "\n";
  for (const LinearConstraint& r : ip.constraints) {
    os << "row " << to_string(r.sense) << " " << detail::format_double(r.rhs);
    for (double a : r.coeffs) os << " " << detail::format_double(a);
    os << " " << to_string(r.origin) << "\n";
  }
  return os.str();
}

inline IpInstance read_instance(std::istream& in) {
  IpInstance ip;
  std::string line;
  int lineno = 0;
  int stage = 0;  // 0=header 1=vars 2=maximize 3=upper 4=integral 5=rows

  auto next_line = [&](std::string& out) -> bool {
    while (std::getline(in, out)) {
      ++lineno;
      if (!out.empty() && out.back() == '\r') out.pop_back();
      std::size_t i = 0;
      while (i < out.size() && (out[i] == ' ' || out[i] == '\t')) ++i;
      if (i == out.size()) continue;       // blank
      if (out[i] == '#') continue;         // comment
      return true;
    }
    return false;
  };

  while (next_line(line)) {
    auto toks = detail::split_ws(line);
    switch (stage) {
      case 0:
        if (toks.size() != 2 || toks[0] != "IP" || toks[1] != "v1")
          throw ParseError("line " + std::to_string(lineno) + ": expected header 'IP v1'");
        stage = 1;
        break;
      case 1: {
        if (toks.size() != 2 || toks[0] != "vars")
          throw ParseError("line " + std::to_string(lineno) + ": expected 'vars <n>'");
        const long long n = detail::parse_int(toks[1], lineno, "vars");
        if (n < 1 || n > 1000000)
          throw ParseError("line " + std::to_string(lineno) + ": vars out of range");
        ip.num_vars = static_cast<int>(n);
        stage = 2;
        break;
      }
      case 2: {
        if (toks.empty() || toks[0] != "maximize")
          throw ParseError("line " + std::to_string(lineno) + ": expected 'maximize ...'");
        if (static_cast<int>(toks.size()) - 1 != ip.num_vars)
          throw ParseError("line " + std::to_string(lineno) + ": maximize needs " +
                           std::to_string(ip.num_vars) + " coefficients");
        for (int j = 0; j < ip.num_vars; ++j)
          ip.objective.push_back(detail::parse_double(toks[j + 1], lineno, "maximize"));
        stage = 3;
        break;
      }
      case 3: {
        if (toks.empty() || toks[0] != "upper")
          throw ParseError("line " + std::to_string(lineno) + ": expected 'upper ...'");
        if (static_cast<int>(toks.size()) - 1 != ip.num_vars)
          throw ParseError("line " + std::to_string(lineno) + ": upper needs " +
                           std::to_string(ip.num_vars) + " entries");
        for (int j = 0; j < ip.num_vars; ++j)
          ip.var_upper.push_back(detail::parse_int(toks[j + 1], lineno, "upper"));
        stage = 4;
        break;
      }
      case 4: {
        if (toks.empty() || toks[0] != "integral")
          throw ParseError("line " + std::to_string(lineno) + ": expected 'integral ...'");
        if (static_cast<int>(toks.size()) - 1 != ip.num_vars)
          throw ParseError("line " + std::to_string(lineno) + ": integral needs " +
                           std::to_string(ip.num_vars) + " entries");
        for (int j = 0; j < ip.num_vars; ++j) {
          const long long v = detail::parse_int(toks[j + 1], lineno, "integral");
          if (v != 0 && v != 1)
            throw ParseError("line " + std::to_string(lineno) + ": integral mask must be 0/1");
          ip.integral.push_back(static_cast<std::uint8_t>(v));
        }
        stage = 5;
        break;
      }
      case 5: {
        if (toks.empty() || toks[0] != "row")
          throw ParseError("line " + std::to_string(lineno) + ": expected 'row ...'");
        if (static_cast<int>(toks.size()) != 4 + ip.num_vars)
          throw ParseError("line " + std::to_string(lineno) + ": row needs sense, rhs, " +
                           std::to_string(ip.num_vars) + " coefficients, origin");
        LinearConstraint r;
        if (toks[1] == "le") r.sense = Sense::Le;
        else if (toks[1] == "ge") r.sense = Sense::Ge;
        else if (toks[1] == "eq") r.sense = Sense::Eq;
        else throw ParseError("line " + std::to_string(lineno) + ": unknown sense");
        r.rhs = detail::parse_double(toks[2], lineno, "row rhs");
        for (int j = 0; j < ip.num_vars; ++j)
          r.coeffs.push_back(detail::parse_double(toks[3 + j], lineno, "row"));
        const auto& otok = toks[3 + ip.num_vars];
        if (otok == "orig") r.origin = RowOrigin::Original;
        else if (otok == "branch") r.origin = RowOrigin::Branch;
        else if (otok == "cut") r.origin = RowOrigin::Cut;
        else throw ParseError("line " + std::to_string(lineno) + ": unknown origin");
        ip.constraints.push_back(std::move(r));
        break;
      }
    }
  }
  if (stage < 5) throw ParseError("truncated instance: stopped before stage " + std::to_string(stage + 1));
  ip.validate();
  return ip;
}

inline IpInstance read_instance(const std::string& text) {
  std::istringstream is(text);
  return read_instance(is);
}

}  // namespace bctree
