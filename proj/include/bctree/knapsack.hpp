#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "bctree/actions.hpp"
#include "bctree/ip.hpp"
#include "bctree/rng.hpp"
#include "bctree/version.hpp"

namespace bctree {

// Multiple-knapsack instance family: weights drawn as floor(N(mean, sd)),
// sorted descending; values equal the weights ("chvatal") or the reversed
// weights ("reverse chvatal"); capacities W_k = floor(sum w / 2|K|) + (k-1).
struct KnapsackSpec {
  int num_items = 10;
  int num_knapsacks = 2;
  bool reverse = false;
  std::uint64_t seed = 0;
  double weight_mean = 50.0;
  double weight_sd = 2.0;

  void validate() const {
    if (num_items < 1 || num_knapsacks < 1)
      throw std::invalid_argument("KnapsackSpec: need at least one item and one knapsack");
    if (!(weight_sd >= 0.0)) throw std::invalid_argument("KnapsackSpec: negative sd");
  }
};

// The generated IP plus the knapsack structure the cover-cut separator needs.
// Variables are knapsack-major: x[k*num_items + i] assigns item i to sack k.
struct KnapsackInstance {
  IpInstance ip;
  std::vector<long long> weights;     // descending
  std::vector<long long> values;      // per item
  std::vector<long long> capacities;  // per knapsack
  int num_items = 0;
  int num_knapsacks = 0;
  bool reverse = false;

  int var(int knapsack, int item) const { return knapsack * num_items + item; }
};

inline KnapsackInstance generate_knapsack(const KnapsackSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  std::vector<long long> w(spec.num_items);
  for (long long& wi : w) {
    do {
      wi = static_cast<long long>(std::floor(rng.next_normal(spec.weight_mean, spec.weight_sd)));
    } while (wi <= 0);  // redraw guard: weights must stay positive
  }
  std::stable_sort(w.begin(), w.end(), std::greater<>());

  const int n = spec.num_items;
  const int k = spec.num_knapsacks;
  std::vector<long long> p(n);
  for (int i = 0; i < n; ++i) p[i] = spec.reverse ? w[n - 1 - i] : w[i];

  const long long total = std::accumulate(w.begin(), w.end(), 0LL);
  std::vector<long long> cap(k);
  for (int j = 0; j < k; ++j) cap[j] = total / (2 * k) + j;

  KnapsackInstance out;
  out.weights = w;
  out.values = p;
  out.capacities = cap;
  out.num_items = n;
  out.num_knapsacks = k;
  out.reverse = spec.reverse;

  IpInstance& ip = out.ip;
  ip.num_vars = n * k;
  ip.objective.resize(ip.num_vars);
  for (int kk = 0; kk < k; ++kk)
    for (int i = 0; i < n; ++i) ip.objective[out.var(kk, i)] = static_cast<double>(p[i]);
  ip.var_upper.assign(ip.num_vars, 1);
  ip.integral.assign(ip.num_vars, 1);

  // Capacity rows, then assignment rows.
  for (int kk = 0; kk < k; ++kk) {
    LinearConstraint r;
    r.coeffs.assign(ip.num_vars, 0.0);
    for (int i = 0; i < n; ++i) r.coeffs[out.var(kk, i)] = static_cast<double>(w[i]);
    r.sense = Sense::Le;
    r.rhs = static_cast<double>(cap[kk]);
    ip.constraints.push_back(std::move(r));
  }
  for (int i = 0; i < n; ++i) {
    LinearConstraint r;
    r.coeffs.assign(ip.num_vars, 0.0);
    for (int kk = 0; kk < k; ++kk) r.coeffs[out.var(kk, i)] = 1.0;
    r.sense = Sense::Le;
    r.rhs = 1.0;
    ip.constraints.push_back(std::move(r));
  }
  ip.validate();
  return out;
}

// Instance text with the knapsack structure recorded in comment lines, so a
// solve run on the file can rebuild the cover-cut pool. Comments are not part
// of the structural representation and round-trip away.
inline std::string write_knapsack_instance(const KnapsackInstance& inst,
                                           std::uint64_t seed = 0) {
  std::ostringstream os;
  os << "# generator: " << kGeneratorVersion << " seed=" << seed << "\n";
  os << "# knapsack items=" << inst.num_items << " knapsacks=" << inst.num_knapsacks
     << " reverse=" << (inst.reverse ? 1 : 0) << "\n";
  os << "# weights:";
  for (long long w : inst.weights) os << " " << w;
  os << "\n# capacities:";
  for (long long c : inst.capacities) os << " " << c;
  os << "\n" << write_instance(inst.ip);
  return os.str();
}

// Parses an instance file; the knapsack metadata comments are optional and
// absent for hand-written plain IPs.
inline std::optional<KnapsackInstance> read_knapsack_metadata(const std::string& text) {
  KnapsackInstance inst;
  bool have_header = false, have_weights = false, have_caps = false;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    auto toks = detail::split_ws(line);
    if (toks.empty() || toks[0] != "#") continue;
    if (toks.size() >= 2 && toks[1] == "knapsack") {
      for (std::size_t i = 2; i < toks.size(); ++i) {
        const std::string_view t = toks[i];
        auto eq = t.find('=');
        if (eq == std::string_view::npos) continue;
        const std::string_view key = t.substr(0, eq);
        const long long v = detail::parse_int(t.substr(eq + 1), 0, "knapsack metadata");
        if (key == "items") inst.num_items = static_cast<int>(v);
        else if (key == "knapsacks") inst.num_knapsacks = static_cast<int>(v);
        else if (key == "reverse") inst.reverse = v != 0;
      }
      have_header = true;
    } else if (toks.size() >= 2 && toks[1] == "weights:") {
      for (std::size_t i = 2; i < toks.size(); ++i)
        inst.weights.push_back(detail::parse_int(toks[i], 0, "weights"));
      have_weights = true;
    } else if (toks.size() >= 2 && toks[1] == "capacities:") {
      for (std::size_t i = 2; i < toks.size(); ++i)
        inst.capacities.push_back(detail::parse_int(toks[i], 0, "capacities"));
      have_caps = true;
    }
  }
  if (!have_header || !have_weights || !have_caps) return std::nullopt;
  if (static_cast<int>(inst.weights.size()) != inst.num_items ||
      static_cast<int>(inst.capacities.size()) != inst.num_knapsacks)
    throw ParseError("knapsack metadata: inconsistent dimensions");
  inst.ip = read_instance(text);
  if (inst.ip.num_vars != inst.num_items * inst.num_knapsacks)
    throw ParseError("knapsack metadata: variable count mismatch");
  inst.values.resize(inst.num_items);
  for (int i = 0; i < inst.num_items; ++i)
    inst.values[i] = static_cast<long long>(inst.ip.objective[i]);
  return inst;
}

// Extended cover cuts. For each knapsack k and start item i, take the minimal
// j > i with w_i + ... + w_j > W_k; C = {i..j} is then a minimal cover (the
// weights are descending) and sum_{l<=j} x_{k,l} <= |C|-1 dominates the plain
// cover cut. Emitted k-major, i-minor, deduplicated. The pool depends only on
// the root structure, so it is trivially path-wise.
inline std::vector<Cut> extended_cover_cuts(const KnapsackInstance& inst) {
  std::vector<Cut> pool;
  const int n = inst.num_items;
  for (int k = 0; k < inst.num_knapsacks; ++k) {
    const long long cap = inst.capacities[k];
    for (int i = 0; i < n; ++i) {
      long long sum = inst.weights[i];
      int j = -1;
      for (int t = i + 1; t < n; ++t) {
        sum += inst.weights[t];
        if (sum > cap) {
          j = t;
          break;
        }
      }
      if (j < 0) continue;
      // Minimality: dropping the lightest member must close the cover. Fails
      // only when w_i alone exceeds the capacity; skip those starts.
      if (sum - inst.weights[j] > cap) continue;
      Cut c;
      c.alpha.assign(inst.ip.num_vars, 0.0);
      for (int t = 0; t <= j; ++t) c.alpha[inst.var(k, t)] = 1.0;
      c.beta = static_cast<double>(j - i);  // |C| - 1
      bool dup = false;
      for (const Cut& seen : pool)
        if (seen == c) {
          dup = true;
          break;
        }
      if (!dup) pool.push_back(std::move(c));
    }
  }
  return pool;
}

}  // namespace bctree
