// bctree: branch-and-cut engine and experiment harness CLI.
//
// Subcommands: generate, solve, sweep, verify-pieces, verify-subtree,
// bounds, gap, jeroslow. Artifacts are byte-deterministic for a fixed seed;
// manifest.json records run metadata (it carries wall time, so it is the one
// file excluded from byte-for-byte comparisons).

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "bctree/bnc.hpp"
#include "bctree/experiments.hpp"
#include "bctree/knapsack.hpp"
#include "bctree/svg.hpp"
#include "bctree/version.hpp"
#include "bctree/worker.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace bctree;

namespace {

struct GlobalOpts {
  std::uint64_t seed = 0;
  std::string out_dir;
  int jobs = default_jobs();
  bool svg = false;
  bool dry_run = false;
};

class Manifest {
 public:
  Manifest(std::string subcommand, const GlobalOpts& g)
      : start_(std::chrono::steady_clock::now()) {
    doc_["subcommand"] = std::move(subcommand);
    doc_["seed"] = g.seed;
    doc_["jobs"] = g.jobs;
    doc_["engine_version"] = kEngineVersion;
    doc_["artifacts"] = json::array();
    doc_["flags"] = json::object();
  }

  void flag(const std::string& name, const json& value) { doc_["flags"][name] = value; }
  void artifact(const fs::path& p) { doc_["artifacts"].push_back(p.string()); }

  void write(const fs::path& dir) {
    const auto elapsed = std::chrono::steady_clock::now() - start_;
    doc_["wall_time_s"] = std::chrono::duration<double>(elapsed).count();
    std::ofstream out(dir / "manifest.json");
    out << doc_.dump(2) << "\n";
  }

 private:
  json doc_;
  std::chrono::steady_clock::time_point start_;
};

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + p.string());
  out << content;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path ensure_out_dir(const GlobalOpts& g) {
  const fs::path dir = g.out_dir.empty() ? fs::path(".") : fs::path(g.out_dir);
  fs::create_directories(dir);
  return dir;
}

std::pair<ScoreRuleId, ScoreRuleId> parse_rule_pair(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos)
    throw CLI::ValidationError("rule pair must be '<rule>,<rule>': " + s);
  return {parse_rule(s.substr(0, comma)), parse_rule(s.substr(comma + 1))};
}

ScorePairKind parse_pair_kind(const std::string& s) {
  if (s == "ep") return ScorePairKind::EP;
  if (s == "ed") return ScorePairKind::ED;
  if (s == "dp") return ScorePairKind::DP;
  throw CLI::ValidationError("--pair must be one of ep, ed, dp");
}

std::string bigint_str(const BigInt& v) { return v.str(); }

// --config <json>: every flag may also come from a JSON object; explicit
// command-line flags win (TakeLast policy, config flags injected first).
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::vector<std::string> bare;
  std::vector<std::string> injected;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw std::runtime_error("--config needs a file argument");
      const json cfg = json::parse(read_file(args[i + 1]));
      if (!cfg.is_object()) throw std::runtime_error("--config: expected a JSON object");
      for (const auto& [key, value] : cfg.items()) {
        std::string v;
        if (value.is_boolean()) v = value.get<bool>() ? "true" : "false";
        else if (value.is_string()) v = value.get<std::string>();
        else if (value.is_array()) {
          std::string joined;
          for (const auto& e : value) {
            if (!joined.empty()) joined += ",";
            joined += e.is_string() ? e.get<std::string>() : e.dump();
          }
          v = joined;
        } else {
          v = value.dump();
        }
        injected.push_back("--" + key + "=" + v);
      }
      ++i;  // skip the filename
      continue;
    }
    bare.push_back(args[i]);
  }
  std::vector<std::string> final_args;
  if (!bare.empty()) {
    final_args.push_back(bare[0]);  // subcommand stays first
    final_args.insert(final_args.end(), injected.begin(), injected.end());
    final_args.insert(final_args.end(), bare.begin() + 1, bare.end());
  } else {
    final_args = injected;
  }
  return final_args;
}

struct ProtocolOpts {
  double mu_branch = 1.0;
  double mu_cut = 0.5;
  double lambda = 1.0;
  std::string branch_mode = "single";
  int cuts_per_node = 2;
  int depth_limit = 0;
  long node_cap = 1000000;
  std::string branch_pair = "mostfrac,mostfrac";
  std::string cut_pair = "efficacy,parallelism";
  std::string nscore_pair = "bestbound,depth";

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--mu-branch", mu_branch, "branch-score mixing weight")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--mu-cut", mu_cut, "cut-score mixing weight")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--lambda", lambda, "node-score mixing weight")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--branch-mode", branch_mode, "single | multi | disj")
        ->check(CLI::IsMember({"single", "multi", "disj"}));
    cmd->add_option("--cuts-per-node", cuts_per_node, "cuts added per node (0, 1 or 2)")
        ->check(CLI::Range(0, 2));
    cmd->add_option("--depth-limit", depth_limit, "depth limit (0 = num_vars + 2)");
    cmd->add_option("--node-cap", node_cap, "safety cap on created nodes");
    cmd->add_option("--branch-pair", branch_pair, "branch rule pair 'r1,r2'");
    cmd->add_option("--cut-pair", cut_pair, "cut rule pair 'r1,r2'");
    cmd->add_option("--nscore-pair", nscore_pair, "node rule pair 'r1,r2'");
  }

  RunProtocol to_protocol(int num_vars) const {
    RunProtocol p;
    p.mu_branch = mu_branch;
    p.mu_cut = mu_cut;
    p.lambda = lambda;
    p.cuts_per_node = cuts_per_node;
    p.depth_limit = depth_limit;
    p.node_cap = node_cap;
    p.branch_pair = parse_rule_pair(branch_pair);
    p.cut_pair = parse_rule_pair(cut_pair);
    p.nscore_pair = parse_rule_pair(nscore_pair);
    if (branch_mode == "single") {
      p.branch_mode = BranchMode::SingleVariable;
    } else if (branch_mode == "multi") {
      // singletons plus the full variable set
      p.branch_mode = BranchMode::MultiVariable;
      for (int j = 0; j < num_vars; ++j) p.subsets.push_back({j});
      std::vector<int> all(static_cast<std::size_t>(num_vars));
      for (int j = 0; j < num_vars; ++j) all[static_cast<std::size_t>(j)] = j;
      p.subsets.push_back(all);
    } else {
      // general disjunctions: unit vectors plus the all-ones vector
      p.branch_mode = BranchMode::GeneralDisjunction;
      for (int j = 0; j < num_vars; ++j) {
        std::vector<long long> pi(static_cast<std::size_t>(num_vars), 0);
        pi[static_cast<std::size_t>(j)] = 1;
        p.disjunctions.push_back(std::move(pi));
      }
      p.disjunctions.push_back(std::vector<long long>(static_cast<std::size_t>(num_vars), 1));
    }
    return p;
  }
};

int cmd_generate(const GlobalOpts& g, int items, int knapsacks, bool reverse, double mean,
                 double sd, const std::string& out_file) {
  KnapsackSpec spec;
  spec.num_items = items;
  spec.num_knapsacks = knapsacks;
  spec.reverse = reverse;
  spec.seed = g.seed;
  spec.weight_mean = mean;
  spec.weight_sd = sd;
  spec.validate();
  if (g.dry_run) return 0;

  Manifest manifest("generate", g);
  manifest.flag("items", items);
  manifest.flag("knapsacks", knapsacks);
  manifest.flag("reverse", reverse);
  manifest.flag("weight_mean", mean);
  manifest.flag("weight_sd", sd);

  const KnapsackInstance inst = generate_knapsack(spec);
  const fs::path dir = ensure_out_dir(g);
  const fs::path path = out_file.empty() ? dir / "instance.ip" : fs::path(out_file);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_file(path, write_knapsack_instance(inst, spec.seed));
  manifest.artifact(path);
  manifest.write(dir);
  std::cout << "wrote " << path.string() << "\n";
  return 0;
}

int cmd_solve(const GlobalOpts& g, const std::string& in_file, const ProtocolOpts& popts,
              const std::string& dump_tree) {
  if (g.dry_run) return 0;
  const std::string text = read_file(in_file);
  const auto knapsack = read_knapsack_metadata(text);
  const IpInstance ip = knapsack ? knapsack->ip : read_instance(text);
  const RunProtocol proto = popts.to_protocol(ip.num_vars);
  std::vector<Cut> pool;
  if (proto.cuts_per_node > 0) {
    if (knapsack) pool = extended_cover_cuts(*knapsack);
    else
      std::cerr << "note: no knapsack metadata in " << in_file
                << "; solving without a cut pool\n";
  }
  const BncSetup setup = make_bnc_setup(ip, pool, proto);
  const BncSolveResult res = bnc_solve(ip, setup.config, setup.params, setup.limits);

  json out;
  out["status"] = to_string(res.status);
  out["tree_size"] = res.tree.stats.nodes_created;
  out["iterations"] = res.tree.stats.iterations;
  if (res.incumbent) {
    out["objective"] = res.incumbent->objective;
    out["incumbent"] = res.incumbent->solution;
  } else {
    out["objective"] = nullptr;
    out["incumbent"] = nullptr;
  }
  const std::string payload = out.dump() + "\n";
  std::cout << payload;

  const fs::path dir = ensure_out_dir(g);
  Manifest manifest("solve", g);
  manifest.flag("in", in_file);
  manifest.flag("mu_branch", popts.mu_branch);
  manifest.flag("mu_cut", popts.mu_cut);
  manifest.flag("lambda", popts.lambda);
  manifest.flag("branch_mode", popts.branch_mode);
  manifest.flag("cuts_per_node", popts.cuts_per_node);
  const fs::path result_path = dir / "solve.json";
  write_file(result_path, payload);
  manifest.artifact(result_path);
  if (!dump_tree.empty()) {
    write_file(dump_tree, dump_tree_jsonl(res.tree));
    manifest.artifact(dump_tree);
  }
  manifest.write(dir);
  return 0;
}

int cmd_sweep(const GlobalOpts& g, int items, int knapsacks, bool reverse,
              const std::string& pair, double step, int samples, double lambda,
              int cuts_per_node) {
  SweepConfig cfg;
  cfg.spec.num_items = items;
  cfg.spec.num_knapsacks = knapsacks;
  cfg.spec.reverse = reverse;
  cfg.pair = parse_pair_kind(pair);
  cfg.grid_step = step;
  cfg.samples = samples;
  cfg.lambda = lambda;
  cfg.cuts_per_node = cuts_per_node;
  cfg.seed = g.seed;
  cfg.jobs = g.jobs;
  cfg.validate();
  if (g.dry_run) return 0;

  const SweepTable table = sweep_mu(cfg);
  std::ostringstream base;
  base << "sweep_" << (reverse ? "reverse" : "chvatal") << "_" << items << "i_" << knapsacks
       << "k_" << pair;
  const fs::path dir = ensure_out_dir(g);
  Manifest manifest("sweep", g);
  manifest.flag("items", items);
  manifest.flag("knapsacks", knapsacks);
  manifest.flag("reverse", reverse);
  manifest.flag("pair", pair);
  manifest.flag("step", step);
  manifest.flag("samples", samples);
  manifest.flag("lambda", lambda);
  manifest.flag("cuts_per_node", cuts_per_node);
  manifest.flag("truncated_runs", table.truncated_runs);

  const fs::path csv_path = dir / (base.str() + ".csv");
  write_file(csv_path, sweep_csv(table));
  manifest.artifact(csv_path);
  if (g.svg) {
    const fs::path svg_path = dir / (base.str() + ".svg");
    write_file(svg_path, sweep_svg(table, base.str()));
    manifest.artifact(svg_path);
  }
  manifest.write(dir);
  std::cout << "wrote " << csv_path.string() << "\n";
  return 0;
}

ParamAxis parse_axis(const std::string& s) {
  if (s == "mu-branch") return ParamAxis::MuBranch;
  if (s == "mu-cut") return ParamAxis::MuCut;
  if (s == "lambda") return ParamAxis::Lambda;
  throw CLI::ValidationError("--axis must be mu-branch, mu-cut or lambda");
}

int cmd_verify_pieces(const GlobalOpts& g, const std::string& in_file, int items, int knapsacks,
                      bool reverse, int instances, const std::string& axis_name, double coarse,
                      double refine, const ProtocolOpts& popts, bool two_d) {
  if (g.dry_run) return 0;
  const ParamAxis axis = parse_axis(axis_name);
  const fs::path dir = ensure_out_dir(g);
  Manifest manifest("verify-pieces", g);
  manifest.flag("axis", axis_name);
  manifest.flag("coarse", coarse);
  manifest.flag("refine", refine);
  manifest.flag("two_d", two_d);
  manifest.flag("instances", instances);

  if (!in_file.empty() && instances != 1)
    throw std::runtime_error("verify-pieces: --in implies --instances 1");

  json summary = json::array();
  for (int i = 0; i < instances; ++i) {
    IpInstance ip;
    std::vector<Cut> pool;
    std::string label;
    if (!in_file.empty()) {
      const std::string text = read_file(in_file);
      const auto kn = read_knapsack_metadata(text);
      if (!kn) throw std::runtime_error("verify-pieces: instance lacks knapsack metadata");
      ip = kn->ip;
      pool = extended_cover_cuts(*kn);
      label = fs::path(in_file).stem().string();
    } else {
      KnapsackSpec spec;
      spec.num_items = items;
      spec.num_knapsacks = knapsacks;
      spec.reverse = reverse;
      spec.seed = mix_seed(g.seed, 0x9e1ceULL, static_cast<std::uint64_t>(i));
      const KnapsackInstance inst = generate_knapsack(spec);
      ip = inst.ip;
      pool = extended_cover_cuts(inst);
      label = "inst" + std::to_string(i);
    }
    RunProtocol proto = popts.to_protocol(ip.num_vars);
    if (popts.depth_limit == 0) proto.depth_limit = 5;  // lemma runs use small depth caps

    const PieceReport report =
        find_pieces(ip, pool, axis, proto, coarse, refine,
                    mix_seed(g.seed, 0x50b3ULL, static_cast<std::uint64_t>(i)));
    const fs::path csv_path = dir / ("pieces_" + label + "_" + to_string(axis) + ".csv");
    write_file(csv_path, pieces_csv(report));
    manifest.artifact(csv_path);
    json entry;
    entry["instance"] = label;
    entry["axis"] = to_string(axis);
    entry["piece_count"] = report.piece_count;
    entry["theoretical_cap"] = bigint_str(report.theoretical_cap);
    entry["inconsistent"] = report.inconsistent;
    if (two_d) {
      const RectangleReport rects =
          find_rectangles(ip, pool, proto, coarse, refine,
                          mix_seed(g.seed, 0x2dULL, static_cast<std::uint64_t>(i)));
      entry["rect_count"] = rects.count;
      entry["rect_cap_statement"] = bigint_str(rects.theoretical_cap);
      entry["rect_cap_proof"] = bigint_str(rects.theoretical_cap_proof);
      entry["rect_inconsistent"] = rects.inconsistent;
      std::ostringstream rcsv;
      rcsv << "mu_lo,mu_hi,lambda_lo,lambda_hi,digest\n";
      for (const Rectangle& r : rects.rects)
        rcsv << detail::format_double(r.mu_lo) << "," << detail::format_double(r.mu_hi) << ","
             << detail::format_double(r.lambda_lo) << "," << detail::format_double(r.lambda_hi)
             << "," << r.digest.hex() << "\n";
      const fs::path rpath = dir / ("rects_" + label + ".csv");
      write_file(rpath, rcsv.str());
      manifest.artifact(rpath);
    }
    summary.push_back(entry);
  }
  const fs::path spath = dir / "verify_pieces.json";
  write_file(spath, summary.dump(2) + "\n");
  manifest.artifact(spath);
  manifest.write(dir);
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_verify_subtree(const GlobalOpts& g, int items, int knapsacks, bool reverse,
                       int instances, int params, const ProtocolOpts& popts) {
  if (g.dry_run) return 0;
  long checked = 0, passed = 0, skipped = 0;
  std::string first_violation;
  Rng rng(mix_seed(g.seed, 0x5ebULL));
  for (int i = 0; i < instances; ++i) {
    KnapsackSpec spec;
    spec.num_items = items;
    spec.num_knapsacks = knapsacks;
    spec.reverse = reverse;
    spec.seed = mix_seed(g.seed, 0x1234ULL, static_cast<std::uint64_t>(i));
    const KnapsackInstance inst = generate_knapsack(spec);
    const std::vector<Cut> pool = extended_cover_cuts(inst);
    for (int p = 0; p < params; ++p) {
      RunProtocol proto = popts.to_protocol(inst.ip.num_vars);
      if (popts.depth_limit == 0) proto.depth_limit = 5;
      proto.mu_branch = rng.next_unit();
      proto.mu_cut = rng.next_unit();
      proto.lambda = rng.next_unit();
      const SubtreeReport r = verify_rooted_subtree(inst.ip, pool, proto);
      ++checked;
      if (r.skipped) {
        ++skipped;
      } else if (r.pass) {
        ++passed;
      } else if (first_violation.empty()) {
        first_violation = "instance " + std::to_string(i) + ": " + r.first_violation;
      }
    }
  }
  json out;
  out["checked"] = checked;
  out["passed"] = passed;
  out["skipped"] = skipped;
  out["failed"] = checked - passed - skipped;
  out["first_violation"] = first_violation;
  const std::string payload = out.dump(2) + "\n";
  std::cout << payload;
  const fs::path dir = ensure_out_dir(g);
  Manifest manifest("verify-subtree", g);
  manifest.flag("instances", instances);
  manifest.flag("params", params);
  const fs::path path = dir / "verify_subtree.json";
  write_file(path, payload);
  manifest.artifact(path);
  manifest.write(dir);
  return 0;
}

int cmd_bounds(const GlobalOpts& g, long delta, long k, long b, long d) {
  if (g.dry_run) return 0;
  const TheoreticalBounds t = theoretical_bounds(delta, k, b, d);
  json out;
  out["pieces_1d"] = bigint_str(t.pieces_1d);
  out["rects_2d"] = bigint_str(t.rects_2d);
  out["rects_2d_proof"] = bigint_str(t.rects_2d_proof);
  out["boxes_multi"] = bigint_str(t.boxes_multi);
  out["pdim_order"] = t.pdim_order;
  const std::string payload = out.dump() + "\n";
  std::cout << payload;
  const fs::path dir = ensure_out_dir(g);
  Manifest manifest("bounds", g);
  manifest.flag("delta", delta);
  manifest.flag("k", k);
  manifest.flag("b", b);
  manifest.flag("d", d);
  const fs::path path = dir / "bounds.json";
  write_file(path, payload);
  manifest.artifact(path);
  manifest.write(dir);
  return 0;
}

int cmd_gap(const GlobalOpts& g, int items, int knapsacks, bool reverse,
            const std::string& train_sizes, long test_size, int trials,
            const std::string& grid_spec, const ProtocolOpts& popts) {
  GapConfig cfg;
  cfg.dist.num_items = items;
  cfg.dist.num_knapsacks = knapsacks;
  cfg.dist.reverse = reverse;
  cfg.test_size = test_size;
  cfg.trials = trials;
  cfg.seed = g.seed;
  cfg.jobs = g.jobs;
  cfg.proto = popts.to_protocol(items * knapsacks);

  cfg.train_sizes.clear();
  {
    std::string s = train_sizes;
    for (char& c : s)
      if (c == ',') c = ' ';
    for (const auto& tok : detail::split_ws(s))
      cfg.train_sizes.push_back(detail::parse_int(tok, 0, "train-sizes"));
  }
  cfg.grid.clear();
  {
    std::string s = grid_spec;
    for (char& c : s)
      if (c == ',') c = ' ';
    for (const auto& tok : detail::split_ws(s)) {
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos)
        throw CLI::ValidationError("--grid entries must be mu:lambda");
      cfg.grid.emplace_back(detail::parse_double(tok.substr(0, colon), 0, "grid"),
                            detail::parse_double(tok.substr(colon + 1), 0, "grid"));
    }
  }
  cfg.validate();
  if (g.dry_run) return 0;

  const GapReport report = generalization_gap(cfg);
  const fs::path dir = ensure_out_dir(g);
  Manifest manifest("gap", g);
  manifest.flag("items", items);
  manifest.flag("knapsacks", knapsacks);
  manifest.flag("reverse", reverse);
  manifest.flag("train_sizes", train_sizes);
  manifest.flag("test_size", test_size);
  manifest.flag("trials", trials);
  manifest.flag("grid", grid_spec);

  const fs::path csv_path = dir / "gap.csv";
  write_file(csv_path, gap_csv(report));
  manifest.artifact(csv_path);

  json out;
  out["train_sizes"] = report.train_sizes;
  out["gap"] = report.gap;
  out["slope"] = report.slope_defined ? json(report.slope) : json(nullptr);
  out["cost_cap"] = report.cost_cap;
  const fs::path jpath = dir / "gap.json";
  write_file(jpath, out.dump(2) + "\n");
  manifest.artifact(jpath);
  manifest.write(dir);
  std::cout << out.dump() << "\n";
  return 0;
}

int cmd_jeroslow(const GlobalOpts& g, int n) {
  if (g.dry_run) return 0;
  const JeroslowResult r = jeroslow(n);
  json out;
  out["n"] = r.n;
  out["single_var_nodes"] = r.single_var_nodes;
  out["multivar_nodes"] = r.multivar_nodes;
  const std::string payload = out.dump() + "\n";
  std::cout << payload;
  const fs::path dir = ensure_out_dir(g);
  Manifest manifest("jeroslow", g);
  manifest.flag("n", n);
  const fs::path path = dir / "jeroslow.json";
  write_file(path, payload);
  manifest.artifact(path);
  manifest.write(dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bctree: configurable branch-and-cut with parameter-space experiments"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  GlobalOpts g;
  auto add_global = [&](CLI::App* cmd) {
    cmd->add_option("--seed", g.seed, "master RNG seed");
    cmd->add_option("--out-dir", g.out_dir, "artifact directory (default: current)");
    cmd->add_option("--jobs", g.jobs, "worker threads (1 = serial)")->check(CLI::Range(1, 256));
    cmd->add_flag("--svg", g.svg, "also emit SVG plots");
    cmd->add_flag("--dry-run", g.dry_run, "validate flags, compute nothing");
  };

  auto* gen = app.add_subcommand("generate", "generate a multiple-knapsack instance");
  int gen_items = 10, gen_knapsacks = 2;
  bool gen_reverse = false;
  double gen_mean = 50.0, gen_sd = 2.0;
  std::string gen_out;
  gen->add_option("--items", gen_items, "number of items")->check(CLI::PositiveNumber);
  gen->add_option("--knapsacks", gen_knapsacks, "number of knapsacks")
      ->check(CLI::PositiveNumber);
  gen->add_flag("--reverse", gen_reverse, "reverse value order (lightest most valuable)");
  gen->add_option("--weight-mean", gen_mean, "normal mean for weights");
  gen->add_option("--weight-sd", gen_sd, "normal sd for weights");
  gen->add_option("--out", gen_out, "output instance path");
  add_global(gen);

  auto* solve = app.add_subcommand("solve", "run branch-and-cut on an instance file");
  std::string solve_in, solve_dump;
  ProtocolOpts solve_popts;
  solve->add_option("--in", solve_in, "instance file")->required();
  solve->add_option("--dump-tree", solve_dump, "write the search tree as JSON lines");
  solve_popts.add_flags(solve);
  add_global(solve);

  auto* sweep = app.add_subcommand("sweep", "average tree size across the mu grid");
  int sw_items = 10, sw_knapsacks = 2, sw_samples = 100, sw_cuts = 2;
  bool sw_reverse = false;
  double sw_step = 0.01, sw_lambda = 1.0;
  std::string sw_pair = "ep";
  sweep->add_option("--items", sw_items)->check(CLI::PositiveNumber);
  sweep->add_option("--knapsacks", sw_knapsacks)->check(CLI::PositiveNumber);
  sweep->add_flag("--reverse", sw_reverse);
  sweep->add_option("--pair", sw_pair, "cut score pair: ep, ed or dp");
  sweep->add_option("--step", sw_step, "mu grid step (must divide 1)");
  sweep->add_option("--samples", sw_samples, "instances per grid point");
  sweep->add_option("--lambda", sw_lambda)->check(CLI::Range(0.0, 1.0));
  sweep->add_option("--cuts-per-node", sw_cuts)->check(CLI::Range(0, 2));
  add_global(sweep);

  auto* pieces = app.add_subcommand("verify-pieces", "piecewise-constancy detection");
  std::string vp_in, vp_axis = "mu-cut";
  int vp_items = 5, vp_knapsacks = 1, vp_instances = 1;
  bool vp_reverse = false, vp_two_d = false;
  double vp_coarse = 1e-3, vp_refine = 1e-7;
  ProtocolOpts vp_popts;
  pieces->add_option("--in", vp_in, "instance file (otherwise generated)");
  pieces->add_option("--items", vp_items);
  pieces->add_option("--knapsacks", vp_knapsacks);
  pieces->add_flag("--reverse", vp_reverse);
  pieces->add_option("--instances", vp_instances, "generated instances to scan");
  pieces->add_option("--axis", vp_axis, "mu-branch | mu-cut | lambda");
  pieces->add_option("--coarse", vp_coarse, "coarse scan step");
  pieces->add_option("--refine", vp_refine, "breakpoint refinement width");
  pieces->add_flag("--two-d", vp_two_d, "also build (mu, lambda) rectangles");
  vp_popts.add_flags(pieces);
  add_global(pieces);

  auto* subtree = app.add_subcommand("verify-subtree", "rooted-subtree property check");
  int vs_items = 5, vs_knapsacks = 1, vs_instances = 10, vs_params = 20;
  bool vs_reverse = false;
  ProtocolOpts vs_popts;
  subtree->add_option("--items", vs_items);
  subtree->add_option("--knapsacks", vs_knapsacks);
  subtree->add_flag("--reverse", vs_reverse);
  subtree->add_option("--instances", vs_instances);
  subtree->add_option("--params", vs_params, "parameter draws per instance");
  vs_popts.add_flags(subtree);
  add_global(subtree);

  auto* bounds = app.add_subcommand("bounds", "evaluate the structural bound formulas");
  long bd_delta = 1, bd_k = 2, bd_b = 2, bd_d = 1;
  bounds->add_option("--delta", bd_delta, "depth limit")->required();
  bounds->add_option("--k", bd_k, "max children per node")->required();
  bounds->add_option("--b", bd_b, "max actions per type")->required();
  bounds->add_option("--d", bd_d, "number of action types");
  add_global(bounds);

  auto* gap = app.add_subcommand("gap", "generalization-gap decay estimate");
  int gp_items = 8, gp_knapsacks = 2, gp_trials = 10;
  bool gp_reverse = false;
  long gp_test = 8000;
  std::string gp_train = "50,100,200,400,800";
  std::string gp_grid = "0:1,0.5:1,1:1";
  ProtocolOpts gp_popts;
  gap->add_option("--items", gp_items);
  gap->add_option("--knapsacks", gp_knapsacks);
  gap->add_flag("--reverse", gp_reverse);
  gap->add_option("--train-sizes", gp_train, "comma-separated N list");
  gap->add_option("--test-size", gp_test, "held-out sample size M");
  gap->add_option("--trials", gp_trials);
  gap->add_option("--grid", gp_grid, "mu:lambda pairs, comma separated");
  gp_popts.add_flags(gap);
  add_global(gap);

  auto* jer = app.add_subcommand("jeroslow", "single- vs multi-variable branching separation");
  int jn = 5;
  jer->add_option("--n", jn, "odd n in [3, 15]")->required();
  add_global(jer);

  try {
    const std::vector<std::string> args = expand_config(argc, argv);
    std::vector<const char*> cargs{argv[0]};
    for (const auto& a : args) cargs.push_back(a.c_str());
    app.parse(static_cast<int>(cargs.size()), cargs.data());

    if (gen->parsed())
      return cmd_generate(g, gen_items, gen_knapsacks, gen_reverse, gen_mean, gen_sd, gen_out);
    if (solve->parsed()) return cmd_solve(g, solve_in, solve_popts, solve_dump);
    if (sweep->parsed())
      return cmd_sweep(g, sw_items, sw_knapsacks, sw_reverse, sw_pair, sw_step, sw_samples,
                       sw_lambda, sw_cuts);
    if (pieces->parsed())
      return cmd_verify_pieces(g, vp_in, vp_items, vp_knapsacks, vp_reverse, vp_instances,
                               vp_axis, vp_coarse, vp_refine, vp_popts, vp_two_d);
    if (subtree->parsed())
      return cmd_verify_subtree(g, vs_items, vs_knapsacks, vs_reverse, vs_instances, vs_params,
                                vs_popts);
    if (bounds->parsed()) return cmd_bounds(g, bd_delta, bd_k, bd_b, bd_d);
    if (gap->parsed())
      return cmd_gap(g, gp_items, gp_knapsacks, gp_reverse, gp_train, gp_test, gp_trials,
                     gp_grid, gp_popts);
    if (jer->parsed()) return cmd_jeroslow(g, jn);
    std::cerr << "no subcommand\n";
    return 1;
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
