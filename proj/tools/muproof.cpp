// Command-line driver: certificate checking, the embed/reduce/collapse
// pipeline with trace emission, prefix exploration, bound checking, and
// ordinal-term utilities.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "mu/bound.hpp"
#include "mu/pipeline.hpp"

using namespace mu;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return s;
}

std::string resolve_corpus_path(const std::string& path) {
  namespace fs = std::filesystem;
  if (fs::exists(path)) return path;
  if (const char* dir = std::getenv("MUPROOF_CORPUS")) {
    fs::path p = fs::path(dir) / path;
    if (fs::exists(p)) return p.string();
  }
  return path;
}

struct Options {
  int c0 = 2;
  int explore_depth = 50;
  uint64_t fuel = 10000;
  uint64_t seed = 0;
  std::string trace_path;
};

bool input_is_nested(const FinDed& d, int c0) {
  for (auto& f : finitary_gamma(d)) {
    auto lv = level_of_depth(depth(f), c0);
    if (lv && level_is_nested(*lv)) return true;
  }
  // Ind rules over nested fixed points may not show in the endsequent
  std::function<bool(const FinDed&)> scan = [&](const FinDed& n) {
    for (auto& f : n->rule->formulas) {
      if (!bracket_free(f)) continue;
      auto lv = level_of_depth(depth(f), c0);
      if (lv && level_is_nested(*lv)) return true;
    }
    for (auto& [l, sub] : n->premises)
      if (scan(sub)) return true;
    return false;
  };
  return scan(d);
}

PipelineConfig config_for(const FinDed& d, const Options& opt) {
  PipelineConfig cfg;
  cfg.c0 = opt.c0;
  // single-level mode when everything fits in depth <= 1
  cfg.id1 = true;
  std::function<void(const FinDed&)> scan = [&](const FinDed& n) {
    for (auto& f : n->rule->formulas) {
      if (!bracket_free(f)) continue;
      auto lv = level_of_depth(depth(f), opt.c0);
      if (!lv || *lv > 1) cfg.id1 = false;
    }
    for (auto& [l, sub] : n->premises) scan(sub);
  };
  scan(d);
  if (cfg.id1) cfg.c0 = 1;
  return cfg;
}

int cmd_check(const std::string& path, const Options& opt) {
  FinDed d = parse_finitary(read_file(resolve_corpus_path(path)));
  int window = opt.c0;
  Theory th = Theory::finitary(input_is_nested(d, opt.c0) ? kLevelOmega + opt.c0 : window, opt.c0);
  FinCheck fc = check_finitary(d, th);
  std::cout << "nodes: " << fc.nodes << "\n";
  std::cout << "conclusion: " << print_sequent(fc.gamma) << "\n";
  if (fc.has_cut) std::cout << "cut-rank: " << fc.max_cut_rank + 1 << "\n";
  if (fc.ok) {
    std::cout << "valid\n";
    return 0;
  }
  for (auto& e : fc.errors) std::cout << "error: " << e << "\n";
  return 1;
}

void emit_trace(const BoundedProofTree& t, const ExploreConfig& ec, std::ostream& out) {
  explore(t.tree, ec, [&](const TraceRecord& rec) { out << trace_line(rec) << "\n"; });
}

int cmd_run(const std::string& path, const Options& opt) {
  FinDed d = parse_finitary(read_file(resolve_corpus_path(path)));
  PipelineConfig cfg = config_for(d, opt);
  ExploreConfig ec;
  ec.depth = opt.explore_depth;
  ec.max_nodes = opt.fuel;

  std::ofstream trace_out;
  if (!opt.trace_path.empty()) trace_out.open(opt.trace_path);

  if (input_is_nested(d, opt.c0)) {
    // The W-level transformations are structural; bounds are out of scope.
    EmbedResult er = embed(d, {}, cfg);
    std::cout << "stage embed: theory " << er.tree.tree.theory().name() << ", bound n/a (W)\n";
    std::cout << "stage subst-nested: structural (bound n/a (W))\n";
    Report rep = check_local_coherence(er.tree.tree, ec);
    std::cout << "coherence: " << rep.summary() << "\n";
    if (trace_out.is_open()) emit_trace(er.tree, ec, trace_out);
    return rep.ok ? 0 : 1;
  }

  PipelineRun run = full_pipeline(d, cfg);
  bool all_ok = true;
  for (auto& st : run.stages) {
    Report rep = check_local_coherence(st.tree.tree, ec);
    std::cout << "stage " << st.name << ": bound " << ord::print_ord(st.tree.claimed)
              << ", coherence " << rep.summary() << "\n";
    all_ok = all_ok && rep.ok;
  }
  const BoundedProofTree& fin = run.final_tree();
  // prefix statistics
  std::map<std::string, size_t> histogram;
  size_t max_depth = 0;
  explore(fin.tree, ec, [&](const TraceRecord& rec) {
    histogram[rule_name_str(rec.node->rule->name)]++;
    max_depth = std::max(max_depth, rec.pos.size());
  });
  std::cout << "final bound: " << ord::print_ord(fin.claimed) << "\n";
  std::cout << "max explored depth: " << max_depth << "\n";
  std::cout << "rule histogram:";
  for (auto& [name, count] : histogram) std::cout << " " << name << "=" << count;
  std::cout << "\n";
  Report brep = check_bound(fin, ec);
  std::cout << "bound-check: " << brep.summary() << "\n";
  all_ok = all_ok && brep.ok;
  if (trace_out.is_open()) emit_trace(fin, ec, trace_out);
  return all_ok ? 0 : 1;
}

int cmd_explore(const std::string& path, const Options& opt) {
  FinDed d = parse_finitary(read_file(resolve_corpus_path(path)));
  PipelineConfig cfg = config_for(d, opt);
  EmbedResult er = embed(d, {}, cfg);
  ExploreConfig ec;
  ec.depth = opt.explore_depth;
  ec.max_nodes = opt.fuel;
  std::ostream* out = &std::cout;
  std::ofstream fout;
  if (!opt.trace_path.empty()) {
    fout.open(opt.trace_path);
    out = &fout;
  }
  emit_trace(er.tree, ec, *out);
  return 0;
}

int cmd_bound_check(const std::string& path, const Options& opt) {
  FinDed d = parse_finitary(read_file(resolve_corpus_path(path)));
  PipelineConfig cfg = config_for(d, opt);
  ExploreConfig ec;
  ec.depth = opt.explore_depth;
  ec.max_nodes = opt.fuel;
  PipelineRun run = full_pipeline(d, cfg);
  bool ok = true;
  std::ofstream fout;
  if (!opt.trace_path.empty()) fout.open(opt.trace_path);
  for (auto& st : run.stages) {
    Report rep = check_bound(st.tree, ec);
    std::cout << "stage " << st.name << ": " << rep.summary() << "\n";
    ok = ok && rep.ok;
    if (fout.is_open())
      bound_edge_records(st.tree, ec,
                         [&](const EdgeRecord& er) { fout << edge_record_line(er) << "\n"; });
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"proof-tree transformation toolkit for the arithmetic mu-calculus"};
  app.require_subcommand(1);

  Options opt;
  app.add_option("--c0", opt.c0, "depth window size");
  app.add_option("--explore-depth", opt.explore_depth, "prefix exploration depth");
  app.add_option("--fuel", opt.fuel, "node-expansion fuel");
  app.add_option("--seed", opt.seed, "random seed (property sampling)");
  app.add_option("--trace", opt.trace_path, "trace output path");

  std::string path, t1, t2, t3;
  int level = 1;

  auto* check = app.add_subcommand("check", "validate a finitary proof certificate");
  check->add_option("certificate", path)->required();

  auto* run = app.add_subcommand("run", "run the full pipeline and report stages");
  run->add_option("certificate", path)->required();

  auto* explore_cmd = app.add_subcommand("explore", "emit the embedded tree's prefix trace");
  explore_cmd->add_option("certificate", path)->required();

  auto* bc = app.add_subcommand("bound-check", "check ordinal bounds of every stage");
  bc->add_option("certificate", path)->required();

  auto* ord_cmd = app.add_subcommand("ord", "ordinal term utilities");
  auto* ord_cmp = ord_cmd->add_subcommand("compare", "compare two terms");
  ord_cmp->add_option("a", t1)->required();
  ord_cmp->add_option("b", t2)->required();
  auto* ord_k = ord_cmd->add_subcommand("k", "K-set of a term at a level");
  ord_k->add_option("level", level)->required();
  ord_k->add_option("term", t1)->required();
  auto* ord_col = ord_cmd->add_subcommand("collapse", "vartheta_{c,gamma}(alpha)");
  ord_col->add_option("level", level)->required();
  ord_col->add_option("gamma", t1)->required();
  ord_col->add_option("alpha", t2)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed()) return cmd_check(path, opt);
    if (run->parsed()) return cmd_run(path, opt);
    if (explore_cmd->parsed()) return cmd_explore(path, opt);
    if (bc->parsed()) return cmd_bound_check(path, opt);
    if (ord_cmd->parsed()) {
      if (ord_cmp->parsed()) {
        auto a = ord::parse_ord(t1, opt.c0);
        auto b = ord::parse_ord(t2, opt.c0);
        switch (ord::compare(a, b)) {
          case ord::Cmp::Less: std::cout << "<\n"; break;
          case ord::Cmp::Equal: std::cout << "=\n"; break;
          case ord::Cmp::Greater: std::cout << ">\n"; break;
          case ord::Cmp::Incomparable: std::cout << "incomparable\n"; break;
        }
        return 0;
      }
      if (ord_k->parsed()) {
        auto a = ord::parse_ord(t1, opt.c0);
        for (auto& t : ord::k_set(level, a)) std::cout << ord::print_ord(t) << "\n";
        return 0;
      }
      if (ord_col->parsed()) {
        auto g = ord::parse_ord(t1, opt.c0);
        auto a = ord::parse_ord(t2, opt.c0);
        std::cout << ord::print_ord(ord::vartheta_collapse(level, g, a)) << "\n";
        return 0;
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
