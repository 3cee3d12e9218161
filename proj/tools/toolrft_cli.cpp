// Command-line front end for the toolrft pipeline.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "toolrft/buffer/replay_buffer.hpp"
#include "toolrft/error.hpp"
#include "toolrft/pipeline/pipeline.hpp"

namespace fs = std::filesystem;
using namespace toolrft;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  std::string config_path;
};

RunConfig load_config(const Globals& g) {
  RunConfig cfg;
  if (!g.config_path.empty()) cfg = RunConfig::from_json(read_json_file(g.config_path));
  if (g.seed) cfg.with_seed(*g.seed);
  return cfg;
}

fs::path out_dir(const Globals& g) {
  fs::create_directories(g.out_dir);
  return g.out_dir;
}

void print_eval(const EvalReport& r) {
  std::cout << "accuracy overall " << r.accuracy_overall << " easy " << r.accuracy_easy << " medium "
            << r.accuracy_medium << " hard " << r.accuracy_hard << "\n"
            << "relevance " << r.relevance_rate << " irrelevance " << r.irrelevance_rate << "\n";
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  if (out.empty()) throw PreconditionError("empty list '" + text + "'");
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

/// Flags shared by the commands that run iterations.
struct IterateFlags {
  std::string algo;
  std::optional<double> beta;
  std::optional<double> lr;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> iterations;
  std::optional<int> alpha;
  std::string ref;
  std::optional<std::size_t> simulations;
  std::optional<double> c_puct;
  bool dump_tree = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--algo", algo, "Preference loss")->check(CLI::IsMember({"dpo", "simpo", "ipo", "orpo"}));
    cmd->add_option("--beta", beta, "Preference beta");
    cmd->add_option("--lr", lr, "Preference learning rate");
    cmd->add_option("--pref-epochs", epochs, "Preference epochs per iteration");
    cmd->add_option("--iterations", iterations, "Number of iterations");
    cmd->add_option("--alpha", alpha, "Hard-sample percentage")->check(CLI::Range(1, 100));
    cmd->add_option("--ref", ref, "Reference policy")->check(CLI::IsMember({"latest", "warmup"}));
    cmd->add_option("--simulations", simulations, "MCTS simulations per example");
    cmd->add_option("--c-puct", c_puct, "PUCT exploration constant");
    cmd->add_flag("--dump-tree", dump_tree, "Write search trees as JSON");
  }

  void apply(RunConfig& cfg) const {
    if (!algo.empty()) cfg.pref.algorithm = parse_pref_algorithm(algo);
    if (beta) cfg.pref.beta = *beta;
    if (lr) cfg.pref.learning_rate = *lr;
    if (epochs) cfg.pref.epochs = *epochs;
    if (iterations) cfg.iterations = *iterations;
    if (alpha) cfg.alpha_percent = *alpha;
    if (!ref.empty()) cfg.reference = parse_reference_mode(ref);
    if (simulations) cfg.search.n_simulations = *simulations;
    if (c_puct) cfg.search.c_puct = *c_puct;
    if (dump_tree) cfg.dump_trees = true;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"toolrft: curriculum warm-up, MCTS preference search and iterative preference optimisation"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Master seed (derives every component seed)");
  app.add_option("--out-dir", g.out_dir, "Output directory");
  app.add_option("--config", g.config_path, "RunConfig JSON file");

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic corpus");
  std::optional<std::size_t> gen_n;
  std::optional<double> gen_irrel;
  gen->add_option("--n", gen_n, "Number of examples");
  gen->add_option("--irrelevance", gen_irrel, "Fraction of irrelevance examples");

  // split
  auto* split = app.add_subcommand("split", "Split examples into warm-up and RL parts");
  std::string split_input;
  std::optional<double> split_fraction;
  split->add_option("--input", split_input, "examples.jsonl")->required();
  split->add_option("--fraction", split_fraction, "Warm-up fraction");

  // warmup
  auto* warm = app.add_subcommand("warmup", "Supervised warm-up");
  std::string warm_input;
  std::string warm_order;
  std::optional<std::size_t> warm_epochs;
  std::optional<double> warm_lr;
  warm->add_option("--input", warm_input, "warmup.jsonl")->required();
  warm->add_option("--order", warm_order, "easy2hard or mixed")->check(CLI::IsMember({"easy2hard", "mixed"}));
  warm->add_option("--epochs", warm_epochs, "Epochs per stage");
  warm->add_option("--lr", warm_lr, "Learning rate");

  // iterate
  auto* iter = app.add_subcommand("iterate", "Iterative preference optimisation from a checkpoint");
  std::string iter_policy;
  std::string iter_rl;
  IterateFlags iter_flags;
  iter->add_option("--policy", iter_policy, "policy.json")->required();
  iter->add_option("--rl", iter_rl, "rl.jsonl")->required();
  iter_flags.add_to(iter);

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint");
  std::string ev_policy;
  std::string ev_input;
  bool ev_sample = false;
  ev->add_option("--policy", ev_policy, "policy.json")->required();
  ev->add_option("--input", ev_input, "eval examples.jsonl")->required();
  ev->add_flag("--sample", ev_sample, "Sampled instead of greedy decoding");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Training-gains sweep over corpus fractions");
  std::string sweep_fractions = "0.25,0.5,0.75,1.0";
  IterateFlags sweep_flags;
  sweep->add_option("--fractions", sweep_fractions, "Comma-separated fractions in (0, 1]");
  sweep_flags.add_to(sweep);

  // run
  auto* run = app.add_subcommand("run", "Full pipeline");
  IterateFlags run_flags;
  std::string run_order;
  bool run_skip_warmup = false;
  run_flags.add_to(run);
  run->add_option("--order", run_order, "easy2hard or mixed")->check(CLI::IsMember({"easy2hard", "mixed"}));
  run->add_flag("--skip-warmup", run_skip_warmup, "Start iterations from the untrained policy");

  // grid
  auto* grid = app.add_subcommand("grid", "Grid search over preference lr and beta");
  std::string grid_lrs = "0.001,0.01,0.1";
  std::string grid_betas = "0.1,0.5,1.0";
  IterateFlags grid_flags;
  grid->add_option("--lrs", grid_lrs, "Comma-separated learning rates");
  grid->add_option("--betas", grid_betas, "Comma-separated betas");
  grid_flags.add_to(grid);

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = load_config(g);
    if (gen->parsed()) {
      if (gen_n) cfg.corpus.n_examples = *gen_n;
      if (gen_irrel) cfg.corpus.irrelevance_fraction = *gen_irrel;
      const Corpus corpus = generate_corpus(cfg.corpus);
      const fs::path dir = out_dir(g);
      write_tools_jsonl(dir / "tools.jsonl", corpus.tool_pool);
      write_examples_jsonl(dir / "examples.jsonl", corpus.examples);
      write_examples_jsonl(dir / "eval.jsonl", generate_eval_set(cfg));
      std::cout << "wrote " << corpus.examples.size() << " examples to " << dir << "\n";
    } else if (split->parsed()) {
      const double f = split_fraction.value_or(cfg.warmup_fraction);
      const std::vector<Example> data = read_examples_jsonl(split_input);
      const DatasetSplit s = split_warmup_rl(data, f, cfg.split_seed);
      const fs::path dir = out_dir(g);
      write_examples_jsonl(dir / "warmup.jsonl", s.warmup);
      write_examples_jsonl(dir / "rl.jsonl", s.rl);
      std::cout << "warm-up " << s.warmup.size() << " rl " << s.rl.size() << "\n";
    } else if (warm->parsed()) {
      if (!warm_order.empty()) cfg.warmup.order = parse_warmup_order(warm_order);
      if (warm_epochs) cfg.warmup.epochs = *warm_epochs;
      if (warm_lr) cfg.warmup.learning_rate = *warm_lr;
      cfg.warmup.skip = false;
      LinearPolicy policy(cfg.policy);
      const TrainingReport report = run_warmup(policy, read_examples_jsonl(warm_input), cfg.warmup);
      const fs::path dir = out_dir(g);
      save_policy(dir / "policy.json", policy);
      write_json_file(dir / "report.json", report.to_json());
      for (const StageReport& st : report.stages) {
        std::cout << st.name << " steps " << st.steps << " loss " << st.loss_before << " -> " << st.mean_loss << "\n";
      }
      std::cout << "total loss " << report.total_loss << "\n";
    } else if (iter->parsed()) {
      iter_flags.apply(cfg);
      cfg.validate();
      LinearPolicy policy = load_policy(iter_policy, cfg.policy.candidate_cap);
      ReplayBuffer buffer = init_buffer(read_examples_jsonl(iter_rl));
      const ReferencePolicy warm_ref = freeze_reference(policy);
      const fs::path dir = out_dir(g);
      for (std::size_t i = 1; i <= cfg.iterations; ++i) {
        IterationOptions opt;
        opt.iteration = i;
        opt.reference = cfg.reference;
        opt.warmup_reference = warm_ref;
        opt.keep_trees = cfg.dump_trees;
        const IterationResult r = run_iteration(policy, buffer, cfg.search, cfg.pref, cfg.alpha_percent, opt);
        const fs::path it_dir = dir / ("iteration_" + std::to_string(i));
        fs::create_directories(it_dir);
        write_json_file(it_dir / "iteration_report.json", r.report.to_json());
        write_preferences_jsonl(it_dir / "preferences.jsonl", r.pairs);
        write_buffer_jsonl(it_dir / "buffer.jsonl", buffer);
        save_policy(it_dir / "policy.json", policy);
        if (opt.keep_trees) {
          std::vector<Json> trees;
          for (const SearchTree& t : r.trees) trees.push_back(t.to_json());
          write_jsonl(it_dir / "trees.jsonl", trees);
        }
        std::cout << "iteration " << i << " pairs " << r.report.pairs << " loss " << r.report.loss_before
                  << " -> " << r.report.loss_after << "\n";
      }
      save_policy(dir / "policy.json", policy);
    } else if (ev->parsed()) {
      const LinearPolicy policy = load_policy(ev_policy, cfg.policy.candidate_cap);
      EvalOptions opt = cfg.eval;
      if (ev_sample) opt.decoding = Decoding::Sample;
      const EvalReport r = evaluate(policy, read_examples_jsonl(ev_input), opt);
      write_json_file(out_dir(g) / "report.json", r.to_json());
      print_eval(r);
    } else if (sweep->parsed()) {
      sweep_flags.apply(cfg);
      const std::vector<double> fractions = parse_list(sweep_fractions);
      const std::vector<GainsRow> rows = gains_sweep(cfg, fractions);
      const std::string csv = gains_csv(rows);
      write_text(out_dir(g) / "gains.csv", csv);
      std::cout << csv;
    } else if (run->parsed()) {
      run_flags.apply(cfg);
      if (!run_order.empty()) cfg.warmup.order = parse_warmup_order(run_order);
      if (run_skip_warmup) cfg.warmup.skip = true;
      const RunResult r = run_pipeline(cfg, out_dir(g));
      std::cout << "warm-up\n";
      print_eval(r.warmup_eval);
      for (const IterationOutcome& o : r.iterations) {
        std::cout << "iteration " << o.report.iteration << " (" << o.report.pairs << " pairs)\n";
        print_eval(o.eval);
      }
    } else if (grid->parsed()) {
      grid_flags.apply(cfg);
      std::ostringstream csv;
      csv << "learning_rate,beta,warmup_hard,final_hard,final_overall\n";
      for (double lr : parse_list(grid_lrs)) {
        for (double beta : parse_list(grid_betas)) {
          RunConfig c = cfg;
          c.pref.learning_rate = lr;
          c.pref.beta = beta;
          const RunResult r = run_pipeline(c);
          csv << format_double(lr) << ',' << format_double(beta) << ',' << format_double(r.warmup_eval.accuracy_hard)
              << ',' << format_double(r.final_eval().accuracy_hard) << ','
              << format_double(r.final_eval().accuracy_overall) << '\n';
        }
      }
      write_text(out_dir(g) / "grid.csv", csv.str());
      std::cout << csv.str();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
