#include "toolrft/pipeline/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "toolrft/buffer/replay_buffer.hpp"
#include "toolrft/error.hpp"
#include "toolrft/rng.hpp"

namespace toolrft {
namespace fs = std::filesystem;
namespace {

template <typename T>
void read_field(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Json corpus_json(const CorpusConfig& c) {
  return Json{{"n_examples", c.n_examples},
              {"tool_pool_size", c.tool_pool_size},
              {"max_tools_per_example", c.max_tools_per_example},
              {"max_calls", c.max_calls},
              {"irrelevance_fraction", c.irrelevance_fraction},
              {"seed", c.seed},
              {"id_prefix", c.id_prefix}};
}

CorpusConfig corpus_from_json(const Json& j) {
  CorpusConfig c;
  read_field(j, "n_examples", c.n_examples);
  read_field(j, "tool_pool_size", c.tool_pool_size);
  read_field(j, "max_tools_per_example", c.max_tools_per_example);
  read_field(j, "max_calls", c.max_calls);
  read_field(j, "irrelevance_fraction", c.irrelevance_fraction);
  read_field(j, "seed", c.seed);
  read_field(j, "id_prefix", c.id_prefix);
  return c;
}

Json search_json(const SearchConfig& s) {
  return Json{{"c_puct", s.c_puct},
              {"gamma", s.gamma},
              {"n_simulations", s.n_simulations},
              {"max_depth", s.max_depth},
              {"expansion_width", s.expansion_width},
              {"seed", s.seed},
              {"epsilon_pref", s.epsilon_pref}};
}

SearchConfig search_from_json(const Json& j) {
  SearchConfig s;
  read_field(j, "c_puct", s.c_puct);
  read_field(j, "gamma", s.gamma);
  read_field(j, "n_simulations", s.n_simulations);
  read_field(j, "max_depth", s.max_depth);
  read_field(j, "expansion_width", s.expansion_width);
  read_field(j, "seed", s.seed);
  read_field(j, "epsilon_pref", s.epsilon_pref);
  return s;
}

Json pref_json(const PrefConfig& p) {
  return Json{{"algorithm", std::string(to_string(p.algorithm))},
              {"beta", p.beta},
              {"learning_rate", p.learning_rate},
              {"epochs", p.epochs},
              {"batch_size", p.batch_size},
              {"simpo_margin", p.simpo_margin},
              {"ipo_tau", p.ipo_tau},
              {"orpo_lambda", p.orpo_lambda}};
}

PrefConfig pref_from_json(const Json& j) {
  PrefConfig p;
  if (j.contains("algorithm")) p.algorithm = parse_pref_algorithm(j.at("algorithm").get<std::string>());
  read_field(j, "beta", p.beta);
  read_field(j, "learning_rate", p.learning_rate);
  read_field(j, "epochs", p.epochs);
  read_field(j, "batch_size", p.batch_size);
  read_field(j, "simpo_margin", p.simpo_margin);
  read_field(j, "ipo_tau", p.ipo_tau);
  read_field(j, "orpo_lambda", p.orpo_lambda);
  return p;
}

Json warmup_json(const WarmupConfig& w) {
  return Json{{"order", std::string(to_string(w.order))},
              {"epochs", w.epochs},
              {"learning_rate", w.learning_rate},
              {"batch_size", w.batch_size},
              {"seed", w.seed},
              {"skip", w.skip}};
}

WarmupConfig warmup_from_json(const Json& j) {
  WarmupConfig w;
  if (j.contains("order")) w.order = parse_warmup_order(j.at("order").get<std::string>());
  read_field(j, "epochs", w.epochs);
  read_field(j, "learning_rate", w.learning_rate);
  read_field(j, "batch_size", w.batch_size);
  read_field(j, "seed", w.seed);
  read_field(j, "skip", w.skip);
  return w;
}

template <typename F>
auto phase(const std::string& name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(name, e.what());
  }
}

void check_disjoint(std::span<const Example> a, std::span<const Example> b, const char* what) {
  std::set<std::string> ids;
  for (const Example& e : a) ids.insert(e.id);
  for (const Example& e : b) {
    if (ids.contains(e.id)) throw PreconditionError(std::string(what) + " share example '" + e.id + "'");
  }
}

std::vector<Json> preference_lines(std::span<const PreferencePair> pairs) {
  std::vector<Json> lines;
  for (const PreferencePair& p : pairs) lines.push_back(to_json(p));
  return lines;
}

}  // namespace

std::string_view to_string(WarmupOrder order) {
  return order == WarmupOrder::EasyToHard ? "easy2hard" : "mixed";
}

WarmupOrder parse_warmup_order(std::string_view name) {
  if (name == "easy2hard") return WarmupOrder::EasyToHard;
  if (name == "mixed") return WarmupOrder::Mixed;
  throw PreconditionError("unknown warm-up order '" + std::string(name) + "'");
}

RunConfig& RunConfig::with_seed(std::uint64_t master) {
  seed = master;
  corpus.seed = derive_seed(master, 0);
  eval_seed = derive_seed(master, 1);
  split_seed = derive_seed(master, 2);
  warmup.seed = derive_seed(master, 3);
  search.seed = derive_seed(master, 4);
  eval.seed = derive_seed(master, 5);
  return *this;
}

void RunConfig::validate() const {
  corpus.validate();
  search.validate();
  pref.validate();
  if (n_eval < 3) throw PreconditionError("eval set needs at least 3 examples");
  if (!(warmup_fraction > 0.0 && warmup_fraction < 1.0) || !(rl_fraction > 0.0)) {
    throw PreconditionError("split fractions must lie in (0, 1)");
  }
  if (std::abs(warmup_fraction + rl_fraction - 1.0) > 1e-9) {
    throw PreconditionError("warm-up and RL fractions must sum to 1");
  }
  if (search.max_depth > policy.max_depth) {
    throw PreconditionError("search max_depth exceeds the policy's max_depth");
  }
  if (!(alpha_percent > 0.0 && alpha_percent <= 100.0)) {
    throw PreconditionError("alpha percent must lie in (0, 100]");
  }
  if (warmup.batch_size == 0) throw PreconditionError("warm-up batch size must be positive");
  if (!(warmup.learning_rate >= 0.0)) throw PreconditionError("warm-up learning rate must be >= 0");
}

Json RunConfig::to_json() const {
  Json j;
  j["seed"] = seed;
  j["corpus"] = corpus_json(corpus);
  j["n_eval"] = n_eval;
  j["eval_seed"] = eval_seed;
  j["warmup_fraction"] = warmup_fraction;
  j["rl_fraction"] = rl_fraction;
  j["split_seed"] = split_seed;
  j["policy"] = Json{{"max_depth", policy.max_depth}, {"candidate_cap", policy.candidate_cap}};
  j["warmup"] = warmup_json(warmup);
  j["search"] = search_json(search);
  j["pref"] = pref_json(pref);
  j["iterations"] = iterations;
  j["alpha"] = alpha_percent;
  j["reference"] = std::string(to_string(reference));
  j["eval"] = Json{{"decoding", eval.decoding == Decoding::Greedy ? "greedy" : "sample"},
                   {"seed", eval.seed}};
  j["dump_trees"] = dump_trees;
  return j;
}

RunConfig RunConfig::from_json(const Json& j) {
  RunConfig c;
  read_field(j, "seed", c.seed);
  if (j.contains("corpus")) c.corpus = corpus_from_json(j.at("corpus"));
  read_field(j, "n_eval", c.n_eval);
  read_field(j, "eval_seed", c.eval_seed);
  read_field(j, "warmup_fraction", c.warmup_fraction);
  read_field(j, "rl_fraction", c.rl_fraction);
  read_field(j, "split_seed", c.split_seed);
  if (j.contains("policy")) {
    read_field(j.at("policy"), "max_depth", c.policy.max_depth);
    read_field(j.at("policy"), "candidate_cap", c.policy.candidate_cap);
  }
  if (j.contains("warmup")) c.warmup = warmup_from_json(j.at("warmup"));
  if (j.contains("search")) c.search = search_from_json(j.at("search"));
  if (j.contains("pref")) c.pref = pref_from_json(j.at("pref"));
  read_field(j, "iterations", c.iterations);
  read_field(j, "alpha", c.alpha_percent);
  if (j.contains("reference")) c.reference = parse_reference_mode(j.at("reference").get<std::string>());
  if (j.contains("eval")) {
    const Json& e = j.at("eval");
    if (e.contains("decoding")) {
      const std::string d = e.at("decoding").get<std::string>();
      if (d != "greedy" && d != "sample") throw PreconditionError("unknown decoding '" + d + "'");
      c.eval.decoding = d == "greedy" ? Decoding::Greedy : Decoding::Sample;
    }
    read_field(e, "seed", c.eval.seed);
  }
  read_field(j, "dump_trees", c.dump_trees);
  return c;
}

DatasetSplit split_warmup_rl(std::span<const Example> dataset, double warmup_fraction,
                             std::uint64_t seed) {
  if (dataset.size() < 2) throw PreconditionError("need at least two examples to split");
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  std::size_t n_warm = static_cast<std::size_t>(std::llround(warmup_fraction * static_cast<double>(dataset.size())));
  n_warm = std::clamp<std::size_t>(n_warm, 1, dataset.size() - 1);
  std::vector<char> is_warm(dataset.size(), 0);
  for (std::size_t i = 0; i < n_warm; ++i) is_warm[order[i]] = 1;
  DatasetSplit split;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    (is_warm[i] ? split.warmup : split.rl).push_back(dataset[i]);
  }
  return split;
}

TrainingReport run_warmup(LinearPolicy& policy, std::span<const Example> data,
                          const WarmupConfig& config) {
  if (config.skip) return TrainingReport{};
  if (config.order == WarmupOrder::EasyToHard) {
    return warmup_train(policy, CurriculumPlan::easy_to_hard(data, config.epochs, config.learning_rate,
                                                             config.batch_size));
  }
  return mixed_train(policy, data, config.epochs, config.learning_rate, config.seed, config.batch_size);
}

std::vector<Example> generate_eval_set(const RunConfig& config) {
  CorpusConfig c = config.corpus;
  c.n_examples = config.n_eval;
  c.seed = config.eval_seed;
  c.id_prefix = "eval";
  return generate_corpus(c).examples;
}

Json RunResult::to_json() const {
  Json j;
  j["warmup"] = Json{{"training", warmup.to_json()}, {"eval", warmup_eval.to_json()}};
  Json its = Json::array();
  for (const IterationOutcome& o : iterations) {
    its.push_back(Json{{"report", o.report.to_json()}, {"eval", o.eval.to_json()}});
  }
  j["iterations"] = std::move(its);
  j["final_eval"] = final_eval().to_json();
  j["final_weights"] = policy.params().weights;
  return j;
}

RunResult run_pipeline_on(const RunConfig& config, std::span<const Example> corpus,
                          std::span<const Example> eval_set,
                          const std::optional<fs::path>& out_dir) {
  phase("config", [&] { config.validate(); });
  if (out_dir) fs::create_directories(*out_dir);
  auto artifact = [&](const fs::path& rel) { return *out_dir / rel; };

  const DatasetSplit split = phase("split", [&] {
    DatasetSplit s = split_warmup_rl(corpus, config.warmup_fraction, config.split_seed);
    check_disjoint(s.warmup, eval_set, "warm-up and eval sets");
    check_disjoint(s.rl, eval_set, "RL and eval sets");
    return s;
  });
  if (out_dir) {
    write_json_file(artifact("config.json"), config.to_json());
    write_examples_jsonl(artifact("warmup.jsonl"), split.warmup);
    write_examples_jsonl(artifact("rl.jsonl"), split.rl);
    write_examples_jsonl(artifact("eval.jsonl"), eval_set);
  }

  RunResult result{LinearPolicy(config.policy), {}, {}, {}};
  result.warmup = phase("warmup", [&] { return run_warmup(result.policy, split.warmup, config.warmup); });
  result.warmup_eval = phase("evaluate", [&] { return evaluate(result.policy, eval_set, config.eval); });
  if (out_dir) {
    write_json_file(artifact("warmup_report.json"),
                    Json{{"training", result.warmup.to_json()}, {"eval", result.warmup_eval.to_json()}});
    save_policy(artifact("policy_warmup.json"), result.policy);
  }

  std::vector<std::string> warm_ids;
  for (const Example& e : split.warmup) warm_ids.push_back(e.id);
  ReplayBuffer buffer = phase("buffer", [&] { return init_buffer(split.rl, warm_ids); });
  const ReferencePolicy warm_ref = freeze_reference(result.policy);

  for (std::size_t i = 1; i <= config.iterations; ++i) {
    const std::string name = "iteration " + std::to_string(i);
    IterationOptions opt;
    opt.iteration = i;
    opt.reference = config.reference;
    opt.warmup_reference = warm_ref;
    opt.keep_trees = config.dump_trees && out_dir.has_value();
    IterationResult it = phase(name, [&] {
      return run_iteration(result.policy, buffer, config.search, config.pref, config.alpha_percent, opt);
    });
    IterationOutcome outcome{it.report, phase("evaluate", [&] { return evaluate(result.policy, eval_set, config.eval); })};
    if (out_dir) {
      const fs::path dir = artifact("iteration_" + std::to_string(i));
      fs::create_directories(dir);
      write_json_file(dir / "iteration_report.json",
                      Json{{"report", outcome.report.to_json()}, {"eval", outcome.eval.to_json()}});
      write_jsonl(dir / "preferences.jsonl", preference_lines(it.pairs));
      write_buffer_jsonl(dir / "buffer.jsonl", buffer);
      save_policy(dir / "policy.json", result.policy);
      if (opt.keep_trees) {
        std::vector<Json> trees;
        for (const SearchTree& t : it.trees) trees.push_back(t.to_json());
        write_jsonl(dir / "trees.jsonl", trees);
      }
    }
    result.iterations.push_back(std::move(outcome));
  }

  if (out_dir) {
    write_json_file(artifact("report.json"), result.to_json());
    save_policy(artifact("policy.json"), result.policy);
  }
  return result;
}

RunResult run_pipeline(const RunConfig& config, const std::optional<fs::path>& out_dir) {
  phase("config", [&] { config.validate(); });
  const Corpus corpus = phase("corpus", [&] { return generate_corpus(config.corpus); });
  const std::vector<Example> eval_set = phase("corpus", [&] { return generate_eval_set(config); });
  if (out_dir) {
    fs::create_directories(*out_dir);
    write_tools_jsonl(*out_dir / "tools.jsonl", corpus.tool_pool);
  }
  return run_pipeline_on(config, corpus.examples, eval_set, out_dir);
}

std::vector<GainsRow> gains_sweep(const RunConfig& config, std::span<const double> fractions) {
  config.validate();
  const Corpus corpus = generate_corpus(config.corpus);
  const std::vector<Example> eval_set = generate_eval_set(config);
  std::vector<GainsRow> rows;
  for (double f : fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw PreconditionError("sweep fractions must lie in (0, 1]");
    const std::size_t n = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::llround(f * static_cast<double>(corpus.examples.size()))));
    std::span<const Example> prefix(corpus.examples.data(), std::min(n, corpus.examples.size()));
    const RunResult r = run_pipeline_on(config, prefix, eval_set);
    rows.push_back(GainsRow{f, prefix.size(), r.warmup_eval.accuracy_overall,
                            r.final_eval().accuracy_overall, r.warmup_eval.accuracy_hard,
                            r.final_eval().accuracy_hard});
  }
  return rows;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string gains_csv(std::span<const GainsRow> rows) {
  std::ostringstream out;
  out << "fraction,n_examples,sft_accuracy,itool_accuracy,sft_hard,itool_hard\n";
  for (const GainsRow& r : rows) {
    out << format_double(r.fraction) << ',' << r.n_examples << ',' << format_double(r.sft_accuracy) << ','
        << format_double(r.itool_accuracy) << ',' << format_double(r.sft_hard) << ','
        << format_double(r.itool_hard) << '\n';
  }
  return out.str();
}

}  // namespace toolrft
