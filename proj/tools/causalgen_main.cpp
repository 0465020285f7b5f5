// causalgen: mine causal pairs, build/query the cause-effect graph, train
// the n-gram scorer, run (constrained) decoding and the generation pipeline.
#include <cctype>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "causalgen/ceg.hpp"
#include "causalgen/data_tables.hpp"
#include "causalgen/decoding.hpp"
#include "causalgen/errors.hpp"
#include "causalgen/io.hpp"
#include "causalgen/miner.hpp"
#include "causalgen/morphology.hpp"
#include "causalgen/pipeline.hpp"
#include "causalgen/scoring.hpp"

namespace cg = causalgen;
using ordered_json = nlohmann::ordered_json;

namespace {

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::fwrite(content.data(), 1, content.size(), stdout);
  } else {
    cg::write_file(path, content);
  }
}

cg::Lexicon make_lexicon(const std::string& lexicon_path, const std::string& stopwords_path) {
  if (lexicon_path.empty() && stopwords_path.empty()) return cg::Lexicon::builtin();
  std::string lex_tsv = lexicon_path.empty() ? std::string(cg::builtin_lexicon_tsv())
                                             : cg::read_file(lexicon_path);
  std::string stop_txt = stopwords_path.empty() ? std::string(cg::builtin_stopwords_txt())
                                                : cg::read_file(stopwords_path);
  return cg::Lexicon::from_strings(lex_tsv, stop_txt);
}

std::vector<std::vector<std::string>> read_token_corpus(const std::string& path) {
  std::vector<std::vector<std::string>> corpus;
  cg::LineReader reader(path);
  std::string line;
  while (reader.next(line)) {
    std::vector<std::string> sent;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) i++;
      std::size_t b = i;
      while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) i++;
      if (i > b) sent.push_back(line.substr(b, i - b));
    }
    if (!sent.empty()) corpus.push_back(std::move(sent));
  }
  return corpus;
}

std::string hypotheses_to_json(const cg::DecodeResult& result, const cg::Vocabulary& vocab,
                               std::size_t top) {
  ordered_json j;
  j["scorer_calls"] = result.scorer_calls;
  ordered_json hyps = ordered_json::array();
  for (const cg::Hypothesis& h : result.hypotheses) {
    if (hyps.size() >= top) break;
    ordered_json o;
    std::string text;
    for (cg::TokenId t : h.tokens) {
      if (t == cg::Vocabulary::kBos || t == cg::Vocabulary::kEos || t == cg::Vocabulary::kUnk)
        continue;
      if (!text.empty()) text += ' ';
      text += vocab.token(t);
    }
    o["text"] = text;
    o["log_prob"] = h.log_prob;
    o["satisfied"] = h.satisfied;
    hyps.push_back(std::move(o));
  }
  j["hypotheses"] = hyps;
  return j.dump(2) + "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"causal pair mining, cause-effect graph and constrained generation toolkit"};
  app.require_subcommand(1);

  unsigned threads = 0;
  std::uint64_t seed = 0;
  app.add_option("--threads", threads, "worker threads (0 = hardware)")
      ->envname("CAUSALGEN_THREADS");
  app.add_option("--seed", seed, "seed for randomized decoding");

  // ---- mine ----
  auto* mine = app.add_subcommand("mine", "extract causal pairs from documents");
  std::vector<std::string> mine_inputs;
  std::string mine_out, mine_stats, patterns_path;
  int min_arg_tokens = 2, negation_window = 3;
  bool no_negation = false, no_passive = false, timestamps = false;
  mine->add_option("--in", mine_inputs, "input files, plain or gzip, one document per line")
      ->required();
  mine->add_option("--out", mine_out, "output JSONL path")->required();
  mine->add_option("--stats", mine_stats, "stats JSON path (default <out>.stats.json)");
  mine->add_option("--patterns", patterns_path, "pattern TSV (default: built-in inventory)")
      ->envname("CAUSALGEN_PATTERNS");
  mine->add_option("--min-arg-tokens", min_arg_tokens, "minimum tokens per argument")
      ->check(CLI::Range(1, 1000));
  mine->add_option("--negation-window", negation_window, "negation cue window")
      ->check(CLI::Range(0, 1000));
  mine->add_flag("--no-negation-filter", no_negation, "disable the negation filter");
  mine->add_flag("--no-passive-filter", no_passive, "disable the passive filter");
  mine->add_flag("--timestamps", timestamps, "include a timestamp in the stats file");

  // ---- build-graph ----
  auto* build = app.add_subcommand("build-graph", "build the cause-effect graph from pairs");
  std::vector<std::string> build_inputs;
  std::string build_out, lexicon_path, stopwords_path;
  std::uint64_t threshold = 5;
  build->add_option("--in", build_inputs, "pair JSONL files")->required();
  build->add_option("--out", build_out, "graph TSV path (sidecar <out>.idx is also written)")
      ->required();
  build->add_option("--threshold", threshold, "drop edges with frequency <= threshold");
  build->add_option("--lexicon", lexicon_path, "exception lexicon TSV")
      ->envname("CAUSALGEN_LEXICON");
  build->add_option("--stopwords", stopwords_path, "stopword list")
      ->envname("CAUSALGEN_STOPWORDS");

  // ---- query-graph ----
  auto* query = app.add_subcommand("query-graph", "query graph candidates for lemmas");
  std::string query_graph_path, query_direction = "cause", query_out;
  std::vector<std::string> query_lemmas;
  std::size_t query_n = 10;
  query->add_option("--graph", query_graph_path, "graph path")
      ->required()
      ->envname("CAUSALGEN_GRAPH");
  query->add_option("--direction", query_direction, "cause|effect")
      ->check(CLI::IsMember({"cause", "effect"}));
  query->add_option("-n,--top", query_n, "candidates to return");
  query->add_option("--out", query_out, "output TSV (default stdout)");
  query->add_option("lemmas", query_lemmas, "input lemmas")->required();

  // ---- train-lm ----
  auto* train = app.add_subcommand("train-lm", "train the n-gram scorer");
  std::string train_in, train_out;
  int order = 3;
  double alpha = 1.0;
  train->add_option("--in", train_in, "tokenized corpus, one sentence per line")->required();
  train->add_option("--out", train_out, "model path (sidecar <out>.vocab is also written)")
      ->required();
  train->add_option("--order", order, "n-gram order");
  train->add_option("--alpha", alpha, "Laplace smoothing");

  // ---- decode ----
  auto* decode = app.add_subcommand("decode", "beam or sampling decode");
  std::string decode_model, constraints_path, decode_out;
  std::size_t beam_size = 8, k_max = 16, top = 10, sample_count = 0;
  decode->add_option("--model", decode_model, "model path")
      ->required()
      ->envname("CAUSALGEN_MODEL");
  decode->add_option("--constraints", constraints_path,
                     "JSON list of disjunctive constraint sets");
  decode->add_option("--beam", beam_size, "beam size");
  decode->add_option("--kmax", k_max, "maximum output length");
  decode->add_option("--top", top, "hypotheses to print");
  decode->add_option("--sample", sample_count, "sample N outputs instead of beam search");
  decode->add_option("--out", decode_out, "output JSON (default stdout)");

  // ---- generate ----
  auto* gen = app.add_subcommand("generate", "graph-guided constrained generation");
  std::string gen_graph, gen_model, gen_input, gen_direction = "cause", gen_out;
  std::size_t gen_n = 300, gen_m = 5, gen_k = 10, gen_beam = 8, gen_kmax = 16;
  bool length_normalize = false;
  gen->add_option("--graph", gen_graph, "graph path")->required()->envname("CAUSALGEN_GRAPH");
  gen->add_option("--model", gen_model, "model path")->required()->envname("CAUSALGEN_MODEL");
  gen->add_option("--input", gen_input, "input sentence")->required();
  gen->add_option("--direction", gen_direction, "cause|effect")
      ->check(CLI::IsMember({"cause", "effect"}));
  gen->add_option("-N,--constraints-n", gen_n, "graph candidates to expand");
  gen->add_option("-M,--per-constraint", gen_m, "hypotheses kept per constraint");
  gen->add_option("-K,--top", gen_k, "final outputs");
  gen->add_option("--beam", gen_beam, "beam size");
  gen->add_option("--kmax", gen_kmax, "maximum output length");
  gen->add_flag("--length-normalize", length_normalize, "rank by per-token NLL");
  gen->add_option("--lexicon", lexicon_path, "exception lexicon TSV")
      ->envname("CAUSALGEN_LEXICON");
  gen->add_option("--out", gen_out, "output JSON (default stdout)");

  // ---- eval ----
  auto* eval = app.add_subcommand("eval", "perplexity/accuracy or diversity evaluation");
  std::string eval_model, eval_corpus, eval_gold, eval_outputs, eval_out;
  eval->add_option("--model", eval_model, "model path")->envname("CAUSALGEN_MODEL");
  eval->add_option("--corpus", eval_corpus, "tokenized eval corpus");
  eval->add_option("--gold", eval_gold, "gold answers, one per line");
  eval->add_option("--outputs", eval_outputs, "generated outputs, one per line (up to 3)");
  eval->add_option("--out", eval_out, "output JSON (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*mine) {
      cg::MinerConfig config = cg::MinerConfig::defaults();
      if (!patterns_path.empty()) config.patterns = cg::load_patterns_tsv(patterns_path);
      config.min_arg_tokens = min_arg_tokens;
      config.negation_window = negation_window;
      config.enable_negation_filter = !no_negation;
      config.enable_passive_filter = !no_passive;

      std::vector<std::string> documents;
      for (const std::string& path : mine_inputs) {
        cg::LineReader reader(path);
        std::string line;
        while (reader.next(line)) documents.push_back(line);
      }
      cg::MiningResult result = cg::mine_documents(documents, config, threads);
      cg::write_file(mine_out, cg::pairs_to_jsonl(result.pairs));
      const std::string stats_path = mine_stats.empty() ? mine_out + ".stats.json" : mine_stats;
      cg::write_file(stats_path, cg::stats_to_json(result.stats, timestamps));
      std::cerr << "mined " << result.pairs.size() << " pairs from "
                << result.stats.documents << " documents\n";
    } else if (*build) {
      std::vector<cg::CausalPair> pairs;
      for (const std::string& path : build_inputs) {
        std::vector<cg::CausalPair> chunk = cg::pairs_from_jsonl_file(path);
        pairs.insert(pairs.end(), std::make_move_iterator(chunk.begin()),
                     std::make_move_iterator(chunk.end()));
      }
      cg::Lexicon lexicon = make_lexicon(lexicon_path, stopwords_path);
      cg::CauseEffectGraph graph = cg::build_graph(pairs, threshold, lexicon, threads);
      graph.save(build_out);
      std::cerr << "graph: " << graph.node_count() << " nodes, " << graph.edge_count()
                << " edges\n";
    } else if (*query) {
      cg::CauseEffectGraph graph = cg::CauseEffectGraph::load(query_graph_path);
      std::set<std::string> lemmas(query_lemmas.begin(), query_lemmas.end());
      cg::GraphDirection dir = query_direction == "cause" ? cg::GraphDirection::CauseOf
                                                          : cg::GraphDirection::EffectOf;
      std::string out;
      for (const cg::WeightedLemma& w : cg::query_candidates(graph, lemmas, dir, query_n)) {
        out += w.lemma;
        out += '\t';
        out += std::to_string(w.freq);
        out += '\n';
      }
      write_output(query_out, out);
    } else if (*train) {
      cg::NGramModel model = cg::train_ngram(read_token_corpus(train_in), order, alpha);
      model.save(train_out);
      std::cerr << "trained order-" << order << " model, |V| = " << model.vocab().size()
                << "\n";
    } else if (*decode) {
      cg::NGramModel model = cg::NGramModel::load(decode_model);
      cg::DecodeResult result;
      if (sample_count > 0) {
        result = cg::random_sampling_decode(model, sample_count, k_max, seed);
        if (top < sample_count) top = sample_count;  // samples are not ranked
      } else {
        std::vector<cg::DisjunctiveConstraintSet> sets;
        if (!constraints_path.empty())
          sets = cg::parse_constraint_sets(cg::read_file(constraints_path), model.vocab());
        result = cg::constrained_beam_search(model, sets, beam_size, k_max);
      }
      write_output(decode_out, hypotheses_to_json(result, model.vocab(), top));
    } else if (*gen) {
      cg::CauseEffectGraph graph = cg::CauseEffectGraph::load(gen_graph);
      cg::NGramModel model = cg::NGramModel::load(gen_model);
      cg::Lexicon lexicon = make_lexicon(lexicon_path, stopwords_path);
      cg::GenerationConfig config;
      config.direction = gen_direction == "cause" ? cg::CausalDirection::Cause
                                                  : cg::CausalDirection::Effect;
      config.n_constraints = gen_n;
      config.per_constraint_keep = gen_m;
      config.final_k = gen_k;
      config.beam_size = gen_beam;
      config.k_max = gen_kmax;
      config.length_normalize = length_normalize;
      config.threads = threads;
      cg::GenerationResult result = cg::generate(gen_input, graph, model, lexicon, config);
      write_output(gen_out, cg::generation_result_to_json(result));
    } else if (*eval) {
      ordered_json j;
      if (!eval_model.empty() && !eval_corpus.empty()) {
        cg::NGramModel model = cg::NGramModel::load(eval_model);
        std::vector<std::vector<std::string>> corpus = read_token_corpus(eval_corpus);
        j["perplexity"] = cg::perplexity(model, corpus);
        j["word_accuracy"] = cg::word_accuracy(model, corpus);
      }
      if (!eval_gold.empty() && !eval_outputs.empty()) {
        j["div"] = cg::div_metric(cg::read_all_lines(eval_gold),
                                  cg::read_all_lines(eval_outputs));
      }
      if (j.empty())
        throw CLI::ValidationError(
            "eval", "pass --model with --corpus, or --gold with --outputs");
      write_output(eval_out, j.dump(2) + "\n");
    }
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
