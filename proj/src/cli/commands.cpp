#include "scidraft/cli/commands.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "scidraft/cli/config.hpp"
#include "scidraft/cli/manifest.hpp"
#include "scidraft/cli/papers.hpp"
#include "scidraft/error.hpp"
#include "scidraft/eval/metrics.hpp"
#include "scidraft/eval/writer_provider.hpp"
#include "scidraft/kg/io.hpp"
#include "scidraft/kg/matcher.hpp"
#include "scidraft/link/enrich.hpp"
#include "scidraft/link/model.hpp"
#include "scidraft/link/train.hpp"
#include "scidraft/writer/chain.hpp"
#include "scidraft/writer/corpus.hpp"
#include "scidraft/writer/train.hpp"

namespace scidraft::cli {

namespace fs = std::filesystem;

namespace {

const char* const kTasks[] = {"title2abstract", "abstract2conclusion", "conclusion2title"};

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DependencyError(path.string());
  return in;
}

std::string slurp(const fs::path& path) {
  std::ifstream in = open_input(path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in = open_input(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

// Shared state of one invocation.
struct Context {
  Config config;
  RunManifest manifest;
  std::ostream& out;
  std::ostream& err;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void input(const fs::path& path) { manifest.inputs.push_back(digest(path)); }

  void output(const fs::path& path, std::string_view content) {
    ensure_parent(path);
    write_atomically(path, content);
    manifest.outputs.push_back(FileDigest{path.string(), sha256_hex(content)});
  }

  void finish(const fs::path& primary) {
    manifest.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(primary, manifest);
    err << "manifest: " << manifest_path(primary).string() << "\n";
  }
};

struct LoadedGraph {
  kg::KnowledgeGraph graph;
  kg::ContextIndex context;
};

LoadedGraph load_graph(Context& ctx, const fs::path& graph_path, const std::string& sentences_path) {
  LoadedGraph g;
  {
    std::ifstream in = open_input(graph_path);
    g.graph = kg::read_triples(in, graph_path.string());
    ctx.input(graph_path);
  }
  if (!sentences_path.empty()) {
    std::ifstream in = open_input(sentences_path);
    std::vector<std::string> warnings;
    g.context = kg::read_sentences(in, g.graph, &warnings, sentences_path);
    for (const auto& w : warnings) ctx.err << "warning: " << w << "\n";
    ctx.input(sentences_path);
  }
  return g;
}

writer::TokenSets token_sets(Context& ctx) {
  if (ctx.config.stopwords.empty()) return writer::TokenSets();
  std::ifstream in = open_input(ctx.config.stopwords);
  ctx.input(ctx.config.stopwords);
  return writer::TokenSets(writer::read_word_list(in));
}

writer::WriterModel load_writer(Context& ctx, const fs::path& path) {
  std::ifstream in = open_input(path);
  ctx.input(path);
  return writer::read_writer_model(in);
}

// Title-to-abstract pairs without explicit entities get the related entities
// of their title, exactly as generation retrieves them.
std::vector<writer::WriterExample> task_examples(const std::vector<writer::CorpusPair>& pairs,
                                                 const std::string& task, const kg::KnowledgeGraph* graph,
                                                 const Config& config) {
  static const kg::KnowledgeGraph empty;
  std::vector<writer::WriterExample> examples = writer::to_examples(pairs, graph ? *graph : empty);
  if (task != "title2abstract") return examples;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!pairs[i].entities.empty()) continue;
    for (const auto& r : writer::title_related(examples[i].source, *graph, config.related_limit)) {
      examples[i].entities.push_back(writer::EntityMemory{r.entity, kg::name_tokens(graph->entity(r.entity))});
    }
  }
  return examples;
}

std::vector<writer::CorpusPair> load_corpus(Context& ctx, const fs::path& path) {
  std::ifstream in = open_input(path);
  ctx.input(path);
  return writer::read_corpus(in, path.string());
}

std::string format_number(double v, int precision = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << v;
  return s.str();
}

// Aligned two-or-more column table.
void print_table(std::ostream& out, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& row : rows) {
    width.resize(std::max(width.size(), row.size()), 0);
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << (c ? "  " : "") << std::setw(static_cast<int>(width[c])) << (c ? std::right : std::left) << row[c];
    }
    out << "\n";
  }
}

// ---------------------------------------------------------------------------

struct IngestArgs {
  std::string triples, sentences, papers, out;
};

void ingest(Context& ctx, const IngestArgs& a) {
  const fs::path dir = a.out;
  LoadedGraph g = load_graph(ctx, a.triples, a.sentences);
  std::ostringstream graph_text;
  kg::write_graph(graph_text, g.graph);
  ctx.output(dir / "graph.tsv", graph_text.str());
  if (!a.sentences.empty()) {
    std::ostringstream s;
    kg::write_sentences(s, g.context, g.graph);
    ctx.output(dir / "sentences.jsonl", s.str());
  }
  std::size_t paper_count = 0;
  if (!a.papers.empty()) {
    std::ifstream in = open_input(a.papers);
    ctx.input(a.papers);
    const auto papers = read_papers(in, a.papers);
    paper_count = papers.size();
    const TaskCorpora corpora = build_task_corpora(papers);
    for (const auto& w : corpora.warnings) ctx.err << "warning: " << w << "\n";
    const std::pair<const char*, const std::vector<writer::CorpusPair>*> tasks[] = {
        {"title2abstract", &corpora.title2abstract},
        {"abstract2conclusion", &corpora.abstract2conclusion},
        {"conclusion2title", &corpora.conclusion2title}};
    for (const auto& [name, pairs] : tasks) {
      std::ostringstream s;
      writer::write_corpus(s, *pairs);
      ctx.output(dir / (std::string(name) + ".jsonl"), s.str());
      ctx.out << name << ": " << pairs->size() << " pairs\n";
    }
  }
  ctx.out << "entities: " << g.graph.entity_count() << "\nrelations: " << g.graph.relation_count()
          << "\ntriples: " << g.graph.triple_count() << "\nsentences: " << g.context.sentence_count()
          << "\npapers: " << paper_count << "\n";
  ctx.finish(dir / "graph.tsv");
}

struct TrainLinkArgs {
  std::string graph, sentences, out;
};

void train_link(Context& ctx, const TrainLinkArgs& a) {
  const Config& c = ctx.config;
  LoadedGraph g = load_graph(ctx, a.graph, a.sentences);
  numerics::Rng rng(c.seed);
  link::LinkPredictParams params = link::create_link_params(link_config(c), g.graph, g.context, rng, c.init_scale);
  link::LinkTrainOptions options;
  options.epochs = c.link_epochs;
  options.batch_size = c.link_batch;
  options.seed = c.seed;
  options.adam.learning_rate = c.learning_rate;
  options.on_epoch = [&](std::size_t epoch, double loss) {
    if ((epoch + 1) % 10 == 0 || epoch + 1 == c.link_epochs) {
      ctx.err << "epoch " << epoch + 1 << " loss " << format_number(loss, 6) << "\n";
    }
  };
  const link::LinkTrainReport report = link::train_margin(params, g.graph, g.context, options);
  std::ostringstream bytes;
  link::write_link_model(bytes, params);
  ctx.output(a.out, bytes.str());
  ctx.out << "optimizer steps: " << report.optimizer_steps << "\nfinal epoch loss: "
          << format_number(report.epoch_loss.empty() ? 0.0 : report.epoch_loss.back(), 6) << "\n";
  ctx.finish(a.out);
}

struct EnrichArgs {
  std::string graph, sentences, model, out;
};

void enrich(Context& ctx, const EnrichArgs& a) {
  LoadedGraph g = load_graph(ctx, a.graph, a.sentences);
  std::ifstream in = open_input(a.model);
  ctx.input(a.model);
  const link::LinkPredictParams params = link::read_link_model(in);
  if (params.entity_count() != g.graph.entity_count() || params.relation_count() != g.graph.relation_count()) {
    throw DataError("link model " + a.model + " was trained on a different graph (" +
                    std::to_string(params.entity_count()) + " entities, " + std::to_string(params.relation_count()) +
                    " relations)");
  }
  const auto reps = link::encode_all(params, g.graph, g.context);
  const kg::KnowledgeGraph enriched = link::propagate_links(g.graph, reps, ctx.config.similarity_threshold);
  std::ostringstream text;
  kg::write_graph(text, enriched);
  ctx.output(a.out, text.str());
  ctx.out << "triples before: " << g.graph.triple_count() << "\ntriples after: " << enriched.triple_count() << "\n";
  ctx.finish(a.out);
}

struct TrainWriterArgs {
  std::string task, corpus, graph, out;
};

void train_writer_command(Context& ctx, const TrainWriterArgs& a) {
  const Config& c = ctx.config;
  std::optional<kg::KnowledgeGraph> graph;
  if (!a.graph.empty()) graph = load_graph(ctx, a.graph, "").graph;
  if (a.task == "title2abstract" && !graph) {
    throw DataError("train-writer title2abstract needs --graph to retrieve related entities");
  }
  const auto pairs = load_corpus(ctx, a.corpus);
  const auto examples = task_examples(pairs, a.task, graph ? &*graph : nullptr, c);
  const std::size_t entity_count = a.task == "title2abstract" ? graph->entity_count() : 0;

  numerics::Rng rng(c.seed);
  writer::WriterModel model = writer::create_writer_model(
      writer_config(c), a.task, writer::build_writer_vocab(examples, c.oov_floor), entity_count, rng, c.init_scale);
  writer::WriterTrainOptions options;
  options.epochs = c.writer_epochs;
  options.seed = c.seed;
  options.adam.learning_rate = c.learning_rate;
  options.target_perplexity = c.target_perplexity;
  options.on_epoch = [&](const writer::WriterEpoch& e) {
    if ((e.epoch + 1) % 10 == 0 || e.epoch + 1 == c.writer_epochs) {
      ctx.err << "epoch " << e.epoch + 1 << " loss " << format_number(e.mean_loss) << " perplexity "
              << format_number(e.perplexity) << "\n";
    }
  };
  const writer::WriterTrainReport report = writer::train_writer(model, examples, options);
  std::ostringstream bytes;
  writer::write_writer_model(bytes, model);
  ctx.output(a.out, bytes.str());
  ctx.out << "task: " << a.task << "\npairs: " << examples.size() << "\nvocabulary: " << model.vocab.size()
          << "\nepochs: " << report.epochs.size() << "\nperplexity: " << format_number(report.final_perplexity, 6)
          << "\n";
  ctx.finish(a.out);
}

struct GenerateArgs {
  std::string graph, title2abstract, abstract2conclusion, conclusion2title, titles, out;
  bool no_second_abstract = false;
};

void generate(Context& ctx, const GenerateArgs& a) {
  // Check upstream artifacts before doing any work.
  for (const std::string& p : {a.graph, a.title2abstract, a.abstract2conclusion, a.conclusion2title, a.titles}) {
    if (!fs::exists(p)) throw DependencyError(p);
  }
  const kg::KnowledgeGraph graph = load_graph(ctx, a.graph, "").graph;
  const writer::WriterModel m1 = load_writer(ctx, a.title2abstract);
  const writer::WriterModel m2 = load_writer(ctx, a.abstract2conclusion);
  const writer::WriterModel m3 = load_writer(ctx, a.conclusion2title);
  const writer::TokenSets sets = token_sets(ctx);
  writer::ChainOptions options;
  options.beam.beam = ctx.config.beam;
  options.beam.max_len = ctx.config.max_len;
  options.related_limit = ctx.config.related_limit;
  options.second_abstract = !a.no_second_abstract;

  ctx.input(a.titles);
  std::ostringstream records;
  std::size_t count = 0, incomplete = 0;
  for (const auto& line : read_lines(a.titles)) {
    const auto title = writer::tokenize_text(line);
    if (title.empty()) continue;
    const writer::GenerationRecord record =
        writer::generate_chain(title, graph, writer::ChainModels{m1, m2, m3}, sets, options);
    records << writer::to_json(record, graph).dump() << "\n";
    ++count;
    if (!record.complete) {
      ++incomplete;
      ctx.err << "warning: '" << line << "': " << record.error << "\n";
    }
  }
  ctx.output(a.out, records.str());
  ctx.out << "records: " << count << "\nincomplete: " << incomplete << "\n";
  ctx.finish(a.out);
}

// ---------------------------------------------------------------------------
// eval

void report(Context& ctx, const eval::MetricReport& r, const std::string& out_path) {
  if (out_path.empty()) return;
  ctx.output(out_path, eval::to_json(r).dump(2) + "\n");
  ctx.finish(out_path);
}

std::vector<std::vector<std::string>> tokenized_lines(Context& ctx, const std::string& path) {
  std::vector<std::vector<std::string>> out;
  for (const auto& line : read_lines(path)) out.push_back(writer::tokenize_text(line));
  ctx.input(path);
  return out;
}

struct OverlapArgs {
  std::string input, output, out;
  std::vector<std::size_t> n{1, 2, 3, 4};
};

void eval_overlap(Context& ctx, const OverlapArgs& a) {
  const auto human = tokenized_lines(ctx, a.input);
  const auto system = tokenized_lines(ctx, a.output);
  if (human.size() != system.size()) {
    throw DataError("overlap needs line-aligned files: " + std::to_string(human.size()) + " vs " +
                    std::to_string(system.size()) + " lines");
  }
  eval::MetricReport r{"ngram_overlap", {}, {a.input, a.output}, {{"n", a.n}, {"aggregate", "mean over lines"}}};
  std::vector<std::vector<std::string>> table{{"n", "overlap %", "lines", "too short"}};
  for (std::size_t n : a.n) {
    double sum = 0.0;
    std::size_t used = 0, short_lines = 0;
    for (std::size_t i = 0; i < human.size(); ++i) {
      const eval::Overlap o = eval::ngram_overlap(human[i], system[i], n);
      if (o.input_too_short) {
        ++short_lines;
        continue;
      }
      sum += o.percentage;
      ++used;
    }
    const double mean = used ? sum / static_cast<double>(used) : 0.0;
    r.values.emplace_back(std::to_string(n), mean);
    table.push_back({std::to_string(n), format_number(mean, 2), std::to_string(used), std::to_string(short_lines)});
  }
  print_table(ctx.out, table);
  report(ctx, r, a.out);
}

struct PerplexityArgs {
  std::string model, corpus, graph, out;
};

void eval_perplexity(Context& ctx, const PerplexityArgs& a) {
  const writer::WriterModel model = load_writer(ctx, a.model);
  std::optional<kg::KnowledgeGraph> graph;
  if (!a.graph.empty()) graph = load_graph(ctx, a.graph, "").graph;
  const auto pairs = load_corpus(ctx, a.corpus);
  if (model.task == "title2abstract" && !graph) {
    bool explicit_entities = true;
    for (const auto& p : pairs) explicit_entities = explicit_entities && !p.entities.empty();
    if (!explicit_entities) throw DataError("perplexity of a title2abstract model needs --graph");
  }
  const auto examples = task_examples(pairs, model.task, graph ? &*graph : nullptr, ctx.config);
  const double value = eval::perplexity(eval::WriterProvider(model, examples));
  eval::MetricReport r{"perplexity", {{"perplexity", value}}, {a.corpus}, {{"task", model.task}}};
  print_table(ctx.out, {{"task", "pairs", "perplexity"},
                        {model.task, std::to_string(examples.size()), format_number(value, 6)}});
  report(ctx, r, a.out);
}

struct BleuArgs {
  std::string candidate, reference, out;
};

void eval_bleu(Context& ctx, const BleuArgs& a) {
  const auto cand = tokenized_lines(ctx, a.candidate);
  const auto ref = tokenized_lines(ctx, a.reference);
  if (cand.size() != ref.size() || cand.empty()) {
    throw DataError("BLEU/ROUGE need non-empty line-aligned files");
  }
  std::vector<double> sums(5, 0.0);
  for (std::size_t i = 0; i < cand.size(); ++i) {
    if (ref[i].empty()) throw DataError(a.reference + ":" + std::to_string(i + 1) + ": empty reference");
    const eval::BleuRouge s = eval::bleu_rouge(cand[i], ref[i]);
    for (std::size_t n = 0; n < 4; ++n) sums[n] += s.bleu[n];
    sums[4] += s.rouge_l;
  }
  const char* names[] = {"BLEU1", "BLEU2", "BLEU3", "BLEU4", "ROUGE-L"};
  eval::MetricReport r{"bleu_rouge", {}, {a.candidate, a.reference},
                       {{"max_n", 4}, {"smoothing", "add-one for n>=2 zero counts"}, {"aggregate", "mean over lines"}}};
  std::vector<std::string> header, row;
  for (std::size_t k = 0; k < 5; ++k) {
    const double mean = sums[k] / static_cast<double>(cand.size());
    r.values.emplace_back(names[k], mean);
    header.push_back(names[k]);
    row.push_back(format_number(mean));
  }
  print_table(ctx.out, {header, row});
  report(ctx, r, a.out);
}

struct RepetitionArgs {
  std::string text, lexicon, out;
};

void eval_repetition(Context& ctx, const RepetitionArgs& a) {
  const std::string text = slurp(a.text);
  ctx.input(a.text);
  std::ifstream in = open_input(a.lexicon);
  ctx.input(a.lexicon);
  const auto words = writer::read_word_list(in);
  const std::unordered_set<std::string> lexicon(words.begin(), words.end());
  const double rate = eval::repetition_rate(text, lexicon);
  eval::MetricReport r{"repetition_rate", {{"fraction", rate}}, {a.text}, {{"lexicon", a.lexicon}}};
  print_table(ctx.out, {{"sentences with repeated entities"}, {format_number(100.0 * rate, 2) + " %"}});
  report(ctx, r, a.out);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Knowledge-graph enrichment and paper-element generation"};
  app.require_subcommand(1);
  std::string keys = "Configuration keys and defaults:\n";
  const Config defaults;
  for (const auto& key : config_keys()) keys += "  " + std::string(key.name) + " = " + value_string(defaults, key) + "\n";
  app.footer(keys);
  std::string config_path;
  std::vector<std::string> sets;
  app.add_option("--config", config_path, "configuration file (otherwise $" + std::string(kConfigEnv) + ")");
  app.add_option("--set", sets, "override one configuration key: key=value")->take_all();
  app.fallthrough();

  IngestArgs ingest_args;
  auto* ingest_cmd = app.add_subcommand("ingest", "read triples, sentences and papers into a working directory");
  ingest_cmd->add_option("--triples", ingest_args.triples, "triples file")->required();
  ingest_cmd->add_option("--sentences", ingest_args.sentences, "context sentences (JSON lines)");
  ingest_cmd->add_option("--papers", ingest_args.papers, "papers (JSON lines) for the writer corpora");
  ingest_cmd->add_option("--out", ingest_args.out, "output directory")->required();

  TrainLinkArgs link_args;
  auto* link_cmd = app.add_subcommand("train-link", "train the link predictor");
  link_cmd->add_option("--graph", link_args.graph, "graph file")->required();
  link_cmd->add_option("--sentences", link_args.sentences, "context sentences");
  link_cmd->add_option("--out", link_args.out, "model file")->required();

  EnrichArgs enrich_args;
  auto* enrich_cmd = app.add_subcommand("enrich", "add predicted links to the graph");
  enrich_cmd->add_option("--graph", enrich_args.graph, "graph file")->required();
  enrich_cmd->add_option("--sentences", enrich_args.sentences, "context sentences");
  enrich_cmd->add_option("--model", enrich_args.model, "link model file")->required();
  enrich_cmd->add_option("--out", enrich_args.out, "enriched graph file")->required();

  TrainWriterArgs writer_args;
  auto* writer_cmd = app.add_subcommand("train-writer", "train one writer model");
  writer_cmd->add_option("--task", writer_args.task, "writer task")
      ->required()
      ->check(CLI::IsMember(std::vector<std::string>(std::begin(kTasks), std::end(kTasks))));
  writer_cmd->add_option("--corpus", writer_args.corpus, "training pairs (JSON lines)")->required();
  writer_cmd->add_option("--graph", writer_args.graph, "enriched graph (needed for title2abstract)");
  writer_cmd->add_option("--out", writer_args.out, "model file")->required();

  GenerateArgs gen_args;
  auto* gen_cmd = app.add_subcommand("generate", "write abstract, conclusion and follow-on title for each title");
  gen_cmd->add_option("--graph", gen_args.graph, "enriched graph")->required();
  gen_cmd->add_option("--title2abstract", gen_args.title2abstract, "writer model")->required();
  gen_cmd->add_option("--abstract2conclusion", gen_args.abstract2conclusion, "writer model")->required();
  gen_cmd->add_option("--conclusion2title", gen_args.conclusion2title, "writer model")->required();
  gen_cmd->add_option("--titles", gen_args.titles, "one title per line")->required();
  gen_cmd->add_option("--out", gen_args.out, "generation records (JSON lines)")->required();
  gen_cmd->add_flag("--no-second-abstract", gen_args.no_second_abstract, "stop after the follow-on title");

  auto* eval_cmd = app.add_subcommand("eval", "automatic metrics");
  eval_cmd->require_subcommand(1);
  OverlapArgs overlap_args;
  auto* overlap_cmd = eval_cmd->add_subcommand("overlap", "share of human-input n-grams found in system output");
  overlap_cmd->add_option("--input", overlap_args.input, "human input, one text per line")->required();
  overlap_cmd->add_option("--output", overlap_args.output, "system output, line-aligned")->required();
  overlap_cmd->add_option("--n", overlap_args.n, "n-gram orders")->check(CLI::PositiveNumber);
  overlap_cmd->add_option("--out", overlap_args.out, "JSON report");
  PerplexityArgs ppl_args;
  auto* ppl_cmd = eval_cmd->add_subcommand("perplexity", "per-token perplexity of a writer model");
  ppl_cmd->add_option("--model", ppl_args.model, "writer model")->required();
  ppl_cmd->add_option("--corpus", ppl_args.corpus, "pairs (JSON lines)")->required();
  ppl_cmd->add_option("--graph", ppl_args.graph, "enriched graph for related entities");
  ppl_cmd->add_option("--out", ppl_args.out, "JSON report");
  BleuArgs bleu_args;
  auto* bleu_cmd = eval_cmd->add_subcommand("bleu", "BLEU-1..4 and ROUGE-L");
  bleu_cmd->add_option("--candidate", bleu_args.candidate, "system texts, one per line")->required();
  bleu_cmd->add_option("--reference", bleu_args.reference, "reference texts, line-aligned")->required();
  bleu_cmd->add_option("--out", bleu_args.out, "JSON report");
  RepetitionArgs rep_args;
  auto* rep_cmd = eval_cmd->add_subcommand("repetition", "share of sentences repeating an entity");
  rep_cmd->add_option("--text", rep_args.text, "text file")->required();
  rep_cmd->add_option("--lexicon", rep_args.lexicon, "entity words, one per line")->required();
  rep_cmd->add_option("--out", rep_args.out, "JSON report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    Config config;
    if (config_path.empty()) {
      if (const char* env = std::getenv(kConfigEnv); env && *env) config_path = env;
    }
    if (!config_path.empty()) config = load_config(config_path);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError(s, "--set expects key=value");
      set_value(config, s.substr(0, eq), s.substr(eq + 1));
    }
    validate(config);

    Context ctx{config, {}, out, err};
    CLI::App* command = app.get_subcommands().front();
    ctx.manifest.command = command->get_name();
    if (command == eval_cmd) ctx.manifest.command += " " + eval_cmd->get_subcommands().front()->get_name();
    for (int i = 1; i < argc; ++i) ctx.manifest.arguments.emplace_back(argv[i]);
    ctx.manifest.config_hash = config_hash(config);
    ctx.manifest.overrides = overrides(config);
    ctx.manifest.seed = config.seed;
    if (!config_path.empty()) ctx.input(config_path);
    for (const auto& [key, value] : ctx.manifest.overrides) err << "config: " << key << " = " << value << "\n";

    if (command == ingest_cmd) ingest(ctx, ingest_args);
    else if (command == link_cmd) train_link(ctx, link_args);
    else if (command == enrich_cmd) enrich(ctx, enrich_args);
    else if (command == writer_cmd) train_writer_command(ctx, writer_args);
    else if (command == gen_cmd) generate(ctx, gen_args);
    else if (overlap_cmd->parsed()) eval_overlap(ctx, overlap_args);
    else if (ppl_cmd->parsed()) eval_perplexity(ctx, ppl_args);
    else if (bleu_cmd->parsed()) eval_bleu(ctx, bleu_args);
    else if (rep_cmd->parsed()) eval_repetition(ctx, rep_args);
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DependencyError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDependency;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace scidraft::cli
