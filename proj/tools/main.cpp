// longcoref: mention detection, coreference resolution, scoring and
// experiments over document JSON files.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>

#include "CLI11.hpp"
#include "cli_support.hpp"
#include "longcoref/conll.hpp"
#include "longcoref/detector.hpp"
#include "longcoref/errors.hpp"
#include "longcoref/gender.hpp"
#include "longcoref/harness.hpp"
#include "longcoref/io.hpp"
#include "longcoref/lexicon.hpp"
#include "longcoref/pair_model.hpp"
#include "longcoref/pipeline.hpp"
#include "longcoref/resolver.hpp"
#include "longcoref/settings.hpp"
#include "longcoref/synthetic.hpp"

using namespace longcoref;
using namespace longcoref::cli;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string pipeline_config;
  std::size_t jobs = 1;
  std::string manifest;
  std::size_t pronoun_window = 0;
  std::size_t noun_window = 0;
  double threshold = 0.5;
  std::string strategy;
  std::string conjunctions;
  CLI::Option* pronoun_window_opt = nullptr;
  CLI::Option* noun_window_opt = nullptr;
  CLI::Option* threshold_opt = nullptr;
  CLI::Option* strategy_opt = nullptr;
  CLI::Option* conjunctions_opt = nullptr;
};

struct Context {
  PipelineConfig config;
  std::size_t jobs = 1;
  RunManifest manifest;
  fs::path manifest_path;
};

PipelineConfig build_config(const Globals& g) {
  PipelineConfig c;
  std::string path = g.pipeline_config;
  if (path.empty()) {
    if (const char* env = std::getenv("LONGCOREF_CONFIG")) path = env;
  }
  if (!path.empty()) {
    try {
      apply_pipeline_settings(c, read_text(path));
    } catch (const ParseError& e) {
      throw ParseError(path, e.what());
    }
  }
  if (g.pronoun_window_opt->count()) c.pronoun_window = g.pronoun_window;
  if (g.noun_window_opt->count()) c.noun_window = g.noun_window;
  if (g.threshold_opt->count()) c.null_threshold = g.threshold;
  if (g.strategy_opt->count()) {
    auto s = parse_strategy(g.strategy);
    if (!s) throw UsageError("--strategy: expected left_to_right or easy_first_global");
    c.clustering_strategy = *s;
  }
  if (g.conjunctions_opt->count()) apply_pipeline_settings(c, "conjunctions = " + g.conjunctions);
  c.validate();
  return c;
}

void print_report(std::ostream& os, const MetricReport& r) {
  os << std::fixed << std::setprecision(5);
  os << "metric\tprecision\trecall\tf1\n";
  os << "MUC\t" << r.muc.precision << '\t' << r.muc.recall << '\t' << r.muc.f1 << '\n';
  os << "B3\t" << r.b_cubed.precision << '\t' << r.b_cubed.recall << '\t' << r.b_cubed.f1 << '\n';
  os << "CEAFe\t" << r.ceaf_e.precision << '\t' << r.ceaf_e.recall << '\t' << r.ceaf_e.f1 << '\n';
  os << "CoNLL\t-\t-\t" << r.conll_f1 << '\n';
}

json prf_json(const Prf& p) { return {{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}}; }

void record_inputs(Context& ctx, const std::vector<fs::path>& files) {
  for (const auto& f : files) {
    ctx.manifest.add_input(f);
    if (f.extension() == ".json") {
      const auto emb = embeddings_path(f);
      if (!emb.empty() && fs::exists(emb)) ctx.manifest.add_input(emb);
    }
  }
}

fs::path beside(const fs::path& out, const std::string& suffix) { return fs::path(out.string() + suffix); }

std::size_t first_embedding_dim(const std::vector<Document>& docs) {
  for (const auto& d : docs) {
    if (d.embeddings) return d.embeddings->dim();
  }
  throw ValidationError("no input document has embeddings");
}

std::unique_ptr<std::ofstream> open_log(const std::string& path) {
  if (path.empty()) return nullptr;
  auto f = std::make_unique<std::ofstream>(path);
  if (!*f) throw Error(path + ": cannot write");
  return f;
}

// ---------------------------------------------------------------------------

struct ValidateCmd {
  std::vector<std::string> inputs;
  bool require_embeddings = false;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("validate", "Parse documents and check their invariants");
    c->add_option("inputs", inputs, "Document files or directories")->required();
    c->add_flag("--require-embeddings", require_embeddings,
                "Fail documents without embeddings or whose width differs from embedding_dim");
  }

  int run(Context& ctx) {
    const auto files = expand_inputs(inputs);
    record_inputs(ctx, files);
    std::size_t failed = 0;
    for (const auto& f : files) {
      try {
        const auto doc = load_document(f);
        if (require_embeddings) {
          if (!doc.embeddings) throw ValidationError("no embeddings");
          if (doc.embeddings->dim() != ctx.config.embedding_dim) {
            throw DimensionError("embedding width " + std::to_string(doc.embeddings->dim()) + ", expected " +
                                 std::to_string(ctx.config.embedding_dim));
          }
        }
        std::cout << f.string() << "\tok\t" << doc.doc_id << "\ttokens=" << doc.tokens.size()
                  << "\tmentions=" << doc.mentions.size() << "\tchains=" << doc.chains.size()
                  << "\tembedding_dim=" << (doc.embeddings ? doc.embeddings->dim() : 0) << '\n';
      } catch (const Error& e) {
        ++failed;
        std::cout << f.string() << "\terror\t" << e.what() << '\n';
      }
    }
    if (failed) std::cerr << failed << " of " << files.size() << " documents failed\n";
    return failed ? kInput : kOk;
  }
};

struct TrainDetectorCmd {
  std::vector<std::string> inputs;
  std::string out, log, encoder = "bilstm";
  TaggerArch arch;
  TaggerTrainConfig train;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("train-detector", "Train a BIOES mention tagger for one nesting level");
    c->add_option("inputs", inputs, "Training documents (with embeddings)")->required();
    c->add_option("-o,--out", out, "Checkpoint path")->required();
    c->add_option("--level", arch.level, "Nesting level: 0 outer, 1 inner")->check(CLI::Range(0, 1));
    c->add_option("--encoder", encoder, "bilstm or window_mixer")->check(CLI::IsMember({"bilstm", "window_mixer"}));
    c->add_option("--projection", arch.projection_dim, "Highway projection width");
    c->add_option("--hidden", arch.hidden, "Encoder width per direction");
    c->add_option("--window", arch.window, "Half width of the window mixer");
    c->add_option("--dropout", arch.dropout);
    c->add_option("--epochs", train.max_epochs);
    c->add_option("--lr", train.learning_rate);
    c->add_option("--weight-decay", train.weight_decay);
    c->add_option("--batch", train.batch_sentences, "Sentences per update");
    c->add_option("--train-fraction", train.train_fraction);
    c->add_option("--target-f1", train.target_f1, "Stop once validation F1 reaches this");
    c->add_option("--seed", train.seed);
    c->add_option("--log", log, "Epoch log, one JSON object per line");
  }

  int run(Context& ctx) {
    const auto files = expand_inputs(inputs);
    record_inputs(ctx, files);
    const auto docs = load_documents(files);
    arch.embedding_dim = first_embedding_dim(docs);
    arch.encoder = nn::parse_encoder_kind(encoder);
    arch.seed = train.seed + 6;
    ctx.manifest.set_seed(train.seed);
    auto log_file = open_log(log);
    auto result = train_tagger(docs, arch, train, log_file.get());
    result.model.save(fs::path(out));
    ctx.manifest.add_output(out);
    if (!log.empty()) ctx.manifest.add_output(log);
    std::cout << std::fixed << std::setprecision(5) << "level\t" << arch.level << "\nepochs\t" << result.log.size()
              << "\nbest_epoch\t" << result.best_epoch << "\nvalidation_f1\t" << result.best_f1
              << "\ntrain_sentences\t" << result.train_sentences << "\nvalidation_sentences\t"
              << result.validation_sentences << "\nskipped_spans\t" << result.skipped_spans << '\n';
    return kOk;
  }
};

struct DetectCmd {
  std::vector<std::string> inputs;
  std::string outer, inner, out;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("detect", "Replace document mentions with predicted ones");
    c->add_option("inputs", inputs, "Documents")->required();
    c->add_option("--outer", outer, "Level-0 tagger checkpoint")->required();
    c->add_option("--inner", inner, "Level-1 tagger checkpoint");
    c->add_option("-o,--out", out, "Output directory")->required();
  }

  int run(Context& ctx) {
    const auto files = expand_inputs(inputs);
    record_inputs(ctx, files);
    ctx.manifest.add_input(outer);
    if (!inner.empty()) ctx.manifest.add_input(inner);
    const auto outer_model = TaggerModel::load(fs::path(outer));
    std::optional<TaggerModel> inner_model;
    if (!inner.empty()) inner_model = TaggerModel::load(fs::path(inner));
    fs::create_directories(out);
    const auto out_dir = fs::absolute(out);

    std::vector<MentionCounts> counts(files.size());
    std::vector<bool> has_gold(files.size());
    parallel_for(files.size(), ctx.jobs, [&](std::size_t i) {
      const auto doc = load_document(files[i]);
      auto mentions = detect_mentions(outer_model, inner_model ? &*inner_model : nullptr, doc);
      std::vector<Span> predicted, gold;
      for (const auto& m : mentions) predicted.push_back({m.start, m.end});
      for (const auto& m : doc.mentions) gold.push_back({m.start, m.end});
      has_gold[i] = !doc.mentions.empty();
      counts[i] = evaluate_mentions(predicted, gold);
      std::string ref;
      if (const auto emb = embeddings_path(files[i]); !emb.empty()) {
        ref = fs::absolute(emb).lexically_relative(out_dir).string();
      }
      save_document(with_mentions(doc, std::move(mentions)), out_dir / (doc.doc_id + ".json"), ref);
    });

    MentionCounts total;
    bool any_gold = false;
    for (std::size_t i = 0; i < files.size(); ++i) {
      total += counts[i];
      any_gold = any_gold || has_gold[i];
    }
    ctx.manifest.add_output(out);
    std::cout << "documents\t" << files.size() << "\npredicted_mentions\t"
              << total.true_positive + total.false_positive << '\n';
    if (any_gold) {
      const auto p = total.prf();
      std::cout << std::fixed << std::setprecision(5) << "mention_precision\t" << p.precision
                << "\nmention_recall\t" << p.recall << "\nmention_f1\t" << p.f1 << '\n';
    }
    return kOk;
  }
};

struct TrainPairsCmd {
  std::vector<std::string> inputs;
  std::string out, log;
  PairModelArch arch;
  PairTrainConfig train;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("train-pairs", "Train the mention-pair scorer on gold chains");
    c->add_option("inputs", inputs, "Training documents (with embeddings)")->required();
    c->add_option("-o,--out", out, "Checkpoint path")->required();
    c->add_option("--hidden", arch.hidden, "Hidden layer width");
    c->add_option("--layers", arch.layers, "Hidden layers");
    c->add_option("--dropout", arch.dropout);
    c->add_option("--epochs", train.max_epochs);
    c->add_option("--lr", train.learning_rate);
    c->add_option("--weight-decay", train.weight_decay);
    c->add_option("--batch", train.batch_pairs, "Pairs per update");
    c->add_option("--train-fraction", train.train_fraction);
    c->add_option("--seed", train.seed);
    c->add_option("--log", log, "Epoch log, one JSON object per line");
  }

  int run(Context& ctx) {
    const auto files = expand_inputs(inputs);
    record_inputs(ctx, files);
    const auto docs = load_documents(files);
    ctx.config.embedding_dim = first_embedding_dim(docs);
    arch.seed = train.seed + 6;
    ctx.manifest.set_seed(train.seed);
    ctx.manifest.set_config(ctx.config);
    auto log_file = open_log(log);
    auto result = train_pair_scorer(docs, arch, ctx.config, train, log_file.get());
    result.model.save(fs::path(out));
    ctx.manifest.add_output(out);
    if (!log.empty()) ctx.manifest.add_output(log);
    std::cout << std::fixed << std::setprecision(5) << "epochs\t" << result.log.size() << "\nbest_epoch\t"
              << result.best_epoch << '\n';
    if (result.best_epoch > 0 && result.best_epoch <= result.log.size()) {
      const auto& e = result.log[result.best_epoch - 1];
      std::cout << "validation_loss\t" << e.validation_loss << "\nvalidation_accuracy\t" << e.validation_accuracy
                << '\n';
    }
    return kOk;
  }
};

struct ResolveCmd {
  std::vector<std::string> inputs;
  std::string model, outer, inner, out;
  bool oracle = false, gold_mentions = false, conll = false, errors = false, per_doc = false;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("resolve", "Cluster mentions into coreference chains");
    c->add_option("inputs", inputs, "Documents")->required();
    auto* m = c->add_option("--model", model, "Pair scorer checkpoint");
    auto* o = c->add_flag("--oracle", oracle, "Score candidates from the gold chains");
    m->excludes(o);
    c->add_flag("--gold-mentions", gold_mentions, "Keep the document mentions and skip detection");
    c->add_option("--outer", outer, "Level-0 tagger checkpoint (without --gold-mentions)");
    c->add_option("--inner", inner, "Level-1 tagger checkpoint");
    c->add_option("-o,--out", out, "Directory for <doc_id>.chains.json");
    c->add_flag("--conll", conll, "Also write <doc_id>.conll");
    c->add_flag("--errors", errors, "Print the antecedent error breakdown");
    c->add_flag("--per-doc", per_doc, "Print one score row per document");
  }

  int run(Context& ctx) {
    if (!oracle && model.empty()) throw UsageError("resolve: one of --model or --oracle is required");
    if (!gold_mentions && outer.empty()) throw UsageError("resolve: --outer is required unless --gold-mentions");
    if (oracle && !gold_mentions) throw UsageError("resolve: --oracle needs --gold-mentions");
    if (errors && !gold_mentions) throw UsageError("resolve: --errors needs --gold-mentions");
    if (conll && out.empty()) throw UsageError("resolve: --conll needs --out");

    const auto files = expand_inputs(inputs);
    record_inputs(ctx, files);
    std::optional<PairScorerModel> scorer;
    std::optional<TaggerModel> outer_model, inner_model;
    if (!model.empty()) {
      ctx.manifest.add_input(model);
      scorer = PairScorerModel::load(fs::path(model));
    }
    if (!gold_mentions) {
      ctx.manifest.add_input(outer);
      outer_model = TaggerModel::load(fs::path(outer));
      if (!inner.empty()) {
        ctx.manifest.add_input(inner);
        inner_model = TaggerModel::load(fs::path(inner));
      }
    }
    if (!out.empty()) fs::create_directories(out);

    const auto& cfg = ctx.config;
    struct Row {
      std::string doc_id;
      std::size_t mentions = 0, chains = 0, violations = 0;
      bool scored = false;
      MetricReport report;
      AntecedentErrors errors;
    };
    std::vector<Row> rows(files.size());
    parallel_for(files.size(), ctx.jobs, [&](std::size_t i) {
      const auto doc = load_document(files[i]);
      PipelineResult r;
      if (oracle) {
        r.doc = doc;
        r.decisions = oracle_decisions(doc, cfg);
        r.resolution = resolve(doc, r.decisions, cfg);
      } else {
        r = run_pipeline(doc, *scorer, outer_model ? &*outer_model : nullptr, inner_model ? &*inner_model : nullptr,
                         cfg);
      }
      const auto output = make_chain_output(r.doc, r.resolution.chains, cfg.clustering_strategy,
                                            r.resolution.diagnostics);
      Row& row = rows[i];
      row.doc_id = doc.doc_id;
      row.mentions = r.doc.mentions.size();
      row.chains = r.resolution.chains.size();
      row.violations = count_cannot_link_violations(r.resolution.chains, r.resolution.constraints);
      if (!doc.mentions.empty()) {
        row.scored = true;
        row.report = evaluate(to_partition(doc, gold_chains(doc)), output_partition(output, doc));
      }
      if (errors) row.errors = antecedent_error_report(r.decisions, doc, cfg);
      if (!out.empty()) {
        write_text(fs::path(out) / (doc.doc_id + ".chains.json"), write_chain_output(output) + "\n");
        if (conll) write_text(fs::path(out) / (doc.doc_id + ".conll"), export_conll(r.doc, r.resolution.chains));
      }
    });
    if (!out.empty()) ctx.manifest.add_output(out);

    std::vector<MetricReport> reports;
    AntecedentErrors total_errors;
    std::size_t violations = 0;
    if (per_doc) std::cout << "doc_id\tmentions\tchains\tmuc_f1\tb3_f1\tceafe_f1\tconll_f1\n";
    for (const auto& row : rows) {
      violations += row.violations;
      total_errors += row.errors;
      if (row.scored) reports.push_back(row.report);
      if (per_doc) {
        std::cout << row.doc_id << '\t' << row.mentions << '\t' << row.chains << std::fixed << std::setprecision(5);
        if (row.scored) {
          std::cout << '\t' << row.report.muc.f1 << '\t' << row.report.b_cubed.f1 << '\t' << row.report.ceaf_e.f1
                    << '\t' << row.report.conll_f1 << '\n';
        } else {
          std::cout << "\tNA\tNA\tNA\tNA\n";
        }
      }
    }
    std::cerr << "resolved " << rows.size() << " documents with " << to_string(cfg.clustering_strategy)
              << ", cannot-link violations: " << violations << '\n';
    if (!reports.empty()) print_report(std::cout, average(reports));
    if (errors) {
      const auto& e = total_errors;
      std::cout << std::fixed << std::setprecision(5) << "error\tcount\trate\n"
                << "correct\t" << e.correct << '\t' << e.rate(e.correct) << '\n'
                << "out_of_window_wrong_link\t" << e.out_of_window_wrong_link << '\t'
                << e.rate(e.out_of_window_wrong_link) << '\n'
                << "out_of_window_wrong_null\t" << e.out_of_window_wrong_null << '\t'
                << e.rate(e.out_of_window_wrong_null) << '\n'
                << "in_window_wrong_link\t" << e.in_window_wrong_link << '\t' << e.rate(e.in_window_wrong_link)
                << '\n'
                << "in_window_wrong_null\t" << e.in_window_wrong_null << '\t' << e.rate(e.in_window_wrong_null)
                << '\n'
                << "new_entity_linked\t" << e.new_entity_linked << '\t' << e.rate(e.new_entity_linked) << '\n';
    }
    return kOk;
  }
};

struct ScoreCmd {
  std::vector<std::string> gold, pred;
  bool per_doc = false;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("score", "MUC, B3, CEAFe and CoNLL F1 of predicted chains");
    c->add_option("--gold", gold, "Gold documents or CoNLL files")->required();
    c->add_option("--pred", pred, "Chain outputs, documents or CoNLL files")->required();
    c->add_flag("--per-doc", per_doc, "Print one row per document before the averages");
  }

  struct GoldEntry {
    Partition partition;
    std::optional<Document> doc;
  };

  static Partition conll_partition(const ConllDocument& d) {
    Partition p;
    for (const auto& chain : d.chains) {
      std::vector<MentionKey> cell;
      for (const auto& s : chain) cell.push_back(span_key(s.start, s.end));
      if (!cell.empty()) p.push_back(std::move(cell));
    }
    return p;
  }

  int run(Context& ctx) {
    const std::vector<std::string> exts{".json", ".conll"};
    const auto gold_files = expand_inputs(gold, exts);
    const auto pred_files = expand_inputs(pred, exts, true);
    record_inputs(ctx, gold_files);
    record_inputs(ctx, pred_files);

    std::map<std::string, GoldEntry> golds;
    auto add_gold = [&](const std::string& id, GoldEntry e) {
      if (!golds.emplace(id, std::move(e)).second) throw ValidationError("duplicate gold document '" + id + "'");
    };
    for (const auto& f : gold_files) {
      if (f.extension() == ".conll") {
        for (const auto& d : import_conll(read_text(f))) add_gold(d.doc_id, {conll_partition(d), std::nullopt});
      } else {
        auto doc = load_document(f);
        auto id = doc.doc_id;
        add_gold(id, {to_partition(doc, gold_chains(doc)), std::move(doc)});
      }
    }

    std::map<std::string, Partition> preds;
    auto add_pred = [&](const std::string& id, Partition p) {
      if (!golds.contains(id)) throw ValidationError("prediction for unknown document '" + id + "'");
      if (!preds.emplace(id, std::move(p)).second) throw ValidationError("duplicate prediction for '" + id + "'");
    };
    for (const auto& f : pred_files) {
      if (f.extension() == ".conll") {
        for (const auto& d : import_conll(read_text(f))) add_pred(d.doc_id, conll_partition(d));
        continue;
      }
      const auto text = read_text(f);
      const auto root = json::parse(text, nullptr, false);
      if (root.is_object() && root.contains("tokens")) {
        const auto doc = load_document(f);
        add_pred(doc.doc_id, to_partition(doc, gold_chains(doc)));
        continue;
      }
      ChainOutput out;
      try {
        out = parse_chain_output(text);
      } catch (const ParseError& e) {
        throw ParseError(f.string(), e.what());
      }
      auto it = golds.find(out.doc_id);
      if (it == golds.end()) throw ValidationError("prediction for unknown document '" + out.doc_id + "'");
      if (out.mentions.empty() && !it->second.doc) {
        throw ValidationError(f.string() + ": chain output without spans needs a gold document, not CoNLL");
      }
      add_pred(out.doc_id, out.mentions.empty() ? output_partition(out, *it->second.doc)
                                                : output_partition(out, Document{}));
    }

    std::vector<MetricReport> reports;
    if (per_doc) std::cout << "doc_id\tmuc_f1\tb3_f1\tceafe_f1\tconll_f1\n";
    for (const auto& [id, g] : golds) {
      auto p = preds.find(id);
      if (p == preds.end()) throw ValidationError("no prediction for document '" + id + "'");
      reports.push_back(evaluate(g.partition, p->second));
      if (per_doc) {
        const auto& r = reports.back();
        std::cout << std::fixed << std::setprecision(5) << id << '\t' << r.muc.f1 << '\t' << r.b_cubed.f1 << '\t'
                  << r.ceaf_e.f1 << '\t' << r.conll_f1 << '\n';
      }
    }
    print_report(std::cout, average(reports));
    return kOk;
  }
};

struct TableCmd {
  std::string name;
  std::vector<std::string> inputs;
  std::string out;

  void add(CLI::App& app, const std::string& description) {
    auto* c = app.add_subcommand(name, description);
    c->add_option("inputs", inputs, "Documents")->required();
    c->add_option("-o,--out", out, "Also write the table to this file");
  }

  template <class Fn>
  int run(Context& ctx, Fn table) {
    const auto files = expand_inputs(inputs);
    record_inputs(ctx, files);
    const auto text = table(load_documents(files));
    std::cout << text;
    if (!out.empty()) {
      write_text(out, text);
      ctx.manifest.add_output(out);
    }
    return kOk;
  }
};

struct LengthSweepCmd {
  std::vector<std::string> inputs, lengths;
  std::string model, out;
  bool oracle = false;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("length-sweep", "Score chains on documents split at each length");
    c->add_option("inputs", inputs, "Documents with gold mentions")->required();
    c->add_option("--lengths", lengths, "Sample lengths in tokens, e.g. 1000,2000,5000")->required();
    auto* m = c->add_option("--model", model, "Pair scorer checkpoint");
    auto* o = c->add_flag("--oracle", oracle, "Score candidates from the gold chains");
    m->excludes(o);
    c->add_option("-o,--out", out, "Prefix for .tsv, .jsonl and .dat files");
  }

  int run(Context& ctx) {
    if (!oracle && model.empty()) throw UsageError("length-sweep: one of --model or --oracle is required");
    const auto ls = parse_lengths(lengths);
    const auto files = expand_inputs(inputs);
    record_inputs(ctx, files);
    const auto docs = load_documents(files);
    std::optional<PairScorerModel> scorer;
    if (!model.empty()) {
      ctx.manifest.add_input(model);
      scorer = PairScorerModel::load(fs::path(model));
    }
    const auto cfg = ctx.config;
    ChainPredictor predict = [&](const Document& d) {
      const auto decisions = scorer ? score_antecedents(*scorer, d, cfg) : oracle_decisions(d, cfg);
      return resolve(d, decisions, cfg).chains;
    };
    const auto points = length_sweep(docs, ls, predict, ctx.jobs);
    const auto tsv = length_sweep_tsv(points);
    std::cout << tsv;
    if (out.empty()) return kOk;

    std::ostringstream jsonl, dat;
    dat << "# length conll_f1 muc_f1 b3_f1 ceafe_f1\n";
    for (const auto& p : points) {
      json j{{"length", p.length},
             {"docs", p.retained_docs},
             {"samples_per_doc", p.samples_per_doc},
             {"dropped_mentions", p.dropped_mentions}};
      if (p.empty()) {
        j["muc"] = j["b3"] = j["ceafe"] = j["conll_f1"] = nullptr;
      } else {
        j["muc"] = prf_json(p.macro.muc);
        j["b3"] = prf_json(p.macro.b_cubed);
        j["ceafe"] = prf_json(p.macro.ceaf_e);
        j["conll_f1"] = p.macro.conll_f1;
        dat << std::fixed << std::setprecision(5) << p.length << ' ' << p.macro.conll_f1 << ' ' << p.macro.muc.f1
            << ' ' << p.macro.b_cubed.f1 << ' ' << p.macro.ceaf_e.f1 << '\n';
      }
      jsonl << j.dump() << '\n';
    }
    for (const auto& [suffix, text] :
         std::vector<std::pair<std::string, std::string>>{{".tsv", tsv}, {".jsonl", jsonl.str()}, {".dat", dat.str()}}) {
      write_text(beside(out, suffix), text);
      ctx.manifest.add_output(beside(out, suffix));
    }
    return kOk;
  }
};

struct GenderCmd {
  std::vector<std::string> inputs, chains;
  std::string names, clues, assignments;
  double threshold = 0.9;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("gender", "Staged gender inference: clues, first names, chain propagation");
    c->add_option("inputs", inputs, "Documents with gold chain genders")->required();
    c->add_option("--names", names, "First-name TSV: name, male count, female count");
    c->add_option("--clues", clues, "Clue TSV replacing the built-in French clues");
    c->add_option("--chains", chains, "Chain outputs to propagate over instead of the gold chains");
    c->add_option("--threshold", threshold, "First-name majority share")->check(CLI::Range(0.5, 1.0));
    c->add_option("--assignments", assignments, "Directory for <doc_id>.gender.json");
  }

  int run(Context& ctx) {
    const auto files = expand_inputs(inputs);
    record_inputs(ctx, files);
    FirstNameLexicon name_lex;
    if (!names.empty()) {
      ctx.manifest.add_input(names);
      name_lex = load_firstname_lexicon(names);
    }
    std::optional<GenderClueLexicon> clue_lex;
    if (!clues.empty()) {
      ctx.manifest.add_input(clues);
      clue_lex = load_gender_clue_lexicon(clues);
    }
    const auto& clue_ref = clue_lex ? *clue_lex : default_french_gender_clues();

    std::map<std::string, ChainOutput> predicted;
    if (!chains.empty()) {
      const auto chain_files = expand_inputs(chains, {".json"}, true);
      for (const auto& f : chain_files) {
        ctx.manifest.add_input(f);
        try {
          auto o = parse_chain_output(read_text(f));
          auto id = o.doc_id;
          predicted[id] = std::move(o);
        } catch (const ParseError& e) {
          throw ParseError(f.string(), e.what());
        }
      }
    }
    if (!assignments.empty()) fs::create_directories(assignments);

    std::array<GenderCounts, 3> totals{};
    for (const auto& f : files) {
      const auto doc = load_document(f);
      ChainSet cs = gold_chains(doc);
      if (!chains.empty()) {
        auto it = predicted.find(doc.doc_id);
        if (it == predicted.end()) throw ValidationError("no chain output for document '" + doc.doc_id + "'");
        const auto& o = it->second;
        if (!o.mentions.empty()) {
          bool same = o.mentions.size() == doc.mentions.size();
          for (std::size_t i = 0; same && i < o.mentions.size(); ++i) {
            same = o.mentions[i] == Span{doc.mentions[i].start, doc.mentions[i].end};
          }
          if (!same) throw ValidationError(doc.doc_id + ": chain output mentions differ from the document's");
        }
        for (const auto& c : o.chains) {
          for (auto id : c) {
            if (id >= doc.mentions.size()) throw ValidationError(doc.doc_id + ": chain output mention id out of range");
          }
        }
        cs = o.chains;
      }
      const auto stages = staged_gender(doc, cs, clue_ref, name_lex, threshold);
      for (std::size_t s = 0; s < stages.size(); ++s) totals[s] += evaluate_gender(doc, stages[s]);
      if (!assignments.empty()) {
        const auto path = fs::path(assignments) / (doc.doc_id + ".gender.json");
        write_text(path, gender_assignment_json(doc, cs, stages[2]) + "\n");
      }
    }
    if (!assignments.empty()) ctx.manifest.add_output(assignments);
    std::cout << gender_report_tsv(totals);
    return kOk;
  }
};

struct SynthCmd {
  std::string config, out;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("synth", "Write a synthetic corpus with embeddings and a first-name lexicon");
    c->add_option("--config", config, "Generator settings, key = value per line");
    c->add_option("-o,--out", out, "Output directory")->required();
    seed_opt = c->add_option("--seed", seed, "Overrides the settings seed");
  }

  int run(Context& ctx) {
    SyntheticCorpusConfig sc;
    if (!config.empty()) {
      ctx.manifest.add_input(config);
      try {
        apply_synthetic_settings(sc, read_text(config));
      } catch (const ParseError& e) {
        throw ParseError(config, e.what());
      }
    }
    if (seed_opt->count()) sc.seed = seed;
    ctx.manifest.set_seed(sc.seed);
    for (const auto& s : parse_settings(write_synthetic_settings(sc))) {
      ctx.manifest.set_option("synthetic." + s.key, s.value);
    }
    const auto corpus = generate_synthetic_corpus(sc);
    const fs::path dir(out);
    fs::create_directories(dir);
    std::size_t mentions = 0;
    for (const auto& doc : corpus.docs) {
      write_embeddings(*doc.embeddings, dir / (doc.doc_id + ".emb"));
      save_document(doc, dir / (doc.doc_id + ".json"), doc.doc_id + ".emb");
      mentions += doc.mentions.size();
    }
    write_text(dir / "firstnames.tsv", write_firstname_lexicon(corpus.first_names));
    ctx.manifest.add_output(dir);
    std::cout << "documents\t" << corpus.docs.size() << "\nmentions\t" << mentions << "\nfirst_names\t"
              << corpus.first_names.size() << '\n';
    return kOk;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Character coreference for long documents", "longcoref"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", LONGCOREF_VERSION);

  Globals g;
  app.add_option("--pipeline-config", g.pipeline_config,
                 "key = value pipeline settings (default: $LONGCOREF_CONFIG)");
  app.add_option("-j,--jobs", g.jobs, "Documents processed in parallel; 1 is reproducible")
      ->check(CLI::PositiveNumber);
  app.add_option("--manifest", g.manifest, "Run manifest path");
  g.pronoun_window_opt = app.add_option("--pronoun-window", g.pronoun_window, "Candidates before a pronoun");
  g.noun_window_opt = app.add_option("--noun-window", g.noun_window, "Candidates before a noun or name");
  g.threshold_opt = app.add_option("--threshold", g.threshold, "Null-antecedent threshold");
  g.strategy_opt = app.add_option("--strategy", g.strategy, "left_to_right or easy_first_global");
  g.conjunctions_opt = app.add_option("--conjunctions", g.conjunctions, "Comma-separated coordinating words");

  ValidateCmd validate;
  TrainDetectorCmd train_detector;
  DetectCmd detect;
  TrainPairsCmd train_pairs;
  ResolveCmd resolve_cmd;
  ScoreCmd score;
  TableCmd stats{"stats", {}, {}}, distances{"antecedent-dist", {}, {}};
  LengthSweepCmd sweep;
  GenderCmd gender;
  SynthCmd synth;
  validate.add(app);
  train_detector.add(app);
  detect.add(app);
  train_pairs.add(app);
  resolve_cmd.add(app);
  score.add(app);
  stats.add(app, "Corpus statistics table");
  distances.add(app, "Distance to the nearest gold antecedent, in mentions");
  sweep.add(app);
  gender.add(app);
  synth.add(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  const auto* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  Context ctx{PipelineConfig{}, g.jobs, RunManifest(command), {}};
  ctx.manifest.set_argv(argc, argv);
  for (const auto* opt : sub->get_options()) {
    if (opt->count() && !opt->get_name().empty() && opt->get_name() != "--help") {
      ctx.manifest.set_option(opt->get_name(), opt->results());
    }
  }
  ctx.manifest.set_option("jobs", g.jobs);

  auto out_of = [&](const std::string& out, bool dir) -> fs::path {
    if (out.empty()) return fs::path("longcoref-" + command + ".manifest.json");
    return dir ? fs::path(out) / "manifest.json" : beside(out, ".manifest.json");
  };

  int code = kOk;
  try {
    ctx.config = build_config(g);
    ctx.manifest.set_config(ctx.config);
    if (command == "validate") {
      ctx.manifest_path = out_of("", false);
      code = validate.run(ctx);
    } else if (command == "train-detector") {
      ctx.manifest_path = out_of(train_detector.out, false);
      code = train_detector.run(ctx);
    } else if (command == "detect") {
      ctx.manifest_path = out_of(detect.out, true);
      code = detect.run(ctx);
    } else if (command == "train-pairs") {
      ctx.manifest_path = out_of(train_pairs.out, false);
      code = train_pairs.run(ctx);
    } else if (command == "resolve") {
      ctx.manifest_path = out_of(resolve_cmd.out, true);
      code = resolve_cmd.run(ctx);
    } else if (command == "score") {
      ctx.manifest_path = out_of("", false);
      code = score.run(ctx);
    } else if (command == "stats") {
      ctx.manifest_path = out_of(stats.out, false);
      code = stats.run(ctx, [](const std::vector<Document>& d) { return corpus_stats_tsv(corpus_stats(d)); });
    } else if (command == "antecedent-dist") {
      ctx.manifest_path = out_of(distances.out, false);
      code = distances.run(
          ctx, [](const std::vector<Document>& d) { return distance_table_tsv(antecedent_distance_distribution(d)); });
    } else if (command == "length-sweep") {
      ctx.manifest_path = out_of(sweep.out, false);
      code = sweep.run(ctx);
    } else if (command == "gender") {
      ctx.manifest_path = out_of(gender.assignments, true);
      code = gender.run(ctx);
    } else if (command == "synth") {
      ctx.manifest_path = out_of(synth.out, true);
      code = synth.run(ctx);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << sub->help();
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    code = kInput;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    code = kInput;
  } catch (const DimensionError& e) {
    std::cerr << "dimension mismatch: " << e.what() << '\n';
    code = kInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    code = kRuntime;
  }

  if (!g.manifest.empty()) ctx.manifest_path = g.manifest;
  if (!ctx.manifest_path.empty()) {
    ctx.manifest.set_exit(code);
    try {
      if (ctx.manifest_path.has_parent_path()) fs::create_directories(ctx.manifest_path.parent_path());
      ctx.manifest.write(ctx.manifest_path);
    } catch (const std::exception& e) {
      std::cerr << "warning: manifest not written: " << e.what() << '\n';
    }
  }
  return code;
}
