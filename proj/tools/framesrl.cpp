#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "framesrl/bundle.hpp"
#include "framesrl/complexity.hpp"
#include "framesrl/corpus.hpp"
#include "framesrl/decoder.hpp"
#include "framesrl/evaluator.hpp"
#include "framesrl/lexicon.hpp"
#include "framesrl/synth.hpp"
#include "framesrl/tagger.hpp"

namespace fs = std::filesystem;
using namespace framesrl;

namespace {

// key=value overrides from --config, applied before explicit flags win.
std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::map<std::string, std::string> kv;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line without '=': " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

struct TrainOptions {
  TaggerConfig tagger;
  uint64_t seed = 42;
  int min_count = 1;
  double dev_fraction = 0.0;
};

void add_train_flags(CLI::App* cmd, TrainOptions& opt) {
  cmd->add_option("--hidden", opt.tagger.hidden, "LSTM hidden size per layer");
  cmd->add_option("--layers", opt.tagger.num_layers, "number of LSTM layers");
  cmd->add_option("--lr", opt.tagger.learning_rate, "learning rate");
  cmd->add_option("--epochs", opt.tagger.epochs, "training epochs");
  cmd->add_option("--batch-size", opt.tagger.batch_size, "mini-batch size");
  cmd->add_option("--patience", opt.tagger.patience, "early-stop patience");
  cmd->add_option("--clip-norm", opt.tagger.clip_norm, "gradient norm clip");
  cmd->add_option("--min-count", opt.min_count, "word vocabulary min frequency");
  cmd->add_option("--dev-fraction", opt.dev_fraction,
                  "held-out fraction for early stopping (0 disables)");
}

void apply_config_overrides(const std::map<std::string, std::string>& kv,
                            CLI::App* cmd, TrainOptions& opt) {
  auto set_if_default = [&](const std::string& key, auto& field) {
    auto it = kv.find(key);
    if (it == kv.end()) return;
    std::string flag = "--" + key;
    auto* o = cmd->get_option_no_throw(flag);
    if (o && o->count() > 0) return;  // explicit flag wins
    std::istringstream ss(it->second);
    ss >> field;
    if (ss.fail()) throw std::runtime_error("bad config value for " + key);
  };
  set_if_default("hidden", opt.tagger.hidden);
  set_if_default("layers", opt.tagger.num_layers);
  set_if_default("lr", opt.tagger.learning_rate);
  set_if_default("epochs", opt.tagger.epochs);
  set_if_default("batch-size", opt.tagger.batch_size);
  set_if_default("patience", opt.tagger.patience);
  set_if_default("clip-norm", opt.tagger.clip_norm);
  set_if_default("min-count", opt.min_count);
  set_if_default("dev-fraction", opt.dev_fraction);
}

nlohmann::json train_options_json(const TrainOptions& opt) {
  nlohmann::json j;
  j["hidden"] = opt.tagger.hidden;
  j["layers"] = opt.tagger.num_layers;
  j["lr"] = opt.tagger.learning_rate;
  j["epochs"] = opt.tagger.epochs;
  j["batch_size"] = opt.tagger.batch_size;
  j["patience"] = opt.tagger.patience;
  j["clip_norm"] = opt.tagger.clip_norm;
  j["min_count"] = opt.min_count;
  j["dev_fraction"] = opt.dev_fraction;
  j["seed"] = opt.seed;
  return j;
}

void write_manifest(const std::string& out_dir, const std::string& command,
                    const nlohmann::json& options) {
  nlohmann::json j;
  j["command"] = command;
  j["options"] = options;
  fs::create_directories(out_dir);
  std::ofstream out(fs::path(out_dir) / "run_manifest.json");
  out << j.dump(1) << '\n';
}

// Decode every (sentence, trigger) pair of `docs` against the bundle.
std::vector<PredictedInstance> predict_documents(const std::vector<Document>& docs,
                                                 const ModelBundle& bundle,
                                                 const FrameLexicon& lex,
                                                 double threshold) {
  std::vector<PredictedInstance> preds;
  for (const auto& doc : docs) {
    for (const auto& sent : doc.sentences) {
      auto it = doc.annotations.find(sent.id);
      if (it == doc.annotations.end()) continue;
      for (const auto& inst : it->second) {
        auto p = predict(sent, inst.trigger, bundle.params, bundle.vocab, lex,
                         bundle.labels, threshold);
        p.doc_id = doc.id;
        preds.push_back(std::move(p));
      }
    }
  }
  return preds;
}

ModelBundle train_bundle(const std::vector<Document>& train_docs,
                         const FrameLexicon& lex, const TrainOptions& opt,
                         TrainHistory* history) {
  auto samples = generate_samples(train_docs);
  if (samples.empty()) throw std::runtime_error("training corpus has no triggers");

  std::vector<Document> fit_docs = train_docs;
  std::vector<Document> dev_docs;
  if (opt.dev_fraction > 0.0) {
    auto split = split_corpus(train_docs, opt.dev_fraction, opt.seed + 1);
    fit_docs = std::move(split.train);
    dev_docs = std::move(split.test);
    samples = generate_samples(fit_docs);
  }

  ModelBundle bundle;
  bundle.config = opt.tagger;
  bundle.seed = opt.seed;
  bundle.labels = LabelSet::from_lexicon(lex);
  bundle.vocab = build_vocabularies(samples, opt.min_count);

  std::vector<TrainSample> train_samples;
  for (const auto& s : samples)
    train_samples.push_back(make_train_sample(s, bundle.vocab, bundle.labels));

  DevEvaluator dev_eval;
  if (!dev_docs.empty()) {
    dev_eval = [&](const TaggerParams& params) {
      std::vector<PredictedInstance> preds;
      for (const auto& doc : dev_docs) {
        for (const auto& sent : doc.sentences) {
          auto it = doc.annotations.find(sent.id);
          if (it == doc.annotations.end()) continue;
          for (const auto& inst : it->second) {
            auto p = predict(sent, inst.trigger, params, bundle.vocab, lex,
                             bundle.labels, 0.0);
            p.doc_id = doc.id;
            preds.push_back(std::move(p));
          }
        }
      }
      auto units = build_eval_units(dev_docs, preds);
      return score(units, Metric::Soft).f_measure;
    };
  }

  bundle.params = train(train_samples, opt.tagger, bundle.vocab,
                        bundle.labels.size(), opt.seed, history, dev_eval);
  return bundle;
}

void write_score_row(std::ostream& out, const std::string& name, const Score& s) {
  out << name << '\t' << s.precision << '\t' << s.recall << '\t' << s.f_measure
      << '\t' << s.hyp_count << '\t' << s.ref_count << '\n';
}

void write_pr_csv(const std::string& path, const std::vector<PrPoint>& points) {
  std::ofstream out(path);
  out << "threshold,precision,recall,f\n";
  for (const auto& p : points)
    out << p.threshold << ',' << p.precision << ',' << p.recall << ','
        << p.f_measure << '\n';
}

int cmd_evaluate_impl(const std::string& gold_path, const std::string& pred_path,
                      const std::string& lexicon_path,
                      const std::string& train_corpus_path,
                      const std::string& out_dir) {
  auto gold = parse_corpus_file(gold_path);
  auto lex = load_lexicon_file(lexicon_path);
  std::vector<PredictedInstance> preds;
  {
    std::ifstream in(pred_path);
    if (!in) throw std::runtime_error("cannot open predictions: " + pred_path);
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) preds.push_back(from_jsonl(line));
  }
  auto units = build_eval_units(gold, preds);
  fs::create_directories(out_dir);

  std::ofstream report(fs::path(out_dir) / "report.tsv");
  report << "section\tgroup\tprecision\trecall\tf\thyps\trefs\n";
  std::vector<double> thresholds;
  for (int i = 0; i <= 50; ++i) thresholds.push_back(i / 50.0);
  for (Metric m : {Metric::Soft, Metric::Weighted, Metric::Hard}) {
    Score s = score(units, m);
    write_score_row(report, std::string("overall_") + to_string(m) + "\tall", s);
    write_pr_csv((fs::path(out_dir) / ("pr_" + std::string(to_string(m)) + ".csv"))
                     .string(),
                 pr_curve(units, m, thresholds));
  }
  report << "frame_accuracy\tall\t\t\t" << frame_accuracy(units) << "\t\t\n";

  const std::pair<std::string, Factor> factors[] = {
      {"trigger_pos", Factor::TriggerPos},
      {"trigger_root", Factor::TriggerRoot},
      {"sentence_length", Factor::SentenceLength},
      {"frame_size", Factor::FrameSize},
      {"fe_label", Factor::FeLabel},
      {"length_root_cross", Factor::LengthRootCross},
  };
  for (const auto& [name, factor] : factors) {
    for (const auto& row : breakdown(units, factor, Metric::Soft, &lex)) {
      report << "breakdown_" << name << '\t' << row.group << '\t'
             << row.result.precision << '\t' << row.result.recall << '\t'
             << row.result.f_measure << '\t' << row.result.hyp_count << '\t'
             << row.result.ref_count << '\n';
    }
  }

  if (!train_corpus_path.empty()) {
    auto train_docs = parse_corpus_file(train_corpus_path);
    std::map<std::string, long> counts;
    for (const auto& doc : train_docs)
      for (const auto& [sid, insts] : doc.annotations)
        for (const auto& inst : insts)
          for (const auto& el : inst.elements) ++counts[el.label];
    std::ofstream fe_out(fs::path(out_dir) / "fe_traincount.tsv");
    fe_out << "fe_label\ttrain_count\tf\n";
    for (const auto& row : fe_vs_traincount(units, Metric::Soft, counts))
      fe_out << row.fe_label << '\t' << row.train_count << '\t' << row.f_measure
             << '\n';
  }
  std::cout << "evaluation written to " << out_dir << "\n";
  return 0;
}

int cmd_analyze_impl(const std::string& corpus_path, const std::string& lexicon_path,
                     const std::string& out_dir, const TrainOptions& opt, int folds,
                     int min_triggers, int regression_folds) {
  auto docs = parse_corpus_file(corpus_path);
  auto lex = load_lexicon_file(lexicon_path);

  // per-fold protocol: train on the complement, predict the held-out fold
  std::vector<PredictedInstance> all_preds;
  auto fold_splits = kfold_split(docs, folds, opt.seed);
  for (size_t f = 0; f < fold_splits.size(); ++f) {
    std::cerr << "fold " << (f + 1) << "/" << fold_splits.size() << ": training on "
              << fold_splits[f].train.size() << " docs\n";
    auto bundle = train_bundle(fold_splits[f].train, lex, opt, nullptr);
    auto preds = predict_documents(fold_splits[f].test, bundle, lex, 0.0);
    all_preds.insert(all_preds.end(), preds.begin(), preds.end());
  }

  auto units = build_eval_units(docs, all_preds);
  std::vector<DocumentRecord> records;
  for (const auto& doc : docs) {
    if (doc.trigger_count() == 0) continue;
    DocumentRecord rec;
    rec.doc_id = doc.id;
    rec.features = document_features(doc);
    rec.f_measure = document_fmeasure(units, doc.id);
    rec.trigger_count = doc.trigger_count();
    records.push_back(std::move(rec));
  }
  auto kept = filter_documents(records, min_triggers);
  if (kept.size() < 2)
    throw std::runtime_error("fewer than 2 documents survive the " +
                             std::to_string(min_triggers) + "-trigger filter");

  fs::create_directories(out_dir);
  std::vector<double> y;
  for (const auto& r : kept) y.push_back(r.f_measure);
  auto X = FeatureMatrix::from_records(kept);

  auto stats = performance_stats(y);
  {
    std::ofstream out(fs::path(out_dir) / "stats.tsv");
    out << "documents\tmean_f\tstddev_f\n";
    out << kept.size() << '\t' << stats.mean << '\t' << stats.stddev << '\n';
  }

  std::vector<std::string> skipped;
  auto ranked = rank_features(X, y, &skipped);
  {
    std::ofstream out(fs::path(out_dir) / "correlation.tsv");
    out << "feature\tr\tt\tsignificant\n";
    for (const auto& rf : ranked)
      out << rf.feature << '\t' << rf.r << '\t' << rf.t << '\t'
          << (rf.significant ? 1 : 0) << '\n';
    for (const auto& s : skipped) out << "# constant feature excluded: " << s << '\n';
  }

  auto model = incremental_selection(X, y, regression_folds, opt.seed);
  {
    std::ofstream out(fs::path(out_dir) / "selection.tsv");
    out << "step\tfeature\tcv_mse\n";
    out << "0\t(naive mean)\t" << model.mse_trace[0] << '\n';
    for (size_t i = 0; i < model.selected.size(); ++i)
      out << (i + 1) << '\t' << model.selected[i] << '\t' << model.mse_trace[i + 1]
          << '\n';
  }

  std::vector<double> yhat;
  for (size_t i = 0; i < kept.size(); ++i)
    yhat.push_back(predict_regression(model, X, static_cast<int>(i)));
  {
    std::ofstream out(fs::path(out_dir) / "scatter.csv");
    out << "doc_id,f_true,f_pred\n";
    for (size_t i = 0; i < kept.size(); ++i)
      out << kept[i].doc_id << ',' << y[i] << ',' << yhat[i] << '\n';
  }
  {
    std::ofstream out(fs::path(out_dir) / "regression_summary.tsv");
    out << "naive_cv_mse\tmodel_cv_mse\tselected_features\tr_squared\n";
    out << model.mse_trace.front() << '\t' << model.mse_trace.back() << '\t'
        << model.selected.size() << '\t' << r_squared(y, yhat) << '\n';
  }
  std::cout << "analysis written to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"frame-semantic sequence labeling and error-source analysis"};
  app.require_subcommand(1);

  uint64_t seed = 42;
  std::string out_dir = ".";
  std::string config_file;
  app.add_option("--seed", seed, "global random seed")->capture_default_str();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--config", config_file, "key=value config file");

  // train
  auto* train_cmd = app.add_subcommand("train", "train a tagger model bundle");
  std::string corpus_path, lexicon_path;
  TrainOptions topt;
  train_cmd->add_option("--corpus", corpus_path, "training corpus")->required();
  train_cmd->add_option("--lexicon", lexicon_path, "frame lexicon")->required();
  add_train_flags(train_cmd, topt);

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "decode a corpus");
  std::string bundle_dir, pred_out = "predictions.jsonl";
  double threshold = 0.0;
  predict_cmd->add_option("--bundle", bundle_dir, "model bundle dir")->required();
  predict_cmd->add_option("--corpus", corpus_path, "corpus to decode")->required();
  predict_cmd->add_option("--lexicon", lexicon_path, "frame lexicon")->required();
  predict_cmd->add_option("--threshold", threshold, "span score threshold");
  predict_cmd->add_option("--output", pred_out, "predictions JSONL path");

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "score predictions against gold");
  std::string pred_path, train_corpus_path;
  eval_cmd->add_option("--gold", corpus_path, "gold corpus")->required();
  eval_cmd->add_option("--pred", pred_path, "predictions JSONL")->required();
  eval_cmd->add_option("--lexicon", lexicon_path, "frame lexicon")->required();
  eval_cmd->add_option("--train-corpus", train_corpus_path,
                       "training corpus for FE-vs-count table");

  // analyze
  auto* analyze_cmd = app.add_subcommand("analyze", "document complexity study");
  int folds = 5, min_triggers = 30, regression_folds = 5;
  analyze_cmd->add_option("--corpus", corpus_path, "full corpus")->required();
  analyze_cmd->add_option("--lexicon", lexicon_path, "frame lexicon")->required();
  analyze_cmd->add_option("--folds", folds, "parser k-fold count");
  analyze_cmd->add_option("--min-triggers", min_triggers,
                          "document trigger-count filter");
  analyze_cmd->add_option("--regression-folds", regression_folds,
                          "regression CV fold count");
  add_train_flags(analyze_cmd, topt);

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic corpus");
  SynthConfig scfg;
  synth_cmd->add_option("--docs", scfg.num_docs, "number of documents");
  synth_cmd->add_option("--sentences", scfg.sentences_per_doc,
                        "sentences per document");
  synth_cmd->add_option("--vocab", scfg.vocab_size, "vocabulary size");
  synth_cmd->add_option("--frames", scfg.num_frames, "frame inventory size");
  synth_cmd->add_option("--max-fes", scfg.max_fes_per_frame, "max FEs per frame");
  synth_cmd->add_option("--verbal-fraction", scfg.verbal_trigger_fraction,
                        "fraction of verbal triggers");
  synth_cmd->add_option("--root-fraction", scfg.root_trigger_fraction,
                        "fraction of root triggers");
  synth_cmd->add_option("--mean-length", scfg.mean_sentence_length,
                        "mean sentence length");
  synth_cmd->add_option("--doc-jitter", scfg.doc_fraction_jitter,
                        "per-document fraction jitter");

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "check corpus against lexicon");
  validate_cmd->add_option("--corpus", corpus_path, "corpus")->required();
  validate_cmd->add_option("--lexicon", lexicon_path, "frame lexicon")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    std::map<std::string, std::string> cfg;
    if (!config_file.empty()) cfg = read_config_file(config_file);
    topt.seed = seed;

    if (*train_cmd) {
      apply_config_overrides(cfg, train_cmd, topt);
      auto docs = parse_corpus_file(corpus_path);
      auto lex = load_lexicon_file(lexicon_path);
      for (const auto& d : docs) {
        auto issues = validate_document(d, lex);
        if (!issues.empty())
          throw std::runtime_error("corpus fails validation: " +
                                   issues.front().message);
      }
      TrainHistory history;
      auto bundle = train_bundle(docs, lex, topt, &history);
      write_manifest(out_dir, "train", train_options_json(topt));
      save_bundle(bundle, out_dir);
      std::ofstream hist_out(fs::path(out_dir) / "history.tsv");
      hist_out << "epoch\tloss\tdev_f\n";
      for (size_t e = 0; e < history.epoch_loss.size(); ++e) {
        hist_out << (e + 1) << '\t' << history.epoch_loss[e] << '\t';
        if (e < history.dev_f.size()) hist_out << history.dev_f[e];
        hist_out << '\n';
      }
      std::cout << "model bundle written to " << out_dir << "\n";
      return 0;
    }
    if (*predict_cmd) {
      auto bundle = load_bundle(bundle_dir);
      auto docs = parse_corpus_file(corpus_path);
      auto lex = load_lexicon_file(lexicon_path);
      auto expected = LabelSet::from_lexicon(lex);
      if (expected.labels() != bundle.labels.labels())
        throw std::runtime_error(
            "label-set mismatch between bundle and lexicon: bundle has " +
            std::to_string(bundle.labels.size()) + " labels, lexicon implies " +
            std::to_string(expected.size()));
      auto preds = predict_documents(docs, bundle, lex, threshold);
      std::ofstream out(pred_out);
      if (!out) throw std::runtime_error("cannot write " + pred_out);
      for (const auto& p : preds) out << to_jsonl(p) << '\n';
      std::cout << preds.size() << " predictions written to " << pred_out << "\n";
      return 0;
    }
    if (*eval_cmd) {
      return cmd_evaluate_impl(corpus_path, pred_path, lexicon_path,
                               train_corpus_path, out_dir);
    }
    if (*analyze_cmd) {
      apply_config_overrides(cfg, analyze_cmd, topt);
      write_manifest(out_dir, "analyze", train_options_json(topt));
      return cmd_analyze_impl(corpus_path, lexicon_path, out_dir, topt, folds,
                              min_triggers, regression_folds);
    }
    if (*synth_cmd) {
      auto docs = synth_corpus(scfg, seed);
      auto lex = synth_lexicon(scfg);
      fs::create_directories(out_dir);
      nlohmann::json opts;
      opts["docs"] = scfg.num_docs;
      opts["sentences"] = scfg.sentences_per_doc;
      opts["vocab"] = scfg.vocab_size;
      opts["frames"] = scfg.num_frames;
      opts["max_fes"] = scfg.max_fes_per_frame;
      opts["verbal_fraction"] = scfg.verbal_trigger_fraction;
      opts["root_fraction"] = scfg.root_trigger_fraction;
      opts["mean_length"] = scfg.mean_sentence_length;
      opts["doc_jitter"] = scfg.doc_fraction_jitter;
      opts["seed"] = seed;
      write_manifest(out_dir, "synth", opts);
      {
        std::ofstream out(fs::path(out_dir) / "corpus.txt");
        serialize_corpus(docs, out);
      }
      {
        std::ofstream out(fs::path(out_dir) / "lexicon.txt");
        lex.serialize(out);
      }
      std::cout << docs.size() << " documents written to " << out_dir << "\n";
      return 0;
    }
    if (*validate_cmd) {
      auto docs = parse_corpus_file(corpus_path);
      auto lex = load_lexicon_file(lexicon_path);
      long issue_count = 0;
      for (const auto& d : docs) {
        for (const auto& issue : validate_document(d, lex)) {
          std::cout << d.id << '\t' << issue.message << '\n';
          ++issue_count;
        }
      }
      if (issue_count == 0) {
        std::cout << "OK: " << docs.size() << " documents, no issues\n";
        return 0;
      }
      std::cout << issue_count << " issues found\n";
      return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
