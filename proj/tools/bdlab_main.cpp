// bdlab: poison text-classification datasets with backdoor triggers, train
// the trigger-only/main ensemble defense, and report attack success rate and
// clean accuracy.
//
// Subcommands: synth, poison, train, evaluate, sweep, report.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "bdlab/attack.hpp"
#include "bdlab/dataset.hpp"
#include "bdlab/dpoe.hpp"
#include "bdlab/errors.hpp"
#include "bdlab/eval.hpp"
#include "bdlab/pipeline.hpp"
#include "bdlab/selection.hpp"
#include "bdlab/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw bdlab::DataError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw bdlab::DataError("cannot write " + path);
  out << content;
  if (!out) throw bdlab::DataError("write failed: " + path);
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const auto comma = csv.find(',', start);
    const auto item = csv.substr(start, comma == std::string::npos ? comma : comma - start);
    if (!item.empty()) {
      try {
        out.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw std::invalid_argument("cannot parse number \"" + item + "\"");
      }
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<std::string> parse_string_list(const std::string& csv) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const auto comma = csv.find(',', start);
    const auto item = csv.substr(start, comma == std::string::npos ? comma : comma - start);
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

// Attack and defense knobs shared by the train and sweep subcommands.
struct RunOpts {
  std::string config_path, train, test, out;
  std::uint64_t seed = 1;

  std::string trigger = "badnet";
  std::string trigger_words = "cf,mn,bb,tq,mb";
  int insertions = 3;
  std::string sentence = "I watched this 3D movie";
  int frame = 0;
  double rate = 0.05;
  int target_label = 1;

  double beta = 1.0, gamma = 0.9, tau = 0.9;
  int epochs = 3, batch = 32;
  double lr = 0.2, lr_trigger = 0.4;
  std::uint32_t dim = 1u << 18;
  int max_n = 2;

  CLI::Option *o_config = nullptr, *o_train = nullptr, *o_test = nullptr, *o_out = nullptr,
              *o_seed = nullptr, *o_trigger = nullptr, *o_rate = nullptr, *o_target = nullptr,
              *o_beta = nullptr, *o_gamma = nullptr, *o_tau = nullptr, *o_epochs = nullptr,
              *o_batch = nullptr, *o_lr = nullptr, *o_lr_trigger = nullptr, *o_dim = nullptr,
              *o_max_n = nullptr;
};

bdlab::TriggerSpec trigger_from_opts(const RunOpts& o) {
  if (o.trigger == "badnet")
    return bdlab::WordTrigger{parse_string_list(o.trigger_words), o.insertions};
  if (o.trigger == "insertsent") return bdlab::SentenceTrigger{o.sentence};
  if (o.trigger == "syntactic") return bdlab::SyntacticSurrogate{o.frame};
  if (o.trigger == "multi") return bdlab::default_multi_trigger();
  throw std::invalid_argument("unknown trigger \"" + o.trigger +
                              "\"; expected badnet, insertsent, syntactic or multi");
}

void add_attack_options(CLI::App* cmd, RunOpts& o) {
  o.o_trigger = cmd->add_option("--trigger", o.trigger,
                                "Trigger family: badnet, insertsent, syntactic, multi");
  cmd->add_option("--trigger-words", o.trigger_words, "Word-trigger vocabulary (csv)");
  cmd->add_option("--insertions", o.insertions, "Word insertions per poisoned sample");
  cmd->add_option("--sentence", o.sentence, "Sentence trigger text");
  cmd->add_option("--frame", o.frame, "Syntactic surrogate frame id");
  o.o_rate = cmd->add_option("--poison-rate", o.rate, "Poison rate in (0,1); 0 trains benign");
  o.o_target = cmd->add_option("--target-label", o.target_label, "Attack target label id");
}

void add_defense_options(CLI::App* cmd, RunOpts& o) {
  o.o_beta = cmd->add_option("--beta", o.beta, "Trigger-only coefficient in the ensemble");
  o.o_gamma = cmd->add_option("--gamma", o.gamma, "Down-weight threshold; 1 disables denoising");
  o.o_tau = cmd->add_option("--tau", o.tau, "Pseudo-dev confidence threshold");
  o.o_epochs = cmd->add_option("--epochs", o.epochs, "Training epochs");
  o.o_batch = cmd->add_option("--batch", o.batch, "Minibatch size");
  o.o_lr = cmd->add_option("--lr", o.lr, "Main model learning rate");
  o.o_lr_trigger = cmd->add_option("--lr-trigger", o.lr_trigger, "Trigger-only learning rate");
  o.o_dim = cmd->add_option("--dim", o.dim, "Hashed feature dimension");
  o.o_max_n = cmd->add_option("--max-n", o.max_n, "Max n-gram order (1 or 2)");
}

void add_run_options(CLI::App* cmd, RunOpts& o) {
  o.o_config = cmd->add_option("--config", o.config_path, "Run config JSON; flags override it");
  o.o_train = cmd->add_option("--train", o.train, "Training TSV");
  o.o_test = cmd->add_option("--test", o.test, "Test TSV");
  o.o_out = cmd->add_option("--out", o.out, "Output directory");
  o.o_seed = cmd->add_option("--seed", o.seed, "Top-level seed");
  add_attack_options(cmd, o);
  add_defense_options(cmd, o);
}

bdlab::RunConfig build_run_config(const RunOpts& o) {
  bdlab::RunConfig cfg;
  if (o.o_config->count()) cfg = bdlab::run_config_from_json(slurp(o.config_path));
  if (o.o_train->count()) cfg.train_path = o.train;
  if (o.o_test->count()) cfg.test_path = o.test;
  if (o.o_out->count()) cfg.out_dir = o.out;
  if (o.o_seed->count()) cfg.seed = o.seed;

  if (o.o_trigger->count() || !o.o_config->count()) cfg.attack.trigger = trigger_from_opts(o);
  if (o.o_target->count()) cfg.attack.target_label = o.target_label;
  if (o.o_rate->count()) {
    if (o.rate == 0.0)
      cfg.attack.rate.reset();
    else
      cfg.attack.rate = o.rate;
  } else if (!o.o_config->count()) {
    cfg.attack.rate = o.rate;
  }

  if (o.o_beta->count()) cfg.defense.beta = o.beta;
  if (o.o_gamma->count()) cfg.defense.gamma = o.gamma;
  if (o.o_tau->count()) cfg.defense.tau = o.tau;
  if (o.o_epochs->count()) cfg.defense.epochs = o.epochs;
  if (o.o_batch->count()) cfg.defense.batch = o.batch;
  if (o.o_lr->count()) cfg.defense.lr_main = o.lr;
  if (o.o_lr_trigger->count()) cfg.defense.lr_trigger = o.lr_trigger;
  if (o.o_dim->count()) cfg.features.dim = o.dim;
  if (o.o_max_n->count()) cfg.features.max_n = o.max_n;
  return cfg;
}

void print_report_line(const bdlab::EvalReport& r) {
  std::printf("regime=%s attack=%s clean_acc=%.4f asr=%.4f", bdlab::regime_label(r).c_str(),
              bdlab::trigger_name(r.attack.trigger).c_str(), r.clean_acc, r.asr);
  if (r.acc_star) std::printf(" acc_star=%.4f", *r.acc_star);
  if (r.asr_p) std::printf(" asr_p=%.4f", *r.asr_p);
  std::printf(" pseudo_dev=%u seed=%llu\n", r.pseudo_dev_size,
              static_cast<unsigned long long>(r.seed));
}

int do_synth(const std::string& out_dir, int n_per_class, int vocab_size, std::uint64_t seed) {
  const auto [train, test] = bdlab::generate_synthetic(n_per_class, vocab_size, seed);
  fs::create_directories(out_dir);
  bdlab::save_tsv(train, (fs::path(out_dir) / "train.tsv").string());
  bdlab::save_tsv(test, (fs::path(out_dir) / "test.tsv").string());
  std::printf("wrote %zu train and %zu test samples under %s\n", train.samples.size(),
              test.samples.size(), out_dir.c_str());
  return 0;
}

int do_poison(const RunOpts& o) {
  const auto ds = bdlab::load_tsv(o.train);
  bdlab::PoisonConfig pc;
  pc.rate = o.rate;
  pc.target_label = o.target_label;
  pc.trigger = trigger_from_opts(o);
  pc.seed = bdlab::derive_seed(o.seed, "poison");
  const auto poisoned = bdlab::poison_train(ds, pc);

  fs::create_directories(o.out);
  bdlab::DatasetFile out_ds;
  out_ds.samples = poisoned.samples;
  out_ds.label_names = poisoned.label_names;
  bdlab::save_tsv(out_ds, (fs::path(o.out) / "poisoned_train.tsv").string());

  ordered_json mask = ordered_json::array();
  std::size_t n_poisoned = 0;
  for (std::size_t i = 0; i < poisoned.samples.size(); ++i) {
    if (poisoned.poison_mask[i]) {
      mask.push_back(poisoned.samples[i].id);
      ++n_poisoned;
    }
  }
  spit((fs::path(o.out) / "poison_mask.json").string(), mask.dump(2) + "\n");
  std::printf("poisoned %zu of %zu samples (%s trigger) into %s\n", n_poisoned,
              poisoned.samples.size(), bdlab::trigger_name(pc.trigger).c_str(), o.out.c_str());
  return 0;
}

int do_train(const RunOpts& o) {
  const auto cfg = build_run_config(o);
  const auto report = bdlab::run_pipeline(cfg);
  print_report_line(report);
  return 0;
}

int do_evaluate(const std::string& checkpoint, const std::string& test_path, const RunOpts& o,
                const std::string& out_dir) {
  const auto model = bdlab::load_checkpoint(checkpoint);
  const auto test = bdlab::load_tsv(test_path);
  if (test.label_names.size() != model.dims.n_classes)
    throw bdlab::DataError("checkpoint expects " + std::to_string(model.dims.n_classes) +
                           " classes but the test set has " +
                           std::to_string(test.label_names.size()));

  const bdlab::FeatureConfig fc{model.dims.input_dim, o.max_n};
  const auto trigger = trigger_from_opts(o);
  const auto poisoned =
      bdlab::poison_test(test, trigger, o.target_label, bdlab::derive_seed(o.seed, "poison.test"));

  bdlab::AttackDesc attack;
  attack.trigger = trigger;
  attack.target_label = o.target_label;

  bdlab::EnsembleConfig defense;  // placeholder: evaluation never trains
  bdlab::EvalReport report = bdlab::assemble_report(
      bdlab::clean_accuracy(model, test, fc),
      bdlab::attack_success_rate(model, poisoned, o.target_label, fc), std::nullopt, defense,
      attack, o.seed);

  print_report_line(report);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    spit((fs::path(out_dir) / "report.json").string(), bdlab::report_to_json(report) + "\n");
    spit((fs::path(out_dir) / "report.md").string(),
         bdlab::markdown_table({{bdlab::regime_label(report), report}}));
  }
  return 0;
}

int do_sweep(const RunOpts& o, const std::string& betas_csv, const std::string& gammas_csv,
             double delta) {
  const auto base = build_run_config(o);
  if (base.out_dir.empty()) throw std::invalid_argument("sweep needs --out");

  std::vector<std::pair<double, double>> grid;
  if (betas_csv.empty() && gammas_csv.empty()) {
    grid = bdlab::default_sweep_grid();
  } else {
    const auto betas = betas_csv.empty() ? std::vector<double>{base.defense.beta}
                                         : parse_double_list(betas_csv);
    const auto gammas = gammas_csv.empty() ? std::vector<double>{base.defense.gamma}
                                           : parse_double_list(gammas_csv);
    for (double b : betas)
      for (double g : gammas) grid.emplace_back(b, g);
  }
  if (grid.empty()) throw std::invalid_argument("sweep grid is empty");

  std::vector<bdlab::ConfigScore> scores;
  std::vector<bdlab::EvalReport> reports;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    bdlab::RunConfig point = base;
    point.defense.beta = grid[i].first;
    point.defense.gamma = grid[i].second;
    char name[32];
    std::snprintf(name, sizeof name, "point_%02zu", i);
    point.out_dir = (fs::path(base.out_dir) / name).string();
    const auto report = bdlab::run_pipeline(point);
    reports.push_back(report);

    bdlab::ConfigScore s;
    s.beta = grid[i].first;
    s.gamma = grid[i].second;
    s.asr_p = report.asr_p.value_or(1.0);
    s.acc_star = report.acc_star.value_or(0.0);
    s.pseudo_dev_size = report.pseudo_dev_size;
    s.true_poison_fraction = report.true_poison_fraction;
    scores.push_back(s);
    std::printf("point_%02zu beta=%.3g gamma=%.3g acc_star=%.4f asr_p=%.4f asr=%.4f acc=%.4f\n", i,
                s.beta, s.gamma, s.acc_star, s.asr_p, report.asr, report.clean_acc);
  }

  const std::size_t best = bdlab::choose_best(scores, delta);

  ordered_json summary;
  summary["delta"] = delta;
  summary["scores"] = ordered_json::array();
  for (std::size_t i = 0; i < scores.size(); ++i) {
    ordered_json row;
    row["beta"] = scores[i].beta;
    row["gamma"] = scores[i].gamma;
    row["asr_p"] = reports[i].asr_p ? ordered_json(*reports[i].asr_p) : ordered_json(nullptr);
    row["acc_star"] = scores[i].acc_star;
    row["pseudo_dev_size"] = scores[i].pseudo_dev_size;
    row["true_poison_fraction"] = scores[i].true_poison_fraction
                                      ? ordered_json(*scores[i].true_poison_fraction)
                                      : ordered_json(nullptr);
    row["asr"] = reports[i].asr;
    row["clean_acc"] = reports[i].clean_acc;
    char name[32];
    std::snprintf(name, sizeof name, "point_%02zu", i);
    row["dir"] = name;
    summary["scores"].push_back(row);
  }
  summary["selected"] = {{"index", best},
                         {"beta", scores[best].beta},
                         {"gamma", scores[best].gamma}};
  spit((fs::path(base.out_dir) / "scores.json").string(), summary.dump(2) + "\n");

  char best_name[32];
  std::snprintf(best_name, sizeof best_name, "point_%02zu", best);
  spit((fs::path(base.out_dir) / "report.json").string(),
       slurp((fs::path(base.out_dir) / best_name / "report.json").string()));

  std::printf("selected point_%02zu: beta=%.3g gamma=%.3g (asr=%.4f clean_acc=%.4f)\n", best,
              scores[best].beta, scores[best].gamma, reports[best].asr, reports[best].clean_acc);
  return 0;
}

int do_report(const std::vector<std::string>& inputs, const std::string& labels_csv,
              const std::string& out_path) {
  const auto labels = parse_string_list(labels_csv);
  if (!labels.empty() && labels.size() != inputs.size())
    throw std::invalid_argument("--labels must match the number of report files");

  std::vector<std::pair<std::string, bdlab::EvalReport>> rows;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto report = bdlab::report_from_json(slurp(inputs[i]));
    rows.emplace_back(labels.empty() ? bdlab::regime_label(report) : labels[i], report);
  }
  const auto table = bdlab::markdown_table(rows);
  if (out_path.empty())
    std::fputs(table.c_str(), stdout);
  else
    spit(out_path, table);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"backdoor poisoning and ensemble-defense laboratory"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate the synthetic benchmark corpus");
  std::string synth_out;
  int n_per_class = 1000, vocab_size = 300;
  std::uint64_t synth_seed = 1;
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--n-per-class", n_per_class, "Training samples per class");
  synth->add_option("--vocab-size", vocab_size, "Vocabulary size");
  synth->add_option("--seed", synth_seed, "Generator seed");

  // poison
  auto* poison = app.add_subcommand("poison", "Poison a training TSV and write the mask");
  RunOpts poison_opts;
  poison->add_option("--train", poison_opts.train, "Training TSV")->required();
  poison->add_option("--out", poison_opts.out, "Output directory")->required();
  poison->add_option("--seed", poison_opts.seed, "Seed");
  add_attack_options(poison, poison_opts);

  // train
  auto* train_cmd = app.add_subcommand("train", "Run the poison/train/evaluate pipeline");
  RunOpts train_opts;
  add_run_options(train_cmd, train_opts);

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a checkpoint against a test TSV");
  RunOpts eval_opts;
  std::string eval_checkpoint, eval_test, eval_out;
  eval_cmd->add_option("--checkpoint", eval_checkpoint, "Main-model checkpoint JSON")->required();
  eval_cmd->add_option("--test", eval_test, "Test TSV")->required();
  eval_cmd->add_option("--out", eval_out, "Optional report directory");
  eval_cmd->add_option("--seed", eval_opts.seed, "Seed for test-side trigger placement");
  eval_cmd->add_option("--max-n", eval_opts.max_n, "Max n-gram order used at training time");
  add_attack_options(eval_cmd, eval_opts);

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Grid-search beta/gamma with pseudo-dev scoring");
  RunOpts sweep_opts;
  std::string betas_csv, gammas_csv;
  double delta = 0.02;
  add_run_options(sweep_cmd, sweep_opts);
  sweep_cmd->add_option("--betas", betas_csv, "Beta grid (csv); default grid if omitted");
  sweep_cmd->add_option("--gammas", gammas_csv, "Gamma grid (csv); default grid if omitted");
  sweep_cmd->add_option("--delta", delta, "acc_star tolerance band");

  // report
  auto* report_cmd = app.add_subcommand("report", "Pivot report.json files into a markdown table");
  std::vector<std::string> report_inputs;
  std::string report_labels, report_out;
  report_cmd->add_option("reports", report_inputs, "report.json paths")->required();
  report_cmd->add_option("--labels", report_labels, "Row labels (csv, one per report)");
  report_cmd->add_option("--out", report_out, "Write the table here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*synth) return do_synth(synth_out, n_per_class, vocab_size, synth_seed);
    if (*poison) return do_poison(poison_opts);
    if (*train_cmd) return do_train(train_opts);
    if (*eval_cmd) return do_evaluate(eval_checkpoint, eval_test, eval_opts, eval_out);
    if (*sweep_cmd) return do_sweep(sweep_opts, betas_csv, gammas_csv, delta);
    if (*report_cmd) return do_report(report_inputs, report_labels, report_out);
  } catch (const bdlab::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const bdlab::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
