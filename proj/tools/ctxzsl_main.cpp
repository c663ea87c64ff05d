//  Copyright 2026 The ctxzsl Authors
//
//  Licensed under the Apache License, Version 2.0 (the "License");
//  you may not use this file except in compliance with the License.
//  You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
//  Unless required by applicable law or agreed to in writing, software
//  distributed under the License is distributed on an "AS IS" BASIS,
//  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//  See the License for the specific language governing permissions and
//  limitations under the License.

#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "ctxzsl/ctxzsl.h"

namespace {

// Every failure is reported as one machine-parsable line on stderr and the
// status code becomes the process exit code.
int finish(ctxzsl_status status) {
  if (status == CTXZSL_OK) return 0;
  std::fprintf(stderr, "%s: %s\n", ctxzsl_status_name(status), ctxzsl_last_error());
  return static_cast<int>(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-shot multi-label attribute recognition toolkit"};
  app.require_subcommand(1);

  // split
  std::string split_annotations, split_out;
  int num_novel = 9;
  int num_splits = 50;
  std::int64_t split_seed = 0;
  CLI::App* split = app.add_subcommand(
      "split", "Generate seeded known/novel attribute splits");
  split->add_option("--annotations", split_annotations, "Annotation CSV")->required();
  split->add_option("--num-novel", num_novel, "Novel attributes per split");
  split->add_option("--num-splits", num_splits, "Number of split files");
  split->add_option("--seed", split_seed, "Base random seed");
  split->add_option("--out", split_out, "Output directory")->required();

  // run
  ctxzsl_run_options run_options;
  ctxzsl_run_options_init(&run_options);
  std::string run_features, run_annotations, run_vectors, run_split, run_out, run_model;
  bool run_l2 = false;
  CLI::App* run = app.add_subcommand(
      "run", "Train one model on a split and score its test instances");
  run->add_option("--features", run_features, "Feature CSV")->required();
  run->add_option("--annotations", run_annotations, "Annotation CSV")->required();
  run->add_option("--vectors", run_vectors, "Word-vector table")->required();
  run->add_option("--split", run_split, "Split JSON")->required();
  run->add_option("--model", run_model,
                  "texcazsl | cocazsl | wve | eszsl | exdap | dmp")
      ->required();
  run->add_option("--out", run_out, "Output directory")->required();
  run->add_option("--gamma", run_options.gamma, "Text-conditional temperature");
  run->add_option("--lambda", run_options.lambda, "Ridge strength");
  run->add_option("--alpha", run_options.alpha, "Co-occurrence weight exponent");
  run->add_option("--c-max", run_options.c_max,
                  "Co-occurrence weight cap (0 = data-driven)");
  run->add_option("--cost", run_options.cost, "Known-classifier cost");
  run->add_option("--pos-weight", run_options.pos_weight,
                  "Known-classifier positive-class weight");
  run->add_option("--lambda1", run_options.lambda1, "ESZSL feature regulariser");
  run->add_option("--lambda2", run_options.lambda2, "ESZSL embedding regulariser");
  run->add_flag("--l2-normalize", run_l2, "L2-normalise feature columns");

  // eval
  std::string eval_scores, eval_annotations, eval_split, eval_out;
  std::string eval_binarize = "uniform";
  CLI::App* eval = app.add_subcommand("eval", "Evaluate a score CSV against a split");
  eval->add_option("--scores", eval_scores, "Score CSV")->required();
  eval->add_option("--annotations", eval_annotations, "Annotation CSV")->required();
  eval->add_option("--split", eval_split, "Split JSON")->required();
  eval->add_option("--binarize", eval_binarize,
                   "uniform | fixed:<t> | top-k:<k> (Hamming policy)");
  eval->add_option("--out", eval_out, "Metrics JSON path")->required();

  // explain
  std::string explain_model, explain_vectors, explain_novel, explain_vocab, explain_out;
  CLI::App* explain = app.add_subcommand(
      "explain", "Rank known attributes by conditional probability for a novel one");
  explain->add_option("--model", explain_model, "Bilinear context model JSON")
      ->required();
  explain->add_option("--vectors", explain_vectors, "Word-vector table")->required();
  explain->add_option("--novel", explain_novel, "Novel attribute name")->required();
  explain->add_option("--known-vocab", explain_vocab,
                      "Known attribute names, one per line")
      ->required();
  explain->add_option("--out", explain_out, "Output CSV path")->required();

  // synth
  std::string synth_config, synth_out;
  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("--config", synth_config, "Synth config JSON")->required();
  synth->add_option("--out", synth_out, "Output directory")->required();

  // experiment
  std::string experiment_config;
  CLI::App* experiment = app.add_subcommand(
      "experiment", "Run the full split/run/eval grid from a config JSON");
  experiment->add_option("--config", experiment_config, "Experiment config JSON")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "CTXZSL_ERR_CONFIG: %s\n", e.what());
    return static_cast<int>(CTXZSL_ERR_CONFIG);
  }

  if (split->parsed()) {
    return finish(ctxzsl_cmd_split(split_annotations.c_str(), num_novel, num_splits,
                                   split_seed, split_out.c_str()));
  }
  if (run->parsed()) {
    run_options.features_path = run_features.c_str();
    run_options.annotations_path = run_annotations.c_str();
    run_options.vectors_path = run_vectors.c_str();
    run_options.split_path = run_split.c_str();
    run_options.out_dir = run_out.c_str();
    run_options.model = run_model.c_str();
    run_options.l2_normalize = run_l2 ? 1 : 0;
    return finish(ctxzsl_cmd_run(&run_options));
  }
  if (eval->parsed()) {
    return finish(ctxzsl_cmd_eval(eval_scores.c_str(), eval_annotations.c_str(),
                                  eval_split.c_str(), eval_binarize.c_str(),
                                  eval_out.c_str()));
  }
  if (explain->parsed()) {
    return finish(ctxzsl_cmd_explain(explain_model.c_str(), explain_vectors.c_str(),
                                     explain_novel.c_str(), explain_vocab.c_str(),
                                     explain_out.c_str()));
  }
  if (synth->parsed()) {
    return finish(ctxzsl_cmd_synth(synth_config.c_str(), synth_out.c_str()));
  }
  if (experiment->parsed()) {
    return finish(ctxzsl_cmd_experiment(experiment_config.c_str()));
  }
  std::fprintf(stderr, "CTXZSL_ERR_CONFIG: no command given\n");
  return static_cast<int>(CTXZSL_ERR_CONFIG);
}
