// Copyright 2026 The sercc Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "sercc/commands.hpp"

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string features;
  bool iem4_view = false;
};

void add_common(CLI::App* cmd, Flags& f, bool config_required) {
  auto* opt = cmd->add_option("--config", f.config, "configuration file");
  if (config_required) opt->required();
  cmd->add_option("--out", f.out, "output directory (or file for eval)");
  cmd->add_option("--seed", f.seed, "override the configured seed");
  cmd->add_option("--features", f.features, "feature kind")->check(CLI::IsMember({"lmfb", "mfcc"}));
  cmd->add_flag("--iem4-view", f.iem4_view, "add the four-class IEMOCAP view to reports");
}

sercc::cli::Overrides overrides(const Flags& f) {
  sercc::cli::Overrides ov;
  ov.seed = f.seed;
  if (!f.features.empty()) ov.features = sercc::feature_kind_from_name(f.features);
  ov.iem4_view = f.iem4_view;
  return ov;
}

std::string require_out(const Flags& f, const char* cmd) {
  if (f.out.empty()) throw sercc::ArgumentError(std::string(cmd) + ": --out is required");
  return f.out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sercc: cross-corpus speech emotion recognition"};
  app.require_subcommand(1);
  Flags f;
  std::string run_dir;

  auto* extract = app.add_subcommand("extract", "compute and cache features for the configured manifests");
  add_common(extract, f, true);
  auto* train = app.add_subcommand("train", "train a CC, MD, DAT or OOD model into a run directory");
  add_common(train, f, true);
  auto* adapt = app.add_subcommand("adapt", "adapt a base run to a held-out corpus");
  add_common(adapt, f, true);
  auto* eval = app.add_subcommand("eval", "score a run directory");
  add_common(eval, f, false);
  eval->add_option("run", run_dir, "run directory")->required();
  auto* synth = app.add_subcommand("synth", "write synthetic corpora from a spec file");
  add_common(synth, f, true);
  auto* all = app.add_subcommand("reproduce-all", "synthesize corpora and run the full regime grid");
  add_common(all, f, true);

  CLI11_PARSE(app, argc, argv);

  sercc::cli::Context ctx{std::cout, std::cerr};
  try {
    const auto ov = overrides(f);
    if (extract->parsed()) return sercc::cli::cmd_extract(ctx, sercc::cli::load_config(f.config, ov), f.out);
    if (train->parsed())
      return sercc::cli::cmd_train(ctx, sercc::cli::load_config(f.config, ov), require_out(f, "train"));
    if (adapt->parsed())
      return sercc::cli::cmd_adapt(ctx, sercc::cli::load_config(f.config, ov), require_out(f, "adapt"));
    if (eval->parsed()) {
      std::optional<sercc::TrainingConfig> request;
      if (!f.config.empty()) request = sercc::cli::load_config(f.config, ov);
      return sercc::cli::cmd_eval(ctx, run_dir, request, f.iem4_view, f.out);
    }
    if (synth->parsed()) return sercc::cli::cmd_synth(ctx, f.config, require_out(f, "synth"), f.seed);
    if (all->parsed()) return sercc::cli::cmd_reproduce_all(ctx, f.config, require_out(f, "reproduce-all"), ov);
  } catch (const sercc::Error& e) {
    std::cerr << "sercc: " << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "sercc: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
