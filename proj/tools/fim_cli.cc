// Copyright 2026 The FIM Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fim/config.h"
#include "fim/runner.h"

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> sets;
  std::string data_dir;
  std::string out;
  // Sugar flags; applied after --set so they win.
  std::string views;
  std::string search;
  std::string fpem;
  int64_t seed = -1;
  int64_t epochs = -1;
};

void add_common(CLI::App* cmd, CommonArgs* args, bool wants_data) {
  cmd->add_option("--config", args->config_path, "key=value config file");
  cmd->add_option("--set", args->sets, "override: key=value (repeatable)");
  if (wants_data) {
    cmd->add_option("--data", args->data_dir,
                    "dataset directory (default: $FIM_DATA_DIR)");
  }
  cmd->add_option("--views", args->views, "comma list: author,brand,category,price");
  cmd->add_option("--search", args->search, "hard|soft");
  cmd->add_option("--fpem", args->fpem, "on|off");
  cmd->add_option("--seed", args->seed, "random seed");
  cmd->add_option("--epochs", args->epochs, "training epochs");
}

fim::KeyValues collect(const CommonArgs& args) {
  fim::KeyValues kv;
  if (!args.config_path.empty()) kv = fim::read_config_file(args.config_path);
  for (const auto& s : args.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw fim::ConfigError("--set expects key=value, got '" + s + "'");
    }
    kv.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  if (!args.views.empty()) kv.emplace_back("views", args.views);
  if (!args.search.empty()) kv.emplace_back("search_mode", args.search);
  if (!args.fpem.empty()) {
    kv.emplace_back("fpem.enabled", args.fpem == "on"    ? "true"
                                    : args.fpem == "off" ? "false"
                                                         : args.fpem);
  }
  if (args.seed >= 0) kv.emplace_back("seed", std::to_string(args.seed));
  if (args.epochs >= 0) kv.emplace_back("epochs", std::to_string(args.epochs));
  return kv;
}

std::string resolve_data_dir(const CommonArgs& args) {
  if (!args.data_dir.empty()) return args.data_dir;
  if (const char* env = std::getenv("FIM_DATA_DIR"); env && *env) return env;
  throw fim::DataError("no dataset directory: pass --data or set FIM_DATA_DIR");
}

void print_rows(const std::vector<fim::MetricRow>& rows) {
  std::printf("step,task,loss,auc,gauc\n");
  for (const auto& r : rows) {
    std::printf("%lld,%d,%.6f,", static_cast<long long>(r.step), r.task, r.loss);
    if (r.auc) std::printf("%.6f", *r.auc);
    std::printf(",");
    if (r.gauc) std::printf("%.6f", *r.gauc);
    std::printf("\n");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"frequency-aware multi-view interest modeling harness"};
  app.require_subcommand(1);

  CommonArgs gen_args, train_args, eval_args, ablate_args, check_args;
  std::string eval_checkpoint;

  auto* gen = app.add_subcommand("generate", "write a synthetic dataset");
  add_common(gen, &gen_args, false);
  gen->add_option("--out", gen_args.out, "output dataset directory")->required();

  auto* train = app.add_subcommand("train", "train and evaluate per epoch");
  add_common(train, &train_args, true);
  train->add_option("--out", train_args.out, "directory for metrics.csv and model.ckpt");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
  add_common(eval, &eval_args, true);
  eval->add_option("--checkpoint", eval_checkpoint, "model.ckpt path")->required();

  auto* ablate = app.add_subcommand("ablate", "run a grid of configurations");
  add_common(ablate, &ablate_args, false);
  ablate->add_option("--out", ablate_args.out, "output CSV path")->required();

  auto* check = app.add_subcommand("gradcheck", "finite-difference gradient report");
  add_common(check, &check_args, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      fim::RunConfig cfg = fim::parse_run_config(collect(gen_args));
      fim::run_generate(cfg, gen_args.out);
      std::printf("dataset written to %s\n", gen_args.out.c_str());
      return 0;
    }
    if (train->parsed()) {
      fim::RunConfig cfg = fim::parse_run_config(collect(train_args));
      fim::LoadedData data = fim::load_dataset(resolve_data_dir(train_args));
      fim::TrainResult result = fim::run_train(cfg, data, train_args.out);
      print_rows(result.rows);
      if (!train_args.out.empty()) {
        std::printf("artifacts written to %s\n", train_args.out.c_str());
      }
      return 0;
    }
    if (eval->parsed()) {
      fim::RunConfig cfg = fim::parse_run_config(collect(eval_args));
      fim::LoadedData data = fim::load_dataset(resolve_data_dir(eval_args));
      fim::TrainResult result = fim::run_eval(cfg, data, eval_checkpoint);
      print_rows(result.rows);
      return 0;
    }
    if (ablate->parsed()) {
      auto rows = fim::run_ablate(collect(ablate_args), ablate_args.out);
      std::printf("config_hash,assignment,auc,gauc,wall_seconds\n");
      for (const auto& r : rows) {
        std::printf("%s,\"%s\",", r.hash.c_str(), r.assignment.c_str());
        if (r.auc) std::printf("%.6f", *r.auc);
        std::printf(",");
        if (r.gauc) std::printf("%.6f", *r.gauc);
        std::printf(",%.2f\n", r.wall_seconds);
      }
      return 0;
    }
    if (check->parsed()) {
      fim::RunConfig cfg = fim::parse_run_config(collect(check_args));
      fim::GradCheckRun run = fim::run_gradcheck(cfg);
      std::printf("group,max_rel_err\n");
      for (const auto& [group, err] : run.group_max) {
        std::printf("%s,%.3e\n", group.c_str(), err);
      }
      for (const auto& group : run.exempt_groups) {
        std::printf("%s,exempt\n", group.c_str());
      }
      std::printf("max_rel_err,%.3e\n", run.report.max_rel_err);
      std::printf("result,%s\n", run.passed ? "pass" : "fail");
      return run.passed ? 0 : 3;
    }
  } catch (const fim::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const fim::NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 3;
  } catch (const fim::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  }
  return 0;
}
