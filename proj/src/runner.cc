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

#include "fim/runner.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "fim/adam.h"
#include "fim/metrics.h"
#include "fim/tape.h"

namespace fim {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct EvalMetrics {
  std::vector<std::optional<double>> auc_by_task;
  std::vector<std::optional<double>> gauc_by_task;
};

EvalMetrics evaluate(const FimModel& model, const Dataset& test,
                     int batch_size) {
  const int n_tasks = model.config().n_tasks;
  std::vector<std::vector<double>> scores(static_cast<size_t>(n_tasks));
  std::vector<std::vector<int>> labels(static_cast<size_t>(n_tasks));
  std::vector<std::string> users;
  for (size_t begin = 0; begin < test.size(); begin += static_cast<size_t>(batch_size)) {
    const size_t end = std::min(test.size(), begin + static_cast<size_t>(batch_size));
    std::span<const Sample> batch(test.data() + begin, end - begin);
    auto probs = model.predict(batch);
    for (size_t i = 0; i < batch.size(); ++i) {
      users.push_back(batch[i].user_id);
      for (int t = 0; t < n_tasks; ++t) {
        scores[static_cast<size_t>(t)].push_back(probs[i][static_cast<size_t>(t)]);
        labels[static_cast<size_t>(t)].push_back(
            (t == 0 ? batch[i].label_click : batch[i].label_purchase) > 0.5 ? 1 : 0);
      }
    }
  }
  EvalMetrics out;
  for (int t = 0; t < n_tasks; ++t) {
    out.auc_by_task.push_back(
        auc(scores[static_cast<size_t>(t)], labels[static_cast<size_t>(t)]));
    out.gauc_by_task.push_back(gauc(scores[static_cast<size_t>(t)],
                                    labels[static_cast<size_t>(t)], users));
  }
  return out;
}

}  // namespace

std::string metrics_csv(const std::vector<MetricRow>& rows) {
  std::string out = "step,task,loss,auc,gauc\n";
  for (const auto& r : rows) {
    out += std::to_string(r.step);
    out += ",";
    out += std::to_string(r.task);
    out += ",";
    out += fmt_double(r.loss);
    out += ",";
    if (r.auc) out += fmt_double(*r.auc);
    out += ",";
    if (r.gauc) out += fmt_double(*r.gauc);
    out += "\n";
  }
  return out;
}

void run_generate(const RunConfig& cfg, const std::string& out_dir) {
  GenResult gen;
  try {
    gen = generate_synthetic(cfg.data);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  save_dataset(out_dir, gen, cfg.data, config_hash(cfg));
}

TrainResult run_train(const RunConfig& cfg, const LoadedData& data,
                      const std::string& out_dir, FimModel* trained) {
  const auto start = Clock::now();
  auto [train, test] = split_temporal(data.samples, cfg.effective_cutoff());
  if (train.empty()) throw DataError("train: empty training split");

  FimModel model(cfg.model, data.indexer);
  AdamOptimizer optimizer(cfg.lr);
  const int n_tasks = cfg.model.n_tasks;

  TrainResult result;
  std::vector<size_t> order(train.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  int64_t global_step = 0;
  bool logged_step0 = false;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::mt19937_64 shuffle_rng(cfg.seed * 104729u + static_cast<uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    std::vector<double> epoch_loss(static_cast<size_t>(n_tasks), 0.0);
    int64_t seen = 0;
    std::vector<Sample> batch;
    for (size_t begin = 0; begin < order.size();
         begin += static_cast<size_t>(cfg.batch_size)) {
      const size_t end =
          std::min(order.size(), begin + static_cast<size_t>(cfg.batch_size));
      batch.clear();
      for (size_t i = begin; i < end; ++i) batch.push_back(train[order[i]]);

      Tape tape;
      BatchNodes nodes = model.build_batch(tape, model.params(), batch, true);
      const double loss = tape.value(nodes.loss).value();
      if (!std::isfinite(loss)) throw NumericError("train: non-finite loss");
      if (!logged_step0) {
        for (int t = 0; t < n_tasks; ++t) {
          MetricRow row;
          row.step = 0;
          row.task = t;
          row.loss = tape.value(nodes.task_losses[static_cast<size_t>(t)]).value();
          result.rows.push_back(row);
        }
        logged_step0 = true;
      }
      tape.backward(nodes.loss);
      std::map<std::string, Tensor> grads;
      for (const auto& name : model.params().names()) {
        grads[name] = tape.grad_of(name);
      }
      optimizer.step(model.params(), grads);
      for (int t = 0; t < n_tasks; ++t) {
        epoch_loss[static_cast<size_t>(t)] +=
            tape.value(nodes.task_losses[static_cast<size_t>(t)]).value() *
            static_cast<double>(end - begin);
      }
      seen += static_cast<int64_t>(end - begin);
      ++global_step;
    }
    EvalMetrics eval = test.empty() ? EvalMetrics{} : evaluate(model, test, cfg.batch_size);
    for (int t = 0; t < n_tasks; ++t) {
      MetricRow row;
      row.step = global_step;
      row.task = t;
      row.loss = epoch_loss[static_cast<size_t>(t)] / static_cast<double>(seen);
      if (!test.empty()) {
        row.auc = eval.auc_by_task[static_cast<size_t>(t)];
        row.gauc = eval.gauc_by_task[static_cast<size_t>(t)];
      }
      result.rows.push_back(row);
      if (t == cfg.metric_task && !test.empty()) {
        result.final_auc = eval.auc_by_task[static_cast<size_t>(t)];
        result.final_gauc = eval.gauc_by_task[static_cast<size_t>(t)];
      }
    }
  }

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream csv(out_dir + "/metrics.csv", std::ios::trunc | std::ios::binary);
    if (!csv) throw DataError("train: cannot write metrics.csv");
    csv << metrics_csv(result.rows);
    model.params().save(out_dir + "/model.ckpt");
  }
  if (trained) *trained = std::move(model);
  result.wall_seconds = seconds_since(start);
  return result;
}

TrainResult run_eval(const RunConfig& cfg, const LoadedData& data,
                     const std::string& checkpoint_path) {
  const auto start = Clock::now();
  auto [train, test] = split_temporal(data.samples, cfg.effective_cutoff());
  if (test.empty()) throw DataError("eval: empty test split");
  FimModel model(cfg.model, data.indexer);
  ParamStore loaded = ParamStore::load(checkpoint_path);
  if (loaded.names() != model.params().names()) {
    throw DataError("eval: checkpoint parameters do not match the config");
  }
  for (const auto& name : loaded.names()) {
    Tensor& dst = model.params().get(name);
    const Tensor& src = loaded.get(name);
    if (!dst.same_shape(src)) {
      throw DataError("eval: checkpoint shape mismatch for " + name);
    }
    dst = src;
  }
  EvalMetrics eval = evaluate(model, test, cfg.batch_size);
  TrainResult result;
  for (int t = 0; t < cfg.model.n_tasks; ++t) {
    MetricRow row;
    row.step = 0;
    row.task = t;
    row.loss = 0.0;
    row.auc = eval.auc_by_task[static_cast<size_t>(t)];
    row.gauc = eval.gauc_by_task[static_cast<size_t>(t)];
    result.rows.push_back(row);
  }
  result.final_auc = eval.auc_by_task[static_cast<size_t>(cfg.metric_task)];
  result.final_gauc = eval.gauc_by_task[static_cast<size_t>(cfg.metric_task)];
  result.wall_seconds = seconds_since(start);
  return result;
}

namespace {

// Expands grid.* keys into the cartesian product of assignments.
std::vector<KeyValues> expand_grid(const KeyValues& base, KeyValues* plain) {
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;
  for (const auto& [key, value] : base) {
    if (key.rfind("grid.", 0) != 0) {
      plain->push_back({key, value});
      continue;
    }
    const std::string target = key.substr(5);
    std::vector<std::string> values;
    if (target == "views" && value == "powerset") {
      for (int mask = 0; mask < 16; ++mask) {
        std::string v = "[";
        bool first = true;
        for (int b = 0; b < 4; ++b) {
          if (!(mask & (1 << b))) continue;
          if (!first) v += ",";
          v += view_name(all_views()[static_cast<size_t>(b)]);
          first = false;
        }
        v += "]";
        values.push_back(v);
      }
    } else {
      std::string item;
      std::stringstream ss(value);
      while (std::getline(ss, item, ',')) {
        // trim
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        values.push_back(b == std::string::npos ? "" : item.substr(b, e - b + 1));
      }
    }
    if (values.empty()) throw ConfigError("config key '" + key + "': empty grid");
    axes.push_back({target, values});
  }
  if (axes.empty()) throw ConfigError("ablate: no grid.* keys in config");
  std::vector<KeyValues> points{{}};
  for (const auto& [target, values] : axes) {
    std::vector<KeyValues> next;
    for (const auto& point : points) {
      for (const auto& v : values) {
        KeyValues extended = point;
        extended.push_back({target, v});
        next.push_back(std::move(extended));
      }
    }
    points = std::move(next);
  }
  return points;
}

}  // namespace

std::vector<AblationRow> run_ablate(const KeyValues& base_config,
                                    const std::string& out_csv) {
  KeyValues plain;
  std::vector<KeyValues> points = expand_grid(base_config, &plain);

  std::vector<AblationRow> rows;
  std::string last_data_hash;
  LoadedData data;
  for (const auto& point : points) {
    KeyValues merged = plain;
    for (const auto& kv : point) merged.push_back(kv);
    RunConfig cfg = parse_run_config(merged);

    // Regenerate only when the data portion changed.
    std::string data_hash;
    {
      std::stringstream lines(canonical_config(cfg));
      std::string line;
      while (std::getline(lines, line)) {
        if (line.rfind("data.", 0) == 0 || line.rfind("seed=", 0) == 0) {
          data_hash += line + "\n";
        }
      }
    }
    if (data_hash != last_data_hash) {
      GenResult gen = generate_synthetic(cfg.data);
      const std::string tmp_dir =
          (std::filesystem::temp_directory_path() /
           ("fim_ablate_" + config_hash(cfg)))
              .string();
      save_dataset(tmp_dir, gen, cfg.data, config_hash(cfg));
      data = load_dataset(tmp_dir);
      std::filesystem::remove_all(tmp_dir);
      last_data_hash = data_hash;
    }

    TrainResult result = run_train(cfg, data, "");
    AblationRow row;
    row.hash = config_hash(cfg);
    for (const auto& [k, v] : point) {
      if (!row.assignment.empty()) row.assignment += " ";
      row.assignment += k + "=" + v;
    }
    row.auc = result.final_auc;
    row.gauc = result.final_gauc;
    row.wall_seconds = result.wall_seconds;
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end(),
            [](const AblationRow& a, const AblationRow& b) {
              return a.hash < b.hash;
            });
  if (!out_csv.empty()) {
    std::ofstream out(out_csv, std::ios::trunc | std::ios::binary);
    if (!out) throw DataError("ablate: cannot write " + out_csv);
    out << "config_hash,assignment,auc,gauc,wall_seconds\n";
    for (const auto& r : rows) {
      out << r.hash << ",\"" << r.assignment << "\",";
      if (r.auc) out << fmt_double(*r.auc);
      out << ",";
      if (r.gauc) out << fmt_double(*r.gauc);
      out << "," << fmt_double(r.wall_seconds) << "\n";
    }
  }
  return rows;
}

GradCheckRun run_gradcheck(const RunConfig& cfg) {
  // Small generated batch; dims shrink so the coordinate sweep stays fast.
  SyntheticConfig data_cfg = cfg.data;
  data_cfg.n_users = 4;
  data_cfg.seq_len = 8;
  data_cfg.eval_steps = 1;
  data_cfg.goods_per_category = 16;
  data_cfg.seed = cfg.seed;
  if (static_cast<int>(data_cfg.category_periods.size()) > 4) {
    data_cfg.category_periods.resize(4);
  }
  data_cfg.categories_per_user =
      std::min(data_cfg.categories_per_user,
               static_cast<int>(data_cfg.category_periods.size()) - 1);

  LoadedData data = dataset_from(generate_synthetic(data_cfg), data_cfg);
  const AttributeIndexer& indexer = data.indexer;

  ModelConfig model_cfg = cfg.model;
  model_cfg.d_attr = 2;
  model_cfg.max_seq_len = data_cfg.seq_len;
  model_cfg.top_k = 4;
  model_cfg.n_experts = 2;
  model_cfg.soft_proj_dim = 4;
  model_cfg.fpem_p = std::min(model_cfg.fpem_p, data_cfg.seq_len / 4);
  model_cfg.init_seed = cfg.seed * 7919u + 1u;

  FimModel model(model_cfg, indexer);
  // Heads default to zero, which makes the loss locally flat everywhere
  // upstream; check at a generic point instead.
  {
    std::mt19937_64 rng(cfg.seed * 31u + 7u);
    for (int t = 0; t < model_cfg.n_tasks; ++t) {
      Tensor& w = model.params().get("head" + std::to_string(t) + ".w");
      w = Tensor::randn(w.shape, rng, 0.3);
      Tensor& b = model.params().get("head" + std::to_string(t) + ".b");
      b = Tensor::randn(b.shape, rng, 0.1);
    }
  }
  Dataset batch(data.samples.begin(),
                data.samples.begin() +
                    std::min<size_t>(4, data.samples.size()));

  std::map<std::string, Tensor> analytic;
  model.gradients(batch, &analytic);
  auto loss_fn = [&model, &batch](const ParamStore& store) {
    return model.loss_value(store, batch);
  };
  GradCheckRun run;
  run.report = grad_check(loss_fn, model.params(), analytic, 1e-5,
                          model.stopgrad_exempt_params());
  for (const auto& [name, err] : run.report.per_param) {
    const std::string group = FimModel::param_group(name);
    auto it = run.group_max.find(group);
    if (it == run.group_max.end() || err > it->second) {
      run.group_max[group] = err;
    }
  }
  for (const auto& [name, mag] : run.report.exempt_fd_mag) {
    run.exempt_groups.insert(FimModel::param_group(name));
    (void)mag;
  }
  run.passed = run.report.max_rel_err < 1e-4;
  return run;
}

}  // namespace fim
