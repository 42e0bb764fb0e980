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

#include "fim/config.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "fim/embeddings.h"

namespace fim {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

[[noreturn]] void bad_key(const std::string& key, const std::string& why) {
  throw ConfigError("config key '" + key + "': " + why);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) bad_key(key, "not a number: '" + v + "'");
    return d;
  } catch (const ConfigError&) {
    throw;
  } catch (...) {
    bad_key(key, "not a number: '" + v + "'");
  }
}

int64_t parse_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const int64_t i = std::stoll(v, &pos);
    if (pos != v.size()) bad_key(key, "not an integer: '" + v + "'");
    return i;
  } catch (const ConfigError&) {
    throw;
  } catch (...) {
    bad_key(key, "not an integer: '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  bad_key(key, "not a boolean: '" + v + "'");
}

std::vector<ViewKey> parse_views(const std::string& key, std::string v) {
  if (!v.empty() && v.front() == '[') v = v.substr(1);
  if (!v.empty() && v.back() == ']') v.pop_back();
  std::vector<ViewKey> views;
  for (const auto& name : split(v, ',')) {
    ViewKey view;
    if (!parse_view(name, &view)) bad_key(key, "unknown view '" + name + "'");
    if (std::find(views.begin(), views.end(), view) != views.end()) {
      bad_key(key, "duplicate view '" + name + "'");
    }
    views.push_back(view);
  }
  return views;
}

void apply_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  // Data generator keys.
  if (key == "data.users") {
    cfg.data.n_users = static_cast<int>(parse_int(key, value));
  } else if (key == "data.seq_len") {
    cfg.data.seq_len = static_cast<int>(parse_int(key, value));
    cfg.model.max_seq_len = cfg.data.seq_len;
  } else if (key == "data.eval_steps") {
    cfg.data.eval_steps = static_cast<int>(parse_int(key, value));
  } else if (key == "data.exploration") {
    cfg.data.exploration_rate = parse_double(key, value);
  } else if (key == "data.periods") {
    cfg.data.category_periods.clear();
    for (const auto& p : split(value, ',')) {
      cfg.data.category_periods.push_back(static_cast<int>(parse_int(key, p)));
    }
    if (cfg.data.category_periods.empty()) bad_key(key, "empty period list");
  } else if (key == "data.promos") {
    cfg.data.promo_windows.clear();
    for (const auto& item : split(value, ';')) {
      const auto parts = split(item, ':');
      if (parts.size() != 3) bad_key(key, "promo must be start:end:boost");
      PromoWindow w;
      w.start = static_cast<int>(parse_int(key, parts[0]));
      w.end = static_cast<int>(parse_int(key, parts[1]));
      w.boost = parse_double(key, parts[2]);
      cfg.data.promo_windows.push_back(w);
    }
  } else if (key == "data.categories_per_user") {
    cfg.data.categories_per_user = static_cast<int>(parse_int(key, value));
  } else if (key == "data.goods_per_category") {
    cfg.data.goods_per_category = static_cast<int>(parse_int(key, value));
  } else if (key == "data.brands_per_category") {
    cfg.data.brands_per_category = static_cast<int>(parse_int(key, value));
  } else if (key == "data.authors_per_category") {
    cfg.data.authors_per_category = static_cast<int>(parse_int(key, value));
  } else if (key == "data.pref_strength") {
    cfg.data.pref_strength = parse_double(key, value);
  } else if (key == "data.positive_rate") {
    cfg.data.positive_rate = parse_double(key, value);
  } else if (key == "data.neg_explored_frac") {
    cfg.data.neg_explored_frac = parse_double(key, value);
  } else if (key == "data.neg_offpref_frac") {
    cfg.data.neg_offpref_frac = parse_double(key, value);
  } else if (key == "data.click_in_set") {
    cfg.data.click_in_set = parse_double(key, value);
  } else if (key == "data.click_out_set") {
    cfg.data.click_out_set = parse_double(key, value);
  }
  // Model keys.
  else if (key == "dims") {
    cfg.model.d_attr = static_cast<int>(parse_int(key, value));
  } else if (key == "top_k") {
    cfg.model.top_k = static_cast<int>(parse_int(key, value));
  } else if (key == "views") {
    cfg.model.views = parse_views(key, value);
  } else if (key == "search_mode") {
    if (value == "hard") cfg.model.search = SearchMode::kHard;
    else if (value == "soft") cfg.model.search = SearchMode::kSoft;
    else bad_key(key, "expected hard|soft");
  } else if (key == "view_attrs") {
    if (value == "own") cfg.model.view_attrs = ViewAttrMode::kOwn;
    else if (value == "all") cfg.model.view_attrs = ViewAttrMode::kAll;
    else bad_key(key, "expected own|all");
  } else if (key == "attn_scoring") {
    if (value == "mlp") cfg.model.attn_scoring = AttnScoring::kMlp;
    else if (value == "dot") cfg.model.attn_scoring = AttnScoring::kDot;
    else bad_key(key, "expected mlp|dot");
  } else if (key == "share_soft_weights") {
    cfg.model.share_soft_weights = parse_bool(key, value);
  } else if (key == "soft_proj_dim") {
    cfg.model.soft_proj_dim = static_cast<int>(parse_int(key, value));
  } else if (key == "fpem.enabled") {
    cfg.model.fpem_enabled = parse_bool(key, value);
  } else if (key == "fpem.mode") {
    if (value == "trunc") cfg.model.fpem_filter = FilterKind::kTrunc;
    else if (value == "butter") cfg.model.fpem_filter = FilterKind::kButter;
    else bad_key(key, "expected trunc|butter");
  } else if (key == "fpem.p") {
    cfg.model.fpem_p = static_cast<int>(parse_int(key, value));
  } else if (key == "fpem.fc") {
    cfg.model.fpem_fc = parse_double(key, value);
  } else if (key == "fpem.order") {
    cfg.model.fpem_order = static_cast<int>(parse_int(key, value));
  } else if (key == "fpem.fusion") {
    if (value == "beta") cfg.model.fpem_fusion = FusionMode::kBeta;
    else if (value == "direct") cfg.model.fpem_fusion = FusionMode::kDirect;
    else bad_key(key, "expected beta|direct");
  } else if (key == "fpem.sideinfo") {
    if (value == "none") cfg.model.sideinfo = SideInfoMode::kNone;
    else if (value == "grad") cfg.model.sideinfo = SideInfoMode::kGrad;
    else if (value == "nograd") cfg.model.sideinfo = SideInfoMode::kNoGrad;
    else bad_key(key, "expected none|grad|nograd");
  } else if (key == "fpem.share_gates") {
    cfg.model.share_gates = parse_bool(key, value);
  } else if (key == "alpha") {
    cfg.model.alpha = parse_double(key, value);
  } else if (key == "mmoe.experts") {
    cfg.model.n_experts = static_cast<int>(parse_int(key, value));
  } else if (key == "mmoe.tasks") {
    cfg.model.n_tasks = static_cast<int>(parse_int(key, value));
  }
  // Training keys.
  else if (key == "lr") {
    cfg.lr = parse_double(key, value);
  } else if (key == "batch_size") {
    cfg.batch_size = static_cast<int>(parse_int(key, value));
  } else if (key == "epochs") {
    cfg.epochs = static_cast<int>(parse_int(key, value));
  } else if (key == "seed") {
    cfg.seed = static_cast<uint64_t>(parse_int(key, value));
  } else if (key == "train.cutoff") {
    cfg.cutoff = static_cast<int>(parse_int(key, value));
  } else if (key == "metric_task") {
    if (value == "click") cfg.metric_task = 0;
    else if (value == "purchase") cfg.metric_task = 1;
    else bad_key(key, "expected click|purchase");
  } else if (key == "baseline") {
    if (value == "none") {
      // keep defaults
    } else if (value == "fpem_off") {
      cfg.model.fpem_enabled = false;
    } else if (value == "sim_hard") {
      cfg.model.fpem_enabled = false;
      cfg.model.views = {ViewKey::kCategory};
      cfg.model.search = SearchMode::kHard;
    } else {
      bad_key(key, "expected none|fpem_off|sim_hard");
    }
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void validate(const RunConfig& cfg) {
  if (cfg.model.d_attr < 1) throw ConfigError("config key 'dims': must be >= 1");
  if (cfg.lr <= 0.0) throw ConfigError("config key 'lr': must be positive");
  if (cfg.batch_size < 1) throw ConfigError("config key 'batch_size': must be >= 1");
  if (cfg.epochs < 0) throw ConfigError("config key 'epochs': must be >= 0");
  if (!(cfg.model.alpha >= 0.0 && cfg.model.alpha <= 1.0)) {
    throw ConfigError("config key 'alpha': out of [0, 1]");
  }
  if (cfg.model.n_tasks < 1 || cfg.model.n_tasks > 2) {
    throw ConfigError("config key 'mmoe.tasks': this build supports 1 or 2");
  }
  if (cfg.model.n_experts < 1) {
    throw ConfigError("config key 'mmoe.experts': must be >= 1");
  }
  if (cfg.model.views.empty() && !cfg.model.fpem_enabled) {
    throw ConfigError("config key 'views': empty views require fpem.enabled");
  }
  const int l = cfg.data.seq_len / 2 + 1;
  if (cfg.model.fpem_enabled && cfg.model.fpem_filter == FilterKind::kTrunc &&
      (cfg.model.fpem_p < 1 || 2 * cfg.model.fpem_p > l)) {
    throw ConfigError("config key 'fpem.p': out of [1, L/2]");
  }
  if (cfg.model.fpem_enabled && cfg.model.fpem_filter == FilterKind::kButter &&
      !(cfg.model.fpem_fc > 0.0 && cfg.model.fpem_fc < 0.5)) {
    throw ConfigError("config key 'fpem.fc': out of (0, 0.5)");
  }
  if (cfg.metric_task >= cfg.model.n_tasks) {
    throw ConfigError("config key 'metric_task': task not enabled");
  }
}

}  // namespace

int RunConfig::effective_cutoff() const {
  if (cutoff >= 0) return cutoff;
  const int test_steps = std::max(1, data.eval_steps / 4);
  return data.seq_len + data.eval_steps - test_steps - 1;
}

KeyValues read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  KeyValues kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": expected key = value");
    }
    kv.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return kv;
}

RunConfig parse_run_config(const KeyValues& kv) {
  RunConfig cfg;
  for (const auto& [key, value] : kv) apply_key(cfg, key, value);
  // One seed drives the generator, the parameter init, and batch order.
  cfg.data.seed = cfg.seed;
  cfg.model.init_seed = cfg.seed * 7919u + 1u;
  cfg.model.max_seq_len = cfg.data.seq_len;
  validate(cfg);
  return cfg;
}

std::string canonical_config(const RunConfig& cfg) {
  std::map<std::string, std::string> out;
  auto put_int = [&](const std::string& k, int64_t v) {
    out[k] = std::to_string(v);
  };
  auto put_dbl = [&](const std::string& k, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out[k] = buf;
  };
  put_int("data.users", cfg.data.n_users);
  put_int("data.seq_len", cfg.data.seq_len);
  put_int("data.eval_steps", cfg.data.eval_steps);
  put_dbl("data.exploration", cfg.data.exploration_rate);
  {
    std::string periods;
    for (int p : cfg.data.category_periods) {
      if (!periods.empty()) periods += ",";
      periods += std::to_string(p);
    }
    out["data.periods"] = periods;
  }
  {
    std::string promos;
    for (const auto& w : cfg.data.promo_windows) {
      if (!promos.empty()) promos += ";";
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%d:%d:%.17g", w.start, w.end, w.boost);
      promos += buf;
    }
    out["data.promos"] = promos;
  }
  put_int("data.categories_per_user", cfg.data.categories_per_user);
  put_int("data.goods_per_category", cfg.data.goods_per_category);
  put_int("data.brands_per_category", cfg.data.brands_per_category);
  put_int("data.authors_per_category", cfg.data.authors_per_category);
  put_dbl("data.pref_strength", cfg.data.pref_strength);
  put_dbl("data.positive_rate", cfg.data.positive_rate);
  put_dbl("data.neg_explored_frac", cfg.data.neg_explored_frac);
  put_dbl("data.neg_offpref_frac", cfg.data.neg_offpref_frac);
  put_dbl("data.click_in_set", cfg.data.click_in_set);
  put_dbl("data.click_out_set", cfg.data.click_out_set);
  put_int("dims", cfg.model.d_attr);
  put_int("top_k", cfg.model.top_k);
  {
    std::string views;
    for (ViewKey v : cfg.model.views) {
      if (!views.empty()) views += ",";
      views += view_name(v);
    }
    out["views"] = "[" + views + "]";
  }
  out["search_mode"] = cfg.model.search == SearchMode::kHard ? "hard" : "soft";
  out["view_attrs"] =
      cfg.model.view_attrs == ViewAttrMode::kAll ? "all" : "own";
  out["attn_scoring"] =
      cfg.model.attn_scoring == AttnScoring::kMlp ? "mlp" : "dot";
  out["share_soft_weights"] = cfg.model.share_soft_weights ? "true" : "false";
  put_int("soft_proj_dim", cfg.model.soft_proj_dim);
  out["fpem.enabled"] = cfg.model.fpem_enabled ? "true" : "false";
  out["fpem.mode"] =
      cfg.model.fpem_filter == FilterKind::kTrunc ? "trunc" : "butter";
  put_int("fpem.p", cfg.model.fpem_p);
  put_dbl("fpem.fc", cfg.model.fpem_fc);
  put_int("fpem.order", cfg.model.fpem_order);
  out["fpem.fusion"] =
      cfg.model.fpem_fusion == FusionMode::kBeta ? "beta" : "direct";
  out["fpem.sideinfo"] = cfg.model.sideinfo == SideInfoMode::kNone ? "none"
                         : cfg.model.sideinfo == SideInfoMode::kGrad
                             ? "grad"
                             : "nograd";
  out["fpem.share_gates"] = cfg.model.share_gates ? "true" : "false";
  put_dbl("alpha", cfg.model.alpha);
  put_int("mmoe.experts", cfg.model.n_experts);
  put_int("mmoe.tasks", cfg.model.n_tasks);
  put_dbl("lr", cfg.lr);
  put_int("batch_size", cfg.batch_size);
  put_int("epochs", cfg.epochs);
  put_int("seed", static_cast<int64_t>(cfg.seed));
  put_int("train.cutoff", cfg.effective_cutoff());
  put_int("metric_task", cfg.metric_task);

  std::string text;
  for (const auto& [k, v] : out) {
    text += k;
    text += "=";
    text += v;
    text += "\n";
  }
  return text;
}

std::string config_hash(const RunConfig& cfg) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(canonical_config(cfg))));
  return buf;
}

}  // namespace fim
