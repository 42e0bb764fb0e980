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

#include "fim/data.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace fim {

namespace {

using ordered_json = nlohmann::ordered_json;

struct Catalog {
  int n_categories = 0;
  std::vector<std::pair<double, double>> price_ranges;
};

std::string cat_token(int c) { return "cat" + std::to_string(c); }

std::string goods_token(int c, int g) {
  return "g" + std::to_string(c) + "_" + std::to_string(g);
}

std::string brand_token(int c, int b) {
  return "b" + std::to_string(c) + "_" + std::to_string(b);
}

std::string author_token(int c, int a) {
  return "a" + std::to_string(c) + "_" + std::to_string(a);
}

std::string user_token(int u) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "u%05d", u);
  return buf;
}

int goods_brand(const SyntheticConfig& cfg, int g) {
  return g % cfg.brands_per_category;
}

int goods_author(const SyntheticConfig& cfg, int g) {
  return (g / cfg.brands_per_category) % cfg.authors_per_category;
}

Catalog make_catalog(const SyntheticConfig& cfg) {
  Catalog cat;
  cat.n_categories = static_cast<int>(cfg.category_periods.size());
  if (cat.n_categories < 2) {
    throw std::invalid_argument("synthetic: need at least two categories");
  }
  for (int p : cfg.category_periods) {
    if (p < 1) throw std::invalid_argument("synthetic: period must be >= 1");
  }
  if (cfg.exploration_rate < 0.0 || cfg.exploration_rate > 1.0) {
    throw std::invalid_argument("synthetic: exploration_rate out of [0, 1]");
  }
  if (cfg.n_users < 1 || cfg.seq_len < 1 || cfg.eval_steps < 1) {
    throw std::invalid_argument("synthetic: bad sizes");
  }
  if (cfg.categories_per_user < 1 ||
      cfg.categories_per_user >= cat.n_categories) {
    throw std::invalid_argument(
        "synthetic: categories_per_user must leave room for exploration");
  }
  if (!cfg.price_ranges.empty() &&
      static_cast<int>(cfg.price_ranges.size()) != cat.n_categories) {
    throw std::invalid_argument("synthetic: price_ranges size mismatch");
  }
  cat.price_ranges = cfg.price_ranges;
  if (cat.price_ranges.empty()) {
    for (int c = 0; c < cat.n_categories; ++c) {
      const double lo = 5.0 * (c + 1);
      cat.price_ranges.emplace_back(lo, 4.0 * lo);
    }
  }
  return cat;
}

double promo_boost(const SyntheticConfig& cfg, int step) {
  double boost = 1.0;
  for (const auto& w : cfg.promo_windows) {
    if (step >= w.start && step < w.end) boost = std::max(boost, w.boost);
  }
  return boost;
}

struct UserProfile {
  std::vector<PlantedSchedule> planted;
  std::vector<bool> is_planted;
  std::vector<int> pref_brand;   // per category
  std::vector<int> pref_author;  // per category
  std::vector<double> pref_level;  // price fraction per category
};

UserProfile draw_profile(const SyntheticConfig& cfg, const Catalog& cat,
                         std::mt19937_64& rng) {
  UserProfile prof;
  std::vector<int> order(static_cast<size_t>(cat.n_categories));
  for (int c = 0; c < cat.n_categories; ++c) order[static_cast<size_t>(c)] = c;
  std::shuffle(order.begin(), order.end(), rng);
  prof.is_planted.assign(static_cast<size_t>(cat.n_categories), false);
  for (int i = 0; i < cfg.categories_per_user; ++i) {
    const int c = order[static_cast<size_t>(i)];
    const int period = cfg.category_periods[static_cast<size_t>(c)];
    std::uniform_int_distribution<int> phase_dist(0, period - 1);
    prof.planted.push_back({c, period, phase_dist(rng)});
    prof.is_planted[static_cast<size_t>(c)] = true;
  }
  std::sort(prof.planted.begin(), prof.planted.end(),
            [](const PlantedSchedule& a, const PlantedSchedule& b) {
              return a.category < b.category;
            });
  std::uniform_int_distribution<int> brand_dist(0, cfg.brands_per_category - 1);
  std::uniform_int_distribution<int> author_dist(0,
                                                 cfg.authors_per_category - 1);
  std::uniform_real_distribution<double> level_dist(0.15, 0.85);
  for (int c = 0; c < cat.n_categories; ++c) {
    prof.pref_brand.push_back(brand_dist(rng));
    prof.pref_author.push_back(author_dist(rng));
    prof.pref_level.push_back(level_dist(rng));
  }
  return prof;
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

double draw_price(const Catalog& cat, int category, double frac) {
  const auto [lo, hi] = cat.price_ranges[static_cast<size_t>(category)];
  return round2(lo + frac * (hi - lo));
}

// Picks a goods index: from the user's preferred pool with probability
// pref_strength, otherwise uniform over the category.
int draw_goods(const SyntheticConfig& cfg, const UserProfile& prof,
               int category, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_int_distribution<int> any(0, cfg.goods_per_category - 1);
  if (u01(rng) >= cfg.pref_strength) return any(rng);
  // Preferred (brand, author) goods form a stride pattern over the pool.
  std::vector<int> pool;
  for (int g = 0; g < cfg.goods_per_category; ++g) {
    if (goods_brand(cfg, g) == prof.pref_brand[static_cast<size_t>(category)] &&
        goods_author(cfg, g) ==
            prof.pref_author[static_cast<size_t>(category)]) {
      pool.push_back(g);
    }
  }
  if (pool.empty()) return any(rng);
  std::uniform_int_distribution<int> pick(0,
                                          static_cast<int>(pool.size()) - 1);
  return pool[static_cast<size_t>(pick(rng))];
}

double draw_price_frac(const UserProfile& prof, int category,
                       std::mt19937_64& rng) {
  std::normal_distribution<double> jitter(0.0, 0.03);
  return std::clamp(prof.pref_level[static_cast<size_t>(category)] + jitter(rng),
                    0.01, 0.99);
}

InteractionRecord make_event(const SyntheticConfig& cfg, const Catalog& cat,
                             const UserProfile& prof, int category,
                             int time_span, std::mt19937_64& rng) {
  static const char* kDomains[3] = {"feed", "search", "live"};
  const int g = draw_goods(cfg, prof, category, rng);
  std::uniform_int_distribution<int> dom(0, 2);
  InteractionRecord r;
  r.goods_id = goods_token(category, g);
  r.author_id = author_token(category, goods_author(cfg, g));
  r.source_domain = kDomains[dom(rng)];
  r.action = "buy";
  r.brand = brand_token(category, goods_brand(cfg, g));
  r.category = cat_token(category);
  r.time_span = time_span;
  r.price = draw_price(cat, category, draw_price_frac(prof, category, rng));
  r.payment_amount = r.price;
  return r;
}

std::vector<int> due_categories(const UserProfile& prof, int step) {
  std::vector<int> due;
  for (const auto& p : prof.planted) {
    if ((step - p.phase) % p.period == 0) due.push_back(p.category);
  }
  return due;
}

std::vector<InteractionRecord> window_before(const BehaviorSequence& stream,
                                             int t, int seq_len) {
  const int begin = std::max(0, t - seq_len);
  return {stream.records.begin() + begin, stream.records.begin() + t};
}

// Target goods of the given category that does not appear in the window.
// in_pref_pool selects whether the goods must come from the user's
// preferred (brand, author) pool or must avoid it; either constraint is
// relaxed when no unused goods satisfies it.
int pick_unused_goods(const SyntheticConfig& cfg, const UserProfile& prof,
                      const std::vector<InteractionRecord>& window,
                      int category, bool in_pref_pool, std::mt19937_64& rng) {
  std::vector<bool> used(static_cast<size_t>(cfg.goods_per_category), false);
  const std::string prefix = "g" + std::to_string(category) + "_";
  for (const auto& r : window) {
    if (r.goods_id.rfind(prefix, 0) == 0) {
      const int g = std::stoi(r.goods_id.substr(prefix.size()));
      used[static_cast<size_t>(g)] = true;
    }
  }
  std::vector<int> unused, matching;
  for (int g = 0; g < cfg.goods_per_category; ++g) {
    if (used[static_cast<size_t>(g)]) continue;
    unused.push_back(g);
    const bool preferred =
        goods_brand(cfg, g) == prof.pref_brand[static_cast<size_t>(category)] &&
        goods_author(cfg, g) == prof.pref_author[static_cast<size_t>(category)];
    if (preferred == in_pref_pool) matching.push_back(g);
  }
  if (unused.empty()) {
    throw std::runtime_error("synthetic: goods pool exhausted for a window");
  }
  const std::vector<int>& pool = matching.empty() ? unused : matching;
  std::uniform_int_distribution<int> pick(0, static_cast<int>(pool.size()) - 1);
  return pool[static_cast<size_t>(pick(rng))];
}

}  // namespace

GenResult generate_synthetic(const SyntheticConfig& cfg) {
  const Catalog cat = make_catalog(cfg);
  GenResult out;
  out.streams.reserve(static_cast<size_t>(cfg.n_users));
  const int total_steps = cfg.seq_len + cfg.eval_steps;

  for (int u = 0; u < cfg.n_users; ++u) {
    const std::string uid = user_token(u);
    std::mt19937_64 rng(cfg.seed * 0x9e3779b97f4a7c15ull + fnv1a(uid));
    const UserProfile prof = draw_profile(cfg, cat, rng);
    out.schedules[uid] = prof.planted;

    BehaviorSequence stream;
    stream.user_id = uid;
    stream.records.reserve(static_cast<size_t>(total_steps));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::vector<int> explore_pool;
    for (int c = 0; c < cat.n_categories; ++c) {
      if (!prof.is_planted[static_cast<size_t>(c)]) explore_pool.push_back(c);
    }
    for (int t = 0; t < total_steps; ++t) {
      const std::vector<int> due = due_categories(prof, t);
      const double p_buy =
          std::min(1.0, (1.0 - cfg.exploration_rate) * promo_boost(cfg, t));
      int category;
      const double coin = u01(rng);
      if (!due.empty() && coin < p_buy) {
        std::uniform_int_distribution<int> pick(
            0, static_cast<int>(due.size()) - 1);
        category = due[static_cast<size_t>(pick(rng))];
      } else {
        std::uniform_int_distribution<int> pick(
            0, static_cast<int>(explore_pool.size()) - 1);
        category = explore_pool[static_cast<size_t>(pick(rng))];
      }
      const int time_span = t == 0 ? 0 : 1;
      stream.records.push_back(
          make_event(cfg, cat, prof, category, time_span, rng));
    }

    // Targets at every step past the first full window.
    for (int t = cfg.seq_len; t < total_steps; ++t) {
      const std::vector<int> due = due_categories(prof, t);
      Sample sample;
      sample.user_id = uid;
      sample.step = t;
      sample.window = window_before(stream, t, cfg.seq_len);

      const bool positive = u01(rng) < cfg.positive_rate && !due.empty();
      int category;
      bool preferred_attrs = true;
      if (positive) {
        std::uniform_int_distribution<int> pick(
            0, static_cast<int>(due.size()) - 1);
        category = due[static_cast<size_t>(pick(rng))];
      } else {
        const double kind = u01(rng);
        std::vector<int> not_due_planted;
        for (const auto& p : prof.planted) {
          if ((t - p.phase) % p.period != 0) not_due_planted.push_back(p.category);
        }
        if (kind < cfg.neg_explored_frac || explore_pool.empty()) {
          std::uniform_int_distribution<int> pick(
              0, static_cast<int>(explore_pool.size()) - 1);
          category = explore_pool[static_cast<size_t>(pick(rng))];
        } else if (kind < cfg.neg_explored_frac + cfg.neg_offpref_frac ||
                   not_due_planted.empty()) {
          // Off-preference attributes on any not-due category.
          std::vector<int> not_due = explore_pool;
          not_due.insert(not_due.end(), not_due_planted.begin(),
                         not_due_planted.end());
          std::uniform_int_distribution<int> pick(
              0, static_cast<int>(not_due.size()) - 1);
          category = not_due[static_cast<size_t>(pick(rng))];
          preferred_attrs = false;
        } else {
          std::uniform_int_distribution<int> pick(
              0, static_cast<int>(not_due_planted.size()) - 1);
          category = not_due_planted[static_cast<size_t>(pick(rng))];
        }
      }

      // Preferred-style targets mirror the attribute distribution of the
      // user's own events (preferred pool with the usual miss rate);
      // off-preference targets avoid the preferred pool.
      bool pool_flag = preferred_attrs;
      if (preferred_attrs) {
        std::uniform_real_distribution<double> miss(0.0, 1.0);
        if (miss(rng) >= cfg.pref_strength) pool_flag = false;
      }
      const int g =
          pick_unused_goods(cfg, prof, sample.window, category, pool_flag, rng);
      InteractionRecord target;
      target.goods_id = goods_token(category, g);
      target.brand = brand_token(category, goods_brand(cfg, g));
      target.author_id = author_token(category, goods_author(cfg, g));
      if (preferred_attrs) {
        target.price = draw_price(cat, category,
                                  draw_price_frac(prof, category, rng));
      } else {
        std::uniform_real_distribution<double> frac(0.01, 0.99);
        target.price = draw_price(cat, category, frac(rng));
      }
      target.source_domain = "feed";
      target.action = "buy";
      target.category = cat_token(category);
      target.time_span = 0;
      target.payment_amount = 0.0;
      sample.target = target;

      sample.label_purchase = positive ? 1.0 : 0.0;
      if (positive) {
        sample.label_click = 1.0;
      } else {
        const double p_click = prof.is_planted[static_cast<size_t>(category)]
                                   ? cfg.click_in_set
                                   : cfg.click_out_set;
        sample.label_click = u01(rng) < p_click ? 1.0 : 0.0;
      }
      out.samples.push_back(std::move(sample));
    }
    out.streams.push_back(std::move(stream));
  }

  for (const auto& s : out.streams) {
    for (const auto& r : s.records) out.max_price = std::max(out.max_price, r.price);
  }
  for (const auto& s : out.samples) {
    out.max_price = std::max(out.max_price, s.target.price);
  }
  return out;
}

namespace {

ordered_json record_json(const InteractionRecord& r) {
  ordered_json j;
  j["goods_id"] = r.goods_id;
  j["author_id"] = r.author_id;
  j["source_domain"] = r.source_domain;
  j["action"] = r.action;
  j["brand"] = r.brand;
  j["category"] = r.category;
  j["time_span"] = r.time_span;
  j["price"] = r.price;
  j["payment_amount"] = r.payment_amount;
  return j;
}

[[noreturn]] void field_error(const std::string& file, int line,
                              const std::string& what) {
  throw std::runtime_error(file + ":" + std::to_string(line) + ": " + what);
}

ordered_json parse_line(const std::string& file, int line_no,
                        const std::string& line) {
  try {
    return ordered_json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    field_error(file, line_no, std::string("parse error: ") + e.what());
  }
}

InteractionRecord record_from_json(const std::string& file, int line_no,
                                   const ordered_json& j) {
  static const char* kStringFields[] = {"goods_id", "author_id",
                                        "source_domain", "action", "brand",
                                        "category"};
  InteractionRecord r;
  for (const char* f : kStringFields) {
    if (!j.contains(f)) {
      field_error(file, line_no, std::string("missing field '") + f + "'");
    }
  }
  for (const char* f : {"time_span", "price", "payment_amount"}) {
    if (!j.contains(f)) {
      field_error(file, line_no, std::string("missing field '") + f + "'");
    }
  }
  r.goods_id = j.at("goods_id").get<std::string>();
  r.author_id = j.at("author_id").get<std::string>();
  r.source_domain = j.at("source_domain").get<std::string>();
  r.action = j.at("action").get<std::string>();
  r.brand = j.at("brand").get<std::string>();
  r.category = j.at("category").get<std::string>();
  r.time_span = j.at("time_span").get<int>();
  r.price = j.at("price").get<double>();
  r.payment_amount = j.at("payment_amount").get<double>();
  if (r.price < 0.0) field_error(file, line_no, "negative price");
  if (r.payment_amount < 0.0) field_error(file, line_no, "negative payment_amount");
  if (r.time_span < 0) field_error(file, line_no, "negative time_span");
  return r;
}

}  // namespace

void save_dataset(const std::string& dir, const GenResult& gen,
                  const SyntheticConfig& cfg, const std::string& config_hash) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  std::ofstream events(dir + "/events.jsonl", std::ios::trunc);
  if (!events) throw std::runtime_error("save_dataset: cannot write events");
  int64_t n_events = 0;
  for (const auto& stream : gen.streams) {
    for (size_t t = 0; t < stream.records.size(); ++t) {
      ordered_json j;
      j["user_id"] = stream.user_id;
      j["step"] = static_cast<int>(t);
      ordered_json rec = record_json(stream.records[t]);
      j.update(rec);
      events << j.dump() << "\n";
      ++n_events;
    }
  }

  std::ofstream targets(dir + "/targets.jsonl", std::ios::trunc);
  if (!targets) throw std::runtime_error("save_dataset: cannot write targets");
  for (const auto& s : gen.samples) {
    ordered_json j;
    j["user_id"] = s.user_id;
    j["step"] = s.step;
    ordered_json rec = record_json(s.target);
    j.update(rec);
    j["click"] = s.label_click > 0.5 ? 1 : 0;
    j["purchase"] = s.label_purchase > 0.5 ? 1 : 0;
    targets << j.dump() << "\n";
  }

  // Vocabularies: first-occurrence order over events, then targets.
  Vocabulary goods, author, domain, action, brand, category;
  auto absorb = [&](const InteractionRecord& r) {
    goods.add(r.goods_id);
    author.add(r.author_id);
    domain.add(r.source_domain);
    action.add(r.action);
    brand.add(r.brand);
    category.add(r.category);
  };
  for (const auto& stream : gen.streams) {
    for (const auto& r : stream.records) absorb(r);
  }
  for (const auto& s : gen.samples) absorb(s.target);
  goods.save(dir + "/vocab_goods_id.txt");
  author.save(dir + "/vocab_author_id.txt");
  domain.save(dir + "/vocab_source_domain.txt");
  action.save(dir + "/vocab_action.txt");
  brand.save(dir + "/vocab_brand.txt");
  category.save(dir + "/vocab_category.txt");

  ordered_json manifest;
  manifest["format_version"] = 1;
  manifest["seed"] = cfg.seed;
  manifest["config_hash"] = config_hash;
  manifest["n_users"] = cfg.n_users;
  manifest["seq_len"] = cfg.seq_len;
  manifest["eval_steps"] = cfg.eval_steps;
  manifest["max_price"] = gen.max_price;
  manifest["n_events"] = n_events;
  manifest["n_targets"] = static_cast<int64_t>(gen.samples.size());
  std::ofstream mf(dir + "/manifest.json", std::ios::trunc);
  if (!mf) throw std::runtime_error("save_dataset: cannot write manifest");
  mf << manifest.dump(2) << "\n";
}

std::vector<BehaviorSequence> load_events_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load: cannot open " + path);
  std::map<std::string, std::vector<std::pair<int, InteractionRecord>>> by_user;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json j = parse_line(path, line_no, line);
    if (!j.contains("user_id")) field_error(path, line_no, "missing field 'user_id'");
    if (!j.contains("step")) field_error(path, line_no, "missing field 'step'");
    by_user[j.at("user_id").get<std::string>()].emplace_back(
        j.at("step").get<int>(), record_from_json(path, line_no, j));
  }
  std::vector<BehaviorSequence> streams;
  streams.reserve(by_user.size());
  for (auto& [uid, recs] : by_user) {
    std::stable_sort(recs.begin(), recs.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    BehaviorSequence s;
    s.user_id = uid;
    s.records.reserve(recs.size());
    for (auto& [step, r] : recs) s.records.push_back(std::move(r));
    streams.push_back(std::move(s));
  }
  return streams;
}

Dataset load_targets_jsonl(const std::string& path,
                           const std::vector<BehaviorSequence>& streams,
                           int seq_len) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load: cannot open " + path);
  std::map<std::string, const BehaviorSequence*> by_user;
  for (const auto& s : streams) by_user[s.user_id] = &s;
  Dataset samples;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json j = parse_line(path, line_no, line);
    for (const char* f : {"user_id", "step", "click", "purchase"}) {
      if (!j.contains(f)) {
        field_error(path, line_no, std::string("missing field '") + f + "'");
      }
    }
    Sample s;
    s.user_id = j.at("user_id").get<std::string>();
    s.step = j.at("step").get<int>();
    s.target = record_from_json(path, line_no, j);
    s.label_click = j.at("click").get<double>();
    s.label_purchase = j.at("purchase").get<double>();
    auto it = by_user.find(s.user_id);
    if (it == by_user.end()) {
      field_error(path, line_no, "unknown user_id '" + s.user_id + "'");
    }
    if (s.step < 1 || s.step > static_cast<int>(it->second->records.size())) {
      field_error(path, line_no, "step outside the user's event stream");
    }
    s.window = {it->second->records.begin() + std::max(0, s.step - seq_len),
                it->second->records.begin() + s.step};
    samples.push_back(std::move(s));
  }
  return samples;
}

LoadedData load_dataset(const std::string& dir) {
  std::ifstream mf(dir + "/manifest.json");
  if (!mf) throw std::runtime_error("load: cannot open " + dir + "/manifest.json");
  ordered_json manifest = ordered_json::parse(mf);
  LoadedData out;
  out.manifest.format_version = manifest.at("format_version").get<int>();
  if (out.manifest.format_version != 1) {
    throw std::runtime_error("load: unsupported dataset format version");
  }
  out.manifest.seed = manifest.at("seed").get<uint64_t>();
  out.manifest.config_hash = manifest.at("config_hash").get<std::string>();
  out.manifest.n_users = manifest.at("n_users").get<int>();
  out.manifest.seq_len = manifest.at("seq_len").get<int>();
  out.manifest.eval_steps = manifest.at("eval_steps").get<int>();
  out.manifest.max_price = manifest.at("max_price").get<double>();
  out.manifest.n_events = manifest.at("n_events").get<int64_t>();
  out.manifest.n_targets = manifest.at("n_targets").get<int64_t>();

  out.streams = load_events_jsonl(dir + "/events.jsonl");
  out.samples =
      load_targets_jsonl(dir + "/targets.jsonl", out.streams, out.manifest.seq_len);

  out.indexer.goods = Vocabulary::load(dir + "/vocab_goods_id.txt");
  out.indexer.author = Vocabulary::load(dir + "/vocab_author_id.txt");
  out.indexer.domain = Vocabulary::load(dir + "/vocab_source_domain.txt");
  out.indexer.action = Vocabulary::load(dir + "/vocab_action.txt");
  out.indexer.brand = Vocabulary::load(dir + "/vocab_brand.txt");
  out.indexer.category = Vocabulary::load(dir + "/vocab_category.txt");
  out.indexer.price = PriceBucketizer(std::max(1.0, out.manifest.max_price));
  return out;
}

LoadedData dataset_from(GenResult gen, const SyntheticConfig& cfg) {
  LoadedData out;
  auto absorb = [&](const InteractionRecord& r) {
    out.indexer.goods.add(r.goods_id);
    out.indexer.author.add(r.author_id);
    out.indexer.domain.add(r.source_domain);
    out.indexer.action.add(r.action);
    out.indexer.brand.add(r.brand);
    out.indexer.category.add(r.category);
  };
  for (const auto& stream : gen.streams) {
    for (const auto& r : stream.records) absorb(r);
  }
  for (const auto& s : gen.samples) absorb(s.target);
  out.indexer.price = PriceBucketizer(std::max(1.0, gen.max_price));
  out.manifest.seed = cfg.seed;
  out.manifest.n_users = cfg.n_users;
  out.manifest.seq_len = cfg.seq_len;
  out.manifest.eval_steps = cfg.eval_steps;
  out.manifest.max_price = gen.max_price;
  out.manifest.n_targets = static_cast<int64_t>(gen.samples.size());
  for (const auto& stream : gen.streams) {
    out.manifest.n_events += static_cast<int64_t>(stream.records.size());
  }
  out.streams = std::move(gen.streams);
  out.samples = std::move(gen.samples);
  return out;
}

std::pair<Dataset, Dataset> split_temporal(Dataset dataset, int cutoff_step) {
  if (!dataset.empty()) {
    int min_step = dataset.front().step, max_step = dataset.front().step;
    for (const auto& s : dataset) {
      min_step = std::min(min_step, s.step);
      max_step = std::max(max_step, s.step);
    }
    if (cutoff_step < min_step - 1 || cutoff_step > max_step) {
      throw std::invalid_argument("split_temporal: cutoff out of range");
    }
  }
  auto mid = std::stable_partition(
      dataset.begin(), dataset.end(),
      [cutoff_step](const Sample& s) { return s.step <= cutoff_step; });
  Dataset train(std::make_move_iterator(dataset.begin()),
                std::make_move_iterator(mid));
  Dataset test(std::make_move_iterator(mid), std::make_move_iterator(dataset.end()));
  return {std::move(train), std::move(test)};
}

}  // namespace fim
