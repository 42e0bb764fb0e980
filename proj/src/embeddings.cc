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

#include "fim/embeddings.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace fim {

uint64_t fnv1a(std::string_view s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

Vocabulary::Vocabulary() { add("<pad>"); }

int Vocabulary::add(const std::string& token) {
  auto it = index_.find(token);
  if (it != index_.end()) return it->second;
  const int id = static_cast<int>(tokens_.size());
  tokens_.push_back(token);
  index_[token] = id;
  return id;
}

int Vocabulary::lookup(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? 0 : it->second;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("vocabulary: cannot open " + path);
  for (const auto& tok : tokens_) out << tok << "\n";
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("vocabulary: cannot open " + path);
  Vocabulary vocab;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    if (line_no == 0) {
      // Line 0 is the reserved OOV/PAD token, already present.
      ++line_no;
      continue;
    }
    vocab.add(line);
    ++line_no;
  }
  return vocab;
}

PriceBucketizer::PriceBucketizer(double max_price, int n_buckets)
    : max_price_(max_price), n_buckets_(n_buckets) {
  if (max_price <= 0.0) {
    throw std::invalid_argument("price buckets: max_price must be positive");
  }
  if (n_buckets < 2) {
    throw std::invalid_argument("price buckets: need at least 2 buckets");
  }
  // Log-spaced thresholds spanning three decades below max_price. The top
  // threshold equals max_price, so max_price itself lands in the last bucket.
  edges_.resize(static_cast<size_t>(n_buckets - 1));
  const double decades = 3.0;
  for (int k = 1; k < n_buckets; ++k) {
    const double frac =
        static_cast<double>(n_buckets - 1 - k) / (n_buckets - 1);
    edges_[static_cast<size_t>(k - 1)] =
        max_price * std::pow(10.0, -decades * frac);
  }
}

int PriceBucketizer::bucket(double price) const {
  if (price < 0.0) {
    throw std::invalid_argument("price buckets: negative price");
  }
  int b = 0;
  for (double e : edges_) {
    if (e <= price) ++b;
  }
  return b;
}

std::array<int, kNumAttributes> AttributeIndexer::indices(
    const InteractionRecord& r) const {
  if (r.price < 0.0 || r.payment_amount < 0.0) {
    throw std::invalid_argument("record: negative price or payment");
  }
  if (r.time_span < 0) {
    throw std::invalid_argument("record: negative time_span");
  }
  return {goods.lookup(r.goods_id),
          author.lookup(r.author_id),
          domain.lookup(r.source_domain),
          action.lookup(r.action),
          brand.lookup(r.brand),
          category.lookup(r.category),
          std::min(r.time_span, kTimeSpanBuckets - 1),
          price.bucket(r.price),
          price.bucket(r.payment_amount)};
}

int AttributeIndexer::table_rows(int attribute) const {
  switch (attribute) {
    case 0: return goods.size();
    case 1: return author.size();
    case 2: return domain.size();
    case 3: return action.size();
    case 4: return brand.size();
    case 5: return category.size();
    case 6: return kTimeSpanBuckets;
    case 7: return price.n_buckets();
    case 8: return price.n_buckets();
    default: throw std::invalid_argument("indexer: bad attribute index");
  }
}

Tape::Id embed_sequence(Tape& tape,
                        const std::array<Tape::Id, kNumAttributes>& tables,
                        const AttributeIndexer& indexer,
                        const std::vector<InteractionRecord>& records) {
  if (records.empty()) {
    throw std::invalid_argument("embed_sequence: empty sequence");
  }
  for (Tape::Id table : tables) {
    if (table < 0) throw std::invalid_argument("embed_sequence: missing table");
  }
  std::vector<std::array<int, kNumAttributes>> idx;
  idx.reserve(records.size());
  for (const auto& r : records) idx.push_back(indexer.indices(r));
  std::vector<Tape::Id> parts;
  parts.reserve(kNumAttributes);
  std::vector<int> rows(records.size());
  for (int a = 0; a < kNumAttributes; ++a) {
    for (size_t i = 0; i < idx.size(); ++i) rows[i] = idx[i][static_cast<size_t>(a)];
    parts.push_back(tape.select_rows(tables[static_cast<size_t>(a)], rows));
  }
  return tape.concat_cols(parts);
}

Tape::Id embed_record(Tape& tape,
                      const std::array<Tape::Id, kNumAttributes>& tables,
                      const AttributeIndexer& indexer,
                      const InteractionRecord& record) {
  const auto idx = indexer.indices(record);
  std::vector<Tape::Id> parts;
  parts.reserve(kNumAttributes);
  for (int a = 0; a < kNumAttributes; ++a) {
    Tape::Id row = tape.select_rows(tables[static_cast<size_t>(a)],
                                    {idx[static_cast<size_t>(a)]});
    parts.push_back(tape.mean_rows(row, {true}));
  }
  return tape.concat(parts);
}

Tape::Id embed_side_info(Tape& tape, const std::vector<SideSlice>& slices) {
  if (slices.empty()) {
    throw std::invalid_argument("embed_side_info: no slices");
  }
  std::vector<Tape::Id> parts;
  parts.reserve(slices.size());
  for (const auto& s : slices) {
    Tape::Id row = tape.select_rows(s.table, {s.row});
    Tape::Id vec = tape.mean_rows(row, {true});
    parts.push_back(s.grad_flows ? vec : tape.stop_gradient(vec));
  }
  return tape.concat(parts);
}

int pay_len_bucket(int purchase_count, int n_buckets) {
  if (purchase_count < 0) {
    throw std::invalid_argument("pay_len_bucket: negative count");
  }
  return std::min(purchase_count, n_buckets - 1);
}

int user_age_bucket(const std::string& user_id, int n_buckets) {
  return static_cast<int>(fnv1a(user_id) % static_cast<uint64_t>(n_buckets));
}

int user_gender_bucket(const std::string& user_id, int n_buckets) {
  return static_cast<int>((fnv1a(user_id) >> 17) %
                          static_cast<uint64_t>(n_buckets));
}

}  // namespace fim
