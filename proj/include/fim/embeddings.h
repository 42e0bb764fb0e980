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

#ifndef FIM_EMBEDDINGS_H_
#define FIM_EMBEDDINGS_H_

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fim/records.h"
#include "fim/tape.h"

namespace fim {

// Stable 64-bit FNV-1a, used for derived buckets and config hashes.
uint64_t fnv1a(std::string_view s);

// Token table with line 0 reserved for OOV/PAD. File format: one token per
// line, index = line number.
class Vocabulary {
 public:
  Vocabulary();
  int add(const std::string& token);            // inserts once, returns index
  int lookup(const std::string& token) const;   // 0 when unknown
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, int> index_;
};

// Monotone log-spaced price buckets over (0, max_price]. Intervals are
// half-open: a price equal to an upper edge lands in the next bucket.
class PriceBucketizer {
 public:
  PriceBucketizer() = default;
  PriceBucketizer(double max_price, int n_buckets = 10);
  int bucket(double price) const;  // throws on negative prices
  int n_buckets() const { return n_buckets_; }
  double max_price() const { return max_price_; }

 private:
  double max_price_ = 1.0;
  int n_buckets_ = 10;
  std::vector<double> edges_;
};

// Attribute order for the nine per-record embedding tables.
inline constexpr std::array<const char*, kNumAttributes> kAttributeNames = {
    "goods_id", "author_id",  "source_domain", "action", "brand",
    "category", "time_span",  "price",         "payment_amount"};

inline constexpr int kTimeSpanBuckets = 16;

// Maps records to per-attribute table rows. Token attributes go through
// vocabularies; time_span clamps into a fixed bucket range; price and
// payment go through the shared log-spaced bucketizer.
struct AttributeIndexer {
  Vocabulary goods;
  Vocabulary author;
  Vocabulary domain;
  Vocabulary action;
  Vocabulary brand;
  Vocabulary category;
  PriceBucketizer price;

  std::array<int, kNumAttributes> indices(const InteractionRecord& r) const;
  int table_rows(int attribute) const;  // vocabulary/bucket count
};

// Gathers and concatenates the nine attribute embeddings of every record:
// row i of the result is the concatenation for record i. `tables` holds the
// nine table nodes in kAttributeNames order. Output is N x D with
// D = 9 * d_attr.
Tape::Id embed_sequence(Tape& tape,
                        const std::array<Tape::Id, kNumAttributes>& tables,
                        const AttributeIndexer& indexer,
                        const std::vector<InteractionRecord>& records);

// Single-record variant returning a rank-1 embedding of dimension D.
Tape::Id embed_record(Tape& tape,
                      const std::array<Tape::Id, kNumAttributes>& tables,
                      const AttributeIndexer& indexer,
                      const InteractionRecord& record);

// One side-information slice: a row of a table, with a flag deciding
// whether gradient flows back into that table from this use.
struct SideSlice {
  std::string name;
  Tape::Id table = -1;
  int row = 0;
  bool grad_flows = false;
};

// Concatenation of side-info slice embeddings in the given order. Slices
// with grad_flows == false are wrapped in stop_gradient, so their forward
// values are identical across flag settings while their tables receive
// exactly zero gradient through this path.
Tape::Id embed_side_info(Tape& tape, const std::vector<SideSlice>& slices);

// Bucket for the purchase-sequence length, clamped to the final bucket.
int pay_len_bucket(int purchase_count, int n_buckets);

// Derived demographic buckets for synthetic users (stable in user_id).
int user_age_bucket(const std::string& user_id, int n_buckets);
int user_gender_bucket(const std::string& user_id, int n_buckets);

}  // namespace fim

#endif  // FIM_EMBEDDINGS_H_
