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

#ifndef FIM_MSS_H_
#define FIM_MSS_H_

#include <string>
#include <vector>

#include "fim/embeddings.h"
#include "fim/records.h"
#include "fim/tape.h"
#include "fim/tensor.h"

namespace fim {

// The four matching lenses used to retrieve relevant behaviors.
enum class ViewKey { kAuthor, kBrand, kCategory, kPrice };

enum class SearchMode { kHard, kSoft };

// Which sub-embedding feeds soft-search scoring: the view's own attribute
// plus goods id, or the full nine-attribute row.
enum class ViewAttrMode { kOwn, kAll };

enum class AttnScoring { kMlp, kDot };

const std::vector<ViewKey>& all_views();
const char* view_name(ViewKey view);
bool parse_view(const std::string& name, ViewKey* out);

// Top-K positions for one view, in increasing time order.
struct ViewSelection {
  ViewKey view = ViewKey::kAuthor;
  std::vector<int> indices;
  std::vector<double> scores;
};

// Hard relevance: 1 iff the view attribute of the item matches the target
// exactly; prices compare via their log bucket.
int score_hard(const InteractionRecord& item, const InteractionRecord& target,
               ViewKey view, const PriceBucketizer& buckets);

// Soft relevance: inner product of the two projected vectors,
// <Wb e_i, Wt e_t>. Projections are (d_in x d_proj).
double score_soft(const Tensor& e_i, const Tensor& e_t, const Tensor& wb,
                  const Tensor& wt);

// Selects the K highest-scoring valid positions. Ties break toward recency
// (the later position wins). Hard mode only admits positions with score 1,
// so it may return fewer than K. Throws when no position is valid.
ViewSelection topk_select(ViewKey view, const std::vector<double>& scores,
                          const std::vector<bool>& valid, int k,
                          SearchMode mode);

// Scoring MLP for target attention: a 2-layer ReLU net over [q, k, q*k]
// per key. A constant output bias would cancel in the softmax, so the
// second layer has none.
struct AttentionParams {
  Tape::Id w1 = -1;  // (3D x H)
  Tape::Id b1 = -1;  // (H)
  Tape::Id w2 = -1;  // (H)
};

// Softmax-weighted pooling of the selected rows with the target embedding
// as query. keys is (K x D); the result is a D-vector inside the convex
// hull of the keys.
Tape::Id target_attention(Tape& tape, Tape::Id query, Tape::Id keys,
                          AttnScoring scoring, const AttentionParams& params);

}  // namespace fim

#endif  // FIM_MSS_H_
