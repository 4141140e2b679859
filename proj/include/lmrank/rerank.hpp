#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "lmrank/catalog.hpp"
#include "lmrank/embeddings.hpp"
#include "lmrank/retrieval.hpp"

namespace lmrank {

// Tag assignment for one query: accumulated similarity mass per candidate
// landmark and country tag, taken over that query's nearest train images.
struct QueryTags {
    std::map<std::int64_t, double> landmark_scores;
    std::map<std::string, double> country_scores;
};

// Tag assignment for one index image: the single landmark/country carried
// over from its nearest train image. Empty when tagging was suppressed by a
// similarity threshold.
struct IndexTags {
    std::optional<std::int64_t> landmark_tag;
    std::optional<std::string> country_tag;
};

enum class PipelineOrder {
    KReciprocalThenTags,  // tag fusion on top of k-reciprocal similarities
    TagsOnly,
    KReciprocalOnly,
};

PipelineOrder pipeline_order_from_string(const std::string& s);
const std::string& to_string(PipelineOrder order);

struct RerankConfig {
    std::size_t k_tag = 5;  // train neighbors accumulated per query tag list
    // Tag weights, swept on synthetic data: past ~0.3 the landmark bonus
    // (bounded by k_tag) starts to override the refined base similarities
    // instead of correcting them.
    double alpha = 0.2;  // landmark tag weight
    double beta = 0.1;   // country tag weight
    std::size_t k1 = 20;    // k-reciprocal neighborhood
    std::size_t k2 = 6;     // local expansion neighborhood
    double lambda = 0.3;    // original-distance weight in the final blend
    PipelineOrder order = PipelineOrder::KReciprocalThenTags;
    // Minimum rank-1 similarity for an index image to receive tags at all.
    // Disabled by default: any nearest train image tags, however far.
    double min_tag_sim = -1.0;
};

void validate(const RerankConfig& cfg);

// Scores candidate tags for one query from its ranked train neighbors: each
// of the top k_tag entries adds its similarity to the scores of the landmark
// and country of that train image. Entries with non-positive similarity are
// skipped, so every kept score is positive and each map holds at most k_tag
// tags.
QueryTags assign_query_tags(const RankedList& query_vs_train, const Catalog& catalog,
                            std::size_t k_tag);

// Index images inherit the landmark and country of their rank-1 train image.
IndexTags assign_index_tags(const RankedList& index_vs_train, const Catalog& catalog,
                            double min_sim = -1.0);

// Tag-aware score fusion:
//   sim_final = sim + alpha * L_score + beta * C_score
// where L_score is the query's accumulated score for the index image's
// landmark tag (0 when the tag is absent from the query's list) and C_score
// the same for the country tag. The list is re-sorted under the standard
// order. Every listed id must be present in index_tags.
RankedList fuse_tag_scores(const RankedList& base, const QueryTags& query_tags,
                           const std::unordered_map<std::string, IndexTags>& index_tags,
                           double alpha, double beta);

// K-reciprocal and expanded neighbor sets over the joint query+gallery point
// set, exposed so the pipeline internals can be verified set-for-set.
// joint_sims must be the square similarity matrix of the concatenated points
// against themselves; distances are 1 - sim, ties broken by ascending joint
// index. With k neighbors meaning the first k+1 ranked points (a point ranks
// in its own list), R(i,k1) keeps the neighbors whose own k1-lists contain i
// back, and the expansion adds a candidate c's half-k1 reciprocal set when
// more than 2/3 of it already lies in R(i,k1).
struct NeighborSets {
    std::vector<std::vector<std::uint32_t>> reciprocal;  // R(i,k1), ascending index
    std::vector<std::vector<std::uint32_t>> expanded;    // R*(i,k1), ascending index
};

NeighborSets k_reciprocal_neighbor_sets(const SimMatrix& joint_sims, std::size_t k1,
                                        unsigned threads = 1);

// Full k-reciprocal re-ranking of every query against the gallery:
// reciprocal neighbor sets as above, rows encoded as Gaussian weights
// exp(-d) normalized to unit mass, local query expansion averaging the k2
// nearest rows, Jaccard distance between encodings, and the final blend
//   d* = lambda * d_original + (1 - lambda) * d_J.
// Returned lists cover the whole gallery, ordered by ascending d* (stored
// similarity is 1 - d*), ties by ascending gallery id.
std::vector<RankedList> k_reciprocal_rerank(const EmbeddingMatrix& queries,
                                            const EmbeddingMatrix& gallery, std::size_t k1,
                                            std::size_t k2, double lambda, unsigned threads = 1);

// End-to-end re-ranking: base similarities per cfg.order (raw cosine or
// k-reciprocal refined), tag assignment from train-set searches, tag-score
// fusion, and truncation to the top 100.
std::vector<RankedList> rerank_pipeline(const EmbeddingMatrix& queries,
                                        const EmbeddingMatrix& index,
                                        const EmbeddingMatrix& train, const Catalog& catalog,
                                        const RerankConfig& cfg, unsigned threads = 1);

}  // namespace lmrank
