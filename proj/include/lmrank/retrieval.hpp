#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lmrank/embeddings.hpp"

namespace lmrank {

struct RankedEntry {
    std::string index_id;
    double similarity = 0.0;

    bool operator==(const RankedEntry&) const = default;
};

// Ordered retrieval result for one query: similarity non-increasing, ties
// broken by ascending index_id, no duplicate ids.
struct RankedList {
    std::string query_id;
    std::vector<RankedEntry> entries;

    bool operator==(const RankedList&) const = default;
};

// Sorts entries in place under the standard order (similarity descending,
// index_id ascending on ties).
void sort_ranked(RankedList& list);

inline constexpr std::size_t kDefaultSimBudgetBytes = std::size_t{4} << 30;

struct SimMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<float> values;  // row-major

    float at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

// Dense cosine similarities <a_i, b_j>, accumulated in float64 and stored as
// float32. Requires rows*cols*4 bytes; refuses to allocate past max_bytes.
SimMatrix pairwise_sim(const EmbeddingMatrix& a, const EmbeddingMatrix& b,
                       std::size_t max_bytes = kDefaultSimBudgetBytes, unsigned threads = 1);

// Exact top-k by dot product over row-normalized matrices. k is clamped to
// the index size. Similarities are the same float32 values pairwise_sim
// produces, so the two orderings always agree.
std::vector<RankedList> search_topk(const EmbeddingMatrix& queries, const EmbeddingMatrix& index,
                                    std::size_t k, unsigned threads = 1);

}  // namespace lmrank
