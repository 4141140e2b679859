#include "lmrank/retrieval.hpp"

#include <algorithm>
#include <stdexcept>

#include "lmrank/parallel.hpp"

namespace lmrank {

namespace {

float dot_f32(std::span<const float> a, std::span<const float> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += static_cast<double>(a[i]) * b[i];
    }
    return static_cast<float>(acc);
}

}  // namespace

void sort_ranked(RankedList& list) {
    std::sort(list.entries.begin(), list.entries.end(),
              [](const RankedEntry& a, const RankedEntry& b) {
                  if (a.similarity != b.similarity) {
                      return a.similarity > b.similarity;
                  }
                  return a.index_id < b.index_id;
              });
}

SimMatrix pairwise_sim(const EmbeddingMatrix& a, const EmbeddingMatrix& b, std::size_t max_bytes,
                       unsigned threads) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("pairwise_sim: dimension mismatch (" +
                                    std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) +
                                    ")");
    }
    const std::size_t needed = a.rows() * b.rows() * sizeof(float);
    if (needed > max_bytes) {
        throw std::runtime_error("pairwise_sim: result needs " + std::to_string(needed) +
                                 " bytes (rows_a * rows_b * 4), budget is " +
                                 std::to_string(max_bytes));
    }
    SimMatrix out;
    out.rows = a.rows();
    out.cols = b.rows();
    out.values.resize(a.rows() * b.rows());
    parallel_for(a.rows(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto ra = a.row(i);
            float* dst = out.values.data() + i * out.cols;
            for (std::size_t j = 0; j < b.rows(); ++j) {
                dst[j] = dot_f32(ra, b.row(j));
            }
        }
    });
    return out;
}

std::vector<RankedList> search_topk(const EmbeddingMatrix& queries, const EmbeddingMatrix& index,
                                    std::size_t k, unsigned threads) {
    if (queries.dim() != index.dim()) {
        throw std::invalid_argument("search_topk: dimension mismatch (" +
                                    std::to_string(queries.dim()) + " vs " +
                                    std::to_string(index.dim()) + ")");
    }
    if (k == 0) {
        throw std::invalid_argument("search_topk: k must be positive");
    }
    const std::size_t take = std::min(k, index.rows());

    std::vector<RankedList> results(queries.rows());
    parallel_for(queries.rows(), threads, [&](std::size_t begin, std::size_t end) {
        std::vector<float> sims(index.rows());
        std::vector<std::uint32_t> order(index.rows());
        for (std::size_t q = begin; q < end; ++q) {
            const auto row = queries.row(q);
            for (std::size_t j = 0; j < index.rows(); ++j) {
                sims[j] = dot_f32(row, index.row(j));
            }
            for (std::size_t j = 0; j < order.size(); ++j) {
                order[j] = static_cast<std::uint32_t>(j);
            }
            const auto better = [&](std::uint32_t x, std::uint32_t y) {
                if (sims[x] != sims[y]) {
                    return sims[x] > sims[y];
                }
                return index.ids()[x] < index.ids()[y];
            };
            if (take < order.size()) {
                std::partial_sort(order.begin(), order.begin() + take, order.end(), better);
            } else {
                std::sort(order.begin(), order.end(), better);
            }
            RankedList& list = results[q];
            list.query_id = queries.ids()[q];
            list.entries.reserve(take);
            for (std::size_t r = 0; r < take; ++r) {
                list.entries.push_back({index.ids()[order[r]], sims[order[r]]});
            }
        }
    });
    return results;
}

}  // namespace lmrank
