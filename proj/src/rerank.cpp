#include "lmrank/rerank.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "lmrank/parallel.hpp"

namespace lmrank {

namespace {

const std::array<std::string, 3> kOrderNames = {"kreciprocal_then_tags", "tags_only",
                                                "kreciprocal_only"};

// Sparse encoding of one neighborhood row: (joint index, weight), ascending.
using SparseRow = std::vector<std::pair<std::uint32_t, double>>;

EmbeddingMatrix concat(const EmbeddingMatrix& a, const EmbeddingMatrix& b) {
    std::vector<std::string> ids;
    ids.reserve(a.rows() + b.rows());
    ids.insert(ids.end(), a.ids().begin(), a.ids().end());
    ids.insert(ids.end(), b.ids().begin(), b.ids().end());
    std::vector<float> data;
    data.reserve(a.data().size() + b.data().size());
    data.insert(data.end(), a.data().begin(), a.data().end());
    data.insert(data.end(), b.data().begin(), b.data().end());
    return EmbeddingMatrix(a.dim(), std::move(ids), std::move(data));
}

const ImageRecord& train_record(const Catalog& catalog, const std::string& image_id) {
    const ImageRecord& r = catalog.require(image_id);
    if (r.split != Split::Train) {
        throw std::invalid_argument("image '" + image_id + "' is not in the train split");
    }
    return r;
}

}  // namespace

PipelineOrder pipeline_order_from_string(const std::string& s) {
    for (std::size_t i = 0; i < kOrderNames.size(); ++i) {
        if (kOrderNames[i] == s) {
            return static_cast<PipelineOrder>(i);
        }
    }
    throw std::invalid_argument("unknown pipeline order '" + s +
                                "' (expected kreciprocal_then_tags, tags_only or "
                                "kreciprocal_only)");
}

const std::string& to_string(PipelineOrder order) {
    return kOrderNames[static_cast<std::size_t>(order)];
}

void validate(const RerankConfig& cfg) {
    if (cfg.k_tag == 0) {
        throw std::invalid_argument("k_tag must be at least 1");
    }
    if (cfg.alpha < 0.0 || cfg.beta < 0.0) {
        throw std::invalid_argument("alpha and beta must be non-negative");
    }
    if (cfg.k1 == 0 || cfg.k2 == 0) {
        throw std::invalid_argument("k1 and k2 must be at least 1");
    }
    if (cfg.k2 > cfg.k1) {
        throw std::invalid_argument("k2 must not exceed k1");
    }
    if (cfg.lambda < 0.0 || cfg.lambda > 1.0) {
        throw std::invalid_argument("lambda must be in [0, 1]");
    }
}

QueryTags assign_query_tags(const RankedList& query_vs_train, const Catalog& catalog,
                            std::size_t k_tag) {
    if (query_vs_train.entries.empty()) {
        throw std::invalid_argument("assign_query_tags: empty ranked list for query '" +
                                    query_vs_train.query_id + "'");
    }
    if (k_tag == 0) {
        throw std::invalid_argument("k_tag must be at least 1");
    }
    QueryTags tags;
    const std::size_t take = std::min(k_tag, query_vs_train.entries.size());
    for (std::size_t i = 0; i < take; ++i) {
        const RankedEntry& entry = query_vs_train.entries[i];
        if (entry.similarity <= 0.0) {
            continue;
        }
        const ImageRecord& r = train_record(catalog, entry.index_id);
        tags.landmark_scores[*r.landmark_id] += entry.similarity;
        if (r.country) {
            tags.country_scores[*r.country] += entry.similarity;
        }
    }
    return tags;
}

IndexTags assign_index_tags(const RankedList& index_vs_train, const Catalog& catalog,
                            double min_sim) {
    if (index_vs_train.entries.empty()) {
        throw std::invalid_argument("assign_index_tags: empty ranked list for image '" +
                                    index_vs_train.query_id + "'");
    }
    const RankedEntry& top = index_vs_train.entries.front();
    IndexTags tags;
    if (top.similarity < min_sim) {
        return tags;
    }
    const ImageRecord& r = train_record(catalog, top.index_id);
    tags.landmark_tag = r.landmark_id;
    tags.country_tag = r.country;
    return tags;
}

RankedList fuse_tag_scores(const RankedList& base, const QueryTags& query_tags,
                           const std::unordered_map<std::string, IndexTags>& index_tags,
                           double alpha, double beta) {
    RankedList fused;
    fused.query_id = base.query_id;
    fused.entries.reserve(base.entries.size());
    for (const RankedEntry& entry : base.entries) {
        auto it = index_tags.find(entry.index_id);
        if (it == index_tags.end()) {
            throw std::invalid_argument("fuse_tag_scores: no index tags for id '" +
                                        entry.index_id + "'");
        }
        double landmark_score = 0.0;
        double country_score = 0.0;
        if (it->second.landmark_tag) {
            auto ls = query_tags.landmark_scores.find(*it->second.landmark_tag);
            if (ls != query_tags.landmark_scores.end()) {
                landmark_score = ls->second;
            }
        }
        if (it->second.country_tag) {
            auto cs = query_tags.country_scores.find(*it->second.country_tag);
            if (cs != query_tags.country_scores.end()) {
                country_score = cs->second;
            }
        }
        fused.entries.push_back(
            {entry.index_id, entry.similarity + alpha * landmark_score + beta * country_score});
    }
    sort_ranked(fused);
    return fused;
}

NeighborSets k_reciprocal_neighbor_sets(const SimMatrix& joint_sims, std::size_t k1,
                                        unsigned threads) {
    if (joint_sims.rows != joint_sims.cols) {
        throw std::invalid_argument("joint similarity matrix must be square");
    }
    const std::size_t n = joint_sims.rows;
    if (k1 + 1 > n) {
        throw std::invalid_argument("k1 must be smaller than the joint point count");
    }

    // Per point, the first k1+1 ranked joint indices by ascending distance.
    std::vector<std::vector<std::uint32_t>> rank(n);
    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
        std::vector<std::uint32_t> order(n);
        for (std::size_t i = begin; i < end; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                order[j] = static_cast<std::uint32_t>(j);
            }
            std::partial_sort(order.begin(), order.begin() + k1 + 1, order.end(),
                              [&](std::uint32_t x, std::uint32_t y) {
                                  const float sx = joint_sims.at(i, x);
                                  const float sy = joint_sims.at(i, y);
                                  if (sx != sy) {
                                      return sx > sy;  // larger sim = smaller distance
                                  }
                                  return x < y;
                              });
            rank[i].assign(order.begin(), order.begin() + k1 + 1);
        }
    });

    const auto in_first = [&rank](std::uint32_t member, std::uint32_t of, std::size_t count) {
        const auto& list = rank[of];
        for (std::size_t r = 0; r < count; ++r) {
            if (list[r] == member) {
                return true;
            }
        }
        return false;
    };
    // Reciprocal set with neighborhood size `count` (= k+1 ranked entries).
    const auto reciprocal_with = [&](std::uint32_t i, std::size_t count) {
        std::vector<std::uint32_t> set;
        for (std::size_t r = 0; r < count; ++r) {
            const std::uint32_t j = rank[i][r];
            if (in_first(static_cast<std::uint32_t>(i), j, count)) {
                set.push_back(j);
            }
        }
        return set;
    };

    NeighborSets sets;
    sets.reciprocal.resize(n);
    sets.expanded.resize(n);
    const std::size_t half_count = k1 / 2 + 1;
    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            std::vector<std::uint32_t> recip = reciprocal_with(static_cast<std::uint32_t>(i), k1 + 1);
            std::sort(recip.begin(), recip.end());
            if (recip.empty()) {
                // Only reachable when duplicates tie a point out of its own
                // neighbor list; fall back to the point itself.
                recip.push_back(static_cast<std::uint32_t>(i));
            }

            std::vector<std::uint32_t> expanded = recip;
            for (std::uint32_t candidate : recip) {
                std::vector<std::uint32_t> half = reciprocal_with(candidate, half_count);
                std::size_t overlap = 0;
                for (std::uint32_t h : half) {
                    if (std::binary_search(recip.begin(), recip.end(), h)) {
                        ++overlap;
                    }
                }
                if (3 * overlap > 2 * half.size()) {
                    expanded.insert(expanded.end(), half.begin(), half.end());
                }
            }
            std::sort(expanded.begin(), expanded.end());
            expanded.erase(std::unique(expanded.begin(), expanded.end()), expanded.end());

            sets.reciprocal[i] = std::move(recip);
            sets.expanded[i] = std::move(expanded);
        }
    });
    return sets;
}

std::vector<RankedList> k_reciprocal_rerank(const EmbeddingMatrix& queries,
                                            const EmbeddingMatrix& gallery, std::size_t k1,
                                            std::size_t k2, double lambda, unsigned threads) {
    if (queries.dim() != gallery.dim()) {
        throw std::invalid_argument("k_reciprocal_rerank: dimension mismatch");
    }
    if (k1 == 0 || k1 >= gallery.rows()) {
        throw std::invalid_argument("k1 must be in [1, gallery size)");
    }
    if (k2 == 0 || k2 > k1) {
        throw std::invalid_argument("k2 must be in [1, k1]");
    }
    if (lambda < 0.0 || lambda > 1.0) {
        throw std::invalid_argument("lambda must be in [0, 1]");
    }

    const std::size_t n_query = queries.rows();
    const std::size_t n_all = n_query + gallery.rows();
    const EmbeddingMatrix joint = concat(queries, gallery);
    const SimMatrix sims = pairwise_sim(joint, joint, kDefaultSimBudgetBytes, threads);
    const auto dist = [&sims](std::size_t i, std::size_t j) {
        return 1.0 - static_cast<double>(sims.at(i, j));
    };

    const NeighborSets sets = k_reciprocal_neighbor_sets(sims, k1, threads);

    // Gaussian-kernel encoding of each expanded neighborhood, unit mass.
    std::vector<SparseRow> encoded(n_all);
    parallel_for(n_all, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto& members = sets.expanded[i];
            SparseRow row;
            row.reserve(members.size());
            double sum = 0.0;
            for (std::uint32_t j : members) {
                const double w = std::exp(-dist(i, j));
                row.emplace_back(j, w);
                sum += w;
            }
            for (auto& [j, w] : row) {
                w /= sum;
            }
            encoded[i] = std::move(row);
        }
    });

    // Local query expansion: average the encodings of the k2 nearest points
    // (the point itself included). k2 == 1 leaves rows untouched.
    if (k2 > 1) {
        std::vector<std::vector<std::uint32_t>> rank(n_all);
        parallel_for(n_all, threads, [&](std::size_t begin, std::size_t end) {
            std::vector<std::uint32_t> order(n_all);
            for (std::size_t i = begin; i < end; ++i) {
                for (std::size_t j = 0; j < n_all; ++j) {
                    order[j] = static_cast<std::uint32_t>(j);
                }
                std::partial_sort(order.begin(), order.begin() + k2, order.end(),
                                  [&](std::uint32_t x, std::uint32_t y) {
                                      const float sx = sims.at(i, x);
                                      const float sy = sims.at(i, y);
                                      if (sx != sy) {
                                          return sx > sy;
                                      }
                                      return x < y;
                                  });
                rank[i].assign(order.begin(), order.begin() + k2);
            }
        });
        std::vector<SparseRow> expanded_rows(n_all);
        parallel_for(n_all, threads, [&](std::size_t begin, std::size_t end) {
            std::vector<double> dense(n_all);
            std::vector<std::uint32_t> touched;
            for (std::size_t i = begin; i < end; ++i) {
                touched.clear();
                for (std::uint32_t src : rank[i]) {
                    for (const auto& [j, w] : encoded[src]) {
                        if (dense[j] == 0.0) {
                            touched.push_back(j);
                        }
                        dense[j] += w;
                    }
                }
                std::sort(touched.begin(), touched.end());
                SparseRow row;
                row.reserve(touched.size());
                const double inv = 1.0 / static_cast<double>(k2);
                for (std::uint32_t j : touched) {
                    row.emplace_back(j, dense[j] * inv);
                    dense[j] = 0.0;
                }
                expanded_rows[i] = std::move(row);
            }
        });
        encoded = std::move(expanded_rows);
    }

    std::vector<double> row_mass(n_all, 0.0);
    for (std::size_t i = 0; i < n_all; ++i) {
        for (const auto& [j, w] : encoded[i]) {
            row_mass[i] += w;
        }
    }

    // Jaccard distance between query and gallery encodings, then the final
    // blend with the original cosine distance.
    std::vector<RankedList> results(n_query);
    parallel_for(n_query, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t q = begin; q < end; ++q) {
            RankedList& list = results[q];
            list.query_id = queries.ids()[q];
            list.entries.reserve(gallery.rows());
            const SparseRow& qrow = encoded[q];
            for (std::size_t g = 0; g < gallery.rows(); ++g) {
                const std::size_t joint_g = n_query + g;
                const SparseRow& grow = encoded[joint_g];
                double min_mass = 0.0;
                std::size_t a = 0;
                std::size_t b = 0;
                while (a < qrow.size() && b < grow.size()) {
                    if (qrow[a].first < grow[b].first) {
                        ++a;
                    } else if (qrow[a].first > grow[b].first) {
                        ++b;
                    } else {
                        min_mass += std::min(qrow[a].second, grow[b].second);
                        ++a;
                        ++b;
                    }
                }
                const double max_mass = row_mass[q] + row_mass[joint_g] - min_mass;
                const double jaccard = max_mass > 0.0 ? 1.0 - min_mass / max_mass : 1.0;
                const double final_dist =
                    lambda * dist(q, joint_g) + (1.0 - lambda) * jaccard;
                list.entries.push_back({gallery.ids()[g], 1.0 - final_dist});
            }
            sort_ranked(list);
        }
    });
    return results;
}

std::vector<RankedList> rerank_pipeline(const EmbeddingMatrix& queries,
                                        const EmbeddingMatrix& index,
                                        const EmbeddingMatrix& train, const Catalog& catalog,
                                        const RerankConfig& cfg, unsigned threads) {
    validate(cfg);
    if (queries.dim() != index.dim() || queries.dim() != train.dim()) {
        throw std::invalid_argument("rerank_pipeline: matrices must share one dimension");
    }
    if (cfg.order != PipelineOrder::KReciprocalOnly) {
        for (const std::string& id : train.ids()) {
            train_record(catalog, id);
        }
    }
    constexpr std::size_t kFinalLength = 100;

    std::vector<RankedList> base;
    if (cfg.order == PipelineOrder::TagsOnly) {
        base = search_topk(queries, index, index.rows(), threads);
    } else {
        base = k_reciprocal_rerank(queries, index, cfg.k1, cfg.k2, cfg.lambda, threads);
    }

    if (cfg.order != PipelineOrder::KReciprocalOnly) {
        const std::vector<RankedList> query_vs_train =
            search_topk(queries, train, cfg.k_tag, threads);
        const std::vector<RankedList> index_vs_train = search_topk(index, train, 1, threads);

        std::unordered_map<std::string, IndexTags> index_tags;
        index_tags.reserve(index.rows());
        for (const RankedList& list : index_vs_train) {
            index_tags.emplace(list.query_id,
                               assign_index_tags(list, catalog, cfg.min_tag_sim));
        }

        std::vector<RankedList> fused(base.size());
        parallel_for(base.size(), threads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t q = begin; q < end; ++q) {
                const QueryTags tags = assign_query_tags(query_vs_train[q], catalog, cfg.k_tag);
                fused[q] = fuse_tag_scores(base[q], tags, index_tags, cfg.alpha, cfg.beta);
            }
        });
        base = std::move(fused);
    }

    for (RankedList& list : base) {
        if (list.entries.size() > kFinalLength) {
            list.entries.resize(kFinalLength);
        }
    }
    return base;
}

}  // namespace lmrank
