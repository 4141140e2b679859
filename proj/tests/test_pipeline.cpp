#include "doctest.h"

#include "lmrank/rerank.hpp"
#include "lmrank/synth.hpp"

#include "helpers.hpp"

using namespace lmrank;

namespace {

SynthDataset tiny_dataset(std::uint64_t seed = 2) {
    SynthConfig cfg;
    cfg.n_landmarks = 25;
    cfg.train_per_landmark = 6;
    cfg.index_per_landmark = 4;
    cfg.query_per_landmark = 2;
    cfg.dim = 24;
    cfg.noise_sigma = 0.35;
    cfg.noisy_fraction = 0.2;
    cfg.seed = seed;
    return generate_synthetic(cfg);
}

std::vector<std::vector<std::string>> orderings(const std::vector<RankedList>& lists) {
    std::vector<std::vector<std::string>> out;
    for (const auto& list : lists) {
        std::vector<std::string> ids;
        for (const auto& e : list.entries) {
            ids.push_back(e.index_id);
        }
        out.push_back(std::move(ids));
    }
    return out;
}

}  // namespace

TEST_CASE("kreciprocal_only with lambda=1 collapses to plain search") {
    const SynthDataset data = tiny_dataset();
    RerankConfig cfg;
    cfg.order = PipelineOrder::KReciprocalOnly;
    cfg.lambda = 1.0;
    cfg.k1 = 10;
    cfg.k2 = 3;
    const auto reranked = rerank_pipeline(data.query, data.index, data.train,
                                          data.catalog, cfg);
    const auto plain = search_topk(data.query, data.index, 100);
    CHECK(orderings(reranked) == orderings(plain));
}

TEST_CASE("tags_only with zero weights collapses to plain search") {
    const SynthDataset data = tiny_dataset();
    RerankConfig cfg;
    cfg.order = PipelineOrder::TagsOnly;
    cfg.alpha = 0.0;
    cfg.beta = 0.0;
    const auto reranked = rerank_pipeline(data.query, data.index, data.train,
                                          data.catalog, cfg);
    const auto plain = search_topk(data.query, data.index, 100);
    CHECK(orderings(reranked) == orderings(plain));
}

TEST_CASE("pipeline output is truncated to 100 entries") {
    SynthConfig big = SynthConfig{};
    big.n_landmarks = 30;
    big.train_per_landmark = 4;
    big.index_per_landmark = 5;  // 150 index images
    big.query_per_landmark = 1;
    big.dim = 16;
    big.seed = 4;
    const SynthDataset data = generate_synthetic(big);
    RerankConfig cfg;
    const auto reranked = rerank_pipeline(data.query, data.index, data.train,
                                          data.catalog, cfg);
    for (const auto& list : reranked) {
        CHECK(list.entries.size() == 100);
    }
}

TEST_CASE("pipeline is deterministic and thread-count independent") {
    const SynthDataset data = tiny_dataset();
    RerankConfig cfg;
    cfg.k1 = 12;
    cfg.k2 = 4;
    const auto once = rerank_pipeline(data.query, data.index, data.train, data.catalog, cfg, 1);
    const auto again = rerank_pipeline(data.query, data.index, data.train, data.catalog, cfg, 1);
    const auto threaded =
        rerank_pipeline(data.query, data.index, data.train, data.catalog, cfg, 8);
    CHECK(once == again);
    CHECK(once == threaded);
}

TEST_CASE("tag fusion lifts retrieval on planted-cluster data") {
    const SynthDataset data = generate_synthetic(SynthConfig{});  // 100x10/5/2, dim 64
    const auto plain = search_topk(data.query, data.index, 100);
    const double base_map = mean_ap_at_100(plain, data.ground_truth);

    RerankConfig cfg;
    cfg.order = PipelineOrder::TagsOnly;
    const auto tagged = rerank_pipeline(data.query, data.index, data.train, data.catalog, cfg);
    const double tagged_map = mean_ap_at_100(tagged, data.ground_truth);

    CHECK(tagged_map >= base_map + 0.02);
}

TEST_CASE("pipeline propagates component errors") {
    const SynthDataset data = tiny_dataset();
    RerankConfig cfg;
    cfg.k1 = 1000;  // larger than the gallery
    CHECK_THROWS_AS(
        rerank_pipeline(data.query, data.index, data.train, data.catalog, cfg),
        std::invalid_argument);

    RerankConfig bad;
    bad.k2 = bad.k1 + 1;
    CHECK_THROWS_AS(
        rerank_pipeline(data.query, data.index, data.train, data.catalog, bad),
        std::invalid_argument);
}
