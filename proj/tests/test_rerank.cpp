#include "doctest.h"

#include "lmrank/rerank.hpp"

#include <algorithm>

#include "helpers.hpp"

using namespace lmrank;
using lmtest::record;

namespace {

// train images t_a0, t_a1 (landmark 1, FR), t_b0 (landmark 2, JP),
// t_c0 (landmark 3, unmapped country)
Catalog tag_catalog() {
    std::vector<ImageRecord> records = {
        record("t_a0", Split::Train, 1, "FR", Continent::Europe),
        record("t_a1", Split::Train, 1, "FR", Continent::Europe),
        record("t_b0", Split::Train, 2, "JP", Continent::Asia),
        record("t_c0", Split::Train, 3),
    };
    return Catalog(std::move(records), {{1, "FR"}, {2, "JP"}},
                   {{"FR", Continent::Europe}, {"JP", Continent::Asia}});
}

RankedList ranked(std::string query, std::vector<std::pair<std::string, double>> entries) {
    RankedList list;
    list.query_id = std::move(query);
    for (auto& [id, sim] : entries) {
        list.entries.push_back({id, sim});
    }
    return list;
}

}  // namespace

TEST_CASE("assign_query_tags accumulates similarity per tag") {
    const Catalog catalog = tag_catalog();
    const RankedList list =
        ranked("q", {{"t_a0", 0.9}, {"t_a1", 0.8}, {"t_b0", 0.7}});
    const QueryTags tags = assign_query_tags(list, catalog, 3);

    REQUIRE(tags.landmark_scores.size() == 2);
    CHECK(tags.landmark_scores.at(1) == 0.9 + 0.8);
    CHECK(tags.landmark_scores.at(2) == 0.7);
    REQUIRE(tags.country_scores.size() == 2);
    CHECK(tags.country_scores.at("FR") == 0.9 + 0.8);
    CHECK(tags.country_scores.at("JP") == 0.7);
}

TEST_CASE("assign_query_tags with one shared landmark degenerates to the sum") {
    const Catalog catalog = tag_catalog();
    const RankedList list = ranked("q", {{"t_a0", 0.6}, {"t_a1", 0.5}});
    const QueryTags tags = assign_query_tags(list, catalog, 5);
    REQUIRE(tags.landmark_scores.size() == 1);
    CHECK(tags.landmark_scores.at(1) == 0.6 + 0.5);
}

TEST_CASE("assign_query_tags looks at only the top k_tag entries") {
    const Catalog catalog = tag_catalog();
    const RankedList list =
        ranked("q", {{"t_a0", 0.9}, {"t_a1", 0.8}, {"t_b0", 0.7}});
    const QueryTags tags = assign_query_tags(list, catalog, 2);
    CHECK(tags.landmark_scores.size() == 1);
    CHECK(tags.landmark_scores.count(2) == 0);
}

TEST_CASE("assign_query_tags drops non-positive similarities") {
    const Catalog catalog = tag_catalog();
    const RankedList list =
        ranked("q", {{"t_a0", 0.9}, {"t_b0", 0.0}, {"t_c0", -0.4}});
    const QueryTags tags = assign_query_tags(list, catalog, 3);
    CHECK(tags.landmark_scores.size() == 1);
    for (const auto& [landmark, score] : tags.landmark_scores) {
        CHECK(score > 0.0);
    }
}

TEST_CASE("assign_query_tags skips countries for unmapped landmarks") {
    const Catalog catalog = tag_catalog();
    const QueryTags tags = assign_query_tags(ranked("q", {{"t_c0", 0.5}}), catalog, 3);
    CHECK(tags.landmark_scores.at(3) == 0.5);
    CHECK(tags.country_scores.empty());
}

TEST_CASE("assign_query_tags rejects empty lists and non-train images") {
    const Catalog catalog = tag_catalog();
    CHECK_THROWS_AS(assign_query_tags(ranked("q", {}), catalog, 3), std::invalid_argument);
    CHECK_THROWS_AS(assign_query_tags(ranked("q", {{"missing", 0.5}}), catalog, 3),
                    std::runtime_error);
}

TEST_CASE("assign_index_tags copies the rank-1 train tags") {
    const Catalog catalog = tag_catalog();
    const IndexTags tags =
        assign_index_tags(ranked("i", {{"t_b0", 0.8}, {"t_a0", 0.7}}), catalog);
    CHECK(tags.landmark_tag == 2);
    CHECK(tags.country_tag == "JP");
}

TEST_CASE("assign_index_tags tags even at tiny similarity by default") {
    const Catalog catalog = tag_catalog();
    const IndexTags tags = assign_index_tags(ranked("i", {{"t_a0", 0.05}}), catalog);
    CHECK(tags.landmark_tag == 1);

    const IndexTags filtered =
        assign_index_tags(ranked("i", {{"t_a0", 0.05}}), catalog, 0.1);
    CHECK_FALSE(filtered.landmark_tag.has_value());
    CHECK_FALSE(filtered.country_tag.has_value());
}

TEST_CASE("assign_index_tags carries no country for unmapped landmarks") {
    const Catalog catalog = tag_catalog();
    const IndexTags tags = assign_index_tags(ranked("i", {{"t_c0", 0.9}}), catalog);
    CHECK(tags.landmark_tag == 3);
    CHECK_FALSE(tags.country_tag.has_value());
}

TEST_CASE("fuse_tag_scores applies sim + alpha*L + beta*C") {
    QueryTags q;
    q.landmark_scores = {{1, 1.7}};
    q.country_scores = {{"FR", 0.7}};
    std::unordered_map<std::string, IndexTags> index_tags;
    index_tags["i0"] = {1, "FR"};
    index_tags["i1"] = {2, "FR"};  // landmark absent from the query list
    index_tags["i2"] = {};         // untagged

    const RankedList base = ranked("q", {{"i0", 0.5}, {"i1", 0.5}, {"i2", 0.9}});
    const RankedList fused = fuse_tag_scores(base, q, index_tags, 0.5, 0.1);

    REQUIRE(fused.entries.size() == 3);
    CHECK(fused.entries[0].index_id == "i0");
    CHECK(fused.entries[0].similarity == 0.5 + 0.5 * 1.7 + 0.1 * 0.7);
    CHECK(fused.entries[1].index_id == "i2");
    CHECK(fused.entries[1].similarity == 0.9);
    CHECK(fused.entries[2].index_id == "i1");
    CHECK(fused.entries[2].similarity == 0.5 + 0.1 * 0.7);
}

TEST_CASE("fuse_tag_scores with zero weights preserves the permutation") {
    Rng rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng.next_below(60);
        RankedList base;
        base.query_id = "q";
        std::unordered_map<std::string, IndexTags> index_tags;
        QueryTags q;
        q.landmark_scores[1] = 2.0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::string id = "i" + std::to_string(i);
            base.entries.push_back({id, rng.next_double()});
            index_tags[id] = {1, std::nullopt};
        }
        sort_ranked(base);
        const RankedList fused = fuse_tag_scores(base, q, index_tags, 0.0, 0.0);
        CHECK(fused == base);
    }
}

TEST_CASE("fuse_tag_scores is invariant to input entry order") {
    QueryTags q;
    q.landmark_scores = {{1, 1.0}, {2, 0.4}};
    std::unordered_map<std::string, IndexTags> index_tags;
    RankedList base;
    base.query_id = "q";
    Rng rng(5);
    for (int i = 0; i < 30; ++i) {
        const std::string id = "i" + std::to_string(i);
        base.entries.push_back({id, rng.next_double()});
        index_tags[id] = {static_cast<std::int64_t>(1 + i % 2), std::nullopt};
    }
    RankedList shuffled = base;
    rng.shuffle(shuffled.entries);
    CHECK(fuse_tag_scores(base, q, index_tags, 0.5, 0.1) ==
          fuse_tag_scores(shuffled, q, index_tags, 0.5, 0.1));
}

TEST_CASE("fuse_tag_scores requires tags for every listed id") {
    QueryTags q;
    std::unordered_map<std::string, IndexTags> index_tags;
    CHECK_THROWS_WITH_AS(
        fuse_tag_scores(ranked("q", {{"i0", 0.5}}), q, index_tags, 0.5, 0.1),
        doctest::Contains("no index tags"), std::invalid_argument);
}

TEST_CASE("query tag scores stay bounded by k_tag for unit similarities") {
    const Catalog catalog = tag_catalog();
    const RankedList list = ranked(
        "q", {{"t_a0", 1.0}, {"t_a1", 1.0}, {"t_b0", 1.0}, {"t_c0", 1.0}});
    const std::size_t k_tag = 4;
    const QueryTags tags = assign_query_tags(list, catalog, k_tag);
    for (const auto& [landmark, score] : tags.landmark_scores) {
        CHECK(score <= static_cast<double>(k_tag));
    }
}

TEST_CASE("rerank config validation") {
    RerankConfig cfg;
    validate(cfg);  // defaults are valid
    SUBCASE("k2 above k1") {
        cfg.k2 = cfg.k1 + 1;
        CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    }
    SUBCASE("negative alpha") {
        cfg.alpha = -0.1;
        CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    }
    SUBCASE("lambda out of range") {
        cfg.lambda = 1.5;
        CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    }
    SUBCASE("zero k_tag") {
        cfg.k_tag = 0;
        CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    }
}

TEST_CASE("pipeline order parsing") {
    CHECK(pipeline_order_from_string("tags_only") == PipelineOrder::TagsOnly);
    CHECK(pipeline_order_from_string("kreciprocal_then_tags") ==
          PipelineOrder::KReciprocalThenTags);
    CHECK_THROWS_AS(pipeline_order_from_string("nope"), std::invalid_argument);
    CHECK(to_string(PipelineOrder::KReciprocalOnly) == "kreciprocal_only");
}
