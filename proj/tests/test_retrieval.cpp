#include "doctest.h"

#include "lmrank/retrieval.hpp"

#include <cmath>

#include "helpers.hpp"
#include "oracles.hpp"

using namespace lmrank;

TEST_CASE("search_topk finds an exact duplicate at rank 1") {
    const auto index = lmtest::random_unit_matrix(10, 8, 42);
    std::vector<float> qdata(index.row(3).begin(), index.row(3).end());
    const EmbeddingMatrix queries(8, {"q"}, qdata);
    const auto results = search_topk(queries, index, 3);
    REQUIRE(results.size() == 1);
    CHECK(results[0].entries[0].index_id == index.ids()[3]);
    CHECK(results[0].entries[0].similarity == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("ties break by ascending index_id") {
    const EmbeddingMatrix queries(2, {"q"}, {1.f, 0.f});
    const EmbeddingMatrix index(2, {"b", "a"}, {0.6f, 0.8f, 0.6f, -0.8f});
    const auto results = search_topk(queries, index, 2);
    CHECK(results[0].entries[0].index_id == "a");
    CHECK(results[0].entries[1].index_id == "b");
    CHECK(results[0].entries[0].similarity == results[0].entries[1].similarity);
}

TEST_CASE("search_topk equals the naive full-sort oracle") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto queries = lmtest::random_unit_matrix(50, 16, seed, 'q');
        const auto index = lmtest::random_unit_matrix(500, 16, seed + 1000, 'x');
        const auto got = search_topk(queries, index, 20);
        const auto expected = lmtest::naive_topk(queries, index, 20);
        REQUIRE(got.size() == expected.size());
        for (std::size_t q = 0; q < got.size(); ++q) {
            CHECK(got[q] == expected[q]);
        }
    }
}

TEST_CASE("search_topk is invariant under index row permutation") {
    const auto queries = lmtest::random_unit_matrix(5, 8, 7, 'q');
    const auto index = lmtest::random_unit_matrix(40, 8, 8, 'x');

    std::vector<std::string> ids(index.ids().rbegin(), index.ids().rend());
    std::vector<float> data;
    for (std::size_t i = index.rows(); i-- > 0;) {
        data.insert(data.end(), index.row(i).begin(), index.row(i).end());
    }
    const EmbeddingMatrix reversed(8, std::move(ids), std::move(data));

    const auto a = search_topk(queries, index, 10);
    const auto b = search_topk(queries, reversed, 10);
    for (std::size_t q = 0; q < a.size(); ++q) {
        CHECK(a[q] == b[q]);
    }
}

TEST_CASE("search_topk at k=N matches the argsort of a pairwise_sim row") {
    const auto queries = lmtest::random_unit_matrix(4, 8, 17, 'q');
    const auto index = lmtest::random_unit_matrix(30, 8, 18, 'x');
    const auto ranked = search_topk(queries, index, index.rows());
    const SimMatrix sims = pairwise_sim(queries, index);
    for (std::size_t q = 0; q < queries.rows(); ++q) {
        std::vector<std::uint32_t> order(index.rows());
        for (std::size_t j = 0; j < order.size(); ++j) {
            order[j] = static_cast<std::uint32_t>(j);
        }
        std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
            if (sims.at(q, a) != sims.at(q, b)) {
                return sims.at(q, a) > sims.at(q, b);
            }
            return index.ids()[a] < index.ids()[b];
        });
        REQUIRE(ranked[q].entries.size() == index.rows());
        for (std::size_t r = 0; r < order.size(); ++r) {
            CHECK(ranked[q].entries[r].index_id == index.ids()[order[r]]);
            CHECK(ranked[q].entries[r].similarity ==
                  static_cast<double>(sims.at(q, order[r])));
        }
    }
}

TEST_CASE("parallel search equals serial search") {
    const auto queries = lmtest::random_unit_matrix(33, 12, 5, 'q');
    const auto index = lmtest::random_unit_matrix(200, 12, 6, 'x');
    const auto serial = search_topk(queries, index, 25, 1);
    const auto parallel = search_topk(queries, index, 25, 8);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t q = 0; q < serial.size(); ++q) {
        CHECK(serial[q] == parallel[q]);
    }
}

TEST_CASE("search_topk argument validation") {
    const auto queries = lmtest::random_unit_matrix(2, 8, 1, 'q');
    const auto index = lmtest::random_unit_matrix(4, 6, 2, 'x');
    CHECK_THROWS_AS(search_topk(queries, index, 2), std::invalid_argument);
    const auto ok_index = lmtest::random_unit_matrix(4, 8, 2, 'x');
    CHECK_THROWS_AS(search_topk(queries, ok_index, 0), std::invalid_argument);
    // k larger than the index clamps
    CHECK(search_topk(queries, ok_index, 100)[0].entries.size() == 4);
}

TEST_CASE("pairwise_sim") {
    SUBCASE("orthonormal basis against itself is the identity") {
        const EmbeddingMatrix basis(3, {"a", "b", "c"},
                                    {1.f, 0.f, 0.f, 0.f, 1.f, 0.f, 0.f, 0.f, 1.f});
        const SimMatrix sims = pairwise_sim(basis, basis);
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = 0; j < 3; ++j) {
                CHECK(sims.at(i, j) == (i == j ? 1.f : 0.f));
            }
        }
    }
    SUBCASE("self-similarity is symmetric") {
        const auto m = lmtest::random_unit_matrix(30, 8, 9);
        const SimMatrix sims = pairwise_sim(m, m);
        for (std::size_t i = 0; i < m.rows(); ++i) {
            for (std::size_t j = 0; j < m.rows(); ++j) {
                CHECK(std::abs(sims.at(i, j) - sims.at(j, i)) < 1e-6f);
            }
        }
    }
    SUBCASE("antipodal unit vectors score -1") {
        const EmbeddingMatrix a(2, {"a"}, {1.f, 0.f});
        const EmbeddingMatrix b(2, {"b"}, {-1.f, 0.f});
        CHECK(pairwise_sim(a, b).at(0, 0) == -1.f);
    }
    SUBCASE("budget violations report sizes") {
        const auto a = lmtest::random_unit_matrix(100, 4, 1);
        CHECK_THROWS_WITH_AS(pairwise_sim(a, a, 1000), doctest::Contains("budget"),
                             std::runtime_error);
    }
    SUBCASE("dimension mismatch") {
        const auto a = lmtest::random_unit_matrix(4, 4, 1);
        const auto b = lmtest::random_unit_matrix(4, 6, 1);
        CHECK_THROWS_AS(pairwise_sim(a, b), std::invalid_argument);
    }
    SUBCASE("parallel equals serial") {
        const auto a = lmtest::random_unit_matrix(37, 8, 2);
        const auto b = lmtest::random_unit_matrix(53, 8, 3);
        CHECK(pairwise_sim(a, b, kDefaultSimBudgetBytes, 1).values ==
              pairwise_sim(a, b, kDefaultSimBudgetBytes, 7).values);
    }
}
