#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "lmrank/catalog.hpp"
#include "lmrank/embeddings.hpp"
#include "lmrank/eval.hpp"

namespace lmrank {

// Synthetic dataset with planted landmark clusters: one unit centroid per
// landmark, every image a renormalized noisy copy. A fixed fraction of train
// images per continent is flipped to a wrong landmark label (and marked
// noisy), mimicking label noise. Everything is a deterministic function of
// the seed.
struct SynthConfig {
    std::size_t n_landmarks = 100;
    std::size_t train_per_landmark = 10;
    std::size_t index_per_landmark = 5;
    std::size_t query_per_landmark = 2;
    std::size_t dim = 64;
    // Per-coordinate noise level. The noise vector norm grows like
    // sigma*sqrt(dim); past ~0.25 at dim 64 cosine ranking collapses to
    // chance, below ~0.12 it saturates at mAP 1.0. The default keeps plain
    // search in the ~0.6 mAP band where reranking effects are visible.
    double noise_sigma = 0.175;
    double noisy_fraction = 0.3;
    // Landmark counts per continent are apportioned by largest remainder, so
    // every listed continent with enough mass is guaranteed non-empty.
    // OTHER-continent landmarks are left out of the mapping file.
    std::map<Continent, double> continent_distribution;  // empty: sampler default
    std::uint64_t seed = 1;
};

struct SynthDataset {
    Catalog catalog;
    EmbeddingMatrix train;
    EmbeddingMatrix index;
    EmbeddingMatrix query;
    GroundTruth ground_truth;
};

SynthDataset generate_synthetic(const SynthConfig& cfg);

// Writes catalog.csv, mapping.csv, {train,index,query}.{emb,ids} and gt.csv
// into dir (which must exist).
void write_synthetic(const SynthDataset& data, const std::string& dir);

}  // namespace lmrank
