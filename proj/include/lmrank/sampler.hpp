#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lmrank/catalog.hpp"

namespace lmrank {

// Default continent draw probabilities for the stratified sampler. Heavily
// tilted toward Asia to counteract the geographic skew of large landmark
// corpora.
const std::map<Continent, double>& default_continent_probs();

struct SamplerConfig {
    std::map<Continent, double> continent_probs = default_continent_probs();
    // Clean vs noisy stratum odds of 2:1, i.e. the 0.66/0.33 convention
    // renormalized to sum to one.
    double clean_prob = 2.0 / 3.0;
    std::size_t epoch_size = 0;  // 0 resolves to the train-split size
    std::size_t ids_per_batch = 16;   // P
    std::size_t images_per_id = 4;    // K
    std::uint64_t seed = 0;
};

struct EpochPlan {
    std::vector<std::string> image_ids;
    std::size_t batch_size = 0;  // 0: no batch structure

    bool operator==(const EpochPlan&) const = default;
};

// P*K batches: every batch holds exactly P distinct landmark ids with K
// images each. Ids owning fewer than K images are drawn with replacement,
// others without. ceil(epoch_size / (P*K)) batches are produced.
EpochPlan sample_id_uniform(const Catalog& catalog, const SamplerConfig& cfg);

// One uniform shuffle of the whole train split; every image appears exactly
// once. Head classes get proportionally more exposure.
EpochPlan sample_softmax(const Catalog& catalog, const SamplerConfig& cfg);

// Draws each of the epoch_size slots independently: continent from
// continent_probs (renormalized over non-empty continents), then the clean
// stratum with probability clean_prob (renormalized when one stratum of the
// continent is empty), then an image uniformly with replacement.
EpochPlan sample_continent_aware(const Catalog& catalog, const SamplerConfig& cfg);

// Text format: one image_id per line, blank line between batches.
void save_plan(const EpochPlan& plan, const std::string& path);
EpochPlan load_plan(const std::string& path);

}  // namespace lmrank
