#include "lmrank/sampler.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "lmrank/rng.hpp"

namespace lmrank {

namespace {

void validate_config(const SamplerConfig& cfg) {
    double sum = 0.0;
    for (const auto& [continent, p] : cfg.continent_probs) {
        if (p < 0.0) {
            throw std::invalid_argument("continent probability for " + to_string(continent) +
                                        " is negative");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("continent probabilities sum to " + std::to_string(sum) +
                                    ", expected 1.0");
    }
    if (cfg.clean_prob < 0.0 || cfg.clean_prob > 1.0) {
        throw std::invalid_argument("clean_prob must be in [0, 1]");
    }
}

std::size_t resolve_epoch_size(const SamplerConfig& cfg, const Catalog& catalog) {
    const std::size_t n = cfg.epoch_size != 0 ? cfg.epoch_size : catalog.train_size();
    if (n == 0) {
        throw std::invalid_argument("epoch_size must be positive");
    }
    return n;
}

}  // namespace

const std::map<Continent, double>& default_continent_probs() {
    static const std::map<Continent, double> kProbs = {
        {Continent::Asia, 0.5},          {Continent::Europe, 0.2},
        {Continent::Africa, 0.15},       {Continent::NorthAmerica, 0.1},
        {Continent::SouthAmerica, 0.02}, {Continent::Antarctica, 0.01},
        {Continent::Oceania, 0.01},      {Continent::Other, 0.01},
    };
    return kProbs;
}

EpochPlan sample_id_uniform(const Catalog& catalog, const SamplerConfig& cfg) {
    validate_config(cfg);
    if (cfg.ids_per_batch == 0 || cfg.images_per_id == 0) {
        throw std::invalid_argument("ids_per_batch and images_per_id must be positive");
    }
    const std::vector<std::int64_t>& landmarks = catalog.train_landmarks();
    if (landmarks.size() < cfg.ids_per_batch) {
        throw std::invalid_argument("id-uniform sampling needs at least " +
                                    std::to_string(cfg.ids_per_batch) +
                                    " distinct train landmark ids, catalog has " +
                                    std::to_string(landmarks.size()));
    }
    const std::size_t epoch_size = resolve_epoch_size(cfg, catalog);
    const std::size_t batch = cfg.ids_per_batch * cfg.images_per_id;
    const std::size_t n_batches = (epoch_size + batch - 1) / batch;

    Rng rng(cfg.seed);
    EpochPlan plan;
    plan.batch_size = batch;
    plan.image_ids.reserve(n_batches * batch);

    std::vector<std::size_t> id_order(landmarks.size());
    std::iota(id_order.begin(), id_order.end(), std::size_t{0});
    std::vector<std::uint32_t> picks;
    for (std::size_t b = 0; b < n_batches; ++b) {
        rng.shuffle_prefix(id_order, cfg.ids_per_batch);
        for (std::size_t s = 0; s < cfg.ids_per_batch; ++s) {
            const auto& rows = catalog.train_by_landmark(landmarks[id_order[s]]);
            if (rows.size() >= cfg.images_per_id) {
                picks.assign(rows.begin(), rows.end());
                rng.shuffle_prefix(picks, cfg.images_per_id);
                for (std::size_t i = 0; i < cfg.images_per_id; ++i) {
                    plan.image_ids.push_back(catalog.records()[picks[i]].image_id);
                }
            } else {
                for (std::size_t i = 0; i < cfg.images_per_id; ++i) {
                    const std::uint32_t row = rows[rng.next_below(rows.size())];
                    plan.image_ids.push_back(catalog.records()[row].image_id);
                }
            }
        }
    }
    return plan;
}

EpochPlan sample_softmax(const Catalog& catalog, const SamplerConfig& cfg) {
    validate_config(cfg);
    if (catalog.train_size() == 0) {
        throw std::invalid_argument("softmax sampling needs a non-empty train split");
    }
    EpochPlan plan;
    plan.image_ids.reserve(catalog.train_size());
    for (const ImageRecord& r : catalog.records()) {
        if (r.split == Split::Train) {
            plan.image_ids.push_back(r.image_id);
        }
    }
    Rng rng(cfg.seed);
    rng.shuffle(plan.image_ids);
    return plan;
}

EpochPlan sample_continent_aware(const Catalog& catalog, const SamplerConfig& cfg) {
    validate_config(cfg);
    const std::size_t epoch_size = resolve_epoch_size(cfg, catalog);

    // Continents with at least one train image, in enum order; their
    // configured probabilities renormalized.
    std::vector<Continent> continents;
    std::vector<double> cumulative;
    double total = 0.0;
    for (Continent c : kAllContinents) {
        const std::size_t count =
            catalog.train_stratum(c, true).size() + catalog.train_stratum(c, false).size();
        if (count == 0) {
            continue;
        }
        auto it = cfg.continent_probs.find(c);
        const double p = it == cfg.continent_probs.end() ? 0.0 : it->second;
        continents.push_back(c);
        total += p;
        cumulative.push_back(total);
    }
    if (continents.empty()) {
        throw std::invalid_argument("continent-aware sampling: train split is empty");
    }
    if (total <= 0.0) {
        throw std::invalid_argument(
            "continent-aware sampling: every populated continent has probability 0");
    }

    Rng rng(cfg.seed);
    EpochPlan plan;
    plan.image_ids.reserve(epoch_size);
    for (std::size_t slot = 0; slot < epoch_size; ++slot) {
        const double u = rng.next_double() * total;
        std::size_t pick = 0;
        while (pick + 1 < cumulative.size() && u >= cumulative[pick]) {
            ++pick;
        }
        const Continent c = continents[pick];
        const auto& clean = catalog.train_stratum(c, true);
        const auto& noisy = catalog.train_stratum(c, false);
        const std::vector<std::uint32_t>* stratum;
        if (clean.empty()) {
            stratum = &noisy;
        } else if (noisy.empty()) {
            stratum = &clean;
        } else {
            stratum = rng.next_double() < cfg.clean_prob ? &clean : &noisy;
        }
        const std::uint32_t row = (*stratum)[rng.next_below(stratum->size())];
        plan.image_ids.push_back(catalog.records()[row].image_id);
    }
    return plan;
}

void save_plan(const EpochPlan& plan, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error(path + ": cannot open for writing");
    }
    for (std::size_t i = 0; i < plan.image_ids.size(); ++i) {
        if (plan.batch_size != 0 && i != 0 && i % plan.batch_size == 0) {
            out << '\n';
        }
        out << plan.image_ids[i] << '\n';
    }
    if (!out) {
        throw std::runtime_error(path + ": write failed");
    }
}

EpochPlan load_plan(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error(path + ": cannot open file");
    }
    EpochPlan plan;
    std::string line;
    std::size_t first_batch = 0;
    bool batch_seen = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            if (!batch_seen) {
                first_batch = plan.image_ids.size();
                batch_seen = true;
            }
            continue;
        }
        plan.image_ids.push_back(line);
    }
    plan.batch_size = batch_seen ? first_batch : 0;
    return plan;
}

}  // namespace lmrank
