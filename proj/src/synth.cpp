#include "lmrank/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <tuple>

#include "lmrank/rng.hpp"
#include "lmrank/sampler.hpp"

namespace lmrank {

namespace {

std::string padded_id(char prefix, std::size_t n) {
    std::string digits = std::to_string(n);
    std::string out(1, prefix);
    out.append(digits.size() < 6 ? 6 - digits.size() : 0, '0');
    out += digits;
    return out;
}

std::string lowercase(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// Largest-remainder apportionment of n items over the distribution, so every
// continent with enough probability mass receives its share exactly.
std::map<Continent, std::size_t> apportion(const std::map<Continent, double>& dist,
                                           std::size_t n) {
    double total = 0.0;
    for (const auto& [c, p] : dist) {
        if (p < 0.0) {
            throw std::invalid_argument("continent_distribution has a negative probability");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw std::invalid_argument("continent_distribution must sum to 1.0");
    }
    std::map<Continent, std::size_t> counts;
    std::vector<std::pair<double, Continent>> remainders;
    std::size_t assigned = 0;
    for (Continent c : kAllContinents) {
        auto it = dist.find(c);
        if (it == dist.end()) {
            continue;
        }
        const double exact = it->second * static_cast<double>(n);
        const std::size_t base = static_cast<std::size_t>(exact);
        counts[c] = base;
        assigned += base;
        remainders.emplace_back(exact - static_cast<double>(base), c);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; assigned < n; ++i) {
        ++counts[remainders[i % remainders.size()].second];
        ++assigned;
    }
    return counts;
}

std::vector<float> noisy_unit_vector(Rng& rng, std::span<const double> centroid, double sigma,
                                     std::size_t dim) {
    std::vector<double> v(dim);
    double norm_sq = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
        v[d] = centroid.empty() ? rng.next_gaussian()
                                : centroid[d] + sigma * rng.next_gaussian();
        norm_sq += v[d] * v[d];
    }
    while (norm_sq == 0.0) {
        // A zero draw has probability ~0 but would break normalization.
        for (std::size_t d = 0; d < dim; ++d) {
            v[d] = rng.next_gaussian();
            norm_sq += v[d] * v[d];
        }
    }
    const double inv = 1.0 / std::sqrt(norm_sq);
    std::vector<float> out(dim);
    for (std::size_t d = 0; d < dim; ++d) {
        out[d] = static_cast<float>(v[d] * inv);
    }
    return out;
}

}  // namespace

SynthDataset generate_synthetic(const SynthConfig& cfg) {
    if (cfg.n_landmarks == 0) {
        throw std::invalid_argument("n_landmarks must be positive");
    }
    if (cfg.dim < 2) {
        throw std::invalid_argument("dim must be at least 2");
    }
    if (cfg.noise_sigma < 0.0) {
        throw std::invalid_argument("noise_sigma must be non-negative");
    }
    if (cfg.noisy_fraction < 0.0 || cfg.noisy_fraction > 1.0) {
        throw std::invalid_argument("noisy_fraction must be in [0, 1]");
    }
    if (cfg.query_per_landmark > 0 && cfg.index_per_landmark == 0) {
        throw std::invalid_argument("queries need at least one index image per landmark");
    }

    const std::map<Continent, double>& dist =
        cfg.continent_distribution.empty() ? default_continent_probs()
                                           : cfg.continent_distribution;
    const std::map<Continent, std::size_t> landmark_counts = apportion(dist, cfg.n_landmarks);

    // Landmark -> continent -> country. Three country codes per continent,
    // landmarks spread round-robin. OTHER landmarks stay unmapped.
    std::vector<Continent> landmark_continent(cfg.n_landmarks);
    std::unordered_map<std::int64_t, std::string> landmark_to_country;
    std::unordered_map<std::string, Continent> country_to_continent;
    std::size_t next_landmark = 0;
    for (Continent c : kAllContinents) {
        auto it = landmark_counts.find(c);
        if (it == landmark_counts.end()) {
            continue;
        }
        const std::size_t n_countries = std::min<std::size_t>(3, it->second);
        for (std::size_t i = 0; i < it->second; ++i, ++next_landmark) {
            landmark_continent[next_landmark] = c;
            if (c == Continent::Other) {
                continue;
            }
            const std::string country = lowercase(to_string(c)) + std::to_string(i % n_countries);
            landmark_to_country[static_cast<std::int64_t>(next_landmark)] = country;
            country_to_continent[country] = c;
        }
    }

    Rng rng(cfg.seed);

    std::vector<std::vector<double>> centroids(cfg.n_landmarks);
    for (auto& centroid : centroids) {
        const std::vector<float> unit = noisy_unit_vector(rng, {}, 0.0, cfg.dim);
        centroid.assign(unit.begin(), unit.end());
    }

    const auto make_split = [&](char prefix, std::size_t per_landmark) {
        std::vector<std::string> ids;
        std::vector<float> data;
        std::vector<std::size_t> true_landmark;
        ids.reserve(cfg.n_landmarks * per_landmark);
        data.reserve(cfg.n_landmarks * per_landmark * cfg.dim);
        for (std::size_t l = 0; l < cfg.n_landmarks; ++l) {
            for (std::size_t i = 0; i < per_landmark; ++i) {
                ids.push_back(padded_id(prefix, ids.size()));
                const std::vector<float> v =
                    noisy_unit_vector(rng, centroids[l], cfg.noise_sigma, cfg.dim);
                data.insert(data.end(), v.begin(), v.end());
                true_landmark.push_back(l);
            }
        }
        return std::tuple(std::move(ids), std::move(data), std::move(true_landmark));
    };

    auto [train_ids, train_data, train_true] = make_split('t', cfg.train_per_landmark);
    auto [index_ids, index_data, index_true] = make_split('i', cfg.index_per_landmark);
    auto [query_ids, query_data, query_true] = make_split('q', cfg.query_per_landmark);

    // Per-continent noisy quota: shuffle the continent's train images and
    // flip the first round(fraction * n) to a wrong label.
    std::vector<std::size_t> assigned_landmark(train_ids.size());
    std::vector<bool> is_noisy(train_ids.size(), false);
    for (std::size_t i = 0; i < train_ids.size(); ++i) {
        assigned_landmark[i] = train_true[i];
    }
    for (Continent c : kAllContinents) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < train_ids.size(); ++i) {
            if (landmark_continent[train_true[i]] == c) {
                members.push_back(i);
            }
        }
        const auto quota = static_cast<std::size_t>(
            std::llround(cfg.noisy_fraction * static_cast<double>(members.size())));
        if (quota == 0) {
            continue;
        }
        if (cfg.n_landmarks < 2) {
            throw std::invalid_argument("label noise needs at least 2 landmarks");
        }
        rng.shuffle_prefix(members, quota);
        for (std::size_t i = 0; i < quota; ++i) {
            const std::size_t image = members[i];
            std::size_t wrong = rng.next_below(cfg.n_landmarks - 1);
            if (wrong >= train_true[image]) {
                ++wrong;
            }
            assigned_landmark[image] = wrong;
            is_noisy[image] = true;
        }
    }

    std::vector<ImageRecord> records;
    records.reserve(train_ids.size() + index_ids.size() + query_ids.size());
    for (std::size_t i = 0; i < train_ids.size(); ++i) {
        ImageRecord r;
        r.image_id = train_ids[i];
        r.split = Split::Train;
        r.landmark_id = static_cast<std::int64_t>(assigned_landmark[i]);
        auto country = landmark_to_country.find(*r.landmark_id);
        if (country != landmark_to_country.end()) {
            r.country = country->second;
            r.continent = country_to_continent.at(country->second);
        }
        r.is_clean = !is_noisy[i];
        records.push_back(std::move(r));
    }
    for (const auto* split_ids : {&index_ids, &query_ids}) {
        for (const std::string& id : *split_ids) {
            ImageRecord r;
            r.image_id = id;
            r.split = split_ids == &index_ids ? Split::Index : Split::Query;
            records.push_back(std::move(r));
        }
    }

    GroundTruth gt;
    for (std::size_t q = 0; q < query_ids.size(); ++q) {
        std::set<std::string>& relevant = gt[query_ids[q]];
        for (std::size_t i = 0; i < index_ids.size(); ++i) {
            if (index_true[i] == query_true[q]) {
                relevant.insert(index_ids[i]);
            }
        }
    }

    SynthDataset data;
    data.catalog = Catalog(std::move(records), std::move(landmark_to_country),
                           std::move(country_to_continent));
    data.train = EmbeddingMatrix(cfg.dim, std::move(train_ids), std::move(train_data));
    data.index = EmbeddingMatrix(cfg.dim, std::move(index_ids), std::move(index_data));
    data.query = EmbeddingMatrix(cfg.dim, std::move(query_ids), std::move(query_data));
    data.ground_truth = std::move(gt);
    return data;
}

void write_synthetic(const SynthDataset& data, const std::string& dir) {
    save_catalog(data.catalog, dir + "/catalog.csv", dir + "/mapping.csv");
    save_embeddings(data.train, dir + "/train.emb", dir + "/train.ids");
    save_embeddings(data.index, dir + "/index.emb", dir + "/index.ids");
    save_embeddings(data.query, dir + "/query.emb", dir + "/query.ids");
    save_ground_truth(data.ground_truth, dir + "/gt.csv");
}

}  // namespace lmrank
