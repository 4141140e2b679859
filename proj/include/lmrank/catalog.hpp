#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace lmrank {

enum class Continent : std::uint8_t {
    Asia = 0,
    Europe,
    Africa,
    NorthAmerica,
    SouthAmerica,
    Antarctica,
    Oceania,
    Other,
};

inline constexpr std::size_t kContinentCount = 8;

inline constexpr std::array<Continent, kContinentCount> kAllContinents = {
    Continent::Asia,         Continent::Europe,     Continent::Africa,
    Continent::NorthAmerica, Continent::SouthAmerica, Continent::Antarctica,
    Continent::Oceania,      Continent::Other,
};

const std::string& to_string(Continent c);
// Accepts exactly the eight canonical tokens; anything else throws.
Continent continent_from_string(const std::string& s);

enum class Split : std::uint8_t { Train = 0, Index, Query };

const std::string& to_string(Split s);
Split split_from_string(const std::string& s);

struct ImageRecord {
    std::string image_id;
    Split split = Split::Train;
    std::optional<std::int64_t> landmark_id;  // required for the train split
    std::optional<std::string> country;
    Continent continent = Continent::Other;
    bool is_clean = true;  // meaningful only for the train split

    bool operator==(const ImageRecord&) const = default;
};

// Immutable after construction; the constructor validates every invariant
// (unique ids, train rows labeled, country/continent consistent with the
// landmark->country->continent maps) and builds the per-split lookup
// structures the samplers and rerankers read. Safe for concurrent reads.
class Catalog {
public:
    Catalog() = default;
    Catalog(std::vector<ImageRecord> records,
            std::unordered_map<std::int64_t, std::string> landmark_to_country,
            std::unordered_map<std::string, Continent> country_to_continent);

    const std::vector<ImageRecord>& records() const { return records_; }
    const std::unordered_map<std::int64_t, std::string>& landmark_to_country() const {
        return landmark_to_country_;
    }
    const std::unordered_map<std::string, Continent>& country_to_continent() const {
        return country_to_continent_;
    }

    const ImageRecord* find(const std::string& image_id) const;
    const ImageRecord& require(const std::string& image_id) const;

    // Continent and country for a landmark, OTHER / empty when unmapped.
    Continent landmark_continent(std::int64_t landmark_id) const;
    std::optional<std::string> landmark_country(std::int64_t landmark_id) const;

    // Record indices in catalog order.
    const std::vector<std::uint32_t>& train_by_landmark(std::int64_t landmark_id) const;
    const std::vector<std::int64_t>& train_landmarks() const { return train_landmarks_; }
    // Train records per (continent, cleanliness) stratum; clean = index 0.
    const std::vector<std::uint32_t>& train_stratum(Continent c, bool is_clean) const;
    std::size_t train_size() const { return train_size_; }

private:
    std::vector<ImageRecord> records_;
    std::unordered_map<std::int64_t, std::string> landmark_to_country_;
    std::unordered_map<std::string, Continent> country_to_continent_;

    std::unordered_map<std::string, std::uint32_t> by_id_;
    std::map<std::int64_t, std::vector<std::uint32_t>> train_by_landmark_;
    std::vector<std::int64_t> train_landmarks_;  // ascending
    std::array<std::array<std::vector<std::uint32_t>, 2>, kContinentCount> train_strata_;
    std::size_t train_size_ = 0;
};

// File formats:
//   catalog: CSV `image_id,split,landmark_id,country,continent,is_clean`
//   mapping: CSV `landmark_id,country,continent`
// Optional catalog fields may be empty; empty country/continent are derived
// from the mapping, non-empty ones must agree with it (line-numbered errors
// otherwise). Unknown continent tokens in the mapping file are an error.
Catalog load_catalog(const std::string& catalog_path, const std::string& mapping_path);
void save_catalog(const Catalog& catalog, const std::string& catalog_path,
                  const std::string& mapping_path);

struct SplitStats {
    std::size_t samples = 0;
    std::size_t distinct_labels = 0;  // nonzero only for train
    std::array<std::size_t, kContinentCount> per_continent{};
    std::size_t clean = 0;
    std::size_t noisy = 0;
};

struct CatalogStats {
    SplitStats train;
    SplitStats index;
    SplitStats query;

    const SplitStats& of(Split s) const;
};

CatalogStats split_stats(const Catalog& catalog);

}  // namespace lmrank
