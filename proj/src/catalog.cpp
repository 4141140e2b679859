#include "lmrank/catalog.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "lmrank/csv.hpp"

namespace lmrank {

namespace {

const std::array<std::string, kContinentCount> kContinentNames = {
    "Asia",         "Europe",     "Africa",  "NorthAmerica",
    "SouthAmerica", "Antarctica", "Oceania", "OTHER",
};

const std::array<std::string, 3> kSplitNames = {"train", "index", "query"};

bool is_plain_token(const std::string& s) {
    if (s.empty()) {
        return false;
    }
    for (char c : s) {
        if (c == ',' || c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            return false;
        }
    }
    return true;
}

std::int64_t parse_landmark_id(const std::string& s, const std::string& where) {
    std::size_t pos = 0;
    std::int64_t value = 0;
    try {
        value = std::stoll(s, &pos);
    } catch (const std::exception&) {
        throw std::runtime_error(where + ": invalid landmark_id '" + s + "'");
    }
    if (pos != s.size() || value < 0) {
        throw std::runtime_error(where + ": invalid landmark_id '" + s + "'");
    }
    return value;
}

}  // namespace

const std::string& to_string(Continent c) {
    return kContinentNames[static_cast<std::size_t>(c)];
}

Continent continent_from_string(const std::string& s) {
    for (std::size_t i = 0; i < kContinentCount; ++i) {
        if (kContinentNames[i] == s) {
            return static_cast<Continent>(i);
        }
    }
    throw std::runtime_error("unknown continent '" + s + "'");
}

const std::string& to_string(Split s) {
    return kSplitNames[static_cast<std::size_t>(s)];
}

Split split_from_string(const std::string& s) {
    for (std::size_t i = 0; i < kSplitNames.size(); ++i) {
        if (kSplitNames[i] == s) {
            return static_cast<Split>(i);
        }
    }
    throw std::runtime_error("unknown split '" + s + "'");
}

Catalog::Catalog(std::vector<ImageRecord> records,
                 std::unordered_map<std::int64_t, std::string> landmark_to_country,
                 std::unordered_map<std::string, Continent> country_to_continent)
    : records_(std::move(records)),
      landmark_to_country_(std::move(landmark_to_country)),
      country_to_continent_(std::move(country_to_continent)) {
    for (const auto& [country, continent] : country_to_continent_) {
        if (continent == Continent::Other) {
            throw std::runtime_error("country '" + country +
                                     "' mapped to OTHER; unmapped countries must be omitted");
        }
    }
    by_id_.reserve(records_.size());
    for (std::uint32_t i = 0; i < records_.size(); ++i) {
        const ImageRecord& r = records_[i];
        if (!is_plain_token(r.image_id)) {
            throw std::runtime_error("image_id '" + r.image_id +
                                     "' is empty or contains separator characters");
        }
        if (!by_id_.emplace(r.image_id, i).second) {
            throw std::runtime_error("duplicate image_id '" + r.image_id + "'");
        }
        if (r.split == Split::Train && !r.landmark_id) {
            throw std::runtime_error("train record '" + r.image_id + "' is missing landmark_id");
        }
        if (r.country && !is_plain_token(*r.country)) {
            throw std::runtime_error("record '" + r.image_id + "' has a malformed country code");
        }

        // continent must be the one the maps derive: the mapped continent of
        // the record's country, OTHER when the country is absent or unmapped.
        Continent expected = Continent::Other;
        if (r.country) {
            auto it = country_to_continent_.find(*r.country);
            if (it != country_to_continent_.end()) {
                expected = it->second;
            }
        }
        if (r.continent != expected) {
            throw std::runtime_error("record '" + r.image_id + "': continent " +
                                     to_string(r.continent) + " disagrees with mapping (expected " +
                                     to_string(expected) + ")");
        }
        if (r.split == Split::Train) {
            // train country comes from the landmark.
            std::optional<std::string> mapped;
            auto it = landmark_to_country_.find(*r.landmark_id);
            if (it != landmark_to_country_.end()) {
                mapped = it->second;
            }
            if (r.country != mapped) {
                throw std::runtime_error("train record '" + r.image_id + "': country '" +
                                         r.country.value_or("") +
                                         "' disagrees with landmark mapping ('" +
                                         mapped.value_or("") + "')");
            }
            train_by_landmark_[*r.landmark_id].push_back(i);
            auto& stratum =
                train_strata_[static_cast<std::size_t>(r.continent)][r.is_clean ? 0 : 1];
            stratum.push_back(i);
            ++train_size_;
        }
    }
    train_landmarks_.reserve(train_by_landmark_.size());
    for (const auto& [landmark, rows] : train_by_landmark_) {
        train_landmarks_.push_back(landmark);
    }
}

const ImageRecord* Catalog::find(const std::string& image_id) const {
    auto it = by_id_.find(image_id);
    return it == by_id_.end() ? nullptr : &records_[it->second];
}

const ImageRecord& Catalog::require(const std::string& image_id) const {
    const ImageRecord* r = find(image_id);
    if (!r) {
        throw std::runtime_error("image_id '" + image_id + "' not in catalog");
    }
    return *r;
}

Continent Catalog::landmark_continent(std::int64_t landmark_id) const {
    auto country = landmark_country(landmark_id);
    if (!country) {
        return Continent::Other;
    }
    auto it = country_to_continent_.find(*country);
    return it == country_to_continent_.end() ? Continent::Other : it->second;
}

std::optional<std::string> Catalog::landmark_country(std::int64_t landmark_id) const {
    auto it = landmark_to_country_.find(landmark_id);
    if (it == landmark_to_country_.end()) {
        return std::nullopt;
    }
    return it->second;
}

const std::vector<std::uint32_t>& Catalog::train_by_landmark(std::int64_t landmark_id) const {
    static const std::vector<std::uint32_t> kEmpty;
    auto it = train_by_landmark_.find(landmark_id);
    return it == train_by_landmark_.end() ? kEmpty : it->second;
}

const std::vector<std::uint32_t>& Catalog::train_stratum(Continent c, bool is_clean) const {
    return train_strata_[static_cast<std::size_t>(c)][is_clean ? 0 : 1];
}

Catalog load_catalog(const std::string& catalog_path, const std::string& mapping_path) {
    std::unordered_map<std::int64_t, std::string> landmark_to_country;
    std::unordered_map<std::string, Continent> country_to_continent;

    csv::for_each_row(mapping_path, "landmark_id,country,continent",
                      [&](std::size_t line_no, const std::vector<std::string>& f) {
                          const std::string where = mapping_path + ":" + std::to_string(line_no);
                          if (f.size() != 3) {
                              throw std::runtime_error(where + ": expected 3 fields, got " +
                                                       std::to_string(f.size()));
                          }
                          const std::int64_t landmark = parse_landmark_id(f[0], where);
                          if (!is_plain_token(f[1])) {
                              throw std::runtime_error(where + ": malformed country '" + f[1] + "'");
                          }
                          Continent continent;
                          try {
                              continent = continent_from_string(f[2]);
                          } catch (const std::exception& e) {
                              throw std::runtime_error(where + ": " + e.what());
                          }
                          // OTHER marks absent/unmapped countries; a mapping
                          // row declaring it is a data bug, not a mapping.
                          if (continent == Continent::Other) {
                              throw std::runtime_error(
                                  where + ": OTHER is not a mappable continent; omit the "
                                          "landmark instead");
                          }
                          if (!landmark_to_country.emplace(landmark, f[1]).second) {
                              throw std::runtime_error(where + ": duplicate landmark_id " + f[0]);
                          }
                          auto [it, inserted] = country_to_continent.emplace(f[1], continent);
                          if (!inserted && it->second != continent) {
                              throw std::runtime_error(where + ": country '" + f[1] +
                                                       "' mapped to two continents");
                          }
                      });

    std::vector<ImageRecord> records;
    csv::for_each_row(
        catalog_path, "image_id,split,landmark_id,country,continent,is_clean",
        [&](std::size_t line_no, const std::vector<std::string>& f) {
            const std::string where = catalog_path + ":" + std::to_string(line_no);
            if (f.size() != 6) {
                throw std::runtime_error(where + ": expected 6 fields, got " +
                                         std::to_string(f.size()));
            }
            ImageRecord r;
            r.image_id = f[0];
            try {
                r.split = split_from_string(f[1]);
            } catch (const std::exception& e) {
                throw std::runtime_error(where + ": " + e.what());
            }
            if (!f[2].empty()) {
                r.landmark_id = parse_landmark_id(f[2], where);
            } else if (r.split == Split::Train) {
                throw std::runtime_error(where + ": train record missing landmark_id");
            }
            if (!f[3].empty()) {
                r.country = f[3];
            } else if (r.split == Split::Train) {
                auto it = landmark_to_country.find(*r.landmark_id);
                if (it != landmark_to_country.end()) {
                    r.country = it->second;
                }
            }
            if (f[4].empty()) {
                r.continent = Continent::Other;
                if (r.country) {
                    auto it = country_to_continent.find(*r.country);
                    if (it != country_to_continent.end()) {
                        r.continent = it->second;
                    }
                }
            } else {
                try {
                    r.continent = continent_from_string(f[4]);
                } catch (const std::exception& e) {
                    throw std::runtime_error(where + ": " + e.what());
                }
            }
            if (f[5].empty()) {
                r.is_clean = true;
            } else if (f[5] == "0") {
                r.is_clean = false;
            } else if (f[5] == "1") {
                r.is_clean = true;
            } else {
                throw std::runtime_error(where + ": is_clean must be 0 or 1, got '" + f[5] + "'");
            }
            records.push_back(std::move(r));
        });

    try {
        return Catalog(std::move(records), std::move(landmark_to_country),
                       std::move(country_to_continent));
    } catch (const std::exception& e) {
        throw std::runtime_error(catalog_path + ": " + e.what());
    }
}

void save_catalog(const Catalog& catalog, const std::string& catalog_path,
                  const std::string& mapping_path) {
    std::ofstream map_out(mapping_path);
    if (!map_out) {
        throw std::runtime_error(mapping_path + ": cannot open for writing");
    }
    map_out << "landmark_id,country,continent\n";
    std::vector<std::int64_t> landmarks;
    landmarks.reserve(catalog.landmark_to_country().size());
    for (const auto& [landmark, country] : catalog.landmark_to_country()) {
        landmarks.push_back(landmark);
    }
    std::sort(landmarks.begin(), landmarks.end());
    for (std::int64_t landmark : landmarks) {
        const std::string& country = catalog.landmark_to_country().at(landmark);
        map_out << landmark << ',' << country << ','
                << to_string(catalog.country_to_continent().at(country)) << '\n';
    }

    std::ofstream out(catalog_path);
    if (!out) {
        throw std::runtime_error(catalog_path + ": cannot open for writing");
    }
    out << "image_id,split,landmark_id,country,continent,is_clean\n";
    for (const ImageRecord& r : catalog.records()) {
        out << r.image_id << ',' << to_string(r.split) << ',';
        if (r.landmark_id) {
            out << *r.landmark_id;
        }
        out << ',';
        if (r.country) {
            out << *r.country;
        }
        out << ',' << to_string(r.continent) << ',' << (r.is_clean ? '1' : '0') << '\n';
    }
    if (!out || !map_out) {
        throw std::runtime_error("failed writing catalog files");
    }
}

const SplitStats& CatalogStats::of(Split s) const {
    switch (s) {
        case Split::Train:
            return train;
        case Split::Index:
            return index;
        default:
            return query;
    }
}

CatalogStats split_stats(const Catalog& catalog) {
    CatalogStats stats;
    std::unordered_map<std::int64_t, bool> seen_labels;
    for (const ImageRecord& r : catalog.records()) {
        SplitStats& s = r.split == Split::Train   ? stats.train
                        : r.split == Split::Index ? stats.index
                                                  : stats.query;
        ++s.samples;
        ++s.per_continent[static_cast<std::size_t>(r.continent)];
        if (r.is_clean) {
            ++s.clean;
        } else {
            ++s.noisy;
        }
        if (r.split == Split::Train) {
            seen_labels.emplace(*r.landmark_id, true);
        }
    }
    stats.train.distinct_labels = seen_labels.size();
    return stats;
}

}  // namespace lmrank
