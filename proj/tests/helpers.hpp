#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "lmrank/catalog.hpp"
#include "lmrank/embeddings.hpp"
#include "lmrank/rng.hpp"

namespace lmtest {

// Unique scratch directory, removed on destruction.
class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("lmrank_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string str(const std::string& name = "") const {
        return name.empty() ? path_.string() : (path_ / name).string();
    }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return data;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline lmrank::ImageRecord record(std::string id, lmrank::Split split,
                                  std::optional<std::int64_t> landmark = std::nullopt,
                                  std::optional<std::string> country = std::nullopt,
                                  lmrank::Continent continent = lmrank::Continent::Other,
                                  bool clean = true) {
    lmrank::ImageRecord r;
    r.image_id = std::move(id);
    r.split = split;
    r.landmark_id = landmark;
    r.country = std::move(country);
    r.continent = continent;
    r.is_clean = clean;
    return r;
}

// Random row-normalized embedding matrix with ids r000000, r000001, ...
inline lmrank::EmbeddingMatrix random_unit_matrix(std::size_t rows, std::size_t dim,
                                                  std::uint64_t seed, char prefix = 'r') {
    lmrank::Rng rng(seed);
    std::vector<std::string> ids;
    std::vector<float> data;
    ids.reserve(rows);
    data.reserve(rows * dim);
    for (std::size_t i = 0; i < rows; ++i) {
        std::string id(1, prefix);
        std::string digits = std::to_string(i);
        id.append(6 - std::min<std::size_t>(6, digits.size()), '0');
        id += digits;
        ids.push_back(id);
        std::vector<double> v(dim);
        double norm_sq = 0.0;
        for (auto& x : v) {
            x = rng.next_gaussian();
            norm_sq += x * x;
        }
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (double x : v) {
            data.push_back(static_cast<float>(x * inv));
        }
    }
    return lmrank::EmbeddingMatrix(dim, std::move(ids), std::move(data));
}

}  // namespace lmtest
