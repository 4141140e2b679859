#include "lmrank/embeddings.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

namespace lmrank {

namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};

std::uint32_t read_u32_le(std::istream& in, const std::string& path) {
    unsigned char buf[4];
    if (!in.read(reinterpret_cast<char*>(buf), 4)) {
        throw std::runtime_error(path + ": unexpected end of data");
    }
    return static_cast<std::uint32_t>(buf[0]) | static_cast<std::uint32_t>(buf[1]) << 8 |
           static_cast<std::uint32_t>(buf[2]) << 16 | static_cast<std::uint32_t>(buf[3]) << 24;
}

void write_u32_le(std::ostream& out, std::uint32_t v) {
    unsigned char buf[4] = {static_cast<unsigned char>(v & 0xff),
                            static_cast<unsigned char>(v >> 8 & 0xff),
                            static_cast<unsigned char>(v >> 16 & 0xff),
                            static_cast<unsigned char>(v >> 24 & 0xff)};
    out.write(reinterpret_cast<const char*>(buf), 4);
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::size_t dim, std::vector<std::string> ids,
                                 std::vector<float> data)
    : dim_(dim), ids_(std::move(ids)), data_(std::move(data)) {
    if (dim_ == 0) {
        throw std::invalid_argument("embedding dim must be positive");
    }
    if (data_.size() != ids_.size() * dim_) {
        throw std::invalid_argument("embedding data size does not match rows * dim");
    }
    std::unordered_set<std::string> seen;
    seen.reserve(ids_.size());
    for (const std::string& id : ids_) {
        if (!seen.insert(id).second) {
            throw std::invalid_argument("duplicate embedding id '" + id + "'");
        }
    }
}

EmbeddingMatrix load_embeddings(const std::string& bin_path, const std::string& ids_path) {
    std::ifstream in(bin_path, std::ios::binary);
    if (!in) {
        throw std::runtime_error(bin_path + ": cannot open file");
    }
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
        throw std::runtime_error(bin_path + ": bad magic, not an EMB1 file");
    }
    const std::uint32_t count = read_u32_le(in, bin_path);
    const std::uint32_t dim = read_u32_le(in, bin_path);
    if (dim == 0) {
        throw std::runtime_error(bin_path + ": dim must be positive");
    }

    std::vector<float> data(static_cast<std::size_t>(count) * dim);
    if (!data.empty() &&
        !in.read(reinterpret_cast<char*>(data.data()),
                 static_cast<std::streamsize>(data.size() * sizeof(float)))) {
        throw std::runtime_error(bin_path + ": unexpected end of data");
    }
    char extra;
    if (in.read(&extra, 1)) {
        throw std::runtime_error(bin_path + ": trailing bytes after declared data");
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!std::isfinite(data[i])) {
            throw std::runtime_error(bin_path + ": non-finite value at row " +
                                     std::to_string(i / dim) + " col " + std::to_string(i % dim));
        }
    }

    std::ifstream ids_in(ids_path);
    if (!ids_in) {
        throw std::runtime_error(ids_path + ": cannot open file");
    }
    std::vector<std::string> ids;
    ids.reserve(count);
    std::string line;
    while (std::getline(ids_in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            throw std::runtime_error(ids_path + ":" + std::to_string(ids.size() + 1) +
                                     ": empty id");
        }
        ids.push_back(line);
    }
    if (ids.size() != count) {
        throw std::runtime_error(ids_path + ": has " + std::to_string(ids.size()) +
                                 " ids but " + bin_path + " declares " + std::to_string(count) +
                                 " rows");
    }
    return EmbeddingMatrix(dim, std::move(ids), std::move(data));
}

void save_embeddings(const EmbeddingMatrix& m, const std::string& bin_path,
                     const std::string& ids_path) {
    if (m.rows() > UINT32_MAX || m.dim() > UINT32_MAX) {
        throw std::runtime_error(bin_path + ": matrix too large for the EMB1 header");
    }
    std::ofstream out(bin_path, std::ios::binary);
    if (!out) {
        throw std::runtime_error(bin_path + ": cannot open for writing");
    }
    out.write(kMagic, 4);
    write_u32_le(out, static_cast<std::uint32_t>(m.rows()));
    write_u32_le(out, static_cast<std::uint32_t>(m.dim()));
    out.write(reinterpret_cast<const char*>(m.data().data()),
              static_cast<std::streamsize>(m.data().size() * sizeof(float)));
    if (!out) {
        throw std::runtime_error(bin_path + ": write failed");
    }

    std::ofstream ids_out(ids_path);
    if (!ids_out) {
        throw std::runtime_error(ids_path + ": cannot open for writing");
    }
    for (const std::string& id : m.ids()) {
        ids_out << id << '\n';
    }
    if (!ids_out) {
        throw std::runtime_error(ids_path + ": write failed");
    }
}

EmbeddingMatrix normalize_rows(const EmbeddingMatrix& m) {
    std::vector<float> data(m.data().size());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const auto row = m.row(i);
        double norm_sq = 0.0;
        for (float v : row) {
            norm_sq += static_cast<double>(v) * v;
        }
        if (norm_sq == 0.0) {
            throw std::runtime_error("cannot normalize zero embedding row for id '" +
                                     m.ids()[i] + "'");
        }
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (std::size_t d = 0; d < m.dim(); ++d) {
            data[i * m.dim() + d] = static_cast<float>(row[d] * inv);
        }
    }
    return EmbeddingMatrix(m.dim(), m.ids(), std::move(data));
}

}  // namespace lmrank
