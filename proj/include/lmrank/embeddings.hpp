#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace lmrank {

// N x D float32 row-major matrix with one image_id per row. Rows are aligned
// to the id list, never to catalog order. Immutable in practice: every
// consumer takes it by const reference.
class EmbeddingMatrix {
public:
    EmbeddingMatrix() = default;
    EmbeddingMatrix(std::size_t dim, std::vector<std::string> ids, std::vector<float> data);

    std::size_t dim() const { return dim_; }
    std::size_t rows() const { return ids_.size(); }
    const std::vector<std::string>& ids() const { return ids_; }
    const std::vector<float>& data() const { return data_; }

    std::span<const float> row(std::size_t i) const {
        return {data_.data() + i * dim_, dim_};
    }

private:
    std::size_t dim_ = 0;
    std::vector<std::string> ids_;
    std::vector<float> data_;
};

// Binary format, little-endian: magic "EMB1", u32 count, u32 dim, then
// count*dim float32 row-major. Ids file: one image_id per line, line i is
// row i. Loading rejects truncated data, id-count mismatches and
// non-finite values.
EmbeddingMatrix load_embeddings(const std::string& bin_path, const std::string& ids_path);
void save_embeddings(const EmbeddingMatrix& m, const std::string& bin_path,
                     const std::string& ids_path);

// Scales every row to unit L2 norm (norms accumulated in float64). A zero
// row is an error naming the offending id.
EmbeddingMatrix normalize_rows(const EmbeddingMatrix& m);

}  // namespace lmrank
