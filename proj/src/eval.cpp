#include "lmrank/eval.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "lmrank/csv.hpp"

namespace lmrank {

double ap_at_100(const RankedList& ranked, const std::set<std::string>& relevant) {
    if (relevant.empty()) {
        throw std::invalid_argument("ap_at_100: query '" + ranked.query_id +
                                    "' has an empty relevant set");
    }
    const std::size_t cutoff = std::min<std::size_t>(ranked.entries.size(), 100);
    std::unordered_set<std::string> seen;
    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < cutoff; ++i) {
        const std::string& id = ranked.entries[i].index_id;
        if (!seen.insert(id).second) {
            throw std::invalid_argument("ap_at_100: duplicate index_id '" + id + "' for query '" +
                                        ranked.query_id + "'");
        }
        if (relevant.count(id)) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(i + 1);
        }
    }
    return sum / static_cast<double>(std::min<std::size_t>(relevant.size(), 100));
}

double mean_ap_at_100(const std::vector<RankedList>& ranked_lists, const GroundTruth& gt) {
    if (gt.empty()) {
        throw std::invalid_argument("mean_ap_at_100: ground truth is empty");
    }
    std::unordered_map<std::string, const RankedList*> by_query;
    by_query.reserve(ranked_lists.size());
    for (const RankedList& list : ranked_lists) {
        by_query[list.query_id] = &list;
    }
    double sum = 0.0;
    for (const auto& [query_id, relevant] : gt) {
        auto it = by_query.find(query_id);
        if (it != by_query.end()) {
            sum += ap_at_100(*it->second, relevant);
        }
    }
    return sum / static_cast<double>(gt.size());
}

namespace {

void save_id_images_csv(const std::string& path,
                        const std::vector<std::pair<std::string, std::vector<std::string>>>& rows) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error(path + ": cannot open for writing");
    }
    out << "id,images\n";
    for (const auto& [id, images] : rows) {
        out << id << ',';
        for (std::size_t i = 0; i < images.size(); ++i) {
            if (i != 0) {
                out << ' ';
            }
            out << images[i];
        }
        out << '\n';
    }
    if (!out) {
        throw std::runtime_error(path + ": write failed");
    }
}

std::vector<std::pair<std::string, std::vector<std::string>>> load_id_images_csv(
    const std::string& path) {
    std::vector<std::pair<std::string, std::vector<std::string>>> rows;
    csv::for_each_row(path, "id,images", [&](std::size_t line_no,
                                             const std::vector<std::string>& f) {
        if (f.size() != 2) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected 2 fields, got " + std::to_string(f.size()));
        }
        if (f[0].empty()) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": empty id");
        }
        std::vector<std::string> images;
        std::istringstream is(f[1]);
        std::string token;
        while (is >> token) {
            images.push_back(token);
        }
        rows.emplace_back(f[0], std::move(images));
    });
    return rows;
}

}  // namespace

void save_predictions(const std::vector<RankedList>& ranked_lists, const std::string& path) {
    std::vector<std::pair<std::string, std::vector<std::string>>> rows;
    rows.reserve(ranked_lists.size());
    for (const RankedList& list : ranked_lists) {
        std::vector<std::string> images;
        const std::size_t n = std::min<std::size_t>(list.entries.size(), 100);
        images.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            images.push_back(list.entries[i].index_id);
        }
        rows.emplace_back(list.query_id, std::move(images));
    }
    save_id_images_csv(path, rows);
}

std::vector<RankedList> load_predictions(const std::string& path) {
    std::vector<RankedList> lists;
    for (auto& [id, images] : load_id_images_csv(path)) {
        RankedList list;
        list.query_id = id;
        list.entries.reserve(images.size());
        // Similarities are not part of the file; ranks carry the ordering.
        double sim = static_cast<double>(images.size());
        for (std::string& image : images) {
            list.entries.push_back({std::move(image), sim});
            sim -= 1.0;
        }
        lists.push_back(std::move(list));
    }
    return lists;
}

void save_ground_truth(const GroundTruth& gt, const std::string& path) {
    std::vector<std::pair<std::string, std::vector<std::string>>> rows;
    rows.reserve(gt.size());
    for (const auto& [id, relevant] : gt) {
        rows.emplace_back(id, std::vector<std::string>(relevant.begin(), relevant.end()));
    }
    save_id_images_csv(path, rows);
}

GroundTruth load_ground_truth(const std::string& path) {
    GroundTruth gt;
    for (auto& [id, images] : load_id_images_csv(path)) {
        if (images.empty()) {
            throw std::runtime_error(path + ": query '" + id + "' has no relevant images");
        }
        auto [it, inserted] = gt.emplace(id, std::set<std::string>(images.begin(), images.end()));
        if (!inserted) {
            throw std::runtime_error(path + ": duplicate query id '" + id + "'");
        }
    }
    return gt;
}

}  // namespace lmrank
