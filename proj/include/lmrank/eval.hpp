#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "lmrank/retrieval.hpp"

namespace lmrank {

// query_id -> relevant index ids. Ordered containers keep file output and
// iteration deterministic.
using GroundTruth = std::map<std::string, std::set<std::string>>;

// Average precision truncated at rank 100 with denominator min(|relevant|,
// 100): sum of precision-at-i over relevant hits in the top 100, in float64.
double ap_at_100(const RankedList& ranked, const std::set<std::string>& relevant);

// Arithmetic mean of ap_at_100 over the queries in gt. Queries without a
// ranked list score 0, mirroring how partial submissions are scored.
double mean_ap_at_100(const std::vector<RankedList>& ranked_lists, const GroundTruth& gt);

// Submission CSV: header `id,images`, images holds up to 100 index ids
// separated by single spaces. The same format carries ground truth.
void save_predictions(const std::vector<RankedList>& ranked_lists, const std::string& path);
std::vector<RankedList> load_predictions(const std::string& path);

void save_ground_truth(const GroundTruth& gt, const std::string& path);
GroundTruth load_ground_truth(const std::string& path);

}  // namespace lmrank
