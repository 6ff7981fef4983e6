#pragma once

#include <span>

namespace lgcl {

/// Area under the ROC curve from average ranks (Mann-Whitney U); tied scores
/// count one half. Labels are 0/1. Throws DataError without both classes.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

/// Mean of precision@rank over the positives, ranking by descending score.
/// Ties keep input order (stable sort). Throws DataError without positives.
double average_precision(std::span<const double> scores, std::span<const int> labels);

}  // namespace lgcl
