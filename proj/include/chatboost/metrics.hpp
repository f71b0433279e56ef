#pragma once

#include <vector>

namespace chatboost {

double sigmoid(double x);

/// Log-odds of p, with p clamped away from 0 and 1.
double logit(double p);

/// Rank-based AUC with ties resolved by average rank. Needs at least one
/// positive and one negative label.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

/// Mean negative log-likelihood of probabilities, clamped to [1e-15, 1-1e-15].
double logloss(const std::vector<double>& probs, const std::vector<int>& labels);

/// Same loss evaluated on raw log-odds; numerically stable for large margins.
double logloss_from_margins(const std::vector<double>& margins,
                            const std::vector<int>& labels);

}  // namespace chatboost
