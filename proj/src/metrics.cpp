#include "chatboost/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "chatboost/error.hpp"

namespace chatboost {

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

double logit(double p) {
    constexpr double eps = 1e-12;
    p = std::clamp(p, eps, 1.0 - eps);
    return std::log(p / (1.0 - p));
}

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) {
        throw ShapeError("auc: scores and labels differ in length");
    }
    const size_t n = scores.size();
    if (n == 0) throw EmptyDataError("auc of empty input");

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return scores[a] < scores[b]; });

    double pos_rank_sum = 0.0;
    int64_t n_pos = 0;
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        // 1-based average rank for the tie block [i, j).
        double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
        for (size_t t = i; t < j; ++t) {
            if (labels[order[t]] == 1) {
                pos_rank_sum += avg_rank;
                ++n_pos;
            }
        }
        i = j;
    }
    int64_t n_neg = static_cast<int64_t>(n) - n_pos;
    if (n_pos == 0 || n_neg == 0) {
        throw EmptyDataError("auc needs both classes present");
    }
    double np = static_cast<double>(n_pos);
    return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

double logloss(const std::vector<double>& probs, const std::vector<int>& labels) {
    if (probs.size() != labels.size()) {
        throw ShapeError("logloss: probabilities and labels differ in length");
    }
    if (probs.empty()) throw EmptyDataError("logloss of empty input");
    constexpr double eps = 1e-15;
    double sum = 0.0;
    for (size_t i = 0; i < probs.size(); ++i) {
        double p = std::clamp(probs[i], eps, 1.0 - eps);
        sum -= labels[i] == 1 ? std::log(p) : std::log(1.0 - p);
    }
    return sum / static_cast<double>(probs.size());
}

double logloss_from_margins(const std::vector<double>& margins,
                            const std::vector<int>& labels) {
    if (margins.size() != labels.size()) {
        throw ShapeError("logloss: margins and labels differ in length");
    }
    if (margins.empty()) throw EmptyDataError("logloss of empty input");
    double sum = 0.0;
    for (size_t i = 0; i < margins.size(); ++i) {
        double m = margins[i];
        // log(1 + exp(m)) - y*m, evaluated without overflow.
        double softplus = std::max(m, 0.0) + std::log1p(std::exp(-std::abs(m)));
        sum += softplus - (labels[i] == 1 ? m : 0.0);
    }
    return sum / static_cast<double>(margins.size());
}

}  // namespace chatboost
