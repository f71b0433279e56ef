#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "chatboost/design_matrix.hpp"
#include "chatboost/rng.hpp"
#include "chatboost/target_encoding.hpp"

#include "json.hpp"

namespace chatboost {

struct BoostParams {
    double learning_rate = 0.08;
    int depth = 9;
    double l2_leaf_reg = 64.0;
    double random_strength = 0.5;
    int od_wait = 20;              // early-stop patience, in iterations
    bool use_best_model = true;
    int max_iterations = 1000;
    double threshold = 0.167;      // decision threshold for labels
    int max_ctr_complexity = 2;    // categorical cross order bound
    uint64_t seed = 0;
    /// When set, categorical features keep their level identity and nodes
    /// search exact level-subset splits instead of pre-encoded numerics.
    bool exact_categorical_splits = false;
    EncoderParams encoder;

    void validate() const;  // throws ParamError

    nlohmann::json to_json() const;
    static BoostParams from_json(const nlohmann::json& j);
};

/// Per-sample first and second derivatives of the logistic loss at the given
/// log-odds predictions.
struct Gradients {
    std::vector<double> grad;
    std::vector<double> hess;
};

Gradients logistic_gradients(const std::vector<double>& margins,
                             const std::vector<int>& targets);

struct SplitCandidate {
    bool valid = false;
    int feature = -1;
    bool categorical = false;
    double threshold = 0.0;                 // numeric split: go left when value < threshold
    std::vector<int32_t> left_levels;       // categorical split: codes routed left
    double gain = 0.0;                      // noiseless second-order gain
};

/// Best midpoint threshold by second-order gain. random_strength perturbs
/// candidate scores multiplicatively (score = gain * (1 + rs * z)) before the
/// argmax; the reported gain stays noiseless. Constant features yield an
/// invalid candidate.
SplitCandidate best_numeric_split(const std::vector<double>& values,
                                  const std::vector<double>& grad,
                                  const std::vector<double>& hess,
                                  double l2_leaf_reg, double random_strength,
                                  Rng& rng);

/// Optimal level bipartition for second-order gain, found by sorting levels
/// on grad/hess ratio and scanning the k-1 prefix partitions. Matches
/// exhaustive enumeration over all 2^(k-1)-1 partitions. Levels with zero
/// hessian are pooled on the right side.
SplitCandidate optimal_categorical_split(const std::vector<double>& level_grad,
                                         const std::vector<double>& level_hess,
                                         double l2_leaf_reg);

/// One feature of the model's encoded input space: either a numeric column
/// or (exact mode only) a coded categorical column.
struct EncodedFeature {
    std::string name;
    bool categorical = false;
    std::vector<double> values;
    std::vector<int32_t> codes;
    int32_t n_levels = 0;  // codes == n_levels marks an unseen level

    size_t rows() const { return categorical ? codes.size() : values.size(); }
};

struct EncodedMatrix {
    std::vector<EncodedFeature> features;
    size_t rows = 0;
};

struct TreeNode {
    int feature = -1;
    bool categorical = false;
    double threshold = 0.0;
    std::vector<int32_t> left_levels;  // sorted
    int left = -1;
    int right = -1;
    double value = 0.0;  // leaf output
    double gain = 0.0;

    bool is_leaf() const { return left < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;

    double predict_row(const EncodedMatrix& X, size_t row) const;
    bool has_split() const { return !nodes.empty() && !nodes[0].is_leaf(); }

    nlohmann::json to_json() const;
    static Tree from_json(const nlohmann::json& j);
};

/// Greedy depth-limited tree over the encoded features; leaf values are the
/// regularized Newton step -G / (H + l2).
Tree build_tree(const EncodedMatrix& X, const std::vector<double>& grad,
                const std::vector<double>& hess, const BoostParams& params,
                uint64_t tree_seed);

/// How raw columns become model features. Fitted on the training matrix and
/// replayed on any conforming matrix afterwards.
struct FeatureSlot {
    enum class Kind { Numeric, Encoded, OneHot, Exact };
    Kind kind = Kind::Numeric;
    std::string name;
    std::vector<std::string> sources;  // >1 entry for crossed columns
    FittedEncoder encoder;             // Encoded / OneHot
    std::vector<std::string> levels;   // Exact dictionary
};

struct FeaturePipeline {
    std::vector<FeatureSlot> slots;
    Schema schema;  // source columns the pipeline expects

    /// Fits encoders on the training matrix; the returned matrix uses the
    /// leakage-safe per-row ordered values for encoded slots.
    static std::pair<FeaturePipeline, EncodedMatrix> fit(const DesignMatrix& train,
                                                         const BoostParams& params);

    /// Encodes a matrix with the fitted mappings (full-data statistics).
    EncodedMatrix apply(const DesignMatrix& dm) const;

    nlohmann::json to_json() const;
    static FeaturePipeline from_json(const nlohmann::json& j);
};

struct BoostModel {
    BoostParams params;
    FeaturePipeline pipeline;
    std::vector<Tree> trees;
    double base_score = 0.0;  // log-odds of the training mean
    int best_iteration = 0;   // number of trees in the selected model
    std::map<std::string, double> importance;

    nlohmann::json to_json() const;
    static BoostModel from_json(const nlohmann::json& j);
};

/// Per-iteration training record, for tests and reporting.
struct TrainLog {
    std::vector<double> train_loss;
    std::vector<double> valid_loss;
    bool early_stopped = false;
};

/// Boosts depth-limited trees with logistic loss, evaluating validation
/// logloss each iteration; stops after od_wait iterations without strict
/// improvement and (optionally) truncates to the best iteration.
BoostModel train(const DesignMatrix& train_dm, const DesignMatrix& valid_dm,
                 const BoostParams& params, TrainLog* log = nullptr);

std::vector<double> predict_margins(const BoostModel& model, const DesignMatrix& dm);

/// sigmoid(base_score + learning_rate * sum of tree outputs); always in (0,1).
std::vector<double> predict(const BoostModel& model, const DesignMatrix& dm);

/// Per-feature share of total split gain across all trees; sums to 1, empty
/// for a splitless model.
std::map<std::string, double> feature_importance(const BoostModel& model);

void save_model(const BoostModel& model, const std::string& path);
BoostModel load_model(const std::string& path);

}  // namespace chatboost
