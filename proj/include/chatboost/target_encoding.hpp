#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "chatboost/design_matrix.hpp"

#include "json.hpp"

namespace chatboost {

enum class EncoderKind { Mean, EB, Ordered, OneHot, Hash };

const char* encoder_kind_name(EncoderKind kind);
EncoderKind encoder_kind_from_name(const std::string& name);

struct EncoderParams {
    double l = 20.0;                   // sigmoid center, in sample counts
    double sigma = 10.0;               // sigmoid steepness, > 0
    double lambda_fixed = 0.8;         // prefix-mean smoothing weight, in [0, 1]
    int n_permutations = 4;
    uint64_t seed = 0;
    int hash_dims = 256;
    int one_hot_max_cardinality = 2;

    void validate() const;  // throws ParamError

    nlohmann::json to_json() const;
    static EncoderParams from_json(const nlohmann::json& j);
};

/// A reproducible batch of row orderings; regenerating with the same seed
/// yields the same permutations.
struct PermutationPlan {
    std::vector<std::vector<uint32_t>> permutations;
    uint64_t seed = 0;

    static PermutationPlan make(size_t rows, int n_permutations, uint64_t seed);
};

/// Separator used to compose crossed-column level tuples.
inline constexpr char kCrossSeparator = '\x1f';

/// A fitted level-to-value map (or indicator/hash scheme) for one column.
/// Transform is total: unseen levels fall back to the prior (value kinds),
/// an all-zero block (one-hot), or their hash bucket.
class FittedEncoder {
public:
    struct Block {
        std::vector<std::string> names;
        std::vector<std::vector<double>> columns;
    };

    EncoderKind kind() const { return kind_; }
    const std::string& column() const { return column_; }
    double prior() const { return prior_; }
    const EncoderParams& params() const { return params_; }
    const std::map<std::string, double>& mapping() const { return mapping_; }
    const std::vector<std::string>& levels() const { return levels_; }

    /// Value for one level; never fails.
    double map_level(const std::string& level) const;
    /// Bucket for one level under the Hash kind.
    int hash_bucket(const std::string& level) const;

    /// Encoded column for the value kinds (Mean/EB/Ordered).
    std::vector<double> transform(const std::vector<std::string>& values) const;
    /// Encoded column block; works for every kind (value kinds yield one column).
    Block transform_block(const std::vector<std::string>& values) const;

    nlohmann::json to_json() const;
    static FittedEncoder from_json(const nlohmann::json& j);

private:
    friend FittedEncoder fit_mean_encoding(const Column&, const std::vector<int>&);
    friend FittedEncoder fit_eb_encoding(const Column&, const std::vector<int>&,
                                         const EncoderParams&);
    friend struct OrderedFit;
    friend OrderedFit fit_ordered_encoding(const Column&, const std::vector<int>&,
                                           const EncoderParams&, const PermutationPlan&);
    friend FittedEncoder one_hot_encode(const Column&, const EncoderParams&);
    friend FittedEncoder hash_encode(const Column&, const EncoderParams&);

    EncoderKind kind_ = EncoderKind::Mean;
    std::string column_;
    double prior_ = 0.0;
    EncoderParams params_;
    std::map<std::string, double> mapping_;   // value kinds
    std::vector<std::string> levels_;         // one-hot dictionary order
};

/// Ordered fit result: the inference-time encoder plus the per-row training
/// vector computed from permutation prefixes.
struct OrderedFit {
    FittedEncoder encoder;
    std::vector<double> train_values;
};

// Column-level entry points (target supplied explicitly).
FittedEncoder fit_mean_encoding(const Column& col, const std::vector<int>& target);
FittedEncoder fit_eb_encoding(const Column& col, const std::vector<int>& target,
                              const EncoderParams& params);
OrderedFit fit_ordered_encoding(const Column& col, const std::vector<int>& target,
                                const EncoderParams& params);
OrderedFit fit_ordered_encoding(const Column& col, const std::vector<int>& target,
                                const EncoderParams& params, const PermutationPlan& plan);
FittedEncoder one_hot_encode(const Column& col, const EncoderParams& params);
FittedEncoder hash_encode(const Column& col, const EncoderParams& params);

// DesignMatrix convenience wrappers.
FittedEncoder fit_mean_encoding(const DesignMatrix& dm, const std::string& col);
FittedEncoder fit_eb_encoding(const DesignMatrix& dm, const std::string& col,
                              const EncoderParams& params);
OrderedFit fit_ordered_encoding(const DesignMatrix& dm, const std::string& col,
                                const EncoderParams& params);
FittedEncoder one_hot_encode(const DesignMatrix& dm, const std::string& col,
                             const EncoderParams& params);
FittedEncoder hash_encode(const DesignMatrix& dm, const std::string& col,
                          const EncoderParams& params);

/// Count-dependent shrinkage weight: 1 / (1 + exp(-(n - l) / sigma)).
double shrinkage_lambda(double n, double l, double sigma);

/// Seeded, platform-stable hash of a level string.
uint64_t hash_level(const std::string& level, uint64_t seed);

/// Synthetic categorical columns for every subset of `cols` of size 2 to
/// max_order; tuple dictionaries are built in first-appearance order.
std::vector<Column> cross_categoricals(const DesignMatrix& dm,
                                       const std::vector<std::string>& cols,
                                       int max_order);

/// Train/holdout ranking quality of naive mean encoding versus ordered
/// encoding on a dataset whose unique-per-row id carries no signal.
struct LeakageReport {
    double train_auc_naive = 0.0;
    double holdout_auc_naive = 0.0;
    double train_auc_ordered = 0.0;
    double holdout_auc_ordered = 0.0;

    nlohmann::json to_json() const;
};

LeakageReport leakage_demo(int64_t rows, uint64_t seed);

}  // namespace chatboost
