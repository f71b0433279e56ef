#include "chatboost/target_encoding.hpp"

#include <algorithm>
#include <cmath>

#include "chatboost/error.hpp"
#include "chatboost/metrics.hpp"
#include "chatboost/rng.hpp"

namespace chatboost {

const char* encoder_kind_name(EncoderKind kind) {
    switch (kind) {
        case EncoderKind::Mean: return "mean";
        case EncoderKind::EB: return "eb";
        case EncoderKind::Ordered: return "ordered";
        case EncoderKind::OneHot: return "one_hot";
        case EncoderKind::Hash: return "hash";
    }
    throw ParamError("unknown encoder kind");
}

EncoderKind encoder_kind_from_name(const std::string& name) {
    if (name == "mean") return EncoderKind::Mean;
    if (name == "eb") return EncoderKind::EB;
    if (name == "ordered") return EncoderKind::Ordered;
    if (name == "one_hot") return EncoderKind::OneHot;
    if (name == "hash") return EncoderKind::Hash;
    throw ParseError("unknown encoder kind '" + name + "'");
}

void EncoderParams::validate() const {
    if (!(sigma > 0.0)) throw ParamError("sigma must be > 0");
    if (lambda_fixed < 0.0 || lambda_fixed > 1.0) {
        throw ParamError("lambda_fixed must lie in [0, 1]");
    }
    if (n_permutations < 1) throw ParamError("n_permutations must be >= 1");
    if (hash_dims < 1) throw ParamError("hash_dims must be >= 1");
    if (one_hot_max_cardinality < 1) {
        throw ParamError("one_hot_max_cardinality must be >= 1");
    }
}

nlohmann::json EncoderParams::to_json() const {
    return nlohmann::json{{"l", l},
                          {"sigma", sigma},
                          {"lambda_fixed", lambda_fixed},
                          {"n_permutations", n_permutations},
                          {"seed", seed},
                          {"hash_dims", hash_dims},
                          {"one_hot_max_cardinality", one_hot_max_cardinality}};
}

EncoderParams EncoderParams::from_json(const nlohmann::json& j) {
    EncoderParams p;
    p.l = j.at("l").get<double>();
    p.sigma = j.at("sigma").get<double>();
    p.lambda_fixed = j.at("lambda_fixed").get<double>();
    p.n_permutations = j.at("n_permutations").get<int>();
    p.seed = j.at("seed").get<uint64_t>();
    p.hash_dims = j.at("hash_dims").get<int>();
    p.one_hot_max_cardinality = j.at("one_hot_max_cardinality").get<int>();
    p.validate();
    return p;
}

PermutationPlan PermutationPlan::make(size_t rows, int n_permutations, uint64_t seed) {
    if (n_permutations < 1) throw ParamError("n_permutations must be >= 1");
    PermutationPlan plan;
    plan.seed = seed;
    Rng rng(seed);
    plan.permutations.reserve(static_cast<size_t>(n_permutations));
    for (int i = 0; i < n_permutations; ++i) {
        plan.permutations.push_back(rng.permutation(rows));
    }
    return plan;
}

double shrinkage_lambda(double n, double l, double sigma) {
    return 1.0 / (1.0 + std::exp(-(n - l) / sigma));
}

uint64_t hash_level(const std::string& level, uint64_t seed) {
    return splitmix64(fnv1a64(level.data(), level.size()) ^ seed);
}

namespace {

void require_categorical(const Column& col) {
    if (col.kind != ColumnKind::Categorical) {
        throw ColumnError("column '" + col.name + "' is not categorical");
    }
}

void require_rows(const Column& col, const std::vector<int>& target) {
    if (col.codes.size() != target.size()) {
        throw ShapeError("column '" + col.name + "' and target differ in length");
    }
    if (target.empty()) {
        throw EmptyDataError("cannot fit an encoder on an empty matrix");
    }
}

double mean_target(const std::vector<int>& target) {
    double sum = 0.0;
    for (int y : target) sum += y;
    return sum / static_cast<double>(target.size());
}

struct LevelStats {
    std::vector<double> sum;
    std::vector<int64_t> count;
};

LevelStats level_stats(const Column& col, const std::vector<int>& target) {
    LevelStats stats;
    stats.sum.assign(static_cast<size_t>(col.dict.size()), 0.0);
    stats.count.assign(static_cast<size_t>(col.dict.size()), 0);
    for (size_t i = 0; i < col.codes.size(); ++i) {
        stats.sum[static_cast<size_t>(col.codes[i])] += target[i];
        ++stats.count[static_cast<size_t>(col.codes[i])];
    }
    return stats;
}

}  // namespace

double FittedEncoder::map_level(const std::string& level) const {
    auto it = mapping_.find(level);
    return it == mapping_.end() ? prior_ : it->second;
}

int FittedEncoder::hash_bucket(const std::string& level) const {
    return static_cast<int>(hash_level(level, params_.seed) %
                            static_cast<uint64_t>(params_.hash_dims));
}

std::vector<double> FittedEncoder::transform(const std::vector<std::string>& values) const {
    if (kind_ == EncoderKind::OneHot || kind_ == EncoderKind::Hash) {
        throw ColumnError("encoder for '" + column_ + "' produces a column block; use transform_block");
    }
    std::vector<double> out;
    out.reserve(values.size());
    for (const auto& v : values) out.push_back(map_level(v));
    return out;
}

FittedEncoder::Block FittedEncoder::transform_block(const std::vector<std::string>& values) const {
    Block block;
    if (kind_ == EncoderKind::OneHot) {
        block.names.reserve(levels_.size());
        block.columns.assign(levels_.size(), std::vector<double>(values.size(), 0.0));
        std::map<std::string, size_t> index;
        for (size_t i = 0; i < levels_.size(); ++i) {
            block.names.push_back(column_ + "=" + levels_[i]);
            index[levels_[i]] = i;
        }
        for (size_t r = 0; r < values.size(); ++r) {
            auto it = index.find(values[r]);
            if (it != index.end()) block.columns[it->second][r] = 1.0;
            // Unseen level: the whole row stays zero.
        }
    } else if (kind_ == EncoderKind::Hash) {
        block.names.reserve(static_cast<size_t>(params_.hash_dims));
        block.columns.assign(static_cast<size_t>(params_.hash_dims),
                             std::vector<double>(values.size(), 0.0));
        for (int b = 0; b < params_.hash_dims; ++b) {
            block.names.push_back(column_ + "#" + std::to_string(b));
        }
        for (size_t r = 0; r < values.size(); ++r) {
            block.columns[static_cast<size_t>(hash_bucket(values[r]))][r] = 1.0;
        }
    } else {
        block.names.push_back(column_);
        block.columns.push_back(transform(values));
    }
    return block;
}

nlohmann::json FittedEncoder::to_json() const {
    nlohmann::json j;
    j["version"] = 1;
    j["kind"] = encoder_kind_name(kind_);
    j["column"] = column_;
    j["prior"] = prior_;
    j["params"] = params_.to_json();
    if (kind_ == EncoderKind::OneHot) {
        j["levels"] = levels_;
    } else if (kind_ != EncoderKind::Hash) {
        nlohmann::json mapping = nlohmann::json::object();
        for (const auto& [level, value] : mapping_) mapping[level] = value;
        j["mapping"] = mapping;
    }
    return j;
}

FittedEncoder FittedEncoder::from_json(const nlohmann::json& j) {
    if (j.at("version").get<int>() != 1) {
        throw ParseError("unsupported encoder document version");
    }
    FittedEncoder enc;
    enc.kind_ = encoder_kind_from_name(j.at("kind").get<std::string>());
    enc.column_ = j.at("column").get<std::string>();
    enc.prior_ = j.at("prior").get<double>();
    enc.params_ = EncoderParams::from_json(j.at("params"));
    if (enc.kind_ == EncoderKind::OneHot) {
        enc.levels_ = j.at("levels").get<std::vector<std::string>>();
    } else if (enc.kind_ != EncoderKind::Hash) {
        for (const auto& [level, value] : j.at("mapping").items()) {
            enc.mapping_[level] = value.get<double>();
        }
    }
    return enc;
}

FittedEncoder fit_mean_encoding(const Column& col, const std::vector<int>& target) {
    require_categorical(col);
    require_rows(col, target);
    FittedEncoder enc;
    enc.kind_ = EncoderKind::Mean;
    enc.column_ = col.name;
    enc.prior_ = mean_target(target);
    LevelStats stats = level_stats(col, target);
    for (int32_t code = 0; code < col.dict.size(); ++code) {
        size_t c = static_cast<size_t>(code);
        enc.mapping_[col.dict.level(code)] =
            stats.count[c] > 0 ? stats.sum[c] / static_cast<double>(stats.count[c])
                               : enc.prior_;
    }
    return enc;
}

FittedEncoder fit_eb_encoding(const Column& col, const std::vector<int>& target,
                              const EncoderParams& params) {
    params.validate();
    require_categorical(col);
    require_rows(col, target);
    FittedEncoder enc;
    enc.kind_ = EncoderKind::EB;
    enc.column_ = col.name;
    enc.params_ = params;
    enc.prior_ = mean_target(target);
    LevelStats stats = level_stats(col, target);
    for (int32_t code = 0; code < col.dict.size(); ++code) {
        size_t c = static_cast<size_t>(code);
        if (stats.count[c] == 0) {
            enc.mapping_[col.dict.level(code)] = enc.prior_;
            continue;
        }
        double level_mean = stats.sum[c] / static_cast<double>(stats.count[c]);
        double lambda = shrinkage_lambda(static_cast<double>(stats.count[c]),
                                         params.l, params.sigma);
        enc.mapping_[col.dict.level(code)] =
            lambda * level_mean + (1.0 - lambda) * enc.prior_;
    }
    return enc;
}

OrderedFit fit_ordered_encoding(const Column& col, const std::vector<int>& target,
                                const EncoderParams& params, const PermutationPlan& plan) {
    params.validate();
    require_categorical(col);
    require_rows(col, target);
    if (plan.permutations.empty()) throw ParamError("permutation plan is empty");
    for (const auto& perm : plan.permutations) {
        if (perm.size() != target.size()) {
            throw ShapeError("permutation length does not match row count");
        }
    }

    const double mu = mean_target(target);
    const double lambda = params.lambda_fixed;
    const size_t m = target.size();
    const size_t k = static_cast<size_t>(col.dict.size());

    // Each row sees only rows before it in the permutation; an empty prefix
    // for its level contributes the prior.
    std::vector<double> acc(m, 0.0);
    std::vector<double> prefix_sum(k);
    std::vector<int64_t> prefix_count(k);
    for (const auto& perm : plan.permutations) {
        std::fill(prefix_sum.begin(), prefix_sum.end(), 0.0);
        std::fill(prefix_count.begin(), prefix_count.end(), 0);
        for (uint32_t row : perm) {
            size_t code = static_cast<size_t>(col.codes[row]);
            double prefix_mean =
                prefix_count[code] > 0
                    ? prefix_sum[code] / static_cast<double>(prefix_count[code])
                    : mu;
            acc[row] += lambda * prefix_mean + (1.0 - lambda) * mu;
            prefix_sum[code] += target[row];
            ++prefix_count[code];
        }
    }
    const double inv = 1.0 / static_cast<double>(plan.permutations.size());
    for (double& v : acc) v *= inv;

    OrderedFit fit;
    fit.train_values = std::move(acc);
    fit.encoder.kind_ = EncoderKind::Ordered;
    fit.encoder.column_ = col.name;
    fit.encoder.params_ = params;
    fit.encoder.prior_ = mu;
    // At inference every training row precedes the query, so the mapping uses
    // full-data level means.
    LevelStats stats = level_stats(col, target);
    for (int32_t code = 0; code < col.dict.size(); ++code) {
        size_t c = static_cast<size_t>(code);
        double level_mean = stats.count[c] > 0
                                ? stats.sum[c] / static_cast<double>(stats.count[c])
                                : mu;
        fit.encoder.mapping_[col.dict.level(code)] =
            lambda * level_mean + (1.0 - lambda) * mu;
    }
    return fit;
}

OrderedFit fit_ordered_encoding(const Column& col, const std::vector<int>& target,
                                const EncoderParams& params) {
    params.validate();
    require_rows(col, target);
    return fit_ordered_encoding(
        col, target, params,
        PermutationPlan::make(target.size(), params.n_permutations, params.seed));
}

FittedEncoder one_hot_encode(const Column& col, const EncoderParams& params) {
    params.validate();
    require_categorical(col);
    if (col.dict.size() > params.one_hot_max_cardinality) {
        throw CardinalityError("column '" + col.name + "' has " +
                               std::to_string(col.dict.size()) +
                               " levels, above the one-hot limit of " +
                               std::to_string(params.one_hot_max_cardinality) +
                               "; use hash or target encodings instead");
    }
    FittedEncoder enc;
    enc.kind_ = EncoderKind::OneHot;
    enc.column_ = col.name;
    enc.params_ = params;
    enc.levels_ = col.dict.levels();
    return enc;
}

FittedEncoder hash_encode(const Column& col, const EncoderParams& params) {
    params.validate();
    require_categorical(col);
    FittedEncoder enc;
    enc.kind_ = EncoderKind::Hash;
    enc.column_ = col.name;
    enc.params_ = params;
    return enc;
}

namespace {

const Column& categorical_column(const DesignMatrix& dm, const std::string& name) {
    const Column& col = dm.column(name);
    require_categorical(col);
    return col;
}

}  // namespace

FittedEncoder fit_mean_encoding(const DesignMatrix& dm, const std::string& col) {
    return fit_mean_encoding(categorical_column(dm, col), dm.target());
}

FittedEncoder fit_eb_encoding(const DesignMatrix& dm, const std::string& col,
                              const EncoderParams& params) {
    return fit_eb_encoding(categorical_column(dm, col), dm.target(), params);
}

OrderedFit fit_ordered_encoding(const DesignMatrix& dm, const std::string& col,
                                const EncoderParams& params) {
    return fit_ordered_encoding(categorical_column(dm, col), dm.target(), params);
}

FittedEncoder one_hot_encode(const DesignMatrix& dm, const std::string& col,
                             const EncoderParams& params) {
    return one_hot_encode(categorical_column(dm, col), params);
}

FittedEncoder hash_encode(const DesignMatrix& dm, const std::string& col,
                          const EncoderParams& params) {
    return hash_encode(categorical_column(dm, col), params);
}

std::vector<Column> cross_categoricals(const DesignMatrix& dm,
                                       const std::vector<std::string>& cols,
                                       int max_order) {
    if (max_order < 2 || static_cast<size_t>(max_order) > cols.size()) {
        throw ParamError("max_order must lie in [2, number of columns]");
    }
    std::vector<const Column*> sources;
    sources.reserve(cols.size());
    for (const auto& name : cols) {
        const Column& col = dm.column(name);
        if (col.kind != ColumnKind::Categorical) {
            throw ColumnError("cannot cross numeric column '" + name + "'");
        }
        for (const Column* seen : sources) {
            if (seen->name == name) {
                throw ColumnError("column '" + name + "' listed twice in cross set");
            }
        }
        sources.push_back(&col);
    }

    const size_t rows = dm.row_count();
    std::vector<Column> out;
    // Subsets in lexicographic index order, grouped by size.
    for (int order = 2; order <= max_order; ++order) {
        std::vector<size_t> pick(static_cast<size_t>(order));
        for (int i = 0; i < order; ++i) pick[static_cast<size_t>(i)] = static_cast<size_t>(i);
        while (true) {
            Column crossed;
            crossed.kind = ColumnKind::Categorical;
            for (size_t i = 0; i < pick.size(); ++i) {
                if (i) crossed.name += '|';
                crossed.name += sources[pick[i]]->name;
            }
            crossed.codes.reserve(rows);
            std::string tuple;
            for (size_t r = 0; r < rows; ++r) {
                tuple.clear();
                for (size_t i = 0; i < pick.size(); ++i) {
                    if (i) tuple.push_back(kCrossSeparator);
                    tuple += sources[pick[i]]->level_at(r);
                }
                crossed.codes.push_back(crossed.dict.intern(tuple));
            }
            out.push_back(std::move(crossed));

            // Advance the combination.
            int i = order - 1;
            while (i >= 0 &&
                   pick[static_cast<size_t>(i)] == cols.size() - static_cast<size_t>(order - i)) {
                --i;
            }
            if (i < 0) break;
            ++pick[static_cast<size_t>(i)];
            for (int j = i + 1; j < order; ++j) {
                pick[static_cast<size_t>(j)] = pick[static_cast<size_t>(j - 1)] + 1;
            }
        }
    }
    return out;
}

nlohmann::json LeakageReport::to_json() const {
    return nlohmann::json{{"train_auc_naive", train_auc_naive},
                          {"holdout_auc_naive", holdout_auc_naive},
                          {"train_auc_ordered", train_auc_ordered},
                          {"holdout_auc_ordered", holdout_auc_ordered}};
}

LeakageReport leakage_demo(int64_t rows, uint64_t seed) {
    if (rows < 200 || rows % 2 != 0) {
        throw ParamError("leakage demo needs an even row count of at least 200");
    }
    const size_t m = static_cast<size_t>(rows);
    const size_t half = m / 2;

    // Unique-per-row id and an independent coin-flip target: any fit the
    // encoder shows on train cannot generalize.
    Rng rng(seed);
    std::vector<std::string> ids(m);
    std::vector<int> y(m);
    for (size_t i = 0; i < m; ++i) {
        ids[i] = "id_" + std::to_string(i);
        y[i] = rng.uniform() < 0.5 ? 1 : 0;
    }

    Column train_col;
    train_col.name = "id";
    train_col.kind = ColumnKind::Categorical;
    std::vector<int> train_y(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(half));
    std::vector<std::string> holdout_ids(ids.begin() + static_cast<std::ptrdiff_t>(half), ids.end());
    std::vector<int> holdout_y(y.begin() + static_cast<std::ptrdiff_t>(half), y.end());
    for (size_t i = 0; i < half; ++i) train_col.codes.push_back(train_col.dict.intern(ids[i]));

    FittedEncoder naive = fit_mean_encoding(train_col, train_y);
    std::vector<std::string> train_ids(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(half));

    EncoderParams params;
    params.lambda_fixed = 0.1;
    params.n_permutations = 4;
    params.seed = seed;
    OrderedFit ordered = fit_ordered_encoding(train_col, train_y, params);

    LeakageReport report;
    report.train_auc_naive = auc(naive.transform(train_ids), train_y);
    report.holdout_auc_naive = auc(naive.transform(holdout_ids), holdout_y);
    report.train_auc_ordered = auc(ordered.train_values, train_y);
    report.holdout_auc_ordered = auc(ordered.encoder.transform(holdout_ids), holdout_y);
    return report;
}

}  // namespace chatboost
