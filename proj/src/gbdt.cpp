#include "chatboost/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "chatboost/error.hpp"
#include "chatboost/io.hpp"
#include "chatboost/metrics.hpp"

namespace chatboost {

namespace {

constexpr double kMinGain = 1e-12;

double leaf_score(double g, double h, double l2) { return g * g / (h + l2); }

double split_gain(double gl, double hl, double gr, double hr, double l2) {
    return leaf_score(gl, hl, l2) + leaf_score(gr, hr, l2) -
           leaf_score(gl + gr, hl + hr, l2);
}

// Stateless per-candidate noise so the scan order never matters.
double split_noise(uint64_t tree_seed, uint64_t feature, uint64_t position) {
    uint64_t key = splitmix64(tree_seed ^ splitmix64((feature + 1) * 0x9e3779b97f4a7c15ULL) ^
                              (position + 1) * 0xbf58476d1ce4e5b9ULL);
    return normal_from_hash(key);
}

}  // namespace

void BoostParams::validate() const {
    if (!(learning_rate > 0.0)) throw ParamError("learning_rate must be > 0");
    if (depth < 0) throw ParamError("depth must be >= 0");
    if (l2_leaf_reg < 0.0) throw ParamError("l2_leaf_reg must be >= 0");
    if (random_strength < 0.0) throw ParamError("random_strength must be >= 0");
    if (od_wait < 1) throw ParamError("od_wait must be >= 1");
    if (max_iterations < 1) throw ParamError("max_iterations must be >= 1");
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw ParamError("threshold must lie strictly inside (0, 1)");
    }
    if (max_ctr_complexity < 1) throw ParamError("max_ctr_complexity must be >= 1");
    encoder.validate();
}

nlohmann::json BoostParams::to_json() const {
    return nlohmann::json{{"learning_rate", learning_rate},
                          {"depth", depth},
                          {"l2_leaf_reg", l2_leaf_reg},
                          {"random_strength", random_strength},
                          {"od_wait", od_wait},
                          {"use_best_model", use_best_model},
                          {"max_iterations", max_iterations},
                          {"threshold", threshold},
                          {"max_ctr_complexity", max_ctr_complexity},
                          {"seed", seed},
                          {"exact_categorical_splits", exact_categorical_splits},
                          {"encoder", encoder.to_json()}};
}

BoostParams BoostParams::from_json(const nlohmann::json& j) {
    BoostParams p;
    p.learning_rate = j.at("learning_rate").get<double>();
    p.depth = j.at("depth").get<int>();
    p.l2_leaf_reg = j.at("l2_leaf_reg").get<double>();
    p.random_strength = j.at("random_strength").get<double>();
    p.od_wait = j.at("od_wait").get<int>();
    p.use_best_model = j.at("use_best_model").get<bool>();
    p.max_iterations = j.at("max_iterations").get<int>();
    p.threshold = j.at("threshold").get<double>();
    p.max_ctr_complexity = j.at("max_ctr_complexity").get<int>();
    p.seed = j.at("seed").get<uint64_t>();
    p.exact_categorical_splits = j.at("exact_categorical_splits").get<bool>();
    p.encoder = EncoderParams::from_json(j.at("encoder"));
    p.validate();
    return p;
}

Gradients logistic_gradients(const std::vector<double>& margins,
                             const std::vector<int>& targets) {
    if (margins.size() != targets.size()) {
        throw ShapeError("margins and targets differ in length");
    }
    Gradients out;
    out.grad.resize(margins.size());
    out.hess.resize(margins.size());
    for (size_t i = 0; i < margins.size(); ++i) {
        double p = sigmoid(margins[i]);
        out.grad[i] = p - static_cast<double>(targets[i]);
        out.hess[i] = p * (1.0 - p);
    }
    return out;
}

SplitCandidate best_numeric_split(const std::vector<double>& values,
                                  const std::vector<double>& grad,
                                  const std::vector<double>& hess,
                                  double l2_leaf_reg, double random_strength,
                                  Rng& rng) {
    if (values.size() != grad.size() || values.size() != hess.size()) {
        throw ShapeError("values, gradients and hessians differ in length");
    }
    SplitCandidate best;
    const size_t m = values.size();
    if (m < 2) return best;

    std::vector<uint32_t> order(m);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](uint32_t a, uint32_t b) { return values[a] < values[b]; });

    double total_g = 0.0, total_h = 0.0;
    for (size_t i = 0; i < m; ++i) {
        total_g += grad[i];
        total_h += hess[i];
    }

    double best_score = -std::numeric_limits<double>::infinity();
    double cum_g = 0.0, cum_h = 0.0;
    for (size_t pos = 0; pos < m; ++pos) {
        uint32_t r = order[pos];
        if (pos > 0 && values[r] > values[order[pos - 1]]) {
            double gain = split_gain(cum_g, cum_h, total_g - cum_g, total_h - cum_h,
                                     l2_leaf_reg);
            if (gain > kMinGain) {
                double score = gain;
                if (random_strength > 0.0) {
                    score = gain * (1.0 + random_strength * rng.normal());
                }
                if (!best.valid || score > best_score) {
                    best.valid = true;
                    best.feature = 0;
                    best.categorical = false;
                    best.threshold = 0.5 * (values[order[pos - 1]] + values[r]);
                    best.gain = gain;
                    best_score = score;
                }
            }
        }
        cum_g += grad[r];
        cum_h += hess[r];
    }
    return best;
}

SplitCandidate optimal_categorical_split(const std::vector<double>& level_grad,
                                         const std::vector<double>& level_hess,
                                         double l2_leaf_reg) {
    if (level_grad.size() != level_hess.size()) {
        throw ShapeError("level gradient and hessian arrays differ in length");
    }
    SplitCandidate best;
    const size_t k = level_grad.size();
    if (k < 2) return best;

    std::vector<uint32_t> active;
    for (size_t i = 0; i < k; ++i) {
        if (level_hess[i] > 0.0) active.push_back(static_cast<uint32_t>(i));
        else if (level_hess[i] < 0.0) throw ParamError("level hessians must be >= 0");
    }
    if (active.size() < 2) return best;

    std::stable_sort(active.begin(), active.end(), [&](uint32_t a, uint32_t b) {
        return level_grad[a] / level_hess[a] < level_grad[b] / level_hess[b];
    });

    double total_g = 0.0, total_h = 0.0;
    for (uint32_t i : active) {
        total_g += level_grad[i];
        total_h += level_hess[i];
    }

    // Scan the prefix partitions of the ratio order; the optimum over all
    // bipartitions is always one of them.
    size_t best_prefix = 0;
    double best_scan_gain = -std::numeric_limits<double>::infinity();
    double cum_g = 0.0, cum_h = 0.0;
    for (size_t p = 1; p < active.size(); ++p) {
        cum_g += level_grad[active[p - 1]];
        cum_h += level_hess[active[p - 1]];
        double gain = split_gain(cum_g, cum_h, total_g - cum_g, total_h - cum_h,
                                 l2_leaf_reg);
        if (gain > best_scan_gain) {
            best_scan_gain = gain;
            best_prefix = p;
        }
    }
    if (best_prefix == 0) return best;

    std::vector<int32_t> left(active.begin(),
                              active.begin() + static_cast<std::ptrdiff_t>(best_prefix));
    std::sort(left.begin(), left.end());

    // Recompute the winner's stats in level-index order so the reported gain
    // is independent of the scan order.
    double gl = 0.0, hl = 0.0, gr = 0.0, hr = 0.0;
    {
        std::vector<bool> in_left(k, false);
        for (int32_t c : left) in_left[static_cast<size_t>(c)] = true;
        for (size_t i = 0; i < k; ++i) {
            if (in_left[i]) {
                gl += level_grad[i];
                hl += level_hess[i];
            } else {
                gr += level_grad[i];
                hr += level_hess[i];
            }
        }
    }
    double gain = split_gain(gl, hl, gr, hr, l2_leaf_reg);
    if (gain <= kMinGain) return best;

    best.valid = true;
    best.feature = 0;
    best.categorical = true;
    best.left_levels = std::move(left);
    best.gain = gain;
    return best;
}

double Tree::predict_row(const EncodedMatrix& X, size_t row) const {
    size_t node = 0;
    while (!nodes[node].is_leaf()) {
        const TreeNode& n = nodes[node];
        const EncodedFeature& f = X.features[static_cast<size_t>(n.feature)];
        bool go_left;
        if (n.categorical) {
            int32_t code = f.codes[row];
            go_left = code < f.n_levels &&
                      std::binary_search(n.left_levels.begin(), n.left_levels.end(), code);
        } else {
            go_left = f.values[row] < n.threshold;
        }
        node = static_cast<size_t>(go_left ? n.left : n.right);
    }
    return nodes[node].value;
}

nlohmann::json Tree::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& n : nodes) {
        nlohmann::json jn;
        if (n.is_leaf()) {
            jn["value"] = n.value;
        } else {
            jn["feature"] = n.feature;
            jn["gain"] = n.gain;
            jn["left"] = n.left;
            jn["right"] = n.right;
            if (n.categorical) {
                jn["left_levels"] = n.left_levels;
            } else {
                jn["threshold"] = n.threshold;
            }
        }
        arr.push_back(std::move(jn));
    }
    return arr;
}

Tree Tree::from_json(const nlohmann::json& j) {
    Tree tree;
    for (const auto& jn : j) {
        TreeNode n;
        if (jn.contains("value")) {
            n.value = jn.at("value").get<double>();
        } else {
            n.feature = jn.at("feature").get<int>();
            n.gain = jn.at("gain").get<double>();
            n.left = jn.at("left").get<int>();
            n.right = jn.at("right").get<int>();
            if (jn.contains("left_levels")) {
                n.categorical = true;
                n.left_levels = jn.at("left_levels").get<std::vector<int32_t>>();
            } else {
                n.threshold = jn.at("threshold").get<double>();
            }
        }
        tree.nodes.push_back(std::move(n));
    }
    return tree;
}

namespace {

struct NodeStats {
    double g = 0.0;
    double h = 0.0;
    int64_t count = 0;
};

struct BestSplit {
    bool valid = false;
    int feature = -1;
    bool categorical = false;
    double threshold = 0.0;
    std::vector<int32_t> left_levels;
    double gain = 0.0;
    double score = -std::numeric_limits<double>::infinity();
    double left_g = 0.0;
    double left_h = 0.0;
    int64_t left_count = 0;
};

std::vector<std::vector<uint32_t>> numeric_argsorts(const EncodedMatrix& X) {
    std::vector<std::vector<uint32_t>> orders(X.features.size());
    for (size_t f = 0; f < X.features.size(); ++f) {
        const EncodedFeature& feat = X.features[f];
        if (feat.categorical) continue;
        auto& order = orders[f];
        order.resize(X.rows);
        std::iota(order.begin(), order.end(), 0u);
        std::stable_sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
            return feat.values[a] < feat.values[b];
        });
    }
    return orders;
}

Tree build_tree_presorted(const EncodedMatrix& X, const std::vector<double>& grad,
                          const std::vector<double>& hess, const BoostParams& params,
                          uint64_t tree_seed,
                          const std::vector<std::vector<uint32_t>>& argsorts) {
    const size_t m = X.rows;
    if (m == 0) throw EmptyDataError("cannot build a tree on zero rows");
    if (grad.size() != m || hess.size() != m) {
        throw ShapeError("gradient vectors do not match the matrix row count");
    }

    Tree tree;
    std::vector<NodeStats> stats;
    {
        NodeStats root;
        for (size_t i = 0; i < m; ++i) {
            root.g += grad[i];
            root.h += hess[i];
        }
        root.count = static_cast<int64_t>(m);
        tree.nodes.emplace_back();
        stats.push_back(root);
    }

    std::vector<int32_t> row_node(m, 0);
    std::vector<int> frontier{0};

    for (int level = 0; level < params.depth && !frontier.empty(); ++level) {
        std::vector<int32_t> slot_of(tree.nodes.size(), -1);
        for (size_t s = 0; s < frontier.size(); ++s) {
            slot_of[static_cast<size_t>(frontier[s])] = static_cast<int32_t>(s);
        }
        std::vector<BestSplit> best(frontier.size());

        for (size_t f = 0; f < X.features.size(); ++f) {
            const EncodedFeature& feat = X.features[f];
            if (!feat.categorical) {
                std::vector<double> cum_g(frontier.size(), 0.0);
                std::vector<double> cum_h(frontier.size(), 0.0);
                std::vector<int64_t> cnt(frontier.size(), 0);
                std::vector<double> last(frontier.size(), 0.0);
                const auto& order = argsorts[f];
                for (size_t pos = 0; pos < m; ++pos) {
                    uint32_t r = order[pos];
                    int32_t s = slot_of[static_cast<size_t>(row_node[r])];
                    if (s < 0) continue;
                    size_t si = static_cast<size_t>(s);
                    double v = feat.values[r];
                    if (cnt[si] > 0 && v > last[si]) {
                        const NodeStats& ns = stats[static_cast<size_t>(frontier[si])];
                        double gain = split_gain(cum_g[si], cum_h[si], ns.g - cum_g[si],
                                                 ns.h - cum_h[si], params.l2_leaf_reg);
                        if (gain > kMinGain) {
                            double score = gain;
                            if (params.random_strength > 0.0) {
                                score = gain * (1.0 + params.random_strength *
                                                          split_noise(tree_seed, f, pos));
                            }
                            BestSplit& b = best[si];
                            if (!b.valid || score > b.score) {
                                b.valid = true;
                                b.feature = static_cast<int>(f);
                                b.categorical = false;
                                b.threshold = 0.5 * (last[si] + v);
                                b.gain = gain;
                                b.score = score;
                                b.left_g = cum_g[si];
                                b.left_h = cum_h[si];
                                b.left_count = cnt[si];
                                b.left_levels.clear();
                            }
                        }
                    }
                    cum_g[si] += grad[r];
                    cum_h[si] += hess[r];
                    last[si] = v;
                    ++cnt[si];
                }
            } else {
                size_t k = static_cast<size_t>(feat.n_levels);
                if (k < 2) continue;
                std::vector<double> level_g(frontier.size() * k, 0.0);
                std::vector<double> level_h(frontier.size() * k, 0.0);
                std::vector<int64_t> level_n(frontier.size() * k, 0);
                for (size_t r = 0; r < m; ++r) {
                    int32_t s = slot_of[static_cast<size_t>(row_node[r])];
                    if (s < 0) continue;
                    size_t idx = static_cast<size_t>(s) * k + static_cast<size_t>(feat.codes[r]);
                    level_g[idx] += grad[r];
                    level_h[idx] += hess[r];
                    ++level_n[idx];
                }
                std::vector<double> lg(k), lh(k);
                for (size_t si = 0; si < frontier.size(); ++si) {
                    std::copy_n(level_g.begin() + static_cast<std::ptrdiff_t>(si * k), k, lg.begin());
                    std::copy_n(level_h.begin() + static_cast<std::ptrdiff_t>(si * k), k, lh.begin());
                    SplitCandidate cand = optimal_categorical_split(lg, lh, params.l2_leaf_reg);
                    if (!cand.valid) continue;
                    BestSplit& b = best[si];
                    if (!b.valid || cand.gain > b.score) {
                        b.valid = true;
                        b.feature = static_cast<int>(f);
                        b.categorical = true;
                        b.left_levels = cand.left_levels;
                        b.gain = cand.gain;
                        b.score = cand.gain;
                        b.left_g = 0.0;
                        b.left_h = 0.0;
                        b.left_count = 0;
                        for (int32_t code : b.left_levels) {
                            size_t idx = si * k + static_cast<size_t>(code);
                            b.left_g += level_g[idx];
                            b.left_h += level_h[idx];
                            b.left_count += level_n[idx];
                        }
                    }
                }
            }
        }

        std::vector<int> next_frontier;
        for (size_t si = 0; si < frontier.size(); ++si) {
            BestSplit& b = best[si];
            if (!b.valid || b.left_count == 0 ||
                b.left_count == stats[static_cast<size_t>(frontier[si])].count) {
                continue;  // node stays a leaf
            }
            int node_id = frontier[si];
            int left_id = static_cast<int>(tree.nodes.size());
            int right_id = left_id + 1;

            TreeNode& node = tree.nodes[static_cast<size_t>(node_id)];
            node.feature = b.feature;
            node.categorical = b.categorical;
            node.threshold = b.threshold;
            node.left_levels = std::move(b.left_levels);
            node.left = left_id;
            node.right = right_id;
            node.gain = b.gain;

            const NodeStats parent = stats[static_cast<size_t>(node_id)];
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();
            stats.push_back(NodeStats{b.left_g, b.left_h, b.left_count});
            stats.push_back(NodeStats{parent.g - b.left_g, parent.h - b.left_h,
                                      parent.count - b.left_count});
            next_frontier.push_back(left_id);
            next_frontier.push_back(right_id);
        }

        if (next_frontier.empty()) break;
        for (size_t r = 0; r < m; ++r) {
            const TreeNode& n = tree.nodes[static_cast<size_t>(row_node[r])];
            if (n.is_leaf()) continue;
            const EncodedFeature& feat = X.features[static_cast<size_t>(n.feature)];
            bool go_left;
            if (n.categorical) {
                go_left = std::binary_search(n.left_levels.begin(), n.left_levels.end(),
                                             feat.codes[r]);
            } else {
                go_left = feat.values[r] < n.threshold;
            }
            row_node[r] = static_cast<int32_t>(go_left ? n.left : n.right);
        }
        frontier = std::move(next_frontier);
    }

    for (size_t i = 0; i < tree.nodes.size(); ++i) {
        if (tree.nodes[i].is_leaf()) {
            tree.nodes[i].value = -stats[i].g / (stats[i].h + params.l2_leaf_reg);
        }
    }
    return tree;
}

}  // namespace

Tree build_tree(const EncodedMatrix& X, const std::vector<double>& grad,
                const std::vector<double>& hess, const BoostParams& params,
                uint64_t tree_seed) {
    return build_tree_presorted(X, grad, hess, params, tree_seed, numeric_argsorts(X));
}

namespace {

std::string slot_kind_name(FeatureSlot::Kind kind) {
    switch (kind) {
        case FeatureSlot::Kind::Numeric: return "numeric";
        case FeatureSlot::Kind::Encoded: return "encoded";
        case FeatureSlot::Kind::OneHot: return "one_hot";
        case FeatureSlot::Kind::Exact: return "exact";
    }
    throw ParamError("unknown slot kind");
}

FeatureSlot::Kind slot_kind_from_name(const std::string& name) {
    if (name == "numeric") return FeatureSlot::Kind::Numeric;
    if (name == "encoded") return FeatureSlot::Kind::Encoded;
    if (name == "one_hot") return FeatureSlot::Kind::OneHot;
    if (name == "exact") return FeatureSlot::Kind::Exact;
    throw ParseError("unknown slot kind '" + name + "'");
}

std::vector<std::string> split_cross_name(const std::string& name) {
    std::vector<std::string> parts;
    std::string part;
    for (char c : name) {
        if (c == '|') {
            parts.push_back(part);
            part.clear();
        } else {
            part.push_back(c);
        }
    }
    parts.push_back(part);
    return parts;
}

std::vector<std::string> column_strings(const Column& col) {
    std::vector<std::string> out;
    out.reserve(col.codes.size());
    for (size_t r = 0; r < col.codes.size(); ++r) out.push_back(col.level_at(r));
    return out;
}

std::vector<std::string> composed_strings(const DesignMatrix& dm,
                                          const std::vector<std::string>& sources) {
    std::vector<const Column*> cols;
    cols.reserve(sources.size());
    for (const auto& name : sources) cols.push_back(&dm.column(name));
    std::vector<std::string> out;
    out.reserve(dm.row_count());
    for (size_t r = 0; r < dm.row_count(); ++r) {
        std::string tuple;
        for (size_t i = 0; i < cols.size(); ++i) {
            if (i) tuple.push_back(kCrossSeparator);
            tuple += cols[i]->level_at(r);
        }
        out.push_back(std::move(tuple));
    }
    return out;
}

}  // namespace

std::pair<FeaturePipeline, EncodedMatrix> FeaturePipeline::fit(const DesignMatrix& train,
                                                               const BoostParams& params) {
    params.validate();
    if (train.row_count() == 0) throw EmptyDataError("cannot fit a pipeline on an empty matrix");
    if (train.target().size() != train.row_count()) {
        throw ShapeError("training matrix has no target vector");
    }

    FeaturePipeline pipe;
    EncodedMatrix X;
    X.rows = train.row_count();
    const std::vector<int>& y = train.target();

    std::vector<std::string> cat_names;
    for (const auto& col : train.columns()) {
        pipe.schema.emplace_back(col.name, col.kind);
        if (col.kind == ColumnKind::Categorical) cat_names.push_back(col.name);
    }

    auto add_categorical = [&](const Column& col, std::vector<std::string> sources) {
        FeatureSlot slot;
        slot.name = col.name;
        slot.sources = std::move(sources);
        if (params.exact_categorical_splits) {
            slot.kind = FeatureSlot::Kind::Exact;
            slot.levels = col.dict.levels();
            EncodedFeature feat;
            feat.name = col.name;
            feat.categorical = true;
            feat.codes = col.codes;
            feat.n_levels = col.dict.size();
            X.features.push_back(std::move(feat));
        } else if (col.dict.size() <= params.encoder.one_hot_max_cardinality) {
            slot.kind = FeatureSlot::Kind::OneHot;
            EncoderParams ep = params.encoder;
            ep.seed = hash_level(col.name, params.seed);
            slot.encoder = one_hot_encode(col, ep);
            auto block = slot.encoder.transform_block(column_strings(col));
            for (size_t i = 0; i < block.columns.size(); ++i) {
                EncodedFeature feat;
                feat.name = block.names[i];
                feat.values = std::move(block.columns[i]);
                X.features.push_back(std::move(feat));
            }
        } else {
            slot.kind = FeatureSlot::Kind::Encoded;
            EncoderParams ep = params.encoder;
            ep.seed = hash_level(col.name, params.seed);
            OrderedFit fit = fit_ordered_encoding(col, y, ep);
            slot.encoder = std::move(fit.encoder);
            EncodedFeature feat;
            feat.name = col.name;
            feat.values = std::move(fit.train_values);
            X.features.push_back(std::move(feat));
        }
        pipe.slots.push_back(std::move(slot));
    };

    for (const auto& col : train.columns()) {
        if (col.kind == ColumnKind::Numeric) {
            FeatureSlot slot;
            slot.kind = FeatureSlot::Kind::Numeric;
            slot.name = col.name;
            slot.sources = {col.name};
            pipe.slots.push_back(std::move(slot));
            EncodedFeature feat;
            feat.name = col.name;
            feat.values = col.values;
            X.features.push_back(std::move(feat));
        } else {
            add_categorical(col, {col.name});
        }
    }
    if (params.max_ctr_complexity >= 2 && cat_names.size() >= 2) {
        int order = std::min<int>(params.max_ctr_complexity,
                                  static_cast<int>(cat_names.size()));
        for (auto& crossed : cross_categoricals(train, cat_names, order)) {
            add_categorical(crossed, split_cross_name(crossed.name));
        }
    }
    return {std::move(pipe), std::move(X)};
}

EncodedMatrix FeaturePipeline::apply(const DesignMatrix& dm) const {
    for (const auto& [name, kind] : schema) {
        if (!dm.has_column(name)) {
            throw ShapeError("matrix is missing column '" + name + "'");
        }
        if (dm.column(name).kind != kind) {
            throw ShapeError("column '" + name + "' has the wrong kind");
        }
    }
    EncodedMatrix X;
    X.rows = dm.row_count();
    for (const auto& slot : slots) {
        switch (slot.kind) {
            case FeatureSlot::Kind::Numeric: {
                EncodedFeature feat;
                feat.name = slot.name;
                feat.values = dm.column(slot.name).values;
                X.features.push_back(std::move(feat));
                break;
            }
            case FeatureSlot::Kind::Encoded: {
                EncodedFeature feat;
                feat.name = slot.name;
                feat.values = slot.encoder.transform(composed_strings(dm, slot.sources));
                X.features.push_back(std::move(feat));
                break;
            }
            case FeatureSlot::Kind::OneHot: {
                auto block = slot.encoder.transform_block(composed_strings(dm, slot.sources));
                for (size_t i = 0; i < block.columns.size(); ++i) {
                    EncodedFeature feat;
                    feat.name = block.names[i];
                    feat.values = std::move(block.columns[i]);
                    X.features.push_back(std::move(feat));
                }
                break;
            }
            case FeatureSlot::Kind::Exact: {
                EncodedFeature feat;
                feat.name = slot.name;
                feat.categorical = true;
                feat.n_levels = static_cast<int32_t>(slot.levels.size());
                std::unordered_map<std::string, int32_t> index;
                for (size_t i = 0; i < slot.levels.size(); ++i) {
                    index.emplace(slot.levels[i], static_cast<int32_t>(i));
                }
                auto strings = composed_strings(dm, slot.sources);
                feat.codes.reserve(strings.size());
                for (const auto& s : strings) {
                    auto it = index.find(s);
                    feat.codes.push_back(it == index.end() ? feat.n_levels : it->second);
                }
                X.features.push_back(std::move(feat));
                break;
            }
        }
    }
    return X;
}

nlohmann::json FeaturePipeline::to_json() const {
    nlohmann::json jslots = nlohmann::json::array();
    for (const auto& slot : slots) {
        nlohmann::json js;
        js["kind"] = slot_kind_name(slot.kind);
        js["name"] = slot.name;
        js["sources"] = slot.sources;
        if (slot.kind == FeatureSlot::Kind::Encoded || slot.kind == FeatureSlot::Kind::OneHot) {
            js["encoder"] = slot.encoder.to_json();
        }
        if (slot.kind == FeatureSlot::Kind::Exact) js["levels"] = slot.levels;
        jslots.push_back(std::move(js));
    }
    nlohmann::json jschema = nlohmann::json::array();
    for (const auto& [name, kind] : schema) {
        jschema.push_back(nlohmann::json{
            {"name", name},
            {"kind", kind == ColumnKind::Numeric ? "numeric" : "categorical"}});
    }
    return nlohmann::json{{"slots", jslots}, {"schema", jschema}};
}

FeaturePipeline FeaturePipeline::from_json(const nlohmann::json& j) {
    FeaturePipeline pipe;
    for (const auto& js : j.at("slots")) {
        FeatureSlot slot;
        slot.kind = slot_kind_from_name(js.at("kind").get<std::string>());
        slot.name = js.at("name").get<std::string>();
        slot.sources = js.at("sources").get<std::vector<std::string>>();
        if (slot.kind == FeatureSlot::Kind::Encoded || slot.kind == FeatureSlot::Kind::OneHot) {
            slot.encoder = FittedEncoder::from_json(js.at("encoder"));
        }
        if (slot.kind == FeatureSlot::Kind::Exact) {
            slot.levels = js.at("levels").get<std::vector<std::string>>();
        }
        pipe.slots.push_back(std::move(slot));
    }
    for (const auto& jc : j.at("schema")) {
        pipe.schema.emplace_back(jc.at("name").get<std::string>(),
                                 jc.at("kind").get<std::string>() == "numeric"
                                     ? ColumnKind::Numeric
                                     : ColumnKind::Categorical);
    }
    return pipe;
}

namespace {

std::vector<std::string> pipeline_feature_names(const FeaturePipeline& pipe) {
    std::vector<std::string> names;
    for (const auto& slot : pipe.slots) {
        if (slot.kind == FeatureSlot::Kind::OneHot) {
            for (const auto& level : slot.encoder.levels()) {
                names.push_back(slot.name + "=" + level);
            }
        } else {
            names.push_back(slot.name);
        }
    }
    return names;
}

void check_matching_schema(const DesignMatrix& a, const DesignMatrix& b) {
    if (a.column_count() != b.column_count()) {
        throw ShapeError("train and validation matrices have different column counts");
    }
    for (size_t i = 0; i < a.column_count(); ++i) {
        const Column& ca = a.columns()[i];
        const Column& cb = b.columns()[i];
        if (ca.name != cb.name || ca.kind != cb.kind) {
            throw ShapeError("train and validation schemas disagree at column '" +
                             ca.name + "'");
        }
    }
}

}  // namespace

BoostModel train(const DesignMatrix& train_dm, const DesignMatrix& valid_dm,
                 const BoostParams& params, TrainLog* log) {
    params.validate();
    if (train_dm.row_count() == 0) throw EmptyDataError("training matrix is empty");
    if (valid_dm.row_count() == 0) throw EmptyDataError("validation matrix is empty");
    check_matching_schema(train_dm, valid_dm);

    auto [pipeline, Xtr] = FeaturePipeline::fit(train_dm, params);
    EncodedMatrix Xva = pipeline.apply(valid_dm);
    const std::vector<int>& ytr = train_dm.target();
    const std::vector<int>& yva = valid_dm.target();

    BoostModel model;
    model.params = params;
    model.pipeline = std::move(pipeline);
    model.base_score = logit(train_dm.global_mean());

    auto argsorts = numeric_argsorts(Xtr);
    std::vector<double> margins_tr(Xtr.rows, model.base_score);
    std::vector<double> margins_va(Xva.rows, model.base_score);

    double best_loss = std::numeric_limits<double>::infinity();
    int best_iteration = 0;
    int patience = params.od_wait;
    bool early_stopped = false;

    for (int iter = 1; iter <= params.max_iterations; ++iter) {
        Gradients grads = logistic_gradients(margins_tr, ytr);
        uint64_t tree_seed = splitmix64(params.seed ^ (0xa24baed4963ee407ULL +
                                                       static_cast<uint64_t>(iter)));
        Tree tree = build_tree_presorted(Xtr, grads.grad, grads.hess, params, tree_seed,
                                         argsorts);
        for (size_t r = 0; r < Xtr.rows; ++r) {
            margins_tr[r] += params.learning_rate * tree.predict_row(Xtr, r);
        }
        for (size_t r = 0; r < Xva.rows; ++r) {
            margins_va[r] += params.learning_rate * tree.predict_row(Xva, r);
        }
        model.trees.push_back(std::move(tree));

        double valid_loss = logloss_from_margins(margins_va, yva);
        if (log) {
            log->train_loss.push_back(logloss_from_margins(margins_tr, ytr));
            log->valid_loss.push_back(valid_loss);
        }
        if (valid_loss < best_loss) {
            best_loss = valid_loss;
            best_iteration = iter;
            patience = params.od_wait;
        } else if (--patience == 0) {
            early_stopped = true;
            break;
        }
    }

    model.best_iteration = best_iteration;
    if (params.use_best_model) {
        model.trees.resize(static_cast<size_t>(best_iteration));
    }
    model.importance = feature_importance(model);
    if (log) log->early_stopped = early_stopped;
    return model;
}

std::vector<double> predict_margins(const BoostModel& model, const DesignMatrix& dm) {
    EncodedMatrix X = model.pipeline.apply(dm);
    std::vector<double> margins(X.rows, model.base_score);
    for (const auto& tree : model.trees) {
        for (size_t r = 0; r < X.rows; ++r) {
            margins[r] += model.params.learning_rate * tree.predict_row(X, r);
        }
    }
    return margins;
}

std::vector<double> predict(const BoostModel& model, const DesignMatrix& dm) {
    std::vector<double> out = predict_margins(model, dm);
    for (double& v : out) v = sigmoid(v);
    return out;
}

std::map<std::string, double> feature_importance(const BoostModel& model) {
    std::vector<std::string> names = pipeline_feature_names(model.pipeline);
    std::map<std::string, double> totals;
    double sum = 0.0;
    for (const auto& tree : model.trees) {
        for (const auto& node : tree.nodes) {
            if (node.is_leaf()) continue;
            totals[names[static_cast<size_t>(node.feature)]] += node.gain;
            sum += node.gain;
        }
    }
    if (sum <= 0.0) return {};
    for (auto& [name, value] : totals) value /= sum;
    return totals;
}

nlohmann::json BoostModel::to_json() const {
    nlohmann::json jtrees = nlohmann::json::array();
    for (const auto& tree : trees) jtrees.push_back(tree.to_json());
    nlohmann::json jimp = nlohmann::json::object();
    for (const auto& [name, value] : importance) jimp[name] = value;
    return nlohmann::json{{"version", 1},
                          {"params", params.to_json()},
                          {"pipeline", pipeline.to_json()},
                          {"base_score", base_score},
                          {"best_iteration", best_iteration},
                          {"importance", jimp},
                          {"trees", jtrees}};
}

BoostModel BoostModel::from_json(const nlohmann::json& j) {
    if (j.at("version").get<int>() != 1) {
        throw ParseError("unsupported model document version");
    }
    BoostModel model;
    model.params = BoostParams::from_json(j.at("params"));
    model.pipeline = FeaturePipeline::from_json(j.at("pipeline"));
    model.base_score = j.at("base_score").get<double>();
    model.best_iteration = j.at("best_iteration").get<int>();
    for (const auto& [name, value] : j.at("importance").items()) {
        model.importance[name] = value.get<double>();
    }
    for (const auto& jt : j.at("trees")) model.trees.push_back(Tree::from_json(jt));
    return model;
}

void save_model(const BoostModel& model, const std::string& path) {
    atomic_write_file(path, model.to_json().dump(2) + "\n");
}

BoostModel load_model(const std::string& path) {
    return BoostModel::from_json(nlohmann::json::parse(read_file(path)));
}

}  // namespace chatboost
