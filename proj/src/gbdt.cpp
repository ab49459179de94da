#include "etup/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include <omp.h>
#include <nlohmann/json.hpp>

#include "etup/error.hpp"
#include "etup/rng.hpp"
#include "etup/threads.hpp"

namespace etup::gbdt {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPosInf = std::numeric_limits<double>::infinity();

// Squared-error gain with unit hessians: variance reduction up to a
// constant. Shared by the histogram scan and the brute-force reference so
// both sides evaluate candidates with the exact same arithmetic.
inline double split_gain(double gl, double nl, double gr, double nr,
                         double g, double n) {
    return gl * gl / nl + gr * gr / nr - g * g / n;
}

}  // namespace

void TrainConfig::validate() const {
    auto fail = [](const std::string& msg) { throw_config(msg); };
    if (n_estimators < 0) fail("n_estimators must be >= 0");
    if (!(learning_rate > 0.0) || learning_rate > 1.0)
        fail("learning_rate must be in (0, 1]");
    if (num_leaves < 0 || num_leaves == 1)
        fail("num_leaves must be 0 (unlimited) or >= 2");
    if (max_depth < 0) fail("max_depth must be >= 0");
    if (min_child_weight < 1) fail("min_child_weight must be >= 1");
    if (min_gain < 0.0) fail("min_gain must be >= 0");
    if (!(colsample > 0.0) || colsample > 1.0)
        fail("colsample must be in (0, 1]");
    if (!(subsample > 0.0) || subsample > 1.0)
        fail("subsample must be in (0, 1]");
    if (max_bins < 2 || max_bins > 255) fail("max_bins must be in 2..255");
}

const char* mode_name(Mode m) {
    return m == Mode::boosted ? "boosted" : "bagged";
}
const char* growth_name(Growth g) {
    return g == Growth::leafwise ? "leafwise" : "depthwise";
}
Mode mode_from_name(const std::string& s) {
    if (s == "boosted") return Mode::boosted;
    if (s == "bagged") return Mode::bagged;
    throw_config("unknown mode '" + s + "'");
}
Growth growth_from_name(const std::string& s) {
    if (s == "leafwise") return Growth::leafwise;
    if (s == "depthwise") return Growth::depthwise;
    throw_config("unknown growth '" + s + "'");
}

int BinMap::bin_of(double v) const {
    if (std::isnan(v)) return nan_bin();
    auto it = std::lower_bound(edges.begin(), edges.end(), v);
    return int(it - edges.begin());
}

BinMap build_bins(std::span<const double> column, int max_bins) {
    if (max_bins < 2 || max_bins > 255)
        throw_config("max_bins must be in 2..255");

    std::vector<double> sorted;
    sorted.reserve(column.size());
    for (double v : column)
        if (!std::isnan(v)) sorted.push_back(v);
    std::sort(sorted.begin(), sorted.end());

    BinMap map;
    if (sorted.empty()) return map;  // all NaN: only the reserved bin

    std::vector<double> distinct;
    for (double v : sorted)
        if (distinct.empty() || v != distinct.back()) distinct.push_back(v);

    if (int(distinct.size()) <= max_bins) {
        for (std::size_t i = 0; i + 1 < distinct.size(); ++i)
            map.edges.push_back(std::midpoint(distinct[i], distinct[i + 1]));
        return map;
    }

    // Quantile cuts so bin populations stay near n / max_bins.
    std::size_t n = sorted.size();
    for (int i = 1; i < max_bins; ++i) {
        std::size_t pos = std::size_t(double(i) * double(n) / max_bins);
        if (pos == 0 || pos >= n) continue;
        double edge = std::midpoint(sorted[pos - 1], sorted[pos]);
        if (map.edges.empty() || edge > map.edges.back())
            map.edges.push_back(edge);
    }
    return map;
}

SplitCandidate best_split(std::span<const HistogramBin> hist,
                          const BinMap& bins, int min_child_weight,
                          double min_gain) {
    const int n_bins = bins.n_bins();
    if (hist.size() != std::size_t(n_bins) + 1)
        throw_invalid("histogram size does not match bin map");

    double total_g = 0.0;
    std::uint32_t total_n = 0;
    for (const auto& b : hist) {
        total_g += b.grad;
        total_n += b.count;
    }
    if (total_n == 0) return {};

    const double g_nan = hist[std::size_t(n_bins)].grad;
    const std::uint32_t n_nan = hist[std::size_t(n_bins)].count;

    SplitCandidate best;
    best.gain = kNegInf;

    double prefix_g = 0.0;
    std::uint32_t prefix_n = 0;
    for (int b = 0; b < n_bins; ++b) {
        prefix_g += hist[std::size_t(b)].grad;
        prefix_n += hist[std::size_t(b)].count;
        for (bool nan_left : {true, false}) {
            double gl = prefix_g + (nan_left ? g_nan : 0.0);
            double nl = double(prefix_n + (nan_left ? n_nan : 0u));
            double gr = total_g - gl;
            double nr = double(total_n) - nl;
            if (nl < min_child_weight || nr < min_child_weight) continue;
            double gain =
                split_gain(gl, nl, gr, nr, total_g, double(total_n));
            if (gain > best.gain) {
                best.valid = true;
                best.boundary = b;
                best.threshold =
                    b + 1 < n_bins ? bins.edges[std::size_t(b)] : kPosInf;
                best.nan_left = nan_left;
                best.gain = gain;
            }
        }
    }

    if (!best.valid || best.gain < min_gain) return {};
    return best;
}

SplitCandidate exact_best_split(std::span<const double> values,
                                std::span<const double> gradients,
                                int min_child_weight, double min_gain) {
    if (values.size() != gradients.size())
        throw_invalid("values/gradients length mismatch");

    // Per-distinct-value totals accumulated in row order.
    std::map<double, HistogramBin> groups;
    HistogramBin nan_group;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (std::isnan(values[i])) {
            nan_group.grad += gradients[i];
            nan_group.count += 1;
        } else {
            auto& g = groups[values[i]];
            g.grad += gradients[i];
            g.count += 1;
        }
    }
    if (groups.empty() && nan_group.count == 0) return {};

    // Value order first, NaN last: the same accumulation order the
    // histogram scan uses, so gains agree to the last bit.
    double total_g = 0.0;
    std::uint32_t total_n = 0;
    for (const auto& [v, g] : groups) {
        total_g += g.grad;
        total_n += g.count;
    }
    total_g += nan_group.grad;
    total_n += nan_group.count;

    std::vector<double> distinct;
    distinct.reserve(groups.size());
    for (const auto& [v, g] : groups) distinct.push_back(v);

    SplitCandidate best;
    best.gain = kNegInf;

    double prefix_g = 0.0;
    std::uint32_t prefix_n = 0;
    int b = 0;
    for (const auto& [v, grp] : groups) {
        prefix_g += grp.grad;
        prefix_n += grp.count;
        for (bool nan_left : {true, false}) {
            double gl = prefix_g + (nan_left ? nan_group.grad : 0.0);
            double nl = double(prefix_n + (nan_left ? nan_group.count : 0u));
            double gr = total_g - gl;
            double nr = double(total_n) - nl;
            if (nl < min_child_weight || nr < min_child_weight) continue;
            double gain =
                split_gain(gl, nl, gr, nr, total_g, double(total_n));
            if (gain > best.gain) {
                best.valid = true;
                best.boundary = b;
                best.threshold = std::size_t(b) + 1 < distinct.size()
                                     ? std::midpoint(distinct[std::size_t(b)],
                                                     distinct[std::size_t(b) + 1])
                                     : kPosInf;
                best.nan_left = nan_left;
                best.gain = gain;
            }
        }
        ++b;
    }

    if (!best.valid || best.gain < min_gain) return {};
    return best;
}

double Tree::predict(std::span<const double> x) const {
    int idx = 0;
    while (!nodes[std::size_t(idx)].is_leaf) {
        const TreeNode& n = nodes[std::size_t(idx)];
        double v = x[std::size_t(n.feature)];
        bool go_left = std::isnan(v) ? n.nan_left : v <= n.threshold;
        idx = go_left ? n.left : n.right;
    }
    return nodes[std::size_t(idx)].value;
}

int Tree::n_leaves() const {
    int n = 0;
    for (const auto& node : nodes) n += node.is_leaf ? 1 : 0;
    return n;
}

double Ensemble::predict(std::span<const double> x) const {
    if (x.size() != schema.size())
        throw Error(ErrorCode::schema_mismatch,
                    "feature vector length " + std::to_string(x.size()) +
                        " does not match schema size " +
                        std::to_string(schema.size()));
    if (trees.empty()) return base_score;
    if (config.mode == Mode::bagged) {
        double sum = 0.0;
        for (const auto& t : trees) sum += t.predict(x);
        return sum / double(trees.size());
    }
    double out = base_score;
    for (const auto& t : trees) out += t.predict(x);
    return out;
}

namespace {

// Column-major quantized view of the training table.
struct BinnedData {
    std::vector<BinMap> bins;                      // per feature
    std::vector<std::vector<std::uint8_t>> codes;  // [feature][row]
    std::size_t n_rows = 0;
};

BinnedData quantize(const DatasetTable& table, int max_bins) {
    const std::size_t n = table.n_rows();
    const std::size_t f = table.n_features();
    BinnedData data;
    data.n_rows = n;
    data.bins.resize(f);
    data.codes.assign(f, std::vector<std::uint8_t>(n));

    const int nthreads = max_threads();
#pragma omp parallel for num_threads(nthreads) schedule(static)
    for (std::size_t j = 0; j < f; ++j) {
        std::vector<double> column(n);
        for (std::size_t i = 0; i < n; ++i) column[i] = table.rows[i].x[j];
        data.bins[j] = build_bins(column, max_bins);
        for (std::size_t i = 0; i < n; ++i)
            data.codes[j][i] = std::uint8_t(data.bins[j].bin_of(column[i]));
    }
    return data;
}

struct LeafState {
    int node = -1;
    int depth = 0;
    std::vector<std::uint32_t> rows;  // sampled row ids, ascending
    double grad_sum = 0.0;            // accumulated in row order
    std::vector<std::vector<HistogramBin>> hist;  // per selected feature
    SplitCandidate best;
    bool open = true;
};

// A grown tree plus the per-node bin boundary, which lets the boosting
// loop route training rows through quantized codes instead of raw values.
struct GrownTree {
    Tree tree;
    std::vector<int> boundary;
    std::vector<LeafState> leaves;  // final leaf states (open == true)
};

class TreeGrower {
public:
    TreeGrower(const BinnedData& data, std::span<const std::uint32_t> features,
               std::span<const double> gradients, const TrainConfig& config)
        : data_(data),
          features_(features),
          gradients_(gradients),
          config_(config) {}

    GrownTree grow(std::vector<std::uint32_t> root_rows) {
        GrownTree out;
        out.tree.nodes.push_back({});
        out.boundary.push_back(-1);

        states_.clear();
        LeafState root;
        root.node = 0;
        root.depth = 0;
        root.grad_sum = row_order_sum(root_rows);
        root.rows = std::move(root_rows);
        build_histograms(root);
        scan(root);
        states_.push_back(std::move(root));

        if (config_.growth == Growth::leafwise)
            grow_leafwise(out);
        else
            grow_depthwise(out);

        // Remaining open states become leaves predicting their mean gradient.
        for (auto& s : states_) {
            if (!s.open) continue;
            TreeNode& n = out.tree.nodes[std::size_t(s.node)];
            n.is_leaf = true;
            n.value = s.grad_sum / double(s.rows.size());
        }
        out.leaves = std::move(states_);
        return out;
    }

private:
    double row_order_sum(const std::vector<std::uint32_t>& rows) const {
        double sum = 0.0;
        for (auto r : rows) sum += gradients_[r];
        return sum;
    }

    bool depth_allows_split(const LeafState& s) const {
        return config_.max_depth == 0 || s.depth < config_.max_depth;
    }

    void build_histograms(LeafState& s) const {
        s.hist.resize(features_.size());
        const int nthreads = max_threads();
#pragma omp parallel for num_threads(nthreads) schedule(static)
        for (std::size_t fi = 0; fi < features_.size(); ++fi) {
            const auto f = features_[fi];
            const auto* codes = data_.codes[f].data();
            auto& h = s.hist[fi];
            h.assign(std::size_t(data_.bins[f].n_bins()) + 1, HistogramBin{});
            for (auto r : s.rows) {
                auto& bin = h[codes[r]];
                bin.grad += gradients_[r];
                bin.count += 1;
            }
        }
    }

    // parent hist - sibling hist, reusing the parent's buffers.
    static void subtract_histograms(LeafState& parent_into,
                                    const LeafState& sibling) {
        for (std::size_t fi = 0; fi < parent_into.hist.size(); ++fi) {
            auto& h = parent_into.hist[fi];
            const auto& s = sibling.hist[fi];
            for (std::size_t b = 0; b < h.size(); ++b) {
                h[b].grad -= s[b].grad;
                h[b].count -= s[b].count;
            }
        }
    }

    void scan(LeafState& s) const {
        s.best = SplitCandidate{};
        if (!depth_allows_split(s)) return;
        std::vector<SplitCandidate> per_feature(features_.size());
        const int nthreads = max_threads();
#pragma omp parallel for num_threads(nthreads) schedule(static)
        for (std::size_t fi = 0; fi < features_.size(); ++fi) {
            per_feature[fi] =
                best_split(s.hist[fi], data_.bins[features_[fi]],
                           config_.min_child_weight, config_.min_gain);
            per_feature[fi].feature = int(features_[fi]);
        }
        // Deterministic reduction: features ascending, strictly-better wins.
        for (const auto& c : per_feature) {
            if (c.valid && (!s.best.valid || c.gain > s.best.gain)) s.best = c;
        }
    }

    void apply_split(GrownTree& out, std::size_t state_idx) {
        LeafState& s = states_[state_idx];
        const SplitCandidate& cand = s.best;
        const auto f = std::uint32_t(cand.feature);
        const auto* codes = data_.codes[f].data();
        const int nan_bin = data_.bins[f].nan_bin();

        LeafState left, right;
        left.depth = right.depth = s.depth + 1;
        for (auto r : s.rows) {
            int code = codes[r];
            bool go_left =
                code == nan_bin ? cand.nan_left : code <= cand.boundary;
            if (go_left) {
                left.rows.push_back(r);
                left.grad_sum += gradients_[r];
            } else {
                right.rows.push_back(r);
                right.grad_sum += gradients_[r];
            }
        }

        const int left_idx = int(out.tree.nodes.size());
        out.tree.nodes.push_back({});
        out.boundary.push_back(-1);
        const int right_idx = int(out.tree.nodes.size());
        out.tree.nodes.push_back({});
        out.boundary.push_back(-1);

        TreeNode& node = out.tree.nodes[std::size_t(s.node)];
        node.is_leaf = false;
        node.feature = cand.feature;
        node.threshold = cand.threshold;
        node.nan_left = cand.nan_left;
        node.gain = cand.gain;
        node.left = left_idx;
        node.right = right_idx;
        out.boundary[std::size_t(s.node)] = cand.boundary;
        left.node = left_idx;
        right.node = right_idx;

        // Fresh histogram for the smaller child, subtraction for the other.
        if (left.rows.size() <= right.rows.size()) {
            build_histograms(left);
            right.hist = std::move(s.hist);
            subtract_histograms(right, left);
        } else {
            build_histograms(right);
            left.hist = std::move(s.hist);
            subtract_histograms(left, right);
        }
        scan(left);
        scan(right);

        s.open = false;
        s.rows.clear();
        s.rows.shrink_to_fit();
        states_.push_back(std::move(left));
        states_.push_back(std::move(right));
    }

    int count_open() const {
        int n = 0;
        for (const auto& s : states_) n += s.open ? 1 : 0;
        return n;
    }

    void grow_leafwise(GrownTree& out) {
        int n_leaves = 1;
        while (config_.num_leaves == 0 || n_leaves < config_.num_leaves) {
            std::size_t pick = states_.size();
            for (std::size_t i = 0; i < states_.size(); ++i) {
                const auto& s = states_[i];
                if (!s.open || !s.best.valid) continue;
                // Creation order breaks gain ties.
                if (pick == states_.size() ||
                    s.best.gain > states_[pick].best.gain)
                    pick = i;
            }
            if (pick == states_.size()) break;
            apply_split(out, pick);
            ++n_leaves;
        }
    }

    void grow_depthwise(GrownTree& out) {
        std::size_t level_begin = 0;
        int n_leaves = 1;
        while (level_begin < states_.size()) {
            std::size_t level_end = states_.size();
            for (std::size_t i = level_begin; i < level_end; ++i) {
                if (config_.num_leaves != 0 && n_leaves >= config_.num_leaves)
                    return;
                if (!states_[i].open || !states_[i].best.valid) continue;
                apply_split(out, i);
                ++n_leaves;
            }
            level_begin = level_end;
        }
    }

    const BinnedData& data_;
    std::span<const std::uint32_t> features_;
    std::span<const double> gradients_;
    const TrainConfig& config_;
    std::vector<LeafState> states_;
};

// Route a training row through a grown tree using quantized codes; exactly
// mirrors the partition done while growing.
double route_codes(const GrownTree& gt, const BinnedData& data,
                   std::size_t row) {
    int idx = 0;
    while (!gt.tree.nodes[std::size_t(idx)].is_leaf) {
        const TreeNode& n = gt.tree.nodes[std::size_t(idx)];
        int code = data.codes[std::size_t(n.feature)][row];
        int nan_bin = data.bins[std::size_t(n.feature)].nan_bin();
        bool go_left = code == nan_bin
                           ? n.nan_left
                           : code <= gt.boundary[std::size_t(idx)];
        idx = go_left ? n.left : n.right;
    }
    return gt.tree.nodes[std::size_t(idx)].value;
}

}  // namespace

Ensemble fit(const DatasetTable& table, const TrainConfig& config) {
    config.validate();
    const std::size_t n = table.n_rows();
    const std::size_t f = table.n_features();
    if (n == 0) throw Error(ErrorCode::empty_data, "empty training table");
    for (const auto& row : table.rows) {
        if (row.x.size() != f)
            throw Error(ErrorCode::schema_mismatch,
                        "row width does not match schema");
    }

    Ensemble model;
    model.config = config;
    model.schema = table.schema;
    double y_sum = 0.0;
    for (const auto& row : table.rows) y_sum += row.target_le;
    model.base_score = y_sum / double(n);

    if (n == 1) {
        std::fprintf(stderr,
                     "warning: single-row table, returning base-score model\n");
        return model;
    }
    if (config.n_estimators == 0) return model;

    BinnedData data = quantize(table, config.max_bins);

    std::vector<double> targets(n);
    for (std::size_t i = 0; i < n; ++i) targets[i] = table.rows[i].target_le;

    std::vector<double> preds(n, model.base_score);
    std::vector<double> grads(n);

    const auto n_features_used = std::max<std::uint64_t>(
        1, std::uint64_t(config.colsample * double(f) + 1e-9));

    for (int t = 0; t < config.n_estimators; ++t) {
        SplitMix64 rng(mix_key(config.seed, 0x74726565ull, std::uint64_t(t)));

        std::vector<std::uint32_t> selected =
            n_features_used >= f
                ? [&] {
                      std::vector<std::uint32_t> all(f);
                      std::iota(all.begin(), all.end(), 0u);
                      return all;
                  }()
                : sample_without_replacement(f, n_features_used, rng);

        std::vector<std::uint32_t> rows;
        if (config.mode == Mode::bagged) {
            rows = bootstrap_indices(n, rng);
            grads = targets;
        } else {
            if (config.subsample < 1.0) {
                auto m = std::max<std::uint64_t>(
                    1, std::uint64_t(config.subsample * double(n) + 1e-9));
                rows = sample_without_replacement(n, m, rng);
            } else {
                rows.resize(n);
                std::iota(rows.begin(), rows.end(), 0u);
            }
            for (std::size_t i = 0; i < n; ++i)
                grads[i] = targets[i] - preds[i];
        }

        TreeGrower grower(data, selected, grads, config);
        GrownTree grown = grower.grow(std::move(rows));

        if (config.mode == Mode::boosted) {
            for (auto& node : grown.tree.nodes)
                if (node.is_leaf) node.value *= config.learning_rate;
            const int nthreads = max_threads();
#pragma omp parallel for num_threads(nthreads) schedule(static)
            for (std::size_t i = 0; i < n; ++i)
                preds[i] += route_codes(grown, data, i);
        }
        model.trees.push_back(std::move(grown.tree));
    }
    return model;
}

std::vector<double> predict_table(const Ensemble& model,
                                  const DatasetTable& table) {
    if (model.schema.fingerprint() != table.schema.fingerprint())
        throw Error(ErrorCode::schema_mismatch,
                    "model and table feature schemas differ");
    std::vector<double> out(table.n_rows());
    const int nthreads = max_threads();
#pragma omp parallel for num_threads(nthreads) schedule(static)
    for (std::size_t i = 0; i < table.n_rows(); ++i)
        out[i] = model.predict(table.rows[i].x);
    return out;
}

std::vector<FeatureImportance> feature_importance_gain(const Ensemble& model) {
    std::map<int, FeatureImportance> acc;
    for (const auto& tree : model.trees) {
        for (const auto& node : tree.nodes) {
            if (node.is_leaf) continue;
            auto& fi = acc[node.feature];
            fi.feature = node.feature;
            fi.gain += node.gain;
            fi.splits += 1;
        }
    }
    std::vector<FeatureImportance> out;
    out.reserve(acc.size());
    for (auto& [feat, fi] : acc) {
        if (feat >= 0 && std::size_t(feat) < model.schema.size())
            fi.name = model.schema.slots()[std::size_t(feat)].name;
        out.push_back(fi);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.gain != b.gain) return a.gain > b.gain;
        return a.feature < b.feature;
    });
    return out;
}

namespace {

std::string hex_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

double parse_hex_double(const std::string& s) {
    if (s.empty()) throw Error(ErrorCode::bad_format, "empty float field");
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size())
        throw Error(ErrorCode::bad_format, "bad float literal '" + s + "'");
    return v;
}

nlohmann::ordered_json node_to_json(const Tree& tree, int idx) {
    const TreeNode& n = tree.nodes[std::size_t(idx)];
    nlohmann::ordered_json j;
    if (n.is_leaf) {
        j["value"] = hex_double(n.value);
        return j;
    }
    j["feature"] = n.feature;
    j["threshold"] = hex_double(n.threshold);
    j["nan_left"] = n.nan_left;
    j["gain"] = hex_double(n.gain);
    j["left"] = node_to_json(tree, n.left);
    j["right"] = node_to_json(tree, n.right);
    return j;
}

int node_from_json(const nlohmann::json& j, Tree& tree) {
    int idx = int(tree.nodes.size());
    tree.nodes.push_back({});
    if (j.contains("value")) {
        tree.nodes[std::size_t(idx)].value =
            parse_hex_double(j.at("value").get<std::string>());
        return idx;
    }
    TreeNode n;
    n.is_leaf = false;
    n.feature = j.at("feature").get<int>();
    n.threshold = parse_hex_double(j.at("threshold").get<std::string>());
    n.nan_left = j.at("nan_left").get<bool>();
    n.gain = parse_hex_double(j.at("gain").get<std::string>());
    tree.nodes[std::size_t(idx)] = n;
    int left = node_from_json(j.at("left"), tree);
    int right = node_from_json(j.at("right"), tree);
    tree.nodes[std::size_t(idx)].left = left;
    tree.nodes[std::size_t(idx)].right = right;
    return idx;
}

constexpr int kModelFormatVersion = 1;

}  // namespace

void save_model(const Ensemble& model, const std::string& path) {
    nlohmann::ordered_json j;
    j["format"] = "etup-model";
    j["format_version"] = kModelFormatVersion;

    nlohmann::ordered_json cfg;
    cfg["mode"] = mode_name(model.config.mode);
    cfg["growth"] = growth_name(model.config.growth);
    cfg["n_estimators"] = model.config.n_estimators;
    cfg["learning_rate"] = model.config.learning_rate;
    cfg["num_leaves"] = model.config.num_leaves;
    cfg["max_depth"] = model.config.max_depth;
    cfg["min_child_weight"] = model.config.min_child_weight;
    cfg["min_gain"] = model.config.min_gain;
    cfg["colsample"] = model.config.colsample;
    cfg["subsample"] = model.config.subsample;
    cfg["max_bins"] = model.config.max_bins;
    cfg["seed"] = model.config.seed;
    j["config"] = cfg;

    j["schema"] = nlohmann::ordered_json::parse(model.schema.to_json());
    j["base_score"] = hex_double(model.base_score);
    auto& trees = j["trees"] = nlohmann::ordered_json::array();
    for (const auto& tree : model.trees) trees.push_back(node_to_json(tree, 0));

    std::ofstream out(path, std::ios::binary);
    if (!out) throw_io("cannot write model file '" + path + "'");
    out << j.dump(1, '\t') << '\n';
    if (!out) throw_io("write failed on '" + path + "'");
}

Ensemble load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_io("cannot open model file '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::bad_format,
                    "malformed model file '" + path + "': " + e.what());
    }

    try {
        if (j.at("format").get<std::string>() != "etup-model")
            throw Error(ErrorCode::bad_format, "not an etup model file");
        if (j.at("format_version").get<int>() != kModelFormatVersion)
            throw Error(ErrorCode::bad_format,
                        "unsupported model format version");

        Ensemble model;
        const auto& cfg = j.at("config");
        model.config.mode = mode_from_name(cfg.at("mode").get<std::string>());
        model.config.growth =
            growth_from_name(cfg.at("growth").get<std::string>());
        model.config.n_estimators = cfg.at("n_estimators").get<int>();
        model.config.learning_rate = cfg.at("learning_rate").get<double>();
        model.config.num_leaves = cfg.at("num_leaves").get<int>();
        model.config.max_depth = cfg.at("max_depth").get<int>();
        model.config.min_child_weight = cfg.at("min_child_weight").get<int>();
        model.config.min_gain = cfg.at("min_gain").get<double>();
        model.config.colsample = cfg.at("colsample").get<double>();
        model.config.subsample = cfg.at("subsample").get<double>();
        model.config.max_bins = cfg.at("max_bins").get<int>();
        model.config.seed = cfg.at("seed").get<std::uint64_t>();

        model.schema = features::FeatureSchema::from_json(j.at("schema").dump());
        model.base_score =
            parse_hex_double(j.at("base_score").get<std::string>());
        for (const auto& tj : j.at("trees")) {
            Tree tree;
            node_from_json(tj, tree);
            model.trees.push_back(std::move(tree));
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::bad_format,
                    "malformed model file '" + path + "': " + e.what());
    }
}

}  // namespace etup::gbdt
