#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "etup/dataset.hpp"
#include "etup/features.hpp"

namespace etup::gbdt {

enum class Mode { boosted, bagged };
enum class Growth { leafwise, depthwise };

struct TrainConfig {
    Mode mode = Mode::boosted;
    Growth growth = Growth::leafwise;
    int n_estimators = 100;
    double learning_rate = 0.1;   // shrinkage, (0, 1]
    int num_leaves = 31;          // leaf cap per tree, 0 = unlimited
    int max_depth = 0;            // 0 = unlimited
    int min_child_weight = 1;     // minimum rows per child
    double min_gain = 0.0;        // minimum split gain
    double colsample = 1.0;       // feature fraction per tree, (0, 1]
    double subsample = 1.0;       // row fraction per tree, (0, 1]
    int max_bins = 255;           // histogram bins, 2..255
    std::uint64_t seed = 0;

    void validate() const;  // throws a config error on bad values
};

const char* mode_name(Mode m);
const char* growth_name(Growth g);
Mode mode_from_name(const std::string& s);
Growth growth_from_name(const std::string& s);

// Feature values are quantized against interior edges: bin b holds values
// in (edges[b-1], edges[b]]; NaN goes to a reserved trailing bin.
struct BinMap {
    std::vector<double> edges;

    int n_bins() const { return int(edges.size()) + 1; }
    int nan_bin() const { return n_bins(); }
    int bin_of(double v) const;
};

// Quantile binning. When the column has at most max_bins distinct values
// the edges sit exactly between consecutive distinct values (lossless).
BinMap build_bins(std::span<const double> column, int max_bins);

struct HistogramBin {
    double grad = 0.0;
    std::uint32_t count = 0;
};

struct SplitCandidate {
    bool valid = false;
    int feature = -1;
    int boundary = -1;      // left side = bins [0..boundary]
    double threshold = 0.0; // real-valued edge; x <= threshold goes left
    bool nan_left = true;
    double gain = 0.0;
};

// Scans bin boundaries of one feature's histogram (layout: n_bins non-NaN
// bins followed by the NaN bin), trying NaN on both sides. Ties break to
// the lowest boundary, then NaN-left. Invalid result when the best gain is
// below min_gain or every candidate violates min_child_weight.
SplitCandidate best_split(std::span<const HistogramBin> hist,
                          const BinMap& bins, int min_child_weight,
                          double min_gain);

// Brute-force reference: scans midpoints between sorted distinct raw
// values, same gain algebra and tie rules, no binning. Intended for tests
// and small inputs.
SplitCandidate exact_best_split(std::span<const double> values,
                                std::span<const double> gradients,
                                int min_child_weight, double min_gain);

struct TreeNode {
    bool is_leaf = true;
    double value = 0.0;  // leaf increment (already shrunk in boosted mode)
    int feature = -1;
    double threshold = 0.0;
    bool nan_left = true;
    double gain = 0.0;
    int left = -1;
    int right = -1;
};

struct Tree {
    std::vector<TreeNode> nodes;

    double predict(std::span<const double> x) const;
    int n_leaves() const;
};

struct Ensemble {
    TrainConfig config;
    features::FeatureSchema schema;
    double base_score = 0.0;
    std::vector<Tree> trees;

    // Boosted: base_score plus the sum of tree outputs. Bagged: mean of
    // tree outputs (base_score when there are none). NaN features follow
    // each split's stored default direction.
    double predict(std::span<const double> x) const;
};

// Deterministic for a fixed seed at any thread count.
Ensemble fit(const DatasetTable& table, const TrainConfig& config);

// Checks the schema fingerprint before predicting, row by row.
std::vector<double> predict_table(const Ensemble& model,
                                  const DatasetTable& table);

struct FeatureImportance {
    int feature = -1;
    std::string name;
    double gain = 0.0;
    std::uint64_t splits = 0;
};

// Total split gain per feature, descending (ties by feature index).
// Only features that appear in at least one split are listed.
std::vector<FeatureImportance> feature_importance_gain(const Ensemble& model);

// Self-describing JSON model file; float fields are stored as hexadecimal
// float literals so a reloaded model predicts bit-identically.
void save_model(const Ensemble& model, const std::string& path);
Ensemble load_model(const std::string& path);

}  // namespace etup::gbdt
