#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace gzsb {

// Class-level attribute vector (length n) and instance feature vector
// (length m). Plain vectors; lengths are enforced where they meet a model
// or dataset.
using SemanticVector = std::vector<double>;
using FeatureVector = std::vector<double>;

// Dense row-major matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const {
        return {data.data() + r * cols, cols};
    }

    bool operator==(const Matrix&) const = default;
};

// Seen/unseen class ids plus the instance index lists of the three splits.
struct SplitSpec {
    std::vector<int> seen_classes;
    std::vector<int> unseen_classes;
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> test_seen_idx;
    std::vector<std::size_t> test_unseen_idx;

    bool operator==(const SplitSpec&) const = default;
};

// A loaded bundle. Class ids are dense: class id == row in class_semantics.
// Values are immutable after load; every mutation helper returns a new value.
struct Dataset {
    Matrix features;         // instances x m
    std::vector<int> labels; // per instance class id
    Matrix class_semantics;  // classes x n
    SplitSpec split;
    double scale_applied = 0.0; // 0 = semantics never rescaled

    std::size_t num_instances() const { return features.rows; }
    std::size_t num_classes() const { return class_semantics.rows; }
    std::size_t feature_dim() const { return features.cols; }
    std::size_t semantic_dim() const { return class_semantics.cols; }

    bool operator==(const Dataset&) const = default;
};

enum class Variant : std::uint8_t { linear = 0, nonlinear = 1 };

// Hidden sizes of the two relation-model MLPs; 0 means "use m".
struct MlpConfig {
    std::size_t h1 = 0;
    std::size_t h2 = 0;

    bool operator==(const MlpConfig&) const = default;
};

struct DenseLayer {
    Matrix w;              // out x in
    std::vector<double> b; // out

    bool operator==(const DenseLayer&) const = default;
};

// Either a bilinear matrix W (m x n) or the four dense layers of the
// two-MLP relation model: n->h1, h1->m, 2m->h2, h2->1.
// sem_scale is the semantic preprocessing factor baked in at training time;
// evaluation multiplies candidate semantics by it before scoring.
struct ModelParams {
    Variant variant = Variant::linear;
    std::size_t m = 0;
    std::size_t n = 0;
    std::size_t h1 = 0;
    std::size_t h2 = 0;
    double sem_scale = 1.0;
    Matrix w;
    std::vector<DenseLayer> layers;

    bool operator==(const ModelParams&) const = default;
};

// One training anchor: an instance feature, its class semantic, its class.
struct Anchor {
    FeatureVector feature;
    SemanticVector semantic;
    int class_id = -1;
};

// One borrowing-pool / label-space entry.
struct PoolEntry {
    int class_id = -1;
    SemanticVector semantic;

    bool operator==(const PoolEntry&) const = default;
};

}  // namespace gzsb
