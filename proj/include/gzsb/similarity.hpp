#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>

#include "gzsb/error.hpp"
#include "gzsb/types.hpp"

namespace gzsb {

enum class Metric { neg_mae, neg_mse, cosine, ruzicka };

inline const char* to_string(Metric metric) {
    switch (metric) {
        case Metric::neg_mae: return "neg_mae";
        case Metric::neg_mse: return "neg_mse";
        case Metric::cosine: return "cosine";
        case Metric::ruzicka: return "ruzicka";
    }
    return "?";
}

inline Metric parse_metric(const std::string& name) {
    if (name == "neg_mae") return Metric::neg_mae;
    if (name == "neg_mse") return Metric::neg_mse;
    if (name == "cosine") return Metric::cosine;
    if (name == "ruzicka") return Metric::ruzicka;
    throw ConfigError("unknown similarity metric '" + name +
                      "' (expected neg_mae|neg_mse|cosine|ruzicka)");
}

namespace detail {
inline void check_same_length(std::span<const double> a, std::span<const double> b,
                              const char* who) {
    if (a.size() != b.size()) {
        throw DataError(std::string(who) + ": length mismatch (" + std::to_string(a.size()) +
                        " vs " + std::to_string(b.size()) + ")");
    }
}
}  // namespace detail

// Negative mean absolute error. The argmax over a pool equals the argmin of
// the L1 distance; dividing by the length only rescales values.
inline double neg_mae(std::span<const double> a, std::span<const double> b) {
    detail::check_same_length(a, b, "neg_mae");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
    return -acc / static_cast<double>(a.size());
}

inline double neg_mse(std::span<const double> a, std::span<const double> b) {
    detail::check_same_length(a, b, "neg_mse");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return -acc / static_cast<double>(a.size());
}

inline double cosine(std::span<const double> a, std::span<const double> b) {
    detail::check_same_length(a, b, "cosine");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw DataError("cosine: zero vector");
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

// Sum of elementwise minima over sum of elementwise maxima. Defined for
// nonnegative vectors only; negative entries are rejected rather than
// clamped.
inline double ruzicka(std::span<const double> a, std::span<const double> b) {
    detail::check_same_length(a, b, "ruzicka");
    double min_sum = 0.0, max_sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < 0.0 || b[i] < 0.0) throw DataError("ruzicka: negative entry");
        min_sum += std::min(a[i], b[i]);
        max_sum += std::max(a[i], b[i]);
    }
    if (max_sum == 0.0) throw DataError("ruzicka: both vectors are zero");
    return min_sum / max_sum;
}

inline double similarity(Metric metric, std::span<const double> a, std::span<const double> b) {
    switch (metric) {
        case Metric::neg_mae: return neg_mae(a, b);
        case Metric::neg_mse: return neg_mse(a, b);
        case Metric::cosine: return cosine(a, b);
        case Metric::ruzicka: return ruzicka(a, b);
    }
    throw ConfigError("similarity: bad metric tag");
}

// Pool element with maximal similarity to the query; ties go to the lowest
// class id so results are identical across platforms. exclude_class removes
// every pool entry of that class before the scan (the trainer uses it to
// forbid borrowing the anchor's own class).
inline PoolEntry nearest_semantic(std::span<const double> query,
                                  std::span<const PoolEntry> pool, Metric metric,
                                  std::optional<int> exclude_class = std::nullopt) {
    const PoolEntry* best = nullptr;
    double best_sim = 0.0;
    for (const PoolEntry& entry : pool) {
        if (exclude_class && entry.class_id == *exclude_class) continue;
        const double sim = similarity(metric, query, entry.semantic);
        if (best == nullptr || sim > best_sim ||
            (sim == best_sim && entry.class_id < best->class_id)) {
            best = &entry;
            best_sim = sim;
        }
    }
    if (best == nullptr) throw DataError("nearest_semantic: empty pool after exclusion");
    return *best;
}

}  // namespace gzsb
