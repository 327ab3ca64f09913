#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gzsb/error.hpp"
#include "gzsb/rng.hpp"
#include "gzsb/types.hpp"

// Deterministic synthetic bundle generator. A hidden linear map G (n -> m) is
// drawn once; every instance feature is G * (class semantic) + Gaussian
// noise. Unseen-class semantics are convex blends of a seen semantic and
// fresh attribute noise, so the bilinear model family is well-specified and
// unseen classes sit at a controllable distance from seen ones.

namespace gzsb {

struct SynthSpec {
    std::size_t n_seen = 20;
    std::size_t n_unseen = 5;
    std::size_t per_class_train = 50;
    std::size_t per_class_test = 20;
    std::size_t m = 32;
    std::size_t n = 12;
    double attribute_corr = 0.7; // 1 = unseen semantics duplicate seen ones
    double noise_sigma = 0.3;
    std::uint64_t seed = 1;
};

inline void validate_spec(const SynthSpec& spec) {
    if (spec.n_seen < 2) throw ConfigError("synth spec: n_seen must be >= 2");
    if (spec.n_unseen < 1) throw ConfigError("synth spec: n_unseen must be >= 1");
    if (spec.per_class_train < 1 || spec.per_class_test < 1) {
        throw ConfigError("synth spec: per-class counts must be >= 1");
    }
    if (spec.m < 2 || spec.n < 2) throw ConfigError("synth spec: dimensions must be >= 2");
    if (!(spec.attribute_corr >= 0.0 && spec.attribute_corr <= 1.0)) {
        throw ConfigError("synth spec: attribute_corr must be in [0,1]");
    }
    if (!(spec.noise_sigma >= 0.0)) throw ConfigError("synth spec: noise_sigma must be >= 0");
}

inline Dataset gen_dataset(const SynthSpec& spec) {
    validate_spec(spec);
    Rng rng(spec.seed);
    const std::size_t n_classes = spec.n_seen + spec.n_unseen;

    Dataset ds;
    ds.class_semantics = Matrix(n_classes, spec.n);

    // seen-class attributes: nonnegative so every similarity metric applies
    for (std::size_t c = 0; c < spec.n_seen; ++c) {
        for (std::size_t j = 0; j < spec.n; ++j) ds.class_semantics(c, j) = rng.u01();
    }
    // unseen-class attributes: blend of the nearest seen semantic (L1) and
    // fresh noise
    for (std::size_t c = spec.n_seen; c < n_classes; ++c) {
        std::vector<double> noise(spec.n);
        for (double& v : noise) v = rng.u01();
        std::size_t nearest = 0;
        double best = 0.0;
        for (std::size_t sc = 0; sc < spec.n_seen; ++sc) {
            double dist = 0.0;
            for (std::size_t j = 0; j < spec.n; ++j) {
                const double d = ds.class_semantics(sc, j) - noise[j];
                dist += d < 0.0 ? -d : d;
            }
            if (sc == 0 || dist < best) {
                best = dist;
                nearest = sc;
            }
        }
        for (std::size_t j = 0; j < spec.n; ++j) {
            ds.class_semantics(c, j) = spec.attribute_corr * ds.class_semantics(nearest, j) +
                                       (1.0 - spec.attribute_corr) * noise[j];
        }
    }

    // hidden ground-truth map
    Matrix g(spec.m, spec.n);
    const double bound = 1.0 / std::sqrt(static_cast<double>(spec.n));
    for (double& v : g.data) v = rng.uniform(-bound, bound);

    const std::size_t total = spec.n_seen * (spec.per_class_train + spec.per_class_test) +
                              spec.n_unseen * spec.per_class_test;
    ds.features = Matrix(total, spec.m);
    ds.labels.reserve(total);

    std::size_t row = 0;
    auto emit_instance = [&](std::size_t cls, std::vector<std::size_t>& idx_list) {
        for (std::size_t j = 0; j < spec.m; ++j) {
            double v = 0.0;
            for (std::size_t k = 0; k < spec.n; ++k) v += g(j, k) * ds.class_semantics(cls, k);
            ds.features(row, j) = v + spec.noise_sigma * rng.normal();
        }
        ds.labels.push_back(static_cast<int>(cls));
        idx_list.push_back(row);
        ++row;
    };

    for (std::size_t c = 0; c < spec.n_seen; ++c) {
        ds.split.seen_classes.push_back(static_cast<int>(c));
        for (std::size_t i = 0; i < spec.per_class_train; ++i) emit_instance(c, ds.split.train_idx);
        for (std::size_t i = 0; i < spec.per_class_test; ++i) {
            emit_instance(c, ds.split.test_seen_idx);
        }
    }
    for (std::size_t c = spec.n_seen; c < n_classes; ++c) {
        ds.split.unseen_classes.push_back(static_cast<int>(c));
        for (std::size_t i = 0; i < spec.per_class_test; ++i) {
            emit_instance(c, ds.split.test_unseen_idx);
        }
    }
    return ds;
}

}  // namespace gzsb
