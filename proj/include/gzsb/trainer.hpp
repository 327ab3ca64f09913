#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gzsb/dataset.hpp"
#include "gzsb/error.hpp"
#include "gzsb/loss.hpp"
#include "gzsb/model.hpp"
#include "gzsb/optimizer.hpp"
#include "gzsb/rng.hpp"
#include "gzsb/similarity.hpp"
#include "gzsb/types.hpp"

#include "json.hpp"

// Paired-batch training. Each epoch shuffles the training instances,
// partitions them into full minibatches, and pairs consecutive batches:
// the even batch provides anchors, the odd batch provides the borrowing
// pool (its class semantics, deduplicated). A trailing unpaired or partial
// batch is dropped. pool_mode=full keeps the identical pairing but replaces
// every pool with the full seen-class semantic set, for comparison.
//
// The trainer's view is built from train indices and seen-class semantics
// only; test instances and unseen semantics are never read, so training is
// valid under the strictest inductive setting.

namespace gzsb {

enum class PoolMode { paired, full };
enum class OptChoice { auto_select, sgd, adam };

inline const char* to_string(PoolMode mode) { return mode == PoolMode::paired ? "paired" : "full"; }

inline PoolMode parse_pool_mode(const std::string& name) {
    if (name == "paired") return PoolMode::paired;
    if (name == "full") return PoolMode::full;
    throw ConfigError("unknown pool_mode '" + name + "' (expected paired|full)");
}

inline const char* to_string(OptChoice choice) {
    switch (choice) {
        case OptChoice::auto_select: return "auto";
        case OptChoice::sgd: return "sgd";
        case OptChoice::adam: return "adam";
    }
    return "?";
}

inline OptChoice parse_opt_choice(const std::string& name) {
    if (name == "auto") return OptChoice::auto_select;
    if (name == "sgd") return OptChoice::sgd;
    if (name == "adam") return OptChoice::adam;
    throw ConfigError("unknown optimizer '" + name + "' (expected auto|sgd|adam)");
}

struct TrainConfig {
    Variant variant = Variant::linear;
    double alpha = 0.1;
    double beta = 0.0;
    DecayMode decay_mode = DecayMode::norm;
    Metric metric = Metric::neg_mae;
    std::size_t batch_size = 32;
    std::size_t epochs = 50;
    OptChoice optimizer = OptChoice::auto_select; // auto: sgd for linear, adam for nonlinear
    std::optional<double> lr;                     // unset = default (sgd 0.1, adam 1e-3)
    double momentum = 0.0;
    std::uint64_t seed = 1;
    MlpConfig mlp;             // h1/h2, 0 = m
    double scale_target = 1.0; // mean seen-class semantic norm; 0 disables rescaling
    PoolMode pool_mode = PoolMode::paired;
    bool allow_large_alpha = false;
};

inline void validate_config(const TrainConfig& config) {
    if (config.batch_size < 2) throw ConfigError("batch_size must be >= 2");
    if (config.epochs < 1) throw ConfigError("epochs must be >= 1");
    check_alpha(config.alpha, config.allow_large_alpha);
    if (!(config.beta >= 0.0)) throw ConfigError("beta must be >= 0");
    if (config.lr && !(*config.lr >= 0.0)) throw ConfigError("lr must be >= 0");
    if (!(config.momentum >= 0.0 && config.momentum < 1.0)) {
        throw ConfigError("momentum must be in [0,1)");
    }
    if (!(config.scale_target >= 0.0)) throw ConfigError("scale_target must be >= 0");
}

inline OptChoice effective_optimizer(const TrainConfig& config) {
    if (config.optimizer != OptChoice::auto_select) return config.optimizer;
    return config.variant == Variant::linear ? OptChoice::sgd : OptChoice::adam;
}

inline double effective_lr(const TrainConfig& config) {
    if (config.lr) return *config.lr;
    return effective_optimizer(config) == OptChoice::sgd ? 0.1 : 1e-3;
}

inline OptimizerState make_optimizer(const TrainConfig& config) {
    if (effective_optimizer(config) == OptChoice::sgd) {
        SgdState state;
        state.lr = effective_lr(config);
        state.momentum = config.momentum;
        return state;
    }
    AdamState state;
    state.lr = effective_lr(config);
    return state;
}

// Training-time view: train instances and seen-class semantics only.
struct TrainerView {
    Matrix feats;                      // train rows, in train_idx order
    std::vector<int> labels;           // aligned with feats
    std::vector<PoolEntry> class_sems; // seen classes sorted by id, rescaled
    double sem_scale = 1.0;
};

inline TrainerView make_view(const Dataset& ds, double scale_target) {
    TrainerView view;
    std::set<int> seen(ds.split.seen_classes.begin(), ds.split.seen_classes.end());
    if (seen.size() < 2) throw DataError("training needs at least 2 seen classes");

    view.feats = Matrix(ds.split.train_idx.size(), ds.feature_dim());
    view.labels.reserve(ds.split.train_idx.size());
    for (std::size_t r = 0; r < ds.split.train_idx.size(); ++r) {
        const std::size_t idx = ds.split.train_idx[r];
        if (idx >= ds.num_instances()) {
            throw DataError("train index " + std::to_string(idx) + " out of range");
        }
        const int label = ds.labels[idx];
        if (!seen.count(label)) {
            throw DataError("train instance " + std::to_string(idx) + " has non-seen class " +
                            std::to_string(label));
        }
        const auto row = ds.features.row(idx);
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (!std::isfinite(row[c])) {
                throw DataError("non-finite feature in train instance " + std::to_string(idx));
            }
            view.feats(r, c) = row[c];
        }
        view.labels.push_back(label);
    }

    double norm_sum = 0.0;
    for (int cls : seen) {
        if (cls < 0 || static_cast<std::size_t>(cls) >= ds.num_classes()) {
            throw DataError("seen class " + std::to_string(cls) + " missing from semantics table");
        }
        const auto row = ds.class_semantics.row(static_cast<std::size_t>(cls));
        double sq = 0.0;
        for (double v : row) {
            if (!std::isfinite(v)) {
                throw DataError("non-finite semantic for seen class " + std::to_string(cls));
            }
            sq += v * v;
        }
        norm_sum += std::sqrt(sq);
        view.class_sems.push_back({cls, {row.begin(), row.end()}});
    }

    // One scalar brings the mean seen-class norm to the target. Computed from
    // seen classes only and baked into the checkpoint, so unseen semantics
    // stay untouched during training and evaluation stays consistent.
    view.sem_scale = 1.0;
    if (scale_target > 0.0) {
        const double mean_norm = norm_sum / static_cast<double>(seen.size());
        if (mean_norm == 0.0) throw DataError("degenerate semantics (all seen classes zero)");
        view.sem_scale = scale_target / mean_norm;
        for (PoolEntry& entry : view.class_sems) {
            for (double& v : entry.semantic) v *= view.sem_scale;
        }
    }
    return view;
}

struct BatchPair {
    std::vector<Anchor> even;
    std::vector<PoolEntry> odd;
};

inline std::vector<BatchPair> make_batch_pairs(const TrainerView& view, std::size_t batch_size,
                                               Rng& rng, PoolMode pool_mode = PoolMode::paired) {
    const std::size_t n = view.feats.rows;
    if (batch_size < 2) throw ConfigError("batch_size must be >= 2");
    if (n < 2 * batch_size) {
        throw DataError("cannot form one batch pair: " + std::to_string(n) +
                        " training instances with batch_size " + std::to_string(batch_size));
    }
    if (view.class_sems.size() < 2) throw DataError("training needs at least 2 seen classes");

    std::map<int, const PoolEntry*> sem_by_class;
    for (const PoolEntry& entry : view.class_sems) sem_by_class[entry.class_id] = &entry;

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);

    const std::size_t n_pairs = (n / batch_size) / 2;
    std::vector<BatchPair> pairs;
    pairs.reserve(n_pairs);
    for (std::size_t t = 0; t < n_pairs; ++t) {
        BatchPair pair;
        for (std::size_t k = 0; k < batch_size; ++k) {
            const std::size_t row = order[(2 * t) * batch_size + k];
            const auto f = view.feats.row(row);
            const PoolEntry& sem = *sem_by_class.at(view.labels[row]);
            pair.even.push_back({{f.begin(), f.end()}, sem.semantic, sem.class_id});
        }
        if (pool_mode == PoolMode::full) {
            pair.odd = view.class_sems;
        } else {
            std::set<int> classes;
            for (std::size_t k = 0; k < batch_size; ++k) {
                classes.insert(view.labels[order[(2 * t + 1) * batch_size + k]]);
            }
            for (int cls : classes) pair.odd.push_back(*sem_by_class.at(cls));
        }
        pairs.push_back(std::move(pair));
    }
    return pairs;
}

// One loss evaluation, gradient assembly, and optimizer step.
inline LossBreakdown train_step(ModelParams& params, const BatchPair& pair,
                                const TrainConfig& config, OptimizerState& opt_state) {
    LossOptions opts{config.alpha, config.beta, config.decay_mode, config.metric,
                     config.allow_large_alpha};
    const LossBreakdown breakdown = total_loss(params, pair.even, pair.odd, opts);

    // resolve pair keys back to vectors
    const std::vector<PoolEntry> even_classes = dedup_classes(pair.even);
    std::map<int, const SemanticVector*> even_sems, odd_sems;
    for (const PoolEntry& entry : even_classes) even_sems[entry.class_id] = &entry.semantic;
    const std::vector<PoolEntry> odd_pool = dedup_pool(pair.odd);
    for (const PoolEntry& entry : odd_pool) odd_sems[entry.class_id] = &entry.semantic;

    std::vector<double> flat = flatten(params);
    std::vector<double> grad(flat.size(), 0.0);
    const CompatCache no_cache; // the linear gradient is f s^T, no forward needed
    for (const PairGrad& pg : breakdown.upstream) {
        if (pg.coeff == 0.0) continue;
        const auto& sems = pg.source == SemSource::even ? even_sems : odd_sems;
        const SemanticVector& sem = *sems.at(pg.sem_class);
        const FeatureVector& f = pair.even[pg.feature_idx].feature;
        if (params.variant == Variant::linear) {
            compat_grad_accum(params, f, sem, no_cache, pg.coeff, grad);
        } else {
            const CompatibilityOutput fwd = compat_forward(params, f, sem);
            compat_grad_accum(params, f, sem, fwd.cache, pg.coeff, grad);
        }
    }
    decay_grad_accum(flat, config.decay_mode, config.beta, grad);

    optimizer_step(flat, grad, opt_state);
    for (double v : flat) {
        if (!std::isfinite(v)) {
            throw NumericError("non-finite parameters after optimizer step");
        }
    }
    const double sem_scale = params.sem_scale;
    params = unflatten(flat, params);
    params.sem_scale = sem_scale;
    return breakdown;
}

struct TrainHistory {
    std::vector<double> base;    // per-epoch mean over steps
    std::vector<double> sb;
    std::vector<double> decay;
    std::vector<double> total;
    std::vector<int> skipped_sb; // per-epoch totals
    double wall_time_sec = 0.0;
    std::uint64_t seed = 0;
};

inline std::pair<ModelParams, TrainHistory> train(const Dataset& ds, const TrainConfig& config) {
    validate_config(config);
    const auto started = std::chrono::steady_clock::now();
    TrainerView view = make_view(ds, config.scale_target);

    ModelParams params = init_params(config.variant, ds.feature_dim(), ds.semantic_dim(),
                                     config.mlp, config.seed);
    params.sem_scale = view.sem_scale;
    OptimizerState opt_state = make_optimizer(config);

    // distinct stream from init_params so both are individually seed-stable
    Rng batch_rng(config.seed + 0x9E3779B97F4A7C15ULL);

    TrainHistory history;
    history.seed = config.seed;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const std::vector<BatchPair> pairs =
            make_batch_pairs(view, config.batch_size, batch_rng, config.pool_mode);
        double base = 0.0, sb = 0.0, decay = 0.0, total = 0.0;
        int skipped = 0;
        for (const BatchPair& pair : pairs) {
            const LossBreakdown breakdown = train_step(params, pair, config, opt_state);
            base += breakdown.base;
            sb += breakdown.sb;
            decay += breakdown.decay;
            total += breakdown.total;
            skipped += breakdown.skipped_sb;
        }
        const double steps = static_cast<double>(pairs.size());
        history.base.push_back(base / steps);
        history.sb.push_back(sb / steps);
        history.decay.push_back(decay / steps);
        history.total.push_back(total / steps);
        history.skipped_sb.push_back(skipped);
    }
    history.wall_time_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return {std::move(params), std::move(history)};
}

// One JSON record per epoch. Wall time stays out of the file so identical
// runs produce identical bytes.
inline void write_history_jsonl(const TrainHistory& history, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot write " + path.string());
    for (std::size_t e = 0; e < history.base.size(); ++e) {
        nlohmann::json record{{"epoch", e + 1},        {"base", history.base[e]},
                              {"sb", history.sb[e]},   {"decay", history.decay[e]},
                              {"total", history.total[e]},
                              {"skipped_sb_count", history.skipped_sb[e]}};
        os << record.dump() << "\n";
    }
    if (!os) throw DataError("write failed for " + path.string());
}

}  // namespace gzsb
