#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "gzsb/error.hpp"
#include "gzsb/model.hpp"
#include "gzsb/similarity.hpp"
#include "gzsb/types.hpp"

// Loss terms of compatibility metric learning with semantic borrowing.
//
// Per anchor (f_i, s_i) over the even-batch class set S (deduplicated by
// class) and the odd-batch borrowing pool P:
//
//   linear base      mean_{s in S\{s_i}} [1 + c(f_i,s) - c(f_i,s_i)]_+
//                  + mean_{f in batch\{f_i}} [1 + c(f,s_i) - c(f_i,s_i)]_+
//   nonlinear base   mean_{s in S\{s_i}} c(f_i,s)^2 + (c(f_i,s_i) - 1)^2
//   borrowing        same two shapes with the borrowed semantic s_j in the
//                    positive role and P\{s_j} as the negatives, where s_j is
//                    the most similar pool semantic of a class other than the
//                    anchor's
//
//   total = sum base + alpha * sum borrowing + beta * decay(theta)

namespace gzsb {

enum class DecayMode { norm, squared };

inline const char* to_string(DecayMode mode) {
    return mode == DecayMode::norm ? "norm" : "squared";
}

inline DecayMode parse_decay_mode(const std::string& name) {
    if (name == "norm") return DecayMode::norm;
    if (name == "squared") return DecayMode::squared;
    throw ConfigError("unknown decay_mode '" + name + "' (expected norm|squared)");
}

struct LossOptions {
    double alpha = 0.1;
    double beta = 0.0;
    DecayMode decay_mode = DecayMode::norm;
    Metric metric = Metric::neg_mae;
    bool allow_large_alpha = false;
};

// alpha = 0 is the no-borrowing baseline; alpha >= 1 is only meaningful for
// sensitivity sweeps and must be opted into.
inline void check_alpha(double alpha, bool allow_large_alpha) {
    if (!std::isfinite(alpha) || alpha < 0.0) {
        throw ConfigError("alpha must be finite and >= 0, got " + std::to_string(alpha));
    }
    if (alpha >= 1.0 && !allow_large_alpha) {
        throw ConfigError("alpha=" + std::to_string(alpha) +
                          " outside (0,1); pass --allow-large-alpha for sweep experiments");
    }
}

// ---- scalar kernels --------------------------------------------------------

// mean over others of [1 + c_other - c_correct]_+
inline double hinge_feature_loss(double c_correct, std::span<const double> c_others) {
    if (c_others.empty()) throw DataError("hinge_feature_loss: empty competitor set");
    double acc = 0.0;
    for (double c : c_others) acc += std::max(0.0, 1.0 + c - c_correct);
    return acc / static_cast<double>(c_others.size());
}

// same ranking shape with other instances' features against the anchor
// semantic
inline double hinge_semantic_loss(double c_correct, std::span<const double> c_other_features) {
    if (c_other_features.empty()) throw DataError("hinge_semantic_loss: empty competitor set");
    return hinge_feature_loss(c_correct, c_other_features);
}

inline double linear_base_loss(double c_correct, std::span<const double> c_other_semantics,
                               std::span<const double> c_other_features) {
    return hinge_feature_loss(c_correct, c_other_semantics) +
           hinge_semantic_loss(c_correct, c_other_features);
}

// mean squared wrong-pair compatibility plus squared deviation of the
// correct pair from 1
inline double mse_base_loss(double c_correct, std::span<const double> c_others) {
    if (c_others.empty()) throw DataError("mse_base_loss: empty competitor set");
    double acc = 0.0;
    for (double c : c_others) acc += c * c;
    const double d = c_correct - 1.0;
    return acc / static_cast<double>(c_others.size()) + d * d;
}

inline double sb_hinge_loss(double c_borrowed, std::span<const double> c_others) {
    if (c_others.empty()) throw DataError("sb_hinge_loss: empty pool");
    return hinge_feature_loss(c_borrowed, c_others);
}

inline double sb_mse_loss(double c_borrowed, std::span<const double> c_others) {
    if (c_others.empty()) throw DataError("sb_mse_loss: empty pool");
    return mse_base_loss(c_borrowed, c_others);
}

// ---- decay -----------------------------------------------------------------

inline double decay_value(std::span<const double> theta, DecayMode mode) {
    double sq = 0.0;
    for (double v : theta) sq += v * v;
    return mode == DecayMode::norm ? std::sqrt(sq) : sq;
}

// d(decay)/d(theta) scaled by beta; the norm gradient at theta = 0 is 0
inline void decay_grad_accum(std::span<const double> theta, DecayMode mode, double beta,
                             std::span<double> grad) {
    if (beta == 0.0) return;
    if (mode == DecayMode::squared) {
        for (std::size_t i = 0; i < theta.size(); ++i) grad[i] += beta * 2.0 * theta[i];
        return;
    }
    const double norm = decay_value(theta, DecayMode::norm);
    if (norm == 0.0) return;
    for (std::size_t i = 0; i < theta.size(); ++i) grad[i] += beta * theta[i] / norm;
}

// ---- batch-level loss ------------------------------------------------------

enum class SemSource : int { even = 0, odd = 1 };

// d(loss)/dc for one evaluated (feature, semantic) pair. feature_idx indexes
// the even batch; sem_class resolves against the even class set or odd pool.
// coeff already folds alpha into the borrowing part.
struct PairGrad {
    std::size_t feature_idx = 0;
    SemSource source = SemSource::even;
    int sem_class = -1;
    double base_coeff = 0.0;
    double sb_coeff = 0.0;
    double coeff = 0.0;
};

struct LossBreakdown {
    double base = 0.0;
    double sb = 0.0;
    double decay = 0.0;
    double total = 0.0;
    std::vector<PairGrad> upstream; // sorted by (feature_idx, source, sem_class)
    std::vector<int> borrowed;      // per anchor: borrowed class id, -1 = skipped
    int skipped_sb = 0;
};

// Unique class semantics of a batch, sorted by class id.
inline std::vector<PoolEntry> dedup_classes(std::span<const Anchor> batch) {
    std::map<int, const Anchor*> by_class;
    for (const Anchor& a : batch) by_class.emplace(a.class_id, &a);
    std::vector<PoolEntry> out;
    out.reserve(by_class.size());
    for (const auto& [cid, anchor] : by_class) out.push_back({cid, anchor->semantic});
    return out;
}

inline std::vector<PoolEntry> dedup_pool(std::span<const PoolEntry> pool) {
    std::map<int, const PoolEntry*> by_class;
    for (const PoolEntry& p : pool) by_class.emplace(p.class_id, &p);
    std::vector<PoolEntry> out;
    out.reserve(by_class.size());
    for (const auto& [cid, entry] : by_class) out.push_back(*entry);
    return out;
}

// Evaluates every needed compatibility once, forms the base and borrowing
// sums, and records d(base + alpha*sb)/dc per pair for gradient assembly.
// Anchors whose borrowing pool has no usable entry (no other class to borrow,
// or no negatives left for the mean) skip the borrowing term and are counted.
inline LossBreakdown total_loss(const ModelParams& params, std::span<const Anchor> even,
                                std::span<const PoolEntry> odd, const LossOptions& opt) {
    check_alpha(opt.alpha, opt.allow_large_alpha);
    if (!(opt.beta >= 0.0)) throw ConfigError("beta must be >= 0");
    if (even.empty()) throw DataError("total_loss: empty anchor batch");

    const std::vector<PoolEntry> even_classes = dedup_classes(even);
    const std::vector<PoolEntry> pool = dedup_pool(odd);
    if (even_classes.size() < 2) {
        throw DataError("total_loss: anchor batch holds a single distinct class; "
                        "increase batch size or class coverage");
    }
    if (even.size() < 2 && params.variant == Variant::linear) {
        throw DataError("total_loss: linear base loss needs at least 2 anchors");
    }

    LossBreakdown out;
    out.borrowed.assign(even.size(), -1);

    // coefficient accumulation keyed by (feature_idx, source, class)
    std::map<std::tuple<std::size_t, int, int>, std::pair<double, double>> coeffs;
    auto touch = [&coeffs](std::size_t fi, SemSource src, int cls) -> std::pair<double, double>& {
        return coeffs[{fi, static_cast<int>(src), cls}];
    };

    // c(f_i, s) for every even class and pool entry, per anchor. For the
    // linear model W*s is shared across anchors, so it is computed once per
    // distinct semantic; the dot with f then reproduces the per-pair forward
    // bit for bit.
    std::vector<std::vector<double>> c_even(even.size(),
                                            std::vector<double>(even_classes.size(), 0.0));
    std::vector<std::vector<double>> c_odd(even.size(), std::vector<double>(pool.size(), 0.0));
    std::vector<std::size_t> own_col(even.size(), 0);
    if (params.variant == Variant::linear) {
        auto map_semantics = [&params](const std::vector<PoolEntry>& entries) {
            std::vector<std::vector<double>> mapped(entries.size());
            for (std::size_t j = 0; j < entries.size(); ++j) {
                if (entries[j].semantic.size() != params.n) {
                    throw DataError("total_loss: semantic length mismatch");
                }
                mapped[j].resize(params.m);
                for (std::size_t r = 0; r < params.m; ++r) {
                    const auto row = params.w.row(r);
                    double dot = 0.0;
                    for (std::size_t c = 0; c < params.n; ++c) dot += row[c] * entries[j].semantic[c];
                    mapped[j][r] = dot;
                }
            }
            return mapped;
        };
        const auto ws_even = map_semantics(even_classes);
        const auto ws_pool = map_semantics(pool);
        for (std::size_t i = 0; i < even.size(); ++i) {
            if (even[i].feature.size() != params.m) {
                throw DataError("total_loss: feature length mismatch");
            }
            for (std::size_t j = 0; j < even_classes.size(); ++j) {
                double acc = 0.0;
                for (std::size_t r = 0; r < params.m; ++r) acc += even[i].feature[r] * ws_even[j][r];
                c_even[i][j] = acc;
                touch(i, SemSource::even, even_classes[j].class_id);
                if (even_classes[j].class_id == even[i].class_id) own_col[i] = j;
            }
            for (std::size_t j = 0; j < pool.size(); ++j) {
                double acc = 0.0;
                for (std::size_t r = 0; r < params.m; ++r) acc += even[i].feature[r] * ws_pool[j][r];
                c_odd[i][j] = acc;
                touch(i, SemSource::odd, pool[j].class_id);
            }
        }
    } else {
        for (std::size_t i = 0; i < even.size(); ++i) {
            for (std::size_t j = 0; j < even_classes.size(); ++j) {
                c_even[i][j] =
                    compat_forward(params, even[i].feature, even_classes[j].semantic).value;
                touch(i, SemSource::even, even_classes[j].class_id);
                if (even_classes[j].class_id == even[i].class_id) own_col[i] = j;
            }
            for (std::size_t j = 0; j < pool.size(); ++j) {
                c_odd[i][j] = compat_forward(params, even[i].feature, pool[j].semantic).value;
                touch(i, SemSource::odd, pool[j].class_id);
            }
        }
    }

    for (std::size_t i = 0; i < even.size(); ++i) {
        const int own_class = even[i].class_id;
        const double c_own = c_even[i][own_col[i]];
        double base_i = 0.0;

        if (params.variant == Variant::linear) {
            const double k_sem = static_cast<double>(even_classes.size() - 1);
            for (std::size_t j = 0; j < even_classes.size(); ++j) {
                if (j == own_col[i]) continue;
                const double margin = 1.0 + c_even[i][j] - c_own;
                if (margin > 0.0) {
                    base_i += margin / k_sem;
                    touch(i, SemSource::even, even_classes[j].class_id).first += 1.0 / k_sem;
                    touch(i, SemSource::even, own_class).first -= 1.0 / k_sem;
                }
            }
            const double k_feat = static_cast<double>(even.size() - 1);
            for (std::size_t j = 0; j < even.size(); ++j) {
                if (j == i) continue;
                // c(f_j, s_i): anchor i's class column evaluated for feature j
                const double c_cross = c_even[j][own_col[i]];
                const double margin = 1.0 + c_cross - c_own;
                if (margin > 0.0) {
                    base_i += margin / k_feat;
                    touch(j, SemSource::even, own_class).first += 1.0 / k_feat;
                    touch(i, SemSource::even, own_class).first -= 1.0 / k_feat;
                }
            }
        } else {
            const double k_sem = static_cast<double>(even_classes.size() - 1);
            for (std::size_t j = 0; j < even_classes.size(); ++j) {
                if (j == own_col[i]) continue;
                base_i += c_even[i][j] * c_even[i][j] / k_sem;
                touch(i, SemSource::even, even_classes[j].class_id).first +=
                    2.0 * c_even[i][j] / k_sem;
            }
            base_i += (c_own - 1.0) * (c_own - 1.0);
            touch(i, SemSource::even, own_class).first += 2.0 * (c_own - 1.0);
        }
        if (!std::isfinite(base_i)) {
            throw NumericError("non-finite base loss at anchor " + std::to_string(i));
        }
        out.base += base_i;

        // borrowing: pick s_j among pool classes other than the anchor's, then
        // rank it against the rest of the pool
        std::vector<PoolEntry> candidates;
        for (const PoolEntry& p : pool) {
            if (p.class_id != own_class) candidates.push_back(p);
        }
        if (candidates.empty() || pool.size() < 2) {
            ++out.skipped_sb; // no class to borrow, or no negatives for the mean
            continue;
        }
        const PoolEntry borrowed =
            nearest_semantic(even[i].semantic, candidates, opt.metric, own_class);
        out.borrowed[i] = borrowed.class_id;
        std::size_t borrowed_col = 0;
        for (std::size_t j = 0; j < pool.size(); ++j) {
            if (pool[j].class_id == borrowed.class_id) borrowed_col = j;
        }
        const double c_borrow = c_odd[i][borrowed_col];
        const double k_pool = static_cast<double>(pool.size() - 1);
        double sb_i = 0.0;
        if (params.variant == Variant::linear) {
            for (std::size_t j = 0; j < pool.size(); ++j) {
                if (j == borrowed_col) continue;
                const double margin = 1.0 + c_odd[i][j] - c_borrow;
                if (margin > 0.0) {
                    sb_i += margin / k_pool;
                    touch(i, SemSource::odd, pool[j].class_id).second += 1.0 / k_pool;
                    touch(i, SemSource::odd, borrowed.class_id).second -= 1.0 / k_pool;
                }
            }
        } else {
            for (std::size_t j = 0; j < pool.size(); ++j) {
                if (j == borrowed_col) continue;
                sb_i += c_odd[i][j] * c_odd[i][j] / k_pool;
                touch(i, SemSource::odd, pool[j].class_id).second += 2.0 * c_odd[i][j] / k_pool;
            }
            sb_i += (c_borrow - 1.0) * (c_borrow - 1.0);
            touch(i, SemSource::odd, borrowed.class_id).second += 2.0 * (c_borrow - 1.0);
        }
        if (!std::isfinite(sb_i)) {
            throw NumericError("non-finite borrowing loss at anchor " + std::to_string(i));
        }
        out.sb += sb_i;
    }

    const std::vector<double> theta = flatten(params);
    out.decay = decay_value(theta, opt.decay_mode);
    out.total = out.base + opt.alpha * out.sb + opt.beta * out.decay;

    out.upstream.reserve(coeffs.size());
    for (const auto& [key, pair_coeff] : coeffs) {
        PairGrad pg;
        pg.feature_idx = std::get<0>(key);
        pg.source = static_cast<SemSource>(std::get<1>(key));
        pg.sem_class = std::get<2>(key);
        pg.base_coeff = pair_coeff.first;
        pg.sb_coeff = pair_coeff.second;
        pg.coeff = pair_coeff.first + opt.alpha * pair_coeff.second;
        out.upstream.push_back(pg);
    }
    return out;
}

}  // namespace gzsb
