#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gzsb/loss.hpp"
#include "gzsb/model.hpp"
#include "gzsb/oracle.hpp"
#include "gzsb/rng.hpp"
#include "gzsb/types.hpp"

// Gradient verification harness shared by the CLI and the acceptance suite:
// analytic gradients of the base, borrowing, and total losses against
// central finite differences, on random toy batches of both model variants.
// Cases that land within 1e-6 of a hinge margin or ReLU pre-activation are
// re-drawn, since the subgradient there legitimately disagrees with the
// two-sided difference quotient.

namespace gzsb {

struct GradCheckResult {
    std::string family; // base | sb | total
    Variant variant = Variant::linear;
    double max_rel_err = 0.0;
    bool pass = false;
};

// max_k |a_k - n_k| / max(1, |a_k|)
inline double max_rel_err(std::span<const double> analytic, std::span<const double> numeric) {
    double worst = 0.0;
    for (std::size_t k = 0; k < analytic.size(); ++k) {
        const double denom = std::max(1.0, std::fabs(analytic[k]));
        worst = std::max(worst, std::fabs(analytic[k] - numeric[k]) / denom);
    }
    return worst;
}

namespace detail {

struct ToyCase {
    ModelParams params;
    std::vector<Anchor> even;
    std::vector<PoolEntry> odd;
};

inline ToyCase draw_toy_case(Rng& rng, Variant variant) {
    ToyCase toy;
    const std::size_t m = 2 + rng.bounded(7); // <= 8
    const std::size_t n = 2 + rng.bounded(5); // <= 6
    const std::size_t batch = 2 + rng.bounded(5); // <= 6
    toy.params = init_params(variant, m, n, {3 + rng.bounded(3), 3 + rng.bounded(3)}, rng.next());
    if (variant == Variant::nonlinear) {
        for (DenseLayer& layer : toy.params.layers) {
            for (double& b : layer.b) b = rng.uniform(-0.3, 0.3);
        }
    }
    for (std::size_t i = 0; i < batch; ++i) {
        Anchor anchor;
        anchor.class_id = static_cast<int>(i); // distinct classes
        anchor.feature.resize(m);
        for (double& v : anchor.feature) v = rng.uniform(-1.0, 1.0);
        anchor.semantic.resize(n);
        for (double& v : anchor.semantic) v = rng.u01();
        toy.even.push_back(std::move(anchor));
    }
    const std::size_t pool_size = 2 + rng.bounded(5);
    for (std::size_t j = 0; j < pool_size; ++j) {
        PoolEntry entry;
        // overlap some classes with the anchors, add some fresh ones
        entry.class_id = static_cast<int>(rng.bounded(batch + pool_size));
        entry.semantic.resize(n);
        for (double& v : entry.semantic) v = rng.u01();
        toy.odd.push_back(std::move(entry));
    }
    return toy;
}

// Smallest distance to a nondifferentiable point across the whole breakdown.
inline double kink_distance(const ToyCase& toy, const LossOptions& opt) {
    double dist = 1e300;
    const std::vector<PoolEntry> even_classes = dedup_classes(toy.even);
    const std::vector<PoolEntry> pool = dedup_pool(toy.odd);
    const LossBreakdown breakdown = total_loss(toy.params, toy.even, toy.odd, opt);

    auto compat = [&](const FeatureVector& f, const SemanticVector& s) {
        const CompatibilityOutput out = compat_forward(toy.params, f, s);
        if (toy.params.variant == Variant::nonlinear) {
            for (double z : out.cache.z1) dist = std::min(dist, std::fabs(z));
            for (double z : out.cache.z2) dist = std::min(dist, std::fabs(z));
            for (double z : out.cache.z3) dist = std::min(dist, std::fabs(z));
        }
        return out.value;
    };

    for (std::size_t i = 0; i < toy.even.size(); ++i) {
        const Anchor& anchor = toy.even[i];
        const double c_own = compat(anchor.feature, anchor.semantic);
        if (toy.params.variant == Variant::linear) {
            for (const PoolEntry& entry : even_classes) {
                if (entry.class_id == anchor.class_id) continue;
                dist = std::min(dist,
                                std::fabs(1.0 + compat(anchor.feature, entry.semantic) - c_own));
            }
            for (std::size_t j = 0; j < toy.even.size(); ++j) {
                if (j == i) continue;
                dist = std::min(
                    dist, std::fabs(1.0 + compat(toy.even[j].feature, anchor.semantic) - c_own));
            }
            if (breakdown.borrowed[i] >= 0) {
                const SemanticVector* borrowed = nullptr;
                for (const PoolEntry& entry : pool) {
                    if (entry.class_id == breakdown.borrowed[i]) borrowed = &entry.semantic;
                }
                const double c_borrow = compat(anchor.feature, *borrowed);
                for (const PoolEntry& entry : pool) {
                    if (entry.class_id == breakdown.borrowed[i]) continue;
                    dist = std::min(
                        dist, std::fabs(1.0 + compat(anchor.feature, entry.semantic) - c_borrow));
                }
            }
        } else {
            // MSE terms are smooth; only ReLU pre-activations matter, and
            // compat() already folded them in
            for (const PoolEntry& entry : pool) compat(anchor.feature, entry.semantic);
        }
    }
    return dist;
}

}  // namespace detail

inline std::vector<GradCheckResult> run_gradcheck(std::uint64_t seed, int reps = 20,
                                                  double tol = 1e-4, double eps = 1e-5) {
    Rng rng(seed);
    LossOptions opt;
    opt.alpha = 0.3;
    opt.beta = 0.01;

    std::vector<GradCheckResult> results;
    for (Variant variant : {Variant::linear, Variant::nonlinear}) {
        GradCheckResult base{"base", variant, 0.0, true};
        GradCheckResult sb{"sb", variant, 0.0, true};
        GradCheckResult total{"total", variant, 0.0, true};

        for (int rep = 0; rep < reps; ++rep) {
            // 1e-3 keeps every margin and pre-activation two orders of
            // magnitude beyond what a +/- eps probe can move it
            detail::ToyCase toy = detail::draw_toy_case(rng, variant);
            int guard = 0;
            while (detail::kink_distance(toy, opt) < 1e-3 && guard++ < 100) {
                toy = detail::draw_toy_case(rng, variant);
            }

            const LossBreakdown breakdown = total_loss(toy.params, toy.even, toy.odd, opt);
            const std::vector<double> theta = flatten(toy.params);
            const std::vector<PoolEntry> even_classes = dedup_classes(toy.even);
            const std::vector<PoolEntry> pool = dedup_pool(toy.odd);

            auto assemble = [&](auto coeff_of) {
                std::vector<double> grad(theta.size(), 0.0);
                for (const PairGrad& pg : breakdown.upstream) {
                    const double coeff = coeff_of(pg);
                    if (coeff == 0.0) continue;
                    const auto& side = pg.source == SemSource::even ? even_classes : pool;
                    const SemanticVector* sem = nullptr;
                    for (const PoolEntry& entry : side) {
                        if (entry.class_id == pg.sem_class) sem = &entry.semantic;
                    }
                    const FeatureVector& f = toy.even[pg.feature_idx].feature;
                    const CompatibilityOutput fwd = compat_forward(toy.params, f, *sem);
                    compat_grad_accum(toy.params, f, *sem, fwd.cache, coeff, grad);
                }
                return grad;
            };
            auto numeric_of = [&](auto field) {
                return oracle::finite_diff_grad(
                    [&](std::span<const double> t) {
                        const ModelParams p = unflatten(t, toy.params);
                        return field(total_loss(p, toy.even, toy.odd, opt));
                    },
                    theta, eps);
            };

            const auto base_grad = assemble([](const PairGrad& pg) { return pg.base_coeff; });
            base.max_rel_err = std::max(
                base.max_rel_err,
                max_rel_err(base_grad,
                            numeric_of([](const LossBreakdown& b) { return b.base; })));

            const auto sb_grad = assemble([](const PairGrad& pg) { return pg.sb_coeff; });
            sb.max_rel_err = std::max(
                sb.max_rel_err,
                max_rel_err(sb_grad, numeric_of([](const LossBreakdown& b) { return b.sb; })));

            auto total_grad = assemble([](const PairGrad& pg) { return pg.coeff; });
            decay_grad_accum(theta, opt.decay_mode, opt.beta, total_grad);
            total.max_rel_err = std::max(
                total.max_rel_err,
                max_rel_err(total_grad,
                            numeric_of([](const LossBreakdown& b) { return b.total; })));
        }
        base.pass = base.max_rel_err < tol;
        sb.pass = sb.max_rel_err < tol;
        total.pass = total.max_rel_err < tol;
        results.push_back(base);
        results.push_back(sb);
        results.push_back(total);
    }
    return results;
}

}  // namespace gzsb
