#include "gzsb/loss.hpp"

#include <gtest/gtest.h>

#include <vector>

#include "gzsb/gradcheck.hpp"
#include "gzsb/model.hpp"
#include "gzsb/rng.hpp"

using namespace gzsb;

namespace {

std::vector<Anchor> two_anchors() {
    // distinct classes, hand-pickable compatibilities via W
    return {{{1, 0}, {1, 0}, 0}, {{0, 1}, {0, 1}, 1}};
}

} // namespace

TEST(HingeFeatureLoss, HandValues) {
    EXPECT_DOUBLE_EQ(hinge_feature_loss(2.0, std::vector<double>{0.5}), 0.0);
    EXPECT_DOUBLE_EQ(hinge_feature_loss(0.0, std::vector<double>{0.0}), 1.0);
    EXPECT_DOUBLE_EQ(hinge_feature_loss(1.0, std::vector<double>{0.8, 0.3}), 0.55);
    EXPECT_THROW(hinge_feature_loss(1.0, std::vector<double>{}), DataError);
}

TEST(HingeSemanticLoss, HandValues) {
    EXPECT_DOUBLE_EQ(hinge_semantic_loss(2.0, std::vector<double>{0.5}), 0.0);
    EXPECT_DOUBLE_EQ(hinge_semantic_loss(0.2, std::vector<double>{0.2, 0.2}), 1.0);
    EXPECT_DOUBLE_EQ(hinge_semantic_loss(0.0, std::vector<double>{-5.0}), 0.0);
}

TEST(LinearBaseLoss, SumsBothSides) {
    EXPECT_DOUBLE_EQ(
        linear_base_loss(2.0, std::vector<double>{0.0}, std::vector<double>{0.0}), 0.0);
    // all compatibilities equal: each hinge term is exactly 1
    EXPECT_DOUBLE_EQ(
        linear_base_loss(0.0, std::vector<double>{0.0}, std::vector<double>{0.0}), 2.0);
    EXPECT_DOUBLE_EQ(
        linear_base_loss(1.0, std::vector<double>{0.8, 0.3}, std::vector<double>{-5.0, -5.0}),
        0.55);
}

TEST(MseBaseLoss, HandValues) {
    EXPECT_DOUBLE_EQ(mse_base_loss(1.0, std::vector<double>{0.0}), 0.0);
    EXPECT_DOUBLE_EQ(mse_base_loss(0.5, std::vector<double>{0.5}), 0.5);
    EXPECT_DOUBLE_EQ(mse_base_loss(0.0, std::vector<double>{1.0}), 2.0);
}

TEST(SbHingeLoss, HandValues) {
    EXPECT_DOUBLE_EQ(sb_hinge_loss(2.0, std::vector<double>{0.5}), 0.0);
    EXPECT_DOUBLE_EQ(sb_hinge_loss(0.5, std::vector<double>{0.5}), 1.0);
    EXPECT_DOUBLE_EQ(sb_hinge_loss(1.0, std::vector<double>{0.9, 0.1}), 0.5);
}

TEST(SbMseLoss, HandValues) {
    EXPECT_DOUBLE_EQ(sb_mse_loss(1.0, std::vector<double>{0.0}), 0.0);
    EXPECT_DOUBLE_EQ(sb_mse_loss(0.0, std::vector<double>{0.0}), 1.0);
    EXPECT_NEAR(sb_mse_loss(0.8, std::vector<double>{0.2, 0.4}), 0.14, 1e-12);
}

TEST(Losses, MonotoneInCompatibilities) {
    Rng rng(4);
    for (int rep = 0; rep < 200; ++rep) {
        const double c_pos = rng.uniform(-1, 2);
        std::vector<double> others(3);
        for (double& v : others) v = rng.uniform(-1, 2);

        // raising a wrong-pair compatibility never decreases any loss
        std::vector<double> raised = others;
        raised[rep % 3] += rng.u01();
        EXPECT_GE(hinge_feature_loss(c_pos, raised), hinge_feature_loss(c_pos, others));
        EXPECT_GE(sb_hinge_loss(c_pos, raised), sb_hinge_loss(c_pos, others));
        if (raised[rep % 3] >= 0.0 && others[rep % 3] >= 0.0) {
            EXPECT_GE(mse_base_loss(c_pos, raised), mse_base_loss(c_pos, others));
        }

        // raising the positive-pair compatibility never increases the hinges
        EXPECT_LE(hinge_feature_loss(c_pos + 0.5, others), hinge_feature_loss(c_pos, others));
        EXPECT_LE(hinge_semantic_loss(c_pos + 0.5, others), hinge_semantic_loss(c_pos, others));
    }
}

TEST(TotalLoss, AlphaZeroKeepsSbOutOfTotal) {
    const ModelParams params = init_params(Variant::linear, 2, 2, {}, 3);
    const std::vector<Anchor> even = two_anchors();
    const std::vector<PoolEntry> odd{{0, {1, 0}}, {1, {0, 1}}};
    LossOptions opt;
    opt.alpha = 0.0;
    opt.beta = 0.25;
    const LossBreakdown breakdown = total_loss(params, even, odd, opt);
    EXPECT_GT(breakdown.sb, 0.0); // still computed
    EXPECT_EQ(breakdown.total, breakdown.base + 0.25 * breakdown.decay);
    for (const PairGrad& pg : breakdown.upstream) EXPECT_EQ(pg.coeff, pg.base_coeff);
}

TEST(TotalLoss, InternalConsistency) {
    Rng rng(6);
    for (int rep = 0; rep < 20; ++rep) {
        const Variant variant = rep % 2 == 0 ? Variant::linear : Variant::nonlinear;
        const ModelParams params = init_params(variant, 3, 2, {4, 4}, rng.next());
        std::vector<Anchor> even;
        for (int i = 0; i < 3; ++i) {
            Anchor anchor{{rng.u01(), rng.u01(), rng.u01()}, {rng.u01(), rng.u01()}, i};
            even.push_back(std::move(anchor));
        }
        std::vector<PoolEntry> odd{{1, {rng.u01(), rng.u01()}}, {5, {rng.u01(), rng.u01()}}};
        LossOptions opt;
        opt.alpha = 0.4;
        opt.beta = 0.1;
        const LossBreakdown b = total_loss(params, even, odd, opt);
        EXPECT_EQ(b.total, b.base + 0.4 * b.sb + 0.1 * b.decay);
        EXPECT_GE(b.base, 0.0);
        EXPECT_GE(b.sb, 0.0);
    }
}

TEST(TotalLoss, ZeroLinearModelMatchesAllEqualCase) {
    // W = 0 makes every compatibility 0: each anchor contributes exactly 2
    ModelParams params = init_params(Variant::linear, 2, 2, {}, 3);
    params.w = Matrix(2, 2, 0.0);
    const std::vector<Anchor> even = two_anchors();
    const std::vector<PoolEntry> odd{{0, {1, 0}}, {1, {0, 1}}};
    LossOptions opt;
    opt.alpha = 0.0;
    opt.beta = 0.0;
    const LossBreakdown b = total_loss(params, even, odd, opt);
    EXPECT_DOUBLE_EQ(b.base, 4.0);
    EXPECT_DOUBLE_EQ(b.decay, 0.0);
    EXPECT_DOUBLE_EQ(b.total, 4.0);
}

TEST(TotalLoss, BorrowedExcludesAnchorClassAndSkipsWhenEmpty) {
    const ModelParams params = init_params(Variant::linear, 2, 2, {}, 3);
    const std::vector<Anchor> even = two_anchors();
    {
        const std::vector<PoolEntry> odd{{0, {1, 0}}, {1, {0, 1}}};
        const LossBreakdown b = total_loss(params, even, odd, {});
        EXPECT_EQ(b.borrowed[0], 1); // anchor class 0 cannot borrow itself
        EXPECT_EQ(b.borrowed[1], 0);
        EXPECT_EQ(b.skipped_sb, 0);
    }
    {
        // pool holds only anchor 0's class: anchor 0 skips, anchor 1 has no
        // negatives left (single-entry pool) and skips too
        const std::vector<PoolEntry> odd{{0, {1, 0}}};
        const LossBreakdown b = total_loss(params, even, odd, {});
        EXPECT_EQ(b.borrowed[0], -1);
        EXPECT_EQ(b.borrowed[1], -1);
        EXPECT_EQ(b.skipped_sb, 2);
        EXPECT_EQ(b.sb, 0.0);
    }
}

TEST(TotalLoss, UpstreamCoversEveryEvaluatedPair) {
    const ModelParams params = init_params(Variant::linear, 2, 2, {}, 3);
    const std::vector<Anchor> even = two_anchors();
    const std::vector<PoolEntry> odd{{2, {0.5, 0.5}}, {3, {0.2, 0.8}}};
    const LossBreakdown b = total_loss(params, even, odd, {});
    // 2 anchors x (2 even classes + 2 pool classes)
    EXPECT_EQ(b.upstream.size(), 8u);
}

TEST(TotalLoss, AlphaValidation) {
    const ModelParams params = init_params(Variant::linear, 2, 2, {}, 3);
    const std::vector<Anchor> even = two_anchors();
    const std::vector<PoolEntry> odd{{0, {1, 0}}, {1, {0, 1}}};
    LossOptions opt;
    opt.alpha = 1.5;
    EXPECT_THROW(total_loss(params, even, odd, opt), ConfigError);
    opt.allow_large_alpha = true;
    EXPECT_NO_THROW(total_loss(params, even, odd, opt));
    opt.alpha = -0.1;
    EXPECT_THROW(total_loss(params, even, odd, opt), ConfigError);
}

TEST(TotalLoss, RejectsDegenerateBatches) {
    const ModelParams params = init_params(Variant::linear, 2, 2, {}, 3);
    const std::vector<PoolEntry> odd{{0, {1, 0}}, {1, {0, 1}}};
    EXPECT_THROW(total_loss(params, std::vector<Anchor>{}, odd, {}), DataError);
    const std::vector<Anchor> single_class{{{1, 0}, {1, 0}, 0}, {{0, 1}, {1, 0}, 0}};
    EXPECT_THROW(total_loss(params, single_class, odd, {}), DataError);
}

TEST(Decay, ValuesAndGradient) {
    const std::vector<double> theta{3.0, 4.0};
    EXPECT_DOUBLE_EQ(decay_value(theta, DecayMode::norm), 5.0);
    EXPECT_DOUBLE_EQ(decay_value(theta, DecayMode::squared), 25.0);

    std::vector<double> grad(2, 0.0);
    decay_grad_accum(theta, DecayMode::norm, 2.0, grad);
    EXPECT_DOUBLE_EQ(grad[0], 2.0 * 3.0 / 5.0);
    EXPECT_DOUBLE_EQ(grad[1], 2.0 * 4.0 / 5.0);

    grad.assign(2, 0.0);
    decay_grad_accum(theta, DecayMode::squared, 0.5, grad);
    EXPECT_DOUBLE_EQ(grad[0], 3.0);
    EXPECT_DOUBLE_EQ(grad[1], 4.0);

    // norm gradient pinned to 0 at the origin
    const std::vector<double> zero{0.0, 0.0};
    grad.assign(2, 0.0);
    decay_grad_accum(zero, DecayMode::norm, 1.0, grad);
    EXPECT_EQ(grad, zero);
}

TEST(GradCheck, QuickPassBothVariants) {
    for (const GradCheckResult& result : run_gradcheck(1234, 3)) {
        EXPECT_TRUE(result.pass) << result.family << " max_rel_err=" << result.max_rel_err;
    }
}

TEST(GradCheck, DetectsInjectedSignFlip) {
    // a corrupted analytic gradient must trip the comparison
    const std::vector<double> analytic{0.5, -2.0, 1.0};
    std::vector<double> flipped = analytic;
    for (double& v : flipped) v = -v;
    EXPECT_LT(max_rel_err(analytic, analytic), 1e-12);
    EXPECT_GT(max_rel_err(flipped, analytic), 1e-4);
}
