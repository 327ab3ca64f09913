#include "gzsb/evaluator.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "gzsb/oracle.hpp"
#include "gzsb/rng.hpp"
#include "gzsb/synthgen.hpp"
#include "test_util.hpp"

using namespace gzsb;

TEST(Classify, TieBreaksToLowestClassId) {
    ModelParams params = init_params(Variant::linear, 2, 2, {}, 1);
    params.w = Matrix(2, 2, 0.0);
    const std::vector<PoolEntry> space{{4, {1, 0}}, {2, {0, 1}}, {9, {1, 1}}};
    EXPECT_EQ(classify(params, std::vector<double>{1, 1}, space), 2);
}

TEST(Classify, SingleCandidateAndEmptySpace) {
    const ModelParams params = init_params(Variant::linear, 2, 2, {}, 1);
    const std::vector<PoolEntry> one{{7, {1, 0}}};
    EXPECT_EQ(classify(params, std::vector<double>{1, 1}, one), 7);
    EXPECT_THROW(classify(params, std::vector<double>{1, 1}, std::vector<PoolEntry>{}),
                 DataError);
}

TEST(Classify, MatchesExhaustiveCompatibilityTable) {
    ModelParams params = init_params(Variant::linear, 2, 2, {}, 1);
    params.w(0, 0) = 2.0;
    params.w(0, 1) = -1.0;
    params.w(1, 0) = 0.5;
    params.w(1, 1) = 1.0;
    const std::vector<PoolEntry> space{{0, {1, 0}}, {1, {0, 1}}, {2, {0.5, 0.5}}};
    Rng rng(3);
    for (int rep = 0; rep < 100; ++rep) {
        const std::vector<double> f{rng.uniform(-2, 2), rng.uniform(-2, 2)};
        int best = -1;
        double best_c = 0.0;
        for (const PoolEntry& entry : space) {
            const double c = f[0] * (params.w(0, 0) * entry.semantic[0] +
                                     params.w(0, 1) * entry.semantic[1]) +
                             f[1] * (params.w(1, 0) * entry.semantic[0] +
                                     params.w(1, 1) * entry.semantic[1]);
            if (best < 0 || c > best_c) {
                best = entry.class_id;
                best_c = c;
            }
        }
        EXPECT_EQ(classify(params, f, space), best);
    }
}

TEST(Classify, InvariantUnderMonotoneTransformOfCompatibilities) {
    // argmax of c equals argmax of any strictly increasing transform of c
    const ModelParams params = init_params(Variant::linear, 3, 2, {}, 5);
    std::vector<PoolEntry> space;
    Rng rng(6);
    for (int j = 0; j < 6; ++j) space.push_back({j, {rng.u01(), rng.u01()}});
    for (int rep = 0; rep < 50; ++rep) {
        const std::vector<double> f{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        int transformed_best = -1;
        double best_t = 0.0;
        for (const PoolEntry& entry : space) {
            const double c = compat_forward(params, f, entry.semantic).value;
            const double t = std::tanh(c) * 3.0 + 1.0; // strictly increasing
            if (transformed_best < 0 || t > best_t) {
                transformed_best = entry.class_id;
                best_t = t;
            }
        }
        EXPECT_EQ(classify(params, f, space), transformed_best);
    }
}

TEST(PerClassTop1, Counting) {
    const std::vector<std::pair<int, int>> all_correct{{0, 0}, {1, 1}, {0, 0}};
    const std::vector<int> classes{0, 1};
    for (const auto& [cls, acc] : per_class_top1(all_correct, classes)) EXPECT_EQ(acc, 1.0);

    const std::vector<std::pair<int, int>> half{{0, 0}, {0, 1}, {0, 0}, {0, 2}, {1, 1}};
    const auto acc = per_class_top1(half, classes);
    EXPECT_DOUBLE_EQ(acc.at(0), 0.5);

    const std::vector<std::pair<int, int>> none{{0, 1}, {1, 0}};
    for (const auto& [cls, a] : per_class_top1(none, classes)) EXPECT_EQ(a, 0.0);

    EXPECT_THROW(per_class_top1(none, std::vector<int>{0, 1, 5}), DataError);
}

TEST(HarmonicMean, ReferenceScoreRows) {
    EXPECT_EQ(format_pct(harmonic_mean(29.1, 59.8), true), "39.1");
    EXPECT_EQ(format_pct(harmonic_mean(27.2, 59.9), true), "37.4");
    EXPECT_EQ(format_pct(harmonic_mean(41.7, 64.2), true), "50.6");
    EXPECT_EQ(format_pct(harmonic_mean(40.0, 63.0), true), "48.9");
}

TEST(HarmonicMean, Identities) {
    EXPECT_EQ(harmonic_mean(0.0, 0.7), 0.0);
    EXPECT_EQ(harmonic_mean(0.0, 0.0), 0.0);
    EXPECT_NEAR(harmonic_mean(0.42, 0.42), 0.42, 1e-15);
    Rng rng(8);
    for (int rep = 0; rep < 200; ++rep) {
        const double u = rng.u01(), s = rng.u01();
        const double h = harmonic_mean(u, s);
        EXPECT_LE(h, 2.0 * std::min(u, s) + 1e-15);
        EXPECT_LE(h, std::max(u, s) + 1e-15);
        EXPECT_GE(h, 0.0);
    }
}

TEST(GzslReport, RecomputationIdentityAndCounts) {
    SynthSpec spec;
    spec.n_seen = 4;
    spec.n_unseen = 2;
    spec.per_class_train = 6;
    spec.per_class_test = 5;
    spec.m = 6;
    spec.n = 3;
    spec.seed = 10;
    const Dataset ds = gen_dataset(spec);
    const ModelParams params = init_params(Variant::linear, 6, 3, {}, 2);
    const EvalReport report = gzsl_report(params, ds);

    double u = 0.0, s = 0.0;
    for (int cls : ds.split.unseen_classes) u += report.per_class_acc.at(cls);
    for (int cls : ds.split.seen_classes) s += report.per_class_acc.at(cls);
    u /= static_cast<double>(ds.split.unseen_classes.size());
    s /= static_cast<double>(ds.split.seen_classes.size());
    EXPECT_NEAR(report.u, u, 1e-12);
    EXPECT_NEAR(report.s, s, 1e-12);
    EXPECT_NEAR(report.h, harmonic_mean(u, s), 1e-12);

    for (int cls : ds.split.seen_classes) {
        EXPECT_EQ(report.counts.at(cls).total, 5);
    }
    for (int cls : ds.split.unseen_classes) {
        EXPECT_EQ(report.counts.at(cls).total, 5);
    }
}

TEST(GzslReport, AgreesWithBruteForceClassifier) {
    SynthSpec spec;
    spec.n_seen = 3;
    spec.n_unseen = 2;
    spec.per_class_train = 4;
    spec.per_class_test = 3;
    spec.m = 4;
    spec.n = 3;
    spec.seed = 12;
    const Dataset ds = gen_dataset(spec);
    const ModelParams params = init_params(Variant::linear, 4, 3, {}, 9);

    std::vector<PoolEntry> space;
    for (std::size_t c = 0; c < ds.num_classes(); ++c) {
        const auto row = ds.class_semantics.row(c);
        space.push_back({static_cast<int>(c), {row.begin(), row.end()}});
    }
    int correct_seen = 0;
    for (std::size_t idx : ds.split.test_seen_idx) {
        if (oracle::brute_force_classify(params, ds.features.row(idx), space) == ds.labels[idx]) {
            ++correct_seen;
        }
    }
    const EvalReport report = gzsl_report(params, ds);
    int reported = 0;
    for (int cls : ds.split.seen_classes) reported += report.counts.at(cls).correct;
    EXPECT_EQ(reported, correct_seen);
}

TEST(GzslReport, EmptyTestSplitRejected) {
    Dataset ds = testutil::toy_dataset();
    ds.split.test_unseen_idx.clear();
    const ModelParams params = init_params(Variant::linear, 3, 2, {}, 1);
    EXPECT_THROW(gzsl_report(params, ds), DataError);
}

TEST(ReportJson, PercentScale) {
    EvalReport report;
    report.u = 0.291;
    report.s = 0.598;
    report.h = harmonic_mean(report.u, report.s);
    report.per_class_acc[3] = 0.5;
    report.counts[3] = {1, 2};
    const nlohmann::json j = report_json(report);
    EXPECT_NEAR(j["u"].get<double>(), 29.1, 1e-9);
    EXPECT_NEAR(j["s"].get<double>(), 59.8, 1e-9);
    EXPECT_GE(j["h"].get<double>(), 0.0);
    EXPECT_LE(j["h"].get<double>(), 100.0);
    EXPECT_NEAR(j["per_class_acc"]["3"].get<double>(), 50.0, 1e-9);

    const std::string table = report_table(report);
    EXPECT_NE(table.find("u       29.1"), std::string::npos);
    EXPECT_NE(table.find("s       59.8"), std::string::npos);
}
