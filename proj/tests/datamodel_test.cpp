#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "gzsb/bundle.hpp"
#include "gzsb/dataset.hpp"
#include "gzsb/rng.hpp"
#include "gzsb/similarity.hpp"
#include "test_util.hpp"

using namespace gzsb;
using testutil::TempDir;
using testutil::toy_dataset;

namespace {

bool has_finding(const ValidationReport& report, const std::string& needle) {
    for (const std::string& finding : report.findings) {
        if (finding.find(needle) != std::string::npos) return true;
    }
    return false;
}

} // namespace

TEST(Validate, CleanDataset) {
    EXPECT_TRUE(validate(toy_dataset()).ok());
}

TEST(Validate, FindsEachCorruption) {
    {
        Dataset ds = toy_dataset();
        ds.features(1, 2) = std::numeric_limits<double>::quiet_NaN();
        EXPECT_TRUE(has_finding(validate(ds), "non-finite feature at (1,2)"));
    }
    {
        Dataset ds = toy_dataset();
        ds.class_semantics(0, 0) = std::numeric_limits<double>::infinity();
        EXPECT_TRUE(has_finding(validate(ds), "non-finite semantic"));
    }
    {
        Dataset ds = toy_dataset();
        ds.labels[1] = 9;
        EXPECT_TRUE(has_finding(validate(ds), "unknown class id 9"));
    }
    {
        Dataset ds = toy_dataset();
        ds.split.test_seen_idx = {0}; // also in train
        EXPECT_TRUE(has_finding(validate(ds), "overlapping split"));
    }
    {
        Dataset ds = toy_dataset();
        ds.labels[0] = 2; // unseen class as a train label
        EXPECT_TRUE(has_finding(validate(ds), "unseen class in train"));
    }
    {
        Dataset ds = toy_dataset();
        ds.split.seen_classes = {0};
        EXPECT_TRUE(has_finding(validate(ds), "fewer than 2 seen classes"));
    }
    {
        Dataset ds;
        EXPECT_TRUE(has_finding(validate(ds), "empty dataset"));
    }
}

TEST(Bundle, RoundTripExact) {
    TempDir tmp;
    const Dataset ds = toy_dataset();
    save_bundle(ds, tmp / "bundle");
    const Dataset loaded = load_bundle(tmp / "bundle");
    EXPECT_EQ(loaded, ds);
}

TEST(Bundle, SecondSaveIsByteIdentical) {
    TempDir tmp;
    // 100-instance synthetic-ish bundle with values not representable in f32
    Rng rng(3);
    Dataset ds = toy_dataset();
    ds.features = Matrix(100, 3);
    for (double& v : ds.features.data) v = rng.uniform(-1, 1);
    ds.labels.assign(100, 0);
    for (std::size_t i = 50; i < 98; ++i) ds.labels[i] = 1;
    ds.labels[98] = 2;
    ds.labels[99] = 2;
    ds.split.train_idx.clear();
    ds.split.test_seen_idx.clear();
    ds.split.test_unseen_idx = {98, 99};
    for (std::size_t i = 0; i < 96; ++i) ds.split.train_idx.push_back(i);
    ds.split.test_seen_idx = {96, 97};
    ASSERT_TRUE(validate(ds).ok());

    save_bundle(ds, tmp / "a");
    const Dataset once = load_bundle(tmp / "a");
    save_bundle(once, tmp / "b");
    EXPECT_EQ(testutil::read_file(tmp / "a" / "features.bin"),
              testutil::read_file(tmp / "b" / "features.bin"));
    EXPECT_EQ(testutil::read_file(tmp / "a" / "semantics.bin"),
              testutil::read_file(tmp / "b" / "semantics.bin"));
    EXPECT_EQ(testutil::read_file(tmp / "a" / "labels.bin"),
              testutil::read_file(tmp / "b" / "labels.bin"));
    EXPECT_EQ(load_bundle(tmp / "b"), once);
}

TEST(Bundle, SaveRejectsEmptyDataset) {
    TempDir tmp;
    Dataset ds;
    EXPECT_THROW(save_bundle(ds, tmp / "x"), DataError);
}

TEST(Bundle, LoadErrors) {
    TempDir tmp;
    EXPECT_THROW(load_bundle(tmp / "nope"), DataError);

    const Dataset ds = toy_dataset();
    save_bundle(ds, tmp / "bundle");

    { // magic corruption
        std::fstream f(tmp / "bundle" / "features.bin",
                       std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(0);
        f.write("XXXX", 4);
    }
    try {
        load_bundle(tmp / "bundle");
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("bad magic"), std::string::npos);
    }

    save_bundle(ds, tmp / "bundle"); // restore
    { // labels referencing a class outside the semantics table
        std::ofstream f(tmp / "bundle" / "labels.bin", std::ios::binary);
        detail::put_magic(f, "GZSL");
        detail::put_u32(f, 4);
        for (std::uint32_t label : {0u, 1u, 0u, 9u}) detail::put_u32(f, label);
    }
    try {
        load_bundle(tmp / "bundle");
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("unknown class id 9"), std::string::npos);
    }

    save_bundle(ds, tmp / "bundle");
    { // meta dimension inconsistency
        std::ofstream f(tmp / "bundle" / "meta.txt");
        f << "n=5\nm=3\ninstances=4\nclasses=3\nseen_classes=2\nunseen_classes=1\n"
             "scale_applied=0\n";
    }
    try {
        load_bundle(tmp / "bundle");
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("n=5"), std::string::npos);
    }

    save_bundle(ds, tmp / "bundle");
    { // overlapping split
        Dataset bad = ds;
        bad.split.test_seen_idx = {0};
        // bypass save-time validation by writing split.txt directly
        detail::write_split(tmp / "bundle" / "split.txt", bad.split);
    }
    try {
        load_bundle(tmp / "bundle");
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("overlapping split"), std::string::npos);
    }
}

TEST(Bundle, MalformedTextFilesAreDataErrors) {
    TempDir tmp;
    save_bundle(toy_dataset(), tmp / "bundle");
    {
        std::ofstream f(tmp / "bundle" / "split.txt");
        f << "[seen]\n0 banana\n";
    }
    EXPECT_THROW(load_bundle(tmp / "bundle"), DataError);

    save_bundle(toy_dataset(), tmp / "bundle");
    {
        std::ofstream f(tmp / "bundle" / "meta.txt");
        f << "n=two\nm=3\ninstances=4\nclasses=3\nseen_classes=2\nunseen_classes=1\n";
    }
    EXPECT_THROW(load_bundle(tmp / "bundle"), DataError);
}

TEST(Bundle, TruncatedFile) {
    TempDir tmp;
    save_bundle(toy_dataset(), tmp / "bundle");
    const auto path = tmp / "bundle" / "features.bin";
    const std::string bytes = testutil::read_file(path);
    std::ofstream(path, std::ios::binary).write(bytes.data(), 10);
    try {
        load_bundle(tmp / "bundle");
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("truncated"), std::string::npos);
    }
}

TEST(ScaleSemantics, MeanAlreadyAtTarget) {
    // two classes with norms 1 and 3: mean norm is already 2, so k == 1
    Dataset ds;
    ds.class_semantics = Matrix(2, 2);
    ds.class_semantics(0, 0) = 1.0;
    ds.class_semantics(1, 1) = 3.0;
    const Dataset scaled = scale_semantics(ds, 2.0);
    EXPECT_EQ(scaled.class_semantics, ds.class_semantics);
    EXPECT_EQ(scaled.scale_applied, 2.0);
}

TEST(ScaleSemantics, HandComputedFactor) {
    Dataset ds = toy_dataset();
    ds.class_semantics = Matrix(1, 2);
    ds.class_semantics(0, 0) = 3.0;
    ds.class_semantics(0, 1) = 4.0; // norm 5
    const Dataset scaled = scale_semantics(ds, 1.0);
    EXPECT_DOUBLE_EQ(scaled.class_semantics(0, 0), 0.6);
    EXPECT_DOUBLE_EQ(scaled.class_semantics(0, 1), 0.8);
}

TEST(ScaleSemantics, Errors) {
    Dataset ds = toy_dataset();
    EXPECT_THROW(scale_semantics(ds, 0.0), ConfigError);
    EXPECT_THROW(scale_semantics(ds, -1.0), ConfigError);
    ds.class_semantics = Matrix(2, 2, 0.0);
    EXPECT_THROW(scale_semantics(ds, 1.0), DataError);
}

TEST(ScaleSemantics, IdempotentAtSameTarget) {
    Rng rng(8);
    Dataset ds = toy_dataset();
    for (double& v : ds.class_semantics.data) v = rng.u01() + 0.1;
    const Dataset once = scale_semantics(ds, 2.5);
    const Dataset twice = scale_semantics(once, 2.5);
    for (std::size_t i = 0; i < once.class_semantics.data.size(); ++i) {
        EXPECT_NEAR(twice.class_semantics.data[i], once.class_semantics.data[i],
                    1e-12 * std::abs(once.class_semantics.data[i]));
    }
}

TEST(ScaleSemantics, PreservesNearestNeighborArgmax) {
    Rng rng(21);
    Dataset ds = toy_dataset();
    ds.class_semantics = Matrix(6, 4);
    for (double& v : ds.class_semantics.data) v = rng.u01() + 0.05;
    const Dataset scaled = scale_semantics(ds, 3.0);

    std::vector<PoolEntry> pool, scaled_pool;
    for (std::size_t c = 1; c < 6; ++c) {
        const auto row = ds.class_semantics.row(c);
        const auto srow = scaled.class_semantics.row(c);
        pool.push_back({static_cast<int>(c), {row.begin(), row.end()}});
        scaled_pool.push_back({static_cast<int>(c), {srow.begin(), srow.end()}});
    }
    const auto q = ds.class_semantics.row(0);
    const auto sq = scaled.class_semantics.row(0);
    for (Metric metric : {Metric::neg_mae, Metric::neg_mse, Metric::cosine, Metric::ruzicka}) {
        EXPECT_EQ(nearest_semantic({q.begin(), q.end()}, pool, metric).class_id,
                  nearest_semantic({sq.begin(), sq.end()}, scaled_pool, metric).class_id);
    }
    // cosine values unchanged under the common scaling
    EXPECT_NEAR(cosine(q, ds.class_semantics.row(1)), cosine(sq, scaled.class_semantics.row(1)),
                1e-12);
}
