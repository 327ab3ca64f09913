#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gzsb/dataset.hpp"
#include "gzsb/detail/binio.hpp"
#include "gzsb/detail/strings.hpp"
#include "gzsb/error.hpp"
#include "gzsb/types.hpp"

// Bundle directory layout:
//   meta.txt       key=value: n, m, instances, classes, seen_classes,
//                  unseen_classes, scale_applied
//   features.bin   "GZSB" | u16 version=1 | u32 rows | u32 cols | f32 row-major
//   semantics.bin  same framing; row index == class id
//   labels.bin     "GZSL" | u32 count | u32 class ids
//   split.txt      [seen] [unseen] [train] [test_seen] [test_unseen] sections,
//                  whitespace-separated integers

namespace gzsb {

namespace detail {

constexpr std::uint16_t kBundleVersion = 1;

// bundle text files are data, not config: malformed values are DataErrors
inline long long bundle_int(const std::string& text, const std::string& where) {
    try {
        return parse_int(text, where);
    } catch (const ConfigError& e) {
        throw DataError(e.what());
    }
}

inline double bundle_double(const std::string& text, const std::string& where) {
    try {
        return parse_double(text, where);
    } catch (const ConfigError& e) {
        throw DataError(e.what());
    }
}

inline void write_f32_matrix(const std::filesystem::path& path, const Matrix& mat) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot write " + path.string());
    put_magic(os, "GZSB");
    put_u16(os, kBundleVersion);
    put_u32(os, static_cast<std::uint32_t>(mat.rows));
    put_u32(os, static_cast<std::uint32_t>(mat.cols));
    for (double v : mat.data) put_f32(os, static_cast<float>(v));
    if (!os) throw DataError("write failed for " + path.string());
}

inline Matrix read_f32_matrix(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("missing file " + path.string());
    const std::string name = path.filename().string();
    expect_magic(is, "GZSB", name);
    const std::uint16_t version = get_u16(is, name, "version");
    if (version != kBundleVersion) {
        throw DataError(name + ": unsupported version " + std::to_string(version));
    }
    const std::uint32_t rows = get_u32(is, name, "rows");
    const std::uint32_t cols = get_u32(is, name, "cols");
    Matrix mat(rows, cols);
    for (std::size_t i = 0; i < mat.data.size(); ++i) {
        mat.data[i] = static_cast<double>(get_f32(is, name, "data"));
    }
    return mat;
}

inline std::map<std::string, std::string> read_meta(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw DataError("missing file " + path.string());
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(is, line)) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw DataError("meta.txt: malformed line '" + t + "'");
        kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return kv;
}

inline void write_split(const std::filesystem::path& path, const SplitSpec& split) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot write " + path.string());
    auto section = [&os](const char* name, const auto& values) {
        os << "[" << name << "]\n";
        std::size_t per_line = 0;
        for (const auto v : values) {
            os << v << ((++per_line % 16 == 0) ? "\n" : " ");
        }
        if (per_line % 16 != 0) os << "\n";
    };
    section("seen", split.seen_classes);
    section("unseen", split.unseen_classes);
    section("train", split.train_idx);
    section("test_seen", split.test_seen_idx);
    section("test_unseen", split.test_unseen_idx);
    if (!os) throw DataError("write failed for " + path.string());
}

inline SplitSpec read_split(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw DataError("missing file " + path.string());
    SplitSpec split;
    std::vector<long long>* target = nullptr;
    std::vector<long long> seen, unseen, train, test_seen, test_unseen;
    std::string line;
    while (std::getline(is, line)) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t == "[seen]") target = &seen;
            else if (t == "[unseen]") target = &unseen;
            else if (t == "[train]") target = &train;
            else if (t == "[test_seen]") target = &test_seen;
            else if (t == "[test_unseen]") target = &test_unseen;
            else throw DataError("split.txt: unknown section " + t);
            continue;
        }
        if (target == nullptr) throw DataError("split.txt: values before any section");
        for (const std::string& tok : split_ws(t)) {
            target->push_back(bundle_int(tok, "split.txt"));
        }
    }
    auto to_int = [](const std::vector<long long>& v) {
        std::vector<int> out;
        out.reserve(v.size());
        for (long long x : v) out.push_back(static_cast<int>(x));
        return out;
    };
    auto to_idx = [](const std::vector<long long>& v, const char* section) {
        std::vector<std::size_t> out;
        out.reserve(v.size());
        for (long long x : v) {
            if (x < 0) {
                throw DataError(std::string("split.txt: negative index in [") + section + "]");
            }
            out.push_back(static_cast<std::size_t>(x));
        }
        return out;
    };
    split.seen_classes = to_int(seen);
    split.unseen_classes = to_int(unseen);
    split.train_idx = to_idx(train, "train");
    split.test_seen_idx = to_idx(test_seen, "test_seen");
    split.test_unseen_idx = to_idx(test_unseen, "test_unseen");
    return split;
}

}  // namespace detail

inline void save_bundle(const Dataset& ds, const std::filesystem::path& dir) {
    if (ds.num_instances() == 0) throw DataError("save_bundle: empty dataset");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw DataError("cannot create directory " + dir.string() + ": " + ec.message());

    {
        std::ofstream os(dir / "meta.txt");
        if (!os) throw DataError("cannot write " + (dir / "meta.txt").string());
        os << "n=" << ds.semantic_dim() << "\n"
           << "m=" << ds.feature_dim() << "\n"
           << "instances=" << ds.num_instances() << "\n"
           << "classes=" << ds.num_classes() << "\n"
           << "seen_classes=" << ds.split.seen_classes.size() << "\n"
           << "unseen_classes=" << ds.split.unseen_classes.size() << "\n"
           << "scale_applied=" << detail::dtos(ds.scale_applied) << "\n";
    }
    detail::write_f32_matrix(dir / "features.bin", ds.features);
    detail::write_f32_matrix(dir / "semantics.bin", ds.class_semantics);
    {
        std::ofstream os(dir / "labels.bin", std::ios::binary);
        if (!os) throw DataError("cannot write " + (dir / "labels.bin").string());
        detail::put_magic(os, "GZSL");
        detail::put_u32(os, static_cast<std::uint32_t>(ds.labels.size()));
        for (int label : ds.labels) detail::put_u32(os, static_cast<std::uint32_t>(label));
        if (!os) throw DataError("write failed for " + (dir / "labels.bin").string());
    }
    detail::write_split(dir / "split.txt", ds.split);
}

inline Dataset load_bundle(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw DataError("bundle directory not found: " + dir.string());
    }
    Dataset ds;
    ds.features = detail::read_f32_matrix(dir / "features.bin");
    ds.class_semantics = detail::read_f32_matrix(dir / "semantics.bin");

    {
        const auto path = dir / "labels.bin";
        std::ifstream is(path, std::ios::binary);
        if (!is) throw DataError("missing file " + path.string());
        detail::expect_magic(is, "GZSL", "labels.bin");
        const std::uint32_t count = detail::get_u32(is, "labels.bin", "count");
        ds.labels.reserve(count);
        for (std::uint32_t i = 0; i < count; ++i) {
            ds.labels.push_back(static_cast<int>(detail::get_u32(is, "labels.bin", "class id")));
        }
    }
    ds.split = detail::read_split(dir / "split.txt");

    const auto meta = detail::read_meta(dir / "meta.txt");
    auto expect = [&meta](const std::string& key, std::size_t actual, const std::string& what) {
        auto it = meta.find(key);
        if (it == meta.end()) throw DataError("meta.txt: missing key '" + key + "'");
        const long long declared = detail::bundle_int(it->second, "meta.txt: " + key);
        if (declared < 0 || static_cast<std::size_t>(declared) != actual) {
            throw DataError("meta.txt: " + key + "=" + it->second + " does not match " + what +
                            "=" + std::to_string(actual));
        }
    };
    expect("n", ds.semantic_dim(), "semantics.bin cols");
    expect("m", ds.feature_dim(), "features.bin cols");
    expect("instances", ds.num_instances(), "features.bin rows");
    expect("classes", ds.num_classes(), "semantics.bin rows");
    if (auto it = meta.find("scale_applied"); it != meta.end()) {
        ds.scale_applied = detail::bundle_double(it->second, "meta.txt: scale_applied");
    }

    if (ds.labels.size() != ds.num_instances()) {
        throw DataError("labels.bin: count " + std::to_string(ds.labels.size()) +
                        " does not match features.bin rows " + std::to_string(ds.num_instances()));
    }

    const ValidationReport report = validate(ds);
    if (!report.ok()) {
        std::string msg = "invalid bundle " + dir.string() + ":";
        for (const std::string& finding : report.findings) msg += "\n  " + finding;
        throw DataError(msg);
    }
    return ds;
}

}  // namespace gzsb
