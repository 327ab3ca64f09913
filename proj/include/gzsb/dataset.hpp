#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "gzsb/error.hpp"
#include "gzsb/types.hpp"

namespace gzsb {

struct ValidationReport {
    std::vector<std::string> findings;

    bool ok() const { return findings.empty(); }
};

namespace detail {

// One finding per violated invariant: first offending location plus a count,
// so a heavily corrupted bundle still yields a readable report.
inline void check_finite_matrix(const Matrix& mat, const std::string& what,
                                ValidationReport& report) {
    std::size_t bad = 0;
    std::size_t first_r = 0, first_c = 0;
    for (std::size_t r = 0; r < mat.rows; ++r) {
        for (std::size_t c = 0; c < mat.cols; ++c) {
            if (!std::isfinite(mat(r, c))) {
                if (bad == 0) {
                    first_r = r;
                    first_c = c;
                }
                ++bad;
            }
        }
    }
    if (bad > 0) {
        report.findings.push_back("non-finite " + what + " at (" + std::to_string(first_r) +
                                  "," + std::to_string(first_c) + ")" +
                                  (bad > 1 ? " and " + std::to_string(bad - 1) + " more" : ""));
    }
}

inline void check_indices(const std::vector<std::size_t>& idx, std::size_t limit,
                          const std::string& section, ValidationReport& report) {
    std::set<std::size_t> seen;
    for (std::size_t i : idx) {
        if (i >= limit) {
            report.findings.push_back("[" + section + "] index " + std::to_string(i) +
                                      " out of range (instances=" + std::to_string(limit) + ")");
            return;
        }
        if (!seen.insert(i).second) {
            report.findings.push_back("duplicate index " + std::to_string(i) + " in [" +
                                      section + "]");
            return;
        }
    }
}

inline void check_overlap(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b,
                          const std::string& sa, const std::string& sb,
                          ValidationReport& report) {
    std::set<std::size_t> sa_set(a.begin(), a.end());
    for (std::size_t i : b) {
        if (sa_set.count(i)) {
            report.findings.push_back("overlapping split: instance " + std::to_string(i) +
                                      " in both [" + sa + "] and [" + sb + "]");
            return;
        }
    }
}

}  // namespace detail

// Checks every Dataset invariant and returns one finding per violation.
// An empty report means the dataset is usable end to end.
inline ValidationReport validate(const Dataset& ds) {
    ValidationReport report;
    const std::size_t n_inst = ds.num_instances();
    const std::size_t n_cls = ds.num_classes();

    if (n_inst == 0) report.findings.push_back("empty dataset");
    if (ds.labels.size() != n_inst) {
        report.findings.push_back("labels count " + std::to_string(ds.labels.size()) +
                                  " does not match feature rows " + std::to_string(n_inst));
    }

    detail::check_finite_matrix(ds.features, "feature", report);
    detail::check_finite_matrix(ds.class_semantics, "semantic", report);

    for (std::size_t i = 0; i < ds.labels.size(); ++i) {
        const int label = ds.labels[i];
        if (label < 0 || static_cast<std::size_t>(label) >= n_cls) {
            report.findings.push_back("unknown class id " + std::to_string(label) +
                                      " (instance " + std::to_string(i) + ")");
            break;
        }
    }

    const auto& split = ds.split;
    std::set<int> seen(split.seen_classes.begin(), split.seen_classes.end());
    std::set<int> unseen(split.unseen_classes.begin(), split.unseen_classes.end());
    for (int c : split.seen_classes) {
        if (unseen.count(c)) {
            report.findings.push_back("class " + std::to_string(c) +
                                      " in both [seen] and [unseen]");
            break;
        }
    }
    for (int c : seen) {
        if (c < 0 || static_cast<std::size_t>(c) >= n_cls) {
            report.findings.push_back("unknown class id " + std::to_string(c) + " in [seen]");
            break;
        }
    }
    for (int c : unseen) {
        if (c < 0 || static_cast<std::size_t>(c) >= n_cls) {
            report.findings.push_back("unknown class id " + std::to_string(c) + " in [unseen]");
            break;
        }
    }
    if (seen.size() < 2) report.findings.push_back("fewer than 2 seen classes");
    if (unseen.empty()) report.findings.push_back("empty [unseen] class set");

    detail::check_indices(split.train_idx, n_inst, "train", report);
    detail::check_indices(split.test_seen_idx, n_inst, "test_seen", report);
    detail::check_indices(split.test_unseen_idx, n_inst, "test_unseen", report);
    detail::check_overlap(split.train_idx, split.test_seen_idx, "train", "test_seen", report);
    detail::check_overlap(split.train_idx, split.test_unseen_idx, "train", "test_unseen", report);
    detail::check_overlap(split.test_seen_idx, split.test_unseen_idx, "test_seen", "test_unseen",
                          report);

    if (split.train_idx.empty()) report.findings.push_back("empty [train] split");
    if (split.test_seen_idx.empty()) report.findings.push_back("empty [test_seen] split");
    if (split.test_unseen_idx.empty()) report.findings.push_back("empty [test_unseen] split");

    auto check_labels_in = [&](const std::vector<std::size_t>& idx, const std::set<int>& allowed,
                               const std::string& msg) {
        for (std::size_t i : idx) {
            if (i >= ds.labels.size()) return; // already reported
            if (!allowed.count(ds.labels[i])) {
                report.findings.push_back(msg + " (instance " + std::to_string(i) + ", class " +
                                          std::to_string(ds.labels[i]) + ")");
                return;
            }
        }
    };
    check_labels_in(split.train_idx, seen, "unseen class in train");
    check_labels_in(split.test_seen_idx, seen, "non-seen class in test_seen");
    check_labels_in(split.test_unseen_idx, unseen, "non-unseen class in test_unseen");

    return report;
}

// Multiplies every class semantic by the single scalar k that brings the
// mean Euclidean norm over classes to target_mean_norm. One global factor
// cannot distort inter-class structure, so nearest-neighbor relations are
// preserved (and cosine values are unchanged).
inline Dataset scale_semantics(const Dataset& ds, double target_mean_norm) {
    if (!(target_mean_norm > 0.0)) {
        throw ConfigError("scale_semantics: target_mean_norm must be positive, got " +
                          std::to_string(target_mean_norm));
    }
    if (ds.num_classes() == 0) throw DataError("scale_semantics: no classes");

    double norm_sum = 0.0;
    for (std::size_t r = 0; r < ds.class_semantics.rows; ++r) {
        double sq = 0.0;
        for (double v : ds.class_semantics.row(r)) sq += v * v;
        norm_sum += std::sqrt(sq);
    }
    const double mean_norm = norm_sum / static_cast<double>(ds.num_classes());
    if (mean_norm == 0.0) throw DataError("scale_semantics: degenerate semantics (all zero)");

    const double k = target_mean_norm / mean_norm;
    Dataset out = ds;
    for (double& v : out.class_semantics.data) v *= k;
    out.scale_applied = target_mean_norm;
    return out;
}

}  // namespace gzsb
