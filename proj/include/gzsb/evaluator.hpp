#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "gzsb/error.hpp"
#include "gzsb/model.hpp"
#include "gzsb/types.hpp"

#include "json.hpp"

// Classification over the full label space and the u / s / h protocol:
// average per-class top-1 accuracy over unseen classes (u), over seen
// classes (s), and their harmonic mean (h). Accuracies are fractions in
// [0,1] internally; percentages appear only at presentation time.

namespace gzsb {

struct ClassCount {
    int correct = 0;
    int total = 0;

    bool operator==(const ClassCount&) const = default;
};

struct EvalReport {
    std::map<int, double> per_class_acc;
    std::map<int, ClassCount> counts;
    double u = 0.0;
    double s = 0.0;
    double h = 0.0;
};

inline double harmonic_mean(double u, double s) {
    return (u + s) > 0.0 ? 2.0 * u * s / (u + s) : 0.0;
}

// Class whose (scaled) semantic maximizes compatibility; ties go to the
// lowest class id.
inline int classify(const ModelParams& params, std::span<const double> f,
                    std::span<const PoolEntry> label_space) {
    if (label_space.empty()) throw DataError("classify: empty label space");
    int best_id = -1;
    double best_c = 0.0;
    std::vector<double> scaled;
    for (const PoolEntry& entry : label_space) {
        scaled.assign(entry.semantic.begin(), entry.semantic.end());
        for (double& v : scaled) v *= params.sem_scale;
        const double c = compat_forward(params, f, scaled).value;
        if (best_id < 0 || c > best_c || (c == best_c && entry.class_id < best_id)) {
            best_id = entry.class_id;
            best_c = c;
        }
    }
    return best_id;
}

// predictions: (true class, predicted class) pairs
inline std::map<int, double> per_class_top1(
    std::span<const std::pair<int, int>> predictions, std::span<const int> class_set) {
    std::map<int, ClassCount> counts;
    for (int cls : class_set) counts[cls] = {};
    for (const auto& [truth, predicted] : predictions) {
        auto it = counts.find(truth);
        if (it == counts.end()) continue; // outside the requested class set
        it->second.total += 1;
        if (predicted == truth) it->second.correct += 1;
    }
    std::map<int, double> acc;
    for (const auto& [cls, count] : counts) {
        if (count.total == 0) {
            throw DataError("per_class_top1: class " + std::to_string(cls) + " has no examples");
        }
        acc[cls] = static_cast<double>(count.correct) / static_cast<double>(count.total);
    }
    return acc;
}

// Classifies every test_seen and test_unseen instance against the union
// label space (seen + unseen semantics).
inline EvalReport gzsl_report(const ModelParams& params, const Dataset& ds) {
    if (ds.split.test_seen_idx.empty() || ds.split.test_unseen_idx.empty()) {
        throw DataError("gzsl_report: empty test split");
    }
    std::set<int> label_ids(ds.split.seen_classes.begin(), ds.split.seen_classes.end());
    label_ids.insert(ds.split.unseen_classes.begin(), ds.split.unseen_classes.end());
    std::vector<PoolEntry> label_space;
    label_space.reserve(label_ids.size());
    for (int cls : label_ids) {
        if (cls < 0 || static_cast<std::size_t>(cls) >= ds.num_classes()) {
            throw DataError("gzsl_report: class " + std::to_string(cls) +
                            " missing from semantics table");
        }
        const auto row = ds.class_semantics.row(static_cast<std::size_t>(cls));
        label_space.push_back({cls, {row.begin(), row.end()}});
    }

    // For the linear model W*(sem_scale*s) is shared across instances;
    // computing it once per candidate reproduces classify() bit for bit and
    // keeps wide-feature bundles fast.
    std::vector<std::vector<double>> mapped;
    if (params.variant == Variant::linear) {
        mapped.resize(label_space.size());
        for (std::size_t j = 0; j < label_space.size(); ++j) {
            std::vector<double> scaled = label_space[j].semantic;
            for (double& v : scaled) v *= params.sem_scale;
            if (scaled.size() != params.n) throw DataError("gzsl_report: dimension mismatch");
            mapped[j].resize(params.m);
            for (std::size_t r = 0; r < params.m; ++r) {
                const auto row = params.w.row(r);
                double dot = 0.0;
                for (std::size_t c = 0; c < params.n; ++c) dot += row[c] * scaled[c];
                mapped[j][r] = dot;
            }
        }
    }
    auto classify_fast = [&](std::span<const double> f) {
        if (params.variant != Variant::linear) return classify(params, f, label_space);
        if (f.size() != params.m) throw DataError("gzsl_report: dimension mismatch");
        int best_id = -1;
        double best_c = 0.0;
        for (std::size_t j = 0; j < label_space.size(); ++j) {
            double c = 0.0;
            for (std::size_t r = 0; r < params.m; ++r) c += f[r] * mapped[j][r];
            if (best_id < 0 || c > best_c ||
                (c == best_c && label_space[j].class_id < best_id)) {
                best_id = label_space[j].class_id;
                best_c = c;
            }
        }
        return best_id;
    };
    auto run_split = [&](const std::vector<std::size_t>& idx) {
        std::vector<std::pair<int, int>> preds;
        preds.reserve(idx.size());
        for (std::size_t i : idx) {
            const int predicted = classify_fast(ds.features.row(i));
            preds.emplace_back(ds.labels[i], predicted);
        }
        return preds;
    };
    const auto seen_preds = run_split(ds.split.test_seen_idx);
    const auto unseen_preds = run_split(ds.split.test_unseen_idx);

    EvalReport report;
    const auto seen_acc = per_class_top1(seen_preds, ds.split.seen_classes);
    const auto unseen_acc = per_class_top1(unseen_preds, ds.split.unseen_classes);

    auto fold = [&report](const std::map<int, double>& acc,
                          const std::vector<std::pair<int, int>>& preds) {
        double sum = 0.0;
        for (const auto& [cls, a] : acc) {
            report.per_class_acc[cls] = a;
            sum += a;
        }
        for (const auto& [truth, predicted] : preds) {
            auto& count = report.counts[truth];
            count.total += 1;
            if (predicted == truth) count.correct += 1;
        }
        return sum / static_cast<double>(acc.size());
    };
    report.s = fold(seen_acc, seen_preds);
    report.u = fold(unseen_acc, unseen_preds);
    report.h = harmonic_mean(report.u, report.s);
    return report;
}

// "29.1" style percent with one decimal, matching how scores are reported.
inline std::string format_pct(double fraction_or_pct, bool already_pct = false) {
    const double pct = already_pct ? fraction_or_pct : fraction_or_pct * 100.0;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", pct);
    return buf;
}

inline nlohmann::json report_json(const EvalReport& report) {
    nlohmann::json per_class = nlohmann::json::object();
    nlohmann::json counts = nlohmann::json::object();
    for (const auto& [cls, acc] : report.per_class_acc) {
        per_class[std::to_string(cls)] = acc * 100.0;
    }
    for (const auto& [cls, count] : report.counts) {
        counts[std::to_string(cls)] = {{"correct", count.correct}, {"total", count.total}};
    }
    return nlohmann::json{{"u", report.u * 100.0},
                          {"s", report.s * 100.0},
                          {"h", report.h * 100.0},
                          {"per_class_acc", per_class},
                          {"counts", counts}};
}

inline std::string report_table(const EvalReport& report) {
    std::string out;
    out += "metric  value\n";
    out += "u       " + format_pct(report.u) + "\n";
    out += "s       " + format_pct(report.s) + "\n";
    out += "h       " + format_pct(report.h) + "\n";
    return out;
}

}  // namespace gzsb
