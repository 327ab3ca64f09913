#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gzsb/bundle.hpp"
#include "gzsb/checkpoint.hpp"
#include "gzsb/config.hpp"
#include "gzsb/dataset.hpp"
#include "gzsb/detail/strings.hpp"
#include "gzsb/error.hpp"
#include "gzsb/evaluator.hpp"
#include "gzsb/gradcheck.hpp"
#include "gzsb/synthgen.hpp"
#include "gzsb/trainer.hpp"

#include "json.hpp"

// Command implementations behind the gzsb binary. Every command returns a
// process exit code (0 ok, 1 usage/config error, 2 data error, 3 numeric
// failure) instead of exiting, so tests can drive them in-process.

namespace gzsb::cli {

namespace detail {

inline std::string iso_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

inline void write_json(const nlohmann::json& j, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot write " + path.string());
    os << j.dump(2) << "\n";
}

template <typename Fn>
int guard(Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace detail

inline int cmd_synth(const std::string& spec_path, const std::string& out_dir) {
    return detail::guard([&] {
        const std::string started = detail::iso_now();
        const SynthSpec spec = parse_synth_spec(spec_path);
        const Dataset ds = gen_dataset(spec);
        save_bundle(ds, out_dir);
        nlohmann::json manifest{{"command", "synth"},
                                {"config", synth_spec_json(spec)},
                                {"bundle", out_dir},
                                {"seed", spec.seed},
                                {"started", started},
                                {"finished", detail::iso_now()}};
        detail::write_json(manifest, std::filesystem::path(out_dir) / "run_manifest.json");
        std::cout << "wrote bundle to " << out_dir << " (" << ds.num_instances()
                  << " instances, " << ds.num_classes() << " classes)\n";
        return 0;
    });
}

inline int cmd_train(const std::string& config_path, const std::string& bundle_dir,
                     const std::string& out_dir, bool allow_large_alpha = false) {
    return detail::guard([&] {
        const std::string started = detail::iso_now();
        TrainConfig config = parse_train_config(config_path);
        config.allow_large_alpha = allow_large_alpha;
        validate_config(config);
        const Dataset ds = load_bundle(bundle_dir);

        const auto [params, history] = train(ds, config);

        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        if (ec) throw DataError("cannot create directory " + out_dir + ": " + ec.message());
        const auto ckpt_path = std::filesystem::path(out_dir) / "model.ckpt";
        const auto history_path = std::filesystem::path(out_dir) / "history.jsonl";
        save_checkpoint(params, ckpt_path);
        write_history_jsonl(history, history_path);

        nlohmann::json manifest{{"command", "train"},
                                {"config", train_config_json(config)},
                                {"bundle", bundle_dir},
                                {"checkpoint", ckpt_path.string()},
                                {"history", history_path.string()},
                                {"seed", config.seed},
                                {"started", started},
                                {"finished", detail::iso_now()}};
        detail::write_json(manifest, std::filesystem::path(out_dir) / "run_manifest.json");
        char elapsed[32];
        std::snprintf(elapsed, sizeof(elapsed), "%.2f", history.wall_time_sec);
        std::cout << "trained " << history.base.size() << " epochs in " << elapsed
                  << "s; final total loss " << gzsb::detail::dtos(history.total.back()) << "\n"
                  << "wrote " << ckpt_path.string() << "\n";
        return 0;
    });
}

inline int cmd_eval(const std::string& ckpt_path, const std::string& bundle_dir,
                    const std::string& out_dir = "") {
    return detail::guard([&] {
        const std::string started = detail::iso_now();
        const ModelParams params = load_checkpoint(ckpt_path);
        const Dataset ds = load_bundle(bundle_dir);
        if (params.m != ds.feature_dim() || params.n != ds.semantic_dim()) {
            throw DataError("checkpoint dimensions (m=" + std::to_string(params.m) +
                            ", n=" + std::to_string(params.n) + ") do not match bundle (m=" +
                            std::to_string(ds.feature_dim()) + ", n=" +
                            std::to_string(ds.semantic_dim()) + ")");
        }
        const EvalReport report = gzsl_report(params, ds);
        std::cout << report_table(report);
        if (!out_dir.empty()) {
            std::error_code ec;
            std::filesystem::create_directories(out_dir, ec);
            if (ec) throw DataError("cannot create directory " + out_dir + ": " + ec.message());
            const auto report_path = std::filesystem::path(out_dir) / "report.json";
            detail::write_json(report_json(report), report_path);
            nlohmann::json manifest{{"command", "eval"},
                                    {"bundle", bundle_dir},
                                    {"checkpoint", ckpt_path},
                                    {"report", report_path.string()},
                                    {"started", started},
                                    {"finished", detail::iso_now()}};
            detail::write_json(manifest, std::filesystem::path(out_dir) / "run_manifest.json");
            std::cout << "wrote " << report_path.string() << "\n";
        }
        return 0;
    });
}

inline int cmd_sweep(const std::string& config_path, const std::string& bundle_dir,
                     const std::string& out_dir, std::vector<double> alphas,
                     std::vector<std::uint64_t> seeds, bool allow_large_alpha = true) {
    return detail::guard([&] {
        const std::string started = detail::iso_now();
        if (alphas.empty()) throw ConfigError("sweep: empty alpha list");
        if (seeds.empty()) throw ConfigError("sweep: empty seed list");

        std::sort(alphas.begin(), alphas.end());
        std::sort(seeds.begin(), seeds.end());
        std::vector<std::pair<double, std::uint64_t>> cells;
        for (double alpha : alphas) {
            for (std::uint64_t seed : seeds) cells.emplace_back(alpha, seed);
        }
        const auto dup = std::unique(cells.begin(), cells.end());
        if (dup != cells.end()) {
            std::cerr << "warning: duplicate (alpha, seed) pairs dropped\n";
            cells.erase(dup, cells.end());
        }

        const TrainConfig base_config = parse_train_config(config_path);
        const Dataset ds = load_bundle(bundle_dir);

        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        if (ec) throw DataError("cannot create directory " + out_dir + ": " + ec.message());

        std::string csv = "alpha,seed,u,s,h,status\n";
        for (const auto& [alpha, seed] : cells) {
            TrainConfig config = base_config;
            config.alpha = alpha;
            config.seed = seed;
            config.allow_large_alpha = allow_large_alpha;
            std::string row = gzsb::detail::dtos(alpha) + "," + std::to_string(seed);
            try {
                validate_config(config);
                const auto [params, history] = train(ds, config);
                const EvalReport report = gzsl_report(params, ds);
                row += "," + gzsb::detail::dtos(report.u * 100.0) + "," +
                       gzsb::detail::dtos(report.s * 100.0) + "," +
                       gzsb::detail::dtos(report.h * 100.0) + ",ok";
            } catch (const std::exception& e) {
                std::cerr << "sweep cell alpha=" << gzsb::detail::dtos(alpha) << " seed=" << seed
                          << " failed: " << e.what() << "\n";
                row += ",,,,failed";
            }
            csv += row + "\n";
            std::cout << row << "\n";
        }

        const auto csv_path = std::filesystem::path(out_dir) / "sweep.csv";
        {
            std::ofstream os(csv_path);
            if (!os) throw DataError("cannot write " + csv_path.string());
            os << csv;
        }
        nlohmann::json manifest{{"command", "sweep"},
                                {"config", train_config_json(base_config)},
                                {"bundle", bundle_dir},
                                {"alphas", alphas},
                                {"seeds", seeds},
                                {"report", csv_path.string()},
                                {"started", started},
                                {"finished", detail::iso_now()}};
        detail::write_json(manifest, std::filesystem::path(out_dir) / "run_manifest.json");
        std::cout << "wrote " << csv_path.string() << "\n";
        return 0;
    });
}

inline int cmd_gradcheck(const std::string& config_path = "") {
    return detail::guard([&] {
        std::uint64_t seed = 1;
        if (!config_path.empty()) seed = parse_train_config(config_path).seed;
        const auto results = run_gradcheck(seed);
        bool all_pass = true;
        for (const GradCheckResult& result : results) {
            const char* variant = result.variant == Variant::linear ? "linear" : "nonlinear";
            std::cout << (result.pass ? "[PASS] " : "[FAIL] ") << variant << "/" << result.family
                      << " max_rel_err=" << gzsb::detail::dtos(result.max_rel_err) << "\n";
            all_pass = all_pass && result.pass;
        }
        return all_pass ? 0 : 3;
    });
}

inline int cmd_inspect(const std::string& bundle_dir, const std::string& ckpt_path) {
    return detail::guard([&] {
        if (bundle_dir.empty() == ckpt_path.empty()) {
            throw ConfigError("inspect: pass exactly one of --bundle or --checkpoint");
        }
        if (!bundle_dir.empty()) {
            const Dataset ds = load_bundle(bundle_dir);
            std::cout << "bundle " << bundle_dir << "\n"
                      << "  instances " << ds.num_instances() << ", classes " << ds.num_classes()
                      << ", m " << ds.feature_dim() << ", n " << ds.semantic_dim() << "\n"
                      << "  seen " << ds.split.seen_classes.size() << ", unseen "
                      << ds.split.unseen_classes.size() << "\n"
                      << "  train " << ds.split.train_idx.size() << ", test_seen "
                      << ds.split.test_seen_idx.size() << ", test_unseen "
                      << ds.split.test_unseen_idx.size() << "\n"
                      << "  scale_applied " << gzsb::detail::dtos(ds.scale_applied) << "\n"
                      << "  validation: ok\n";
        } else {
            const ModelParams params = load_checkpoint(ckpt_path);
            std::cout << "checkpoint " << ckpt_path << "\n"
                      << "  variant "
                      << (params.variant == Variant::linear ? "linear" : "nonlinear") << "\n"
                      << "  m " << params.m << ", n " << params.n;
            if (params.variant == Variant::nonlinear) {
                std::cout << ", h1 " << params.h1 << ", h2 " << params.h2;
            }
            std::cout << "\n  parameters " << param_count(params) << "\n"
                      << "  sem_scale " << gzsb::detail::dtos(params.sem_scale) << "\n";
        }
        return 0;
    });
}

}  // namespace gzsb::cli
