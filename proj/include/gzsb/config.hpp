#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "gzsb/detail/strings.hpp"
#include "gzsb/error.hpp"
#include "gzsb/loss.hpp"
#include "gzsb/similarity.hpp"
#include "gzsb/synthgen.hpp"
#include "gzsb/trainer.hpp"

// Flat key=value config files, one key per line, '#' comments. Every key has
// a default; unknown keys and malformed values are rejected with the file
// name and line number.

namespace gzsb {

struct KvEntry {
    std::size_t line = 0;
    std::string key;
    std::string value;
};

inline std::vector<KvEntry> parse_kv_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path.string());
    std::vector<KvEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        std::string t = detail::trim(line);
        if (const auto hash = t.find('#'); hash != std::string::npos) {
            t = detail::trim(t.substr(0, hash));
        }
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path.filename().string() + ":" + std::to_string(line_no) +
                              ": expected key=value, got '" + t + "'");
        }
        entries.push_back({line_no, detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1))});
    }
    return entries;
}

namespace detail {
inline std::string where(const std::filesystem::path& path, const KvEntry& entry) {
    return path.filename().string() + ":" + std::to_string(entry.line) + ": " + entry.key;
}

inline bool parse_bool(const std::string& value, const std::string& at) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError(at + ": expected true|false, got '" + value + "'");
}
}  // namespace detail

// Keys: variant, alpha, beta, decay_mode, metric, batch_size, epochs,
// optimizer, lr, momentum, seed, h1, h2, scale_target, pool_mode.
inline TrainConfig parse_train_config(const std::filesystem::path& path) {
    TrainConfig config;
    for (const KvEntry& entry : parse_kv_file(path)) {
        const std::string at = detail::where(path, entry);
        const std::string& v = entry.value;
        if (entry.key == "variant") {
            if (v == "linear") config.variant = Variant::linear;
            else if (v == "nonlinear") config.variant = Variant::nonlinear;
            else throw ConfigError(at + ": expected linear|nonlinear, got '" + v + "'");
        } else if (entry.key == "alpha") {
            config.alpha = detail::parse_double(v, at);
        } else if (entry.key == "beta") {
            config.beta = detail::parse_double(v, at);
        } else if (entry.key == "decay_mode") {
            config.decay_mode = parse_decay_mode(v);
        } else if (entry.key == "metric") {
            config.metric = parse_metric(v);
        } else if (entry.key == "batch_size") {
            config.batch_size = static_cast<std::size_t>(detail::parse_int(v, at));
        } else if (entry.key == "epochs") {
            config.epochs = static_cast<std::size_t>(detail::parse_int(v, at));
        } else if (entry.key == "optimizer") {
            config.optimizer = parse_opt_choice(v);
        } else if (entry.key == "lr") {
            config.lr = detail::parse_double(v, at);
        } else if (entry.key == "momentum") {
            config.momentum = detail::parse_double(v, at);
        } else if (entry.key == "seed") {
            config.seed = static_cast<std::uint64_t>(detail::parse_int(v, at));
        } else if (entry.key == "h1") {
            config.mlp.h1 = static_cast<std::size_t>(detail::parse_int(v, at));
        } else if (entry.key == "h2") {
            config.mlp.h2 = static_cast<std::size_t>(detail::parse_int(v, at));
        } else if (entry.key == "scale_target") {
            config.scale_target = detail::parse_double(v, at);
        } else if (entry.key == "pool_mode") {
            config.pool_mode = parse_pool_mode(v);
        } else {
            throw ConfigError(path.filename().string() + ":" + std::to_string(entry.line) +
                              ": unknown key '" + entry.key + "'");
        }
    }
    return config;
}

// Keys: n_seen, n_unseen, per_class_train, per_class_test, m, n,
// attribute_corr, noise_sigma, seed.
inline SynthSpec parse_synth_spec(const std::filesystem::path& path) {
    SynthSpec spec;
    for (const KvEntry& entry : parse_kv_file(path)) {
        const std::string at = detail::where(path, entry);
        const std::string& v = entry.value;
        if (entry.key == "n_seen") spec.n_seen = static_cast<std::size_t>(detail::parse_int(v, at));
        else if (entry.key == "n_unseen") spec.n_unseen = static_cast<std::size_t>(detail::parse_int(v, at));
        else if (entry.key == "per_class_train") spec.per_class_train = static_cast<std::size_t>(detail::parse_int(v, at));
        else if (entry.key == "per_class_test") spec.per_class_test = static_cast<std::size_t>(detail::parse_int(v, at));
        else if (entry.key == "m") spec.m = static_cast<std::size_t>(detail::parse_int(v, at));
        else if (entry.key == "n") spec.n = static_cast<std::size_t>(detail::parse_int(v, at));
        else if (entry.key == "attribute_corr") spec.attribute_corr = detail::parse_double(v, at);
        else if (entry.key == "noise_sigma") spec.noise_sigma = detail::parse_double(v, at);
        else if (entry.key == "seed") spec.seed = static_cast<std::uint64_t>(detail::parse_int(v, at));
        else {
            throw ConfigError(path.filename().string() + ":" + std::to_string(entry.line) +
                              ": unknown key '" + entry.key + "'");
        }
    }
    validate_spec(spec);
    return spec;
}

inline nlohmann::json train_config_json(const TrainConfig& config) {
    return nlohmann::json{{"variant", config.variant == Variant::linear ? "linear" : "nonlinear"},
                          {"alpha", config.alpha},
                          {"beta", config.beta},
                          {"decay_mode", to_string(config.decay_mode)},
                          {"metric", to_string(config.metric)},
                          {"batch_size", config.batch_size},
                          {"epochs", config.epochs},
                          {"optimizer", to_string(effective_optimizer(config))},
                          {"lr", effective_lr(config)},
                          {"momentum", config.momentum},
                          {"seed", config.seed},
                          {"h1", config.mlp.h1},
                          {"h2", config.mlp.h2},
                          {"scale_target", config.scale_target},
                          {"pool_mode", to_string(config.pool_mode)},
                          {"allow_large_alpha", config.allow_large_alpha}};
}

inline nlohmann::json synth_spec_json(const SynthSpec& spec) {
    return nlohmann::json{{"n_seen", spec.n_seen},
                          {"n_unseen", spec.n_unseen},
                          {"per_class_train", spec.per_class_train},
                          {"per_class_test", spec.per_class_test},
                          {"m", spec.m},
                          {"n", spec.n},
                          {"attribute_corr", spec.attribute_corr},
                          {"noise_sigma", spec.noise_sigma},
                          {"seed", spec.seed}};
}

}  // namespace gzsb
