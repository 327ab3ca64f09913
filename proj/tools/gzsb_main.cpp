#include <cstdint>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gzsb/cli.hpp"
#include "gzsb/detail/strings.hpp"

// gzsb: compatibility metric learning for generalized zero-shot
// classification, with the semantic-borrowing regularizer.

namespace {

std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> out;
    for (const std::string& tok : gzsb::detail::split_char(csv, ',')) {
        if (!tok.empty()) out.push_back(gzsb::detail::parse_double(tok, "--alphas"));
    }
    return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& csv) {
    std::vector<std::uint64_t> out;
    for (const std::string& tok : gzsb::detail::split_char(csv, ',')) {
        if (!tok.empty()) {
            out.push_back(static_cast<std::uint64_t>(gzsb::detail::parse_int(tok, "--seeds")));
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"generalized zero-shot compatibility training with semantic borrowing"};
    app.require_subcommand(1);

    std::string config, bundle, out, checkpoint, spec, alphas_csv, seeds_csv;
    bool allow_large_alpha = false;

    auto* synth = app.add_subcommand("synth", "generate a synthetic bundle");
    synth->add_option("--spec", spec, "synth spec file (key=value)")->required();
    synth->add_option("--out", out, "output bundle directory")->required();

    auto* train = app.add_subcommand("train", "train a model on a bundle");
    train->add_option("--config", config, "train config file (key=value)")->required();
    train->add_option("--bundle", bundle, "bundle directory")->required();
    train->add_option("--out", out, "output directory")->required();
    train->add_flag("--allow-large-alpha", allow_large_alpha,
                    "permit alpha >= 1 (sensitivity experiments)");

    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint (u / s / h)");
    eval->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
    eval->add_option("--bundle", bundle, "bundle directory")->required();
    eval->add_option("--out", out, "optional output directory for report.json");

    auto* sweep = app.add_subcommand("sweep", "train+eval grid over alphas and seeds");
    sweep->add_option("--config", config, "train config file")->required();
    sweep->add_option("--bundle", bundle, "bundle directory")->required();
    sweep->add_option("--out", out, "output directory")->required();
    sweep->add_option("--alphas", alphas_csv, "comma-separated alpha values")->required();
    sweep->add_option("--seeds", seeds_csv, "comma-separated seeds")->required();

    auto* gradcheck = app.add_subcommand("gradcheck", "verify analytic gradients");
    gradcheck->add_option("--config", config, "optional config (seed)");

    auto* inspect = app.add_subcommand("inspect", "describe a bundle or checkpoint");
    inspect->add_option("--bundle", bundle, "bundle directory");
    inspect->add_option("--checkpoint", checkpoint, "model checkpoint");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (synth->parsed()) return gzsb::cli::cmd_synth(spec, out);
        if (train->parsed()) return gzsb::cli::cmd_train(config, bundle, out, allow_large_alpha);
        if (eval->parsed()) return gzsb::cli::cmd_eval(checkpoint, bundle, out);
        if (sweep->parsed()) {
            return gzsb::cli::cmd_sweep(config, bundle, out, parse_double_list(alphas_csv),
                                        parse_seed_list(seeds_csv));
        }
        if (gradcheck->parsed()) return gzsb::cli::cmd_gradcheck(config);
        if (inspect->parsed()) return gzsb::cli::cmd_inspect(bundle, checkpoint);
    } catch (const gzsb::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
