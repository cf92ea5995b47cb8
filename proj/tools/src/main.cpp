#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "msct/error.hpp"

namespace {

// Exit codes.
constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kDataError = 2;
constexpr int kDivergence = 3;

void add_common(CLI::App* cmd, msct::cli::CommonOptions& o, bool needs_config) {
    auto* config = cmd->add_option("-c,--config", o.config, "INI run configuration")->check(CLI::ExistingFile);
    if (needs_config) config->required();
    cmd->add_option("-o,--out", o.out, "output directory");
    cmd->add_option("--seed", o.seed, "noise seed (overrides [noise] seed)");
    cmd->add_option("--threads", o.threads, "worker threads; results do not depend on it");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-spectral CT basis-material decomposition"};
    app.require_subcommand(1);

    msct::cli::CommonOptions common;

    auto* simulate = app.add_subcommand("simulate", "simulate polychromatic acquisitions of a phantom");
    add_common(simulate, common, false);

    msct::cli::DecomposeOptions dec;
    auto* decompose = app.add_subcommand("decompose", "reconstruct basis-material images from a dataset");
    add_common(decompose, common, false);
    decompose->add_option("--data", dec.data, "dataset directory written by 'simulate'");
    decompose->add_option("--resume", dec.resume, "continue from a previous decompose output directory");
    decompose->add_flag("--preview", dec.preview, "also write 16-bit PGM previews clipped to the display window");
    decompose->callback([&] {
        if (common.config.empty() && dec.data.empty()) {
            throw CLI::RequiredError("decompose needs --config or --data");
        }
    });

    auto* toy = app.add_subcommand("toy", "solve the two-spectrum, two-material toy system and write iterate paths");
    add_common(toy, common, false);

    msct::cli::MetricsOptions met;
    auto* metrics = app.add_subcommand("metrics", "compare estimated images with reference images");
    add_common(metrics, common, false);
    metrics->add_option("--ref", met.reference, "reference images")->required()->expected(1, -1);
    metrics->add_option("--est", met.estimate, "estimated images, same order")->required()->expected(1, -1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (simulate->parsed()) {
            common.command = "simulate";
            return msct::cli::cmd_simulate(common);
        }
        if (decompose->parsed()) {
            common.command = "decompose";
            return msct::cli::cmd_decompose(common, dec);
        }
        if (toy->parsed()) {
            common.command = "toy";
            return msct::cli::cmd_toy(common);
        }
        if (metrics->parsed()) {
            common.command = "metrics";
            if (metrics->count("--out") == 0) common.out.clear();
            return msct::cli::cmd_metrics(common, met);
        }
    } catch (const msct::ConfigError& e) {
        std::cerr << "msct: configuration error: " << e.what() << '\n';
        return kUsage;
    } catch (const msct::DivergenceError& e) {
        std::cerr << "msct: diverged: " << e.what() << '\n';
        return kDivergence;
    } catch (const msct::Error& e) {
        std::cerr << "msct: " << e.what() << '\n';
        return kDataError;
    } catch (const std::exception& e) {
        std::cerr << "msct: " << e.what() << '\n';
        return kDataError;
    }
    return kOk;
}
