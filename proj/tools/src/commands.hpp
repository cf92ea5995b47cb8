#pragma once

#include <filesystem>
#include <vector>

#include "setup.hpp"

namespace msct::cli {

int cmd_simulate(const CommonOptions& opts);

struct DecomposeOptions {
    std::filesystem::path data;   ///< overrides [data] dir
    std::filesystem::path resume; ///< overrides [recon] resume
    bool preview = false;
};
int cmd_decompose(const CommonOptions& opts, const DecomposeOptions& extra);

int cmd_toy(const CommonOptions& opts);

struct MetricsOptions {
    std::vector<std::filesystem::path> reference;
    std::vector<std::filesystem::path> estimate;
};
int cmd_metrics(const CommonOptions& opts, const MetricsOptions& extra);

} // namespace msct::cli
