#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "drm/commands.hpp"
#include "drm/csv.hpp"

namespace {

// "lo:hi:count" -> evenly spaced inclusive grid.
std::vector<double> parse_grid_spec(const std::string& spec) {
    const size_t c1 = spec.find(':');
    const size_t c2 = spec.find(':', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw CLI::ValidationError("--grid expects lo:hi:count");
    const double lo = drm::parse_double(spec.substr(0, c1));
    const double hi = drm::parse_double(spec.substr(c1 + 1, c2 - c1 - 1));
    const long count = std::stol(spec.substr(c2 + 1));
    if (count < 1 || hi < lo) throw CLI::ValidationError("--grid expects lo <= hi and count >= 1");
    std::vector<double> grid(static_cast<size_t>(count));
    for (long k = 0; k < count; ++k)
        grid[static_cast<size_t>(k)] =
            count == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1);
    return grid;
}

std::vector<double> parse_point_list(const std::string& spec) {
    std::vector<double> grid;
    for (auto field : drm::split_csv_line(spec)) grid.push_back(drm::parse_double(field));
    return grid;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-stage demand-response market simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    bool force = false;

    auto* sim = app.add_subcommand("simulate", "Run the two-stage market over the configured horizon");
    std::optional<uint64_t> seed_override;
    sim->add_option("config", config_path, "experiment config (JSON)")->required();
    sim->add_option("-o,--out", out_dir, "output directory");
    sim->add_option("--seed", seed_override, "override the config seed");
    sim->add_flag("--force", force, "overwrite existing outputs");

    auto* swp = app.add_subcommand("sweep", "Posted-price rebate sweep on a common sample path");
    std::string grid_spec, point_spec;
    swp->add_option("config", config_path, "experiment config (JSON)")->required();
    swp->add_option("-o,--out", out_dir, "output directory");
    swp->add_option("--grid", grid_spec, "rebate grid as lo:hi:count");
    swp->add_option("--points", point_spec, "explicit comma-separated rebates");
    swp->add_flag("--force", force, "overwrite existing outputs");

    auto* cmp = app.add_subcommand("compare", "Posted-price vs optimal dispatch comparison dataset");
    cmp->add_option("config", config_path, "experiment config (JSON)")->required();
    cmp->add_option("-o,--out", out_dir, "output directory");
    cmp->add_flag("--force", force, "overwrite existing outputs");

    auto* ver = app.add_subcommand("verify", "Run a built-in verification suite");
    std::string suite;
    ver->add_option("suite", suite, "dispatch | mechanism | incentives")->required();
    ver->add_option("-o,--out", out_dir, "output directory");
    ver->add_flag("--force", force, "overwrite existing outputs");

    auto* sch = app.add_subcommand("print-config-schema", "Print the config schema with defaults");

    CLI11_PARSE(app, argc, argv);

    if (sim->parsed())
        return drm::cli::cmd_simulate(config_path, out_dir, seed_override, force, std::cout, std::cerr);
    if (swp->parsed()) {
        std::vector<double> grid;
        try {
            if (!grid_spec.empty())
                grid = parse_grid_spec(grid_spec);
            else if (!point_spec.empty())
                grid = parse_point_list(point_spec);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
        if (grid.empty()) {
            std::cerr << "error: sweep needs --grid lo:hi:count or --points p1,p2,...\n";
            return 1;
        }
        return drm::cli::cmd_sweep(config_path, out_dir, grid, force, std::cout, std::cerr);
    }
    if (cmp->parsed()) return drm::cli::cmd_compare(config_path, out_dir, force, std::cout, std::cerr);
    if (ver->parsed()) return drm::cli::cmd_verify(suite, out_dir, force, std::cout, std::cerr);
    if (sch->parsed()) return drm::cli::cmd_print_schema(std::cout);
    return 1;
}
