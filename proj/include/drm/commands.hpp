#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "drm/model.hpp"

namespace drm {
namespace cli {

// Exit codes: 0 success, 1 runtime failure, 2 config validation failure.
int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::optional<uint64_t> seed_override, bool force, std::ostream& out, std::ostream& err);

int cmd_sweep(const std::string& config_path, const std::string& out_dir,
              const std::vector<double>& p_grid, bool force, std::ostream& out, std::ostream& err);

int cmd_compare(const std::string& config_path, const std::string& out_dir, bool force, std::ostream& out,
                std::ostream& err);

int cmd_verify(const std::string& suite, const std::string& out_dir, bool force, std::ostream& out,
               std::ostream& err);

int cmd_print_schema(std::ostream& out);

// Built-in instances the verify suites (and tests) run on.
nlohmann::json builtin_deterministic_config();  // two fixed loads, z = 10, reserve 5x^2
nlohmann::json builtin_small_game_config();     // n=2, three types, discrete z

}  // namespace cli
}  // namespace drm
