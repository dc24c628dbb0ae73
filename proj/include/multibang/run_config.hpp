#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "multibang/errors.hpp"
#include "multibang/penalty.hpp"
#include "multibang/phantom.hpp"
#include "multibang/regpath.hpp"
#include "multibang/ssn.hpp"

namespace multibang {

/// Bad option or config-file entry. The message starts with the offending flag.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Settings shared by the command-line subcommands.
///
/// Defaults: grid 64, values 0,0.1,0.15, phantom two-disks, alpha chosen by the discrepancy
/// principle with tau 1.1, seed 0, out "out". The noise ladder is empty unless given; each
/// subcommand supplies its own default.
struct RunConfig {
    int grid = 64;
    AdmissibleSet values{{0.0, 0.1, 0.15}};
    PhantomKind phantom = PhantomKind::TwoDisks;
    std::optional<double> alpha;
    std::vector<double> noise_levels;
    std::uint64_t seed = 0;
    SolverConfig solver;
    DiscrepancyConfig discrepancy;
    std::filesystem::path out = "out";

    /// Throws ConfigError naming the flag whose value is invalid.
    void validate() const;
};

/// Keys accepted by apply_setting, identical to the long flag names without dashes.
const std::vector<std::string>& config_keys();

/// Sets one field from its textual value. Throws ConfigError("--key: ...") on bad input.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

/// key = value lines; '#' starts a comment, blank lines are skipped.
std::vector<std::pair<std::string, std::string>> read_config_file(
    const std::filesystem::path& path);

/// Comma-separated, strictly increasing.
AdmissibleSet parse_values(std::string_view text);

/// Comma-separated list of entries, each a number, "2^-k", or a dyadic range "2^-a:2^-b"
/// expanding to 2^-a, ..., 2^-b.
std::vector<double> parse_noise_levels(std::string_view text);

}  // namespace multibang
