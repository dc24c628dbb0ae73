#include "multibang/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

namespace multibang {

namespace {

std::string flag(std::string_view key) { return "--" + std::string(key); }

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

double to_real(std::string_view text, std::string_view key) {
    const std::string s(trim(text));
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (s.empty() || used != s.size() || !std::isfinite(v)) {
        throw ConfigError(flag(key) + ": expected a number, got '" + s + "'");
    }
    return v;
}

template <class Int>
Int to_integer(std::string_view text, std::string_view key) {
    const std::string_view s = trim(text);
    Int v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ConfigError(flag(key) + ": expected an integer, got '" + std::string(s) + "'");
    }
    return v;
}

// "2^-k" -> k, or nullopt if the token is not of that form.
std::optional<int> dyadic_exponent(std::string_view token) {
    if (token.substr(0, 3) != "2^-") return std::nullopt;
    return to_integer<int>(token.substr(3), "noise-levels");
}

}  // namespace

AdmissibleSet parse_values(std::string_view text) {
    std::vector<double> values;
    for (auto part : split(text, ',')) values.push_back(to_real(part, "values"));
    try {
        return AdmissibleSet(std::move(values));
    } catch (const Error& e) {
        throw ConfigError(flag("values") + ": " + e.what());
    }
}

std::vector<double> parse_noise_levels(std::string_view text) {
    std::vector<double> levels;
    for (auto part : split(text, ',')) {
        const auto colon = part.find(':');
        if (colon != std::string_view::npos) {
            const auto a = dyadic_exponent(trim(part.substr(0, colon)));
            const auto b = dyadic_exponent(trim(part.substr(colon + 1)));
            if (!a || !b || *b < *a) {
                throw ConfigError(flag("noise-levels") + ": bad range '" + std::string(part) +
                                  "', expected 2^-a:2^-b with a <= b");
            }
            for (int k = *a; k <= *b; ++k) levels.push_back(std::ldexp(1.0, -k));
        } else if (const auto k = dyadic_exponent(part)) {
            levels.push_back(std::ldexp(1.0, -*k));
        } else {
            levels.push_back(to_real(part, "noise-levels"));
        }
    }
    return levels;
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{
        "grid",   "values",       "phantom",     "alpha",      "tau", "noise-levels",
        "seed",   "gamma0",       "gamma-factor", "gamma-min", "max-newton", "out"};
    return keys;
}

void apply_setting(RunConfig& config, std::string_view key, std::string_view value) {
    if (key == "grid") {
        config.grid = to_integer<int>(value, key);
    } else if (key == "values") {
        config.values = parse_values(value);
    } else if (key == "phantom") {
        try {
            config.phantom = parse_phantom_kind(trim(value));
        } catch (const Error& e) {
            throw ConfigError(flag(key) + ": " + e.what());
        }
    } else if (key == "alpha") {
        config.alpha = to_real(value, key);
    } else if (key == "tau") {
        config.discrepancy.tau = to_real(value, key);
    } else if (key == "noise-levels") {
        config.noise_levels = parse_noise_levels(value);
    } else if (key == "seed") {
        config.seed = to_integer<std::uint64_t>(value, key);
    } else if (key == "gamma0") {
        config.solver.gamma0 = to_real(value, key);
    } else if (key == "gamma-factor") {
        config.solver.gamma_factor = to_real(value, key);
    } else if (key == "gamma-min") {
        config.solver.gamma_min = to_real(value, key);
    } else if (key == "max-newton") {
        config.solver.max_newton = to_integer<int>(value, key);
    } else if (key == "out") {
        const auto path = trim(value);
        if (path.empty()) throw ConfigError(flag(key) + ": empty path");
        config.out = std::filesystem::path(std::string(path));
    } else {
        throw ConfigError("unknown setting '" + std::string(key) + "'");
    }
}

void RunConfig::validate() const {
    if (grid < 3) throw ConfigError("--grid: must be at least 3");
    if (alpha && !(*alpha > 0.0)) throw ConfigError("--alpha: must be positive");
    if (!(discrepancy.tau > 1.0)) throw ConfigError("--tau: must exceed 1");
    if (!noise_levels.empty()) {
        NoiseModel model{noise_levels, seed};
        try {
            model.validate();
        } catch (const Error& e) {
            throw ConfigError(std::string("--noise-levels: ") + e.what());
        }
    }
    if (!(solver.gamma0 > 0.0)) throw ConfigError("--gamma0: must be positive");
    if (!(solver.gamma_factor > 0.0 && solver.gamma_factor < 1.0)) {
        throw ConfigError("--gamma-factor: must lie in (0, 1)");
    }
    if (!(solver.gamma_min > 0.0 && solver.gamma_min <= solver.gamma0)) {
        throw ConfigError("--gamma-min: must lie in (0, gamma0]");
    }
    if (solver.max_newton < 1) throw ConfigError("--max-newton: must be at least 1");
    try {
        solver.validate();
        discrepancy.validate();
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

std::vector<std::pair<std::string, std::string>> read_config_file(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--config: cannot open " + path.string());
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = line;
        view = trim(view.substr(0, view.find('#')));
        if (view.empty()) continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("--config: " + path.string() + ":" + std::to_string(line_no) +
                              ": expected key = value");
        }
        std::string key(trim(view.substr(0, eq)));
        const auto& keys = config_keys();
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            throw ConfigError("--config: " + path.string() + ":" + std::to_string(line_no) +
                              ": unknown key '" + key + "'");
        }
        entries.emplace_back(std::move(key), std::string(trim(view.substr(eq + 1))));
    }
    return entries;
}

}  // namespace multibang
