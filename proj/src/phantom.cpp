#include "multibang/phantom.hpp"

#include <string>

#include "multibang/errors.hpp"

namespace multibang {

std::string_view to_string(PhantomKind kind) noexcept {
    return kind == PhantomKind::TwoDisks ? "two-disks" : "two-disks-linear";
}

PhantomKind parse_phantom_kind(std::string_view name) {
    if (name == "two-disks") return PhantomKind::TwoDisks;
    if (name == "two-disks-linear") return PhantomKind::TwoDisksLinear;
    throw DomainError("unknown phantom '" + std::string(name) +
                      "' (expected two-disks or two-disks-linear)");
}

double phantom_value(const PhantomSpec& spec, double x1, double x2) {
    if (spec.values.size() != 3) throw DomainError("built-in phantoms need three admissible values");
    const double u1 = spec.values[0];
    const double u2 = spec.values[1];
    const double u3 = spec.values[2];
    const double big = (x1 - 0.45) * (x1 - 0.45) + (x2 - 0.55) * (x2 - 0.55);
    const double small = (x1 - 0.4) * (x1 - 0.4) + (x2 - 0.6) * (x2 - 0.6);
    double v = u1;
    if (big < 0.1) v += u2;
    if (small < 0.02) {
        const double weight = spec.kind == PhantomKind::TwoDisksLinear ? 1.0 - x1 : 1.0;
        v += (u3 - u2) * weight;
    }
    return v;
}

ScalarField build_phantom(const PhantomSpec& spec, const Grid& grid) {
    ScalarField u(grid);
    for (int j = 0; j < grid.n(); ++j) {
        for (int i = 0; i < grid.n(); ++i) u.at(i, j) = phantom_value(spec, grid.x1(i), grid.x2(j));
    }
    return u;
}

}  // namespace multibang
