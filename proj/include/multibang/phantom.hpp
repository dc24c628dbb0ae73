#pragma once

#include <string>
#include <string_view>

#include "multibang/grid.hpp"
#include "multibang/penalty.hpp"

namespace multibang {

enum class PhantomKind { TwoDisks, TwoDisksLinear };

/// Two nested inclusions: background u_1, a large disk (center (0.45, 0.55), r^2 = 0.1)
/// adding u_2, and a small disk (center (0.4, 0.6), r^2 = 0.02) adding u_3 - u_2. The
/// linear variant scales the small-disk term by (1 - x_1).
struct PhantomSpec {
    PhantomKind kind = PhantomKind::TwoDisks;
    AdmissibleSet values{{0.0, 0.1, 0.15}};
};

std::string_view to_string(PhantomKind kind) noexcept;
/// Accepts "two-disks" and "two-disks-linear".
PhantomKind parse_phantom_kind(std::string_view name);

double phantom_value(const PhantomSpec& spec, double x1, double x2);
ScalarField build_phantom(const PhantomSpec& spec, const Grid& grid);

}  // namespace multibang
