#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "multibang/grid.hpp"
#include "multibang/penalty.hpp"
#include "multibang/regpath.hpp"

namespace multibang {

/// Binary 8-bit PGM, row 0 at the top (x2 = 1), pixel = round(255 clamp((u - lo)/(hi - lo))).
void write_field_image(const ScalarField& u, double lo, double hi,
                       const std::filesystem::path& path);

/// Gray levels per node: admissible value u_i maps to round(200 i / (d - 1)), anything else
/// (the transition set) to 255.
ScalarField label_field(const ScalarField& u, const AdmissibleSet& U);
void write_label_image(const ScalarField& u, const AdmissibleSet& U,
                       const std::filesystem::path& path);

/// Header line of the study table.
extern const char* const kStudyCsvHeader;

std::string format_study_row(const StudyRow& row);
void write_study_csv(std::ostream& out, const std::vector<StudyRow>& rows);
void write_study_csv(const std::vector<StudyRow>& rows, const std::filesystem::path& path);

/// Inverse of write_study_csv for the tabulated columns. Throws DomainError on malformed input.
std::vector<StudyRow> read_study_csv(std::istream& in);
std::vector<StudyRow> read_study_csv(const std::filesystem::path& path);

}  // namespace multibang
