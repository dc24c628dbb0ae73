#include "multibang/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "multibang/errors.hpp"

namespace multibang {

namespace {

std::ofstream open_for_write(const std::filesystem::path& path, std::ios::openmode mode) {
    std::ofstream out(path, mode);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw Error("write failed: " + path.string());
}

std::string real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return buf;
}

}  // namespace

void write_field_image(const ScalarField& u, double lo, double hi,
                       const std::filesystem::path& path) {
    if (!(lo < hi)) throw DomainError("write_field_image: need lo < hi");
    const int n = u.grid().n();
    std::string pixels;
    pixels.reserve(u.size());
    for (int row = 0; row < n; ++row) {
        const int j = n - 1 - row;
        for (int i = 0; i < n; ++i) {
            const double t = std::clamp((u.at(i, j) - lo) / (hi - lo), 0.0, 1.0);
            // NaN maps to black
            const double level = std::isnan(t) ? 0.0 : std::round(255.0 * t);
            pixels.push_back(static_cast<char>(static_cast<unsigned char>(level)));
        }
    }
    auto out = open_for_write(path, std::ios::binary);
    out << "P5\n" << n << ' ' << n << "\n255\n";
    out.write(pixels.data(), static_cast<std::streamsize>(pixels.size()));
    finish(out, path);
}

ScalarField label_field(const ScalarField& u, const AdmissibleSet& U) {
    ScalarField labels(u.grid(), 255.0);
    const double last = static_cast<double>(U.size() - 1);
    for (std::size_t k = 0; k < u.size(); ++k) {
        for (std::size_t i = 0; i < U.size(); ++i) {
            if (u[k] == U[i]) {
                labels[k] = std::round(200.0 * static_cast<double>(i) / last);
                break;
            }
        }
    }
    return labels;
}

void write_label_image(const ScalarField& u, const AdmissibleSet& U,
                       const std::filesystem::path& path) {
    write_field_image(label_field(u, U), 0.0, 255.0, path);
}

const char* const kStudyCsvHeader =
    "delta_rel,delta_eff,delta_raw,alpha,e2,e2_raw,einf,singular_nodes,newton_total,flags";

std::string format_study_row(const StudyRow& row) {
    std::string line = real(row.delta_rel) + ',' + real(row.delta_eff) + ',' +
                       real(row.delta_raw) + ',' + real(row.alpha) + ',' + real(row.e2) + ',' +
                       real(row.e2_raw) + ',' + real(row.einf) + ',';
    line += std::to_string(row.singular_nodes) + ',' + std::to_string(row.newton_total) + ',';
    line += format_flags(row.flags);
    return line;
}

void write_study_csv(std::ostream& out, const std::vector<StudyRow>& rows) {
    out << kStudyCsvHeader << '\n';
    for (const auto& row : rows) out << format_study_row(row) << '\n';
}

void write_study_csv(const std::vector<StudyRow>& rows, const std::filesystem::path& path) {
    auto out = open_for_write(path, std::ios::binary);
    write_study_csv(out, rows);
    finish(out, path);
}

namespace {

double parse_real(const std::string& field, std::size_t line_no) {
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (field.empty() || *end != '\0') {
        throw DomainError("line " + std::to_string(line_no) + ": bad number '" + field + "'");
    }
    return v;
}

long long parse_integer(const std::string& field, std::size_t line_no) {
    char* end = nullptr;
    const long long v = std::strtoll(field.c_str(), &end, 10);
    if (field.empty() || *end != '\0') {
        throw DomainError("line " + std::to_string(line_no) + ": bad integer '" + field + "'");
    }
    return v;
}

}  // namespace

std::vector<StudyRow> read_study_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kStudyCsvHeader) {
        throw DomainError("study CSV: missing or unexpected header");
    }
    std::vector<StudyRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 10) {
            throw DomainError("line " + std::to_string(line_no) + ": expected 10 fields");
        }
        StudyRow row;
        row.delta_rel = parse_real(fields[0], line_no);
        row.delta_eff = parse_real(fields[1], line_no);
        row.delta_raw = parse_real(fields[2], line_no);
        row.alpha = parse_real(fields[3], line_no);
        row.e2 = parse_real(fields[4], line_no);
        row.e2_raw = parse_real(fields[5], line_no);
        row.einf = parse_real(fields[6], line_no);
        row.singular_nodes = static_cast<std::size_t>(parse_integer(fields[7], line_no));
        row.newton_total = static_cast<int>(parse_integer(fields[8], line_no));
        row.flags = parse_flags(fields[9]);
        rows.push_back(row);
    }
    return rows;
}

std::vector<StudyRow> read_study_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return read_study_csv(in);
}

}  // namespace multibang
