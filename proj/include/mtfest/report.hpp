#pragma once

#include "mtfest/edge_mtf.hpp"
#include "mtfest/gaussian_mtf.hpp"
#include "mtfest/kernel_lab.hpp"
#include "mtfest/spectrum.hpp"

#include <filesystem>
#include <initializer_list>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mtfest {

/// Table of text cells, numbers formatted by format_number(). An empty name
/// means the table is written without a `#name` marker line (only allowed
/// for the first section).
struct CsvSection {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::initializer_list<double> values);
    void add_row(const std::vector<double>& values);

    /// Index of a header column; throws InvalidArgument when absent.
    std::size_t column(std::string_view key) const;

    /// Cell parsed as a number; throws CorruptFile when it is not one.
    double number(std::size_t row, std::string_view key) const;

    /// Numeric value in the `value` column of the row whose first cell is
    /// `label`; nullopt when no such row exists.
    std::optional<double> lookup(std::string_view label) const;
};

/// Plain-text output format: manifest lines "# key: value", then sections,
/// each a "#name" marker, a header row and numeric rows.
struct CsvDocument {
    std::vector<std::pair<std::string, std::string>> manifest;
    std::vector<CsvSection> sections;

    /// nullptr when no section carries that name.
    const CsvSection* find(std::string_view name) const;
};

/// Nine significant digits.
std::string format_number(double v);

void write_csv(const CsvDocument& doc, std::ostream& out);
std::string to_csv(const CsvDocument& doc);
void save_csv(const CsvDocument& doc, const std::filesystem::path& path);

/// Inverse of write_csv. Throws CorruptFile on malformed input.
CsvDocument parse_csv(std::istream& in);
CsvDocument load_csv(const std::filesystem::path& path);

CsvSection profile_section(const RadialProfile& profile, std::string name = "profile");
CsvSection curve_section(const MtfCurve& curve, std::string name = "mtf");

/// Sections #estimate, #profile (with in_fit_region) and #mtf.
std::vector<CsvSection> estimate_sections(const MtfReport& report);

/// Sections #profile, #lsf and #mtf.
std::vector<CsvSection> edge_sections(const EdgeProfile& profile, const Lsf& lsf,
                                      const MtfCurve& mtf);

/// Nonzero taps as (x, y, weight), offsets in pixels.
CsvSection kernel_section(const Kernel& kernel);

} // namespace mtfest
