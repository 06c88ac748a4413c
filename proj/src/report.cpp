#include "mtfest/report.hpp"

#include "mtfest/error.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace mtfest {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, sep)) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == sep) {
        out.emplace_back();
    }
    return out;
}

std::optional<double> parse_number(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) {
        return std::nullopt;
    }
    return v;
}

} // namespace

void CsvSection::add_row(std::initializer_list<double> values) {
    add_row(std::vector<double>(values));
}

void CsvSection::add_row(const std::vector<double>& values) {
    std::vector<std::string> row;
    row.reserve(values.size());
    for (double v : values) {
        row.push_back(format_number(v));
    }
    rows.push_back(std::move(row));
}

double CsvSection::number(std::size_t row, std::string_view key) const {
    const std::string& cell = rows.at(row).at(column(key));
    const auto v = parse_number(cell);
    if (!v) {
        throw Error(ErrorCode::CorruptFile, "'" + cell + "' is not a number");
    }
    return *v;
}

std::optional<double> CsvSection::lookup(std::string_view label) const {
    const std::size_t col = column("value");
    for (const auto& row : rows) {
        if (!row.empty() && row.front() == label) {
            return parse_number(row.at(col));
        }
    }
    return std::nullopt;
}

std::size_t CsvSection::column(std::string_view key) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == key) {
            return i;
        }
    }
    throw Error(ErrorCode::InvalidArgument,
                "section '" + name + "' has no column '" + std::string(key) + "'");
}

const CsvSection* CsvDocument::find(std::string_view name) const {
    for (const auto& s : sections) {
        if (s.name == name) {
            return &s;
        }
    }
    return nullptr;
}

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

void write_csv(const CsvDocument& doc, std::ostream& out) {
    for (const auto& [key, value] : doc.manifest) {
        out << "# " << key << ": " << value << '\n';
    }
    for (std::size_t s = 0; s < doc.sections.size(); ++s) {
        const CsvSection& sec = doc.sections[s];
        if (sec.name.empty() && s != 0) {
            throw Error(ErrorCode::InvalidArgument, "only the first section may be unnamed");
        }
        if (!sec.name.empty()) {
            out << '#' << sec.name << '\n';
        }
        for (std::size_t i = 0; i < sec.header.size(); ++i) {
            out << (i ? "," : "") << sec.header[i];
        }
        out << '\n';
        for (const auto& row : sec.rows) {
            if (row.size() != sec.header.size()) {
                throw Error(ErrorCode::InvalidArgument,
                            "row width does not match the header of '" + sec.name + "'");
            }
            for (std::size_t i = 0; i < row.size(); ++i) {
                out << (i ? "," : "") << row[i];
            }
            out << '\n';
        }
    }
}

std::string to_csv(const CsvDocument& doc) {
    std::ostringstream ss;
    write_csv(doc, ss);
    return ss.str();
}

void save_csv(const CsvDocument& doc, const std::filesystem::path& path) {
    const std::string text = to_csv(doc);
    std::ofstream f(path, std::ios::binary);
    if (!f || !f.write(text.data(), static_cast<std::streamsize>(text.size()))) {
        throw Error(ErrorCode::Io, "cannot write " + path.string());
    }
}

CsvDocument parse_csv(std::istream& in) {
    CsvDocument doc;
    CsvSection* current = nullptr;
    bool expect_header = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (line.rfind("# ", 0) == 0) {
            if (!doc.sections.empty()) {
                throw Error(ErrorCode::CorruptFile,
                            "line " + std::to_string(line_no) + ": manifest after data");
            }
            const auto colon = line.find(": ", 2);
            if (colon == std::string::npos) {
                throw Error(ErrorCode::CorruptFile,
                            "line " + std::to_string(line_no) + ": manifest line without key");
            }
            doc.manifest.emplace_back(line.substr(2, colon - 2), line.substr(colon + 2));
            continue;
        }
        if (line.front() == '#') {
            if (expect_header) {
                throw Error(ErrorCode::CorruptFile,
                            "line " + std::to_string(line_no) + ": section without header");
            }
            doc.sections.push_back({line.substr(1), {}, {}});
            current = &doc.sections.back();
            expect_header = true;
            continue;
        }
        if (!current) {
            doc.sections.push_back({});
            current = &doc.sections.back();
            expect_header = true;
        }
        if (expect_header) {
            current->header = split(line, ',');
            expect_header = false;
            continue;
        }
        const auto cells = split(line, ',');
        if (cells.size() != current->header.size()) {
            throw Error(ErrorCode::CorruptFile,
                        "line " + std::to_string(line_no) + ": expected " +
                            std::to_string(current->header.size()) + " fields");
        }
        current->rows.push_back(cells);
    }
    if (expect_header) {
        throw Error(ErrorCode::CorruptFile, "last section has no header");
    }
    return doc;
}

CsvDocument load_csv(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw Error(ErrorCode::Io, "cannot open " + path.string());
    }
    return parse_csv(f);
}

CsvSection profile_section(const RadialProfile& profile, std::string name) {
    CsvSection s{std::move(name), {"k2", "mean_log_power", "count"}, {}};
    for (const auto& b : profile.bins) {
        s.add_row({b.k2, b.mean_log_power, static_cast<double>(b.count)});
    }
    return s;
}

CsvSection curve_section(const MtfCurve& curve, std::string name) {
    CsvSection s{std::move(name), {"k", "m"}, {}};
    const bool banded = curve.band.size() == curve.samples.size() && !curve.band.empty();
    if (banded) {
        s.header.insert(s.header.end(), {"m_low", "m_high"});
    }
    for (std::size_t i = 0; i < curve.samples.size(); ++i) {
        std::vector<double> row{curve.samples[i].k, curve.samples[i].m};
        if (banded) {
            row.insert(row.end(), {curve.band[i].low, curve.band[i].high});
        }
        s.add_row(row);
    }
    return s;
}

std::vector<CsvSection> estimate_sections(const MtfReport& report) {
    const GaussianPsfEstimate& e = report.estimate;
    CsvSection est{"estimate",
                   {"sigma", "fwhm", "slope", "intercept", "r2", "k2_min", "k2_max"},
                   {}};
    est.add_row({e.sigma, e.fwhm, e.slope, e.intercept, e.r2, e.region.k2_min, e.region.k2_max});

    CsvSection prof = profile_section(report.profile);
    prof.header.emplace_back("in_fit_region");
    for (std::size_t i = 0; i < prof.rows.size(); ++i) {
        prof.rows[i].push_back(e.region.contains(i) ? "1" : "0");
    }
    return {std::move(est), std::move(prof), curve_section(report.curve)};
}

std::vector<CsvSection> edge_sections(const EdgeProfile& profile, const Lsf& lsf,
                                      const MtfCurve& mtf) {
    CsvSection p{"profile", {"d", "v"}, {}};
    for (const auto& s : profile.samples) {
        p.add_row({s.d, s.v});
    }
    CsvSection l{"lsf", {"d", "w"}, {}};
    for (const auto& s : lsf.samples) {
        l.add_row({s.d, s.w});
    }
    CsvSection m = curve_section(mtf);
    return {std::move(p), std::move(l), std::move(m)};
}

CsvSection kernel_section(const Kernel& kernel) {
    CsvSection s{"kernel", {"x", "y", "weight"}, {}};
    const int e = kernel.half_extent();
    const double step = 1.0 / kernel.subdiv();
    for (int qy = -e; qy <= e; ++qy) {
        for (int qx = -e; qx <= e; ++qx) {
            const double t = kernel.tap(qx, qy);
            if (t != 0.0) {
                s.add_row({qx * step, qy * step, t});
            }
        }
    }
    return s;
}

} // namespace mtfest
