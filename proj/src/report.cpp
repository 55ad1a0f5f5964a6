#include "gaussdyn/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "gaussdyn/errors.hpp"

namespace gaussdyn {

namespace fs = std::filesystem;

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void CsvTable::add(std::vector<std::string> row) {
    if (row.size() != header.size()) throw InvalidArgument("CSV row width differs from the header");
    rows.push_back(std::move(row));
}

void CsvTable::add_numbers(const std::vector<double>& row) {
    std::vector<std::string> cells;
    cells.reserve(row.size());
    for (double v : row) cells.push_back(format_number(v));
    add(std::move(cells));
}

std::string CsvTable::str() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
}

void write_text(const std::string& path, const std::string& content) {
    const fs::path p(path);
    std::error_code ec;
    if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write " + path);
    f << content;
    if (!f) throw ConfigError("failed writing " + path);
}

void write_csv(const std::string& path, const CsvTable& table) { write_text(path, table.str()); }

void write_json(const std::string& path, const Json& doc) { write_text(path, doc.dump(2) + "\n"); }

void ensure_writable_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir)) throw ConfigError("output directory " + dir + " cannot be created");
    const fs::path probe = fs::path(dir) / ".write_probe";
    {
        std::ofstream f(probe);
        if (!f) throw ConfigError("output directory " + dir + " is not writable");
    }
    fs::remove(probe, ec);
}

std::string join_path(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

}  // namespace gaussdyn
