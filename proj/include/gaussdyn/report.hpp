#pragma once

// CSV and JSON output. Floats use 17 significant digits so values round-trip, and
// no output depends on timing or scheduling.

#include <string>
#include <vector>

#include <json.hpp>

namespace gaussdyn {

using Json = nlohmann::json;

inline constexpr int kJsonSchema = 1;

// %.17g; non-finite values render as nan, inf, -inf.
std::string format_number(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row);
    void add_numbers(const std::vector<double>& row);
    std::string str() const;
};

// Creates parent directories; throws ConfigError when the file cannot be written.
void write_text(const std::string& path, const std::string& content);
void write_csv(const std::string& path, const CsvTable& table);
// Pretty-printed with a trailing newline.
void write_json(const std::string& path, const Json& doc);

// Creates the directory if needed and checks that a file can be created in it.
void ensure_writable_dir(const std::string& dir);

// Joins a directory and a file name.
std::string join_path(const std::string& dir, const std::string& name);

}  // namespace gaussdyn
