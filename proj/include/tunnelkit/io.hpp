#pragma once

#include "json.hpp"

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace tunnelkit {

// Shortest text that reads back to the same double (17 significant digits).
std::string format_double(double x);

class CsvTable {
public:
    using Cell = std::variant<double, long long, std::string>;

    explicit CsvTable(std::vector<std::string> columns);
    void add_row(std::vector<Cell> row); // std::invalid_argument on a width mismatch
    std::size_t rows() const { return rows_.size(); }
    const std::vector<std::string>& columns() const { return columns_; }
    std::string str() const;

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<Cell>> rows_;
};

// All three throw IoError on file-system failures.
void write_text(const std::filesystem::path& path, const std::string& text);
void write_csv(const std::filesystem::path& path, const CsvTable& table);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

// IoError if unreadable, ConfigError (empty path) if not valid JSON.
nlohmann::json read_json(const std::filesystem::path& path);

} // namespace tunnelkit
