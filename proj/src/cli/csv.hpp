#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace maskopt::cli {

inline constexpr std::string_view kCsvVersionLine = "# maskopt-csv v1";

// 17 significant digits, '.' decimal separator.
std::string csv_real(double v);

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> columns);

    class Row {
    public:
        Row& add(std::string_view text);
        Row& add(const char* text) { return add(std::string_view(text)); }
        Row& add(double v);
        Row& add(std::size_t v);
        Row& add(int v);
        Row& add(bool v);
        Row& blank();

    private:
        friend class CsvTable;
        std::vector<std::string> cells_;
    };

    void push(Row row);
    std::size_t row_count() const noexcept { return rows_.size(); }

    // Version line, column header, then rows.
    void write(std::ostream& out) const;
    void write_file(const std::string& path) const;

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

} // namespace maskopt::cli
