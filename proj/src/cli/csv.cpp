#include "csv.hpp"

#include <fstream>

#include <fmt/format.h>

#include "maskopt/error.hpp"

namespace maskopt::cli {

std::string csv_real(double v) { return fmt::format("{:.17g}", v); }

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

CsvTable::Row& CsvTable::Row::add(std::string_view text) {
    cells_.emplace_back(text);
    return *this;
}

CsvTable::Row& CsvTable::Row::add(double v) { return add(csv_real(v)); }

CsvTable::Row& CsvTable::Row::add(std::size_t v) { return add(std::to_string(v)); }

CsvTable::Row& CsvTable::Row::add(int v) { return add(std::to_string(v)); }

CsvTable::Row& CsvTable::Row::add(bool v) { return add(std::string_view(v ? "1" : "0")); }

CsvTable::Row& CsvTable::Row::blank() { return add(std::string_view{}); }

void CsvTable::push(Row row) {
    if (row.cells_.size() != columns_.size()) {
        throw Error(fmt::format("CSV row has {} cells, table has {} columns", row.cells_.size(),
                                columns_.size()));
    }
    rows_.push_back(std::move(row.cells_));
}

void CsvTable::write(std::ostream& out) const {
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out << ',';
            out << cells[i];
        }
        out << '\n';
    };
    out << kCsvVersionLine << '\n';
    line(columns_);
    for (const auto& r : rows_) line(r);
}

void CsvTable::write_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open " + path + " for writing");
    write(out);
    if (!out) throw FormatError("failed writing " + path);
}

} // namespace maskopt::cli
