#include "smal_cli/csv.hpp"

#include <cstdio>
#include <stdexcept>

namespace smal::cli {

CsvWriter::CsvWriter(const std::filesystem::path& file, std::span<const std::string> header)
    : out_(file), columns_(header.size()) {
    if (!out_) throw std::runtime_error("cannot open " + file.string());
    row(header);
}

void CsvWriter::row(std::span<const std::string> cells) {
    if (cells.size() != columns_) throw std::logic_error("csv row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        out_ << cells[i];
    }
    out_ << '\n';
}

std::string CsvWriter::num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::string CsvWriter::num_int(long v) { return std::to_string(v); }

std::string CsvWriter::flag(bool b) { return b ? "true" : "false"; }

}  // namespace smal::cli
