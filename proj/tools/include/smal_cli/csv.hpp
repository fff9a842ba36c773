#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace smal::cli {

/// Fixed-format CSV writer: '.' decimal separator, newline-terminated rows,
/// one header row, stable float formatting so identical runs produce
/// byte-identical files.
class CsvWriter {
  public:
    CsvWriter(const std::filesystem::path& file, std::span<const std::string> header);

    void row(std::span<const std::string> cells);

    static std::string num(double v);
    static std::string num_int(long v);
    static std::string flag(bool b);

  private:
    std::ofstream out_;
    std::size_t columns_;
};

}  // namespace smal::cli
