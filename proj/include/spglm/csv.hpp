#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace spglm {

// Strictly numeric CSV: a header line followed by rows of finite reals.
struct NumericCsv {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based file line of each row
};

// Errors name the file line. `stage` is attached to the thrown spglm::Error.
NumericCsv read_numeric_csv(const std::filesystem::path& path, const std::string& stage);

// Counts leading columns named prefix1, prefix2, ... starting at `offset`.
std::size_t count_indexed_columns(const std::vector<std::string>& header, std::size_t offset,
                                  char prefix);

std::string format_double(double value);

}  // namespace spglm
