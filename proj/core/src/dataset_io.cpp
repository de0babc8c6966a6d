#include "otrsens/dataset_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

namespace otrsens {
namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

template <typename T>
T parse_field(std::string_view field, std::size_t line_no) {
  T value{};
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last) {
    throw std::invalid_argument(
        fmt::format("line {}: cannot parse field '{}'", line_no, field));
  }
  return value;
}

}  // namespace

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  std::string line;
  for (std::size_t j = 0; j < data.dim_x(); ++j) {
    line += fmt::format("x{},", j + 1);
  }
  line += "z,a,y\n";
  out << line;
  for (const auto& row : data) {
    line.clear();
    for (double v : row.x) {
      line += fmt::format("{:.17g},", v);
    }
    line += fmt::format("{},{},{:.17g}\n", row.z, row.a, row.y);
    out << line;
  }
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error(fmt::format("cannot open '{}' for writing", path.string()));
  }
  write_dataset_csv(out, data);
}

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("dataset CSV is empty");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_commas(line);
  if (header.size() < 3 || header[header.size() - 3] != "z" || header[header.size() - 2] != "a" ||
      header.back() != "y") {
    throw std::invalid_argument("dataset CSV header must end with z,a,y");
  }
  const std::size_t dim_x = header.size() - 3;
  for (std::size_t j = 0; j < dim_x; ++j) {
    if (header[j] != fmt::format("x{}", j + 1)) {
      throw std::invalid_argument(fmt::format("unexpected header column '{}'", header[j]));
    }
  }

  std::vector<Observation> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != header.size()) {
      throw std::invalid_argument(fmt::format("line {}: expected {} fields, found {}", line_no,
                                              header.size(), fields.size()));
    }
    Observation obs;
    obs.x.resize(dim_x);
    for (std::size_t j = 0; j < dim_x; ++j) {
      obs.x[j] = parse_field<double>(fields[j], line_no);
    }
    obs.z = parse_field<int>(fields[dim_x], line_no);
    obs.a = parse_field<int>(fields[dim_x + 1], line_no);
    obs.y = parse_field<double>(fields[dim_x + 2], line_no);
    rows.push_back(std::move(obs));
  }
  return Dataset(std::move(rows), dim_x);
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error(fmt::format("cannot open '{}'", path.string()));
  }
  return read_dataset_csv(in);
}

}  // namespace otrsens
