#pragma once

#include <filesystem>
#include <iosfwd>

#include "otrsens/model.hpp"

namespace otrsens {

/// Writes the header `x1,...,xk,z,a,y` followed by one line per row. Reals are
/// printed with 17 significant digits so reading back is lossless.
void write_dataset_csv(std::ostream& out, const Dataset& data);
void write_dataset_csv(const std::filesystem::path& path, const Dataset& data);

/// Parses the format produced by write_dataset_csv. Throws
/// std::invalid_argument with the offending line number on malformed input.
Dataset read_dataset_csv(std::istream& in);
Dataset read_dataset_csv(const std::filesystem::path& path);

}  // namespace otrsens
