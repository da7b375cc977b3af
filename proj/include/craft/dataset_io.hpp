#pragma once

// Line-oriented dataset format:
//
//   EXBMDP v1 agent=<A|B> H=<int> obslen=<int> n=<int> labeled=<0|1>
//   <H space-separated 0/1 strings of length obslen> [| <H space-separated labels>]
//   ...  (exactly n trajectory lines)
//
// Parse failures throw DataError naming the 1-based line number.

#include <filesystem>
#include <iosfwd>
#include <string>

#include "craft/exbmdp.hpp"

namespace craft {

void write_dataset(std::ostream& out, const TrajectoryDataset& dataset);
TrajectoryDataset read_dataset(std::istream& in, const std::string& source = "<stream>");

void save_dataset(const std::filesystem::path& path, const TrajectoryDataset& dataset);
TrajectoryDataset load_dataset(const std::filesystem::path& path);

}  // namespace craft
