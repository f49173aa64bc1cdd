#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "risa/evalharness/consistency.hpp"

namespace risa {

/// CSV header: metric,mean,std,n,fold1,...
void write_report_csv(const std::vector<ConsistencyReport>& reports, std::ostream& out);

/// Inverse of write_report_csv. ParseError with the line number.
std::vector<ConsistencyReport> read_report_csv(std::istream& in);

/// Writes <stem>.csv and a bar chart <stem>.png (mean with a +-std whisker per
/// metric). ConfigError for an empty list, IoError when a file can't be written.
void report(const std::vector<ConsistencyReport>& reports, const std::filesystem::path& stem);

}  // namespace risa
