#pragma once

#include <string>
#include <vector>

#include "iglu/metrics.hpp"

namespace iglu {

/// Column order: Distance, Reward, # Blocks Placed, % Help Followed.
std::string report_csv(const std::vector<ReportRow>& rows);
/// Aligned text table, cells as "mean (std)" with two decimals.
std::string report_table(const std::vector<ReportRow>& rows);

}  // namespace iglu
