#include "iglu/report.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace iglu {

namespace {

std::string cell(const MeanStd& m) { return fmt::format("{:.2f} ({:.2f})", m.mean, m.std); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string report_csv(const std::vector<ReportRow>& rows) {
  std::string out =
      "label,episodes,distance_mean,distance_std,reward_mean,reward_std,blocks_placed_mean,blocks_placed_std,"
      "help_followed_pct_mean,help_followed_pct_std,helped_episodes\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},", csv_field(r.label), r.episodes,
                       r.distance.mean, r.distance.std, r.reward.mean, r.reward.std, r.blocks_placed.mean,
                       r.blocks_placed.std);
    if (r.help_followed_pct) {
      out += fmt::format("{:.6f},{:.6f},", r.help_followed_pct->mean, r.help_followed_pct->std);
    } else {
      out += ",,";
    }
    out += fmt::format("{}\n", r.helped_episodes);
  }
  return out;
}

std::string report_table(const std::vector<ReportRow>& rows) {
  const std::vector<std::string> header = {"Model", "Distance", "Reward", "# Blocks Placed", "% Help Followed"};
  std::vector<std::vector<std::string>> table = {header};
  for (const auto& r : rows) {
    table.push_back({r.label, cell(r.distance), cell(r.reward), cell(r.blocks_placed),
                     r.help_followed_pct ? cell(*r.help_followed_pct) : "n/a"});
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : table) {
    for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
  }
  std::string out;
  for (std::size_t row = 0; row < table.size(); ++row) {
    for (std::size_t i = 0; i < table[row].size(); ++i) {
      out += fmt::format("{:<{}}", table[row][i], width[i]);
      out += i + 1 < table[row].size() ? " | " : "\n";
    }
    if (row == 0) {
      for (std::size_t i = 0; i < width.size(); ++i) {
        out += std::string(width[i], '-');
        out += i + 1 < width.size() ? "-+-" : "\n";
      }
    }
  }
  return out;
}

}  // namespace iglu
