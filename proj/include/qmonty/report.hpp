// report.hpp: CSV and JSON result tables.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qmonty/lab.hpp"

namespace qmonty {

// Column order: host, player, rules, trials, seed, estimate, ci_low, ci_high,
// analytic, abs_diff. Empty analytic cells mean "unknown".
struct ReportRow {
    std::string host;
    std::string player;
    std::string rules;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    double estimate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::optional<double> analytic;
    std::optional<double> abs_diff;

    friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

std::string rules_label(const RuleSet& rules);

ReportRow make_row(const HostStrategy& host, const PlayerStrategy& player, const RuleSet& rules,
                   const WinStats& stats);

// format is "csv" or "json"; throws ConfigError otherwise.
std::string emit_report(const std::vector<ReportRow>& rows, const std::string& format);
std::vector<ReportRow> parse_csv_report(const std::string& text);
std::vector<ReportRow> parse_json_report(const std::string& text);

// Throws IoError when the file cannot be written.
void write_text_file(const std::string& path, const std::string& text);

} // namespace qmonty
