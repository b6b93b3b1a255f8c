#include "qmonty/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace qmonty {

namespace {

using Ordered = nlohmann::ordered_json;

const std::vector<std::string> kColumns{"host",    "player", "rules",   "trials",   "seed",
                                        "estimate", "ci_low", "ci_high", "analytic", "abs_diff"};

// Shortest representation that reads back to the same double.
std::string number(double x) { return Json(x).dump(); }

double parse_double(const std::string& cell) {
    try {
        std::size_t used = 0;
        const double x = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("bad number '" + cell + "' in report");
    }
}

std::uint64_t parse_count(const std::string& cell) {
    try {
        std::size_t used = 0;
        const auto x = std::stoull(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("bad integer '" + cell + "' in report");
    }
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

} // namespace

std::string rules_label(const RuleSet& rules) {
    std::string s(to_string(rules.variant));
    if (rules.announce_precision_digits) s += ":d" + std::to_string(*rules.announce_precision_digits);
    if (rules.degeneracy == DegeneracyPolicy::deterministic) s += ":det";
    return s;
}

ReportRow make_row(const HostStrategy& host, const PlayerStrategy& player, const RuleSet& rules,
                   const WinStats& stats) {
    ReportRow r;
    r.host = host_label(host);
    r.player = player_label(player);
    r.rules = rules_label(rules);
    r.trials = stats.trials;
    r.seed = stats.seed;
    r.estimate = stats.estimate;
    r.ci_low = stats.ci_low;
    r.ci_high = stats.ci_high;
    r.analytic = analytic_value(host, player, rules);
    if (r.analytic) r.abs_diff = std::abs(r.estimate - *r.analytic);
    return r;
}

std::string emit_report(const std::vector<ReportRow>& rows, const std::string& format) {
    if (format == "csv") {
        std::string out;
        for (std::size_t i = 0; i < kColumns.size(); ++i) out += (i ? "," : "") + kColumns[i];
        out += '\n';
        for (const auto& r : rows) {
            out += r.host + ',' + r.player + ',' + r.rules + ',' + std::to_string(r.trials) + ',' +
                   std::to_string(r.seed) + ',' + number(r.estimate) + ',' + number(r.ci_low) + ',' +
                   number(r.ci_high) + ',' + (r.analytic ? number(*r.analytic) : "") + ',' +
                   (r.abs_diff ? number(*r.abs_diff) : "") + '\n';
        }
        return out;
    }
    if (format == "json") {
        Ordered doc = Ordered::array();
        for (const auto& r : rows) {
            Ordered o;
            o["host"] = r.host;
            o["player"] = r.player;
            o["rules"] = r.rules;
            o["trials"] = r.trials;
            o["seed"] = r.seed;
            o["estimate"] = r.estimate;
            o["ci_low"] = r.ci_low;
            o["ci_high"] = r.ci_high;
            o["analytic"] = r.analytic ? Ordered(*r.analytic) : Ordered(nullptr);
            o["abs_diff"] = r.abs_diff ? Ordered(*r.abs_diff) : Ordered(nullptr);
            doc.push_back(std::move(o));
        }
        return doc.dump(2) + '\n';
    }
    throw ConfigError("report format must be csv or json, not '" + format + "'");
}

std::vector<ReportRow> parse_csv_report(const std::string& text) {
    std::stringstream in(text);
    std::string line;
    if (!std::getline(in, line) || split_line(line) != kColumns) {
        throw ConfigError("report header does not match the column contract");
    }
    std::vector<ReportRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c = split_line(line);
        if (c.size() != kColumns.size()) throw ConfigError("report row has the wrong number of cells");
        ReportRow r;
        r.host = c[0];
        r.player = c[1];
        r.rules = c[2];
        r.trials = parse_count(c[3]);
        r.seed = parse_count(c[4]);
        r.estimate = parse_double(c[5]);
        r.ci_low = parse_double(c[6]);
        r.ci_high = parse_double(c[7]);
        if (!c[8].empty()) r.analytic = parse_double(c[8]);
        if (!c[9].empty()) r.abs_diff = parse_double(c[9]);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<ReportRow> parse_json_report(const std::string& text) {
    std::vector<ReportRow> rows;
    try {
        for (const auto& o : Json::parse(text)) {
            ReportRow r;
            r.host = o.at("host").get<std::string>();
            r.player = o.at("player").get<std::string>();
            r.rules = o.at("rules").get<std::string>();
            r.trials = o.at("trials").get<std::uint64_t>();
            r.seed = o.at("seed").get<std::uint64_t>();
            r.estimate = o.at("estimate").get<double>();
            r.ci_low = o.at("ci_low").get<double>();
            r.ci_high = o.at("ci_high").get<double>();
            if (!o.at("analytic").is_null()) r.analytic = o.at("analytic").get<double>();
            if (!o.at("abs_diff").is_null()) r.abs_diff = o.at("abs_diff").get<double>();
            rows.push_back(std::move(r));
        }
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("malformed JSON report: ") + e.what());
    }
    return rows;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("write to '" + path + "' failed");
}

} // namespace qmonty
