// qmonty: batch simulations, probes, transcript replay and the HTTP service.
#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "qmonty/lab.hpp"
#include "qmonty/report.hpp"
#include "qmonty/service.hpp"

using namespace qmonty;

namespace {

// Accepts plain numbers and multiples of pi: "0.3", "pi/8", "3pi/8", "pi".
double parse_angle(std::string s) {
    const auto at = s.find("pi");
    if (at == std::string::npos) return std::stod(s);
    const std::string num = s.substr(0, at);
    std::string den = s.substr(at + 2);
    double value = (num.empty() ? 1.0 : std::stod(num)) * std::numbers::pi;
    if (!den.empty()) {
        if (den.front() != '/') throw ConfigError("bad angle '" + s + "'");
        value /= std::stod(den.substr(1));
    }
    return value;
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            out.push_back(parse_angle(item));
        } catch (const std::logic_error&) {
            throw ConfigError("bad angle '" + item + "' in --theta-sweep");
        }
    }
    if (out.empty()) throw ConfigError("--theta-sweep needs at least one angle");
    return out;
}

void emit(const std::string& doc, const std::string& output) {
    if (output.empty()) {
        std::cout << doc;
    } else {
        write_text_file(output, doc);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Three-door quantum game: referee, strategies and Monte Carlo lab"};
    app.require_subcommand(1);

    std::string host_spec = "haar", player_spec = "switch", variant = "strict", format = "csv";
    std::string degeneracy = "random", theta_grid, output, config_path;
    std::uint64_t trials = 10000, seed = 0;
    int digits = 0;
    unsigned threads = 0;

    auto* sim = app.add_subcommand("simulate", "Run seeded trials and print a report");
    sim->add_option("--host", host_spec, "Host: haar, axes, real, finite[:N], entangled, entangled-povm, "
                                         "ignore, complete-vn, perturbed:L, restarting[:R], JSON or @file");
    sim->add_option("--player", player_spec, "Player: stick, switch, cheat-finite, cheat-real, angle:T, "
                                             "bayes, random, JSON or @file");
    sim->add_option("--rules", variant, "Rule variant");
    sim->add_option("-n,--trials", trials, "Number of games")->check(CLI::PositiveNumber);
    sim->add_option("--seed", seed, "Master seed");
    sim->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sim->add_option("--theta-sweep", theta_grid, "Comma-separated angles (e.g. 0,pi/8,pi/4)");
    sim->add_option("--digits", digits, "Significant digits of the announced door")
        ->check(CLI::PositiveNumber);
    sim->add_option("--degeneracy", degeneracy, "random or deterministic")
        ->check(CLI::IsMember({"random", "deterministic"}));
    sim->add_option("--threads", threads, "Worker threads (0 = all cores)");
    sim->add_option("-o,--output", output, "Write the report to a file");
    sim->add_option("--config", config_path, "Experiment config JSON (flags given later are ignored)");

    std::uint64_t budget = 20000;
    auto* probe = app.add_subcommand("probe", "Search a family of players for the best response");
    probe->add_option("--host", host_spec, "Host spec");
    probe->add_option("-n,--budget", budget, "Trials per candidate")->check(CLI::PositiveNumber);
    probe->add_option("--seed", seed, "Master seed");
    probe->add_option("--threads", threads, "Worker threads");
    probe->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    std::string transcript_path;
    auto* rep = app.add_subcommand("replay", "Replay a transcript JSON and print the result");
    rep->add_option("transcript", transcript_path, "Transcript file")->required();

    int port = 8080;
    std::string bind = "0.0.0.0";
    auto* srv = app.add_subcommand("serve", "Serve the JSON API");
    srv->add_option("--port", port, "TCP port (QMONTY_PORT overrides)");
    srv->add_option("--bind", bind, "Listen address");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*sim) {
            ExperimentConfig config;
            if (!config_path.empty()) {
                std::ifstream in(config_path);
                if (!in) throw IoError("cannot read '" + config_path + "'");
                config = config_from_json(Json::parse(in));
            } else {
                config.host = parse_host_spec(host_spec);
                config.player = parse_player_spec(player_spec);
                config.rules.variant = parse_variant(variant);
                config.rules.degeneracy = parse_degeneracy(degeneracy);
                if (digits > 0) config.rules.announce_precision_digits = digits;
                config.trials = trials;
                config.seed = seed;
                config.format = format;
                config.threads = threads;
            }
            std::vector<ReportRow> rows;
            if (!theta_grid.empty()) {
                for (const auto& pt : theta_sweep(config.host, parse_grid(theta_grid), config.trials,
                                                  config.seed, config.threads)) {
                    rows.push_back(make_row(config.host, AngleSweepPlayer{pt.theta, std::nullopt},
                                            config.rules, pt.stats));
                }
            } else {
                rows.push_back(make_row(config.host, config.player, config.rules, run_trials(config)));
            }
            emit(emit_report(rows, config.format), output);
            return 0;
        }
        if (*probe) {
            const HostStrategy host = parse_host_spec(host_spec);
            const ProbeResult result = best_response_probe(host, budget, seed, threads);
            std::vector<ReportRow> rows;
            for (const auto& e : result.tried) {
                ReportRow row = make_row(host, e.player, RuleSet{}, e.stats);
                row.player = e.label;
                rows.push_back(row);
            }
            std::cout << emit_report(rows, format);
            std::cerr << "best: " << result.best.label << " " << result.best.stats.estimate << "\n";
            return 0;
        }
        if (*rep) {
            std::ifstream in(transcript_path);
            if (!in) throw IoError("cannot read '" + transcript_path + "'");
            const Json original = Json::parse(in);
            const Json again = transcript_to_json(replay(original));
            std::cout << again.dump(2) << "\n";
            if (again != original) {
                std::cerr << "replay differs from the recorded transcript\n";
                return 3;
            }
            return 0;
        }
        if (*srv) {
            if (const char* env = std::getenv("QMONTY_PORT")) port = std::atoi(env);
            std::cerr << "listening on " << bind << ":" << port << "\n";
            const int rc = serve(port, bind);
            if (rc != 0) std::cerr << "cannot bind " << bind << ":" << port << "\n";
            return rc;
        }
    } catch (const RunAborted& e) {
        std::cerr << "run aborted: " << e.what() << "\n" << e.transcript().dump(2) << "\n";
        return e.host_violation() ? 2 : 1;
    } catch (const HostViolation& e) {
        std::cerr << "host violation: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
