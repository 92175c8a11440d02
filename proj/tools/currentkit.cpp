// currentkit: scenario-driven checks and studies.
//
//   currentkit verify    --config scenarios/suite.json --out out/
//   currentkit transport --config scenarios/rotating_square.json
//   currentkit flatnorm  --config scenarios/square_boundary.json
//   currentkit converge  --config scenarios/suite.json --workers 4
//
// Exit status: 0 all checks pass, 1 a check failed, 2 bad input.

#include <CLI11.hpp>

#include "currentkit/harness.hpp"

#include <cstdlib>
#include <iostream>

using namespace currentkit;

namespace {

int log_level_from_env()
{
    const char* v = std::getenv("CURRENTKIT_LOG");
    if (!v) return 0;
    std::string s(v);
    if (s == "debug" || s == "2") return 2;
    if (s == "info" || s == "1") return 1;
    return 0;
}

std::vector<std::vector<std::string>> check_rows(const std::vector<ReportRow>& rows)
{
    std::vector<std::vector<std::string>> out;
    for (const auto& r : rows) out.push_back(report_fields(r));
    return out;
}

void write_timings(const std::filesystem::path& dir, const std::vector<ReportRow>& rows)
{
    std::vector<std::vector<std::string>> t;
    for (const auto& r : rows) t.push_back({r.scenario, r.quantity, format_number(r.runtime)});
    write_csv(dir / "timings.csv", {"scenario", "quantity", "runtime_s"}, t);
}

/// Prints failing rows and returns the exit status for them.
int summarize(const std::vector<ReportRow>& rows, const RunOptions& o)
{
    int failed = 0;
    for (const auto& r : rows) {
        if (r.pass) continue;
        ++failed;
        std::cerr << "FAIL " << r.scenario << " " << r.quantity << ": value=" << format_number(r.value);
        if (!std::isnan(r.oracle)) std::cerr << " oracle=" << format_number(r.oracle);
        std::cerr << " abs_error=" << format_number(r.abs_error) << " tolerance=" << format_number(r.tolerance) << "\n";
    }
    if (o.log_level >= 1 || failed)
        std::cerr << rows.size() - static_cast<std::size_t>(failed) << "/" << rows.size() << " checks passed\n";
    return failed ? 1 : 0;
}

template <class T>
std::vector<T> concat(const std::vector<std::vector<T>>& parts)
{
    std::vector<T> out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Numerical checks for currents, flat norms and transport of chains"};
    app.require_subcommand(1, 1);
    std::string config;
    std::string out_dir = ".";
    int workers = 1;
    std::uint64_t seed = 0;
    double tol_scale = 1.0;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config, "scenario JSON (single scenario or {\"scenarios\": [...]})")->required();
        sub->add_option("--out", out_dir, "output directory for CSV reports");
        sub->add_option("--workers", workers, "scenarios run concurrently")->check(CLI::Range(1, 256));
        sub->add_option("--seed", seed, "override every scenario's seed");
        sub->add_option("--tolerance-scale", tol_scale, "multiplies absolute tolerances")->check(CLI::NonNegativeNumber);
    };
    auto* verify = app.add_subcommand("verify", "run the invariant suite on every scenario");
    auto* transport = app.add_subcommand("transport", "transport derivative against finite differences");
    auto* flatnorm = app.add_subcommand("flatnorm", "flat norm by linear programming");
    auto* converge = app.add_subcommand("converge", "refinement studies with observed orders");
    for (auto* s : {verify, transport, flatnorm, converge}) add_common(s);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    RunOptions opts;
    opts.tolerance_scale = tol_scale;
    opts.workers = workers;
    opts.log_level = log_level_from_env();
    for (auto* s : {verify, transport, flatnorm, converge})
        if (s->count("--seed")) opts.seed = seed;

    std::vector<ScenarioConfig> scenarios;
    try {
        scenarios = load_scenarios(config);
        for (const auto& s : scenarios) detail::validate(s);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "parse error: " << config << ": " << e.what() << "\n";
        return 2;
    }
    std::filesystem::path dir(out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        std::cerr << "cannot create " << dir << ": " << ec.message() << "\n";
        return 2;
    }
    detail::log(opts, 1, "loaded " + std::to_string(scenarios.size()) + " scenario(s) from " + config);

    try {
        if (verify->parsed()) {
            auto parts = run_parallel<std::vector<ReportRow>>(scenarios, workers, [&](const ScenarioConfig& s) {
                detail::log(opts, 1, "verify " + s.name);
                return run_verify(s, opts);
            });
            auto rows = concat(parts);
            write_csv(dir / "verify.csv", report_header(), check_rows(rows));
            write_timings(dir, rows);
            return summarize(rows, opts);
        }
        if (transport->parsed()) {
            auto parts = run_parallel<TransportTable>(scenarios, workers, [&](const ScenarioConfig& s) {
                detail::log(opts, 1, "transport " + s.name);
                return run_transport(s, opts);
            });
            std::vector<ReportRow> rows;
            std::vector<std::vector<std::string>> table;
            for (const auto& p : parts) {
                rows.insert(rows.end(), p.checks.begin(), p.checks.end());
                table.insert(table.end(), p.table.begin(), p.table.end());
            }
            write_csv(dir / "transport.csv", {"scenario", "eps", "analytic", "fd", "abs_error", "order"}, table);
            write_csv(dir / "transport_checks.csv", report_header(), check_rows(rows));
            write_timings(dir, rows);
            return summarize(rows, opts);
        }
        if (flatnorm->parsed()) {
            auto parts = run_parallel<FlatNormOutput>(scenarios, workers, [&](const ScenarioConfig& s) {
                detail::log(opts, 1, "flatnorm " + s.name);
                return run_flatnorm(s, opts);
            });
            std::vector<ReportRow> rows;
            std::vector<std::vector<std::string>> summary, decomposition;
            for (std::size_t i = 0; i < parts.size(); ++i) {
                const auto& p = parts[i];
                rows.insert(rows.end(), p.checks.begin(), p.checks.end());
                if (!p.summary.empty()) summary.push_back(p.summary);
                decomposition.insert(decomposition.end(), p.decomposition.begin(), p.decomposition.end());
                if (!p.lp_text.empty()) {
                    std::ofstream lp(dir / (scenarios[i].name + ".lp"));
                    lp << p.lp_text;
                }
            }
            write_csv(dir / "flatnorm.csv", {"scenario", "flat_norm", "mass_R", "mass_S", "mass_T", "iterations"}, summary);
            write_csv(dir / "flatnorm_decomposition.csv", {"scenario", "part", "degree", "multiplicity", "vertices"},
                      decomposition);
            write_csv(dir / "flatnorm_checks.csv", report_header(), check_rows(rows));
            write_timings(dir, rows);
            return summarize(rows, opts);
        }
        auto parts = run_parallel<ConvergeOutput>(scenarios, workers, [&](const ScenarioConfig& s) {
            detail::log(opts, 1, "converge " + s.name);
            return run_converge(s, opts);
        });
        std::vector<ReportRow> rows;
        std::vector<std::vector<std::string>> table;
        for (const auto& p : parts) {
            rows.insert(rows.end(), p.checks.begin(), p.checks.end());
            for (const auto& r : p.table)
                table.push_back({r.scenario, r.study, r.parameter, format_number(r.x), format_number(r.value),
                                 format_number(r.error), std::isnan(r.order) ? "" : format_number(r.order)});
        }
        write_csv(dir / "converge.csv", {"scenario", "study", "parameter", "x", "value", "error", "order"}, table);
        write_csv(dir / "converge_checks.csv", report_header(), check_rows(rows));
        write_timings(dir, rows);
        return summarize(rows, opts);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
