#pragma once

// Batch front end. Every command renders into a buffer first so that a
// failing run writes nothing to the CSV destination.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif
#include <fmt/format.h>

#include "ubbplan/ecc.hpp"
#include "ubbplan/scenario.hpp"
#include "ubbplan/services.hpp"
#include "ubbplan/throughput.hpp"
#include "ubbplan/topology.hpp"
#include "ubbplan/zipf.hpp"

namespace ubbplan::cli {

inline constexpr std::string_view kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kValidation = 2, kInfeasible = 3, kInternal = 4 };

enum class Precision { table, full };

/// LTE radio-link bandwidth utilization reference values (large TCP downlink flows).
inline constexpr double kReferenceMeanUtilization = 0.346;
inline constexpr double kReferenceMedianUtilization = 0.198;

namespace detail {

inline std::string metadata_line(std::string_view command, std::optional<std::uint64_t> scenario_hash) {
    return fmt::format("# ubbplan {} version={} scenario={}\n", command, kVersion,
                       scenario_hash ? fmt::format("{:016x}", *scenario_hash) : std::string{"none"});
}

/// Shortest fixed rendering with at least `min_decimals` that reads back exactly.
inline std::string grid_label(double v, int min_decimals) {
    for (int d = min_decimals; d < 12; ++d) {
        auto s = fmt::format("{:.{}f}", v, d);
        if (std::stod(s) == v)
            return s;
    }
    return fmt::format("{}", v);
}

inline std::string rate(BitRate r, Precision p) {
    return p == Precision::full ? fmt::format("{:.17g}", r.bits_per_second()) : fmt::format("{:.1f}", r.mbps());
}
inline std::string rate_unit(Precision p) { return p == Precision::full ? "bps" : "mbps"; }

inline std::string duration(Seconds s, Precision p) {
    return p == Precision::full ? fmt::format("{:.17g}", s.count()) : fmt::format("{:.3f}", to_ms(s));
}
inline std::string duration_unit(Precision p) { return p == Precision::full ? "s" : "ms"; }

inline std::string ratio(double v, Precision p, int decimals = 4) {
    return p == Precision::full ? fmt::format("{:.17g}", v) : fmt::format("{:.{}f}", v, decimals);
}

inline std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos)
        return std::string{s};
    std::string out{"\""};
    for (const char ch : s) {
        if (ch == '"')
            out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

} // namespace detail

// --- throughput-table -------------------------------------------------------

struct TableOptions {
    std::vector<double> rtt_ms{kReferenceRttGridMs.begin(), kReferenceRttGridMs.end()};
    std::vector<double> plr_percent{kReferencePlrGridPercent.begin(), kReferencePlrGridPercent.end()};
    std::int64_t mss_bytes = 1460;
    double c = 1.0;
    int decimals = 0;  // Mbit/s decimals in table precision
};

inline void throughput_table_csv(const TableOptions& opt, Precision precision, std::ostream& out) {
    ubbplan::detail::require(opt.mss_bytes > 0, "--mss must be > 0");
    ubbplan::detail::require(opt.decimals >= 0 && opt.decimals <= 9, "--decimals must be in [0, 9]");
    std::vector<Seconds> rtts;
    for (const double ms : opt.rtt_ms)
        rtts.push_back(from_ms(ms));
    std::vector<LossRatio> plrs;
    for (const double pct : opt.plr_percent)
        plrs.push_back(LossRatio::from_percent(pct));
    const auto table = throughput_table(rtts, plrs, Bytes{static_cast<std::uint64_t>(opt.mss_bytes)}, opt.c);

    out << detail::metadata_line("throughput-table", std::nullopt);
    out << "plr_percent\\rtt_ms";
    for (const double ms : opt.rtt_ms)
        out << ',' << detail::grid_label(ms, 1);
    out << '\n';
    for (std::size_t i = 0; i < table.size(); ++i) {
        out << detail::grid_label(opt.plr_percent[i], 2);
        for (const auto cell : table[i]) {
            out << ',';
            if (precision == Precision::full)
                out << fmt::format("{:.17g}", cell.bits_per_second());
            else
                out << fmt::format("{:.{}f}", cell.mbps(), opt.decimals);
        }
        out << '\n';
    }
}

// --- hit-ratio --------------------------------------------------------------

struct HitRatioOptions {
    double alpha = 0.8;
    std::int64_t n_items = 10000;
    double step = 0.05;
    double target = 0.5;
};

inline void hit_ratio_csv(const HitRatioOptions& opt, Precision precision, std::ostream& out) {
    ubbplan::detail::require(opt.alpha > 0.0, "--alpha must be > 0");
    ubbplan::detail::require(opt.n_items >= 1, "--n-items must be >= 1");
    ubbplan::detail::require(opt.step > 0.0 && opt.step <= 1.0, "--step must be in (0, 1]");
    ubbplan::detail::require(opt.target >= 0.0 && opt.target <= 1.0, "--target must be in [0, 1]");
    const ZipfCatalog catalog{static_cast<std::size_t>(opt.n_items), opt.alpha};
    const ZipfPrefixSums sums{catalog};

    out << detail::metadata_line("hit-ratio", std::nullopt);
    out << "cache_fraction,stored_items,hit_ratio,meets_target\n";
    const auto steps = static_cast<std::size_t>(std::floor(1.0 / opt.step + 1e-9));
    std::vector<double> fractions;
    for (std::size_t i = 0; i <= steps; ++i)
        fractions.push_back(std::min(1.0, static_cast<double>(i) * opt.step));
    if (fractions.back() < 1.0)
        fractions.push_back(1.0);
    for (const double f : fractions) {
        const auto k = std::min(catalog.n_items,
                                static_cast<std::size_t>(std::llround(f * static_cast<double>(catalog.n_items))));
        const double hr = sums.hit_ratio(k);
        out << detail::grid_label(f, 2) << ',' << k << ',' << detail::ratio(hr, precision, 6) << ','
            << (hr >= opt.target ? 1 : 0) << '\n';
    }
    const auto kmin = sums.min_items_for(opt.target);
    out << fmt::format("# summary target_hit_ratio={} min_stored_items={} min_cache_fraction={} alpha={} n_items={}\n",
                       opt.target, kmin,
                       detail::ratio(static_cast<double>(kmin) / static_cast<double>(catalog.n_items), precision, 6),
                       opt.alpha, catalog.n_items);
}

// --- scenario commands ------------------------------------------------------

inline void nsu_curve_csv(const Scenario& s, Precision precision, std::ostream& out) {
    const auto model = build_ecc_model(s);
    const auto kmax = s.ecc.equipped_count.value_or(model.order.size());
    const auto curve = speedup_curve(model.traffic, model.configs, model.order, kmax);

    std::unordered_map<NodeId, const NodeEccConfig*> cfg_by_id;
    for (const auto& c : model.configs)
        cfg_by_id.emplace(c.node_id, &c);

    out << detail::metadata_line("nsu-curve", s.content_hash);
    out << "equipped_count,node_id,node_speedup,network_speedup\n";
    for (const auto& pt : curve.points) {
        if (pt.equipped_count == 0) {
            out << "0,,," << detail::ratio(pt.network_speedup, precision, 6) << '\n';
            continue;
        }
        const auto id = model.order[pt.equipped_count - 1];
        out << pt.equipped_count << ',' << id << ',' << detail::ratio(node_speedup(*cfg_by_id.at(id)), precision, 6)
            << ',' << detail::ratio(pt.network_speedup, precision, 6) << '\n';
    }
    out << fmt::format("# summary endpoint_equipped={} endpoint_nsu={}", curve.points.back().equipped_count,
                       detail::ratio(curve.points.back().network_speedup, precision, 9));
    if (model.calibrated_ratio)
        out << fmt::format(" calibrated_rtt_ratio={} hit_ratio={} target_nsu={}",
                           detail::ratio(*model.calibrated_ratio, precision, 9),
                           detail::ratio(model.hit_ratio, precision, 9), *s.ecc.target_nsu);
    out << " order=" << to_string(s.ecc.order);
    if (!model.greedy.empty())
        out << " greedy_order_differs=" << (model.greedy != model.order ? "true" : "false");
    out << '\n';
}

inline void trap_report_csv(const Scenario& s, Precision precision, std::ostream& out) {
    ubbplan::detail::require(!s.paths.empty(), "trap-report: scenario defines no paths");
    const auto ru = detail::rate_unit(precision);
    out << detail::metadata_line("trap-report", s.content_hash);
    out << "path,bit_rate_" << ru << ",flows,required_" << ru
        << ",headroom,trapped,waste_band,utilization,throughput_estimate_" << ru << "\n";
    for (const auto& p : s.paths) {
        const std::vector<PathMetrics> flows(p.flows, p.metrics);
        const auto trap = ubb_trap_headroom(p.metrics.bit_rate, flows, s.trap_threshold);
        const auto est = mathis_throughput(p.metrics);
        out << detail::csv_field(p.name) << ',' << detail::rate(p.metrics.bit_rate, precision) << ',' << p.flows << ','
            << detail::rate(trap.required_rate, precision) << ',' << detail::ratio(trap.headroom, precision) << ','
            << (trap.trapped ? "true" : "false") << ',' << to_string(trap.band) << ','
            << detail::ratio(est.utilization, precision) << ',' << detail::rate(est.throughput, precision) << '\n';
    }
    out << fmt::format("# summary trap_threshold={} reference_lte_mean_utilization={:.1f}% "
                       "reference_lte_median_utilization={:.1f}%\n",
                       s.trap_threshold, kReferenceMeanUtilization * 100.0, kReferenceMedianUtilization * 100.0);
}

inline void catalog_csv(const std::vector<ServiceProfile>& catalog, std::ostream& out) {
    out << detail::metadata_line("feasibility --dump-catalog", std::nullopt);
    out << "name,throughput_mbps,live,max_rtt_ms,notes\n";
    for (const auto& s : catalog) {
        std::string tp = detail::grid_label(s.required_throughput.mbps(), 1);
        if (s.range_min)
            tp = detail::grid_label(s.range_min->mbps(), 1) + "-" + tp;
        out << s.name << ',' << tp << ',' << (s.live ? "true" : "false") << ','
            << (s.max_rtt ? detail::grid_label(to_ms(*s.max_rtt), 1) : std::string{}) << ',' << s.notes << '\n';
    }
}

inline void feasibility_csv(const Scenario& s, const std::vector<ServiceProfile>& catalog, Precision precision,
                            std::ostream& out, std::ostream& warn) {
    ubbplan::detail::require(!s.paths.empty(), "feasibility: scenario defines no paths");
    std::vector<ServiceRef> services = s.services;
    if (services.empty())
        for (const auto& p : catalog)
            services.push_back({p, std::nullopt});

    const auto movar = movar_requirement(s.movar.value_or(MovarParams{}));
    const auto ru = detail::rate_unit(precision);
    out << detail::metadata_line("feasibility", s.content_hash);
    out << "service,path,required_" << ru << ",throughput_estimate_" << ru << ",feasible,binding,rtt_needed_"
        << detail::duration_unit(precision) << ",movar_gross_" << ru << ",movar_net_min_" << ru << ",movar_net_max_"
        << ru << "\n";
    for (const auto& ref : services) {
        auto profile = ref.profile;
        if (ref.compression_factor) {
            if (profile.live)
                warn << "warning: service '" << profile.name
                     << "' is live; compression gives limited throughput reduction for live streaming\n";
            profile.required_throughput = compression_gain(profile.required_throughput, *ref.compression_factor);
        }
        for (const auto& p : s.paths) {
            const auto f = feasibility(profile, p.metrics);
            out << detail::csv_field(profile.name) << ',' << detail::csv_field(p.name) << ','
                << detail::rate(profile.required_throughput, precision) << ','
                << detail::rate(f.throughput_estimate, precision) << ',' << (f.feasible ? "true" : "false") << ','
                << to_string(f.binding) << ',' << detail::duration(f.rtt_needed, precision);
            if (is_movar(profile))
                out << ',' << detail::rate(movar.gross_rate, precision) << ','
                    << detail::rate(movar.net_rate_min, precision) << ','
                    << detail::rate(movar.net_rate_max, precision);
            else
                out << ",,,";
            out << '\n';
        }
    }
    out << "# movar " << movar.note << '\n';
}

// --- entry point ------------------------------------------------------------

/// Runs the command line; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Capacity planning for ultra-broadband networks: throughput bounds, access-trap "
                 "headroom, edge-cache speed-up and service feasibility.",
                 "ubbplan"};
    app.set_version_flag("--version", std::string{kVersion});
    app.require_subcommand(1);

    std::string scenario_file;
    std::string out_file = "-";
    Precision precision = Precision::table;
    const std::map<std::string, Precision> precision_names{{"table", Precision::table}, {"full", Precision::full}};
    app.add_option("--scenario", scenario_file, "Scenario file (JSON)");
    app.add_option("--out", out_file, "Output file, '-' for standard output")->capture_default_str();
    app.add_option("--precision", precision, "table: Mbit/s and ms, rounded; full: bits/s and s, 17 digits")
        ->transform(CLI::CheckedTransformer(precision_names, CLI::ignore_case));

    TableOptions table_opt;
    auto* table_cmd = app.add_subcommand("throughput-table", "Throughput bound grid over RTT and PLR");
    table_cmd->add_option("--rtt", table_opt.rtt_ms, "RTT grid in ms")->delimiter(',');
    table_cmd->add_option("--plr", table_opt.plr_percent, "PLR grid in percent")->delimiter(',');
    table_cmd->add_option("--mss", table_opt.mss_bytes, "Maximum segment size in bytes")->capture_default_str();
    table_cmd->add_option("--c", table_opt.c, "Congestion-control constant")->capture_default_str();
    table_cmd->add_option("--decimals", table_opt.decimals, "Mbit/s decimals in table precision")
        ->capture_default_str();

    auto* nsu_cmd = app.add_subcommand("nsu-curve", "Network speed-up versus number of equipped access nodes");
    auto* trap_cmd = app.add_subcommand("trap-report", "Access bit-rate headroom per access line");

    bool dump_catalog = false;
    std::string catalog_file;
    auto* feas_cmd = app.add_subcommand("feasibility", "Service by path feasibility matrix");
    feas_cmd->add_flag("--dump-catalog", dump_catalog, "Print the service catalog and exit");
    feas_cmd->add_option("--catalog", catalog_file, "Service catalog override (CSV)");

    HitRatioOptions hr_opt;
    auto* hr_cmd = app.add_subcommand("hit-ratio", "Zipf cache hit ratio versus stored fraction");
    hr_cmd->add_option("--alpha", hr_opt.alpha, "Zipf exponent")->capture_default_str();
    hr_cmd->add_option("--n-items", hr_opt.n_items, "Catalog size")->capture_default_str();
    hr_cmd->add_option("--step", hr_opt.step, "Cache fraction step")->capture_default_str();
    hr_cmd->add_option("--target", hr_opt.target, "Hit ratio to mark")->capture_default_str();

    for (auto* sub : {table_cmd, nsu_cmd, trap_cmd, feas_cmd, hr_cmd})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << '\n';
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "ubbplan: " << e.what() << "\nRun with --help for usage.\n";
        return kValidation;
    }

    std::ostringstream buffer;
    try {
        auto require_scenario = [&](std::string_view cmd) {
            if (scenario_file.empty())
                throw ValidationError(std::string{cmd} + " requires --scenario <file>");
        };
        std::vector<ServiceProfile> catalog = builtin_catalog();
        if (!catalog_file.empty()) {
            std::ifstream in{catalog_file};
            if (!in)
                throw ValidationError("cannot open catalog file '" + catalog_file + "'");
            catalog = parse_catalog(in);
        }

        if (*table_cmd) {
            throughput_table_csv(table_opt, precision, buffer);
        } else if (*hr_cmd) {
            hit_ratio_csv(hr_opt, precision, buffer);
        } else if (*nsu_cmd) {
            require_scenario("nsu-curve");
            nsu_curve_csv(load_scenario(scenario_file), precision, buffer);
        } else if (*trap_cmd) {
            require_scenario("trap-report");
            trap_report_csv(load_scenario(scenario_file), precision, buffer);
        } else if (*feas_cmd) {
            if (dump_catalog) {
                catalog_csv(catalog, buffer);
            } else {
                require_scenario("feasibility");
                feasibility_csv(load_scenario(scenario_file, catalog), catalog, precision, buffer, err);
            }
        }
    } catch (const ValidationError& e) {
        err << "ubbplan: error: " << e.what() << '\n';
        return kValidation;
    } catch (const InfeasibleError& e) {
        err << "ubbplan: infeasible: " << e.what() << '\n';
        return kInfeasible;
    } catch (const std::exception& e) {
        err << "ubbplan: internal error: " << e.what() << '\n';
        return kInternal;
    }

    if (out_file == "-") {
        out << buffer.str();
        out.flush();
    } else {
        std::ofstream f{out_file, std::ios::binary | std::ios::trunc};
        if (!f) {
            err << "ubbplan: error: cannot write '" << out_file << "'\n";
            return kValidation;
        }
        f << buffer.str();
    }
    return kOk;
}

} // namespace ubbplan::cli
