#pragma once

#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mlab/error.hpp"
#include "mlab/io/format.hpp"
#include "mlab/io/runner.hpp"

namespace mlab::io {

enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitResource = 3, kExitInternal = 4 };

/// 2 usage, 3 resource, 4 internal consistency.
inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ArgumentError*>(&e) || dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const RangeError*>(&e))
        return kExitUsage;
    if (dynamic_cast<const ResourceError*>(&e) || dynamic_cast<const PrecisionError*>(&e) || dynamic_cast<const InconclusiveError*>(&e))
        return kExitResource;
    return kExitInternal;
}

inline std::vector<json> read_jsonl(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw ArgumentError("cannot read reports file '" + path + "'");
    std::vector<json> out;
    std::string line;
    while (std::getline(f, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw ArgumentError("bad JSON line in '" + path + "': " + e.what());
        }
    }
    return out;
}

inline std::vector<std::string> split_fields(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty())
            out.push_back(item);
    return out;
}

inline int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"moebius_lab: Mobius-weighted averages, equidistribution and orbit experiments"};
    app.set_version_flag("--version", std::string(MLAB_VERSION));
    app.require_subcommand(1);
    // "-h" stays free: several subcommands take a window length --h.
    app.set_help_flag("--help", "print help and exit");

    unsigned workers = 1;
    std::string cache_dir, out_dir;
    std::uint64_t seed = 1;
    bool want_json = false, want_csv = false;
    auto* opt_workers = app.add_option("--workers", workers, "worker threads (outputs do not depend on this)");
    app.add_option("--cache-dir", cache_dir, "table cache directory (MLAB_CACHE overrides)");
    auto* opt_out = app.add_option("--out", out_dir, "write <subcommand>.jsonl, .csv and manifest.json here");
    auto* opt_seed = app.add_option("--seed", seed, "seed for sampled modes");
    app.add_flag("--json", want_json, "print JSON lines");
    app.add_flag("--csv", want_csv, "print CSV");

    std::map<std::string, std::map<std::string, std::string>> values;
    std::map<std::string, std::map<std::string, CLI::Option*>> options;
    std::map<std::string, CLI::App*> subs;
    for (const auto& cmd : commands()) {
        auto* sub = app.add_subcommand(cmd.name, cmd.help);
        sub->set_help_flag("--help", "print help and exit");
        sub->fallthrough();
        subs[cmd.name] = sub;
        for (const auto& p : cmd.params) {
            std::string help = p.help;
            if (p.fallback.is_null())
                help += " (required)";
            else
                help += " [default " + (p.fallback.is_string() ? p.fallback.get<std::string>() : p.fallback.dump()) + "]";
            options[cmd.name][p.name] = sub->add_option("--" + p.name, values[cmd.name][p.name], help);
        }
    }
    std::string config_path;
    auto* run = app.add_subcommand("run", "run an experiment config file");
    run->fallthrough();
    run->add_option("--config", config_path, "config JSON")->required();
    std::string plot_input, plot_x, plot_y;
    auto* plot = app.add_subcommand("plot", "plot-ready CSV from a JSON-lines report file");
    plot->fallthrough();
    plot->add_option("--input", plot_input, "reports (.jsonl)")->required();
    plot->add_option("--x", plot_x, "x field")->required();
    plot->add_option("--y", plot_y, "y fields, comma separated")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        app.exit(e, out, err);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUsage;
    }

    try {
        if (plot->parsed()) {
            out << emit_plot_data(read_jsonl(plot_input), plot_x, split_fields(plot_y));
            return kExitOk;
        }
        ExperimentConfig cfg;
        if (run->parsed()) {
            cfg = load_config(config_path);
            if (opt_workers->count())
                cfg.workers = workers;
            if (opt_out->count())
                cfg.output = out_dir;
            if (opt_seed->count())
                cfg.seed = seed;
            if (!cache_dir.empty())
                cfg.cache_dir = cache_dir;
        } else {
            for (const auto& [name, sub] : subs) {
                if (!sub->parsed())
                    continue;
                cfg.subcommand = name;
                for (const auto& [pname, opt] : options[name])
                    if (opt->count())
                        cfg.params[pname] = values[name][pname];
            }
            cfg.workers = workers;
            cfg.cache_dir = cache_dir;
            cfg.output = out_dir;
            cfg.seed = seed;
        }
        auto res = run_experiment(cfg);
        if (want_json || !want_csv)
            out << jsonl(res.output.reports);
        if (want_csv)
            out << res.output.csv;
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

} // namespace mlab::io
