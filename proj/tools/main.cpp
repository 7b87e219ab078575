// Command-line front end: computes delay / peak-age violation tables,
// blocklength sweeps, throughput optimizations, and Monte Carlo runs, and
// emits versioned CSV or JSON. Every command is deterministic given its
// full flag set (seed included).

#include <algorithm>
#include <clocale>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "shortpkt/analysis.hpp"
#include "shortpkt/channel.hpp"
#include "shortpkt/optimizer.hpp"
#include "shortpkt/pgf.hpp"
#include "shortpkt/simulator.hpp"

namespace {

using shortpkt::Regime;
using shortpkt::UnitLabel;

struct Cell {
    enum Kind { Num, Int, Text, Null } kind = Null;
    double num = 0.0;
    long long i = 0;
    std::string text;
};

Cell num_cell(double v) { return {Cell::Num, v, 0, {}}; }
Cell int_cell(long long v) { return {Cell::Int, 0.0, v, {}}; }
Cell text_cell(std::string s) { return {Cell::Text, 0.0, 0, std::move(s)}; }
Cell null_cell() { return {}; }

struct Table {
    std::string command;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    std::vector<std::string> trailers; // extra "# key=value" comment lines
};

// Probabilities and rates: scientific, 9 significant digits.
std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.8e", v);
    return buf;
}

void write_csv(std::ostream& os, const Table& t) {
    os << "# schema_version=1\n";
    for (size_t c = 0; c < t.columns.size(); ++c)
        os << t.columns[c] << (c + 1 < t.columns.size() ? "," : "\n");
    for (const auto& row : t.rows) {
        for (size_t c = 0; c < row.size(); ++c) {
            const Cell& cell = row[c];
            switch (cell.kind) {
            case Cell::Num: os << fmt_num(cell.num); break;
            case Cell::Int: os << cell.i; break;
            case Cell::Text: os << cell.text; break;
            case Cell::Null: os << "NA"; break;
            }
            os << (c + 1 < row.size() ? "," : "\n");
        }
    }
    for (const auto& line : t.trailers) os << "# " << line << "\n";
}

void write_json(std::ostream& os, const Table& t) {
    nlohmann::ordered_json doc;
    doc["schema_version"] = 1;
    doc["command"] = t.command;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : t.rows) {
        nlohmann::ordered_json obj;
        for (size_t c = 0; c < row.size(); ++c) {
            const Cell& cell = row[c];
            switch (cell.kind) {
            case Cell::Num: obj[t.columns[c]] = cell.num; break;
            case Cell::Int: obj[t.columns[c]] = cell.i; break;
            case Cell::Text: obj[t.columns[c]] = cell.text; break;
            case Cell::Null: obj[t.columns[c]] = nullptr; break;
            }
        }
        rows.push_back(std::move(obj));
    }
    doc["rows"] = std::move(rows);
    for (const auto& line : t.trailers) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) doc[line.substr(0, eq)] = line.substr(eq + 1);
    }
    os << doc.dump(2) << "\n";
}

void emit(const Table& t, const std::string& format, const std::string& out_path) {
    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path, std::ios::binary);
        if (!file) throw shortpkt::ParameterError("cannot open output file: " + out_path);
        os = &file;
    }
    if (format == "json")
        write_json(*os, t);
    else
        write_csv(*os, t);
}

// Flags shared by the single-tuple commands.
struct TupleOpts {
    double snr_db = 5.0;
    int k = 100;
    int n = 0;
    double lambda = 0.0;
    double epsilon = -1.0; // < 0: derive from the channel
    std::string regime = "sync";
    std::string format = "csv";
    std::string out;
    std::string precision = "extended";
};

void add_channel_flags(CLI::App* cmd, TupleOpts& o, bool need_lambda = true) {
    cmd->add_option("--snr-db", o.snr_db, "SNR in dB (real AWGN)")
        ->capture_default_str();
    cmd->add_option("--k", o.k, "payload size in bits")->capture_default_str();
    cmd->add_option("--n", o.n, "blocklength in channel uses")->required();
    auto* lam = cmd->add_option("--lambda", o.lambda,
                                "arrival probability per channel use");
    if (need_lambda) lam->required();
    cmd->add_option("--epsilon", o.epsilon,
                    "override the channel-derived packet error probability");
    cmd->add_option("--regime", o.regime, "frame alignment of arrivals")
        ->check(CLI::IsMember({"sync", "async"}))
        ->capture_default_str();
}

void add_output_flags(CLI::App* cmd, TupleOpts& o) {
    cmd->add_option("--format", o.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    cmd->add_option("--out", o.out, "output path (default stdout)");
}

void add_precision_flag(CLI::App* cmd, TupleOpts& o) {
    cmd->add_option("--precision", o.precision,
                    "series inversion arithmetic for exact columns")
        ->check(CLI::IsMember({"double", "extended"}))
        ->capture_default_str();
}

double resolve_epsilon(const TupleOpts& o) {
    if (o.epsilon >= 0.0) return o.epsilon;
    return shortpkt::error_probability(
        {shortpkt::db_to_linear(o.snr_db), o.k, o.n});
}

Regime parse_regime(const std::string& s) {
    return s == "async" ? Regime::FrameAsync : Regime::FrameSync;
}

shortpkt::Precision parse_precision(const std::string& s) {
    return s == "double" ? shortpkt::Precision::Double
                         : shortpkt::Precision::Extended;
}

// pdv and age share this: exact / saddlepoint / netcalc cells for one
// threshold, honoring an optional --method restriction. With no --method,
// inapplicable cells (netcalc in async, saddlepoint at/below the mean)
// come out NA; with an explicit --method they are hard errors.
struct MethodSelection {
    bool exact = true;
    bool saddle = true;
    bool netcalc = true;
    bool explicit_choice = false;
};

MethodSelection parse_method(const std::string& m) {
    if (m.empty()) return {};
    MethodSelection s{false, false, false, true};
    if (m == "exact") s.exact = true;
    if (m == "saddlepoint") s.saddle = true;
    if (m == "netcalc") s.netcalc = true;
    return s;
}

int max_threshold(const std::vector<double>& thresholds, UnitLabel unit, int n) {
    int d_max = 1;
    for (double t : thresholds)
        d_max = std::max(d_max, shortpkt::threshold_in_units(t, unit, n));
    return d_max;
}

int run_pdv(const TupleOpts& o, const std::vector<double>& d0s,
            const std::string& method) {
    const Regime regime = parse_regime(o.regime);
    const double eps = resolve_epsilon(o);
    shortpkt::SystemParams params(o.lambda, o.n, eps, regime);
    const UnitLabel unit =
        regime == Regime::FrameSync ? UnitLabel::Frames : UnitLabel::ChannelUses;
    shortpkt::RationalPgf pgf = regime == Regime::FrameSync
                                    ? shortpkt::delay_pgf_sync(params)
                                    : shortpkt::delay_pgf_async(params);
    const MethodSelection sel = parse_method(method);

    std::optional<shortpkt::TailSeries> tail;
    if (sel.exact)
        tail = shortpkt::tail_series(pgf, max_threshold(d0s, unit, o.n),
                                     parse_precision(o.precision));

    Table t;
    t.command = "pdv";
    t.columns = {"d0_cu", "d_frames", "pdv_exact", "pdv_saddlepoint", "pdv_netcalc"};
    for (double d0 : d0s) {
        const int d = shortpkt::threshold_in_units(d0, unit, o.n);
        std::vector<Cell> row{num_cell(d0), int_cell(d), null_cell(), null_cell(),
                              null_cell()};
        if (sel.exact) row[2] = num_cell(tail->at(d));
        if (sel.saddle) {
            try {
                row[3] = num_cell(shortpkt::saddlepoint_tail(pgf, d).first);
            } catch (const shortpkt::BelowMeanError&) {
                if (sel.explicit_choice) throw;
            }
        }
        if (sel.netcalc) {
            if (regime == Regime::FrameSync) {
                row[4] = num_cell(shortpkt::netcalc_bound(params, d));
            } else if (sel.explicit_choice) {
                throw shortpkt::ParameterError(
                    "netcalc bound is defined for the frame-synchronous regime only");
            }
        }
        t.rows.push_back(std::move(row));
    }
    emit(t, o.format, o.out);
    return 0;
}

int run_age(const TupleOpts& o, const std::vector<double>& a0s,
            const std::string& method) {
    const Regime regime = parse_regime(o.regime);
    const double eps = resolve_epsilon(o);
    shortpkt::SystemParams params(o.lambda, o.n, eps, regime);
    const UnitLabel unit =
        regime == Regime::FrameSync ? UnitLabel::Frames : UnitLabel::ChannelUses;
    shortpkt::RationalPgf pgf = regime == Regime::FrameSync
                                    ? shortpkt::peak_age_pgf_sync(params)
                                    : shortpkt::peak_age_pgf_async(params);
    MethodSelection sel = parse_method(method);
    if (sel.explicit_choice && sel.netcalc)
        throw shortpkt::ParameterError(
            "netcalc bound applies to delay violation, not peak age");

    std::optional<shortpkt::TailSeries> tail;
    if (sel.exact)
        tail = shortpkt::tail_series(pgf, max_threshold(a0s, unit, o.n),
                                     parse_precision(o.precision));

    Table t;
    t.command = "age";
    t.columns = {"a0_cu", "a_units", "age_viol_exact", "age_viol_saddlepoint"};
    for (double a0 : a0s) {
        const int a = shortpkt::threshold_in_units(a0, unit, o.n);
        std::vector<Cell> row{num_cell(a0), int_cell(a), null_cell(), null_cell()};
        if (sel.exact) row[2] = num_cell(tail->at(a));
        if (sel.saddle) {
            try {
                row[3] = num_cell(shortpkt::saddlepoint_tail(pgf, a).first);
            } catch (const shortpkt::BelowMeanError&) {
                if (sel.explicit_choice) throw;
            }
        }
        t.rows.push_back(std::move(row));
    }
    emit(t, o.format, o.out);
    return 0;
}

int run_sweep(const TupleOpts& o, int n_min, int n_max, double d0) {
    const double rho = shortpkt::db_to_linear(o.snr_db);
    shortpkt::SweepResult res =
        shortpkt::blocklength_sweep(rho, o.k, n_min, n_max, o.lambda, d0);
    Table t;
    t.command = "sweep";
    t.columns = {"n", "epsilon", "d_frames", "pdv_exact"};
    for (const auto& row : res.rows)
        t.rows.push_back({int_cell(row.n), num_cell(row.epsilon), int_cell(row.d),
                          num_cell(row.pdv)});
    t.trailers.push_back("argmin_n=" + std::to_string(res.argmin_n));
    emit(t, o.format, o.out);
    return 0;
}

int run_throughput(const TupleOpts& o, int n_min, int n_max, double d0,
                   double target, const std::string& method) {
    const double rho = shortpkt::db_to_linear(o.snr_db);
    const bool want_exact = method.empty() || method == "exact";
    const bool want_netcalc = method.empty() || method == "netcalc";

    std::vector<shortpkt::ThroughputPoint> exact, netcalc;
    if (want_exact)
        exact = shortpkt::throughput_vs_blocklength(rho, o.k, n_min, n_max, d0,
                                                    target,
                                                    shortpkt::Method::ExactInversion);
    if (want_netcalc)
        netcalc = shortpkt::throughput_vs_blocklength(rho, o.k, n_min, n_max, d0,
                                                      target,
                                                      shortpkt::Method::NetcalcBound);

    Table t;
    t.command = "throughput";
    t.columns = {"n",
                 "epsilon",
                 "lambda_star_exact",
                 "throughput_exact",
                 "lambda_star_netcalc",
                 "throughput_netcalc"};
    const size_t rows = std::max(exact.size(), netcalc.size());
    for (size_t i = 0; i < rows; ++i) {
        const auto& ref = want_exact ? exact[i] : netcalc[i];
        std::vector<Cell> row{int_cell(ref.n), num_cell(ref.epsilon), null_cell(),
                              null_cell(), null_cell(), null_cell()};
        if (want_exact) {
            row[2] = num_cell(exact[i].lambda_star);
            row[3] = num_cell(exact[i].throughput);
        }
        if (want_netcalc) {
            row[4] = num_cell(netcalc[i].lambda_star);
            row[5] = num_cell(netcalc[i].throughput);
        }
        t.rows.push_back(std::move(row));
    }
    emit(t, o.format, o.out);
    return 0;
}

struct SimOpts {
    std::uint64_t horizon = 100'000'000;
    std::uint64_t warmup = UINT64_MAX;
    std::uint64_t seed = 1;
    int replicas = 1;
};

void add_sim_flags(CLI::App* cmd, SimOpts& s) {
    cmd->add_option("--horizon", s.horizon, "simulated channel uses")
        ->capture_default_str();
    cmd->add_option("--warmup", s.warmup,
                    "channel uses discarded before recording (default horizon/10)");
    cmd->add_option("--seed", s.seed, "RNG seed")->capture_default_str();
    cmd->add_option("--replicas", s.replicas, "independent replicas to merge")
        ->capture_default_str();
}

shortpkt::SimStats run_simulation(const SimOpts& s, shortpkt::SystemParams params) {
    shortpkt::SimConfig cfg{params, s.horizon, s.warmup, s.seed, s.replicas};
    return shortpkt::simulate(cfg);
}

int run_simulate(const TupleOpts& o, const SimOpts& s) {
    const Regime regime = parse_regime(o.regime);
    const double eps = resolve_epsilon(o);
    shortpkt::SystemParams params(o.lambda, o.n, eps, regime);
    shortpkt::SimStats st = run_simulation(s, params);

    const std::uint64_t warmup = s.warmup == UINT64_MAX ? s.horizon / 10 : s.warmup;
    Table t;
    t.command = "simulate";
    t.columns = {"regime",          "n",
                 "epsilon",         "lambda",
                 "horizon_cu",      "warmup_cu",
                 "seed",            "replicas",
                 "bulks_observed",  "age_samples",
                 "age_bound_violations",
                 "mean_delay",      "mean_delay_stderr",
                 "mean_peak_age",   "mean_peak_age_stderr",
                 "occupancy_time_avg", "arrival_rate"};
    t.rows.push_back({text_cell(o.regime), int_cell(o.n), num_cell(eps),
                      num_cell(o.lambda), int_cell(static_cast<long long>(s.horizon)),
                      int_cell(static_cast<long long>(warmup)),
                      int_cell(static_cast<long long>(s.seed)), int_cell(s.replicas),
                      int_cell(static_cast<long long>(st.bulks_observed)),
                      int_cell(static_cast<long long>(st.age_samples)),
                      int_cell(static_cast<long long>(st.age_bound_violations)),
                      num_cell(st.mean_delay), num_cell(st.mean_delay_stderr),
                      num_cell(st.mean_peak_age), num_cell(st.mean_peak_age_stderr),
                      num_cell(st.occupancy_time_avg), num_cell(st.arrival_rate)});
    emit(t, o.format, o.out);
    return 0;
}

int run_compare(const TupleOpts& o, const std::vector<double>& d0s, const SimOpts& s) {
    const Regime regime = parse_regime(o.regime);
    const double eps = resolve_epsilon(o);
    shortpkt::SystemParams params(o.lambda, o.n, eps, regime);
    const UnitLabel unit =
        regime == Regime::FrameSync ? UnitLabel::Frames : UnitLabel::ChannelUses;
    shortpkt::RationalPgf pgf = regime == Regime::FrameSync
                                    ? shortpkt::delay_pgf_sync(params)
                                    : shortpkt::delay_pgf_async(params);
    shortpkt::TailSeries tail = shortpkt::tail_series(
        pgf, max_threshold(d0s, unit, o.n), parse_precision(o.precision));
    shortpkt::SimStats st = run_simulation(s, params);

    Table t;
    t.command = "compare";
    t.columns = {"d0_cu",        "d_units",     "pdv_exact", "pdv_saddlepoint",
                 "pdv_netcalc",  "pdv_sim",     "pdv_sim_stderr"};
    for (double d0 : d0s) {
        const int d = shortpkt::threshold_in_units(d0, unit, o.n);
        std::vector<Cell> row{num_cell(d0),  int_cell(d),  num_cell(tail.at(d)),
                              null_cell(),   null_cell(),  null_cell(),
                              null_cell()};
        try {
            row[3] = num_cell(shortpkt::saddlepoint_tail(pgf, d).first);
        } catch (const shortpkt::BelowMeanError&) {
        }
        if (regime == Regime::FrameSync)
            row[4] = num_cell(shortpkt::netcalc_bound(params, d));
        if (d <= st.delay_ccdf.d_max()) {
            row[5] = num_cell(st.delay_ccdf.at(d));
            row[6] = num_cell(st.delay_stderr[static_cast<size_t>(d) - 1]);
        } else {
            row[5] = num_cell(0.0);
            row[6] = num_cell(0.0);
        }
        t.rows.push_back(std::move(row));
    }
    emit(t, o.format, o.out);
    return 0;
}

// CLI11 only processes a config option on the root app, so the per-command
// flat key=value file is expanded here into --key=value tokens spliced in
// after the subcommand name. Keys the command line already names are
// dropped, which is what lets explicit flags override the file.
std::vector<std::string> expand_config(int argc, char** argv) {
    static const char* kCommands[] = {"pdv",        "age",      "sweep",
                                      "throughput", "simulate", "compare"};
    std::vector<std::string> args(argv + 1, argv + argc);
    size_t sub_at = args.size();
    for (size_t i = 0; i < args.size() && sub_at == args.size(); ++i)
        for (const char* c : kCommands)
            if (args[i] == c) sub_at = i;
    if (sub_at == args.size()) return args;

    std::string path;
    std::vector<std::string> given;
    for (size_t i = sub_at + 1; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a.rfind("--", 0) != 0) continue;
        const std::string name = a.substr(0, a.find('='));
        given.push_back(name);
        if (name == "--config")
            path = a.find('=') != std::string::npos
                       ? a.substr(a.find('=') + 1)
                       : (i + 1 < args.size() ? args[i + 1] : "");
    }
    if (path.empty()) return args;

    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    const auto trim = [](const std::string& s) {
        const size_t b = s.find_first_not_of(" \t\r");
        const size_t e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::vector<std::string> injected;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[')
            continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected key=value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (val.size() >= 2 && (val.front() == '"' || val.front() == '\'') &&
            val.back() == val.front())
            val = val.substr(1, val.size() - 2);
        std::replace(key.begin(), key.end(), '_', '-');
        const std::string flag = "--" + key;
        if (std::find(given.begin(), given.end(), flag) == given.end())
            injected.push_back(flag + "=" + val);
    }
    args.insert(args.begin() + sub_at + 1, injected.begin(), injected.end());
    return args;
}

} // namespace

int main(int argc, char** argv) {
    std::setlocale(LC_ALL, "C");
    CLI::App app{"short-packet ARQ queue: delay / peak-age violation analysis"};
    app.require_subcommand(1);

    TupleOpts o;
    SimOpts sim;
    std::vector<double> d0s, a0s;
    std::string method, config_path;
    int n_min = 0, n_max = 0;
    double d0_single = 0.0, target = 0.0;

    auto* pdv = app.add_subcommand(
        "pdv", "delay violation probability at thresholds d0 (channel uses)");
    add_channel_flags(pdv, o);
    pdv->add_option("--d0", d0s, "latency budgets in channel uses")
        ->required()
        ->delimiter(',');
    pdv->add_option("--method", method, "restrict to one method")
        ->check(CLI::IsMember({"exact", "saddlepoint", "netcalc"}));
    add_precision_flag(pdv, o);
    add_output_flags(pdv, o);
    pdv->add_option("--config", config_path,
                    "flat key=value config file; flags override");

    auto* age = app.add_subcommand(
        "age", "peak-age violation probability at thresholds a0 (channel uses)");
    add_channel_flags(age, o);
    age->add_option("--a0", a0s, "age budgets in channel uses")
        ->required()
        ->delimiter(',');
    age->add_option("--method", method, "restrict to one method")
        ->check(CLI::IsMember({"exact", "saddlepoint", "netcalc"}));
    add_precision_flag(age, o);
    add_output_flags(age, o);
    age->add_option("--config", config_path,
                    "flat key=value config file; flags override");

    auto* sweep = app.add_subcommand(
        "sweep", "delay violation vs blocklength (frame-sync, exact inversion)");
    add_channel_flags(sweep, o);
    sweep->get_option("--n")->required(false); // range flags replace it
    sweep->add_option("--n-min", n_min, "smallest blocklength")->required();
    sweep->add_option("--n-max", n_max, "largest blocklength")->required();
    sweep->add_option("--d0", d0_single, "latency budget in channel uses")->required();
    add_output_flags(sweep, o);
    sweep->add_option("--config", config_path,
                    "flat key=value config file; flags override");

    auto* thr = app.add_subcommand(
        "throughput", "max stable throughput vs blocklength (frame-sync)");
    add_channel_flags(thr, o, /*need_lambda=*/false);
    thr->get_option("--n")->required(false);
    thr->add_option("--n-min", n_min, "smallest blocklength")->required();
    thr->add_option("--n-max", n_max, "largest blocklength")->required();
    thr->add_option("--d0", d0_single, "latency budget in channel uses")->required();
    thr->add_option("--target", target, "delay violation target")->required();
    thr->add_option("--method", method, "restrict to one optimizer method")
        ->check(CLI::IsMember({"exact", "netcalc"}));
    add_output_flags(thr, o);
    thr->add_option("--config", config_path,
                    "flat key=value config file; flags override");

    auto* simc = app.add_subcommand("simulate", "Monte Carlo of the queue");
    add_channel_flags(simc, o);
    add_sim_flags(simc, sim);
    add_output_flags(simc, o);
    simc->add_option("--config", config_path,
                    "flat key=value config file; flags override");

    auto* cmp = app.add_subcommand(
        "compare", "exact vs saddlepoint vs netcalc vs simulation at thresholds d0");
    add_channel_flags(cmp, o);
    cmp->add_option("--d0", d0s, "latency budgets in channel uses")
        ->required()
        ->delimiter(',');
    add_sim_flags(cmp, sim);
    add_precision_flag(cmp, o);
    add_output_flags(cmp, o);
    cmp->add_option("--config", config_path,
                    "flat key=value config file; flags override");

    std::vector<std::string> args;
    try {
        args = expand_config(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::reverse(args.begin(), args.end()); // App::parse consumes back-to-front
    try {
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (pdv->parsed()) return run_pdv(o, d0s, method);
        if (age->parsed()) return run_age(o, a0s, method);
        if (sweep->parsed()) return run_sweep(o, n_min, n_max, d0_single);
        if (thr->parsed()) return run_throughput(o, n_min, n_max, d0_single, target, method);
        if (simc->parsed()) return run_simulate(o, sim);
        if (cmp->parsed()) return run_compare(o, d0s, sim);
    } catch (const shortpkt::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
