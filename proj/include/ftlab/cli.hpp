// Copyright 2026 The ftlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ftlab/distill.hpp"
#include "ftlab/recursion.hpp"
#include "ftlab/report.hpp"
#include "ftlab/sim.hpp"
#include "ftlab/steane.hpp"

namespace ftlab::cli {

using report::format_number;

/// Usage errors map to exit status 2.
class UsageError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

inline std::string trim(const std::string &s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

/// Reads a flat `key = value` document into flag tokens. Blank lines and
/// lines starting with '#' or ';' are ignored; quotes around values are dropped.
inline std::vector<std::string> read_config_tokens(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw UsageError("--config: cannot read '" + path + "'");
    std::vector<std::string> tokens;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError("--config: line " + std::to_string(lineno) + " is not 'key = value'");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front()) {
            value = value.substr(1, value.size() - 2);
        }
        if (value == "true" || value == "false") {
            if (value == "true") tokens.push_back("--" + key);
            continue;
        }
        tokens.push_back("--" + key);
        std::istringstream words(value);
        for (std::string w; words >> w;) tokens.push_back(w);
    }
    return tokens;
}

/// Splices config-file settings in front of the explicit flags, which win.
inline std::vector<std::string> expand_config(const std::vector<std::string> &args) {
    std::vector<std::string> rest;
    std::vector<std::string> from_file;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string &a = args[i];
        if (a == "--config") {
            if (i + 1 >= args.size()) throw UsageError("--config: missing file name");
            auto t = read_config_tokens(args[++i]);
            from_file.insert(from_file.end(), t.begin(), t.end());
        } else if (a.rfind("--config=", 0) == 0) {
            auto t = read_config_tokens(a.substr(9));
            from_file.insert(from_file.end(), t.begin(), t.end());
        } else {
            rest.push_back(a);
        }
    }
    if (from_file.empty() || rest.empty()) return rest;
    std::vector<std::string> out{rest.front()};
    out.insert(out.end(), from_file.begin(), from_file.end());
    out.insert(out.end(), rest.begin() + 1, rest.end());
    return out;
}

inline std::vector<double> parse_number_list(const std::string &flag, const std::string &text) {
    std::vector<double> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(trim(item), &used));
            if (used != trim(item).size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception &) {
            throw UsageError(flag + ": '" + item + "' is not a number");
        }
    }
    return out;
}

inline std::array<double, 16> read_fault_table(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw UsageError("--fault-dist: cannot read table file '" + path + "'");
    std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::replace(all.begin(), all.end(), ',', ' ');
    std::istringstream words(all);
    std::array<double, 16> t{};
    std::size_t n = 0;
    for (double v; words >> v;) {
        if (n >= 16) throw UsageError("--fault-dist: table must have exactly 16 entries");
        t[n++] = v;
    }
    if (n != 16 || !words.eof()) throw UsageError("--fault-dist: table must have exactly 16 numeric entries");
    return t;
}

struct Common {
    std::string out = "-";
    std::string format;
    std::string config;
};

inline void add_common(CLI::App *sub, Common &c) {
    sub->add_option("--out", c.out, "Output path ('-' for stdout)");
    sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--config", c.config, "Flat key = value file of flag settings");
}

inline report::Format pick_format(const Common &c, report::Format fallback) {
    return c.format.empty() ? fallback : report::parse_format(c.format);
}

inline report::Report threshold_report(double tol, int max_levels, bool with_decoding, double c0_scale) {
    recursion::ModelConstants<double> consts;
    consts.c0_scale = c0_scale;
    recursion::RecursionConfig cfg;
    cfg.bisection_tolerance = tol;
    cfg.max_levels = max_levels;
    cfg.require_bounded_decoding = with_decoding;
    auto t = recursion::find_threshold(consts, cfg);

    report::Report r;
    r.manifest.command = "threshold";
    r.manifest.parameters = {{"tol", format_number(tol)},
                             {"max-levels", std::to_string(max_levels)},
                             {"with-decoding", with_decoding ? "true" : "false"},
                             {"c0-scale", format_number(c0_scale)}};
    r.table.columns = {"iteration", "lower", "upper"};
    nlohmann::ordered_json brackets = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < t.brackets.size(); ++i) {
        r.table.add_row({std::to_string(i), format_number(t.brackets[i].first), format_number(t.brackets[i].second)});
        brackets.push_back({t.brackets[i].first, t.brackets[i].second});
    }
    r.result["lower"] = t.lower;
    r.result["upper"] = t.upper;
    r.result["estimate"] = t.estimate();
    r.result["relative_width"] = t.relative_width();
    r.result["iterations"] = t.iterations;
    r.result["brackets"] = brackets;
    return r;
}

inline report::Report iterate_report(double p, int levels, std::ostream &log = std::cerr) {
    recursion::ModelConstants<double> consts;
    consts.p = p;
    auto trace = recursion::iterate_levels(consts, levels);
    report::Report r;
    r.manifest.command = "iterate";
    r.manifest.parameters = {{"p", format_number(p)}, {"levels", std::to_string(levels)}};
    r.table.columns = {"k", "A", "a", "B", "Bp", "b", "C", "D", "b_tilde"};
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::size_t i = 1; i < trace.size(); ++i) {
        const auto &l = trace[i];
        r.table.add_row({std::to_string(l.level), format_number(l.A), format_number(l.a), format_number(l.B),
                         format_number(l.Bp), format_number(l.b), format_number(l.C), format_number(l.D),
                         format_number(l.b_tilde)});
        rows.push_back({{"k", l.level},
                        {"A", l.A},
                        {"a", l.a},
                        {"B", l.B},
                        {"Bp", l.Bp},
                        {"b", l.b},
                        {"C", l.C},
                        {"D", l.D},
                        {"b_tilde", l.b_tilde}});
    }
    r.result["levels"] = rows;
    r.result["diverged"] = static_cast<int>(trace.size()) <= levels;
    if (static_cast<int>(trace.size()) <= levels) {
        log << "iterate: recursion left [0,1] after level " << trace.size() - 1 << "\n";
    }
    return r;
}

inline report::Report simulate_report(const sim::SimConfig &cfg, const std::map<std::string, std::string> &params,
                                      std::ostream &log = std::cerr) {
    auto stats = sim::run_experiment(cfg);
    double bound = sim::analytic_bound(cfg.gadget, cfg.level, cfg.model.p);
    report::Report r;
    r.manifest.command = "simulate";
    r.manifest.parameters = params;
    r.manifest.seed = cfg.seed;
    r.table.columns = {"p", "k", "gadget", "trials", "failures", "rate", "analytic_bound"};
    r.table.add_row({format_number(cfg.model.p), std::to_string(cfg.level), sim::gadget_name(cfg.gadget),
                     std::to_string(stats.trials), std::to_string(stats.failures), format_number(stats.failure_rate()),
                     format_number(bound)});
    auto &j = r.result;
    j["gadget"] = sim::gadget_name(cfg.gadget);
    j["level"] = cfg.level;
    j["p"] = cfg.model.p;
    j["trials"] = stats.trials;
    j["accepted"] = stats.accepted;
    j["failures"] = stats.failures;
    j["rate"] = stats.failure_rate();
    j["acceptance_rate"] = stats.acceptance_rate();
    j["with_relative_error"] = stats.with_relative_error;
    j["with_two_relative_errors"] = stats.with_two_relative_errors;
    j["ancilla_attempts"] = stats.ancilla_attempts;
    j["ancilla_rejections"] = stats.ancilla_rejections;
    j["analytic_bound"] = bound;
    nlohmann::ordered_json outcomes = nlohmann::ordered_json::object();
    for (const auto &[k, v] : stats.logical_outcomes) outcomes[k] = v;
    j["logical_outcomes"] = outcomes;
    nlohmann::ordered_json hist = nlohmann::ordered_json::array();
    for (const auto &[k, v] : stats.relative_error_histogram) {
        hist.push_back({{"level", k.first}, {"count", k.second}, {"samples", v}});
    }
    j["relative_error_histogram"] = hist;
    j["retry_cap_exhausted"] = stats.retry_cap_exhausted;
    if (stats.retry_cap_exhausted) log << "simulate: ancilla retry cap exhausted; results are partial\n";
    return r;
}

inline report::Report distill_report(const distill::FidelityVector &fs, int iters, const std::string &f_text) {
    report::Report r;
    r.manifest.command = "distill";
    r.manifest.parameters = {{"f", f_text}, {"iters", std::to_string(iters)}};
    r.table.columns = {"round", "f", "p_accept", "orientation"};
    nlohmann::ordered_json rounds = nlohmann::ordered_json::array();
    distill::FidelityVector cur = fs;
    int orientation = 1;
    for (int i = 1; i <= iters; ++i) {
        auto o = distill::distill_step(cur);
        if (o.orientation_flipped) orientation = -orientation;
        r.table.add_row({std::to_string(i), format_number(o.f_out), format_number(o.p_accept),
                         std::to_string(orientation)});
        rounds.push_back({{"round", i}, {"f", o.f_out}, {"p_accept", o.p_accept}, {"orientation", orientation}});
        cur.fill(o.f_out);
    }
    r.result["rounds"] = rounds;
    return r;
}

inline report::Report decode_table_report() {
    report::Report r;
    r.manifest.command = "decode-table";
    r.table.columns = {"syndrome", "position"};
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto &row : steane::decode_table()) {
        std::string s;
        for (auto b : row.syndrome.bits) s += static_cast<char>('0' + b);
        r.table.add_row({s, std::to_string(row.position)});
        rows.push_back({{"syndrome", s}, {"position", row.position}});
    }
    r.result["table"] = rows;
    return r;
}

/// Runs one command line (without the program name). Returns the exit status:
/// 0 success, 2 usage error, 1 runtime error.
inline int dispatch(const std::vector<std::string> &argv, std::ostream &err = std::cerr) {
    CLI::App app{"Concatenated Steane code threshold, Pauli-frame simulation and magic-state distillation"};
    app.name("ftlab");
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    Common common;

    double tol = 1e-3;
    int max_levels = 60;
    bool with_decoding = false;
    double c0_scale = 1.0;
    auto *th = app.add_subcommand("threshold", "Bisect for the recursion threshold");
    th->add_option("--tol", tol, "Relative bracket width")->check(CLI::Range(1e-12, 1.0));
    th->add_option("--max-levels", max_levels, "Concatenation levels per probe")->check(CLI::Range(2, 100000));
    th->add_flag("--with-decoding", with_decoding, "Also require D_k to settle");
    th->add_option("--c0-scale", c0_scale, "C0 = c0-scale * p")->check(CLI::Range(1e-6, 1e6));
    add_common(th, common);

    double it_p = 0;
    int levels = 10;
    auto *it = app.add_subcommand("iterate", "Per-level failure and wellness parameters");
    it->add_option("--p", it_p, "CNOT fault probability")->required()->check(CLI::Range(0.0, 1.0));
    it->add_option("--levels", levels, "Number of levels")->check(CLI::Range(1, 100000));
    add_common(it, common);

    std::string gadget;
    int sim_level = 1;
    double sim_p = 0;
    std::uint64_t trials = 1;
    std::uint64_t seed = 0;
    std::vector<std::string> fault_dist{"np15"};
    unsigned threads = 1;
    std::string basis = "zero";
    bool no_hist = false;
    auto *sm = app.add_subcommand("simulate", "Monte Carlo of one gadget");
    sm->add_option("--gadget", gadget, "ancilla|ec|cnot|decode")
        ->required()
        ->check(CLI::IsMember({"ancilla", "ec", "cnot", "decode"}));
    sm->add_option("--level", sim_level, "Concatenation level")->required()->check(CLI::Range(1, 4));
    sm->add_option("--p", sim_p, "CNOT fault probability")->required()->check(CLI::Range(0.0, 1.0));
    sm->add_option("--trials", trials, "Number of trials")->required()->check(CLI::Range(std::uint64_t{1}, UINT64_MAX));
    sm->add_option("--seed", seed, "Base seed");
    sm->add_option("--fault-dist", fault_dist, "np15 | u16 | table FILE")->expected(1, 2);
    sm->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 1024u));
    sm->add_option("--basis", basis, "Ancilla basis for --gadget ancilla")->check(CLI::IsMember({"zero", "plus"}));
    sm->add_flag("--no-histograms", no_hist, "Skip relative-error histograms");
    add_common(sm, common);

    std::string f_text;
    int iters = 1;
    auto *ds = app.add_subcommand("distill", "Iterate five-qubit-code distillation");
    ds->add_option("--f", f_text, "One fidelity or five comma-separated fidelities")->required();
    ds->add_option("--iters", iters, "Rounds")->check(CLI::Range(0, 100000));
    add_common(ds, common);

    auto *dt = app.add_subcommand("decode-table", "Syndrome to position lookup");
    add_common(dt, common);

    try {
        std::vector<std::string> args = expand_config(argv);
        std::reverse(args.begin(), args.end());
        app.parse(args);

        report::Report rep;
        report::Format fmt = report::Format::Csv;
        if (*th) {
            rep = threshold_report(tol, max_levels, with_decoding, c0_scale);
            fmt = pick_format(common, report::Format::Json);
        } else if (*it) {
            rep = iterate_report(it_p, levels, err);
            fmt = pick_format(common, report::Format::Csv);
        } else if (*sm) {
            sim::SimConfig cfg;
            cfg.gadget = sim::parse_gadget(gadget);
            cfg.level = sim_level;
            cfg.model.p = sim_p;
            cfg.trials = trials;
            cfg.seed = seed;
            cfg.model.seed = seed;
            cfg.threads = threads;
            cfg.record_histograms = !no_hist;
            cfg.ancilla_basis = basis == "plus" ? sim::AncillaBasis::Plus : sim::AncillaBasis::Zero;
            std::string dist_text = fault_dist.front();
            if (fault_dist[0] == "np15") {
                cfg.model.distribution = FaultDistribution::UniformNontrivial15;
            } else if (fault_dist[0] == "u16") {
                cfg.model.distribution = FaultDistribution::Uniform16;
            } else if (fault_dist[0] == "table") {
                if (fault_dist.size() != 2) throw UsageError("--fault-dist: 'table' needs a FILE argument");
                cfg.model.distribution = FaultDistribution::Table;
                cfg.model.table = read_fault_table(fault_dist[1]);
                dist_text += " " + fault_dist[1];
            } else {
                throw UsageError("--fault-dist: expected np15, u16 or table FILE");
            }
            if (fault_dist[0] != "table" && fault_dist.size() != 1) {
                throw UsageError("--fault-dist: only 'table' takes a FILE argument");
            }
            try {
                cfg.validate();
            } catch (const std::invalid_argument &e) {
                throw UsageError(std::string("--fault-dist: ") + e.what());
            }
            std::map<std::string, std::string> params = {{"gadget", gadget},
                                                         {"level", std::to_string(sim_level)},
                                                         {"p", format_number(sim_p)},
                                                         {"trials", std::to_string(trials)},
                                                         {"seed", std::to_string(seed)},
                                                         {"fault-dist", dist_text},
                                                         {"threads", std::to_string(threads)},
                                                         {"basis", basis},
                                                         {"histograms", no_hist ? "false" : "true"}};
            err << "simulate: " << trials << " trials of " << gadget << " at level " << sim_level << "\n";
            rep = simulate_report(cfg, params, err);
            fmt = pick_format(common, report::Format::Csv);
        } else if (*ds) {
            auto values = parse_number_list("--f", f_text);
            distill::FidelityVector fs{};
            if (values.size() == 1) {
                fs.fill(values[0]);
            } else if (values.size() == 5) {
                std::copy(values.begin(), values.end(), fs.begin());
            } else {
                throw UsageError("--f: expected one or five fidelities");
            }
            for (double f : fs) {
                if (!(f >= -1.0 && f <= 1.0)) throw UsageError("--f: fidelities must lie in [-1, 1]");
            }
            rep = distill_report(fs, iters, f_text);
            fmt = pick_format(common, report::Format::Csv);
        } else {
            rep = decode_table_report();
            fmt = pick_format(common, report::Format::Csv);
        }
        rep.manifest.parameters["format"] = fmt == report::Format::Csv ? "csv" : "json";
        report::emit_report(rep, fmt, common.out);
        return 0;
    } catch (const CLI::CallForHelp &) {
        err << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp &) {
        err << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError &e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const UsageError &e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace ftlab::cli
