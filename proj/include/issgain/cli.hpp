#pragma once

// Command-line front end. `run` holds all logic so it can be driven in-process.
// Exit codes: 0 ok, 1 hypothesis (H) not satisfied, 2 numerical failure or
// inadmissible case, 3 configuration error.

#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "issgain/backstepping.hpp"
#include "issgain/disturbance.hpp"
#include "issgain/error.hpp"
#include "issgain/gains.hpp"
#include "issgain/io.hpp"
#include "issgain/pde_sim.hpp"
#include "issgain/sturm_liouville.hpp"

namespace issgain::cli {

enum ExitCode : int { ok = 0, hypothesis_failed = 1, numerical_failure = 2, config_error = 3 };

inline int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::UncertifiedHypothesis: return hypothesis_failed;
        case ErrorKind::ConfigError:
        case ErrorKind::InvalidArgument:
        case ErrorKind::NonPositiveCoefficient:
        case ErrorKind::DegenerateBoundary:
        case ErrorKind::GridMismatch: return config_error;
        default: return numerical_failure;
    }
}

struct Options {
    // problem
    std::string case_name = "dirichlet-laplacian";
    double p = 1.0, q = 0.0, r = 1.0;
    double a1 = 1.0, a2 = 0.0, b1 = 1.0, b2 = 0.0;
    double D = 1.0, v = 0.0, k = 0.0, c = 0.0;
    double zeta = -1.0;
    std::string a = "inf";
    std::string form = "x";
    std::size_t resolution = 256;
    std::size_t modes = 0;
    std::size_t terms = 10000;
    double eps = 1.0;
    std::string format = "csv";
    std::string output = "-";
    // sweep
    double zeta_min = 0.05, zeta_max = 4.0;
    std::size_t points = 80;
    std::string spacing = "log";
    std::string advection = "derived";
    // simulation
    std::string solver = "fd";
    std::string d_kind = "constant";
    double d_offset = 1.0, d_amplitude = 0.0, d_omega = 1.0, d_phase = 0.0;
    double d_from = 0.0, d_to = 1.0, d_ramp = 1.0, d_start = 0.0;
    std::string d_table;
    std::string x0 = "auto";
    double dt = 1e-3, T = 2.0;
    std::size_t store_every = 10;
    double plant_p = 3.0;
    bool wide = false;
    bool verify = false;
    std::vector<double> eps_list{0.1, 1.0, 10.0};
    double slack = 1e-3;
    std::string kernel_out;
};

namespace detail {

inline ExitParameter exit_parameter(const std::string& s) {
    if (s == "inf" || s == "+inf" || s == "infinity") return ExitParameter::dirichlet();
    double a = 0.0;
    try {
        std::size_t used = 0;
        a = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
    } catch (const std::exception&) {
        throw Error(ErrorKind::ConfigError, "exit parameter must be a number or 'inf', got '" + s + "'");
    }
    return ExitParameter::robin(a);
}

inline TransportCase transport_case(const Options& o) {
    if (o.zeta >= 0.0) return TransportCase::from_zeta(o.zeta, exit_parameter(o.a));
    return {o.D, o.v, o.k, exit_parameter(o.a)};
}

inline SLProblem make_problem(const Options& o) {
    if (o.case_name == "transport") {
        const auto tc = transport_case(o);
        tc.zeta();  // admissibility
        return o.form == "y" ? transport_problem_y(tc, o.resolution) : transport_problem(tc, o.resolution);
    }
    if (o.case_name == "backstepping") {
        require(o.c >= 0.0, ErrorKind::InvalidArgument, "c must be >= 0");
        return constant_problem(o.D, o.c, 1.0, {1.0, 0.0, 1.0, 0.0}, o.resolution);
    }
    require(o.case_name == "dirichlet-laplacian" || o.case_name == "custom", ErrorKind::ConfigError,
            "unknown case '" + o.case_name + "'");
    return constant_problem(o.p, o.q, o.r, {o.a1, o.a2, o.b1, o.b2}, o.resolution);
}

inline Disturbance make_disturbance(const Options& o) {
    if (o.d_kind == "constant") return Disturbance::constant(o.d_offset);
    if (o.d_kind == "sinusoid") return Disturbance::sinusoid(o.d_offset, o.d_amplitude, o.d_omega, o.d_phase);
    if (o.d_kind == "step") return Disturbance::smoothed_step(o.d_from, o.d_to, o.d_ramp, o.d_start);
    if (o.d_kind == "table") {
        require(!o.d_table.empty(), ErrorKind::ConfigError, "--d-table is required for d-kind=table");
        auto [t, y] = io::read_two_column_csv(o.d_table);
        return Disturbance::tabulated(std::move(t), std::move(y));
    }
    throw Error(ErrorKind::ConfigError, "unknown disturbance kind '" + o.d_kind + "'");
}

class Output {
public:
    explicit Output(const std::string& path, std::ostream& fallback) {
        if (path.empty() || path == "-") {
            os_ = &fallback;
        } else {
            file_ = std::make_unique<std::ofstream>(path);
            require(static_cast<bool>(*file_), ErrorKind::ConfigError, "cannot write '" + path + "'");
            os_ = file_.get();
        }
    }
    std::ostream& stream() { return *os_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* os_ = nullptr;
};

inline void print_hypothesis(std::ostream& err, const HypothesisReport& h) {
    err << "hypothesis (H): lambda1 = " << io::format_number(h.lambda1) << ", positive = " << h.positive
        << ", sum lambda^-1 max|phi| <= " << io::format_number(h.partial_sum + h.tail_bound)
        << (h.certified ? " (certified)" : " (not certified)") << "; " << h.note << '\n';
}

inline int cmd_spectrum(const Options& o, std::ostream& out, std::ostream& err) {
    const auto prob = make_problem(o);
    const std::size_t modes = o.modes ? o.modes : 10;
    const auto spec = solve_spectrum(prob, std::max<std::size_t>(modes, 10));
    const auto hyp = check_hypothesis_H(spec, prob);
    Spectrum shown = spec;
    shown.eigenvalues.resize(modes);
    shown.eigenfunctions.resize(modes);
    shown.values_at_0.resize(modes);
    shown.derivatives_at_0.resize(modes);
    Output dest(o.output, out);
    io::write_spectrum_csv(dest.stream(), shown);
    print_hypothesis(err, hyp);
    return hyp.satisfied() ? ok : hypothesis_failed;
}

inline int cmd_gain(const Options& o, std::ostream& out, std::ostream& err) {
    GainComparison cmp;
    if (o.case_name == "transport") {
        const auto tc = transport_case(o);
        cmp = transport_gain(tc, o.terms);
        cmp.routes.push_back(gain_bvp(make_problem(o)));
    } else if (o.case_name == "backstepping") {
        cmp = backstepping_gain(o.c, o.D, o.terms);
        cmp.routes.push_back(gain_bvp(make_problem(o)));
    } else {
        const auto prob = make_problem(o);
        const std::size_t modes = o.modes ? o.modes : prob.resolution() / 4;
        const auto spec = solve_spectrum(prob, modes);
        cmp.routes.push_back(gain_series(prob, spec, modes));
        cmp.routes.push_back(gain_bvp(prob));
    }
    for (auto& g : cmp.routes) g.at_epsilon(o.eps);
    Output dest(o.output, out);
    if (o.format == "kv") {
        for (std::size_t i = 0; i < cmp.routes.size(); ++i) {
            if (i) dest.stream() << '\n';
            io::write_gain_report(dest.stream(), cmp.routes[i]);
        }
    } else {
        io::write_gain_table(dest.stream(), cmp.routes);
    }
    err << "max route discrepancy: " << io::format_number(cmp.max_discrepancy()) << '\n';
    return ok;
}

inline int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
    require(o.points >= 1, ErrorKind::InvalidArgument, "points must be >= 1");
    require(o.zeta_min > 0.0 && o.zeta_max >= o.zeta_min, ErrorKind::InvalidArgument,
            "need 0 < zeta-min <= zeta-max");
    require(o.spacing == "log" || o.spacing == "linear", ErrorKind::ConfigError, "spacing must be log or linear");
    require(o.advection == "derived" || o.advection == "literal", ErrorKind::ConfigError,
            "advection must be derived or literal");
    std::vector<double> grid;
    for (std::size_t i = 0; i < o.points; ++i) {
        const double u = o.points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(o.points - 1);
        grid.push_back(o.spacing == "log" ? o.zeta_min * std::pow(o.zeta_max / o.zeta_min, u)
                                          : o.zeta_min + u * (o.zeta_max - o.zeta_min));
    }
    const auto table = sweep_figure1(grid, o.advection == "derived" ? AdvectionForm::derived : AdvectionForm::literal,
                                     o.terms);
    Output dest(o.output, out);
    io::write_sweep_csv(dest.stream(), table);
    err << "ordering G(.,0) > G(.,1) > G(.,inf): " << (table.ordering_holds ? "holds" : "violated") << '\n'
        << "columns nonincreasing (zeta >= 0.1): " << (table.columns_nonincreasing ? "yes" : "no") << '\n'
        << "crossovers advection vs G(.,inf): " << table.crossovers.size();
    for (const auto& [lo, hi] : table.crossovers)
        err << " [" << io::format_number(lo) << ", " << io::format_number(hi) << "]";
    err << '\n' << "max series/closed-form discrepancy: " << io::format_number(table.max_route_discrepancy) << '\n';
    return ok;
}

inline void emit_warnings(std::ostream& err, const Trajectory& tr) {
    for (const auto& w : tr.warnings) err << "warning: " << w << '\n';
}

inline int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
    const auto d = make_disturbance(o);
    Output dest(o.output, out);
    auto& os = dest.stream();
    Trajectory tr;
    EnvelopeFamily envelope;

    if (o.solver == "advection") {
        require(o.v > 0.0, ErrorKind::InvalidArgument, "advection needs v > 0");
        const double v = o.v, k = o.k;
        std::function<double(double)> y0;
        if (o.x0 == "auto" || o.x0 == "history") {
            y0 = [=](double z) { return std::exp(-k * z / v) * d(-z / v); };
        } else if (o.x0 == "zero") {
            y0 = [](double) { return 0.0; };
        } else {
            throw Error(ErrorKind::ConfigError, "x0 for advection must be history or zero");
        }
        tr = advection_exact(v, k, d, y0, Grid(o.resolution), o.dt, o.T, o.D, o.store_every);
        envelope = advection_envelope(v, o.D, k,
                                      o.advection == "literal" ? AdvectionForm::literal : AdvectionForm::derived);
    } else if (o.solver == "closed-loop") {
        ClosedLoopConfig cfg{o.D, o.plant_p, o.c, d};
        const auto kernel = solve_kernel(cfg, o.resolution);
        GridFunction shape = o.x0 == "zero" ? GridFunction::zeros(kernel.grid)
                                            : GridFunction::sample(kernel.grid, [](double z) {
                                                  return std::sin(std::numbers::pi * z);
                                              });
        const auto y0 = compatible_initial_state(kernel, shape, d(0.0));
        auto res = simulate_closed_loop(cfg, y0, o.dt, o.T, o.store_every);
        if (!o.kernel_out.empty()) {
            Output kout(o.kernel_out, out);
            io::write_kernel_csv(kout.stream(), res.kernel);
        }
        err << "kernel norms: ||k|| = " << io::format_number(res.kernel.norm)
            << ", ||l|| = " << io::format_number(res.inverse.norm) << '\n';
        envelope = closed_loop_envelope(cfg, res.kernel, res.inverse);
        tr = std::move(res.plant);
    } else {
        const auto prob = make_problem(o);
        GridFunction x0;
        if (o.x0 == "auto" || o.x0 == "steady") {
            x0 = solve_steady_bvp(prob, d(0.0)).profile;
        } else if (o.x0 == "zero") {
            x0 = GridFunction::zeros(prob.grid());
        } else if (o.x0 == "mode1") {
            x0 = solve_spectrum(prob, 1).eigenfunctions.front();
        } else {
            throw Error(ErrorKind::ConfigError, "x0 must be steady, zero or mode1");
        }
        const std::size_t modes = o.modes ? o.modes : 64;
        envelope = theorem_envelope(gain_bvp(prob));
        if (o.solver == "fd") {
            tr = simulate_fd(prob, d, x0, o.dt, o.T, o.store_every);
        } else if (o.solver == "spectral" || o.solver == "lifted" || o.solver == "compare") {
            const auto spec = solve_spectrum(prob, std::max<std::size_t>(modes, 10));
            if (o.solver == "compare") {
                const auto fd = simulate_fd(prob, d, x0, o.dt, o.T, o.store_every);
                const auto sp = simulate_spectral(prob, spec, d, x0, o.dt, o.T, modes, o.store_every);
                emit_warnings(err, fd);
                emit_warnings(err, sp);
                os << "t,norm_fd,norm_spectral,discrepancy\n";
                for (std::size_t i = 0; i < fd.size(); ++i)
                    io::write_row(os, {fd.times[i], fd.norms[i], sp.norms[i], std::abs(fd.norms[i] - sp.norms[i])});
                return ok;
            }
            tr = o.solver == "spectral" ? simulate_spectral(prob, spec, d, x0, o.dt, o.T, modes, o.store_every)
                                        : simulate_lifted(prob, spec, d, x0, o.dt, o.T, modes, o.store_every);
        } else {
            throw Error(ErrorKind::ConfigError, "unknown solver '" + o.solver + "'");
        }
    }

    emit_warnings(err, tr);
    io::write_trajectory_csv(os, tr, o.wide);
    if (o.verify) {
        const auto rep = verify_iss(tr, envelope, o.eps_list, o.slack);
        os << '\n';
        io::write_iss_csv(os, rep);
        err << "ISS envelope: " << (rep.pass ? "pass" : "FAIL") << '\n';
    }
    return ok;
}

inline void add_problem_options(CLI::App* sub, Options& o) {
    sub->add_option("--case", o.case_name, "dirichlet-laplacian | custom | transport | backstepping")
        ->capture_default_str();
    sub->add_option("--p", o.p, "constant p (custom problems)")->capture_default_str();
    sub->add_option("--q", o.q, "constant q (custom problems)")->capture_default_str();
    sub->add_option("--r", o.r, "constant r (custom problems)")->capture_default_str();
    sub->add_option("--a1", o.a1, "exit constant a1")->capture_default_str();
    sub->add_option("--a2", o.a2, "exit constant a2")->capture_default_str();
    sub->add_option("--b1", o.b1, "inlet constant b1")->capture_default_str();
    sub->add_option("--b2", o.b2, "inlet constant b2")->capture_default_str();
    sub->add_option("--D", o.D, "diffusion coefficient")->capture_default_str();
    sub->add_option("--v", o.v, "transport velocity")->capture_default_str();
    sub->add_option("--k", o.k, "reaction constant")->capture_default_str();
    sub->add_option("--a", o.a, "transport exit parameter (number or inf)")->capture_default_str();
    sub->add_option("--zeta", o.zeta, "transport case with D = 1, k = 0, v = 2 zeta");
    sub->add_option("--c", o.c, "backstepping target coefficient")->capture_default_str();
    sub->add_option("--form", o.form, "transport variable: x (symmetrized) or y (original)")->capture_default_str();
    sub->add_option("--resolution", o.resolution, "grid intervals (even, >= 64)")->capture_default_str();
    sub->add_option("--output,-o", o.output, "output file ('-' for standard output)")->capture_default_str();
}

/// Builds the argument list from argv and an optional config file; command
/// line values override the file.
inline std::vector<std::string> merge_config(const std::vector<std::string>& args) {
    static const std::set<std::string> commands{"spectrum", "gain", "sweep-fig1", "simulate"};
    static const std::set<std::string> flags{"wide", "verify-iss"};
    std::string config_path;
    std::vector<std::string> rest;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config") {
            require(i + 1 < args.size(), ErrorKind::ConfigError, "--config needs a path");
            config_path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }
    std::vector<std::string> out{args.empty() ? std::string("issgain") : args[0]};
    if (config_path.empty()) {
        out.insert(out.end(), rest.begin(), rest.end());
        return out;
    }
    auto cfg = io::read_config_file(config_path);
    std::set<std::string> given;
    for (const auto& a : rest)
        if (a.rfind("--", 0) == 0) given.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));

    bool has_command = !rest.empty() && commands.contains(rest.front());
    if (!has_command) {
        const auto it = cfg.find("command");
        require(it != cfg.end() && commands.contains(it->second), ErrorKind::ConfigError,
                "no command given on the command line or in the config file");
        out.push_back(it->second);
    } else {
        out.push_back(rest.front());
        rest.erase(rest.begin());
    }
    for (const auto& [key, value] : cfg) {
        if (key == "command" || given.contains(key)) continue;
        if (flags.contains(key)) {
            require(value == "true" || value == "false", ErrorKind::ConfigError, key + " must be true or false");
            if (value == "true") out.push_back("--" + key);
            continue;
        }
        out.push_back("--" + key);
        out.push_back(value);
    }
    out.insert(out.end(), rest.begin(), rest.end());
    return out;
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"ISS gain estimates for boundary-disturbed 1-D parabolic PDEs"};
    app.name("issgain");
    app.require_subcommand(1);
    std::string config_doc;
    app.add_option("--config", config_doc,
                   "key = value file starting with 'schema = " + std::string(io::config_schema) +
                       "'; keys are option names, plus 'command'");

    auto* spectrum = app.add_subcommand("spectrum", "eigenvalues, boundary data and hypothesis (H) report");
    detail::add_problem_options(spectrum, o);
    spectrum->add_option("--modes", o.modes, "number of modes (default 10)");

    auto* gain = app.add_subcommand("gain", "gain constant by every applicable route");
    detail::add_problem_options(gain, o);
    gain->add_option("--modes", o.modes, "modes for the numeric series route (default resolution/4)");
    gain->add_option("--terms", o.terms, "series truncation for analytic routes")->capture_default_str();
    gain->add_option("--eps", o.eps, "epsilon for the ISS envelope fields")->capture_default_str();
    gain->add_option("--format", o.format, "csv or kv")->capture_default_str();

    auto* sweep = app.add_subcommand("sweep-fig1", "transport gains for a = 0, 1, inf and the advection gain");
    sweep->add_option("--zeta-min", o.zeta_min)->capture_default_str();
    sweep->add_option("--zeta-max", o.zeta_max)->capture_default_str();
    sweep->add_option("--points", o.points)->capture_default_str();
    sweep->add_option("--spacing", o.spacing, "log or linear")->capture_default_str();
    sweep->add_option("--advection", o.advection, "derived or literal exponent")->capture_default_str();
    sweep->add_option("--terms", o.terms, "series truncation")->capture_default_str();
    sweep->add_option("--output,-o", o.output, "output file ('-' for standard output)")->capture_default_str();

    auto* simulate = app.add_subcommand("simulate", "trajectory CSV with optional ISS envelope check");
    detail::add_problem_options(simulate, o);
    simulate->add_option("--solver", o.solver, "fd | spectral | lifted | compare | advection | closed-loop")
        ->capture_default_str();
    simulate->add_option("--modes", o.modes, "retained modes for spectral solvers (default 64)");
    simulate->add_option("--d-kind", o.d_kind, "constant | sinusoid | step | table")->capture_default_str();
    simulate->add_option("--d-offset", o.d_offset, "constant value / sinusoid offset")->capture_default_str();
    simulate->add_option("--d-amplitude", o.d_amplitude)->capture_default_str();
    simulate->add_option("--d-omega", o.d_omega)->capture_default_str();
    simulate->add_option("--d-phase", o.d_phase)->capture_default_str();
    simulate->add_option("--d-from", o.d_from)->capture_default_str();
    simulate->add_option("--d-to", o.d_to)->capture_default_str();
    simulate->add_option("--d-ramp", o.d_ramp)->capture_default_str();
    simulate->add_option("--d-start", o.d_start)->capture_default_str();
    simulate->add_option("--d-table", o.d_table, "two-column CSV t,d");
    simulate->add_option("--x0", o.x0, "auto | steady | zero | mode1 | history")->capture_default_str();
    simulate->add_option("--dt", o.dt)->capture_default_str();
    simulate->add_option("--T", o.T)->capture_default_str();
    simulate->add_option("--store-every", o.store_every)->capture_default_str();
    simulate->add_option("--plant-p", o.plant_p, "closed-loop plant reaction rate")->capture_default_str();
    simulate->add_option("--advection", o.advection, "advection envelope: derived or literal")->capture_default_str();
    simulate->add_flag("--wide", o.wide, "append state samples");
    simulate->add_flag("--verify-iss", o.verify, "append the ISS envelope check");
    simulate->add_option("--eps", o.eps_list, "epsilon values for --verify-iss")->delimiter(',')->capture_default_str();
    simulate->add_option("--slack", o.slack)->capture_default_str();
    simulate->add_option("--kernel-out", o.kernel_out, "closed loop: write the kernel CSV here");

    try {
        const std::vector<std::string> raw(argv, argv + argc);
        const auto merged = detail::merge_config(raw);
        std::vector<const char*> ptrs;
        for (const auto& s : merged) ptrs.push_back(s.c_str());
        try {
            app.parse(static_cast<int>(ptrs.size()), ptrs.data());
        } catch (const CLI::CallForHelp& e) {
            return app.exit(e, out, err);
        } catch (const CLI::CallForAllHelp& e) {
            return app.exit(e, out, err);
        } catch (const CLI::ParseError& e) {
            app.exit(e, out, err);
            return config_error;
        }
        if (spectrum->parsed()) return detail::cmd_spectrum(o, out, err);
        if (gain->parsed()) return detail::cmd_gain(o, out, err);
        if (sweep->parsed()) return detail::cmd_sweep(o, out, err);
        return detail::cmd_simulate(o, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return numerical_failure;
    }
}

}  // namespace issgain::cli
