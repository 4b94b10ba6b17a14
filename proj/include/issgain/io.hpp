#pragma once

// CSV and key/value text formats. Numbers are written with 12 significant
// digits through std::to_chars, so output does not depend on the locale.

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "issgain/backstepping.hpp"
#include "issgain/error.hpp"
#include "issgain/gains.hpp"
#include "issgain/pde_sim.hpp"
#include "issgain/sturm_liouville.hpp"

namespace issgain::io {

inline constexpr std::string_view config_schema = "issgain-config/1";

inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
    return std::string(buf, res.ptr);
}

inline void write_row(std::ostream& os, const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) os << (i ? "," : "") << format_number(values[i]);
    os << '\n';
}

inline void write_spectrum_csv(std::ostream& os, const Spectrum& s) {
    os << "n,lambda,phi_0,dphi_0,max_abs_phi\n";
    for (std::size_t n = 0; n < s.size(); ++n)
        write_row(os, {static_cast<double>(n + 1), s.eigenvalues[n], s.values_at_0[n], s.derivatives_at_0[n],
                       s.max_abs(n)});
}

inline void write_gain_table(std::ostream& os, const std::vector<GainReport>& routes) {
    os << "route,gain_C,truncation_N,tail_estimate,epsilon,iss_overshoot,iss_decay_rate,iss_gain\n";
    for (const auto& g : routes) {
        os << to_string(g.route) << ',';
        write_row(os, {g.gain_C, static_cast<double>(g.truncation_N), g.tail_estimate, g.epsilon, g.iss_overshoot,
                       g.iss_decay_rate, g.iss_gain});
    }
}

/// Flat key/value block, one `key = value` per line.
inline void write_gain_report(std::ostream& os, const GainReport& g) {
    os << "route = " << to_string(g.route) << '\n'
       << "gain_C = " << format_number(g.gain_C) << '\n'
       << "truncation_N = " << g.truncation_N << '\n'
       << "partial_gain = " << format_number(g.partial_gain) << '\n'
       << "tail_estimate = " << format_number(g.tail_estimate) << '\n'
       << "inlet_norm = " << format_number(g.inlet_norm) << '\n'
       << "epsilon = " << format_number(g.epsilon) << '\n'
       << "iss_overshoot = " << format_number(g.iss_overshoot) << '\n'
       << "iss_decay_rate = " << format_number(g.iss_decay_rate) << '\n'
       << "iss_gain = " << format_number(g.iss_gain) << '\n';
}

/// Splits `key = value` lines; '#' starts a comment. Throws ConfigError on
/// lines without '='.
inline std::vector<std::pair<std::string, std::string>> parse_key_values(std::istream& in) {
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    std::size_t lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        require(eq != std::string::npos, ErrorKind::ConfigError,
                "line " + std::to_string(lineno) + ": expected key = value");
        auto key = trim(line.substr(0, eq));
        require(!key.empty(), ErrorKind::ConfigError, "line " + std::to_string(lineno) + ": empty key");
        out.emplace_back(std::move(key), trim(line.substr(eq + 1)));
    }
    return out;
}

inline GainReport parse_gain_report(std::istream& in) {
    GainReport g;
    for (const auto& [k, v] : parse_key_values(in)) {
        if (k == "route") {
            if (v == "series") g.route = GainRoute::series;
            else if (v == "bvp_integral") g.route = GainRoute::bvp_integral;
            else if (v == "closed_form") g.route = GainRoute::closed_form;
            else throw Error(ErrorKind::ConfigError, "unknown route '" + v + "'");
            continue;
        }
        double x = 0.0;
        try {
            x = std::stod(v);
        } catch (const std::exception&) {
            throw Error(ErrorKind::ConfigError, "bad number for " + k + ": '" + v + "'");
        }
        if (k == "gain_C") g.gain_C = x;
        else if (k == "truncation_N") g.truncation_N = static_cast<std::size_t>(x);
        else if (k == "partial_gain") g.partial_gain = x;
        else if (k == "tail_estimate") g.tail_estimate = x;
        else if (k == "inlet_norm") g.inlet_norm = x;
        else if (k == "epsilon") g.epsilon = x;
        else if (k == "iss_overshoot") g.iss_overshoot = x;
        else if (k == "iss_decay_rate") g.iss_decay_rate = x;
        else if (k == "iss_gain") g.iss_gain = x;
        else throw Error(ErrorKind::ConfigError, "unknown key '" + k + "'");
    }
    return g;
}

/// Run configuration file: a `schema = issgain-config/1` line followed by
/// option names (without leading dashes) and values.
inline std::map<std::string, std::string> parse_config(std::istream& in) {
    const auto kv = parse_key_values(in);
    require(!kv.empty() && kv.front().first == "schema", ErrorKind::ConfigError,
            "config must start with 'schema = " + std::string(config_schema) + "'");
    require(kv.front().second == config_schema, ErrorKind::ConfigError,
            "unsupported config schema '" + kv.front().second + "'");
    std::map<std::string, std::string> out;
    for (std::size_t i = 1; i < kv.size(); ++i) {
        require(!out.contains(kv[i].first), ErrorKind::ConfigError, "duplicate key '" + kv[i].first + "'");
        out.emplace(kv[i].first, kv[i].second);
    }
    return out;
}

inline std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorKind::ConfigError, "cannot open config file '" + path + "'");
    return parse_config(in);
}

inline void write_sweep_csv(std::ostream& os, const Figure1Table& t) {
    os << "zeta,G_a0,G_a1,G_ainf,G_advection\n";
    for (const auto& r : t.rows) write_row(os, {r.zeta, r.g_a0, r.g_a1, r.g_ainf, r.g_advection});
}

/// `t,norm_r,d` (plus `u` when the trajectory carries a control); `wide`
/// appends the state samples as columns x_0 .. x_M.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr, bool wide = false) {
    const bool with_u = !tr.control.empty();
    os << "t,norm_r,d" << (with_u ? ",u" : "");
    if (wide)
        for (std::size_t i = 0; i < tr.grid.size(); ++i) os << ",x_" << i;
    os << '\n';
    for (std::size_t k = 0; k < tr.size(); ++k) {
        std::vector<double> row{tr.times[k], tr.norms[k], tr.d_values[k]};
        if (with_u) row.push_back(tr.control[k]);
        if (wide) row.insert(row.end(), tr.states[k].values.begin(), tr.states[k].values.end());
        write_row(os, row);
    }
}

inline void write_iss_csv(std::ostream& os, const ISSCheckReport& rep) {
    os << "epsilon,min_margin,argmin_t,pass\n";
    for (std::size_t i = 0; i < rep.epsilons.size(); ++i)
        os << format_number(rep.epsilons[i]) << ',' << format_number(rep.min_margin[i]) << ','
           << format_number(rep.argmin_t[i]) << ',' << (rep.passed[i] ? "true" : "false") << '\n';
}

inline void write_kernel_csv(std::ostream& os, const Kernel& k) {
    os << "z,s,k\n";
    const std::size_t m = k.grid.intervals();
    for (std::size_t i = 0; i <= m; ++i)
        for (std::size_t j = i; j <= m; ++j) write_row(os, {k.grid.node(i), k.grid.node(j), k(i, j)});
}

/// Two-column numeric CSV (header optional) for tabulated signals.
inline std::pair<std::vector<double>, std::vector<double>> read_two_column_csv(const std::string& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorKind::ConfigError, "cannot open table '" + path + "'");
    std::vector<double> a, b;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto comma = line.find(',');
        require(comma != std::string::npos, ErrorKind::ConfigError,
                path + ":" + std::to_string(lineno) + ": expected two columns");
        double x = 0.0, y = 0.0;
        const auto r1 = std::from_chars(line.data(), line.data() + comma, x);
        const auto r2 = std::from_chars(line.data() + comma + 1, line.data() + line.size(), y);
        if (r1.ec != std::errc() || r2.ec != std::errc()) {
            require(lineno == 1, ErrorKind::ConfigError, path + ":" + std::to_string(lineno) + ": not numeric");
            continue;  // header
        }
        a.push_back(x);
        b.push_back(y);
    }
    return {std::move(a), std::move(b)};
}

}  // namespace issgain::io
