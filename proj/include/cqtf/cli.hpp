#pragma once

// Batch front end. Exit codes: 0 ok, 2 bad input, 3 solver did not converge,
// 4 a report check failed.

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cqtf/asymptotics.hpp"
#include "cqtf/energy.hpp"
#include "cqtf/report.hpp"
#include "cqtf/soliton.hpp"
#include "cqtf/solver.hpp"
#include "cqtf/table_io.hpp"
#include "cqtf/thomas_fermi.hpp"

namespace cqtf {

enum exit_code : int { exit_ok = 0, exit_internal = 1, exit_invalid = 2, exit_nonconvergence = 3, exit_report = 4 };

/// Default truncation of whole-space problems, in plateau radii.
inline constexpr double default_trunc_radii = 9.0;

struct RunConfig {
    std::string command;
    int dim = 1;
    double rho = 0.5;
    std::vector<double> L_list;
    std::vector<double> N_list;
    int n = 0;   ///< 0: command default
    double tau = SolverOptions{}.tau;
    double tol_energy = SolverOptions{}.tol_energy;
    double tol_residual = SolverOptions{}.tol_residual;
    int max_iter = SolverOptions{}.max_iter;
    std::string init = "tf-plateau-smoothed";
    bool warm_start = true;
    std::string out_path;
    std::string format = "csv";
    double trunc = 0.0;  ///< 0: nine plateau radii
    std::string plot_dir;
    std::vector<std::string> files;
    int threads = 1;

    SolverOptions solver() const {
        SolverOptions s;
        s.tau = tau;
        s.tol_energy = tol_energy;
        s.tol_residual = tol_residual;
        s.max_iter = max_iter;
        if (init == "gaussian")
            s.init = InitKind::gaussian;
        else if (init == "tf-plateau-smoothed")
            s.init = InitKind::tf_plateau_smoothed;
        else
            throw validation_error("unknown init '" + init + "' (tf-plateau-smoothed or gaussian)");
        s.validate();
        return s;
    }
};

namespace detail {

inline int threads_from_env() {
    const char* v = std::getenv("CQ_THREADS");
    if (!v || !*v) return 1;
    char* end = nullptr;
    const long t = std::strtol(v, &end, 10);
    if (*end != '\0' || t < 1 || t > 4096) throw validation_error("CQ_THREADS must be an integer >= 1");
    return static_cast<int>(t);
}

inline std::vector<double> json_list(const nlohmann::json& v, const std::string& key) {
    std::vector<double> out;
    if (v.is_array()) {
        for (const auto& x : v) {
            if (!x.is_number()) throw validation_error("config key '" + key + "' must hold numbers");
            out.push_back(x.get<double>());
        }
    } else if (v.is_number()) {
        out.push_back(v.get<double>());
    } else if (v.is_string()) {
        std::stringstream ss(v.get<std::string>());
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                std::size_t used = 0;
                out.push_back(std::stod(item, &used));
                if (used != item.size()) throw std::invalid_argument(item);
            } catch (const std::exception&) {
                throw validation_error("config key '" + key + "': bad number '" + item + "'");
            }
        }
    } else {
        throw validation_error("config key '" + key + "' must be a list of numbers");
    }
    return out;
}

template <class T>
T json_get(const nlohmann::json& v, const std::string& key) {
    try {
        return v.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw validation_error("config key '" + key + "' has the wrong type");
    }
}

/// Keys of the flat config object, each bound to its flag: a value from the
/// file is used only when the flag itself was not given.
inline void apply_config(const std::string& path, RunConfig& cfg, const std::map<std::string, CLI::Option*>& flags,
                         bool command_given) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot read config file " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw validation_error("malformed config " + path + ": " + e.what());
    }
    if (!doc.is_object()) throw validation_error("config must be a flat JSON object");

    const std::map<std::string, std::function<void(const nlohmann::json&)>> setters{
        {"dim", [&](const nlohmann::json& v) { cfg.dim = json_get<int>(v, "dim"); }},
        {"rho", [&](const nlohmann::json& v) { cfg.rho = json_get<double>(v, "rho"); }},
        {"L", [&](const nlohmann::json& v) { cfg.L_list = json_list(v, "L"); }},
        {"N", [&](const nlohmann::json& v) { cfg.N_list = json_list(v, "N"); }},
        {"n", [&](const nlohmann::json& v) { cfg.n = json_get<int>(v, "n"); }},
        {"tau", [&](const nlohmann::json& v) { cfg.tau = json_get<double>(v, "tau"); }},
        {"tol_energy", [&](const nlohmann::json& v) { cfg.tol_energy = json_get<double>(v, "tol_energy"); }},
        {"tol_residual", [&](const nlohmann::json& v) { cfg.tol_residual = json_get<double>(v, "tol_residual"); }},
        {"max_iter", [&](const nlohmann::json& v) { cfg.max_iter = json_get<int>(v, "max_iter"); }},
        {"init", [&](const nlohmann::json& v) { cfg.init = json_get<std::string>(v, "init"); }},
        {"warm_start", [&](const nlohmann::json& v) { cfg.warm_start = json_get<bool>(v, "warm_start"); }},
        {"out", [&](const nlohmann::json& v) { cfg.out_path = json_get<std::string>(v, "out"); }},
        {"format", [&](const nlohmann::json& v) { cfg.format = json_get<std::string>(v, "format"); }},
        {"trunc", [&](const nlohmann::json& v) { cfg.trunc = json_get<double>(v, "trunc"); }},
        {"plot_dir", [&](const nlohmann::json& v) { cfg.plot_dir = json_get<std::string>(v, "plot_dir"); }},
    };
    for (const auto& [key, value] : doc.items()) {
        if (key == "command") {
            if (!command_given) cfg.command = json_get<std::string>(value, key);
            continue;
        }
        auto it = setters.find(key);
        if (it == setters.end()) throw validation_error("unknown config key '" + key + "'");
        auto flag = flags.find(key);
        if (flag != flags.end() && flag->second->count() > 0) continue;
        it->second(value);
    }
}

inline void emit(const RunConfig& cfg, std::ostream& out, const std::string& text) {
    if (cfg.out_path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(cfg.out_path, std::ios::binary);
    if (!f) throw validation_error("cannot write output file " + cfg.out_path);
    f << text;
    f.flush();
    if (!f) throw validation_error("failed writing output file " + cfg.out_path);
}

inline void require_format(const RunConfig& cfg) {
    if (cfg.format != "csv" && cfg.format != "json")
        throw validation_error("format must be csv or json, got '" + cfg.format + "'");
}

/// Flat two-line CSV (keys, values) or a JSON object.
inline std::string render_record(const RunConfig& cfg, const nlohmann::ordered_json& rec) {
    if (cfg.format == "json") return rec.dump(2) + "\n";
    std::string head, vals;
    bool first = true;
    for (const auto& [k, v] : rec.items()) {
        const char* sep = first ? "" : ",";
        first = false;
        head += sep + k;
        std::string s;
        if (v.is_number_float())
            s = format_number(v.get<double>());
        else if (v.is_null())
            s = "nan";
        else
            s = v.dump();
        vals += sep + s;
    }
    return head + "\n" + vals + "\n";
}

inline std::string render_profile_csv(const Field& f) {
    std::string s = "r,u\n";
    auto r = f.grid->nodes();
    for (std::size_t i = 0; i < f.size(); ++i) s += format_number(r[i]) + "," + format_number(f.values[i]) + "\n";
    return s;
}

inline int cmd_tf(const RunConfig& cfg, std::ostream& out) {
    require_format(cfg);
    const TFProfile p = tf_profile(cfg.dim, cfg.rho);
    const int n = cfg.n > 0 ? cfg.n : 4096;
    const auto grid = make_radial_grid(cfg.dim, p.domain_radius, n);
    const auto ids = tf_identities(p, grid);
    const auto dual = tf_dual_solve(grid, 1.0);
    nlohmann::ordered_json rec;
    rec["dim"] = p.dim;
    rec["rho"] = p.rho;
    rec["domain_radius"] = p.domain_radius;
    rec["plateau_radius"] = p.plateau_radius;
    rec["plateau_height"] = p.plateau_height;
    rec["energy"] = p.energy;
    rec["multiplier"] = p.multiplier;
    rec["n"] = n;
    rec["quartic_integral"] = ids.quartic_integral;
    rec["sextic_integral"] = ids.sextic_integral;
    rec["quartic_sextic_residual"] = ids.quartic_sextic_residual;
    rec["multiplier_residual"] = ids.multiplier_residual;
    rec["dual_energy"] = dual.energy;
    rec["dual_alpha"] = dual.dual_alpha;
    rec["dual_bang_bang_violations"] = dual.bang_bang_violations;
    emit(cfg, out, render_record(cfg, rec));
    return exit_ok;
}

inline double single(const std::vector<double>& v, const char* name) {
    if (v.size() != 1) throw validation_error(std::string("solve needs exactly one value of ") + name);
    return v.front();
}

inline int cmd_solve(const RunConfig& cfg, std::ostream& out) {
    require_format(cfg);
    const int n = cfg.n > 0 ? cfg.n : 8192;
    GridPtr grid;
    double eps = 0.0;
    nlohmann::ordered_json rec;
    rec["dim"] = cfg.dim;
    if (!cfg.N_list.empty()) {
        if (!cfg.L_list.empty()) throw validation_error("give either --L or --N, not both");
        const double N = single(cfg.N_list, "N");
        const double trunc = cfg.trunc > 0.0 ? cfg.trunc : default_trunc_radii * tf_plateau_radius(cfg.dim);
        grid = make_radial_grid(cfg.dim, trunc, n);
        eps = eps_of_N(cfg.dim, N);
        rec["N"] = N;
        rec["trunc"] = trunc;
    } else {
        const TFProfile p = tf_profile(cfg.dim, cfg.rho);
        const double L = single(cfg.L_list, "L");
        grid = make_radial_grid(cfg.dim, p.domain_radius, n);
        eps = eps_of_L(cfg.dim, cfg.rho, p.domain_radius, L);
        rec["rho"] = cfg.rho;
        rec["L"] = L;
    }
    const auto res = ground_state(grid, eps, cfg.solver());
    if (cfg.format == "csv") {
        emit(cfg, out, render_profile_csv(res.field));
        return exit_ok;
    }
    rec["n"] = n;
    rec["eps"] = eps;
    rec["energy"] = res.energy.total;
    rec["kinetic"] = res.energy.kinetic;
    rec["quartic"] = res.energy.quartic;
    rec["sextic"] = res.energy.sextic;
    rec["mu_weak_form"] = res.multipliers.weak_form;
    rec["mu_pohozaev_form"] = res.multipliers.pohozaev_form;
    rec["mu_discrepancy"] = res.multipliers.discrepancy;
    rec["pohozaev_residual"] = pohozaev_residual(res.field, res.multipliers.weak_form, eps);
    rec["iterations"] = res.iterations;
    rec["residual"] = res.final_residual;
    rec["monotone"] = res.monotone_flag;
    rec["tau_reductions"] = res.tau_reductions;
    rec["r"] = std::vector<double>(res.field.grid->nodes().begin(), res.field.grid->nodes().end());
    rec["u"] = res.field.values;
    emit(cfg, out, rec.dump(2) + "\n");
    return exit_ok;
}

inline int cmd_soliton(const RunConfig& cfg, std::ostream& out) {
    require_format(cfg);
    const auto q = q_soliton(cfg.dim);
    if (cfg.format == "csv") {
        emit(cfg, out, render_profile_csv(q.profile));
        return exit_ok;
    }
    nlohmann::ordered_json rec;
    rec["dim"] = q.dim;
    rec["shoot_parameter"] = q.shoot_parameter;
    rec["mass"] = q.mass;
    rec["gradient"] = q.gradient;
    rec["quartic"] = q.quartic;
    rec["identity_residuals"] = q.identity_residuals;
    rec["radius"] = q.profile.grid->radius();
    emit(cfg, out, rec.dump(2) + "\n");
    return exit_ok;
}

inline int write_sweep(const RunConfig& cfg, std::ostream& out, const SweepTable& t) {
    std::ostringstream ss;
    if (cfg.format == "json")
        write_json(ss, t);
    else
        write_csv(ss, t);
    emit(cfg, out, ss.str());
    if (!cfg.plot_dir.empty()) write_plot_data(cfg.plot_dir, t);
    return exit_ok;
}

inline SweepOptions sweep_options(const RunConfig& cfg) {
    SweepOptions o;
    o.grid_n = cfg.n > 0 ? cfg.n : 8192;
    o.solver = cfg.solver();
    o.warm_start = cfg.warm_start;
    o.threads = cfg.threads;
    return o;
}

inline int cmd_sweep_thermo(const RunConfig& cfg, std::ostream& out) {
    require_format(cfg);
    check_density(cfg.rho);
    if (cfg.L_list.empty()) throw validation_error("sweep-thermo needs --L");
    return write_sweep(cfg, out, {SweepKind::thermo, sweep_thermo(cfg.dim, cfg.rho, cfg.L_list, sweep_options(cfg))});
}

inline int cmd_sweep_tf(const RunConfig& cfg, std::ostream& out) {
    require_format(cfg);
    if (cfg.N_list.empty()) throw validation_error("sweep-tf needs --N");
    unit_ball_volume(cfg.dim);
    const double trunc = cfg.trunc > 0.0 ? cfg.trunc : default_trunc_radii * tf_plateau_radius(cfg.dim);
    return write_sweep(cfg, out,
                       {SweepKind::tf_limit, sweep_tf_limit(cfg.dim, cfg.N_list, trunc, sweep_options(cfg))});
}

inline int cmd_report(const RunConfig& cfg, std::ostream& out) {
    if (cfg.files.empty()) throw validation_error("report needs at least one sweep file");
    // Read and validate every file before judging any of them.
    std::vector<SweepReport> reps;
    for (const auto& f : cfg.files) reps.push_back(report_sweep(read_table(f)));
    bool ok = true;
    for (std::size_t i = 0; i < reps.size(); ++i) {
        print_report(out, cfg.files[i], reps[i]);
        ok = ok && reps[i].passed();
    }
    return ok ? exit_ok : exit_report;
}

} // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    RunConfig cfg;
    CLI::App app{"Ground states of the cubic-quintic energy and their Thomas-Fermi limits", "cqtf"};
    app.fallthrough();
    app.require_subcommand(0, 1);

    std::string config_path;
    std::map<std::string, CLI::Option*> flags;
    app.add_option("--config", config_path, "flat JSON object with the same keys as the flags");
    flags["dim"] = app.add_option("--dim", cfg.dim, "spatial dimension (1, 2 or 3)");
    flags["rho"] = app.add_option("--rho", cfg.rho, "density, 0 < rho <= 3/4");
    flags["L"] = app.add_option("--L", cfg.L_list, "domain scale(s), comma separated")->delimiter(',');
    flags["N"] = app.add_option("--N", cfg.N_list, "particle number(s), comma separated")->delimiter(',');
    flags["n"] = app.add_option("--n", cfg.n, "grid cells");
    flags["tau"] = app.add_option("--tau", cfg.tau, "pseudo-time step");
    flags["tol_energy"] = app.add_option("--tol-energy", cfg.tol_energy, "energy decrease tolerance");
    flags["tol_residual"] = app.add_option("--tol-residual", cfg.tol_residual, "Euler-Lagrange residual tolerance");
    flags["max_iter"] = app.add_option("--max-iter", cfg.max_iter, "iteration cap per solve");
    flags["init"] = app.add_option("--init", cfg.init, "tf-plateau-smoothed or gaussian");
    flags["warm_start"] = app.add_flag("--warm-start,!--no-warm-start", cfg.warm_start, "warm-start along sweeps");
    flags["out"] = app.add_option("--out", cfg.out_path, "output file (default stdout)");
    flags["format"] = app.add_option("--format", cfg.format, "csv or json");
    flags["trunc"] = app.add_option("--trunc", cfg.trunc, "truncation radius of whole-space problems (default 9 plateau radii)");
    flags["plot_dir"] = app.add_option("--plot-dir", cfg.plot_dir, "directory for two-column plot data");

    const std::vector<std::pair<const char*, const char*>> commands{
        {"tf", "closed-form Thomas-Fermi profile and its discrete checks"},
        {"solve", "one ground state at given L (or N on truncated whole space)"},
        {"soliton", "radial soliton Q_d by shooting"},
        {"sweep-thermo", "sweep L on the fixed domain"},
        {"sweep-tf", "sweep N on truncated whole space"},
        {"report", "check sweep files against the rate thresholds"},
    };
    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, help] : commands) subs[name] = app.add_subcommand(name, help);
    subs["report"]->add_option("files", cfg.files, "sweep CSV or JSON files");

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_invalid;
    }

    try {
        bool command_given = false;
        for (const auto& [name, sub] : subs)
            if (sub->parsed()) {
                cfg.command = name;
                command_given = true;
            }
        if (!config_path.empty()) detail::apply_config(config_path, cfg, flags, command_given);
        cfg.threads = detail::threads_from_env();

        if (cfg.command == "tf") return detail::cmd_tf(cfg, out);
        if (cfg.command == "solve") return detail::cmd_solve(cfg, out);
        if (cfg.command == "soliton") return detail::cmd_soliton(cfg, out);
        if (cfg.command == "sweep-thermo") return detail::cmd_sweep_thermo(cfg, out);
        if (cfg.command == "sweep-tf") return detail::cmd_sweep_tf(cfg, out);
        if (cfg.command == "report") return detail::cmd_report(cfg, out);
        if (cfg.command.empty()) throw validation_error("no command given; see --help");
        throw validation_error("unknown command '" + cfg.command + "'");
    } catch (const validation_error& e) {
        err << "error: " << e.what() << '\n';
        return exit_invalid;
    } catch (const convergence_error& e) {
        err << "error: " << e.what() << '\n';
        return exit_nonconvergence;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return exit_internal;
    }
}

inline int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

} // namespace cqtf
