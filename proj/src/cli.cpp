#include "fracmem/cli.hpp"

#include "fracmem/steering.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

namespace fracmem {

namespace {

using nlohmann::json;

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Fixed 17-significant-digit formatting: identical inputs give
// byte-identical CSV and JSON.
std::string g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string json_vec(const Vec& v) {
    std::string s = "[";
    for (int i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += g17(v(i));
    }
    return s + "]";
}

std::string json_mat(const Mat& m) {
    std::string s = "[";
    for (int i = 0; i < m.rows(); ++i) {
        if (i) s += ",";
        s += json_vec(m.row(i).transpose());
    }
    return s + "]";
}

// ---- spec parsing -------------------------------------------------------

struct ProblemSpec {
    int n = 0, m = 0;
    Mat A, B;
    double alpha = 0.5, beta = 0.5, T = 1.0;
    int N = 64;
    bool history_constant = true;
    Vec history_a;
    std::vector<Vec> history_samples;
    Vec b;
    std::string method = "gramian";
    int bump_order = -1;
    enum class Ctrl { zero, constant, sampled } ctrl = Ctrl::zero;
    Vec ctrl_value;
    std::vector<Vec> ctrl_samples;
    DensityMode ctrl_mode = DensityMode::piecewise_constant;
};

void require_keys(const json& j, const std::set<std::string>& allowed, const char* where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw SchemaError(std::string(where) + ": unknown key '" + it.key() + "'");
}

double num_field(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number())
        throw SchemaError(std::string("missing or non-numeric field '") + key + "'");
    return j.at(key).get<double>();
}

int int_field(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number_integer())
        throw SchemaError(std::string("missing or non-integer field '") + key + "'");
    return j.at(key).get<int>();
}

Vec parse_vector(const json& j, int len, const char* what) {
    if (!j.is_array() || static_cast<int>(j.size()) != len)
        throw SchemaError(std::string(what) + ": expected an array of length " +
                          std::to_string(len));
    Vec v(len);
    for (int i = 0; i < len; ++i) {
        if (!j[static_cast<size_t>(i)].is_number())
            throw SchemaError(std::string(what) + ": non-numeric entry");
        v(i) = j[static_cast<size_t>(i)].get<double>();
    }
    if (!v.allFinite()) throw SchemaError(std::string(what) + ": non-finite entry");
    return v;
}

Mat parse_matrix(const json& j, int rows, int cols, const char* what) {
    if (!j.is_array() || static_cast<int>(j.size()) != rows)
        throw SchemaError(std::string(what) + ": expected " + std::to_string(rows) +
                          " rows, got " + (j.is_array() ? std::to_string(j.size()) : "non-array"));
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i)
        m.row(i) = parse_vector(j[static_cast<size_t>(i)], cols, what).transpose();
    return m;
}

std::vector<Vec> parse_sample_rows(const json& j, int rows, int dim, const char* what) {
    if (!j.is_array() || static_cast<int>(j.size()) != rows)
        throw SchemaError(std::string(what) + ": expected " + std::to_string(rows) + " rows");
    std::vector<Vec> out;
    out.reserve(static_cast<size_t>(rows));
    for (int i = 0; i < rows; ++i)
        out.push_back(parse_vector(j[static_cast<size_t>(i)], dim, what));
    return out;
}

ProblemSpec parse_spec(const std::string& path, std::optional<int> grid_override) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open spec file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("spec is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw SchemaError("spec must be a JSON object");
    require_keys(j, {"n", "m", "A", "B", "alpha", "beta", "T", "N", "history", "b", "method",
                     "bump_order", "control"},
                 "spec");

    ProblemSpec s;
    s.n = int_field(j, "n");
    s.m = int_field(j, "m");
    if (s.n < 1 || s.m < 1) throw SchemaError("n and m must be positive");
    s.A = parse_matrix(j.at("A"), s.n, s.n, "A");
    s.B = parse_matrix(j.at("B"), s.n, s.m, "B");
    s.alpha = num_field(j, "alpha");
    if (!(s.alpha > 0.0) || !(s.alpha <= 1.0)) throw SchemaError("alpha must lie in (0, 1]");
    s.beta = num_field(j, "beta");
    if (!(s.beta >= 0.0)) throw SchemaError("beta must be >= 0");
    s.T = num_field(j, "T");
    if (!(s.T > 0.0)) throw SchemaError("T must be positive");
    s.N = int_field(j, "N");
    if (grid_override) s.N = *grid_override;
    if (s.N < 8) throw SchemaError("N must be at least 8");

    if (!j.contains("history") || !j.at("history").is_object())
        throw SchemaError("missing history object");
    const json& h = j.at("history");
    require_keys(h, {"type", "a", "values"}, "history");
    std::string htype = h.value("type", "");
    if (htype == "constant") {
        s.history_constant = true;
        s.history_a = parse_vector(h.at("a"), s.n, "history.a");
    } else if (htype == "sampled") {
        if (grid_override)
            throw SchemaError("--grid override is incompatible with a sampled history");
        s.history_constant = false;
        s.history_samples = parse_sample_rows(h.at("values"), s.N + 1, s.n, "history.values");
    } else {
        throw SchemaError("history.type must be 'constant' or 'sampled'");
    }

    s.b = j.contains("b") ? parse_vector(j.at("b"), s.n, "b") : Vec::Zero(s.n);

    if (j.contains("method")) {
        s.method = j.at("method").get<std::string>();
        if (s.method != "gramian" && s.method != "rank" && s.method != "kalman")
            throw SchemaError("method must be 'gramian', 'rank' or 'kalman'");
    }
    if (j.contains("bump_order")) {
        s.bump_order = int_field(j, "bump_order");
        if (s.bump_order < 0) throw SchemaError("bump_order must be >= 0");
    }

    if (j.contains("control")) {
        const json& c = j.at("control");
        require_keys(c, {"type", "value", "values", "mode"}, "control");
        std::string ctype = c.value("type", "");
        if (c.contains("mode")) {
            std::string mode = c.at("mode").get<std::string>();
            if (mode == "constant")
                s.ctrl_mode = DensityMode::piecewise_constant;
            else if (mode == "linear")
                s.ctrl_mode = DensityMode::piecewise_linear;
            else
                throw SchemaError("control.mode must be 'constant' or 'linear'");
        }
        if (ctype == "zero") {
            s.ctrl = ProblemSpec::Ctrl::zero;
        } else if (ctype == "constant") {
            s.ctrl = ProblemSpec::Ctrl::constant;
            s.ctrl_value = parse_vector(c.at("value"), s.m, "control.value");
        } else if (ctype == "sampled") {
            if (grid_override)
                throw SchemaError("--grid override is incompatible with a sampled control");
            s.ctrl = ProblemSpec::Ctrl::sampled;
            s.ctrl_samples = parse_sample_rows(c.at("values"), s.N + 1, s.m, "control.values");
        } else {
            throw SchemaError("control.type must be 'zero', 'constant' or 'sampled'");
        }
    }
    return s;
}

FracSystem make_system(const ProblemSpec& s) {
    TimeGrid grid(s.T, s.N);
    History hist = History::constant(Vec::Zero(s.n));
    if (s.history_constant) {
        hist = History::constant(s.history_a);
    } else {
        GridFn trace(grid, s.n);
        for (int i = 0; i <= s.N; ++i) trace.at(i) = s.history_samples[static_cast<size_t>(i)];
        hist = History::sampled(std::move(trace));
    }
    return FracSystem(s.A, s.B, s.alpha, std::move(hist));
}

Control make_control(const ProblemSpec& s, const TimeGrid& grid) {
    GridFn samples(grid, s.m);
    switch (s.ctrl) {
        case ProblemSpec::Ctrl::zero:
            break;
        case ProblemSpec::Ctrl::constant:
            for (int i = 0; i < grid.count(); ++i) samples.at(i) = s.ctrl_value;
            break;
        case ProblemSpec::Ctrl::sampled:
            for (int i = 0; i < grid.count(); ++i)
                samples.at(i) = s.ctrl_samples[static_cast<size_t>(i)];
            break;
    }
    return Control(std::move(samples), s.ctrl_mode);
}

// ---- CSV ----------------------------------------------------------------

void write_csv_row(std::ostream& out, double t, const std::vector<const GridFn*>& cols, int i) {
    out << g17(t);
    for (const GridFn* g : cols) {
        bool ok = g->defined(i) && g->at(i).allFinite();
        for (int k = 0; k < g->dim; ++k) {
            out << ',';
            if (ok) out << g17(g->at(i)(k));
        }
    }
    out << '\n';
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    cells.push_back(cur);
    return cells;
}

Control load_control_csv(const std::string& path, const TimeGrid& grid, int m, double mu,
                         DensityMode mode) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open control file '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line.rfind("t,", 0) != 0)
        throw SchemaError("control CSV must start with a 't,u_1,...' header");

    GridFn samples(grid, m);
    bool end_singular = false;
    for (int i = 0; i <= grid.intervals; ++i) {
        if (!std::getline(in, line))
            throw SchemaError("control CSV has fewer rows than the grid (expected " +
                              std::to_string(grid.count()) + ")");
        std::vector<std::string> cells = split_csv_line(line);
        if (static_cast<int>(cells.size()) != m + 1)
            throw SchemaError("control CSV row " + std::to_string(i) + " has " +
                              std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(m + 1));
        double t = std::strtod(cells[0].c_str(), nullptr);
        if (std::abs(t - grid.node(i)) > 1e-9 * std::max(1.0, grid.horizon))
            throw SchemaError("control CSV node " + std::to_string(i) +
                              " does not match the grid");
        int empties = 0;
        for (int k = 0; k < m; ++k) {
            const std::string& cell = cells[static_cast<size_t>(k) + 1];
            if (cell.empty()) {
                ++empties;
                continue;
            }
            samples.at(i)(k) = std::strtod(cell.c_str(), nullptr);
        }
        if (empties > 0) {
            if (i != grid.intervals || empties != m)
                throw SchemaError("empty control cells are only valid for the whole final row");
            if (mu <= 1.0 + 1e-12)
                throw SchemaError("final control row undefined but alpha + beta <= 1");
            end_singular = true;
        }
    }
    if (std::getline(in, line) && !line.empty())
        throw SchemaError("control CSV has more rows than the grid");
    if (end_singular) samples.mark_singular_end(1.0 - mu);
    return Control(std::move(samples), mode);
}

// ---- subcommands --------------------------------------------------------

struct CommonFlags {
    std::optional<int> grid;
    std::optional<double> tol;
    std::string method;
    bool quiet = false;
    bool timing = false;
    std::string mode = "linear";
};

double default_tolerance(const Vec& b) { return 1e-3 * (1.0 + b.lpNorm<Eigen::Infinity>()); }

int run_simulate(const std::string& spec_path, const std::string& out_path,
                 const CommonFlags& fl, std::ostream& /*out*/, std::ostream& err) {
    ProblemSpec s = parse_spec(spec_path, fl.grid);
    FracSystem sys = make_system(s);
    TimeGrid grid(s.T, s.N);
    Control u = make_control(s, grid);

    MemoryOptions mo;
    mo.allow_low_beta = true;
    if (s.beta < 1.0 - s.alpha - 1e-12 && !fl.quiet)
        err << "note: beta < 1 - alpha; memory interpreted in the extended sense\n";

    GridFn x = trajectory(sys, u, grid);
    GridFn mem = memory(sys, s.beta, u, grid, mo);

    std::ofstream csv(out_path);
    if (!csv) throw SchemaError("cannot write '" + out_path + "'");
    csv << "t";
    for (int k = 1; k <= s.n; ++k) csv << ",x_" << k;
    for (int k = 1; k <= s.n; ++k) csv << ",m_" << k;
    for (int k = 1; k <= s.m; ++k) csv << ",u_" << k;
    csv << '\n';
    for (int i = 0; i < grid.count(); ++i)
        write_csv_row(csv, grid.node(i), {&x, &mem, &u.samples}, i);
    return 0;
}

int run_gramian(const std::string& spec_path, const CommonFlags& fl, int panels,
                std::ostream& out, std::ostream& /*err*/) {
    ProblemSpec s = parse_spec(spec_path, fl.grid);
    SteeringProblem p(make_system(s), s.beta, s.b, TimeGrid(s.T, s.N));
    GramianOptions go;
    if (panels > 0) go.panels = panels;
    GramianResult g = gramian(p, go);
    out << "{\"Q\":" << json_mat(g.Q) << ",\"condition_estimate\":" << g17(g.condition_estimate)
        << ",\"min_eigenvalue_estimate\":" << g17(g.min_eigenvalue_estimate) << "}\n";
    return 0;
}

int run_steer(const std::string& spec_path, const std::string& out_path, const CommonFlags& fl,
              std::ostream& out, std::ostream& err) {
    ProblemSpec s = parse_spec(spec_path, fl.grid);
    std::string method = fl.method.empty() ? s.method : fl.method;
    if (method != "gramian" && method != "rank" && method != "kalman")
        throw SchemaError("method must be 'gramian', 'rank' or 'kalman'");
    SteeringProblem p(make_system(s), s.beta, s.b, TimeGrid(s.T, s.N));

    auto t0 = std::chrono::steady_clock::now();
    SteeringResult r = [&] {
        if (method == "gramian") return optimal_control(p);
        if (method == "rank") return rank_steering(p);
        return kalman_steering(p, s.bump_order);
    }();
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();

    std::ofstream csv(out_path);
    if (!csv) throw SchemaError("cannot write '" + out_path + "'");
    csv << "t";
    for (int k = 1; k <= s.m; ++k) csv << ",u_" << k;
    csv << '\n';
    for (int i = 0; i < p.grid.count(); ++i)
        write_csv_row(csv, p.grid.node(i), {&r.control.samples}, i);

    double tol = fl.tol ? *fl.tol : default_tolerance(s.b);
    out << "{\"method\":\"" << r.method << "\",\"residual\":" << g17(r.residual)
        << ",\"energy\":" << g17(r.energy) << ",\"gramian_condition_estimate\":"
        << (std::isnan(r.gramian_condition) ? std::string("null") : g17(r.gramian_condition))
        << ",\"grid\":{\"T\":" << g17(s.T) << ",\"N\":" << s.N << "}"
        << ",\"tolerance\":" << g17(tol) << ",\"achieved\":" << json_vec(r.achieved)
        << ",\"target\":" << json_vec(s.b);
    if (fl.timing) out << ",\"wall_time_ms\":" << g17(ms);
    out << "}\n";
    if (!fl.quiet) err << "steer: method " << r.method << ", residual " << g17(r.residual) << "\n";
    return r.residual <= tol ? 0 : 4;
}

int run_verify(const std::string& spec_path, const std::string& csv_path, const CommonFlags& fl,
               std::ostream& out, std::ostream& /*err*/) {
    ProblemSpec s = parse_spec(spec_path, fl.grid);
    SteeringProblem p(make_system(s), s.beta, s.b, TimeGrid(s.T, s.N));
    DensityMode mode = (fl.mode == "constant") ? DensityMode::piecewise_constant
                                               : DensityMode::piecewise_linear;
    Control u = load_control_csv(csv_path, p.grid, s.m, s.alpha + s.beta, mode);
    SteeringResult r{std::move(u), s.method == "gramian" ? "gramian-optimal" : "external"};
    VerifyReport rep = verify_steering(p, r);

    double tol = fl.tol ? *fl.tol : default_tolerance(s.b);
    out << "{\"residual\":" << g17(rep.residual) << ",\"energy\":" << g17(rep.energy)
        << ",\"energy_reference\":"
        << (std::isnan(rep.energy_reference) ? std::string("null") : g17(rep.energy_reference))
        << ",\"energy_gap_rel\":"
        << (std::isnan(rep.energy_gap_rel) ? std::string("null") : g17(rep.energy_gap_rel))
        << ",\"tolerance\":" << g17(tol) << ",\"achieved\":" << json_vec(rep.achieved) << "}\n";
    return rep.residual <= tol ? 0 : 4;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"fracmem: simulation and memory steering of initialized fractional "
                 "linear systems"};
    app.require_subcommand(1);

    CommonFlags fl;
    std::string spec_path, out_path, csv_path;
    int panels = 0;

    auto add_common = [&](CLI::App* cmd, bool with_tol) {
        cmd->add_option("--grid", fl.grid, "override the grid interval count N");
        cmd->add_flag("--quiet", fl.quiet, "suppress informational stderr output");
        if (with_tol) cmd->add_option("--tol", fl.tol, "residual tolerance for exit code 0");
    };

    CLI::App* sim = app.add_subcommand("simulate", "simulate trajectory and memory, write CSV");
    sim->add_option("spec", spec_path, "problem spec (JSON)")->required();
    sim->add_option("out", out_path, "output CSV path")->required();
    add_common(sim, false);

    CLI::App* gram = app.add_subcommand("gramian", "print the memory controllability Gramian");
    gram->add_option("spec", spec_path, "problem spec (JSON)")->required();
    gram->add_option("--panels", panels, "Gauss panel count (default 64)");
    add_common(gram, false);

    CLI::App* steer = app.add_subcommand("steer", "compute a steering control, write CSV");
    steer->add_option("spec", spec_path, "problem spec (JSON)")->required();
    steer->add_option("out", out_path, "output control CSV path")->required();
    steer->add_option("--method", fl.method, "gramian | rank | kalman (overrides the spec)");
    steer->add_flag("--timing", fl.timing, "include wall_time_ms in the summary");
    add_common(steer, true);

    CLI::App* verify = app.add_subcommand("verify", "simulate an external control and report");
    verify->add_option("spec", spec_path, "problem spec (JSON)")->required();
    verify->add_option("control", csv_path, "control CSV path")->required();
    verify->add_option("--mode", fl.mode, "control reconstruction: linear (default) | constant");
    add_common(verify, true);

    std::vector<const char*> argv;
    argv.push_back("fracmem");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (app.got_subcommand(sim)) return run_simulate(spec_path, out_path, fl, out, err);
        if (app.got_subcommand(gram)) return run_gramian(spec_path, fl, panels, out, err);
        if (app.got_subcommand(steer)) return run_steer(spec_path, out_path, fl, out, err);
        return run_verify(spec_path, csv_path, fl, out, err);
    } catch (const SchemaError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const SingularGramianError& e) {
        err << "error: " << e.what() << "\n";
        return 5;
    } catch (const RankDeficiencyError& e) {
        err << "error: " << e.what() << "\n";
        return 5;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }
}

int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return cli_main(args, out, err);
}

}  // namespace fracmem
