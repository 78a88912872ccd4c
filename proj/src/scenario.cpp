#include "pointerlab/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "pointerlab/bloch.hpp"
#include "pointerlab/errors.hpp"
#include "pointerlab/evolution.hpp"
#include "pointerlab/pointer.hpp"
#include "pointerlab/theorems.hpp"

namespace pointerlab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format17(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

// ------------------------------- config parsing -----------------------------

namespace {

const std::set<std::string> kAnalyses = {"propagate", "scan",      "trajectory", "bloch",
                                         "asymptote", "theorems",  "schmidt"};

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

void require_keys(const json& obj, const std::string& ctx,
                  std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) {
                known = true;
                break;
            }
        if (!known) fail("unknown key '" + item.key() + "' in " + ctx);
    }
}

const json& require(const json& obj, const std::string& ctx, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) fail("missing key '" + std::string(key) + "' in " + ctx);
    return *it;
}

double as_double(const json& v, const std::string& ctx) {
    if (!v.is_number()) fail(ctx + " must be a number");
    return v.get<double>();
}

int as_int(const json& v, const std::string& ctx) {
    if (!v.is_number_integer()) fail(ctx + " must be an integer");
    return v.get<int>();
}

std::string as_string(const json& v, const std::string& ctx) {
    if (!v.is_string()) fail(ctx + " must be a string");
    return v.get<std::string>();
}

double opt_double(const json& obj, const char* key, double fallback, const std::string& ctx) {
    auto it = obj.find(key);
    return it == obj.end() ? fallback : as_double(*it, ctx + "." + key);
}

Matrix parse_matrix(const json& v, const std::string& ctx) {
    if (!v.is_array() || v.empty()) fail(ctx + " must be a nonempty array of rows");
    const Eigen::Index rows = Eigen::Index(v.size());
    const Eigen::Index cols = Eigen::Index(v[0].size());
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const json& row = v[std::size_t(i)];
        if (!row.is_array() || Eigen::Index(row.size()) != cols)
            fail(ctx + " rows must have equal length");
        for (Eigen::Index j = 0; j < cols; ++j) {
            const json& e = row[std::size_t(j)];
            if (!e.is_array() || e.size() != 2)
                fail(ctx + " entries must be [re, im] pairs");
            m(i, j) = Complex(as_double(e[0], ctx), as_double(e[1], ctx));
        }
    }
    return m;
}

void parse_tolerances(const json& v, Tolerances& tol) {
    require_keys(v, "tolerances",
                 {"scalar_tol", "theorem_tol", "settle_tol", "window_fraction",
                  "polarization_floor", "angle_tol_deg", "weight_floor", "dedup_angle_deg",
                  "leakage_tol"});
    if (v.contains("scalar_tol")) tol.scalar_tol = as_double(v["scalar_tol"], "scalar_tol");
    tol.theorem_tol = opt_double(v, "theorem_tol", tol.theorem_tol, "tolerances");
    tol.settle_tol = opt_double(v, "settle_tol", tol.settle_tol, "tolerances");
    tol.window_fraction = opt_double(v, "window_fraction", tol.window_fraction, "tolerances");
    tol.polarization_floor =
        opt_double(v, "polarization_floor", tol.polarization_floor, "tolerances");
    tol.angle_tol_deg = opt_double(v, "angle_tol_deg", tol.angle_tol_deg, "tolerances");
    tol.weight_floor = opt_double(v, "weight_floor", tol.weight_floor, "tolerances");
    tol.dedup_angle_deg = opt_double(v, "dedup_angle_deg", tol.dedup_angle_deg, "tolerances");
    tol.leakage_tol = opt_double(v, "leakage_tol", tol.leakage_tol, "tolerances");
    for (const auto& [name, value] :
         std::initializer_list<std::pair<const char*, double>>{
             {"scalar_tol", tol.scalar_tol.value_or(1.0)},
             {"theorem_tol", tol.theorem_tol},
             {"settle_tol", tol.settle_tol},
             {"window_fraction", tol.window_fraction},
             {"polarization_floor", tol.polarization_floor},
             {"angle_tol_deg", tol.angle_tol_deg},
             {"weight_floor", tol.weight_floor},
             {"dedup_angle_deg", tol.dedup_angle_deg},
             {"leakage_tol", tol.leakage_tol}})
        if (!(value > 0.0)) fail(std::string("tolerance ") + name + " must be positive");
}

std::vector<std::array<Complex, 2>> parse_amplitudes(const json& v, const std::string& ctx) {
    if (!v.is_array()) fail(ctx + " must be an array of [re, im, re, im] rows");
    std::vector<std::array<Complex, 2>> out;
    for (const json& row : v) {
        if (!row.is_array() || row.size() != 4)
            fail(ctx + " rows must be [up_re, up_im, down_re, down_im]");
        out.push_back({Complex(as_double(row[0], ctx), as_double(row[1], ctx)),
                       Complex(as_double(row[2], ctx), as_double(row[3], ctx))});
    }
    return out;
}

}  // namespace

double ScenarioConfig::scalar_tolerance() const {
    if (tol.scalar_tol) return *tol.scalar_tol;
    if (model == "jcm") return pointer::jcm_scalar_tolerance(jcm.nbar);
    return pointer::kExactScalarTol;
}

ScenarioConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open config file " + path.string());
    json root;
    try {
        root = json::parse(in);
    } catch (const json::parse_error& e) {
        fail("config parse error: " + std::string(e.what()));
    }
    if (!root.is_object()) fail("config root must be an object");
    require_keys(root, "config",
                 {"model", "jcm", "sbm", "spin_spin", "custom", "env_initial", "system_initial",
                  "grid", "analyses", "tolerances", "scan", "seed", "threads"});

    ScenarioConfig cfg;
    cfg.model = as_string(require(root, "config", "model"), "model");
    if (cfg.model != "jcm" && cfg.model != "sbm" && cfg.model != "spin-spin" &&
        cfg.model != "custom-hamiltonian")
        fail("unknown model '" + cfg.model + "'");

    const std::map<std::string, std::string> model_block = {{"jcm", "jcm"},
                                                            {"sbm", "sbm"},
                                                            {"spin-spin", "spin_spin"},
                                                            {"custom-hamiltonian", "custom"}};
    for (const auto& [model, block] : model_block)
        if (root.contains(block) && cfg.model != model)
            fail("parameter block '" + block + "' does not match model '" + cfg.model + "'");

    if (cfg.model == "jcm") {
        const json& v = require(root, "config", "jcm");
        require_keys(v, "jcm", {"g_rad_per_time", "nbar", "phi_rad", "n_trunc"});
        cfg.jcm.g = as_double(require(v, "jcm", "g_rad_per_time"), "jcm.g_rad_per_time");
        cfg.jcm.nbar = as_double(require(v, "jcm", "nbar"), "jcm.nbar");
        cfg.jcm.phi = opt_double(v, "phi_rad", 0.0, "jcm");
        if (v.contains("n_trunc")) cfg.jcm.n_trunc = as_int(v["n_trunc"], "jcm.n_trunc");
    } else if (cfg.model == "sbm") {
        const json& v = require(root, "config", "sbm");
        require_keys(v, "sbm",
                     {"omega0_rad_per_time", "omega_rad_per_time", "g_re_rad_per_time",
                      "g_im_rad_per_time", "n_trunc"});
        cfg.sbm.omega0 = as_double(require(v, "sbm", "omega0_rad_per_time"), "sbm.omega0");
        cfg.sbm.omega = as_double(require(v, "sbm", "omega_rad_per_time"), "sbm.omega");
        cfg.sbm.g = Complex(opt_double(v, "g_re_rad_per_time", 0.0, "sbm"),
                            opt_double(v, "g_im_rad_per_time", 0.0, "sbm"));
        cfg.sbm.n_trunc = as_int(require(v, "sbm", "n_trunc"), "sbm.n_trunc");
    } else if (cfg.model == "spin-spin") {
        const json& v = require(root, "config", "spin_spin");
        require_keys(v, "spin_spin", {"delta0_rad_per_time", "couplings", "env_amplitudes"});
        cfg.spin_delta0 = opt_double(v, "delta0_rad_per_time", 0.0, "spin_spin");
        const json& c = require(v, "spin_spin", "couplings");
        require_keys(c, "couplings",
                     {"kind", "count", "mean_rad_per_time", "sigma_rad_per_time",
                      "values_rad_per_time"});
        cfg.couplings.kind = as_string(require(c, "couplings", "kind"), "couplings.kind");
        if (cfg.couplings.kind == "gaussian") {
            cfg.couplings.count = as_int(require(c, "couplings", "count"), "couplings.count");
            cfg.couplings.mean =
                as_double(require(c, "couplings", "mean_rad_per_time"), "couplings.mean");
            cfg.couplings.sigma =
                as_double(require(c, "couplings", "sigma_rad_per_time"), "couplings.sigma");
        } else if (cfg.couplings.kind == "explicit") {
            const json& vals = require(c, "couplings", "values_rad_per_time");
            if (!vals.is_array() || vals.empty()) fail("couplings.values_rad_per_time must be a nonempty array");
            for (const json& g : vals) cfg.couplings.values.push_back(as_double(g, "couplings"));
        } else {
            fail("couplings.kind must be 'gaussian' or 'explicit'");
        }
        if (v.contains("env_amplitudes"))
            cfg.spin_env_amplitudes = parse_amplitudes(v["env_amplitudes"], "env_amplitudes");
    } else {
        const json& v = require(root, "config", "custom");
        require_keys(v, "custom", {"h_sys", "h_env", "h_prime"});
        CustomSpec spec;
        spec.h_sys = parse_matrix(require(v, "custom", "h_sys"), "custom.h_sys");
        spec.h_env = parse_matrix(require(v, "custom", "h_env"), "custom.h_env");
        spec.h_prime = parse_matrix(require(v, "custom", "h_prime"), "custom.h_prime");
        if (spec.h_sys.rows() != 2 || spec.h_sys.cols() != 2) fail("custom.h_sys must be 2x2");
        const Eigen::Index d = spec.h_env.rows();
        if (spec.h_env.cols() != d) fail("custom.h_env must be square");
        if (spec.h_prime.rows() != 2 * d || spec.h_prime.cols() != 2 * d)
            fail("custom.h_prime must be 2D x 2D");
        for (const Matrix* m : {&spec.h_sys, &spec.h_env, &spec.h_prime})
            if (!hilbert::is_hermitian(*m, 1e-10)) fail("custom Hamiltonians must be Hermitian");
        cfg.custom = std::move(spec);
    }

    const json& env = require(root, "config", "env_initial");
    require_keys(env, "env_initial", {"kind", "n", "nu_re", "nu_im", "amplitudes"});
    cfg.env_initial.kind = as_string(require(env, "env_initial", "kind"), "env_initial.kind");
    if (cfg.env_initial.kind == "fock") {
        cfg.env_initial.fock_n = as_int(require(env, "env_initial", "n"), "env_initial.n");
        if (cfg.env_initial.fock_n < 0) fail("env_initial.n must be >= 0");
    } else if (cfg.env_initial.kind == "coherent") {
        if (env.contains("nu_re") || env.contains("nu_im"))
            cfg.env_initial.nu = Complex(opt_double(env, "nu_re", 0.0, "env_initial"),
                                         opt_double(env, "nu_im", 0.0, "env_initial"));
    } else if (cfg.env_initial.kind == "per-spin") {
        if (env.contains("amplitudes"))
            cfg.env_initial.amplitudes = parse_amplitudes(env["amplitudes"], "env_initial.amplitudes");
    } else {
        fail("env_initial.kind must be 'coherent', 'fock' or 'per-spin'");
    }

    if (root.contains("system_initial")) {
        const json& sys = root["system_initial"];
        require_keys(sys, "system_initial", {"theta_rad", "chi_rad"});
        cfg.system_initial = {as_double(require(sys, "system_initial", "theta_rad"), "theta_rad"),
                              opt_double(sys, "chi_rad", 0.0, "system_initial")};
    }

    const json& grid = require(root, "config", "grid");
    require_keys(grid, "grid", {"t_max", "points", "units"});
    cfg.grid.t_max = as_double(require(grid, "grid", "t_max"), "grid.t_max");
    cfg.grid.points = as_int(require(grid, "grid", "points"), "grid.points");
    cfg.grid.units = as_string(require(grid, "grid", "units"), "grid.units");
    if (cfg.grid.units != "absolute" && cfg.grid.units != "1/g")
        fail("grid.units must be 'absolute' or '1/g'");
    if (!(cfg.grid.t_max > 0.0)) fail("grid.t_max must be positive");
    if (cfg.grid.points < 2) fail("grid.points must be >= 2");

    const json& analyses = require(root, "config", "analyses");
    if (!analyses.is_array() || analyses.empty()) fail("analyses must be a nonempty list");
    for (const json& a : analyses) {
        const std::string name = as_string(a, "analyses entry");
        if (!kAnalyses.count(name)) fail("unknown analysis '" + name + "'");
        if (std::find(cfg.analyses.begin(), cfg.analyses.end(), name) != cfg.analyses.end())
            fail("analysis '" + name + "' listed twice");
        cfg.analyses.push_back(name);
    }

    if (root.contains("tolerances")) parse_tolerances(root["tolerances"], cfg.tol);

    if (root.contains("scan")) {
        const json& s = root["scan"];
        require_keys(s, "scan", {"resolution", "top_k"});
        if (s.contains("resolution")) cfg.scan.resolution = as_int(s["resolution"], "scan.resolution");
        if (s.contains("top_k")) cfg.scan.top_k = as_int(s["top_k"], "scan.top_k");
        if (cfg.scan.resolution < 8) fail("scan.resolution must be >= 8");
        if (cfg.scan.top_k < 1) fail("scan.top_k must be >= 1");
    }

    if (root.contains("seed")) {
        const json& s = root["seed"];
        if (!s.is_number_unsigned() && !s.is_number_integer()) fail("seed must be an integer");
        cfg.seed = s.get<std::uint64_t>();
    }
    if (root.contains("threads")) {
        cfg.threads = as_int(root["threads"], "threads");
        if (cfg.threads < 1) fail("threads must be >= 1");
    }

    // semantic checks
    if (cfg.model == "spin-spin" && cfg.couplings.kind == "gaussian" && !cfg.seed)
        fail("seed is mandatory when gaussian couplings are requested");
    for (const char* needs_sys : {"propagate", "bloch", "asymptote", "schmidt"})
        if (std::find(cfg.analyses.begin(), cfg.analyses.end(), needs_sys) != cfg.analyses.end() &&
            !cfg.system_initial)
            fail(std::string("analysis '") + needs_sys + "' requires system_initial");
    if (std::find(cfg.analyses.begin(), cfg.analyses.end(), "trajectory") != cfg.analyses.end() &&
        std::find(cfg.analyses.begin(), cfg.analyses.end(), "scan") == cfg.analyses.end())
        fail("analysis 'trajectory' requires 'scan'");
    return cfg;
}

// ------------------------------ scenario runtime ----------------------------

namespace {

struct Runtime {
    std::unique_ptr<evolution::EvolutionSource> source;
    Vector env_initial;
    evolution::TimeGrid grid;
    models::SpinSpinParams spin;  // resolved couplings (spin-spin only)
    Matrix h_sys, h_prime;        // theorem inputs
    Matrix h_env;                 // custom only (zero-dim otherwise)
    double scalar_tol = 1e-6;
};

double grid_scale(const ScenarioConfig& cfg) {
    if (cfg.grid.units == "absolute") return 1.0;
    if (cfg.model == "jcm") return cfg.jcm.g;
    if (cfg.model == "sbm") {
        const double g = std::abs(cfg.sbm.g);
        if (g == 0.0) fail("grid units '1/g' need a nonzero sbm coupling");
        return g;
    }
    fail("grid units '1/g' are defined only for the jcm and sbm models");
}

Runtime build_runtime(const ScenarioConfig& cfg) {
    Runtime rt;
    rt.grid = evolution::TimeGrid::linspace(cfg.grid.t_max / grid_scale(cfg), cfg.grid.points);
    rt.scalar_tol = cfg.scalar_tolerance();

    if (cfg.model == "jcm") {
        cfg.jcm.validate();
        rt.source = std::make_unique<models::JcmEvolution>(cfg.jcm);
        const Eigen::Index dim = cfg.jcm.trunc() + 1;
        if (cfg.env_initial.kind == "coherent") {
            rt.env_initial =
                models::coherent_state(cfg.env_initial.nu.value_or(cfg.jcm.nu()), cfg.jcm.trunc());
        } else if (cfg.env_initial.kind == "fock") {
            if (cfg.env_initial.fock_n >= dim) fail("env_initial.n exceeds the Fock truncation");
            rt.env_initial = hilbert::basis_ket(dim, cfg.env_initial.fock_n);
        } else {
            fail("jcm supports env_initial kinds 'coherent' and 'fock'");
        }
        rt.h_prime = cfg.jcm.g * (hilbert::kron(hilbert::sigma_minus(), hilbert::creation(dim)) +
                                  hilbert::kron(hilbert::sigma_plus(), hilbert::annihilation(dim)));
        // at exact resonance the splitting enters only as an overall scale
        rt.h_sys = 0.5 * cfg.jcm.g * hilbert::pauli_z();
    } else if (cfg.model == "sbm") {
        cfg.sbm.validate();
        rt.source = std::make_unique<models::SbmEvolution>(cfg.sbm);
        const Eigen::Index dim = cfg.sbm.n_trunc + 1;
        if (cfg.env_initial.kind == "fock") {
            if (cfg.env_initial.fock_n >= dim) fail("env_initial.n exceeds the Fock truncation");
            rt.env_initial = hilbert::basis_ket(dim, cfg.env_initial.fock_n);
        } else if (cfg.env_initial.kind == "coherent") {
            if (!cfg.env_initial.nu) fail("sbm coherent env_initial needs nu_re/nu_im");
            rt.env_initial = models::coherent_state(*cfg.env_initial.nu, cfg.sbm.n_trunc);
        } else {
            fail("sbm supports env_initial kinds 'fock' and 'coherent'");
        }
        const Matrix coupling = cfg.sbm.g * hilbert::creation(dim) +
                                std::conj(cfg.sbm.g) * hilbert::annihilation(dim);
        rt.h_prime = hilbert::kron(hilbert::pauli_z(), coupling);
        rt.h_sys = 0.5 * cfg.sbm.omega0 * hilbert::pauli_z();
    } else if (cfg.model == "spin-spin") {
        rt.spin.delta0 = cfg.spin_delta0;
        rt.spin.couplings = cfg.couplings.kind == "gaussian"
                                ? models::gaussian_couplings(cfg.couplings.count,
                                                             cfg.couplings.mean,
                                                             cfg.couplings.sigma, *cfg.seed)
                                : cfg.couplings.values;
        rt.spin.env_amplitudes = cfg.spin_env_amplitudes;
        rt.spin.validate();
        rt.source = std::make_unique<models::SpinSpinEvolution>(rt.spin);
        const Eigen::Index dim = Eigen::Index(1) << rt.spin.spin_count();
        if (cfg.env_initial.kind == "per-spin") {
            models::SpinSpinParams with_env = rt.spin;
            if (!cfg.env_initial.amplitudes.empty()) with_env.env_amplitudes = cfg.env_initial.amplitudes;
            rt.env_initial = models::spin_spin_env_initial(with_env);
        } else if (cfg.env_initial.kind == "fock") {
            if (cfg.env_initial.fock_n >= dim) fail("env_initial.n exceeds the bath dimension");
            rt.env_initial = hilbert::basis_ket(dim, cfg.env_initial.fock_n);
        } else {
            fail("spin-spin supports env_initial kinds 'per-spin' and 'fock'");
        }
        const Matrix h = models::spin_spin_hamiltonian(rt.spin);
        const Eigen::Index n = h.rows() / 2;
        // H' is the sz (x) bath-field part; subtract the tunneling term
        Matrix tunneling = -0.5 * rt.spin.delta0 *
                           hilbert::kron(hilbert::pauli_x(), Matrix::Identity(n, n));
        rt.h_prime = h - tunneling;
        rt.h_sys = -0.5 * rt.spin.delta0 * hilbert::pauli_x();
    } else {
        const CustomSpec& spec = *cfg.custom;
        const Eigen::Index dim = spec.h_env.rows();
        const Matrix h_total = hilbert::kron(spec.h_sys, Matrix::Identity(dim, dim)) +
                               hilbert::kron(Matrix::Identity(2, 2), spec.h_env) + spec.h_prime;
        rt.source = std::make_unique<evolution::HamiltonianEvolution>(h_total);
        if (cfg.env_initial.kind != "fock")
            fail("custom-hamiltonian supports env_initial kind 'fock'");
        if (cfg.env_initial.fock_n >= dim) fail("env_initial.n exceeds the environment dimension");
        rt.env_initial = hilbert::basis_ket(dim, cfg.env_initial.fock_n);
        rt.h_sys = spec.h_sys;
        rt.h_prime = spec.h_prime;
        rt.h_env = spec.h_env;
    }
    return rt;
}

Vector system_initial_vector(const ScenarioConfig& cfg) {
    const auto [theta, chi] = *cfg.system_initial;
    const pointer::PointerCandidate c = pointer::PointerCandidate::from_angles(theta, chi);
    Vector v(2);
    v << c.alpha, c.beta;
    return v;
}

// evenly subsample the grid (always keeping endpoints) for theorem checks
std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t cap) {
    std::vector<std::size_t> idx;
    if (n <= cap) {
        for (std::size_t k = 0; k < n; ++k) idx.push_back(k);
        return idx;
    }
    for (std::size_t k = 0; k < cap; ++k)
        idx.push_back(std::size_t(std::llround(double(k) * double(n - 1) / double(cap - 1))));
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    return idx;
}

struct FileWriter {
    explicit FileWriter(const fs::path& path) : out(path) {
        if (!out) throw NumericError("cannot open output file " + path.string());
        out.imbue(std::locale::classic());
    }
    void comment(const std::string& key, const std::string& value) {
        out << "# " << key << " " << value << "\n";
    }
    void comment(const std::string& key, double value) { comment(key, format17(value)); }
    void line(const std::string& s) { out << s << "\n"; }
    std::ofstream out;
};

std::string complex_field(const Complex& z) {
    return format17(z.real()) + "," + format17(z.imag());
}

std::string basis_line(const char* name, const Vector& v) {
    return std::string(name) + " " + complex_field(v(0)) + " " + complex_field(v(1));
}

void write_theorem_stanza(FileWriter& w, const theorems::TheoremReport& rep, double tol) {
    w.line("theorem " + std::to_string(rep.theorem_id));
    w.line(std::string("holds ") + (rep.holds ? "true" : "false"));
    for (const auto& [name, value] : rep.residuals)
        w.line("residual " + name + " " + format17(value));
    w.line(rep.fitted_phase ? "phi " + format17(*rep.fitted_phase) : "phi none");
    if (rep.predicted_basis) {
        w.line(basis_line("basis_plus", (*rep.predicted_basis)[0]));
        w.line(basis_line("basis_minus", (*rep.predicted_basis)[1]));
    }
    w.line(std::string("schrodinger_caveat ") + (rep.schrodinger_caveat ? "true" : "false"));
    w.line("note " + (rep.note.empty() ? std::string("-") : rep.note));
    w.line("tolerance theorem_tol " + format17(tol));
    w.line("");
}

const char* verdict_name(theorems::CrossVerdict v) {
    switch (v) {
        case theorems::CrossVerdict::agree: return "agree";
        case theorems::CrossVerdict::disagree: return "disagree";
        default: return "no-prediction";
    }
}

}  // namespace

void run_scenario(const ScenarioConfig& cfg, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    Runtime rt = build_runtime(cfg);
    rt.source->prepare(rt.grid);

    const bool wants_scan =
        std::find(cfg.analyses.begin(), cfg.analyses.end(), "scan") != cfg.analyses.end();

    // propagation-based analyses share one trajectory of the configured initial
    std::vector<hilbert::BipartiteState> states;
    auto ensure_states = [&] {
        if (!states.empty()) return;
        const Vector sys = system_initial_vector(cfg);
        states = evolution::propagate(hilbert::tensor(sys, rt.env_initial), *rt.source, rt.grid,
                                      cfg.tol.leakage_tol);
    };

    std::vector<pointer::PointerCandidate> candidates;
    std::vector<theorems::TheoremReport> reports;

    // fixed execution order so dependent analyses (trajectory after scan,
    // cross-validation after both) see their inputs
    const char* order[] = {"propagate", "schmidt", "bloch", "asymptote",
                           "scan",      "trajectory", "theorems"};
    std::vector<std::string> ordered;
    for (const char* name : order)
        if (std::find(cfg.analyses.begin(), cfg.analyses.end(), name) != cfg.analyses.end())
            ordered.push_back(name);

    for (const std::string& analysis : ordered) {
        if (analysis == "propagate") {
            ensure_states();
            FileWriter w(out_dir / "defect.csv");
            w.comment("model", cfg.model);
            w.comment("leakage_tol", cfg.tol.leakage_tol);
            w.line("t,defect,entropy");
            double max_defect = 0.0, max_entropy = 0.0;
            for (std::size_t k = 0; k < states.size(); ++k) {
                const double d = pointer::parallelism_defect(states[k].A, states[k].B);
                const double s = hilbert::entanglement_entropy(states[k]);
                max_defect = std::max(max_defect, d);
                max_entropy = std::max(max_entropy, s);
                w.line(format17(rt.grid.points[k]) + "," + format17(d) + "," + format17(s));
            }
            std::cout << "propagate: max defect " << format17(max_defect) << ", max entropy "
                      << format17(max_entropy) << " nats -> defect.csv\n";
        } else if (analysis == "schmidt") {
            ensure_states();
            FileWriter w(out_dir / "schmidt.csv");
            w.comment("model", cfg.model);
            w.comment("degeneracy_tol", 1e-6);
            w.line("t,lambda1,lambda2,degenerate");
            for (std::size_t k = 0; k < states.size(); ++k) {
                const auto dec = hilbert::schmidt(states[k]);
                w.line(format17(rt.grid.points[k]) + "," + format17(dec.coefficients[0]) + "," +
                       format17(dec.coefficients[1]) + "," + (dec.degenerate ? "1" : "0"));
            }
            std::cout << "schmidt: " << states.size() << " points -> schmidt.csv\n";
        } else if (analysis == "bloch") {
            ensure_states();
            const bloch::BlochTrajectory traj = bloch::trajectory(states, rt.grid);
            FileWriter w(out_dir / "bloch.csv");
            w.comment("model", cfg.model);
            w.line("t,Rx,Ry,Rz");
            for (std::size_t k = 0; k < traj.times.size(); ++k)
                w.line(format17(traj.times[k]) + "," + format17(traj.r[k].x()) + "," +
                       format17(traj.r[k].y()) + "," + format17(traj.r[k].z()));
            const auto& last = traj.r.back();
            std::cout << "bloch: final R = (" << format17(last.x()) << ", " << format17(last.y())
                      << ", " << format17(last.z()) << ") -> bloch.csv\n";
        } else if (analysis == "asymptote") {
            ensure_states();
            const bloch::BlochTrajectory traj = bloch::trajectory(states, rt.grid);
            const bloch::AsymptoteReport rep = bloch::detect_asymptote(
                traj, cfg.tol.window_fraction, cfg.tol.settle_tol, cfg.tol.polarization_floor);
            FileWriter w(out_dir / "asymptote.txt");
            w.line("asymptote");
            w.line(std::string("settled ") + (rep.settled ? "true" : "false"));
            w.line("window_begin_index " + std::to_string(rep.window_begin));
            w.line("window_begin_time " + format17(traj.times[rep.window_begin]));
            w.line("r_inf " + format17(rep.r_inf.x()) + " " + format17(rep.r_inf.y()) + " " +
                   format17(rep.r_inf.z()));
            w.line("drift " + format17(rep.drift));
            w.line(std::string("polarized ") + (rep.polarized ? "true" : "false"));
            if (rep.settled && rep.polarized) {
                w.line(basis_line("basis_plus", rep.preferred_basis[0]));
                w.line(basis_line("basis_minus", rep.preferred_basis[1]));
            }
            w.line("tolerance settle_tol " + format17(cfg.tol.settle_tol));
            w.line("tolerance window_fraction " + format17(cfg.tol.window_fraction));
            w.line("tolerance polarization_floor " + format17(cfg.tol.polarization_floor));
            std::cout << "asymptote: " << (rep.settled ? "settled" : "not settled")
                      << (rep.settled && rep.polarized ? ", basis written" : "")
                      << " -> asymptote.txt\n";
        } else if (analysis == "scan") {
            pointer::ScanOptions opts;
            opts.top_k = cfg.scan.top_k;
            opts.dedup_angle_deg = cfg.tol.dedup_angle_deg;
            opts.threads = cfg.threads;
            candidates = pointer::scan_pointer_candidates(*rt.source, rt.env_initial, rt.grid,
                                                          cfg.scan.resolution, opts);
            FileWriter w(out_dir / "candidates.csv");
            w.comment("model", cfg.model);
            w.comment("resolution", double(cfg.scan.resolution));
            w.comment("dedup_angle_deg", cfg.tol.dedup_angle_deg);
            w.line("theta,chi,alpha_re,alpha_im,beta_re,beta_im,defect_max,entropy_max");
            for (const auto& c : candidates)
                w.line(format17(c.theta) + "," + format17(c.chi) + "," + complex_field(c.alpha) +
                       "," + complex_field(c.beta) + "," + format17(c.defect_max) + "," +
                       format17(c.entropy_max));
            std::cout << "scan: " << candidates.size() << " rays, best defect_max "
                      << format17(candidates.front().defect_max) << " -> candidates.csv\n";
        } else if (analysis == "trajectory") {
            const pointer::PointerCandidate& best = candidates.front();
            const pointer::PointerTrajectory traj = pointer::pointer_trajectory(
                best, *rt.source, rt.env_initial, rt.grid, rt.scalar_tol);
            {
                FileWriter w(out_dir / "trajectory_system.csv");
                w.comment("model", cfg.model);
                w.comment("scalar_tol", rt.scalar_tol);
                w.comment("candidate_theta", best.theta);
                w.comment("candidate_chi", best.chi);
                w.line("t,a_re,a_im,b_re,b_im");
                for (std::size_t k = 0; k < traj.system_states.size(); ++k)
                    w.line(format17(rt.grid.points[k]) + "," +
                           complex_field(traj.system_states[k](0)) + "," +
                           complex_field(traj.system_states[k](1)));
            }
            {
                FileWriter w(out_dir / "trajectory_env.csv");
                w.comment("model", cfg.model);
                w.comment("scalar_tol", rt.scalar_tol);
                std::string header = "t";
                for (Eigen::Index n = 0; n < rt.env_initial.size(); ++n) {
                    header += ",c" + std::to_string(n) + "_re,c" + std::to_string(n) + "_im";
                }
                w.line(header);
                for (std::size_t k = 0; k < traj.env_states.size(); ++k) {
                    std::string row = format17(rt.grid.points[k]);
                    for (Eigen::Index n = 0; n < traj.env_states[k].size(); ++n)
                        row += "," + complex_field(traj.env_states[k](n));
                    w.line(row);
                }
            }
            std::cout << "trajectory: min reconstruction fidelity "
                      << format17(traj.min_reconstruction_fidelity)
                      << " -> trajectory_system.csv, trajectory_env.csv\n";
        } else if (analysis == "theorems") {
            const auto idx = subsample_indices(rt.grid.size(), 25);
            std::vector<evolution::EvolutionDecomposition> decomps;
            std::vector<theorems::InteractionBlocks> blocks;
            const bool custom = cfg.model == "custom-hamiltonian";
            for (std::size_t k : idx) {
                const double t = rt.grid.points[k];
                if (custom) {
                    // interaction-picture propagator e^{i H0 t} U(t)
                    const Eigen::Index dim = rt.env_initial.size();
                    const Matrix h0 = hilbert::kron(rt.h_sys, Matrix::Identity(dim, dim)) +
                                      hilbert::kron(Matrix::Identity(2, 2), rt.h_env);
                    const auto& ham = dynamic_cast<const evolution::HamiltonianEvolution&>(*rt.source);
                    const Matrix ui = hilbert::matrix_exponential_unitary(h0, -t) * ham.unitary(t);
                    decomps.push_back(evolution::decompose(ui, t));
                    blocks.push_back(theorems::interaction_blocks(
                        evolution::interaction_picture(rt.h_sys, rt.h_env, rt.h_prime, t), t));
                } else {
                    decomps.push_back(rt.source->decomposition(t));
                    if (cfg.model == "sbm") {
                        const Eigen::Index dim = rt.env_initial.size();
                        const Matrix mode = Matrix(hilbert::creation(dim) * hilbert::annihilation(dim));
                        blocks.push_back(theorems::interaction_blocks(
                            evolution::interaction_picture(rt.h_sys, cfg.sbm.omega * mode,
                                                           rt.h_prime, t),
                            t));
                    } else {
                        // resonant jcm and spin-spin interactions are already
                        // interaction-picture constant
                        blocks.push_back(theorems::interaction_blocks(rt.h_prime, t));
                    }
                }
            }
            reports.push_back(theorems::check_theorem1(decomps, cfg.tol.theorem_tol));
            reports.push_back(theorems::check_theorem2(decomps, cfg.tol.theorem_tol));
            reports.push_back(theorems::check_theorem3(rt.h_sys, rt.h_prime, cfg.tol.theorem_tol));
            reports.push_back(theorems::check_theorem4(blocks, cfg.tol.theorem_tol));

            FileWriter w(out_dir / "theorems.txt");
            for (const auto& rep : reports) write_theorem_stanza(w, rep, cfg.tol.theorem_tol);
            if (wants_scan && !candidates.empty()) {
                w.line("cross_validation");
                for (const auto& rep : reports) {
                    const auto cv =
                        theorems::cross_validate(rep, candidates, cfg.tol.angle_tol_deg);
                    w.line("theorem " + std::to_string(rep.theorem_id) + " verdict " +
                           verdict_name(cv.verdict) + " angle_errors_deg " +
                           format17(cv.angle_errors_deg[0]) + " " +
                           format17(cv.angle_errors_deg[1]));
                }
                w.line("");
            }
            for (const auto& rep : reports) {
                double worst = 0.0;
                for (const auto& [name, value] : rep.residuals) worst = std::max(worst, value);
                std::printf("Theorem %d: %s (residual %.1e)\n", rep.theorem_id,
                            rep.holds ? "HOLDS" : "fails", worst);
            }
            std::cout << "theorems: -> theorems.txt\n";
        }
    }
}

// ---------------------------------- report ----------------------------------

namespace {

void render_report(const fs::path& dir) {
    bool any = false;
    auto have = [&](const char* name) { return fs::exists(dir / name); };

    if (have("defect.csv")) {
        any = true;
        std::ifstream in(dir / "defect.csv");
        std::string line;
        double max_defect = 0.0, max_entropy = 0.0;
        std::size_t rows = 0;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#' || line[0] == 't') continue;
            double t, d, s;
            if (std::sscanf(line.c_str(), "%lg,%lg,%lg", &t, &d, &s) == 3) {
                max_defect = std::max(max_defect, d);
                max_entropy = std::max(max_entropy, s);
                ++rows;
            }
        }
        std::cout << "defect.csv: " << rows << " points, max defect " << format17(max_defect)
                  << ", max entropy " << format17(max_entropy) << " nats\n";
    }
    if (have("bloch.csv")) {
        any = true;
        std::ifstream in(dir / "bloch.csv");
        std::string line, last;
        std::size_t rows = 0;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#' || line[0] == 't') continue;
            last = line;
            ++rows;
        }
        std::cout << "bloch.csv: " << rows << " points, final row " << last << "\n";
    }
    if (have("candidates.csv")) {
        any = true;
        std::ifstream in(dir / "candidates.csv");
        std::string line;
        std::size_t shown = 0;
        std::cout << "candidates.csv (best first):\n";
        while (std::getline(in, line) && shown < 3) {
            if (line.empty() || line[0] == '#' || line[0] == 't') continue;
            std::cout << "  " << line << "\n";
            ++shown;
        }
    }
    if (have("theorems.txt")) {
        any = true;
        std::ifstream in(dir / "theorems.txt");
        std::string line;
        std::string id;
        while (std::getline(in, line)) {
            if (line.rfind("theorem ", 0) == 0) id = line.substr(8);
            if (line.rfind("holds ", 0) == 0 && !id.empty()) {
                std::cout << "Theorem " << id << ": "
                          << (line == "holds true" ? "HOLDS" : "fails") << "\n";
                id.clear();
            }
            if (line.rfind("theorem ", 0) == 0 && line.find("verdict") != std::string::npos)
                std::cout << "cross-validation: " << line << "\n";
        }
    }
    if (have("asymptote.txt")) {
        any = true;
        std::ifstream in(dir / "asymptote.txt");
        std::string line;
        while (std::getline(in, line))
            if (line.rfind("settled ", 0) == 0 || line.rfind("r_inf ", 0) == 0 ||
                line.rfind("basis_", 0) == 0)
                std::cout << "asymptote: " << line << "\n";
    }
    if (!any) fail("no analysis outputs found in " + dir.string());
}

}  // namespace

// ----------------------------------- CLI ------------------------------------

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"pointer-state laboratory for two-level systems in structured environments"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".";
    std::string threads_arg;  // empty = honor the config
    std::optional<std::uint64_t> seed_override;
    std::optional<int> resolution_override;
    std::optional<double> tol_override;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        if (needs_config)
            cmd->add_option("--config", config_path, "scenario config file")->required();
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--seed", seed_override, "override the config seed");
        cmd->add_option("--resolution", resolution_override, "override the scan resolution");
        cmd->add_option("--tol", tol_override, "override the scalar tolerance");
        cmd->add_option("--threads", threads_arg, "worker threads for the scan (int or 'auto')");
    };

    CLI::App* simulate = app.add_subcommand("simulate", "run the analyses listed in the config");
    CLI::App* find_pointers =
        app.add_subcommand("find-pointers", "scan the initial-state sphere for pointer rays");
    CLI::App* check_theorems =
        app.add_subcommand("check-theorems", "evaluate the structural theorem conditions");
    CLI::App* bloch_cmd = app.add_subcommand("bloch", "Bloch trajectory and asymptote detection");
    CLI::App* report_cmd = app.add_subcommand("report", "summarize previously written outputs");
    for (CLI::App* cmd : {simulate, find_pointers, check_theorems, bloch_cmd})
        add_common(cmd, true);
    report_cmd->add_option("--out", out_dir, "directory holding the outputs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (report_cmd->parsed()) {
            render_report(out_dir);
            return 0;
        }
        ScenarioConfig cfg = load_config(config_path);
        if (seed_override) cfg.seed = *seed_override;
        if (resolution_override) {
            if (*resolution_override < 8) fail("--resolution must be >= 8");
            cfg.scan.resolution = *resolution_override;
        }
        if (tol_override) {
            if (!(*tol_override > 0.0)) fail("--tol must be positive");
            cfg.tol.scalar_tol = *tol_override;
        }
        if (threads_arg == "auto") {
            cfg.threads = std::max(1u, std::thread::hardware_concurrency());
        } else if (!threads_arg.empty()) {
            try {
                cfg.threads = std::stoi(threads_arg);
            } catch (const std::exception&) {
                fail("--threads must be an integer or 'auto'");
            }
            if (cfg.threads < 1) fail("--threads must be >= 1");
        }

        if (find_pointers->parsed()) {
            cfg.analyses = {"scan", "trajectory"};
        } else if (check_theorems->parsed()) {
            cfg.analyses = {"theorems"};
        } else if (bloch_cmd->parsed()) {
            if (!cfg.system_initial) fail("bloch subcommand requires system_initial in the config");
            cfg.analyses = {"bloch", "asymptote"};
        }
        run_scenario(cfg, out_dir);
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const TruncationError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const PointerBrokenError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace pointerlab::cli
