#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pointerlab/bloch.hpp"
#include "pointerlab/errors.hpp"
#include "pointerlab/evolution.hpp"
#include "pointerlab/hilbert.hpp"
#include "pointerlab/models.hpp"
#include "pointerlab/pointer.hpp"
#include "pointerlab/theorems.hpp"

namespace py = pybind11;
using namespace pointerlab;

namespace {

// owns the source polymorphically so python sees a single opaque handle
struct Evolution {
    std::unique_ptr<evolution::EvolutionSource> source;
};

Evolution make_jcm(const models::JCMParams& p) {
    return Evolution{std::make_unique<models::JcmEvolution>(p)};
}
Evolution make_sbm(const models::SBMParams& p) {
    return Evolution{std::make_unique<models::SbmEvolution>(p)};
}
Evolution make_spin_spin(const models::SpinSpinParams& p) {
    return Evolution{std::make_unique<models::SpinSpinEvolution>(p)};
}
Evolution make_hamiltonian(const Matrix& h) {
    return Evolution{std::make_unique<evolution::HamiltonianEvolution>(h)};
}

const char* g_status_name(pointer::GStatus s) {
    switch (s) {
        case pointer::GStatus::scalar: return "scalar";
        case pointer::GStatus::not_scalar: return "not-scalar";
        default: return "degenerate-branch";
    }
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "pointer-state laboratory: branch propagation, sphere scans, theorem checks";

    py::register_exception<TruncationError>(m, "TruncationError");
    py::register_exception<NumericError>(m, "NumericError");
    py::register_exception<PointerBrokenError>(m, "PointerBrokenError");

    // ----------------------------- hilbert ---------------------------------
    py::class_<hilbert::BipartiteState>(m, "BipartiteState")
        .def(py::init([](const Vector& a, const Vector& b) {
                 if (a.size() != b.size())
                     throw std::invalid_argument("branch lengths differ");
                 return hilbert::BipartiteState{a, b};
             }),
             py::arg("A"), py::arg("B"))
        .def_readwrite("A", &hilbert::BipartiteState::A)
        .def_readwrite("B", &hilbert::BipartiteState::B)
        .def_property_readonly("env_dim", &hilbert::BipartiteState::env_dim)
        .def("total_norm2", &hilbert::BipartiteState::total_norm2)
        .def("full_vector", &hilbert::BipartiteState::full_vector);

    py::class_<hilbert::SchmidtDecomposition>(m, "SchmidtDecomposition")
        .def_readonly("coefficients", &hilbert::SchmidtDecomposition::coefficients)
        .def_readonly("system_states", &hilbert::SchmidtDecomposition::system_states)
        .def_readonly("env_states", &hilbert::SchmidtDecomposition::env_states)
        .def_readonly("degenerate", &hilbert::SchmidtDecomposition::degenerate);

    m.def("tensor", &hilbert::tensor, py::arg("sys"), py::arg("env"));
    m.def("partial_trace_system", &hilbert::partial_trace_system);
    m.def("schmidt", &hilbert::schmidt, py::arg("state"), py::arg("degeneracy_tol") = 1e-6);
    m.def("entanglement_entropy", &hilbert::entanglement_entropy);
    m.def("purity", &hilbert::purity);
    m.def("matrix_exponential_unitary", &hilbert::matrix_exponential_unitary,
          py::arg("H"), py::arg("t"));
    m.def("is_hermitian", &hilbert::is_hermitian, py::arg("M"), py::arg("tol"));
    m.def("is_unitary", &hilbert::is_unitary, py::arg("M"), py::arg("tol"));

    // ----------------------------- models ----------------------------------
    py::class_<models::JCMParams>(m, "JCMParams")
        .def(py::init([](double g, double nbar, double phi, int n_trunc) {
                 models::JCMParams p{g, nbar, phi, n_trunc};
                 p.validate();
                 return p;
             }),
             py::arg("g") = 1.0, py::arg("nbar") = 0.0, py::arg("phi") = 0.0,
             py::arg("n_trunc") = -1)
        .def_readwrite("g", &models::JCMParams::g)
        .def_readwrite("nbar", &models::JCMParams::nbar)
        .def_readwrite("phi", &models::JCMParams::phi)
        .def_readwrite("n_trunc", &models::JCMParams::n_trunc)
        .def_property_readonly("trunc", &models::JCMParams::trunc)
        .def_property_readonly("nu", &models::JCMParams::nu)
        .def_property_readonly("revival_time", &models::JCMParams::revival_time);

    py::class_<models::SBMParams>(m, "SBMParams")
        .def(py::init([](double omega0, double omega, Complex g, int n_trunc) {
                 models::SBMParams p{omega0, omega, g, n_trunc};
                 p.validate();
                 return p;
             }),
             py::arg("omega0") = 0.0, py::arg("omega") = 1.0, py::arg("g") = Complex(0.0),
             py::arg("n_trunc") = 63)
        .def_readwrite("omega0", &models::SBMParams::omega0)
        .def_readwrite("omega", &models::SBMParams::omega)
        .def_readwrite("g", &models::SBMParams::g)
        .def_readwrite("n_trunc", &models::SBMParams::n_trunc)
        .def("lam", &models::SBMParams::lambda, py::arg("t"));

    py::class_<models::SpinSpinParams>(m, "SpinSpinParams")
        .def(py::init([](double delta0, std::vector<double> couplings,
                         std::vector<std::array<Complex, 2>> amplitudes) {
                 models::SpinSpinParams p{delta0, std::move(couplings), std::move(amplitudes)};
                 p.validate();
                 return p;
             }),
             py::arg("delta0"), py::arg("couplings"),
             py::arg("env_amplitudes") = std::vector<std::array<Complex, 2>>{})
        .def_readwrite("delta0", &models::SpinSpinParams::delta0)
        .def_readwrite("couplings", &models::SpinSpinParams::couplings)
        .def_readwrite("env_amplitudes", &models::SpinSpinParams::env_amplitudes);

    m.def("coherent_state",
          [](Complex nu, int n_trunc) { return models::coherent_state(nu, n_trunc); },
          py::arg("nu"), py::arg("n_trunc"));
    m.def("default_fock_trunc", &models::default_fock_trunc);
    m.def("displacement_operator", &models::displacement_operator, py::arg("lam"), py::arg("dim"));
    m.def("spin_spin_hamiltonian", &models::spin_spin_hamiltonian);
    m.def("spin_spin_env_initial", &models::spin_spin_env_initial);
    m.def("gaussian_couplings", &models::gaussian_couplings, py::arg("n"), py::arg("mean"),
          py::arg("sigma"), py::arg("seed"));

    // ---------------------------- evolution ---------------------------------
    py::class_<evolution::TimeGrid>(m, "TimeGrid")
        .def(py::init([](std::vector<double> points) {
                 evolution::TimeGrid g{std::move(points)};
                 g.validate();
                 return g;
             }),
             py::arg("points"))
        .def_static("linspace", &evolution::TimeGrid::linspace, py::arg("t_max"),
                    py::arg("points"))
        .def_readonly("points", &evolution::TimeGrid::points);

    py::class_<evolution::EvolutionDecomposition>(m, "EvolutionDecomposition")
        .def_readonly("t", &evolution::EvolutionDecomposition::t)
        .def_readonly("E1", &evolution::EvolutionDecomposition::E1)
        .def_readonly("E2", &evolution::EvolutionDecomposition::E2)
        .def_readonly("E3", &evolution::EvolutionDecomposition::E3)
        .def_readonly("E4", &evolution::EvolutionDecomposition::E4);

    py::class_<Evolution>(m, "Evolution")
        .def("env_dim", [](const Evolution& e) { return e.source->env_dim(); })
        .def("apply",
             [](const Evolution& e, double t, const Vector& a0, const Vector& b0) {
                 Vector a, b;
                 e.source->apply(t, a0, b0, a, b);
                 return hilbert::BipartiteState{a, b};
             },
             py::arg("t"), py::arg("A0"), py::arg("B0"))
        .def("decomposition",
             [](const Evolution& e, double t) { return e.source->decomposition(t); },
             py::arg("t"));

    m.def("jcm_evolution", &make_jcm);
    m.def("sbm_evolution", &make_sbm);
    m.def("spin_spin_evolution", &make_spin_spin);
    m.def("hamiltonian_evolution", &make_hamiltonian);
    m.def("jcm_env_operators", &models::jcm_env_operators, py::arg("params"), py::arg("t"));
    m.def("sbm_env_operators", &models::sbm_evolution, py::arg("params"), py::arg("t"));

    m.def("decompose", &evolution::decompose, py::arg("U"), py::arg("t") = 0.0,
          py::arg("system_basis") = Eigen::Matrix2cd(Eigen::Matrix2cd::Identity()));
    m.def("assemble", &evolution::assemble);
    m.def("interaction_picture", &evolution::interaction_picture, py::arg("H_sys"),
          py::arg("H_env"), py::arg("H_prime"), py::arg("t"));
    m.def("propagate",
          [](const hilbert::BipartiteState& initial, const Evolution& e,
             const evolution::TimeGrid& grid, double leakage_tol) {
              return evolution::propagate(initial, *e.source, grid, leakage_tol);
          },
          py::arg("initial"), py::arg("evolution"), py::arg("grid"),
          py::arg("leakage_tol") = 1e-6);

    // ------------------------------ pointer ---------------------------------
    py::class_<pointer::PointerCandidate>(m, "PointerCandidate")
        .def_static("from_angles", &pointer::PointerCandidate::from_angles, py::arg("theta"),
                    py::arg("chi"))
        .def_readonly("theta", &pointer::PointerCandidate::theta)
        .def_readonly("chi", &pointer::PointerCandidate::chi)
        .def_readonly("alpha", &pointer::PointerCandidate::alpha)
        .def_readonly("beta", &pointer::PointerCandidate::beta)
        .def_readonly("defect_max", &pointer::PointerCandidate::defect_max)
        .def_readonly("entropy_max", &pointer::PointerCandidate::entropy_max)
        .def("bloch", &pointer::PointerCandidate::bloch);

    py::class_<pointer::PointerTrajectory>(m, "PointerTrajectory")
        .def_readonly("system_states", &pointer::PointerTrajectory::system_states)
        .def_readonly("env_states", &pointer::PointerTrajectory::env_states)
        .def_readonly("g_values", &pointer::PointerTrajectory::g_values)
        .def_readonly("min_reconstruction_fidelity",
                      &pointer::PointerTrajectory::min_reconstruction_fidelity);

    py::class_<pointer::JcmPointerStates>(m, "JcmPointerStates")
        .def_readonly("sys_plus", &pointer::JcmPointerStates::sys_plus)
        .def_readonly("sys_minus", &pointer::JcmPointerStates::sys_minus)
        .def_readonly("env_plus", &pointer::JcmPointerStates::env_plus)
        .def_readonly("env_minus", &pointer::JcmPointerStates::env_minus);

    py::class_<pointer::GProfile>(m, "GProfile")
        .def_readonly("t", &pointer::GProfile::t)
        .def_readonly("indices", &pointer::GProfile::indices)
        .def_readonly("ratios", &pointer::GProfile::ratios)
        .def_readonly("weights", &pointer::GProfile::weights)
        .def_readonly("scalar_estimate", &pointer::GProfile::scalar_estimate)
        .def_readonly("dispersion", &pointer::GProfile::dispersion);

    m.def("parallelism_defect", &pointer::parallelism_defect, py::arg("A"), py::arg("B"));
    m.def("g_scalar",
          [](const Vector& a, const Vector& b, double tol) {
              const pointer::GScalar g = pointer::g_scalar(a, b, tol);
              return py::make_tuple(g_status_name(g.status), g.value);
          },
          py::arg("A"), py::arg("B"), py::arg("tol"));
    m.def("jcm_g_profile",
          [](const models::JCMParams& p, const Vector& env, Complex alpha, Complex beta,
             double t, double weight_floor) {
              return pointer::g_profile_ladder(models::jcm_ladder_coeffs(p.g), env, alpha, beta,
                                               t, weight_floor);
          },
          py::arg("params"), py::arg("env_coeffs"), py::arg("alpha"), py::arg("beta"),
          py::arg("t"), py::arg("weight_floor") = 1e-8);
    m.def("scan_pointer_candidates",
          [](Evolution& e, const Vector& env, const evolution::TimeGrid& grid, int resolution,
             int top_k, double dedup_angle_deg, int threads) {
              pointer::ScanOptions opts;
              opts.top_k = top_k;
              opts.dedup_angle_deg = dedup_angle_deg;
              opts.threads = threads;
              return pointer::scan_pointer_candidates(*e.source, env, grid, resolution, opts);
          },
          py::arg("evolution"), py::arg("env_initial"), py::arg("grid"),
          py::arg("resolution") = 32, py::arg("top_k") = 8, py::arg("dedup_angle_deg") = 1.0,
          py::arg("threads") = 1);
    m.def("pointer_trajectory",
          [](const pointer::PointerCandidate& c, Evolution& e, const Vector& env,
             const evolution::TimeGrid& grid, double scalar_tol) {
              return pointer::pointer_trajectory(c, *e.source, env, grid, scalar_tol);
          },
          py::arg("candidate"), py::arg("evolution"), py::arg("env_initial"), py::arg("grid"),
          py::arg("scalar_tol"));
    m.def("analytic_jcm_pointers", &pointer::analytic_jcm_pointers, py::arg("params"),
          py::arg("t"), py::arg("min_nbar") = 25.0);
    m.def("jcm_scalar_tolerance", &pointer::jcm_scalar_tolerance);

    // ------------------------------- bloch ----------------------------------
    py::class_<bloch::AsymptoteReport>(m, "AsymptoteReport")
        .def_readonly("settled", &bloch::AsymptoteReport::settled)
        .def_readonly("window_begin", &bloch::AsymptoteReport::window_begin)
        .def_readonly("r_inf", &bloch::AsymptoteReport::r_inf)
        .def_readonly("drift", &bloch::AsymptoteReport::drift)
        .def_readonly("polarized", &bloch::AsymptoteReport::polarized)
        .def_readonly("preferred_basis", &bloch::AsymptoteReport::preferred_basis);

    m.def("bloch_vector", &bloch::bloch_vector);
    m.def("density_from_bloch", &bloch::density_from_bloch);
    m.def("bloch_trajectory",
          [](const std::vector<hilbert::BipartiteState>& states,
             const evolution::TimeGrid& grid) {
              const bloch::BlochTrajectory traj = bloch::trajectory(states, grid);
              return py::make_tuple(traj.times, traj.r);
          },
          py::arg("states"), py::arg("grid"));
    m.def("detect_asymptote",
          [](const std::vector<double>& times, const std::vector<Eigen::Vector3d>& r,
             double window_fraction, double settle_tol, double polarization_floor) {
              return bloch::detect_asymptote(bloch::BlochTrajectory{times, r}, window_fraction,
                                             settle_tol, polarization_floor);
          },
          py::arg("times"), py::arg("r"), py::arg("window_fraction") = 0.25,
          py::arg("settle_tol") = 0.02, py::arg("polarization_floor") = 0.05);

    // ------------------------------ theorems --------------------------------
    py::class_<theorems::TheoremReport>(m, "TheoremReport")
        .def_readonly("theorem_id", &theorems::TheoremReport::theorem_id)
        .def_readonly("holds", &theorems::TheoremReport::holds)
        .def_readonly("residuals", &theorems::TheoremReport::residuals)
        .def_readonly("fitted_phase", &theorems::TheoremReport::fitted_phase)
        .def_readonly("predicted_basis", &theorems::TheoremReport::predicted_basis)
        .def_readonly("schrodinger_caveat", &theorems::TheoremReport::schrodinger_caveat)
        .def_readonly("note", &theorems::TheoremReport::note);

    py::class_<theorems::InteractionBlocks>(m, "InteractionBlocks")
        .def_readonly("t", &theorems::InteractionBlocks::t)
        .def_readonly("h11", &theorems::InteractionBlocks::h11)
        .def_readonly("h12", &theorems::InteractionBlocks::h12)
        .def_readonly("h21", &theorems::InteractionBlocks::h21)
        .def_readonly("h22", &theorems::InteractionBlocks::h22);

    m.def("check_theorem1",
          [](const std::vector<evolution::EvolutionDecomposition>& d, double tol) {
              return theorems::check_theorem1(d, tol);
          },
          py::arg("decompositions"), py::arg("tol"));
    m.def("check_theorem2",
          [](const std::vector<evolution::EvolutionDecomposition>& d, double tol) {
              return theorems::check_theorem2(d, tol);
          },
          py::arg("decompositions"), py::arg("tol"));
    m.def("check_theorem3", &theorems::check_theorem3, py::arg("H_sys"), py::arg("H_prime"),
          py::arg("tol"));
    m.def("interaction_blocks", &theorems::interaction_blocks, py::arg("H_int"),
          py::arg("t") = 0.0);
    m.def("check_theorem4",
          [](const std::vector<theorems::InteractionBlocks>& b, double tol) {
              return theorems::check_theorem4(b, tol);
          },
          py::arg("blocks"), py::arg("tol"));
    m.def("cross_validate",
          [](const theorems::TheoremReport& rep,
             const std::vector<pointer::PointerCandidate>& scan, double angle_tol_deg) {
              const auto cv = theorems::cross_validate(rep, scan, angle_tol_deg);
              const char* name = cv.verdict == theorems::CrossVerdict::agree ? "agree"
                                 : cv.verdict == theorems::CrossVerdict::disagree
                                     ? "disagree"
                                     : "no-prediction";
              return py::make_tuple(name, cv.angle_errors_deg);
          },
          py::arg("report"), py::arg("scan"), py::arg("angle_tol_deg"));
}
