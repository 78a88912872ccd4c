#pragma once

#include <vector>

#include "pointerlab/evolution.hpp"
#include "pointerlab/hilbert.hpp"
#include "pointerlab/models.hpp"

// Pointer-state machinery: the branch-parallelism test, the per-index ratio
// profile for ladder models, the initial-state sphere scan, and analytic
// Jaynes-Cummings references.
namespace pointerlab::pointer {

// 1 - |<A,B>|^2 / (|A|^2 |B|^2); zero iff the joint state is a product.
// If exactly one branch vanishes the state is a basis product and the defect
// is 0; two vanishing branches are invalid.
double parallelism_defect(const Vector& a, const Vector& b);

enum class GStatus { scalar, not_scalar, degenerate_branch };

struct GScalar {
    GStatus status = GStatus::not_scalar;
    // The unique scalar with A = G B (valid when status == scalar).
    Complex value{0.0, 0.0};
};

// G = <B,A>/|B|^2 when the branches are parallel within tol; not_scalar
// otherwise. A vanishing |b> branch yields degenerate_branch (the system
// state is the bare |a>).
GScalar g_scalar(const Vector& a, const Vector& b, double tol);

struct GProfile {
    double t = 0.0;
    std::vector<int> indices;      // environment indices n > 0 retained
    std::vector<Complex> ratios;   // G_n
    std::vector<double> weights;   // |c_n|^2
    Complex scalar_estimate{0.0, 0.0};
    double dispersion = 0.0;       // weighted rel. spread; 0 iff all ratios equal
};

// Per-index ratios G_n = (alpha c_n f1(n) + beta c_{n+1} f2(n+1)) /
// (alpha c_{n-1} f3(n-1) + beta c_n f4(n)) for every n > 0 whose weight
// |c_n|^2 clears weight_floor * max_m |c_m|^2.
GProfile g_profile_ladder(const models::LadderCoeffs& coeffs, const Vector& env_coeffs,
                          Complex alpha, Complex beta, double t,
                          double weight_floor = 1e-8);

struct PointerCandidate {
    double theta = 0.0;  // (alpha, beta) = (cos(theta/2), e^{i chi} sin(theta/2))
    double chi = 0.0;
    Complex alpha{1.0, 0.0};
    Complex beta{0.0, 0.0};
    double defect_max = 0.0;   // max parallelism defect over the time grid
    double entropy_max = 0.0;  // max entanglement entropy over the grid

    static PointerCandidate from_angles(double theta, double chi);
    Eigen::Vector3d bloch() const;
};

struct ScanOptions {
    int top_k = 8;                  // rays refined and returned
    double dedup_angle_deg = 1.0;   // great-circle merge radius
    int threads = 1;
    int max_refine_steps = 200;
};

// Grid the (theta, chi) sphere at the given resolution, score every cell by
// defect_max over the grid, locally refine the best rays (derivative-free
// compass search), and return candidates sorted by (defect_max, entropy_max,
// theta, chi). Equivalent rays are merged. Deterministic for any thread count.
std::vector<PointerCandidate> scan_pointer_candidates(evolution::EvolutionSource& source,
                                                      const Vector& env_initial,
                                                      const evolution::TimeGrid& grid,
                                                      int resolution,
                                                      const ScanOptions& opts = {});

struct PointerTrajectory {
    std::vector<Vector> system_states;  // normalized 2-vectors per grid time
    std::vector<Vector> env_states;     // normalized environment partners
    std::vector<Complex> g_values;      // scalar G(t); inf where |b> branch vanishes
    double min_reconstruction_fidelity = 1.0;
};

// Follow a candidate along the grid, extracting system states from G(t) and
// environment states from the renormalized |b> branch. Raises
// PointerBrokenError naming the first time the defect exceeds scalar_tol.
PointerTrajectory pointer_trajectory(const PointerCandidate& candidate,
                                     evolution::EvolutionSource& source,
                                     const Vector& env_initial,
                                     const evolution::TimeGrid& grid,
                                     double scalar_tol);

struct JcmPointerStates {
    Vector sys_plus, sys_minus;  // 2-vectors
    Vector env_plus, env_minus;  // truncated Fock vectors, normalized
};

// Closed-form large-nbar pointer states of the resonant JCM:
//   sys_pm = (e^{-i phi} e^{mp i g t/(2 sqrt(nbar))}|a> pm |b>)/sqrt(2),
//   env_pm = sum_n c_n e^{mp i g t sqrt(n)} |n>.
// Valid asymptotically; callers working below min_nbar must lower the bound
// explicitly.
JcmPointerStates analytic_jcm_pointers(const models::JCMParams& p, double t,
                                       double min_nbar = 25.0);

// Scalar tolerance defaults: exact-symmetry models use 1e-6; the JCM result
// is asymptotic in nbar, so its tolerance scales as 5/sqrt(nbar).
inline constexpr double kExactScalarTol = 1e-6;
double jcm_scalar_tolerance(double nbar);

}  // namespace pointerlab::pointer
