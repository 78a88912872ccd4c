#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pointerlab/evolution.hpp"
#include "pointerlab/hilbert.hpp"
#include "pointerlab/pointer.hpp"

// Structural conditions on the propagator blocks and on the Hamiltonian that
// guarantee time-independent pointer states, with the predicted basis.
namespace pointerlab::theorems {

struct TheoremReport {
    int theorem_id = 0;  // 1..4
    bool holds = false;
    // named operator-norm residuals backing the verdict
    std::vector<std::pair<std::string, double>> residuals;
    std::optional<double> fitted_phase;  // phi, when relevant
    std::optional<std::array<Vector, 2>> predicted_basis;
    // True when the prediction lives in the interaction picture only, i.e. it
    // names the preferred basis of measurement only if the system Hamiltonian
    // vanishes or is diagonal in the predicted basis.
    bool schrodinger_caveat = true;
    std::string note;

    double residual(const std::string& name) const;
};

// Theorem 1: E2 = E3 = 0 on every grid time => the working basis states are
// time-independent pointer states.
TheoremReport check_theorem1(std::span<const evolution::EvolutionDecomposition> decomps,
                             double tol);

// Theorem 2: E1 = E4 and E2 = e^{-i phi} E3 => pointer states
// (|a> pm e^{i phi/2} |b>)/sqrt(2). phi is fitted in closed form as
// -arg sum_t tr(E3^dag E2); if E2 and E3 both vanish the check refers back to
// Theorem 1.
TheoremReport check_theorem2(std::span<const evolution::EvolutionDecomposition> decomps,
                             double tol);

// Theorem 3: [H_S (x) I, H'] = 0 => preferred basis = eigenstates of H_S when
// its gap is resolvable, else the system factor of H' (requires H' of rank-one
// S (x) E block structure).
TheoremReport check_theorem3(const Matrix& h_sys, const Matrix& h_prime, double tol);

// System-basis blocks of an interaction-picture Hamiltonian on the joint
// space: H = h11 (x) |a><a| + h12 (x) |a><b| + h21 (x) |b><a| + h22 (x) |b><b|.
struct InteractionBlocks {
    double t = 0.0;
    Matrix h11, h12, h21, h22;
};

InteractionBlocks interaction_blocks(const Matrix& h_int, double t = 0.0);

// Theorem 4 (generalized): h11 = h22 and h12 = e^{-i phi} h21 at every sampled
// time => E1 = E4, E2 = e^{-i phi} E3, pointer states (|a> pm e^{-i phi}|b>)/sqrt(2).
// Note the phase convention differs from Theorem 2 (h12 phase vs s2 phase).
TheoremReport check_theorem4(std::span<const InteractionBlocks> blocks, double tol);

enum class CrossVerdict { agree, disagree, no_prediction };

struct CrossValidation {
    CrossVerdict verdict = CrossVerdict::no_prediction;
    // angular distance (deg) between each predicted ray and its scan partner
    std::array<double, 2> angle_errors_deg{0.0, 0.0};
};

// Compare a theorem's predicted basis rays against the two best scan rays.
CrossValidation cross_validate(const TheoremReport& report,
                               std::span<const pointer::PointerCandidate> scan,
                               double angle_tol_deg);

}  // namespace pointerlab::theorems
