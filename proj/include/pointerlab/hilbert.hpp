#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>

namespace pointerlab {

using Complex = std::complex<double>;
using Vector  = Eigen::VectorXcd;
using Matrix  = Eigen::MatrixXcd;

}  // namespace pointerlab

// Dense complex linear algebra over small Hilbert spaces: states, operators,
// tensor structure, partial trace, Schmidt decomposition, information measures.
//
// Convention used throughout: inner products are conjugate-linear in the FIRST
// slot, <x,y> = sum_n conj(x_n) y_n  (Eigen's x.dot(y)).
namespace pointerlab::hilbert {

// ------------------------------ predicates ---------------------------------

// max_ij |M_ij - conj(M_ji)| <= tol
bool is_hermitian(const Matrix& m, double tol);

// max_ij |(M^dag M - I)_ij| <= tol
bool is_unitary(const Matrix& m, double tol);

// Largest singular value.
double spectral_norm(const Matrix& m);

// --------------------------- small constructors ----------------------------

Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();
Matrix sigma_plus();   // |a><b| = [[0,1],[0,0]]
Matrix sigma_minus();  // |b><a|

Vector basis_ket(Eigen::Index dim, Eigen::Index i);

// a |n> = sqrt(n) |n-1>
Matrix annihilation(Eigen::Index dim);
// a^dag |n> = sqrt(n+1) |n+1>
Matrix creation(Eigen::Index dim);

Matrix kron(const Matrix& a, const Matrix& b);

// ------------------------------ bipartite state ----------------------------

// Pure state of (2-level system) x (D-dim environment), stored branch-wise:
//   |psi> = |a> (x) A + |b> (x) B
// with A, B coefficient vectors in the environment space. Full-vector layout
// is system-major: psi[s*D + n].
struct BipartiteState {
    Vector A;
    Vector B;

    Eigen::Index env_dim() const { return A.size(); }
    double total_norm2() const { return A.squaredNorm() + B.squaredNorm(); }

    Vector full_vector() const;
    static BipartiteState from_full(const Vector& psi);
};

// A = sys[0] * env, B = sys[1] * env. Both inputs must be normalized (1e-10).
BipartiteState tensor(const Vector& sys, const Vector& env);

// 2x2 reduced density matrix of the system:
//   rho_aa = |A|^2, rho_ab = <B,A>, rho_bb = |B|^2.
Matrix partial_trace_system(const BipartiteState& state);

struct SchmidtDecomposition {
    std::array<double, 2> coefficients;    // non-negative, descending
    std::array<Vector, 2> system_states;   // orthonormal 2-vectors
    std::array<Vector, 2> env_states;      // orthonormal env vectors
    bool degenerate = false;               // |l1 - l2| < degeneracy tolerance
};

// Diagonal biorthonormal form; reconstruction sum_i l_i |s_i>|e_i> matches the
// input within 1e-8. States are reported up to global phase.
SchmidtDecomposition schmidt(const BipartiteState& state, double degeneracy_tol = 1e-6);

// Von Neumann entropy of the reduced system state, in nats. Eigenvalues in
// [-1e-12, 0) clamp to 0; anything below -1e-12 raises NumericError;
// p < 1e-15 contributes nothing.
double entanglement_entropy(const BipartiteState& state);

// Tr[rho^2] for a Hermitian unit-trace rho.
double purity(const Matrix& rho);

// U = exp(-i H t) by Hermitian eigendecomposition (unconditionally unitary).
Matrix matrix_exponential_unitary(const Matrix& h, double t);

}  // namespace pointerlab::hilbert
