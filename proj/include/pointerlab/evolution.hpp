#pragma once

#include <functional>
#include <vector>

#include "pointerlab/hilbert.hpp"

// Decomposition of a joint propagator into the four environment-space blocks
//   U = E1 (x) |a><a| + E2 (x) |a><b| + E3 (x) |b><a| + E4 (x) |b><b|,
// plus branch-wise propagation of bipartite states on a time grid.
namespace pointerlab::evolution {

struct TimeGrid {
    std::vector<double> points;  // strictly increasing, points[0] == 0, size >= 2

    static TimeGrid linspace(double t_max, int n_points);
    void validate() const;
    std::size_t size() const { return points.size(); }
};

struct EvolutionDecomposition {
    double t = 0.0;
    Matrix E1, E2, E3, E4;
    // Columns are the system basis kets |a>, |b> this decomposition refers to.
    Eigen::Matrix2cd basis = Eigen::Matrix2cd::Identity();

    Eigen::Index env_dim() const { return E1.rows(); }
};

// Rebuild the full 2D x 2D unitary (system-major ordering).
Matrix assemble(const EvolutionDecomposition& d);

// Extract the blocks of U relative to an orthonormal system basis.
// U must be unitary within 1e-9; round trip with assemble is exact to 1e-12.
EvolutionDecomposition decompose(const Matrix& u, double t = 0.0,
                                 const Eigen::Matrix2cd& system_basis = Eigen::Matrix2cd::Identity());

// H_int(t) = e^{i H0 t} H' e^{-i H0 t} with H0 = H_S (x) I + I (x) H_E.
Matrix interaction_picture(const Matrix& h_sys, const Matrix& h_env,
                           const Matrix& h_prime, double t);

// Supplies the branch map at any time, measured from t = 0:
//   A(t) = E1(t) A0 + E2(t) B0,   B(t) = E3(t) A0 + E4(t) B0.
// apply() must be const and safe to call concurrently after prepare().
class EvolutionSource {
public:
    virtual ~EvolutionSource() = default;
    virtual Eigen::Index env_dim() const = 0;
    virtual void apply(double t, const Vector& a0, const Vector& b0,
                       Vector& a_out, Vector& b_out) const = 0;
    virtual EvolutionDecomposition decomposition(double t) const;
    virtual void prepare(const TimeGrid&) {}
};

// Constant total Hamiltonian on the joint space, U(t) = exp(-i H t).
class HamiltonianEvolution final : public EvolutionSource {
public:
    explicit HamiltonianEvolution(const Matrix& h_total);

    Eigen::Index env_dim() const override { return dim_; }
    void apply(double t, const Vector& a0, const Vector& b0,
               Vector& a_out, Vector& b_out) const override;
    EvolutionDecomposition decomposition(double t) const override;

    Matrix unitary(double t) const;

private:
    Eigen::Index dim_ = 0;
    Eigen::VectorXd eigenvalues_;
    Matrix eigenvectors_;
};

// Evolve a normalized initial state over the grid. Raises TruncationError when
// more than leakage_tol of the norm escapes the retained subspace.
std::vector<hilbert::BipartiteState> propagate(const hilbert::BipartiteState& initial,
                                               const EvolutionSource& source,
                                               const TimeGrid& grid,
                                               double leakage_tol = 1e-6);

// Time-ordered product for a time-dependent Hamiltonian: midpoint-rule steps,
// doubled until the operator changes by less than refine_tol in spectral norm.
Matrix time_ordered_unitary(const std::function<Matrix(double)>& hamiltonian,
                            double t, double refine_tol = 1e-9);

}  // namespace pointerlab::evolution
