#include "pointerlab/evolution.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

#include "pointerlab/errors.hpp"

namespace pointerlab::evolution {

TimeGrid TimeGrid::linspace(double t_max, int n_points) {
    if (n_points < 2) throw std::invalid_argument("TimeGrid: need at least 2 points");
    if (!(t_max > 0.0)) throw std::invalid_argument("TimeGrid: t_max must be positive");
    TimeGrid g;
    g.points.resize(n_points);
    for (int k = 0; k < n_points; ++k)
        g.points[k] = t_max * double(k) / double(n_points - 1);
    g.points.front() = 0.0;
    return g;
}

void TimeGrid::validate() const {
    if (points.size() < 2) throw std::invalid_argument("TimeGrid: need at least 2 points");
    if (points.front() != 0.0) throw std::invalid_argument("TimeGrid: first point must be 0");
    for (std::size_t k = 1; k < points.size(); ++k)
        if (!(points[k] > points[k - 1]))
            throw std::invalid_argument("TimeGrid: points must be strictly increasing");
}

Matrix assemble(const EvolutionDecomposition& d) {
    const Eigen::Index n = d.env_dim();
    Matrix blocks = Matrix::Zero(2 * n, 2 * n);
    blocks.topLeftCorner(n, n) = d.E1;
    blocks.topRightCorner(n, n) = d.E2;
    blocks.bottomLeftCorner(n, n) = d.E3;
    blocks.bottomRightCorner(n, n) = d.E4;
    if (d.basis.isIdentity(0.0)) return blocks;
    // undo the basis rotation: U = (R (x) I) U_blocks (R (x) I)^dag
    const Eigen::Matrix2cd& r = d.basis;
    Matrix u(2 * n, 2 * n);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            Matrix acc = Matrix::Zero(n, n);
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l)
                    acc += r(i, k) * std::conj(r(j, l)) * blocks.block(k * n, l * n, n, n);
            u.block(i * n, j * n, n, n) = acc;
        }
    return u;
}

EvolutionDecomposition decompose(const Matrix& u, double t, const Eigen::Matrix2cd& system_basis) {
    if (u.rows() != u.cols() || u.rows() % 2 != 0 || u.rows() == 0)
        throw std::invalid_argument("decompose: operator must be square with even dimension");
    if (!hilbert::is_unitary(u, 1e-9))
        throw std::invalid_argument("decompose: operator must be unitary within 1e-9");
    const Eigen::Matrix2cd g = system_basis.adjoint() * system_basis;
    if ((g - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("decompose: system basis must be orthonormal within 1e-12");

    const Eigen::Index n = u.rows() / 2;
    const Eigen::Matrix2cd& r = system_basis;
    EvolutionDecomposition d;
    d.t = t;
    d.basis = system_basis;
    Matrix blocks[2][2];
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            Matrix acc = Matrix::Zero(n, n);
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l)
                    acc += std::conj(r(k, i)) * r(l, j) * u.block(k * n, l * n, n, n);
            blocks[i][j] = std::move(acc);
        }
    d.E1 = std::move(blocks[0][0]);
    d.E2 = std::move(blocks[0][1]);
    d.E3 = std::move(blocks[1][0]);
    d.E4 = std::move(blocks[1][1]);
    return d;
}

Matrix interaction_picture(const Matrix& h_sys, const Matrix& h_env,
                           const Matrix& h_prime, double t) {
    if (h_sys.rows() != 2 || h_sys.cols() != 2)
        throw std::invalid_argument("interaction_picture: system Hamiltonian must be 2x2");
    const Eigen::Index n = h_env.rows();
    if (h_env.cols() != n || h_prime.rows() != 2 * n || h_prime.cols() != 2 * n)
        throw std::invalid_argument("interaction_picture: dimension mismatch");
    for (const Matrix* m : {&h_sys, &h_env, &h_prime})
        if (!hilbert::is_hermitian(*m, 1e-10))
            throw std::invalid_argument("interaction_picture: inputs must be Hermitian within 1e-10");

    const Matrix h0 = hilbert::kron(h_sys, Matrix::Identity(n, n)) +
                      hilbert::kron(Matrix::Identity(2, 2), h_env);
    const Matrix u0 = hilbert::matrix_exponential_unitary(h0, -t);  // e^{+i H0 t}
    return u0 * h_prime * u0.adjoint();
}

EvolutionDecomposition EvolutionSource::decomposition(double t) const {
    const Eigen::Index n = env_dim();
    EvolutionDecomposition d;
    d.t = t;
    d.E1.resize(n, n);
    d.E2.resize(n, n);
    d.E3.resize(n, n);
    d.E4.resize(n, n);
    Vector a(n), b(n), zero = Vector::Zero(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const Vector e = hilbert::basis_ket(n, k);
        apply(t, e, zero, a, b);
        d.E1.col(k) = a;
        d.E3.col(k) = b;
        apply(t, zero, e, a, b);
        d.E2.col(k) = a;
        d.E4.col(k) = b;
    }
    return d;
}

HamiltonianEvolution::HamiltonianEvolution(const Matrix& h_total) {
    if (h_total.rows() != h_total.cols() || h_total.rows() % 2 != 0 || h_total.rows() == 0)
        throw std::invalid_argument("HamiltonianEvolution: need a square operator on 2 x D space");
    if (!hilbert::is_hermitian(h_total, 1e-10))
        throw std::invalid_argument("HamiltonianEvolution: Hamiltonian must be Hermitian");
    dim_ = h_total.rows() / 2;
    Eigen::SelfAdjointEigenSolver<Matrix> es(h_total);
    if (es.info() != Eigen::Success)
        throw NumericError("HamiltonianEvolution: eigendecomposition failed");
    eigenvalues_ = es.eigenvalues();
    eigenvectors_ = es.eigenvectors();
}

Matrix HamiltonianEvolution::unitary(double t) const {
    Vector phases(eigenvalues_.size());
    for (Eigen::Index k = 0; k < eigenvalues_.size(); ++k)
        phases(k) = std::exp(Complex(0.0, -eigenvalues_(k) * t));
    return eigenvectors_ * phases.asDiagonal() * eigenvectors_.adjoint();
}

void HamiltonianEvolution::apply(double t, const Vector& a0, const Vector& b0,
                                 Vector& a_out, Vector& b_out) const {
    Vector psi(2 * dim_);
    psi.head(dim_) = a0;
    psi.tail(dim_) = b0;
    Vector coeff = eigenvectors_.adjoint() * psi;
    for (Eigen::Index k = 0; k < coeff.size(); ++k)
        coeff(k) *= std::exp(Complex(0.0, -eigenvalues_(k) * t));
    psi = eigenvectors_ * coeff;
    a_out = psi.head(dim_);
    b_out = psi.tail(dim_);
}

EvolutionDecomposition HamiltonianEvolution::decomposition(double t) const {
    return decompose(unitary(t), t);
}

std::vector<hilbert::BipartiteState> propagate(const hilbert::BipartiteState& initial,
                                               const EvolutionSource& source,
                                               const TimeGrid& grid,
                                               double leakage_tol) {
    grid.validate();
    if (std::abs(initial.total_norm2() - 1.0) > 1e-8)
        throw std::invalid_argument("propagate: initial state must be normalized");
    if (initial.env_dim() != source.env_dim())
        throw std::invalid_argument("propagate: environment dimension mismatch");

    std::vector<hilbert::BipartiteState> out;
    out.reserve(grid.size());
    for (double t : grid.points) {
        hilbert::BipartiteState s;
        source.apply(t, initial.A, initial.B, s.A, s.B);
        const double leak = std::abs(s.total_norm2() - initial.total_norm2());
        if (leak > leakage_tol)
            throw TruncationError("propagate: " + std::to_string(leak) +
                                  " of the norm left the retained subspace at t = " +
                                  std::to_string(t));
        out.push_back(std::move(s));
    }
    return out;
}

Matrix time_ordered_unitary(const std::function<Matrix(double)>& hamiltonian,
                            double t, double refine_tol) {
    if (t == 0.0) {
        const Eigen::Index n = hamiltonian(0.0).rows();
        return Matrix::Identity(n, n);
    }
    auto product = [&](int steps) {
        const double dt = t / steps;
        Matrix u;
        for (int k = 0; k < steps; ++k) {
            const Matrix uk = hilbert::matrix_exponential_unitary(
                hamiltonian((k + 0.5) * dt), dt);
            u = (k == 0) ? uk : Matrix(uk * u);
        }
        return u;
    };
    int steps = 16;
    Matrix u = product(steps);
    for (int iter = 0; iter < 14; ++iter) {
        steps *= 2;
        Matrix u2 = product(steps);
        if (hilbert::spectral_norm(u2 - u) < refine_tol) return u2;
        u = std::move(u2);
    }
    throw NumericError("time_ordered_unitary: step doubling did not converge");
}

}  // namespace pointerlab::evolution
