#include "pointerlab/hilbert.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>

#include "pointerlab/errors.hpp"

namespace pointerlab::hilbert {

bool is_hermitian(const Matrix& m, double tol) {
    if (m.rows() != m.cols()) return false;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool is_unitary(const Matrix& m, double tol) {
    if (m.rows() != m.cols()) return false;
    Matrix g = m.adjoint() * m;
    g.diagonal().array() -= 1.0;
    return g.cwiseAbs().maxCoeff() <= tol;
}

double spectral_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    return Eigen::BDCSVD<Matrix>(m).singularValues()(0);
}

Matrix pauli_x() {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

Matrix pauli_y() {
    Matrix m(2, 2);
    m << 0, Complex(0, -1), Complex(0, 1), 0;
    return m;
}

Matrix pauli_z() {
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

Matrix sigma_plus() {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 1) = 1.0;
    return m;
}

Matrix sigma_minus() {
    Matrix m = Matrix::Zero(2, 2);
    m(1, 0) = 1.0;
    return m;
}

Vector basis_ket(Eigen::Index dim, Eigen::Index i) {
    if (dim <= 0) throw std::invalid_argument("basis_ket: dim must be positive");
    if (i < 0 || i >= dim) throw std::out_of_range("basis_ket: index out of range");
    Vector v = Vector::Zero(dim);
    v(i) = 1.0;
    return v;
}

Matrix annihilation(Eigen::Index dim) {
    if (dim <= 0) throw std::invalid_argument("annihilation: dim must be positive");
    Matrix m = Matrix::Zero(dim, dim);
    for (Eigen::Index n = 1; n < dim; ++n) m(n - 1, n) = std::sqrt(double(n));
    return m;
}

Matrix creation(Eigen::Index dim) {
    return annihilation(dim).adjoint();
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Vector BipartiteState::full_vector() const {
    Vector psi(2 * env_dim());
    psi.head(env_dim()) = A;
    psi.tail(env_dim()) = B;
    return psi;
}

BipartiteState BipartiteState::from_full(const Vector& psi) {
    if (psi.size() % 2 != 0 || psi.size() == 0)
        throw std::invalid_argument("from_full: vector length must be 2*env_dim");
    const Eigen::Index d = psi.size() / 2;
    return BipartiteState{psi.head(d), psi.tail(d)};
}

BipartiteState tensor(const Vector& sys, const Vector& env) {
    if (sys.size() != 2) throw std::invalid_argument("tensor: system vector must have dim 2");
    if (env.size() == 0) throw std::invalid_argument("tensor: environment dim must be positive");
    if (std::abs(sys.norm() - 1.0) > 1e-10 || std::abs(env.norm() - 1.0) > 1e-10)
        throw std::invalid_argument("tensor: inputs must be normalized within 1e-10");
    return BipartiteState{sys(0) * env, sys(1) * env};
}

Matrix partial_trace_system(const BipartiteState& state) {
    if (std::abs(state.total_norm2() - 1.0) > 1e-8)
        throw std::invalid_argument("partial_trace_system: state must have unit norm within 1e-8");
    Matrix rho(2, 2);
    rho(0, 0) = state.A.squaredNorm();
    rho(1, 1) = state.B.squaredNorm();
    rho(0, 1) = state.B.dot(state.A);  // <B,A>
    rho(1, 0) = std::conj(rho(0, 1));
    return rho;
}

namespace {

// Eigenvalues of the reduced system state, descending, clamped per contract.
std::array<double, 2> reduced_eigenvalues(const BipartiteState& state) {
    const double na2 = state.A.squaredNorm();
    const double nb2 = state.B.squaredNorm();
    const Complex off = state.B.dot(state.A);
    const double tr = na2 + nb2;
    const double det = na2 * nb2 - std::norm(off);
    double disc = tr * tr - 4.0 * det;
    if (disc < 0.0) disc = 0.0;
    const double root = std::sqrt(disc);
    std::array<double, 2> p{(tr + root) / 2.0, (tr - root) / 2.0};
    for (double& v : p) {
        if (v < -1e-12)
            throw NumericError("reduced density matrix has eigenvalue below -1e-12");
        if (v < 0.0) v = 0.0;
    }
    return p;
}

}  // namespace

SchmidtDecomposition schmidt(const BipartiteState& state, double degeneracy_tol) {
    if (std::abs(state.total_norm2() - 1.0) > 1e-8)
        throw std::invalid_argument("schmidt: state must have unit norm within 1e-8");

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(partial_trace_system(state));
    // solver returns ascending eigenvalues; we want descending coefficients
    std::array<double, 2> p{es.eigenvalues()(1), es.eigenvalues()(0)};
    std::array<Eigen::Vector2cd, 2> u{es.eigenvectors().col(1), es.eigenvectors().col(0)};

    SchmidtDecomposition out;
    for (int i = 0; i < 2; ++i) {
        double pi = p[i];
        if (pi < -1e-12) throw NumericError("schmidt: eigenvalue below -1e-12");
        if (pi < 0.0) pi = 0.0;
        out.coefficients[i] = std::sqrt(pi);
        out.system_states[i] = Vector(u[i]);
        // env partner: <u_i|psi> taken over the system factor
        Vector v = std::conj(u[i](0)) * state.A + std::conj(u[i](1)) * state.B;
        const double nv = v.norm();
        if (nv > 1e-12) {
            out.env_states[i] = v / nv;
        } else if (i == 1 && state.env_dim() > 1) {
            // vanishing coefficient: fill with any unit vector orthogonal to e_0
            Vector w = Vector::Zero(state.env_dim());
            for (Eigen::Index k = 0; k < state.env_dim(); ++k) {
                w.setZero();
                w(k) = 1.0;
                w -= out.env_states[0].dot(w) * out.env_states[0];
                if (w.norm() > 0.5) break;
            }
            out.env_states[i] = w / w.norm();
        } else {
            out.env_states[i] = basis_ket(state.env_dim(), 0);
        }
    }
    out.degenerate = std::abs(out.coefficients[0] - out.coefficients[1]) < degeneracy_tol;
    return out;
}

double entanglement_entropy(const BipartiteState& state) {
    if (std::abs(state.total_norm2() - 1.0) > 1e-8)
        throw std::invalid_argument("entanglement_entropy: state must have unit norm within 1e-8");
    double s = 0.0;
    for (double p : reduced_eigenvalues(state))
        if (p >= 1e-15) s -= p * std::log(p);
    return s;
}

double purity(const Matrix& rho) {
    if (rho.rows() != rho.cols())
        throw std::invalid_argument("purity: matrix must be square");
    if (!is_hermitian(rho, 1e-8) || std::abs(rho.trace().real() - 1.0) > 1e-8 ||
        std::abs(rho.trace().imag()) > 1e-8)
        throw std::invalid_argument("purity: expected a Hermitian unit-trace matrix");
    return (rho * rho).trace().real();
}

Matrix matrix_exponential_unitary(const Matrix& h, double t) {
    if (h.rows() != h.cols())
        throw std::invalid_argument("matrix_exponential_unitary: matrix must be square");
    if (!is_hermitian(h, 1e-10))
        throw std::invalid_argument("matrix_exponential_unitary: matrix must be Hermitian within 1e-10");
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    if (es.info() != Eigen::Success)
        throw NumericError("matrix_exponential_unitary: eigendecomposition failed");
    const Eigen::VectorXd w = es.eigenvalues();
    Vector phases(w.size());
    for (Eigen::Index k = 0; k < w.size(); ++k)
        phases(k) = std::exp(Complex(0.0, -w(k) * t));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace pointerlab::hilbert
