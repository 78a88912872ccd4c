#include "pointerlab/theorems.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pointerlab/errors.hpp"

namespace pointerlab::theorems {

namespace {

Vector two_vector(Complex a, Complex b) {
    Vector v(2);
    v << a, b;
    return v / v.norm();
}

std::array<Vector, 2> plus_minus_basis(Complex phase_on_b) {
    return {two_vector(1.0, phase_on_b), two_vector(1.0, -phase_on_b)};
}

Eigen::Vector3d ray_bloch(const Vector& v) {
    const Complex cross = std::conj(v(0)) * v(1);
    return {2.0 * cross.real(), 2.0 * cross.imag(), std::norm(v(0)) - std::norm(v(1))};
}

double ray_angle_deg(const Eigen::Vector3d& u, const Eigen::Vector3d& w) {
    const double c = std::clamp(u.dot(w) / (u.norm() * w.norm()), -1.0, 1.0);
    return std::acos(c) * 180.0 / std::numbers::pi;
}

}  // namespace

double TheoremReport::residual(const std::string& name) const {
    for (const auto& [key, value] : residuals)
        if (key == name) return value;
    throw std::out_of_range("TheoremReport: no residual named " + name);
}

TheoremReport check_theorem1(std::span<const evolution::EvolutionDecomposition> decomps,
                             double tol) {
    if (decomps.size() < 2)
        throw std::invalid_argument("check_theorem1: need at least 2 time points");
    double r2 = 0.0, r3 = 0.0;
    for (const auto& d : decomps) {
        r2 = std::max(r2, hilbert::spectral_norm(d.E2));
        r3 = std::max(r3, hilbert::spectral_norm(d.E3));
    }
    TheoremReport rep;
    rep.theorem_id = 1;
    rep.residuals = {{"max_norm_E2", r2}, {"max_norm_E3", r3}};
    rep.holds = r2 <= tol && r3 <= tol;
    rep.schrodinger_caveat = true;
    if (rep.holds) {
        const auto& basis = decomps.front().basis;
        rep.predicted_basis = {two_vector(basis(0, 0), basis(1, 0)),
                               two_vector(basis(0, 1), basis(1, 1))};
    }
    return rep;
}

TheoremReport check_theorem2(std::span<const evolution::EvolutionDecomposition> decomps,
                             double tol) {
    if (decomps.size() < 2)
        throw std::invalid_argument("check_theorem2: need at least 2 time points");

    TheoremReport rep;
    rep.theorem_id = 2;
    rep.schrodinger_caveat = true;

    Complex overlap{0.0, 0.0};
    double off_norm = 0.0;
    for (const auto& d : decomps) {
        overlap += (d.E3.adjoint() * d.E2).trace();
        off_norm = std::max(off_norm,
                            std::max(hilbert::spectral_norm(d.E2), hilbert::spectral_norm(d.E3)));
    }
    if (off_norm <= tol) {
        // E2 and E3 vanish: phi is indeterminate, Theorem 1 applies instead
        rep.note = "E2 and E3 vanish on the grid; referred to theorem 1";
        TheoremReport t1 = check_theorem1(decomps, tol);
        rep.holds = t1.holds;
        rep.residuals = t1.residuals;
        rep.predicted_basis = t1.predicted_basis;
        return rep;
    }

    const double phi = -std::arg(overlap);
    double r14 = 0.0, r23 = 0.0;
    for (const auto& d : decomps) {
        r14 = std::max(r14, hilbert::spectral_norm(d.E1 - d.E4));
        r23 = std::max(r23, hilbert::spectral_norm(d.E2 - std::polar(1.0, -phi) * d.E3));
    }
    rep.fitted_phase = phi;
    rep.residuals = {{"max_norm_E1_minus_E4", r14}, {"max_norm_E2_minus_phase_E3", r23}};
    rep.holds = r14 <= tol && r23 <= tol;
    rep.note = "basis convention: (|a> pm e^{i phi/2} |b>)/sqrt(2), phi from the E2/E3 phase";
    if (rep.holds) rep.predicted_basis = plus_minus_basis(std::polar(1.0, phi / 2.0));
    return rep;
}

TheoremReport check_theorem3(const Matrix& h_sys, const Matrix& h_prime, double tol) {
    if (h_sys.rows() != 2 || h_sys.cols() != 2)
        throw std::invalid_argument("check_theorem3: system Hamiltonian must be 2x2");
    if (h_prime.rows() != h_prime.cols() || h_prime.rows() % 2 != 0 || h_prime.rows() == 0)
        throw std::invalid_argument("check_theorem3: H' must act on the joint 2 x D space");
    if (!hilbert::is_hermitian(h_sys, 1e-10) || !hilbert::is_hermitian(h_prime, 1e-10))
        throw std::invalid_argument("check_theorem3: inputs must be Hermitian");

    const Eigen::Index n = h_prime.rows() / 2;
    const Matrix hs_full = hilbert::kron(h_sys, Matrix::Identity(n, n));
    const double ns = hilbert::spectral_norm(h_sys);
    const double np = hilbert::spectral_norm(h_prime);
    const double comm = hilbert::spectral_norm(hs_full * h_prime - h_prime * hs_full);
    const double scale = std::max(ns * np, 1e-300);

    TheoremReport rep;
    rep.theorem_id = 3;
    rep.residuals = {{"relative_commutator_norm", comm / scale}};
    rep.holds = comm <= tol * scale;
    // the predicted basis is an eigenbasis of H_S, valid in the Schroedinger
    // picture directly
    rep.schrodinger_caveat = false;
    if (!rep.holds) {
        rep.note = "[H_S, H'] != 0";
        return rep;
    }

    const Eigen::Matrix2cd hs2 = h_sys;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(hs2);
    const double gap = std::abs(es.eigenvalues()(1) - es.eigenvalues()(0));
    if (ns > 0.0 && gap > 1e-10 * ns) {
        rep.predicted_basis = {Vector(es.eigenvectors().col(1)), Vector(es.eigenvectors().col(0))};
        rep.note = "basis from the eigenstates of H_S";
        return rep;
    }

    // H_S vanishing or proportional to identity: extract the system factor of
    // H' from the operator-Schmidt structure of its 2x2 block decomposition.
    Eigen::MatrixXcd coeff(4, n * n);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const Matrix block = h_prime.block(i * n, j * n, n, n);
            coeff.row(2 * i + j) = Eigen::Map<const Vector>(block.data(), n * n).transpose();
        }
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(coeff, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k)
        if (sv(k) > 1e-12 * sv(0)) ++rank;
    rep.residuals.emplace_back("operator_schmidt_rank", double(rank));
    if (rank != 1) {
        rep.holds = false;
        rep.note = "H_S is trivial and H' is not of S (x) E form (operator-Schmidt rank " +
                   std::to_string(rank) + ")";
        return rep;
    }
    Eigen::Matrix2cd s;
    s << svd.matrixU()(0, 0), svd.matrixU()(1, 0), svd.matrixU()(2, 0), svd.matrixU()(3, 0);
    // S is Hermitian up to a global phase; rotate the dominant part real
    const Eigen::Matrix2cd h_part = (s + s.adjoint()) / 2.0;
    const Eigen::Matrix2cd a_part = (s - s.adjoint()) / Complex(0.0, 2.0);
    const Eigen::Matrix2cd sys_factor =
        h_part.norm() >= a_part.norm() ? h_part : a_part;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> fes(sys_factor);
    const double fgap = std::abs(fes.eigenvalues()(1) - fes.eigenvalues()(0));
    if (fgap <= 1e-10 * std::max(1.0, hilbert::spectral_norm(sys_factor))) {
        rep.holds = false;
        rep.note = "system factor of H' is proportional to the identity; basis ambiguous";
        return rep;
    }
    rep.predicted_basis = {Vector(fes.eigenvectors().col(1)), Vector(fes.eigenvectors().col(0))};
    rep.note = "H_S trivial; basis from the system factor of H'";
    return rep;
}

InteractionBlocks interaction_blocks(const Matrix& h_int, double t) {
    if (h_int.rows() != h_int.cols() || h_int.rows() % 2 != 0 || h_int.rows() == 0)
        throw std::invalid_argument("interaction_blocks: need a square operator on 2 x D space");
    const Eigen::Index n = h_int.rows() / 2;
    InteractionBlocks b;
    b.t = t;
    b.h11 = h_int.topLeftCorner(n, n);
    b.h12 = h_int.topRightCorner(n, n);
    b.h21 = h_int.bottomLeftCorner(n, n);
    b.h22 = h_int.bottomRightCorner(n, n);
    return b;
}

TheoremReport check_theorem4(std::span<const InteractionBlocks> blocks, double tol) {
    if (blocks.size() < 2)
        throw std::invalid_argument("check_theorem4: need at least 2 sampled times");
    for (const auto& b : blocks) {
        if (!hilbert::is_hermitian(b.h11, 1e-12) || !hilbert::is_hermitian(b.h22, 1e-12) ||
            (b.h21 - b.h12.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
            throw std::invalid_argument("check_theorem4: blocks violate Hermiticity");
    }

    TheoremReport rep;
    rep.theorem_id = 4;
    rep.schrodinger_caveat = true;

    Complex overlap{0.0, 0.0};
    double off_norm = 0.0;
    for (const auto& b : blocks) {
        overlap += (b.h21.adjoint() * b.h12).trace();
        off_norm = std::max(off_norm, hilbert::spectral_norm(b.h12));
    }
    double r_diag = 0.0, r_off = 0.0;
    if (off_norm <= tol) {
        rep.note = "off-diagonal blocks vanish; condition reduces to h11 = h22";
        for (const auto& b : blocks)
            r_diag = std::max(r_diag, hilbert::spectral_norm(b.h11 - b.h22));
        rep.residuals = {{"max_norm_h11_minus_h22", r_diag}, {"max_norm_h12_minus_phase_h21", 0.0}};
        rep.holds = r_diag <= tol;
        if (rep.holds) rep.predicted_basis = plus_minus_basis(Complex(1.0, 0.0));
        return rep;
    }

    const double phi = -std::arg(overlap);
    for (const auto& b : blocks) {
        r_diag = std::max(r_diag, hilbert::spectral_norm(b.h11 - b.h22));
        r_off = std::max(r_off, hilbert::spectral_norm(b.h12 - std::polar(1.0, -phi) * b.h21));
    }
    rep.fitted_phase = phi;
    rep.residuals = {{"max_norm_h11_minus_h22", r_diag}, {"max_norm_h12_minus_phase_h21", r_off}};
    rep.holds = r_diag <= tol && r_off <= tol;
    rep.note = "basis convention: (|a> pm e^{-i phi} |b>)/sqrt(2), phi from the h12/h21 phase";
    if (rep.holds) rep.predicted_basis = plus_minus_basis(std::polar(1.0, -phi));
    return rep;
}

CrossValidation cross_validate(const TheoremReport& report,
                               std::span<const pointer::PointerCandidate> scan,
                               double angle_tol_deg) {
    if (scan.empty()) throw std::invalid_argument("cross_validate: empty scan");
    CrossValidation out;
    if (!report.holds || !report.predicted_basis) {
        out.verdict = CrossVerdict::no_prediction;
        return out;
    }
    if (scan.size() < 2) {
        out.verdict = CrossVerdict::disagree;
        out.angle_errors_deg = {180.0, 180.0};
        return out;
    }
    const Eigen::Vector3d p0 = ray_bloch((*report.predicted_basis)[0]);
    const Eigen::Vector3d p1 = ray_bloch((*report.predicted_basis)[1]);
    const Eigen::Vector3d s0 = scan[0].bloch();
    const Eigen::Vector3d s1 = scan[1].bloch();
    const std::array<double, 2> direct{ray_angle_deg(p0, s0), ray_angle_deg(p1, s1)};
    const std::array<double, 2> swapped{ray_angle_deg(p0, s1), ray_angle_deg(p1, s0)};
    out.angle_errors_deg =
        std::max(direct[0], direct[1]) <= std::max(swapped[0], swapped[1]) ? direct : swapped;
    out.verdict = (out.angle_errors_deg[0] <= angle_tol_deg &&
                   out.angle_errors_deg[1] <= angle_tol_deg)
                      ? CrossVerdict::agree
                      : CrossVerdict::disagree;
    return out;
}

}  // namespace pointerlab::theorems
