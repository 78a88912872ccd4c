#include "pointerlab/bloch.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pointerlab::bloch {

Eigen::Vector3d bloch_vector(const Matrix& rho) {
    if (rho.rows() != 2 || rho.cols() != 2)
        throw std::invalid_argument("bloch_vector: need a 2x2 density matrix");
    if (!hilbert::is_hermitian(rho, 1e-8) || std::abs(rho.trace().real() - 1.0) > 1e-8)
        throw std::invalid_argument("bloch_vector: need a Hermitian unit-trace matrix");
    const Complex off = rho(0, 1);
    return {2.0 * off.real(), -2.0 * off.imag(), rho(0, 0).real() - rho(1, 1).real()};
}

Matrix density_from_bloch(const Eigen::Vector3d& r) {
    Matrix rho(2, 2);
    rho(0, 0) = (1.0 + r.z()) / 2.0;
    rho(1, 1) = (1.0 - r.z()) / 2.0;
    rho(0, 1) = Complex(r.x(), -r.y()) / 2.0;
    rho(1, 0) = std::conj(rho(0, 1));
    return rho;
}

BlochTrajectory trajectory(const std::vector<hilbert::BipartiteState>& states,
                           const evolution::TimeGrid& grid) {
    if (states.size() != grid.size())
        throw std::invalid_argument("trajectory: states and grid lengths differ");
    BlochTrajectory out;
    out.times = grid.points;
    out.r.reserve(states.size());
    for (const auto& s : states)
        out.r.push_back(bloch_vector(hilbert::partial_trace_system(s)));
    return out;
}

AsymptoteReport detect_asymptote(const BlochTrajectory& traj, double window_fraction,
                                 double settle_tol, double polarization_floor) {
    const std::size_t n = traj.r.size();
    if (n < 10) throw std::invalid_argument("detect_asymptote: need at least 10 points");
    if (!(window_fraction > 0.0 && window_fraction <= 0.5))
        throw std::invalid_argument("detect_asymptote: window_fraction must be in (0, 0.5]");

    const std::size_t window = std::max<std::size_t>(2, std::size_t(std::ceil(window_fraction * n)));
    AsymptoteReport rep;
    rep.window_begin = n - window;

    Eigen::Vector3d lo = traj.r[rep.window_begin];
    Eigen::Vector3d hi = lo;
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (std::size_t k = rep.window_begin; k < n; ++k) {
        lo = lo.cwiseMin(traj.r[k]);
        hi = hi.cwiseMax(traj.r[k]);
        mean += traj.r[k];
    }
    mean /= double(window);
    rep.r_inf = mean;
    rep.drift = (hi - lo).maxCoeff();
    rep.settled = rep.drift <= settle_tol;
    rep.polarized = mean.norm() >= polarization_floor;

    if (rep.settled && rep.polarized) {
        const Eigen::Vector3d dir = mean / mean.norm();
        const double theta = std::acos(std::clamp(dir.z(), -1.0, 1.0));
        const double chi = std::atan2(dir.y(), dir.x());
        Vector plus(2), minus(2);
        plus << Complex(std::cos(theta / 2.0), 0.0), std::polar(std::sin(theta / 2.0), chi);
        minus << Complex(-std::sin(theta / 2.0), 0.0), std::polar(std::cos(theta / 2.0), chi);
        rep.preferred_basis = {plus, minus};
    }
    return rep;
}

}  // namespace pointerlab::bloch
