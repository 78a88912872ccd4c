#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "pointerlab/evolution.hpp"
#include "pointerlab/hilbert.hpp"

// Bloch-vector trajectories of the reduced system state and asymptote
// detection for the realized preferred basis.
namespace pointerlab::bloch {

// R = (rho_ab + rho_ba, i(rho_ab - rho_ba), rho_aa - rho_bb).
Eigen::Vector3d bloch_vector(const Matrix& rho);

// rho = (I + R . sigma)/2.
Matrix density_from_bloch(const Eigen::Vector3d& r);

struct BlochTrajectory {
    std::vector<double> times;
    std::vector<Eigen::Vector3d> r;
};

BlochTrajectory trajectory(const std::vector<hilbert::BipartiteState>& states,
                           const evolution::TimeGrid& grid);

struct AsymptoteReport {
    bool settled = false;
    std::size_t window_begin = 0;        // first index of the trailing window
    Eigen::Vector3d r_inf{0.0, 0.0, 0.0};
    double drift = 0.0;                  // max per-component (max - min) in window
    bool polarized = false;              // |r_inf| >= polarization floor
    // +r_inf / -r_inf eigenstates; meaningful iff settled && polarized. A
    // settled but unpolarized trajectory leaves the basis ambiguous.
    std::array<Vector, 2> preferred_basis;
};

// Settled iff every Bloch component varies by at most settle_tol over the
// trailing window (window_fraction of the trajectory, at least 2 points).
AsymptoteReport detect_asymptote(const BlochTrajectory& traj,
                                 double window_fraction = 0.25,
                                 double settle_tol = 0.02,
                                 double polarization_floor = 0.05);

}  // namespace pointerlab::bloch
