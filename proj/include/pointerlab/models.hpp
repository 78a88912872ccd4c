#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "pointerlab/evolution.hpp"
#include "pointerlab/hilbert.hpp"

// The three concrete system-environment models (Jaynes-Cummings, dephasing
// spin-boson, central spin with a spin bath) with their closed-form joint
// propagators, plus environment initial states.  hbar = 1 throughout; times
// are in inverse units of the quoted couplings.
namespace pointerlab::models {

// Default Fock cutoff for a coherent field of mean photon number nbar:
// keeps the Poisson tail weight below 1e-8 for nbar >= 25.
int default_fock_trunc(double nbar);

// ------------------------------- coherent states ----------------------------

// c_n = e^{-|nu|^2/2} nu^n / sqrt(n!), n <= n_trunc, renormalized after the
// cut. Magnitudes are accumulated in log space so large |nu| cannot overflow.
// Raises TruncationError when the truncated weight exceeds 1e-8.
Vector coherent_state(Complex nu, int n_trunc);
Vector coherent_state(Complex nu, int n_trunc, double& truncated_weight);

// ------------------------------ Jaynes-Cummings -----------------------------

struct JCMParams {
    double g = 1.0;     // atom-field coupling, rad/time
    double nbar = 0.0;  // mean photon number of the initial coherent field
    double phi = 0.0;   // coherent phase, nu = sqrt(nbar) e^{-i phi}
    int n_trunc = -1;   // max Fock index; -1 applies the default rule

    int trunc() const;
    Complex nu() const;
    double revival_time() const;  // t_R = 2 pi sqrt(nbar) / g
    void validate() const;
};

// Ladder action of the four propagator blocks of a model where E1, E4 are
// number-diagonal, E2 lowers by one and E3 raises by one:
//   E1|n> = f1(n,t)|n>,  E2|n> = f2(n,t)|n-1>,
//   E3|n> = f3(n,t)|n+1>,  E4|n> = f4(n,t)|n>.
struct LadderCoeffs {
    std::function<Complex(int, double)> f1, f2, f3, f4;
};

// Resonant JCM ladder functions:
//   f1 = cos(g t sqrt(n+1)),   f2 = -i sin(g t sqrt(n)),
//   f3 = -i sin(g t sqrt(n+1)), f4 = cos(g t sqrt(n)).
LadderCoeffs jcm_ladder_coeffs(double g);

// Dense blocks of the resonant JCM joint propagator at time t.
evolution::EvolutionDecomposition jcm_env_operators(const JCMParams& p, double t);

class JcmEvolution final : public evolution::EvolutionSource {
public:
    explicit JcmEvolution(const JCMParams& p);
    Eigen::Index env_dim() const override { return dim_; }
    void apply(double t, const Vector& a0, const Vector& b0,
               Vector& a_out, Vector& b_out) const override;
    evolution::EvolutionDecomposition decomposition(double t) const override;

private:
    JCMParams params_;
    Eigen::Index dim_;
};

// ------------------------- dephasing spin-boson model -----------------------

struct SBMParams {
    double omega0 = 0.0;  // level splitting, rad/time
    double omega = 1.0;   // mode frequency, rad/time (nonzero)
    Complex g = 0.0;      // spin-field coupling
    int n_trunc = 63;     // max Fock index

    Complex lambda(double t) const;  // (g/omega)(1 - e^{i omega t})
    void validate() const;
};

// exp(lambda a^dag - conj(lambda) a) on the truncated Fock space.
Matrix displacement_operator(Complex lambda, Eigen::Index dim);

Matrix sbm_displacement(const SBMParams& p, double t);

// E1 = D(lambda(t)), E2 = E3 = 0, E4 = D(-lambda(t)).
evolution::EvolutionDecomposition sbm_evolution(const SBMParams& p, double t);

class SbmEvolution final : public evolution::EvolutionSource {
public:
    explicit SbmEvolution(const SBMParams& p);
    Eigen::Index env_dim() const override { return dim_; }
    void apply(double t, const Vector& a0, const Vector& b0,
               Vector& a_out, Vector& b_out) const override;
    evolution::EvolutionDecomposition decomposition(double t) const override;
    void prepare(const evolution::TimeGrid& grid) override;

private:
    const Matrix& plus_displacement(double t) const;
    SBMParams params_;
    Eigen::Index dim_;
    std::map<double, Matrix> cache_;  // t -> D(lambda(t)); D(-l) = D(l)^dag
};

// ------------------------------ central spin bath ---------------------------

inline constexpr int kMaxEnvironmentSpins = 12;  // exact dense simulation bound

struct SpinSpinParams {
    double delta0 = 0.0;             // tunneling matrix element, rad/time
    std::vector<double> couplings;   // g_i, rad/time, one per environment spin
    // per-spin initial amplitudes (alpha_i, beta_i); empty = all (1,1)/sqrt(2)
    std::vector<std::array<Complex, 2>> env_amplitudes;

    int spin_count() const { return static_cast<int>(couplings.size()); }
    void validate() const;
};

// H = -1/2 delta0 sx (x) I + 1/2 sz (x) sum_i g_i sz_i, dimension 2^(N+1).
Matrix spin_spin_hamiltonian(const SpinSpinParams& p);

// Product state of the environment spins, dimension 2^N.
Vector spin_spin_env_initial(const SpinSpinParams& p);

class SpinSpinEvolution final : public evolution::EvolutionSource {
public:
    explicit SpinSpinEvolution(const SpinSpinParams& p);
    Eigen::Index env_dim() const override { return dim_; }
    void apply(double t, const Vector& a0, const Vector& b0,
               Vector& a_out, Vector& b_out) const override;
    evolution::EvolutionDecomposition decomposition(double t) const override;

private:
    SpinSpinParams params_;
    Eigen::Index dim_;
    Eigen::VectorXd field_;  // sum_i g_i s_i per env basis state (delta0 = 0 path)
    std::unique_ptr<evolution::HamiltonianEvolution> dense_;  // delta0 != 0 path
};

// N samples from Normal(mean, sigma^2), reproducible across platforms for a
// fixed seed (mt19937_64 + Box-Muller, one draw per uniform pair).
std::vector<double> gaussian_couplings(int n, double mean, double sigma, std::uint64_t seed);

}  // namespace pointerlab::models
