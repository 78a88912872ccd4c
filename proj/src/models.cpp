#include "pointerlab/models.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <stdexcept>

#include "pointerlab/errors.hpp"

namespace pointerlab::models {

namespace {
constexpr Complex kMinusI{0.0, -1.0};
}

int default_fock_trunc(double nbar) {
    if (nbar < 0.0) throw std::invalid_argument("default_fock_trunc: nbar must be >= 0");
    const int rule = static_cast<int>(std::ceil(nbar + 10.0 * std::sqrt(nbar)));
    return std::max(rule, 8);
}

Vector coherent_state(Complex nu, int n_trunc) {
    double ignored = 0.0;
    return coherent_state(nu, n_trunc, ignored);
}

Vector coherent_state(Complex nu, int n_trunc, double& truncated_weight) {
    if (n_trunc < 1) throw std::invalid_argument("coherent_state: n_trunc must be >= 1");
    const Eigen::Index dim = n_trunc + 1;
    Vector c = Vector::Zero(dim);
    const double mag = std::abs(nu);
    if (mag == 0.0) {
        c(0) = 1.0;
        truncated_weight = 0.0;
        return c;
    }
    // |c_n| = exp(-|nu|^2/2 + n ln|nu| - lgamma(n+1)/2), phase arg(nu)*n
    const double phase = std::arg(nu);
    double kept = 0.0;
    for (Eigen::Index n = 0; n < dim; ++n) {
        const double lm = -0.5 * mag * mag + double(n) * std::log(mag) -
                          0.5 * std::lgamma(double(n) + 1.0);
        const double m = std::exp(lm);
        c(n) = std::polar(m, phase * double(n));
        kept += m * m;
    }
    truncated_weight = std::max(0.0, 1.0 - kept);
    if (truncated_weight > 1e-8)
        throw TruncationError("coherent_state: truncated weight " +
                              std::to_string(truncated_weight) + " exceeds 1e-8");
    c /= std::sqrt(kept);
    return c;
}

// ------------------------------ Jaynes-Cummings -----------------------------

int JCMParams::trunc() const {
    return n_trunc >= 0 ? n_trunc : default_fock_trunc(nbar);
}

Complex JCMParams::nu() const {
    return std::polar(std::sqrt(nbar), -phi);
}

double JCMParams::revival_time() const {
    return 2.0 * std::numbers::pi * std::sqrt(nbar) / g;
}

void JCMParams::validate() const {
    if (!(g > 0.0)) throw std::invalid_argument("JCMParams: g must be positive");
    if (nbar < 0.0) throw std::invalid_argument("JCMParams: nbar must be >= 0");
    if (trunc() + 1e-9 < nbar + 10.0 * std::sqrt(nbar))
        throw std::invalid_argument("JCMParams: n_trunc below nbar + 10 sqrt(nbar)");
}

LadderCoeffs jcm_ladder_coeffs(double g) {
    LadderCoeffs f;
    f.f1 = [g](int n, double t) { return Complex(std::cos(g * t * std::sqrt(n + 1.0)), 0.0); };
    f.f2 = [g](int n, double t) { return kMinusI * std::sin(g * t * std::sqrt(double(n))); };
    f.f3 = [g](int n, double t) { return kMinusI * std::sin(g * t * std::sqrt(n + 1.0)); };
    f.f4 = [g](int n, double t) { return Complex(std::cos(g * t * std::sqrt(double(n))), 0.0); };
    return f;
}

evolution::EvolutionDecomposition jcm_env_operators(const JCMParams& p, double t) {
    if (t < 0.0) throw std::invalid_argument("jcm_env_operators: t must be >= 0");
    p.validate();
    const Eigen::Index dim = p.trunc() + 1;
    evolution::EvolutionDecomposition d;
    d.t = t;
    d.E1 = Matrix::Zero(dim, dim);
    d.E2 = Matrix::Zero(dim, dim);
    d.E3 = Matrix::Zero(dim, dim);
    d.E4 = Matrix::Zero(dim, dim);
    const LadderCoeffs f = jcm_ladder_coeffs(p.g);
    for (Eigen::Index n = 0; n < dim; ++n) {
        d.E1(n, n) = f.f1(int(n), t);
        d.E4(n, n) = f.f4(int(n), t);
        if (n >= 1) d.E2(n - 1, n) = f.f2(int(n), t);
        if (n + 1 < dim) d.E3(n + 1, n) = f.f3(int(n), t);
    }
    return d;
}

JcmEvolution::JcmEvolution(const JCMParams& p) : params_(p), dim_(p.trunc() + 1) {
    params_.validate();
}

void JcmEvolution::apply(double t, const Vector& a0, const Vector& b0,
                         Vector& a_out, Vector& b_out) const {
    const double g = params_.g;
    a_out.resize(dim_);
    b_out.resize(dim_);
    for (Eigen::Index n = 0; n < dim_; ++n) {
        const double sq_n = std::sqrt(double(n));
        const double sq_n1 = std::sqrt(double(n) + 1.0);
        // A'_n = cos(gt sqrt(n+1)) A_n - i sin(gt sqrt(n+1)) B_{n+1}
        Complex a = std::cos(g * t * sq_n1) * a0(n);
        if (n + 1 < dim_) a += kMinusI * std::sin(g * t * sq_n1) * b0(n + 1);
        a_out(n) = a;
        // B'_n = cos(gt sqrt(n)) B_n - i sin(gt sqrt(n)) A_{n-1}
        Complex b = std::cos(g * t * sq_n) * b0(n);
        if (n >= 1) b += kMinusI * std::sin(g * t * sq_n) * a0(n - 1);
        b_out(n) = b;
    }
}

evolution::EvolutionDecomposition JcmEvolution::decomposition(double t) const {
    return jcm_env_operators(params_, t);
}

// ------------------------- dephasing spin-boson model -----------------------

Complex SBMParams::lambda(double t) const {
    return (g / omega) * (1.0 - std::exp(Complex(0.0, omega * t)));
}

void SBMParams::validate() const {
    if (omega == 0.0) throw std::invalid_argument("SBMParams: omega must be nonzero");
    if (n_trunc < 1) throw std::invalid_argument("SBMParams: n_trunc must be >= 1");
    // the displaced vacuum at max |lambda| = 2|g|/omega must fit the cutoff
    const double lmax = 2.0 * std::abs(g) / std::abs(omega);
    if (lmax > 0.0) {
        double tail = 0.0;
        double kept = 0.0;
        for (int n = 0; n <= n_trunc; ++n)
            kept += std::exp(-lmax * lmax + double(n) * 2.0 * std::log(lmax) -
                             std::lgamma(double(n) + 1.0));
        tail = std::max(0.0, 1.0 - kept);
        if (tail > 1e-10)
            throw TruncationError("SBMParams: displaced state keeps " + std::to_string(tail) +
                                  " weight beyond n_trunc");
    }
}

Matrix displacement_operator(Complex lambda, Eigen::Index dim) {
    if (dim <= 0) throw std::invalid_argument("displacement_operator: dim must be positive");
    const Matrix a = hilbert::annihilation(dim);
    // K = lambda a^dag - conj(lambda) a is anti-Hermitian, so exp(K) = exp(-i (iK))
    const Matrix ik = Complex(0.0, 1.0) * (lambda * a.adjoint() - std::conj(lambda) * a);
    return hilbert::matrix_exponential_unitary(ik, 1.0);
}

Matrix sbm_displacement(const SBMParams& p, double t) {
    if (t < 0.0) throw std::invalid_argument("sbm_displacement: t must be >= 0");
    p.validate();
    return displacement_operator(p.lambda(t), p.n_trunc + 1);
}

evolution::EvolutionDecomposition sbm_evolution(const SBMParams& p, double t) {
    if (t < 0.0) throw std::invalid_argument("sbm_evolution: t must be >= 0");
    p.validate();
    const Eigen::Index dim = p.n_trunc + 1;
    evolution::EvolutionDecomposition d;
    d.t = t;
    d.E1 = displacement_operator(p.lambda(t), dim);
    d.E2 = Matrix::Zero(dim, dim);
    d.E3 = Matrix::Zero(dim, dim);
    d.E4 = d.E1.adjoint();  // D(-lambda) = D(lambda)^dag
    return d;
}

SbmEvolution::SbmEvolution(const SBMParams& p) : params_(p), dim_(p.n_trunc + 1) {
    params_.validate();
}

void SbmEvolution::prepare(const evolution::TimeGrid& grid) {
    grid.validate();
    for (double t : grid.points)
        cache_.emplace(t, displacement_operator(params_.lambda(t), dim_));
}

const Matrix& SbmEvolution::plus_displacement(double t) const {
    auto it = cache_.find(t);
    if (it != cache_.end()) return it->second;
    thread_local Matrix scratch;
    scratch = displacement_operator(params_.lambda(t), dim_);
    return scratch;
}

void SbmEvolution::apply(double t, const Vector& a0, const Vector& b0,
                         Vector& a_out, Vector& b_out) const {
    const Matrix& d = plus_displacement(t);
    a_out = d * a0;
    b_out = d.adjoint() * b0;
}

evolution::EvolutionDecomposition SbmEvolution::decomposition(double t) const {
    return sbm_evolution(params_, t);
}

// ------------------------------ central spin bath ---------------------------

void SpinSpinParams::validate() const {
    const int n = spin_count();
    if (n < 1) throw std::invalid_argument("SpinSpinParams: need at least one environment spin");
    if (n > kMaxEnvironmentSpins)
        throw std::invalid_argument("SpinSpinParams: at most 12 environment spins supported");
    if (!env_amplitudes.empty()) {
        if (static_cast<int>(env_amplitudes.size()) != n)
            throw std::invalid_argument("SpinSpinParams: one amplitude pair per spin required");
        for (const auto& ab : env_amplitudes) {
            const double norm2 = std::norm(ab[0]) + std::norm(ab[1]);
            if (std::abs(norm2 - 1.0) > 1e-10)
                throw std::invalid_argument("SpinSpinParams: spin amplitudes must be normalized");
        }
    }
}

namespace {

// spin i maps to bit (N-1-i) of the environment index; bit 0 means sz = +1
double bath_field(const std::vector<double>& g, Eigen::Index k) {
    const int n = static_cast<int>(g.size());
    double v = 0.0;
    for (int i = 0; i < n; ++i) {
        const bool down = (k >> (n - 1 - i)) & 1;
        v += down ? -g[i] : g[i];
    }
    return v;
}

}  // namespace

Matrix spin_spin_hamiltonian(const SpinSpinParams& p) {
    p.validate();
    const int n = p.spin_count();
    const Eigen::Index env = Eigen::Index(1) << n;
    Matrix h = Matrix::Zero(2 * env, 2 * env);
    // 1/2 sz (x) sum_i g_i sz_i: diagonal in the product basis
    for (Eigen::Index k = 0; k < env; ++k) {
        const double v = 0.5 * bath_field(p.couplings, k);
        h(k, k) = v;              // |a> branch, sz = +1
        h(env + k, env + k) = -v; // |b> branch
    }
    // -1/2 delta0 sx (x) I
    if (p.delta0 != 0.0) {
        for (Eigen::Index k = 0; k < env; ++k) {
            h(k, env + k) += -0.5 * p.delta0;
            h(env + k, k) += -0.5 * p.delta0;
        }
    }
    return h;
}

Vector spin_spin_env_initial(const SpinSpinParams& p) {
    p.validate();
    const int n = p.spin_count();
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    Vector state(1);
    state(0) = 1.0;
    for (int i = 0; i < n; ++i) {
        const Complex up = p.env_amplitudes.empty() ? Complex(inv_sqrt2) : p.env_amplitudes[i][0];
        const Complex dn = p.env_amplitudes.empty() ? Complex(inv_sqrt2) : p.env_amplitudes[i][1];
        Vector next(state.size() * 2);
        next.head(state.size()) = up * state;
        next.tail(state.size()) = dn * state;
        state.swap(next);
    }
    return state;
}

SpinSpinEvolution::SpinSpinEvolution(const SpinSpinParams& p)
    : params_(p), dim_(Eigen::Index(1) << p.spin_count()) {
    params_.validate();
    if (params_.delta0 == 0.0) {
        field_.resize(dim_);
        for (Eigen::Index k = 0; k < dim_; ++k)
            field_(k) = bath_field(params_.couplings, k);
    } else {
        dense_ = std::make_unique<evolution::HamiltonianEvolution>(spin_spin_hamiltonian(params_));
    }
}

void SpinSpinEvolution::apply(double t, const Vector& a0, const Vector& b0,
                              Vector& a_out, Vector& b_out) const {
    if (dense_) {
        dense_->apply(t, a0, b0, a_out, b_out);
        return;
    }
    a_out.resize(dim_);
    b_out.resize(dim_);
    for (Eigen::Index k = 0; k < dim_; ++k) {
        const double phase = 0.5 * field_(k) * t;
        a_out(k) = std::polar(1.0, -phase) * a0(k);
        b_out(k) = std::polar(1.0, phase) * b0(k);
    }
}

evolution::EvolutionDecomposition SpinSpinEvolution::decomposition(double t) const {
    if (dense_) return dense_->decomposition(t);
    evolution::EvolutionDecomposition d;
    d.t = t;
    d.E1 = Matrix::Zero(dim_, dim_);
    d.E2 = Matrix::Zero(dim_, dim_);
    d.E3 = Matrix::Zero(dim_, dim_);
    d.E4 = Matrix::Zero(dim_, dim_);
    for (Eigen::Index k = 0; k < dim_; ++k) {
        const double phase = 0.5 * field_(k) * t;
        d.E1(k, k) = std::polar(1.0, -phase);
        d.E4(k, k) = std::polar(1.0, phase);
    }
    return d;
}

std::vector<double> gaussian_couplings(int n, double mean, double sigma, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("gaussian_couplings: n must be >= 1");
    if (sigma < 0.0) throw std::invalid_argument("gaussian_couplings: sigma must be >= 0");
    std::mt19937_64 rng(seed);
    auto unit = [&rng] { return ((rng() >> 11) + 1.0) * 0x1.0p-53; };  // (0, 1]
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        const double u1 = unit();
        const double u2 = unit();
        const double z = std::sqrt(-2.0 * std::log(u1)) *
                         std::cos(2.0 * std::numbers::pi * u2);
        out[i] = mean + sigma * z;
    }
    return out;
}

}  // namespace pointerlab::models
