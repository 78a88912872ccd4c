#include "pointerlab/pointer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "pointerlab/errors.hpp"

namespace pointerlab::pointer {

namespace {
constexpr double kZeroBranchRatio = 1e-24;  // |branch|^2 ratio treated as a vanished branch
}

double parallelism_defect(const Vector& a, const Vector& b) {
    const double na2 = a.squaredNorm();
    const double nb2 = b.squaredNorm();
    if (na2 == 0.0 && nb2 == 0.0)
        throw std::invalid_argument("parallelism_defect: both branches vanish");
    if (std::min(na2, nb2) <= kZeroBranchRatio * std::max(na2, nb2)) return 0.0;
    const double overlap2 = std::norm(b.dot(a));
    double d = 1.0 - overlap2 / (na2 * nb2);
    return std::clamp(d, 0.0, 1.0);
}

GScalar g_scalar(const Vector& a, const Vector& b, double tol) {
    const double na2 = a.squaredNorm();
    const double nb2 = b.squaredNorm();
    if (na2 == 0.0 && nb2 == 0.0)
        throw std::invalid_argument("g_scalar: both branches vanish");
    if (nb2 <= kZeroBranchRatio * na2) return {GStatus::degenerate_branch, Complex{0.0, 0.0}};
    if (parallelism_defect(a, b) > tol) return {GStatus::not_scalar, Complex{0.0, 0.0}};
    return {GStatus::scalar, b.dot(a) / nb2};
}

GProfile g_profile_ladder(const models::LadderCoeffs& coeffs, const Vector& env_coeffs,
                          Complex alpha, Complex beta, double t, double weight_floor) {
    const Eigen::Index dim = env_coeffs.size();
    if (dim < 2) throw std::invalid_argument("g_profile_ladder: need at least two coefficients");

    double wmax = 0.0;
    for (Eigen::Index n = 0; n < dim; ++n) wmax = std::max(wmax, std::norm(env_coeffs(n)));
    if (wmax == 0.0) throw std::invalid_argument("g_profile_ladder: zero environment state");

    GProfile out;
    out.t = t;
    auto c = [&](Eigen::Index n) -> Complex {
        return (n >= 0 && n < dim) ? env_coeffs(n) : Complex{0.0, 0.0};
    };
    for (Eigen::Index n = 1; n < dim; ++n) {
        const double w = std::norm(env_coeffs(n));
        if (w < weight_floor * wmax) continue;
        const Complex num = alpha * c(n) * coeffs.f1(int(n), t) +
                            beta * c(n + 1) * coeffs.f2(int(n + 1), t);
        const Complex den = alpha * c(n - 1) * coeffs.f3(int(n - 1), t) +
                            beta * c(n) * coeffs.f4(int(n), t);
        if (std::norm(den) < 1e-300) continue;
        out.indices.push_back(int(n));
        out.ratios.push_back(num / den);
        out.weights.push_back(w);
    }
    if (out.indices.empty())
        throw NumericError("g_profile_ladder: no environment index clears the weight floor");

    double wsum = 0.0;
    Complex mean{0.0, 0.0};
    for (std::size_t i = 0; i < out.ratios.size(); ++i) {
        mean += out.weights[i] * out.ratios[i];
        wsum += out.weights[i];
    }
    mean /= wsum;
    out.scalar_estimate = mean;
    double var = 0.0;
    for (std::size_t i = 0; i < out.ratios.size(); ++i)
        var += out.weights[i] * std::norm(out.ratios[i] - mean);
    var /= wsum;
    const double scale = std::abs(mean);
    out.dispersion = scale > 0.0 ? std::sqrt(var) / scale
                                 : (var > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    return out;
}

PointerCandidate PointerCandidate::from_angles(double theta, double chi) {
    PointerCandidate c;
    c.theta = theta;
    c.chi = chi;
    c.alpha = Complex(std::cos(theta / 2.0), 0.0);
    c.beta = std::polar(std::sin(theta / 2.0), chi);
    return c;
}

Eigen::Vector3d PointerCandidate::bloch() const {
    const Complex cross = std::conj(alpha) * beta;
    return {2.0 * cross.real(), 2.0 * cross.imag(), std::norm(alpha) - std::norm(beta)};
}

namespace {

struct Score {
    double defect_max = 0.0;
    double entropy_max = 0.0;
};

double entropy_from_branches(double na2, double nb2, const Complex& off) {
    const double tr = na2 + nb2;
    double disc = tr * tr - 4.0 * (na2 * nb2 - std::norm(off));
    if (disc < 0.0) disc = 0.0;
    const double root = std::sqrt(disc);
    double s = 0.0;
    for (double p : {(tr + root) / 2.0, (tr - root) / 2.0}) {
        p = std::clamp(p / tr, 0.0, 1.0);
        if (p >= 1e-15) s -= p * std::log(p);
    }
    return s;
}

// defect_max / entropy_max of one initial ray over the whole grid
Score score_ray(const evolution::EvolutionSource& source, const Vector& env,
                const evolution::TimeGrid& grid, const Complex& alpha, const Complex& beta,
                Vector& a, Vector& b) {
    const Vector a0 = alpha * env;
    const Vector b0 = beta * env;
    Score s;
    for (double t : grid.points) {
        source.apply(t, a0, b0, a, b);
        const double na2 = a.squaredNorm();
        const double nb2 = b.squaredNorm();
        double d = 0.0;
        Complex off{0.0, 0.0};
        if (std::min(na2, nb2) > kZeroBranchRatio * std::max(na2, nb2)) {
            off = b.dot(a);
            d = std::clamp(1.0 - std::norm(off) / (na2 * nb2), 0.0, 1.0);
        }
        s.defect_max = std::max(s.defect_max, d);
        s.entropy_max = std::max(s.entropy_max, entropy_from_branches(na2, nb2, off));
    }
    return s;
}

double great_circle_deg(const Eigen::Vector3d& u, const Eigen::Vector3d& v) {
    const double c = std::clamp(u.dot(v), -1.0, 1.0);
    return std::acos(c) * 180.0 / std::numbers::pi;
}

bool candidate_less(const PointerCandidate& lhs, const PointerCandidate& rhs) {
    if (lhs.defect_max != rhs.defect_max) return lhs.defect_max < rhs.defect_max;
    if (lhs.entropy_max != rhs.entropy_max) return lhs.entropy_max < rhs.entropy_max;
    if (lhs.theta != rhs.theta) return lhs.theta < rhs.theta;
    return lhs.chi < rhs.chi;
}

std::vector<PointerCandidate> dedup_rays(const std::vector<PointerCandidate>& sorted,
                                         double merge_deg) {
    std::vector<PointerCandidate> out;
    for (const auto& c : sorted) {
        bool merged = false;
        for (const auto& kept : out)
            if (great_circle_deg(c.bloch(), kept.bloch()) < merge_deg) {
                merged = true;
                break;
            }
        if (!merged) out.push_back(c);
    }
    return out;
}

}  // namespace

std::vector<PointerCandidate> scan_pointer_candidates(evolution::EvolutionSource& source,
                                                      const Vector& env_initial,
                                                      const evolution::TimeGrid& grid,
                                                      int resolution,
                                                      const ScanOptions& opts) {
    if (resolution < 8) throw std::invalid_argument("scan: resolution must be >= 8");
    grid.validate();
    if (std::abs(env_initial.norm() - 1.0) > 1e-8)
        throw std::invalid_argument("scan: environment state must be normalized");
    if (env_initial.size() != source.env_dim())
        throw std::invalid_argument("scan: environment dimension mismatch");
    source.prepare(grid);

    // poles carry a single cell; interior rows carry all chi columns
    std::vector<std::pair<double, double>> cells;
    cells.reserve(std::size_t(resolution - 1) * resolution + 2);
    cells.emplace_back(0.0, 0.0);
    for (int j = 1; j < resolution; ++j)
        for (int k = 0; k < resolution; ++k)
            cells.emplace_back(std::numbers::pi * j / resolution,
                               2.0 * std::numbers::pi * k / resolution);
    cells.emplace_back(std::numbers::pi, 0.0);

    std::vector<PointerCandidate> scored(cells.size());
    const int threads = std::max(1, opts.threads);
    auto work = [&](std::size_t begin, std::size_t end) {
        Vector a, b;
        for (std::size_t i = begin; i < end; ++i) {
            PointerCandidate c = PointerCandidate::from_angles(cells[i].first, cells[i].second);
            const Score s = score_ray(source, env_initial, grid, c.alpha, c.beta, a, b);
            c.defect_max = s.defect_max;
            c.entropy_max = s.entropy_max;
            scored[i] = c;
        }
    };
    if (threads == 1) {
        work(0, cells.size());
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (cells.size() + threads - 1) / threads;
        for (int tch = 0; tch < threads; ++tch) {
            const std::size_t begin = std::min(cells.size(), std::size_t(tch) * chunk);
            const std::size_t end = std::min(cells.size(), begin + chunk);
            if (begin < end) pool.emplace_back(work, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    std::sort(scored.begin(), scored.end(), candidate_less);
    std::vector<PointerCandidate> seeds = dedup_rays(scored, opts.dedup_angle_deg);
    if (seeds.size() > std::size_t(opts.top_k)) seeds.resize(opts.top_k);

    // compass refinement around each seed ray
    Vector a, b;
    auto evaluate = [&](double theta, double chi) {
        PointerCandidate c = PointerCandidate::from_angles(theta, chi);
        const Score s = score_ray(source, env_initial, grid, c.alpha, c.beta, a, b);
        c.defect_max = s.defect_max;
        c.entropy_max = s.entropy_max;
        return c;
    };
    std::vector<PointerCandidate> refined;
    for (const auto& seed : seeds) {
        PointerCandidate best = seed;
        double h_theta = std::numbers::pi / resolution;
        double h_chi = 2.0 * std::numbers::pi / resolution;
        for (int step = 0; step < opts.max_refine_steps; ++step) {
            if (h_theta < 1e-7 && h_chi < 1e-7) break;
            PointerCandidate trial = best;
            bool moved = false;
            const double theta_lo = std::clamp(best.theta - h_theta, 0.0, std::numbers::pi);
            const double theta_hi = std::clamp(best.theta + h_theta, 0.0, std::numbers::pi);
            const double two_pi = 2.0 * std::numbers::pi;
            const double probes[4][2] = {{theta_lo, best.chi},
                                         {theta_hi, best.chi},
                                         {best.theta, std::fmod(best.chi - h_chi + two_pi, two_pi)},
                                         {best.theta, std::fmod(best.chi + h_chi, two_pi)}};
            for (const auto& pr : probes) {
                const PointerCandidate cand = evaluate(pr[0], pr[1]);
                if (candidate_less(cand, trial)) {
                    trial = cand;
                    moved = true;
                }
            }
            if (moved) {
                best = trial;
            } else {
                h_theta /= 2.0;
                h_chi /= 2.0;
            }
        }
        refined.push_back(best);
    }

    std::sort(refined.begin(), refined.end(), candidate_less);
    return dedup_rays(refined, opts.dedup_angle_deg);
}

PointerTrajectory pointer_trajectory(const PointerCandidate& candidate,
                                     evolution::EvolutionSource& source,
                                     const Vector& env_initial,
                                     const evolution::TimeGrid& grid,
                                     double scalar_tol) {
    grid.validate();
    if (std::abs(env_initial.norm() - 1.0) > 1e-8)
        throw std::invalid_argument("pointer_trajectory: environment state must be normalized");
    source.prepare(grid);

    const Vector a0 = candidate.alpha * env_initial;
    const Vector b0 = candidate.beta * env_initial;
    PointerTrajectory traj;
    traj.system_states.reserve(grid.size());
    traj.env_states.reserve(grid.size());
    traj.g_values.reserve(grid.size());

    Vector a, b;
    for (double t : grid.points) {
        source.apply(t, a0, b0, a, b);
        const double defect = parallelism_defect(a, b);
        if (defect > scalar_tol)
            throw PointerBrokenError("pointer_trajectory: defect " + std::to_string(defect) +
                                         " above tolerance at t = " + std::to_string(t),
                                     t);
        const GScalar g = g_scalar(a, b, scalar_tol);
        Vector sys(2);
        Vector env;
        if (g.status == GStatus::degenerate_branch) {
            sys << 1.0, 0.0;
            env = a / a.norm();
            traj.g_values.push_back(Complex(std::numeric_limits<double>::infinity(), 0.0));
        } else {
            sys << g.value, 1.0;
            sys /= sys.norm();
            env = b / b.norm();
            traj.g_values.push_back(g.value);
        }
        // fidelity of the product reconstruction against the propagated state
        const Complex overlap = std::conj(sys(0)) * env.dot(a) + std::conj(sys(1)) * env.dot(b);
        const double norm2 = a.squaredNorm() + b.squaredNorm();
        traj.min_reconstruction_fidelity =
            std::min(traj.min_reconstruction_fidelity, std::norm(overlap) / norm2);
        traj.system_states.push_back(std::move(sys));
        traj.env_states.push_back(std::move(env));
    }
    return traj;
}

JcmPointerStates analytic_jcm_pointers(const models::JCMParams& p, double t, double min_nbar) {
    p.validate();
    if (p.nbar < min_nbar)
        throw std::invalid_argument("analytic_jcm_pointers: nbar below the validity bound");
    const Vector c = models::coherent_state(p.nu(), p.trunc());
    const double drift = p.g * t / (2.0 * std::sqrt(p.nbar));
    JcmPointerStates out;
    out.sys_plus = Vector(2);
    out.sys_plus << std::polar(1.0, -p.phi - drift), 1.0;
    out.sys_plus /= std::sqrt(2.0);
    out.sys_minus = Vector(2);
    out.sys_minus << std::polar(1.0, -p.phi + drift), -1.0;
    out.sys_minus /= std::sqrt(2.0);

    const Eigen::Index dim = c.size();
    out.env_plus.resize(dim);
    out.env_minus.resize(dim);
    for (Eigen::Index n = 0; n < dim; ++n) {
        const double angle = p.g * t * std::sqrt(double(n));
        out.env_plus(n) = c(n) * std::polar(1.0, -angle);
        out.env_minus(n) = c(n) * std::polar(1.0, angle);
    }
    out.env_plus /= out.env_plus.norm();
    out.env_minus /= out.env_minus.norm();
    return out;
}

double jcm_scalar_tolerance(double nbar) {
    if (nbar <= 0.0) return 1.0;
    return 5.0 / std::sqrt(nbar);
}

}  // namespace pointerlab::pointer
