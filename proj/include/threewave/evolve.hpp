#ifndef THREEWAVE_EVOLVE_HPP
#define THREEWAVE_EVOLVE_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "threewave/classical.hpp"
#include "threewave/fock.hpp"
#include "threewave/hamiltonian.hpp"
#include "threewave/spectral.hpp"

// Schrodinger propagation i dPsi/dtau = H Psi in the invariant subspace.
// Default route is spectral (diagonalize once, evaluate at any tau with no
// accumulation error); fixed-step RK4 on the coupled amplitude equations is
// kept as an independent cross-check.

namespace threewave {

class integration_error : public std::runtime_error {
public:
    explicit integration_error(const std::string& what) : std::runtime_error(what) {}
};

enum class PropagationMethod { ExactEigen, Rk4 };

struct EvolutionConfig {
    PropagationMethod method = PropagationMethod::ExactEigen;
    double dt = 0;  // rk4 step; 0 selects min(0.1/h_max, 1e-3)
    std::vector<double> tau_grid;
    double norm_check = 1e-8;
    bool record_probabilities = true;
};

inline double default_rk4_step(const TridiagonalHamiltonian& H) {
    const double hmax = H.max_coupling();
    return hmax > 0 ? std::min(0.1 / hmax, 1e-3) : 1e-3;
}

inline void validate_tau_grid(const std::vector<double>& grid) {
    if (grid.empty()) throw std::invalid_argument("tau_grid: must be nonempty");
    if (grid.front() != 0.0) throw std::invalid_argument("tau_grid: must start at 0");
    for (std::size_t k = 1; k < grid.size(); ++k)
        if (!(grid[k] > grid[k - 1]))
            throw std::invalid_argument("tau_grid: must be strictly increasing");
}

inline std::vector<double> uniform_tau_grid(double tau_max, int points) {
    if (!(tau_max > 0) || points < 2)
        throw std::invalid_argument("uniform_tau_grid: need tau_max > 0 and points >= 2");
    std::vector<double> g(static_cast<std::size_t>(points));
    for (int k = 0; k < points; ++k)
        g[static_cast<std::size_t>(k)] = tau_max * static_cast<double>(k) / (points - 1);
    return g;
}

// Immutable spectral propagator; the eigendecomposition is done once and can
// be shared across threads for concurrent reads.
class SpectralPropagator {
public:
    explicit SpectralPropagator(const TridiagonalHamiltonian& H) : es_(eigensystem(H)) {}
    explicit SpectralPropagator(EigenSystem es) : es_(std::move(es)) {}

    const EigenSystem& eigen() const { return es_; }

    // Psi(tau) = sum_j eps_j v_j exp(-i lambda_j tau)
    std::vector<complexd> amplitudes_at(const WaveFunction& psi0, double tau) const {
        const std::vector<complexd> eps = eigen_weights(psi0, es_);
        const int n = es_.dimension();
        std::vector<complexd> out(static_cast<std::size_t>(n), complexd(0, 0));
        for (int j = 0; j < n; ++j) {
            const complexd phase =
                eps[static_cast<std::size_t>(j)] *
                std::exp(complexd(0.0, -es_.lambdas[static_cast<std::size_t>(j)] * tau));
            const auto& v = es_.vectors[static_cast<std::size_t>(j)];
            for (int k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] += phase * v[static_cast<std::size_t>(k)];
        }
        return out;
    }

    WaveFunction propagate(const WaveFunction& psi0, double tau) const {
        return WaveFunction(psi0.subspace(), amplitudes_at(psi0, tau));
    }

private:
    EigenSystem es_;
};

namespace detail {

// One RK4 step of dalpha/dtau = -i H alpha.
inline void rk4_step(const TridiagonalHamiltonian& H, std::vector<complexd>& a, double dt,
                     std::vector<complexd>& k1, std::vector<complexd>& k2,
                     std::vector<complexd>& k3, std::vector<complexd>& k4,
                     std::vector<complexd>& tmp) {
    const std::size_t d = a.size();
    const complexd mi(0.0, -1.0);
    H.apply_into(a, k1);
    for (std::size_t i = 0; i < d; ++i) tmp[i] = a[i] + (0.5 * dt) * (mi * k1[i]);
    H.apply_into(tmp, k2);
    for (std::size_t i = 0; i < d; ++i) tmp[i] = a[i] + (0.5 * dt) * (mi * k2[i]);
    H.apply_into(tmp, k3);
    for (std::size_t i = 0; i < d; ++i) tmp[i] = a[i] + dt * (mi * k3[i]);
    H.apply_into(tmp, k4);
    for (std::size_t i = 0; i < d; ++i)
        a[i] += (dt / 6.0) * (mi * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
}

inline std::size_t steps_for(double span, double dt) {
    const double raw = span / dt;
    const auto n = static_cast<std::size_t>(std::llround(raw));
    if (n == 0 || std::abs(raw - static_cast<double>(n)) > 1e-9 * std::max(1.0, raw))
        throw std::invalid_argument(
            "rk4 propagation: tau interval is not an integral multiple of dt");
    return n;
}

}  // namespace detail

inline std::vector<complexd> rk4_amplitudes(const TridiagonalHamiltonian& H,
                                            const std::vector<complexd>& a0, double tau,
                                            double dt) {
    std::vector<complexd> a = a0;
    if (tau == 0.0) return a;
    const std::size_t n = detail::steps_for(tau, dt);
    const double step = tau / static_cast<double>(n);
    std::vector<complexd> k1(a.size()), k2(a.size()), k3(a.size()), k4(a.size()), tmp(a.size());
    for (std::size_t s = 0; s < n; ++s) {
        detail::rk4_step(H, a, step, k1, k2, k3, k4, tmp);
        for (const complexd& x : a)
            if (!std::isfinite(x.real()) || !std::isfinite(x.imag()))
                throw divergence_error("rk4 propagation: non-finite amplitude",
                                       static_cast<double>(s) * step);
    }
    return a;
}

// tau may be negative here; the spectral propagator is exact either way and
// the diagnostics (finite differences, parity checks) rely on it.
inline WaveFunction propagate(const TridiagonalHamiltonian& H, const WaveFunction& psi0,
                              double tau, const EvolutionConfig& cfg = {}) {
    if (!(psi0.subspace() == H.spec()))
        throw std::invalid_argument("propagate: state and Hamiltonian subspaces differ");
    std::vector<complexd> a;
    double quality = 0;
    if (cfg.method == PropagationMethod::ExactEigen) {
        SpectralPropagator prop(H);
        a = prop.amplitudes_at(psi0, tau);
        quality = std::max(cfg.norm_check, 1e-10);
    } else {
        if (tau < 0) throw std::domain_error("propagate: rk4 needs tau >= 0");
        const double dt = cfg.dt > 0 ? cfg.dt : default_rk4_step(H);
        a = rk4_amplitudes(H, psi0.amplitudes(), tau, dt);
        quality = cfg.norm_check;
    }
    double norm2 = 0;
    for (const complexd& x : a) norm2 += std::norm(x);
    const double drift = std::abs(norm2 - 1.0);
    if (!std::isfinite(norm2) || drift > quality)
        throw integration_error("propagate: norm drift " + std::to_string(drift) +
                                " exceeds tolerance " + std::to_string(quality));
    if (drift > kNormTolerance) return WaveFunction::renormalized(psi0.subspace(), std::move(a));
    return WaveFunction(psi0.subspace(), std::move(a));
}

struct EvolutionResult {
    std::vector<ObservableSnapshot> snapshots;
    WaveFunction final_state;
    double norm_drift = 0;
};

inline EvolutionResult evolve_observables(const TridiagonalHamiltonian& H,
                                          const WaveFunction& psi0, const EvolutionConfig& cfg) {
    if (!(psi0.subspace() == H.spec()))
        throw std::invalid_argument("evolve_observables: state and Hamiltonian subspaces differ");
    validate_tau_grid(cfg.tau_grid);
    std::vector<ObservableSnapshot> snaps;
    snaps.reserve(cfg.tau_grid.size());
    double drift = 0;

    auto record = [&](const std::vector<complexd>& a, double tau) {
        double norm2 = 0;
        for (const complexd& x : a) norm2 += std::norm(x);
        if (!std::isfinite(norm2))
            throw divergence_error("evolve_observables: non-finite state", tau);
        drift = std::max(drift, std::abs(norm2 - 1.0));
        snaps.push_back(raw::snapshot(psi0.subspace(), a, tau, cfg.record_probabilities));
    };

    if (cfg.method == PropagationMethod::ExactEigen) {
        SpectralPropagator prop(H);
        std::vector<complexd> a;
        for (double tau : cfg.tau_grid) {
            a = prop.amplitudes_at(psi0, tau);
            record(a, tau);
        }
        if (drift > cfg.norm_check)
            throw integration_error("evolve_observables: spectral norm drift " +
                                    std::to_string(drift));
        return EvolutionResult{std::move(snaps), WaveFunction(psi0.subspace(), std::move(a)),
                               drift};
    }

    const double dt = cfg.dt > 0 ? cfg.dt : default_rk4_step(H);
    std::vector<complexd> a = psi0.amplitudes();
    std::vector<complexd> k1(a.size()), k2(a.size()), k3(a.size()), k4(a.size()), tmp(a.size());
    record(a, cfg.tau_grid.front());
    for (std::size_t g = 1; g < cfg.tau_grid.size(); ++g) {
        const double span = cfg.tau_grid[g] - cfg.tau_grid[g - 1];
        const std::size_t n = detail::steps_for(span, dt);
        const double step = span / static_cast<double>(n);
        for (std::size_t s = 0; s < n; ++s) detail::rk4_step(H, a, step, k1, k2, k3, k4, tmp);
        record(a, cfg.tau_grid[g]);
    }
    if (drift > cfg.norm_check)
        throw integration_error("evolve_observables: rk4 norm drift " + std::to_string(drift) +
                                " exceeds norm_check " + std::to_string(cfg.norm_check));
    return EvolutionResult{std::move(snaps),
                           WaveFunction::renormalized(psi0.subspace(), std::move(a)), drift};
}

// Residual of the Heisenberg second-order equation for <n1>: compares the
// finite-difference second tau-derivative of <n1> against
//   2 (s2 s3 + 3 <n1^2> - (2 s2 + 2 s3 + 1) <n1>)
// at tau = 0. Relative to max(1, |rhs|). fd_step = 0 picks 0.005 / h_max.
inline double heisenberg_rhs_check(const TridiagonalHamiltonian& H, const WaveFunction& psi,
                                   double fd_step = 0) {
    const double hmax = H.max_coupling();
    const double delta = fd_step > 0 ? fd_step : (hmax > 0 ? 0.005 / hmax : 1e-3);
    SpectralPropagator prop(H);

    auto n1_at = [&](double tau) {
        const std::vector<complexd> a = prop.amplitudes_at(psi, tau);
        const double s2 = H.spec().s2;
        double acc = 0;
        for (std::size_t j = 0; j < a.size(); ++j)
            acc += std::norm(a[j]) * (s2 - static_cast<double>(j));
        return acc;
    };

    const double fd2 = (n1_at(delta) - 2.0 * n1_at(0.0) + n1_at(-delta)) / (delta * delta);

    const double s2 = H.spec().s2, s3 = H.spec().s3;
    const Expectations e = expectations(psi);
    double n1sq = 0;
    for (std::size_t j = 0; j < psi.amplitudes().size(); ++j) {
        const double n1 = s2 - static_cast<double>(j);
        n1sq += std::norm(psi.amplitudes()[j]) * n1 * n1;
    }
    const double rhs = 2.0 * (s2 * s3 + 3.0 * n1sq - (2.0 * s2 + 2.0 * s3 + 1.0) * e.n1);
    return std::abs(fd2 - rhs) / std::max(1.0, std::abs(rhs));
}

}  // namespace threewave

#endif  // THREEWAVE_EVOLVE_HPP
