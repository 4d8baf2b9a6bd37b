#ifndef THREEWAVE_LINEAR_HPP
#define THREEWAVE_LINEAR_HPP

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "threewave/classical.hpp"
#include "threewave/fock.hpp"
#include "threewave/hamiltonian.hpp"

// Spread initial states, the initial-variance series, and the linearized
// quantum instability solution
//   dn1(tau) = B_Q/gamma_Q^2 + C1 e^{gamma_Q tau} - (B_Q/gamma_Q^2 + C1) e^{-gamma_Q tau}
// with gamma_Q^2 = 4 (n1i - n2i - n3i - 1/2).

namespace threewave {

// Geometric spread profile alpha_i ~ epsilon^|m-i| centered on basis state m.
struct SpreadSpec {
    int m = 0;
    double epsilon = 0;
};

// Truncated at the subspace boundaries and renormalized; the closed-form
// variance series is exact only for interior m.
inline WaveFunction spread_state(const SubspaceSpec& spec, const SpreadSpec& s) {
    if (s.m < 0 || s.m > spec.s2)
        throw std::out_of_range("spread_state: center index out of range");
    if (!(s.epsilon >= 0 && s.epsilon < 1))
        throw std::domain_error("spread_state: epsilon must lie in [0, 1)");
    std::vector<complexd> a(static_cast<std::size_t>(spec.dimension()), complexd(0, 0));
    for (int i = 0; i <= spec.s2; ++i)
        a[static_cast<std::size_t>(i)] =
            s.epsilon == 0 ? (i == s.m ? 1.0 : 0.0) : std::pow(s.epsilon, std::abs(s.m - i));
    return WaveFunction::renormalized(spec, std::move(a));
}

// delta_1(0) = 2 eps^2 (1 - eps^2) / (1 + eps^2)^2 * sum_n eps^{2n} (2n(n+1) + 1),
// summed to machine precision (the terms decay geometrically).
inline double initial_variance(double epsilon) {
    if (!(epsilon >= 0 && epsilon < 1))
        throw std::domain_error("initial_variance: epsilon must lie in [0, 1)");
    if (epsilon == 0) return 0.0;
    const double r = epsilon * epsilon;
    const double pre = 2.0 * r * (1.0 - r) / ((1.0 + r) * (1.0 + r));
    double sum = 0.0, rn = 1.0;
    for (long long n = 0;; ++n) {
        const double term = rn * (2.0 * static_cast<double>(n) * (static_cast<double>(n) + 1.0) + 1.0);
        sum += term;
        rn *= r;
        if (term < 1e-18 * sum && n > 2) break;
    }
    return pre * sum;
}

// Short-time variance growth delta_1(tau) ~ delta_1(0) + 2 eps (h_m - h_{m-1}) tau,
// valid while tau << 1/h_m. Defined for interior m only (h_{m-1} needs m >= 1).
struct VarianceGrowthBound {
    double slope;
    double valid_until;
};

inline VarianceGrowthBound variance_growth_bound(const SubspaceSpec& spec, const SpreadSpec& s) {
    if (s.m < 1 || s.m > spec.s2 - 1)
        throw std::out_of_range("variance_growth_bound: center must be interior (1 <= m <= s2-1)");
    const double hm = coupling(spec, s.m);
    const double hm1 = coupling(spec, s.m - 1);
    return VarianceGrowthBound{2.0 * s.epsilon * (hm - hm1), 1.0 / hm};
}

// gamma_Q = 2 sqrt(n1i - n2i - n3i - 1/2); the -1/2 is the quantum correction
// to the classical rate.
inline GrowthRate quantum_growth_rate(double n1, double n2, double n3) {
    const double radicand = n1 - n2 - n3 - 0.5;
    return GrowthRate{2.0 * std::sqrt(std::abs(radicand)), radicand > 0};
}

struct QuantumLinearParams {
    double gamma = 0;     // gamma_Q
    double B = 0;         // B_Q = 2 n1i (1 + n2i + n3i) - 2 n2i n3i - 6 delta1_0
    double C1 = 0;
    double delta1_0 = 0;  // initial variance of n1
    Expectations n_init{0, 0, 0};
};

class stable_branch_error : public std::domain_error {
public:
    explicit stable_branch_error(const std::string& what) : std::domain_error(what) {}
};

// d<n1>/dtau(0) = Re sum_i 2 conj(alpha_i) alphadot_i (s2 - i) with
// alphadot = -i H alpha; solves gamma (2 C1 + B/gamma^2) = d<n1>/dtau(0).
inline double determine_C1(const TridiagonalHamiltonian& H, const WaveFunction& psi0,
                           double gamma, double B) {
    if (!(gamma > 0))
        throw std::domain_error("determine_C1: degenerate growth rate gamma_Q = 0");
    const std::vector<complexd> Ha = H.apply(psi0);
    const double s2 = H.spec().s2;
    double ndot = 0;
    for (std::size_t i = 0; i < Ha.size(); ++i) {
        const complexd adot = complexd(0.0, -1.0) * Ha[i];
        ndot += 2.0 * (std::conj(psi0.amplitudes()[i]) * adot).real() *
                (s2 - static_cast<double>(i));
    }
    return 0.5 * (ndot / gamma - B / (gamma * gamma));
}

// Builds the full parameter set from the actual expectations and variance of
// the constructed state (not the nominal occupations).
inline QuantumLinearParams quantum_linear_params(const TridiagonalHamiltonian& H,
                                                 const WaveFunction& psi0) {
    QuantumLinearParams p;
    p.n_init = expectations(psi0);
    p.delta1_0 = variance_n1(psi0);
    const GrowthRate g = quantum_growth_rate(p.n_init.n1, p.n_init.n2, p.n_init.n3);
    if (!g.unstable)
        throw stable_branch_error("quantum_linear_params: stable configuration "
                                  "(gamma_Q^2 <= 0); no exponential branch");
    p.gamma = g.gamma;
    p.B = 2.0 * p.n_init.n1 * (1.0 + p.n_init.n2 + p.n_init.n3) -
          2.0 * p.n_init.n2 * p.n_init.n3 - 6.0 * p.delta1_0;
    p.C1 = determine_C1(H, psi0, p.gamma, p.B);
    return p;
}

// dn1(0) = 0 by the sign convention (minus on the e^{-gamma tau} term).
inline double quantum_linear_solution(const QuantumLinearParams& p, double tau) {
    if (!(p.gamma > 0))
        throw stable_branch_error("quantum_linear_solution: stable branch has no "
                                  "exponential solution");
    const double g2 = p.gamma * p.gamma;
    return p.B / g2 + p.C1 * std::exp(p.gamma * tau) - (p.B / g2 + p.C1) * std::exp(-p.gamma * tau);
}

}  // namespace threewave

#endif  // THREEWAVE_LINEAR_HPP
