#ifndef THREEWAVE_CLASSICAL_HPP
#define THREEWAVE_CLASSICAL_HPP

#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "threewave/fock.hpp"

// Classical three-wave interaction: amplitude ODEs
//   dA1/dt =  A2 A3
//   dA2/dt = -A1 conj(A3)
//   dA3/dt = -A1 conj(A2)
// (coupling normalized to g = 1), the closed second-order action equations,
// and the linearized instability solution about an initial condition.

namespace threewave {

class divergence_error : public std::runtime_error {
public:
    divergence_error(const std::string& what, double last_valid_time)
        : std::runtime_error(what + " (last finite state at t = " +
                             std::to_string(last_valid_time) + ")"),
          last_valid_time(last_valid_time) {}
    double last_valid_time;
};

struct ClassicalState {
    complexd a1, a2, a3;
    double t = 0;

    std::array<double, 3> actions() const { return {std::norm(a1), std::norm(a2), std::norm(a3)}; }
    double s2() const { return std::norm(a1) + std::norm(a3); }
    double s3() const { return std::norm(a1) + std::norm(a2); }
};

namespace detail {

inline std::array<complexd, 3> amplitude_rhs(const std::array<complexd, 3>& a) {
    return {a[1] * a[2], -a[0] * std::conj(a[2]), -a[0] * std::conj(a[1])};
}

}  // namespace detail

// gamma_C = 2 sqrt(I1 - I2 - I3). A nonpositive radicand marks the stable
// (oscillatory) branch; |gamma| still reports 2 sqrt|radicand|.
struct GrowthRate {
    double gamma;  // magnitude, >= 0
    bool unstable;
};

inline GrowthRate classical_growth_rate(double i1, double i2, double i3) {
    if (i1 < 0 || i2 < 0 || i3 < 0)
        throw std::domain_error("classical_growth_rate: actions must be nonnegative");
    const double radicand = i1 - i2 - i3;
    return GrowthRate{2.0 * std::sqrt(std::abs(radicand)), radicand > 0};
}

inline double classical_default_step(double i1, double i2, double i3) {
    const GrowthRate g = classical_growth_rate(i1, i2, i3);
    return g.unstable && g.gamma > 0 ? 1e-4 / g.gamma : 1e-4;
}

// Fixed-step RK4 on the amplitude equations. Conservation of s2, s3 over a
// run is the accuracy diagnostic; see the module tests.
inline std::vector<ClassicalState> integrate_amplitudes(const ClassicalState& a0, double tau_end,
                                                        double dt) {
    if (!(dt > 0) || !(tau_end > 0))
        throw std::domain_error("integrate_amplitudes: dt and tau_end must be positive");
    const std::size_t nsteps = static_cast<std::size_t>(std::ceil(tau_end / dt - 1e-12));
    std::vector<ClassicalState> traj;
    traj.reserve(nsteps + 1);
    std::array<complexd, 3> a{a0.a1, a0.a2, a0.a3};
    traj.push_back(ClassicalState{a[0], a[1], a[2], 0.0});
    for (std::size_t step = 0; step < nsteps; ++step) {
        const auto k1 = detail::amplitude_rhs(a);
        std::array<complexd, 3> tmp;
        for (int j = 0; j < 3; ++j) tmp[j] = a[j] + 0.5 * dt * k1[j];
        const auto k2 = detail::amplitude_rhs(tmp);
        for (int j = 0; j < 3; ++j) tmp[j] = a[j] + 0.5 * dt * k2[j];
        const auto k3 = detail::amplitude_rhs(tmp);
        for (int j = 0; j < 3; ++j) tmp[j] = a[j] + dt * k3[j];
        const auto k4 = detail::amplitude_rhs(tmp);
        for (int j = 0; j < 3; ++j)
            a[j] += (dt / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        const double t = static_cast<double>(step + 1) * dt;
        for (int j = 0; j < 3; ++j)
            if (!std::isfinite(a[j].real()) || !std::isfinite(a[j].imag()))
                throw divergence_error("integrate_amplitudes: non-finite amplitude", traj.back().t);
        traj.push_back(ClassicalState{a[0], a[1], a[2], t});
    }
    return traj;
}

// State of the second-order action system integrated as first order in
// (I1, I2, I3, dI1, dI2, dI3).
struct ActionState {
    double t = 0;
    std::array<double, 3> actions{};
    std::array<double, 3> rates{};
};

namespace detail {

// Right-hand sides of the closed second-order action equations.
inline std::array<double, 3> action_acceleration(const std::array<double, 3>& I, double s2,
                                                 double s3) {
    const double i1 = I[0], i2 = I[1], i3 = I[2];
    return {
        2.0 * (s2 * s3 + 3.0 * i1 * i1 - 2.0 * (s2 + s3) * i1),
        2.0 * (s3 * (s2 - s3) - 3.0 * i2 * i2 + 2.0 * (2.0 * s3 - s2) * i2),
        2.0 * (s2 * (s3 - s2) - 3.0 * i3 * i3 + 2.0 * (2.0 * s2 - s3) * i3),
    };
}

}  // namespace detail

// Integrates the action equations with initial data (I0, dI0) where dI0 is
// dI1/dt(0); dI2/dt(0) = dI3/dt(0) = -dI0 follows from the first-order action
// relation. The three accelerations are cross-checked for the sign identity
// d2I1 = -d2I2 = -d2I3 at every step.
inline std::vector<ActionState> integrate_actions(const std::array<double, 3>& I0, double s2,
                                                  double s3, double tau_end, double dt,
                                                  double dI0) {
    if (!(dt > 0) || !(tau_end > 0))
        throw std::domain_error("integrate_actions: dt and tau_end must be positive");
    const double scale = std::max({1.0, std::abs(s2), std::abs(s3)});
    if (std::abs(I0[0] + I0[2] - s2) > 1e-9 * scale || std::abs(I0[0] + I0[1] - s3) > 1e-9 * scale)
        throw std::domain_error("integrate_actions: initial actions violate s2 = I1 + I3, "
                                "s3 = I1 + I2");

    using Vec6 = std::array<double, 6>;
    auto rhs = [s2, s3](const Vec6& y) {
        const std::array<double, 3> acc =
            detail::action_acceleration({y[0], y[1], y[2]}, s2, s3);
        return Vec6{y[3], y[4], y[5], acc[0], acc[1], acc[2]};
    };

    Vec6 y{I0[0], I0[1], I0[2], dI0, -dI0, -dI0};
    const std::size_t nsteps = static_cast<std::size_t>(std::ceil(tau_end / dt - 1e-12));
    std::vector<ActionState> traj;
    traj.reserve(nsteps + 1);
    traj.push_back(ActionState{0.0, {y[0], y[1], y[2]}, {y[3], y[4], y[5]}});
    for (std::size_t step = 0; step < nsteps; ++step) {
        const auto acc = detail::action_acceleration({y[0], y[1], y[2]}, s2, s3);
        const double acc_scale = std::max({1.0, std::abs(acc[0])});
        if (std::abs(acc[0] + acc[1]) > 1e-9 * acc_scale ||
            std::abs(acc[0] + acc[2]) > 1e-9 * acc_scale)
            throw std::logic_error("integrate_actions: second-derivative sign identity violated");

        const Vec6 k1 = rhs(y);
        Vec6 tmp;
        for (int j = 0; j < 6; ++j) tmp[j] = y[j] + 0.5 * dt * k1[j];
        const Vec6 k2 = rhs(tmp);
        for (int j = 0; j < 6; ++j) tmp[j] = y[j] + 0.5 * dt * k2[j];
        const Vec6 k3 = rhs(tmp);
        for (int j = 0; j < 6; ++j) tmp[j] = y[j] + dt * k3[j];
        const Vec6 k4 = rhs(tmp);
        for (int j = 0; j < 6; ++j) y[j] += (dt / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);

        const double t = static_cast<double>(step + 1) * dt;
        for (int j = 0; j < 6; ++j)
            if (!std::isfinite(y[j]))
                throw divergence_error("integrate_actions: non-finite action", traj.back().t);
        traj.push_back(ActionState{t, {y[0], y[1], y[2]}, {y[3], y[4], y[5]}});
    }
    return traj;
}

// Constants of the linearized solution
//   dI1(t) = B/gamma^2 + C1 e^{gamma t} - (B/gamma^2 + C1) e^{-gamma t}.
//
// C1 is fixed by matching dI1/dt(0) = 2 sqrt(I1 I2 I3), the exact initial
// slope for real nonnegative amplitudes A_j(0) = sqrt(I_ji); the module
// tests cross-check the resulting curve against the nonlinear integration.
struct ClassicalLinearParams {
    double gamma;  // growth rate gamma_C
    double B;      // B_C
    double C1;

    static ClassicalLinearParams from_actions(double i1, double i2, double i3) {
        const GrowthRate g = classical_growth_rate(i1, i2, i3);
        if (!g.unstable)
            throw std::domain_error(
                "ClassicalLinearParams: stable configuration (gamma_C^2 <= 0); the oscillatory "
                "branch is out of scope");
        const double gamma = g.gamma;
        const double B = 2.0 * i1 * (i2 + i3) - 2.0 * i2 * i3;
        const double C1 = std::sqrt(i1 * i2 * i3) / gamma - B / (2.0 * gamma * gamma);
        return ClassicalLinearParams{gamma, B, C1};
    }

    // Accepts a complex state but requires the real-amplitude convention the
    // C1 derivation assumes.
    static ClassicalLinearParams from_state(const ClassicalState& st) {
        const double mag =
            std::max({std::abs(st.a1), std::abs(st.a2), std::abs(st.a3), 1e-300});
        if (std::abs(st.a1.imag()) > 1e-12 * mag || std::abs(st.a2.imag()) > 1e-12 * mag ||
            std::abs(st.a3.imag()) > 1e-12 * mag || st.a1.real() < 0 || st.a2.real() < 0 ||
            st.a3.real() < 0)
            throw std::domain_error("ClassicalLinearParams: C1 requires real nonnegative initial "
                                    "amplitudes A_j(0) = sqrt(I_ji)");
        const auto I = st.actions();
        return from_actions(I[0], I[1], I[2]);
    }
};

inline double classical_linear_solution(const ClassicalLinearParams& p, double t) {
    if (t < 0) throw std::domain_error("classical_linear_solution: t must be nonnegative");
    const double g2 = p.gamma * p.gamma;
    return p.B / g2 + p.C1 * std::exp(p.gamma * t) -
           (p.B / g2 + p.C1) * std::exp(-p.gamma * t);
}

}  // namespace threewave

#endif  // THREEWAVE_CLASSICAL_HPP
