#ifndef THREEWAVE_FOCK_HPP
#define THREEWAVE_FOCK_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

// Invariant subspace of the three-wave interaction: occupation-number basis
// states sharing fixed eigenvalues of s2 = n1 + n3 and s3 = n1 + n2, wave
// functions over that basis, and observable extraction.

namespace threewave {

using complexd = std::complex<double>;

// Absolute tolerance on |sum |alpha_i|^2 - 1|. Operations never renormalize
// silently; drift past this is an integrator diagnostic worth surfacing.
inline constexpr double kNormTolerance = 1e-9;

class normalization_error : public std::runtime_error {
public:
    explicit normalization_error(const std::string& what) : std::runtime_error(what) {}
};

// Conserved quantum numbers (s2, s3) fixing an invariant subspace of
// dimension d = s2 + 1. Convention: s3 >= s2; callers with s3 < s2 must
// relabel waves 2 and 3 themselves.
struct SubspaceSpec {
    int s2 = 0;
    int s3 = 0;

    SubspaceSpec(int s2_, int s3_) : s2(s2_), s3(s3_) {
        if (s2_ < 0 || s3_ < 0)
            throw std::domain_error("SubspaceSpec: s2 and s3 must be nonnegative");
        if (s3_ < s2_)
            throw std::domain_error(
                "SubspaceSpec: convention requires s3 >= s2 (relabel waves 2 and 3)");
    }

    int dimension() const { return s2 + 1; }

    friend bool operator==(const SubspaceSpec& a, const SubspaceSpec& b) {
        return a.s2 == b.s2 && a.s3 == b.s3;
    }
};

inline SubspaceSpec subspace_dimension(int s2, int s3) { return SubspaceSpec(s2, s3); }

// psi_i = |s2-i, s3-s2+i, i>
struct BasisState {
    int index;
    int n1, n2, n3;
};

inline BasisState basis_state(const SubspaceSpec& spec, int i) {
    if (i < 0 || i > spec.s2)
        throw std::out_of_range("basis_state: index " + std::to_string(i) +
                                " outside [0, " + std::to_string(spec.s2) + "]");
    return BasisState{i, spec.s2 - i, spec.s3 - spec.s2 + i, i};
}

// State vector in the invariant subspace: alpha over the basis states psi_i.
// Construction enforces unit norm; use renormalized() to repair a drifted
// amplitude vector explicitly.
class WaveFunction {
public:
    WaveFunction(SubspaceSpec spec, std::vector<complexd> amplitudes)
        : spec_(spec), amplitudes_(std::move(amplitudes)) {
        if (static_cast<int>(amplitudes_.size()) != spec_.dimension())
            throw std::invalid_argument("WaveFunction: amplitude vector has size " +
                                        std::to_string(amplitudes_.size()) + ", expected " +
                                        std::to_string(spec_.dimension()));
        const double err = norm_error();
        if (err > kNormTolerance)
            throw normalization_error("WaveFunction: |norm^2 - 1| = " + std::to_string(err) +
                                      " exceeds tolerance");
    }

    const SubspaceSpec& subspace() const { return spec_; }
    const std::vector<complexd>& amplitudes() const { return amplitudes_; }
    int dimension() const { return spec_.dimension(); }

    double norm_squared() const {
        double s = 0;
        for (const complexd& a : amplitudes_) s += std::norm(a);
        return s;
    }
    double norm_error() const { return std::abs(norm_squared() - 1.0); }

    std::vector<double> probabilities() const {
        std::vector<double> p(amplitudes_.size());
        for (std::size_t i = 0; i < amplitudes_.size(); ++i) p[i] = std::norm(amplitudes_[i]);
        return p;
    }

    static WaveFunction basis(const SubspaceSpec& spec, int m) {
        if (m < 0 || m > spec.s2) throw std::out_of_range("WaveFunction::basis: index out of range");
        std::vector<complexd> a(spec.dimension(), complexd(0.0, 0.0));
        a[static_cast<std::size_t>(m)] = 1.0;
        return WaveFunction(spec, std::move(a));
    }

    static WaveFunction renormalized(SubspaceSpec spec, std::vector<complexd> amplitudes) {
        double s = 0;
        for (const complexd& a : amplitudes) s += std::norm(a);
        if (!(s > 0) || !std::isfinite(s))
            throw normalization_error("WaveFunction::renormalized: vector has no finite norm");
        const double inv = 1.0 / std::sqrt(s);
        for (complexd& a : amplitudes) a *= inv;
        return WaveFunction(spec, std::move(amplitudes));
    }

private:
    SubspaceSpec spec_;
    std::vector<complexd> amplitudes_;
};

struct Expectations {
    double n1, n2, n3;
};

namespace raw {

// Observable accessors on bare amplitude vectors. No norm validation; the
// time-evolution code uses these to read drifted integrator states without
// renormalizing them.
inline Expectations expectations(const SubspaceSpec& spec, const std::vector<complexd>& a) {
    double en3 = 0;
    for (std::size_t j = 0; j < a.size(); ++j) en3 += std::norm(a[j]) * static_cast<double>(j);
    const double s2 = spec.s2;
    const double s3 = spec.s3;
    return Expectations{s2 - en3, s3 - s2 + en3, en3};
}

inline double variance_n1(const SubspaceSpec& spec, const std::vector<complexd>& a) {
    const double s2 = spec.s2;
    double m1 = 0, m2 = 0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double p = std::norm(a[j]);
        const double n1 = s2 - static_cast<double>(j);
        m1 += p * n1;
        m2 += p * n1 * n1;
    }
    return m2 - m1 * m1;
}

inline double second_moment_n1(const SubspaceSpec& spec, const std::vector<complexd>& a) {
    const double s2 = spec.s2;
    double m2 = 0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double n1 = s2 - static_cast<double>(j);
        m2 += std::norm(a[j]) * n1 * n1;
    }
    return m2;
}

}  // namespace raw

// <n3> = sum_j |alpha_j|^2 j; <n1> = s2 - <n3>; <n2> = s3 - s2 + <n3>.
inline Expectations expectations(const WaveFunction& psi) {
    return raw::expectations(psi.subspace(), psi.amplitudes());
}

// delta_1 = <n1^2> - <n1>^2, in [0, s2^2/4] for any normalized state.
inline double variance_n1(const WaveFunction& psi) {
    return raw::variance_n1(psi.subspace(), psi.amplitudes());
}

// One point of an observable time series. tau = t * |g|.
struct ObservableSnapshot {
    double tau = 0;
    double en1 = 0, en2 = 0, en3 = 0;
    double var_n1 = 0;
    std::vector<double> probabilities;  // empty when not recorded
};

inline ObservableSnapshot snapshot(const WaveFunction& psi, double tau,
                                   bool record_probabilities = true) {
    ObservableSnapshot s;
    s.tau = tau;
    const Expectations e = expectations(psi);
    s.en1 = e.n1;
    s.en2 = e.n2;
    s.en3 = e.n3;
    s.var_n1 = variance_n1(psi);
    if (record_probabilities) s.probabilities = psi.probabilities();
    return s;
}

namespace raw {

inline ObservableSnapshot snapshot(const SubspaceSpec& spec, const std::vector<complexd>& a,
                                   double tau, bool record_probabilities = true) {
    ObservableSnapshot s;
    s.tau = tau;
    const Expectations e = expectations(spec, a);
    s.en1 = e.n1;
    s.en2 = e.n2;
    s.en3 = e.n3;
    s.var_n1 = variance_n1(spec, a);
    if (record_probabilities) {
        s.probabilities.resize(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) s.probabilities[i] = std::norm(a[i]);
    }
    return s;
}

}  // namespace raw

}  // namespace threewave

#endif  // THREEWAVE_FOCK_HPP
