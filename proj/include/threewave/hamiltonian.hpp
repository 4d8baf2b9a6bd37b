#ifndef THREEWAVE_HAMILTONIAN_HPP
#define THREEWAVE_HAMILTONIAN_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "threewave/fock.hpp"

// Invariant-subspace Hamiltonian of the quantum three-wave interaction:
// a real symmetric tridiagonal matrix with vanishing diagonal (coupling
// constant g = -i absorbed; |g| enters only through tau = t|g|). Only the
// off-diagonal couplings are stored: O(d) memory, O(d) matvec.

namespace threewave {

// h_i = sqrt((s2 - i)(s3 - s2 + 1 + i)(i + 1)), 0 <= i <= s2 - 1.
inline double coupling(const SubspaceSpec& spec, int i) {
    if (i < 0 || i > spec.s2 - 1)
        throw std::out_of_range("coupling: index " + std::to_string(i) + " outside [0, " +
                                std::to_string(spec.s2 - 1) + "]");
    const double a = static_cast<double>(spec.s2 - i);
    const double b = static_cast<double>(spec.s3 - spec.s2 + 1 + i);
    const double c = static_cast<double>(i + 1);
    return std::sqrt(a * b * c);
}

class TridiagonalHamiltonian {
public:
    static TridiagonalHamiltonian build(const SubspaceSpec& spec) {
        std::vector<double> h(static_cast<std::size_t>(std::max(spec.s2, 0)));
        for (int i = 0; i < spec.s2; ++i) h[static_cast<std::size_t>(i)] = coupling(spec, i);
        return TridiagonalHamiltonian(spec, std::move(h));
    }

    const SubspaceSpec& spec() const { return spec_; }
    int dimension() const { return spec_.dimension(); }
    const std::vector<double>& offdiag() const { return offdiag_; }

    double coupling_at(int i) const {
        if (i < 0 || i >= static_cast<int>(offdiag_.size()))
            throw std::out_of_range("coupling_at: index out of range");
        return offdiag_[static_cast<std::size_t>(i)];
    }

    double max_coupling() const {
        double m = 0;
        for (double h : offdiag_) m = std::max(m, h);
        return m;
    }

    // (H x)_i = h_{i-1} x_{i-1} + h_i x_{i+1}
    template <typename Scalar>
    std::vector<Scalar> apply(const std::vector<Scalar>& x) const {
        if (x.size() != static_cast<std::size_t>(dimension()))
            throw std::invalid_argument("TridiagonalHamiltonian::apply: dimension mismatch");
        std::vector<Scalar> y(x.size(), Scalar(0));
        apply_into(x, y);
        return y;
    }

    template <typename Scalar>
    void apply_into(const std::vector<Scalar>& x, std::vector<Scalar>& y) const {
        const std::size_t d = x.size();
        for (std::size_t i = 0; i < d; ++i) {
            Scalar acc(0);
            if (i > 0) acc += offdiag_[i - 1] * x[i - 1];
            if (i + 1 < d) acc += offdiag_[i] * x[i + 1];
            y[i] = acc;
        }
    }

    std::vector<complexd> apply(const WaveFunction& psi) const {
        if (!(psi.subspace() == spec_))
            throw std::invalid_argument("TridiagonalHamiltonian::apply: wave function lives in a "
                                        "different subspace");
        return apply(psi.amplitudes());
    }

private:
    TridiagonalHamiltonian(SubspaceSpec spec, std::vector<double> offdiag)
        : spec_(spec), offdiag_(std::move(offdiag)) {}

    SubspaceSpec spec_;
    std::vector<double> offdiag_;  // size d-1
};

}  // namespace threewave

#endif  // THREEWAVE_HAMILTONIAN_HPP
