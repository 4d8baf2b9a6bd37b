#ifndef THREEWAVE_TEST_SUPPORT_HPP
#define THREEWAVE_TEST_SUPPORT_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <vector>

#include "threewave/fock.hpp"

// Shared test utilities: a deterministic RNG (reseedable via THREEWAVE_SEED)
// and an independent dense Jacobi eigensolver used as the oracle for the
// tridiagonal QL implementation.

namespace twtest {

// xorshift64*, deterministic across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed = default_seed()) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

    static std::uint64_t default_seed() {
        if (const char* env = std::getenv("THREEWAVE_SEED")) {
            const unsigned long long v = std::strtoull(env, nullptr, 10);
            if (v) return v;
        }
        return 0x5deece66dull;
    }

    std::uint64_t next() {
        state_ ^= state_ >> 12;
        state_ ^= state_ << 25;
        state_ ^= state_ >> 27;
        return state_ * 0x2545f4914f6cdd1dull;
    }

    double uniform() {  // in [0, 1)
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    std::uint64_t state_;
};

inline std::vector<threewave::complexd> random_amplitudes(Rng& rng, int d) {
    std::vector<threewave::complexd> a(static_cast<std::size_t>(d));
    for (auto& x : a) x = threewave::complexd(rng.uniform(-1, 1), rng.uniform(-1, 1));
    return a;
}

inline threewave::WaveFunction random_state(Rng& rng, const threewave::SubspaceSpec& spec) {
    return threewave::WaveFunction::renormalized(spec, random_amplitudes(rng, spec.dimension()));
}

// Cyclic Jacobi eigenvalue iteration on a dense symmetric matrix. Slow and
// simple; independent of the QL path it checks.
struct DenseEigen {
    std::vector<double> values;                // ascending
    std::vector<std::vector<double>> vectors;  // vectors[j] = eigenvector j
};

inline DenseEigen jacobi_eigensystem(std::vector<std::vector<double>> A) {
    const std::size_t n = A.size();
    std::vector<std::vector<double>> V(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) V[i][i] = 1.0;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += A[p][q] * A[p][q];
        if (off < 1e-26) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                if (A[p][q] == 0.0) continue;
                const double theta = (A[q][q] - A[p][p]) / (2.0 * A[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = A[k][p], akq = A[k][q];
                    A[k][p] = c * akp - s * akq;
                    A[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = A[p][k], aqk = A[q][k];
                    A[p][k] = c * apk - s * aqk;
                    A[q][k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = V[k][p], vkq = V[k][q];
                    V[k][p] = c * vkp - s * vkq;
                    V[k][q] = s * vkp + c * vkq;
                }
            }
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return A[a][a] < A[b][b]; });
    DenseEigen out;
    out.values.resize(n);
    out.vectors.assign(n, std::vector<double>(n));
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = A[order[j]][order[j]];
        for (std::size_t k = 0; k < n; ++k) out.vectors[j][k] = V[k][order[j]];
    }
    return out;
}

inline std::vector<std::vector<double>> dense_from_offdiag(const std::vector<double>& h) {
    const std::size_t n = h.size() + 1;
    std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i + 1 < n; ++i) A[i][i + 1] = A[i + 1][i] = h[i];
    return A;
}

}  // namespace twtest

#endif  // THREEWAVE_TEST_SUPPORT_HPP
