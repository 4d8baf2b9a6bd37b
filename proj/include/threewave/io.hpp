#ifndef THREEWAVE_IO_HPP
#define THREEWAVE_IO_HPP

#include <charconv>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "threewave/classical.hpp"
#include "threewave/fock.hpp"
#include "threewave/hamiltonian.hpp"
#include "threewave/linear.hpp"
#include "threewave/spectral.hpp"

// CSV and JSON emission. All numeric output uses shortest round-trip decimal
// formatting so files diff cleanly across runs.

namespace threewave {

class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

inline std::string format_double(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline std::ostream& put(std::ostream& out, double x) { return out << format_double(x); }

// FNV-1a, used for output checksums in run manifests.
inline std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string checksum_hex(std::string_view bytes) {
    static const char* digits = "0123456789abcdef";
    std::uint64_t h = fnv1a(bytes);
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return s;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open file for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open file for writing: " + path);
    out << content;
    if (!out) throw io_error("write failed: " + path);
}

// --- hamiltonian ---

inline void write_couplings_csv(const TridiagonalHamiltonian& H, std::ostream& out) {
    out << "i,h_i\n";
    for (std::size_t i = 0; i < H.offdiag().size(); ++i)
        out << i << ',' << format_double(H.offdiag()[i]) << '\n';
}

inline void write_couplings_json(const TridiagonalHamiltonian& H, std::ostream& out) {
    out << "{\"s2\":" << H.spec().s2 << ",\"s3\":" << H.spec().s3 << ",\"offdiag\":[";
    for (std::size_t i = 0; i < H.offdiag().size(); ++i) {
        if (i) out << ',';
        out << format_double(H.offdiag()[i]);
    }
    out << "]}\n";
}

// --- classical ---

inline void write_trajectory_csv(const std::vector<ClassicalState>& traj, std::ostream& out) {
    out << "t,I1,I2,I3,s2,s3,ReA1,ImA1,ReA2,ImA2,ReA3,ImA3\n";
    for (const ClassicalState& st : traj) {
        const auto I = st.actions();
        out << format_double(st.t) << ',' << format_double(I[0]) << ',' << format_double(I[1])
            << ',' << format_double(I[2]) << ',' << format_double(st.s2()) << ','
            << format_double(st.s3()) << ',' << format_double(st.a1.real()) << ','
            << format_double(st.a1.imag()) << ',' << format_double(st.a2.real()) << ','
            << format_double(st.a2.imag()) << ',' << format_double(st.a3.real()) << ','
            << format_double(st.a3.imag()) << '\n';
    }
}

// --- evolve ---

inline void write_timeseries_csv(const std::vector<ObservableSnapshot>& snaps, std::ostream& out,
                                 bool with_probabilities) {
    out << "tau,en1,en2,en3,var_n1";
    if (with_probabilities && !snaps.empty()) {
        for (std::size_t i = 0; i < snaps.front().probabilities.size(); ++i) out << ",p" << i;
    }
    out << '\n';
    for (const ObservableSnapshot& s : snaps) {
        out << format_double(s.tau) << ',' << format_double(s.en1) << ',' << format_double(s.en2)
            << ',' << format_double(s.en3) << ',' << format_double(s.var_n1);
        if (with_probabilities)
            for (double p : s.probabilities) out << ',' << format_double(p);
        out << '\n';
    }
}

// --- linear ---

inline void write_params_json(const QuantumLinearParams& p, double valid_until,
                              std::ostream& out) {
    out << "{\"gammaQ\":" << format_double(p.gamma)
        << ",\"gammaQ_sq\":" << format_double(p.gamma * p.gamma)
        << ",\"BQ\":" << format_double(p.B) << ",\"C1\":" << format_double(p.C1)
        << ",\"delta1_0\":" << format_double(p.delta1_0)
        << ",\"valid_until\":" << format_double(valid_until) << "}\n";
}

// --- spectral ---

inline void write_spectrum_csv(const EigenSystem& es, std::ostream& out) {
    out << "k,lambda_k\n";
    for (std::size_t k = 0; k < es.lambdas.size(); ++k)
        out << k << ',' << format_double(es.lambdas[k]) << '\n';
}

inline void write_lines_csv(const std::vector<SpectralLine>& lines, std::ostream& out) {
    out << "freq,weight_re,weight_im,i,j\n";
    for (const SpectralLine& l : lines)
        out << format_double(l.freq) << ',' << format_double(l.weight.real()) << ','
            << format_double(l.weight.imag()) << ',' << l.i << ',' << l.j << '\n';
}

inline void write_diagnostics_json(const SpacingReport& r, int n_distinct_freqs,
                                   std::ostream& out) {
    out << "{\"linear_verdict\":" << (r.linear ? "true" : "false")
        << ",\"base\":" << format_double(r.base)
        << ",\"max_deviation\":" << format_double(r.max_rel_deviation)
        << ",\"n_distinct_freqs\":" << n_distinct_freqs << "}\n";
}

}  // namespace threewave

#endif  // THREEWAVE_IO_HPP
