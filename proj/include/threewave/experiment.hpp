#ifndef THREEWAVE_EXPERIMENT_HPP
#define THREEWAVE_EXPERIMENT_HPP

#include <array>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "threewave/classical.hpp"
#include "threewave/evolve.hpp"
#include "threewave/fock.hpp"
#include "threewave/hamiltonian.hpp"
#include "threewave/io.hpp"
#include "threewave/linear.hpp"
#include "threewave/spectral.hpp"
#include "threewave/svg.hpp"

// Batch experiment runner behind the CLI: validated configs, deterministic
// artifact emission, run manifests with checksums, figure presets, and
// parameter sweeps.

namespace threewave {

inline constexpr const char* kVersion = "threewave 0.1.0";

class usage_error : public std::runtime_error {
public:
    explicit usage_error(const std::string& what) : std::runtime_error(what) {}
};

enum class ExperimentKind { Evolve, Classical, LinearCompare, Spectrum, Cascade, Recurrence };

inline std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::Evolve: return "evolve";
        case ExperimentKind::Classical: return "classical";
        case ExperimentKind::LinearCompare: return "linear-compare";
        case ExperimentKind::Spectrum: return "spectrum";
        case ExperimentKind::Cascade: return "cascade";
        case ExperimentKind::Recurrence: return "recurrence";
    }
    throw std::logic_error("unknown experiment kind");
}

inline ExperimentKind experiment_kind_from(const std::string& s) {
    if (s == "evolve") return ExperimentKind::Evolve;
    if (s == "classical") return ExperimentKind::Classical;
    if (s == "linear-compare") return ExperimentKind::LinearCompare;
    if (s == "spectrum") return ExperimentKind::Spectrum;
    if (s == "cascade") return ExperimentKind::Cascade;
    if (s == "recurrence") return ExperimentKind::Recurrence;
    throw usage_error("config.kind: unknown kind '" + s + "'");
}

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Evolve;
    std::string label = "run";

    int s2 = 0, s3 = 0;

    // Quantum initial condition: geometric spread around basis state m
    // (epsilon = 0 is the pure basis state).
    int m = 0;
    double epsilon = 0;

    // Classical initial actions, amplitudes A_j(0) = sqrt(I_j).
    std::optional<std::array<double, 3>> actions;

    double tau_max = 1.0;
    int points = 201;

    std::string method = "exact-eigen";  // or "rk4"
    double dt = 0;
    double norm_check = 1e-8;

    double horizon = 10.0;     // recurrence scan
    double threshold = 0.99;   // recurrence fidelity threshold

    bool probabilities = false;  // per-state columns in time-series CSV
    bool with_lines = false;     // spectrum runs also emit weights + lines

    std::vector<std::string> formats = {"csv"};

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

inline void to_json(nlohmann::json& j, const ExperimentConfig& c) {
    j = nlohmann::json{{"kind", to_string(c.kind)},
                       {"label", c.label},
                       {"s2", c.s2},
                       {"s3", c.s3},
                       {"m", c.m},
                       {"epsilon", c.epsilon},
                       {"tau_max", c.tau_max},
                       {"points", c.points},
                       {"method", c.method},
                       {"dt", c.dt},
                       {"norm_check", c.norm_check},
                       {"horizon", c.horizon},
                       {"threshold", c.threshold},
                       {"probabilities", c.probabilities},
                       {"with_lines", c.with_lines},
                       {"formats", c.formats}};
    if (c.actions) j["actions"] = *c.actions;
}

inline void from_json(const nlohmann::json& j, ExperimentConfig& c) {
    c.kind = experiment_kind_from(j.at("kind").get<std::string>());
    c.label = j.value("label", std::string("run"));
    c.s2 = j.value("s2", 0);
    c.s3 = j.value("s3", 0);
    c.m = j.value("m", 0);
    c.epsilon = j.value("epsilon", 0.0);
    c.tau_max = j.value("tau_max", 1.0);
    c.points = j.value("points", 201);
    c.method = j.value("method", std::string("exact-eigen"));
    c.dt = j.value("dt", 0.0);
    c.norm_check = j.value("norm_check", 1e-8);
    c.horizon = j.value("horizon", 10.0);
    c.threshold = j.value("threshold", 0.99);
    c.probabilities = j.value("probabilities", false);
    c.with_lines = j.value("with_lines", false);
    c.formats = j.value("formats", std::vector<std::string>{"csv"});
    if (j.contains("actions")) c.actions = j.at("actions").get<std::array<double, 3>>();
}

inline void validate(const ExperimentConfig& c) {
    auto fail = [](const std::string& field, const std::string& msg) {
        throw usage_error("config." + field + ": " + msg);
    };
    if (c.label.empty() || c.label.find('/') != std::string::npos)
        fail("label", "must be a nonempty file-name stem");
    if (c.kind == ExperimentKind::Classical) {
        if (!c.actions) fail("actions", "classical runs need initial actions (I1,I2,I3)");
        for (double v : *c.actions)
            if (v < 0) fail("actions", "actions must be nonnegative");
    } else {
        if (c.s2 < 0) fail("s2", "must be nonnegative");
        if (c.s3 < c.s2) fail("s3", "convention requires s3 >= s2");
        if (c.m < 0 || c.m > c.s2) fail("m", "basis index must lie in [0, s2]");
        if (c.epsilon < 0 || c.epsilon >= 1) fail("epsilon", "must lie in [0, 1)");
    }
    if (c.kind != ExperimentKind::Spectrum && c.kind != ExperimentKind::Recurrence) {
        if (!(c.tau_max > 0)) fail("tau_max", "must be positive");
        if (c.points < 2) fail("points", "need at least 2 grid points");
    }
    if (c.method != "exact-eigen" && c.method != "rk4")
        fail("method", "must be 'exact-eigen' or 'rk4'");
    if (c.dt < 0) fail("dt", "must be nonnegative (0 selects the default)");
    if (c.kind == ExperimentKind::Recurrence) {
        if (!(c.horizon > 0)) fail("horizon", "must be positive");
        if (!(c.threshold > 0 && c.threshold < 1)) fail("threshold", "must lie in (0, 1)");
    }
    for (const std::string& f : c.formats)
        if (f != "csv" && f != "json" && f != "svg") fail("formats", "unknown format '" + f + "'");
}

struct Artifact {
    std::string path;  // relative to the run directory
    std::string checksum;
};

struct RunManifest {
    std::string version;
    nlohmann::json config_echo;
    std::vector<Artifact> artifacts;
    double duration_ms = 0;
};

namespace detail {

class ArtifactWriter {
public:
    explicit ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw io_error("cannot create output directory " + dir_.string());
    }

    void emit(const std::string& name, const std::string& content) {
        write_file((dir_ / name).string(), content);
        artifacts_.push_back(Artifact{name, checksum_hex(content)});
    }

    const std::vector<Artifact>& artifacts() const { return artifacts_; }
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    std::vector<Artifact> artifacts_;
};

inline bool wants(const ExperimentConfig& c, const std::string& fmt) {
    for (const std::string& f : c.formats)
        if (f == fmt) return true;
    return false;
}

inline EvolutionConfig evolution_config(const ExperimentConfig& c, bool probabilities) {
    EvolutionConfig ec;
    ec.method = c.method == "rk4" ? PropagationMethod::Rk4 : PropagationMethod::ExactEigen;
    ec.dt = c.dt;
    ec.norm_check = c.norm_check;
    ec.record_probabilities = probabilities;
    ec.tau_grid = uniform_tau_grid(c.tau_max, c.points);
    return ec;
}

void run_one(const ExperimentConfig& c, ArtifactWriter& w);

}  // namespace detail

inline RunManifest run(const ExperimentConfig& config, const std::string& out_dir) {
    validate(config);
    const auto start = std::chrono::steady_clock::now();
    detail::ArtifactWriter writer{std::filesystem::path(out_dir)};
    detail::run_one(config, writer);

    RunManifest m;
    m.version = kVersion;
    m.config_echo = config;
    m.artifacts = writer.artifacts();
    m.duration_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start)
                        .count();

    nlohmann::json j{{"version", m.version},
                     {"duration_ms", m.duration_ms},
                     {"config", m.config_echo},
                     {"artifacts", nlohmann::json::array()}};
    for (const Artifact& a : m.artifacts)
        j["artifacts"].push_back({{"path", a.path}, {"checksum", a.checksum}});
    write_file((std::filesystem::path(out_dir) / "manifest.json").string(), j.dump(2) + "\n");
    return m;
}

// Re-checksums every artifact declared by <dir>/manifest.json.
inline bool verify_manifest(const std::string& dir) {
    const nlohmann::json j = nlohmann::json::parse(
        read_file((std::filesystem::path(dir) / "manifest.json").string()));
    for (const auto& a : j.at("artifacts")) {
        const std::string path = (std::filesystem::path(dir) / a.at("path").get<std::string>()).string();
        if (!std::filesystem::exists(path)) return false;
        if (checksum_hex(read_file(path)) != a.at("checksum").get<std::string>()) return false;
    }
    return true;
}

namespace detail {

inline void run_one(const ExperimentConfig& c, ArtifactWriter& w) {
    switch (c.kind) {
        case ExperimentKind::Evolve:
        case ExperimentKind::Cascade: {
            const SubspaceSpec spec(c.s2, c.s3);
            const TridiagonalHamiltonian H = TridiagonalHamiltonian::build(spec);
            const WaveFunction psi0 = spread_state(spec, SpreadSpec{c.m, c.epsilon});
            const bool probs = c.probabilities || c.kind == ExperimentKind::Cascade;
            if (probs && spec.dimension() > 1000)
                std::cerr << "warning: probability output is " << c.points << " rows x "
                          << spec.dimension() << " state columns\n";
            const EvolutionResult res = evolve_observables(H, psi0, evolution_config(c, probs));
            std::ostringstream csv;
            write_timeseries_csv(res.snapshots, csv, probs);
            w.emit(c.label + "_timeseries.csv", csv.str());
            if (wants(c, "svg")) {
                std::vector<double> taus;
                for (const auto& s : res.snapshots) taus.push_back(s.tau);
                SvgPlot plot(to_string(c.kind) + " (s2=" + std::to_string(c.s2) +
                                 ", s3=" + std::to_string(c.s3) + ")",
                             "tau", c.kind == ExperimentKind::Cascade ? "probability" : "value");
                if (c.kind == ExperimentKind::Cascade) {
                    const std::size_t nshow = std::min<std::size_t>(7, res.snapshots.front().probabilities.size());
                    for (std::size_t i = 0; i < nshow; ++i) {
                        std::vector<double> p;
                        for (const auto& s : res.snapshots) p.push_back(s.probabilities[i]);
                        plot.add_line(taus, p, "p" + std::to_string(i));
                    }
                } else {
                    std::vector<double> e1, e2, e3, v;
                    for (const auto& s : res.snapshots) {
                        e1.push_back(s.en1);
                        e2.push_back(s.en2);
                        e3.push_back(s.en3);
                        v.push_back(s.var_n1);
                    }
                    plot.add_line(taus, e1, "<n1>");
                    plot.add_line(taus, e2, "<n2>");
                    plot.add_line(taus, e3, "<n3>");
                    plot.add_line(taus, v, "var n1");
                }
                std::ostringstream svg;
                plot.write(svg);
                w.emit(c.label + "_timeseries.svg", svg.str());
            }
            break;
        }
        case ExperimentKind::Classical: {
            const auto I = *c.actions;
            const ClassicalState a0{std::sqrt(I[0]), std::sqrt(I[1]), std::sqrt(I[2]), 0.0};
            const double dt = c.dt > 0 ? c.dt : classical_default_step(I[0], I[1], I[2]);
            const auto traj = integrate_amplitudes(a0, c.tau_max, dt);
            // thin the stored trajectory to the requested number of points
            std::vector<ClassicalState> thin;
            const std::size_t stride = std::max<std::size_t>(1, traj.size() / static_cast<std::size_t>(c.points));
            for (std::size_t i = 0; i < traj.size(); i += stride) thin.push_back(traj[i]);
            if (thin.back().t != traj.back().t) thin.push_back(traj.back());
            std::ostringstream csv;
            write_trajectory_csv(thin, csv);
            w.emit(c.label + "_classical.csv", csv.str());
            if (wants(c, "svg")) {
                std::vector<double> t, i1, i2, i3;
                for (const auto& st : thin) {
                    const auto a = st.actions();
                    t.push_back(st.t);
                    i1.push_back(a[0]);
                    i2.push_back(a[1]);
                    i3.push_back(a[2]);
                }
                SvgPlot plot("classical actions", "t", "I_j");
                plot.add_line(t, i1, "I1");
                plot.add_line(t, i2, "I2");
                plot.add_line(t, i3, "I3");
                std::ostringstream svg;
                plot.write(svg);
                w.emit(c.label + "_classical.svg", svg.str());
            }
            break;
        }
        case ExperimentKind::LinearCompare: {
            const SubspaceSpec spec(c.s2, c.s3);
            const TridiagonalHamiltonian H = TridiagonalHamiltonian::build(spec);
            const WaveFunction psi0 = spread_state(spec, SpreadSpec{c.m, c.epsilon});
            const QuantumLinearParams params = quantum_linear_params(H, psi0);
            const EvolutionResult res = evolve_observables(H, psi0, evolution_config(c, false));
            std::ostringstream csv;
            csv << "tau,n1_exact,n1_linear\n";
            std::vector<double> taus, exact, lin;
            for (const auto& s : res.snapshots) {
                const double nlin = params.n_init.n1 + quantum_linear_solution(params, s.tau);
                csv << format_double(s.tau) << ',' << format_double(s.en1) << ','
                    << format_double(nlin) << '\n';
                taus.push_back(s.tau);
                exact.push_back(s.en1);
                lin.push_back(nlin);
            }
            w.emit(c.label + "_compare.csv", csv.str());
            const double valid_until =
                (c.m >= 1 && c.m <= c.s2 - 1)
                    ? variance_growth_bound(spec, SpreadSpec{c.m, c.epsilon}).valid_until
                    : (H.max_coupling() > 0 ? 1.0 / H.max_coupling() : 0.0);
            std::ostringstream pj;
            write_params_json(params, valid_until, pj);
            w.emit(c.label + "_params.json", pj.str());
            if (wants(c, "svg")) {
                SvgPlot plot("exact vs linear <n1>", "tau", "<n1>");
                plot.add_line(taus, exact, "exact");
                plot.add_line(taus, lin, "linear");
                std::ostringstream svg;
                plot.write(svg);
                w.emit(c.label + "_compare.svg", svg.str());
            }
            break;
        }
        case ExperimentKind::Spectrum: {
            const SubspaceSpec spec(c.s2, c.s3);
            const TridiagonalHamiltonian H = TridiagonalHamiltonian::build(spec);
            const EigenSystem es = eigensystem(H);
            std::ostringstream csv;
            write_spectrum_csv(es, csv);
            w.emit(c.label + "_spectrum.csv", csv.str());
            std::ostringstream hc;
            write_couplings_csv(H, hc);
            w.emit(c.label + "_couplings.csv", hc.str());
            const SpacingReport rep = spacing_diagnostic(es);
            const int ndist = count_distinct_frequencies(es.lambdas, 1e-6 * es.max_abs_lambda());
            std::ostringstream dj;
            write_diagnostics_json(rep, ndist, dj);
            w.emit(c.label + "_diagnostics.json", dj.str());
            if (c.with_lines) {
                const WaveFunction psi0 = spread_state(spec, SpreadSpec{c.m, c.epsilon});
                const std::vector<complexd> eps = eigen_weights(psi0, es);
                std::ostringstream wcsv;
                wcsv << "j,eps_re,eps_im\n";
                for (std::size_t j = 0; j < eps.size(); ++j)
                    wcsv << j << ',' << format_double(eps[j].real()) << ','
                         << format_double(eps[j].imag()) << '\n';
                w.emit(c.label + "_weights.csv", wcsv.str());
                const auto lines = spectral_lines_n3(psi0, es, 1e-12);
                std::ostringstream lcsv;
                write_lines_csv(lines, lcsv);
                w.emit(c.label + "_lines.csv", lcsv.str());
            }
            if (wants(c, "svg")) {
                std::vector<double> k, lam;
                for (std::size_t i = 0; i < es.lambdas.size(); ++i) {
                    k.push_back(static_cast<double>(i));
                    lam.push_back(es.lambdas[i]);
                }
                SvgPlot plot("eigenvalues (s2=" + std::to_string(c.s2) +
                                 ", s3=" + std::to_string(c.s3) + ")",
                             "k", "lambda_k");
                plot.add_points(k, lam, "spectrum");
                std::ostringstream svg;
                plot.write(svg);
                w.emit(c.label + "_spectrum.svg", svg.str());
            }
            break;
        }
        case ExperimentKind::Recurrence: {
            const SubspaceSpec spec(c.s2, c.s3);
            const TridiagonalHamiltonian H = TridiagonalHamiltonian::build(spec);
            const WaveFunction psi0 = spread_state(spec, SpreadSpec{c.m, c.epsilon});
            const RecurrenceResult r = recurrence_time(H, psi0, c.horizon, c.threshold);
            nlohmann::json j{{"found", r.found},
                             {"degenerate", r.degenerate},
                             {"horizon", c.horizon},
                             {"threshold", c.threshold}};
            if (r.found) {
                j["tau"] = r.tau;
                j["fidelity"] = r.fidelity;
            }
            w.emit(c.label + "_recurrence.json", j.dump(2) + "\n");
            break;
        }
    }
}

}  // namespace detail

// --- presets -----------------------------------------------------------

// Figure-reproduction presets; each expands to one or more configs that run
// into a single directory under one manifest.
inline std::vector<ExperimentConfig> preset_configs(const std::string& name) {
    auto base = [](ExperimentKind kind, std::string label, int s2, int s3) {
        ExperimentConfig c;
        c.kind = kind;
        c.label = std::move(label);
        c.s2 = s2;
        c.s3 = s3;
        return c;
    };
    if (name == "fig1") {
        ExperimentConfig c = base(ExperimentKind::LinearCompare, "fig1", 103, 110);
        c.m = 3;
        c.epsilon = 0.1;
        c.tau_max = 0.2;
        c.points = 401;
        return {c};
    }
    if (name == "fig2") {
        ExperimentConfig c = base(ExperimentKind::Cascade, "fig2", 100, 100);
        c.tau_max = 0.6;
        c.points = 601;
        c.probabilities = true;
        return {c};
    }
    if (name == "fig3") {
        ExperimentConfig a = base(ExperimentKind::Cascade, "fig3_unstable", 100, 100);
        a.tau_max = 0.6;
        a.points = 601;
        a.probabilities = true;
        ExperimentConfig b = base(ExperimentKind::Cascade, "fig3_stable", 100, 1000);
        b.tau_max = 0.1;
        b.points = 601;
        b.probabilities = true;
        return {a, b};
    }
    if (name == "fig4") {
        return {base(ExperimentKind::Spectrum, "fig4_unstable", 100, 100),
                base(ExperimentKind::Spectrum, "fig4_stable", 100, 1000)};
    }
    if (name == "fig5") {
        ExperimentConfig a = base(ExperimentKind::Spectrum, "fig5_unstable", 100, 100);
        a.with_lines = true;
        ExperimentConfig b = base(ExperimentKind::Spectrum, "fig5_stable", 100, 1000);
        b.with_lines = true;
        return {a, b};
    }
    throw usage_error("unknown preset '" + name + "' (expected fig1..fig5)");
}

inline RunManifest run_preset(const std::string& name, const std::string& out_dir,
                              const std::vector<std::string>& formats = {"csv"}) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<ExperimentConfig> configs = preset_configs(name);
    for (ExperimentConfig& c : configs) {
        c.formats = formats;
        validate(c);
    }
    detail::ArtifactWriter writer{std::filesystem::path(out_dir)};
    nlohmann::json echo = nlohmann::json::array();
    for (const ExperimentConfig& c : configs) {
        detail::run_one(c, writer);
        echo.push_back(c);
    }
    RunManifest m;
    m.version = kVersion;
    m.config_echo = std::move(echo);
    m.artifacts = writer.artifacts();
    m.duration_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    nlohmann::json j{{"version", m.version},
                     {"duration_ms", m.duration_ms},
                     {"preset", name},
                     {"config", m.config_echo},
                     {"artifacts", nlohmann::json::array()}};
    for (const Artifact& a : m.artifacts)
        j["artifacts"].push_back({{"path", a.path}, {"checksum", a.checksum}});
    write_file((std::filesystem::path(out_dir) / "manifest.json").string(), j.dump(2) + "\n");
    return m;
}

// --- sweep --------------------------------------------------------------

// One sweep row: a subspace plus spread initial condition. Closed-form
// columns (growth rates, C1) are always computed; the eigensystem-backed
// spacing columns and the propagation-backed divergence time are opt-in
// since they change the cost from O(d) to O(d^3).
struct SweepRow {
    int s2 = 0, s3 = 0;
    int m = 0;
    double epsilon = 0;
};

struct SweepSpec {
    std::vector<SweepRow> rows;
    bool with_spacing = false;
    bool with_divergence = false;
    double tau_max = 0.3;  // horizon for the divergence search
    int points = 601;
};

inline void from_json(const nlohmann::json& j, SweepSpec& s) {
    s.with_spacing = j.value("with_spacing", false);
    s.with_divergence = j.value("with_divergence", false);
    s.tau_max = j.value("tau_max", 0.3);
    s.points = j.value("points", 601);
    if (j.contains("rows"))
        for (const auto& r : j.at("rows"))
            s.rows.push_back(SweepRow{r.at("s2").get<int>(), r.at("s3").get<int>(),
                                      r.value("m", 0), r.value("epsilon", 0.0)});
    // shorthand: (n,0,0) scale rows at s2 = s3 = n
    if (j.contains("n_values"))
        for (const auto& n : j.at("n_values"))
            s.rows.push_back(SweepRow{n.get<int>(), n.get<int>(), 0, 0.0});
    // shorthand: s3 sweep at fixed s2
    if (j.contains("s3_values")) {
        const int s2 = j.value("s2", 100);
        for (const auto& v : j.at("s3_values"))
            s.rows.push_back(SweepRow{s2, v.get<int>(), 0, 0.0});
    }
}

struct SweepRowResult {
    SweepRow row;
    bool ok = false;
    std::string error;
    double gammaQ = 0, gammaC = 0, ratio_dev = 0, C1 = 0;
    std::optional<double> tau_divergence;
    std::optional<double> spacing_base;
    std::optional<double> spacing_dev;
};

namespace detail {

inline SweepRowResult sweep_row(const SweepRow& r, const SweepSpec& spec) {
    SweepRowResult out;
    out.row = r;
    try {
        const SubspaceSpec sub(r.s2, r.s3);
        const TridiagonalHamiltonian H = TridiagonalHamiltonian::build(sub);
        const WaveFunction psi0 = spread_state(sub, SpreadSpec{r.m, r.epsilon});
        const Expectations n = expectations(psi0);
        const GrowthRate gq = quantum_growth_rate(n.n1, n.n2, n.n3);
        const GrowthRate gc = classical_growth_rate(n.n1, n.n2, n.n3);
        out.gammaQ = gq.unstable ? gq.gamma : -gq.gamma;
        out.gammaC = gc.unstable ? gc.gamma : -gc.gamma;
        out.ratio_dev = gc.gamma > 0 ? std::abs(gq.gamma / gc.gamma - 1.0) : 0.0;
        if (gq.unstable) {
            const QuantumLinearParams p = quantum_linear_params(H, psi0);
            out.C1 = p.C1;
            if (spec.with_divergence) {
                EvolutionConfig ec;
                ec.tau_grid = uniform_tau_grid(spec.tau_max, spec.points);
                ec.record_probabilities = false;
                const EvolutionResult res = evolve_observables(H, psi0, ec);
                for (const auto& snap : res.snapshots) {
                    if (snap.tau == 0) continue;
                    const double lin = p.n_init.n1 + quantum_linear_solution(p, snap.tau);
                    if (std::abs(lin - snap.en1) > 0.10 * std::abs(snap.en1)) {
                        out.tau_divergence = snap.tau;
                        break;
                    }
                }
            }
        }
        if (spec.with_spacing) {
            const SpacingReport rep = spacing_diagnostic(eigensystem(H));
            out.spacing_base = rep.base;
            out.spacing_dev = rep.max_rel_deviation;
        }
        out.ok = true;
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

}  // namespace detail

// Runs rows (optionally in a worker pool); the report order is always the
// expansion order regardless of completion order.
inline std::vector<SweepRowResult> run_sweep(const SweepSpec& spec, int jobs = 1) {
    std::vector<SweepRowResult> results(spec.rows.size());
    if (spec.rows.empty()) return results;
    jobs = std::max(1, jobs);
    if (jobs == 1) {
        for (std::size_t i = 0; i < spec.rows.size(); ++i)
            results[i] = detail::sweep_row(spec.rows[i], spec);
        return results;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= spec.rows.size()) return;
            results[i] = detail::sweep_row(spec.rows[i], spec);
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    return results;
}

inline void write_sweep_csv(const std::vector<SweepRowResult>& rows, std::ostream& out) {
    out << "s2,s3,m,epsilon,ok,gammaQ,gammaC,ratio_dev,C1,tau_divergence,spacing_base,"
           "spacing_dev,error\n";
    for (const SweepRowResult& r : rows) {
        out << r.row.s2 << ',' << r.row.s3 << ',' << r.row.m << ','
            << format_double(r.row.epsilon) << ',' << (r.ok ? 1 : 0) << ','
            << format_double(r.gammaQ) << ',' << format_double(r.gammaC) << ','
            << format_double(r.ratio_dev) << ',' << format_double(r.C1) << ',';
        if (r.tau_divergence) out << format_double(*r.tau_divergence);
        out << ',';
        if (r.spacing_base) out << format_double(*r.spacing_base);
        out << ',';
        if (r.spacing_dev) out << format_double(*r.spacing_dev);
        out << ',' << r.error << '\n';
    }
}

// --- exit codes ----------------------------------------------------------

enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitNumerical = 3, kExitIo = 4 };

// Maps the in-flight exception to the CLI exit code classes.
inline int classify_current_exception() {
    try {
        throw;
    } catch (const usage_error&) {
        return kExitUsage;
    } catch (const io_error&) {
        return kExitIo;
    } catch (const std::filesystem::filesystem_error&) {
        return kExitIo;
    } catch (const divergence_error&) {
        return kExitNumerical;
    } catch (const integration_error&) {
        return kExitNumerical;
    } catch (const eigensolver_error&) {
        return kExitNumerical;
    } catch (const normalization_error&) {
        return kExitNumerical;
    } catch (const std::domain_error&) {
        return kExitNumerical;
    } catch (const std::out_of_range&) {
        return kExitNumerical;
    } catch (const nlohmann::json::exception&) {
        return kExitUsage;
    } catch (const std::invalid_argument&) {
        return kExitUsage;
    } catch (...) {
        return 1;
    }
}

}  // namespace threewave

#endif  // THREEWAVE_EXPERIMENT_HPP

