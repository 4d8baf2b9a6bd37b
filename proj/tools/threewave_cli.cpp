// threewave: batch CLI for three-wave quantum/classical instability runs.
//
// Subcommands map onto the experiment runner: evolve, classical,
// linear-compare, spectrum, cascade, recurrence, sweep, preset. Every run
// writes its artifacts plus a manifest.json with checksums into --out.
//
// Exit codes: 0 success, 2 usage, 3 numerical failure, 4 I/O failure.

#include <array>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "threewave/experiment.hpp"

namespace tw = threewave;

namespace {

struct CommonOpts {
    int s2 = 100, s3 = 100;
    int m = 0;
    double epsilon = 0.0;
    double tau_max = 1.0;
    int points = 201;
    std::string method = "exact-eigen";
    double dt = 0.0;
    std::string out = "out";
    std::string format = "csv";
    std::string label;
};

void add_subspace_opts(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--s2", o.s2, "eigenvalue of s2 = n1 + n3");
    cmd->add_option("--s3", o.s3, "eigenvalue of s3 = n1 + n2 (>= s2)");
    cmd->add_option("--m", o.m, "center basis index of the initial state");
    cmd->add_option("--epsilon", o.epsilon, "geometric spreading parameter in [0,1)");
}

void add_grid_opts(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--tau-max", o.tau_max, "end of the output time grid");
    cmd->add_option("--points", o.points, "number of grid points (including tau = 0)");
    cmd->add_option("--method", o.method, "propagation method: exact-eigen | rk4");
    cmd->add_option("--dt", o.dt, "rk4 step (0 selects the default)");
}

void add_output_opts(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--format", o.format, "output formats, comma separated: csv,json,svg");
    cmd->add_option("--label", o.label, "file name stem (defaults to the subcommand)");
}

std::vector<std::string> parse_formats(const std::string& fmt) {
    std::vector<std::string> out;
    std::stringstream ss(fmt);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    if (out.empty()) out.push_back("csv");
    return out;
}

tw::ExperimentConfig make_config(tw::ExperimentKind kind, const CommonOpts& o) {
    tw::ExperimentConfig c;
    c.kind = kind;
    c.label = o.label.empty() ? tw::to_string(kind) : o.label;
    c.s2 = o.s2;
    c.s3 = o.s3;
    c.m = o.m;
    c.epsilon = o.epsilon;
    c.tau_max = o.tau_max;
    c.points = o.points;
    c.method = o.method;
    c.dt = o.dt;
    c.formats = parse_formats(o.format);
    return c;
}

int report_manifest(const tw::RunManifest& m, const std::string& out) {
    std::cout << m.version << ": wrote " << m.artifacts.size() << " artifact(s) to " << out
              << " in " << m.duration_ms << " ms\n";
    for (const tw::Artifact& a : m.artifacts)
        std::cout << "  " << a.path << "  " << a.checksum << "\n";
    return tw::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"three-wave interaction simulator: quantum instability, cascades, spectra"};
    app.require_subcommand(1);

    CommonOpts o;
    double i1 = 1, i2 = 0, i3 = 0;
    double horizon = 10.0, threshold = 0.99;
    bool probabilities = false;
    bool with_lines = false;
    std::string preset_name;
    std::string sweep_config;
    int jobs = 1;

    CLI::App* evolve = app.add_subcommand("evolve", "propagate and record observables");
    add_subspace_opts(evolve, o);
    add_grid_opts(evolve, o);
    add_output_opts(evolve, o);
    evolve->add_flag("--probabilities", probabilities, "emit per-state probability columns");

    CLI::App* cascade = app.add_subcommand("cascade", "probability cascade time series");
    add_subspace_opts(cascade, o);
    add_grid_opts(cascade, o);
    add_output_opts(cascade, o);

    CLI::App* classical = app.add_subcommand("classical", "integrate the classical amplitudes");
    classical->add_option("--i1", i1, "initial action I1");
    classical->add_option("--i2", i2, "initial action I2");
    classical->add_option("--i3", i3, "initial action I3");
    add_grid_opts(classical, o);
    add_output_opts(classical, o);

    CLI::App* lincmp = app.add_subcommand("linear-compare", "exact vs linearized <n1>");
    add_subspace_opts(lincmp, o);
    add_grid_opts(lincmp, o);
    add_output_opts(lincmp, o);

    CLI::App* spectrum = app.add_subcommand("spectrum", "eigenvalues and spacing diagnostics");
    add_subspace_opts(spectrum, o);
    add_output_opts(spectrum, o);
    spectrum->add_flag("--lines", with_lines, "also emit eigenvector weights and spectral lines");

    CLI::App* recurrence = app.add_subcommand("recurrence", "fidelity recurrence scan");
    add_subspace_opts(recurrence, o);
    add_output_opts(recurrence, o);
    recurrence->add_option("--horizon", horizon, "scan horizon in tau");
    recurrence->add_option("--threshold", threshold, "fidelity threshold in (0,1)");

    CLI::App* sweep = app.add_subcommand("sweep", "run a parameter sweep from a JSON spec");
    sweep->add_option("--config", sweep_config, "sweep spec JSON file")->required();
    sweep->add_option("--jobs", jobs, "worker threads (row order is preserved)");
    add_output_opts(sweep, o);

    CLI::App* preset = app.add_subcommand("preset", "figure-reproduction presets fig1..fig5");
    preset->add_option("name", preset_name, "one of fig1..fig5")->required();
    add_output_opts(preset, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : tw::kExitUsage;
    }

    try {
        if (evolve->parsed()) {
            tw::ExperimentConfig c = make_config(tw::ExperimentKind::Evolve, o);
            c.probabilities = probabilities;
            return report_manifest(tw::run(c, o.out), o.out);
        }
        if (cascade->parsed()) {
            tw::ExperimentConfig c = make_config(tw::ExperimentKind::Cascade, o);
            return report_manifest(tw::run(c, o.out), o.out);
        }
        if (classical->parsed()) {
            tw::ExperimentConfig c = make_config(tw::ExperimentKind::Classical, o);
            c.actions = std::array<double, 3>{i1, i2, i3};
            return report_manifest(tw::run(c, o.out), o.out);
        }
        if (lincmp->parsed()) {
            tw::ExperimentConfig c = make_config(tw::ExperimentKind::LinearCompare, o);
            return report_manifest(tw::run(c, o.out), o.out);
        }
        if (spectrum->parsed()) {
            tw::ExperimentConfig c = make_config(tw::ExperimentKind::Spectrum, o);
            c.with_lines = with_lines;
            return report_manifest(tw::run(c, o.out), o.out);
        }
        if (recurrence->parsed()) {
            tw::ExperimentConfig c = make_config(tw::ExperimentKind::Recurrence, o);
            c.horizon = horizon;
            c.threshold = threshold;
            return report_manifest(tw::run(c, o.out), o.out);
        }
        if (sweep->parsed()) {
            const nlohmann::json j = nlohmann::json::parse(tw::read_file(sweep_config));
            tw::SweepSpec spec = j.get<tw::SweepSpec>();
            const auto rows = tw::run_sweep(spec, jobs);
            std::filesystem::create_directories(o.out);
            std::ostringstream csv;
            tw::write_sweep_csv(rows, csv);
            const std::string label = o.label.empty() ? "sweep" : o.label;
            tw::write_file((std::filesystem::path(o.out) / (label + ".csv")).string(), csv.str());
            std::size_t failed = 0;
            for (const auto& r : rows)
                if (!r.ok) ++failed;
            std::cout << "sweep: " << rows.size() << " rows (" << failed << " failed) -> "
                      << o.out << "/" << label << ".csv\n";
            return tw::kExitOk;
        }
        if (preset->parsed()) {
            const tw::RunManifest m =
                tw::run_preset(preset_name, o.out, parse_formats(o.format));
            return report_manifest(m, o.out);
        }
        std::cerr << "no subcommand\n";
        return tw::kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return tw::classify_current_exception();
    }
}
