// gupdirac: spectrum, wavefunction, verify and sweep front end.
//
//   gupdirac spectrum --config run.json [--out FILE] [--format csv|json] [--oracle on|off]
//   gupdirac wavefunction --config run.json --n 0 --lambda 1 [--measure plain|deformed]
//   gupdirac verify --config run.json [--perturb-energy 0.01]
//   gupdirac sweep --config run.json --sweep beta=1e-4,1e-3,1e-2
//
// Exit codes: 0 success, 1 verification failure, 2 requested state unavailable, 3 bad configuration.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <gupdirac/cli.hpp>

namespace cli = gupdirac::cli;

namespace {

struct Common {
    std::string config_path;
    std::string out;
    std::string format;
    std::string oracle;
    std::string measure;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config_path, "JSON run configuration");
    cmd->add_option("--out", c.out, "output file (default: config output.path, else stdout)");
    cmd->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--oracle", c.oracle, "on or off")->check(CLI::IsMember({"on", "off"}));
    cmd->add_option("--measure", c.measure, "plain or deformed")->check(CLI::IsMember({"plain", "deformed"}));
}

cli::RunConfig resolve(Common const& c) {
    cli::RunConfig cfg = c.config_path.empty() ? cli::RunConfig{} : cli::load_config(c.config_path);
    if (!c.out.empty()) cfg.output_path = c.out;
    if (!c.format.empty()) cfg.format = c.format;
    if (!c.oracle.empty()) cfg.oracle = c.oracle == "on";
    if (!c.measure.empty()) cfg.measure = gupdirac::parse_measure(c.measure);
    cfg.validate();
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Minimal-length Dirac oscillator in a magnetic field: NU spectrum and shooting checks"};
    app.require_subcommand(1);

    Common spectrum_opts, wave_opts, verify_opts, sweep_opts;
    auto* spectrum = app.add_subcommand("spectrum", "closed-form energy levels");
    add_common(spectrum, spectrum_opts);

    auto* wave = app.add_subcommand("wavefunction", "sampled radial eigenfunction");
    add_common(wave, wave_opts);
    int wave_n = 0, wave_lambda = 0, wave_points = 2001;
    std::optional<double> wave_pmax;
    wave->add_option("--n", wave_n, "radial quantum number")->required();
    wave->add_option("--lambda", wave_lambda, "angular label")->required();
    wave->add_option("--points", wave_points, "momentum grid size");
    wave->add_option("--p-max", wave_pmax, "largest momentum (default: decay point)");

    auto* verify = app.add_subcommand("verify", "internal consistency and oracle report");
    add_common(verify, verify_opts);
    double perturb = 0;
    verify->add_option("--perturb-energy", perturb, "debug: shift every level by this fraction before checking");

    auto* sweep = app.add_subcommand("sweep", "spectrum over a list of parameter values");
    add_common(sweep, sweep_opts);
    std::string sweep_text;
    sweep->add_option("--sweep", sweep_text, "NAME=v1,v2,... with NAME in beta, B, V0, M")->required();

    try {
        app.parse(argc, argv);
    } catch (CLI::CallForHelp const& e) {
        return app.exit(e);
    } catch (CLI::ParseError const& e) {
        app.exit(e);
        return cli::exit_config;
    }

    try {
        if (*spectrum) {
            auto const cfg = resolve(spectrum_opts);
            auto const s = cli::run_spectrum(cfg);
            cli::write_output(cfg.output_path, cli::render_spectrum(s));
            return s.status;
        }
        if (*wave) {
            auto const cfg = resolve(wave_opts);
            cli::WavefunctionResult w;
            try {
                w = cli::run_wavefunction(cfg, {wave_n, wave_lambda}, {wave_points, wave_pmax});
            } catch (gupdirac::not_found_error const& e) {
                std::cerr << "gupdirac: " << e.what() << "\n";
                return cli::exit_unavailable;
            } catch (gupdirac::normalization_error const& e) {
                std::cerr << "gupdirac: " << e.what() << "\n";
                return cli::exit_unavailable;
            }
            cli::write_output(cfg.output_path, cli::render_wavefunction(w, cfg));
            return cli::exit_ok;
        }
        if (*verify) {
            auto const cfg = resolve(verify_opts);
            auto const v = cli::run_verify(cfg, perturb);
            cli::write_output(cfg.output_path, v.report.dump(2) + "\n");
            return v.passed ? cli::exit_ok : cli::exit_verify_failed;
        }
        if (*sweep) {
            auto const cfg = resolve(sweep_opts);
            auto const spec = cli::parse_sweep(sweep_text);
            auto const r = cli::run_sweep(cfg, spec);
            cli::write_output(cfg.output_path, cli::render_sweep(r, cfg.format));
            return r.status;
        }
    } catch (gupdirac::configuration_error const& e) {
        std::cerr << "gupdirac: configuration error: " << e.what() << "\n";
        return cli::exit_config;
    } catch (std::exception const& e) {
        std::cerr << "gupdirac: " << e.what() << "\n";
        return cli::exit_unavailable;
    }
    return cli::exit_config;
}
