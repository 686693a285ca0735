// Command-line driver: `dhint run` integrates one experiment and writes its
// CSV, `dhint compare` summarizes several schemes on the same configuration.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dhint/cli.hpp"

namespace {

struct CommonOptions {
    std::string preset;
    std::string config_file;
    std::vector<std::string> settings;
    std::string scheme;
    std::string variant;
    std::string output;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--preset", o.preset, "built-in experiment: burgers-paper, kdv-paper, nls-paper");
    cmd->add_option("-c,--config", o.config_file, "key = value configuration file");
    cmd->add_option("--set", o.settings, "override a setting, key=value (repeatable)");
    cmd->add_option("--scheme-variant", o.variant, "canonical or printed (cimp only)");
    cmd->add_option("-o,--output", o.output, "CSV output path (default: stdout)");
}

dhint::RunConfig load(const CommonOptions& o) {
    dhint::RunConfig config;
    if (!o.preset.empty()) config = dhint::preset(o.preset);
    if (!o.config_file.empty()) {
        std::ifstream in(o.config_file);
        if (!in) throw dhint::ConfigError("cannot read config file '" + o.config_file + "'");
        std::stringstream text;
        text << in.rdbuf();
        config = dhint::parse_config(text.str(), config);
    }
    for (const auto& s : o.settings) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw dhint::ConfigError("--set expects key=value, got '" + s + "'");
        dhint::apply_setting(config, s.substr(0, eq), s.substr(eq + 1));
    }
    if (!o.scheme.empty()) dhint::apply_setting(config, "scheme", o.scheme);
    if (!o.variant.empty()) dhint::apply_setting(config, "scheme_variant", o.variant);
    if (!o.output.empty()) config.output = o.output;
    config.validate();
    return config;
}

int do_run(const CommonOptions& o) {
    const dhint::RunConfig config = load(o);
    if (config.output.empty()) return dhint::run(config, &std::cout, std::cerr).exit_code;
    std::ofstream out(config.output, std::ios::binary);
    if (!out) throw dhint::ConfigError("cannot open output '" + config.output + "'");
    return dhint::run(config, &out, std::cerr).exit_code;
}

int do_compare(const CommonOptions& o, const std::vector<std::string>& names) {
    const dhint::RunConfig config = load(o);
    if (names.empty()) throw dhint::ConfigError("compare needs at least one scheme");
    std::vector<dhint::SchemeKind> kinds;
    for (const auto& n : names) {
        try {
            kinds.push_back(dhint::parse_scheme_kind(n));
        } catch (const dhint::InvalidArgument& e) {
            throw dhint::ConfigError(e.what());
        }
    }
    const auto rows = dhint::compare(config, kinds);
    bool any_ok = false;
    for (const auto& row : rows) {
        any_ok = any_ok || row.status == dhint::RunStatus::ok;
        if (row.status != dhint::RunStatus::ok) std::cerr << row.scheme << ": " << row.message << '\n';
    }
    if (config.output.empty()) {
        dhint::write_compare_csv(rows, std::cout);
    } else {
        std::ofstream out(config.output, std::ios::binary);
        if (!out) throw dhint::ConfigError("cannot open output '" + config.output + "'");
        dhint::write_compare_csv(rows, out);
    }
    return any_ok ? dhint::exit_ok : dhint::exit_non_convergence;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exponential structure-preserving integrators for damped Hamiltonian PDEs"};
    app.require_subcommand(1);

    CommonOptions run_opts;
    auto* run_cmd = app.add_subcommand("run", "integrate one experiment and write its CSV");
    add_common(run_cmd, run_opts);
    run_cmd->add_option("--scheme", run_opts.scheme, "scheme kind");

    CommonOptions cmp_opts;
    std::vector<std::string> schemes;
    auto* cmp_cmd = app.add_subcommand("compare", "run several schemes and write a summary table");
    add_common(cmp_cmd, cmp_opts);
    cmp_cmd->add_option("--schemes", schemes, "scheme kinds to compare")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : dhint::exit_config;
    }

    try {
        if (*run_cmd) return do_run(run_opts);
        return do_compare(cmp_opts, schemes);
    } catch (const dhint::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return dhint::exit_config;
    } catch (const dhint::InvalidArgument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return dhint::exit_config;
    } catch (const dhint::NonConvergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return dhint::exit_non_convergence;
    } catch (const dhint::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return dhint::exit_blow_up;
    }
}
