// Experiment runner: msfem <command> [options]

#include "msfem/error.hpp"
#include "msfem/experiment.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iomanip>
#include <iostream>

namespace {

struct Overrides
{
    std::string config;
    std::string output;
    std::string run;
    unsigned threads = 0;
    std::string example;
    std::string eps;
    std::string ratios;
    std::vector<std::string> settings;
};

std::vector<msfem::ExperimentConfig> configure(const Overrides& o)
{
    std::vector<msfem::ExperimentConfig> runs;
    if (o.config.empty())
        runs.emplace_back();
    else
        runs = msfem::load_config(o.config);

    if (!o.run.empty()) {
        std::erase_if(runs, [&](const auto& c) { return c.name != o.run; });
        if (runs.empty())
            throw msfem::ConfigError("no run named '" + o.run + "' in " + o.config);
    }

    const char* env_output = std::getenv("MSFEM_OUTPUT_DIR");
    const msfem::ExperimentConfig defaults;
    for (auto& c : runs) {
        if (!o.example.empty())
            msfem::apply_setting(c, "example", o.example);
        if (!o.eps.empty())
            msfem::apply_setting(c, "eps", o.eps);
        if (!o.ratios.empty())
            msfem::apply_setting(c, "ratios", o.ratios);
        if (o.threads > 0)
            c.threads = o.threads;
        for (const auto& s : o.settings) {
            const auto eq = s.find('=');
            if (eq == std::string::npos)
                throw msfem::ConfigError("--set expects key=value, got '" + s + "'");
            msfem::apply_setting(c, s.substr(0, eq), s.substr(eq + 1));
        }
        if (!o.output.empty())
            c.output_dir = o.output;
        else if (env_output && c.output_dir == defaults.output_dir)
            c.output_dir = env_output;
        if (runs.size() > 1)
            c.output_dir = (std::filesystem::path(c.output_dir) / c.name).string();
        msfem::validate(c);
    }
    return runs;
}

void print_table(const std::vector<msfem::ErrorReport>& rows)
{
    std::cout << std::left << std::setw(12) << "H/eps" << std::setw(14) << "Error_L2" << std::setw(8) << "Order"
              << std::setw(14) << "Error_H1" << "Order\n";
    for (const auto& r : rows) {
        std::ostringstream ratio;
        ratio << "1/" << std::lround(1.0 / r.H_over_eps);
        std::cout << std::left << std::setw(12) << ratio.str() << std::fixed << std::setprecision(8) << std::setw(14)
                  << r.err_l2 << std::setprecision(2) << std::setw(8)
                  << (r.rate_l2 ? std::to_string(*r.rate_l2).substr(0, 5) : "") << std::setprecision(8)
                  << std::setw(14) << r.err_h1 << (r.rate_h1 ? std::to_string(*r.rate_h1).substr(0, 5) : "")
                  << '\n';
    }
    std::cout.unsetf(std::ios::fixed);
}

int run_command(const std::string& command, const Overrides& o)
{
    const auto runs = configure(o);
    msfem::RunOptions options;
    options.log = &std::cerr;
    bool failed = false;
    for (const auto& c : runs) {
        std::cerr << "[" << c.name << "] " << command << " -> " << c.output_dir << '\n';
        if (command == "convergence") {
            const auto result = msfem::run_convergence(c, options);
            print_table(result.table);
            failed |= !result.failures.empty();
        } else if (command == "decay") {
            const auto result = msfem::run_decay(c, options);
            for (std::size_t i = 0; i < result.eps.size(); ++i)
                std::cout << "eps = " << result.eps[i] << "  fitted beta = " << result.profiles[i].fitted_beta
                          << '\n';
        } else if (command == "observables") {
            const auto result = msfem::run_observables(c, options);
            std::cout << "position density gap " << result.position_gap << ", energy density gap "
                      << result.energy_gap << '\n';
        } else if (command == "basis") {
            const auto s = msfem::run_basis(c, options);
            std::cout << "N_x = " << s.coarse_vertices << ", N_f = " << s.fine_vertices << ", l* = "
                      << (s.l_star ? std::to_string(*s.l_star) : "global") << ", nnz = " << s.nonzeros
                      << ", constraint residual = " << s.constraint_residual
                      << ", mesh ratio = " << s.mesh_condition.ratio << '\n';
        } else if (command == "reference") {
            const auto run = msfem::run_reference(c, options);
            std::cout << "mass drift = " << run.mass_drift << '\n';
        } else if (command == "check") {
            for (const auto& r : msfem::run_check(c, options)) {
                std::cout << (r.pass ? "PASS  " : "FAIL  ") << r.name << ": " << r.value << " (tolerance "
                          << r.tolerance << ")\n";
                failed |= !r.pass;
            }
        }
    }
    return failed ? 3 : 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multiscale finite elements for the semiclassical Schroedinger equation"};
    app.require_subcommand(1);
    Overrides o;

    const std::vector<std::pair<std::string, std::string>> commands{
        {"basis", "build the multiscale basis for the first ratio and export it"},
        {"convergence", "error table against the fine reference over all ratios"},
        {"decay", "tail energies of a global basis function for each decay_eps"},
        {"observables", "position and energy densities at T"},
        {"reference", "fine-grid reference solution"},
        {"check", "invariant suite on the first ratio"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", o.config, "key = value config file")->check(CLI::ExistingFile);
        sub->add_option("--run", o.run, "only the named section of the config");
        sub->add_option("--output", o.output, "output directory (default: $MSFEM_OUTPUT_DIR or msfem-output)");
        sub->add_option("--threads", o.threads, "worker threads (0 = all cores)");
        sub->add_option("--example", o.example, "example 1..5");
        sub->add_option("--eps", o.eps, "semiclassical parameter, e.g. 1/40");
        sub->add_option("--ratios", o.ratios, "comma separated H/eps list, e.g. 1/2,1/4");
        sub->add_option("--set", o.settings, "extra key=value config settings")->take_all();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        return run_command(app.get_subcommands().front()->get_name(), o);
    } catch (const msfem::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const msfem::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "unexpected failure: " << e.what() << '\n';
        return 1;
    }
}
