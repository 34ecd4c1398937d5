// tunnelkit: scenario runner. Exit codes: 0 ok, 1 config error, 2 numeric failure, 3 I/O error.

#include "tunnelkit/scenario.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace {

int report(const std::exception& e, const char* kind, int code) {
    std::cerr << "tunnelkit: " << kind << ": " << e.what() << "\n";
    return code;
}

template <class F>
int guarded(F&& f) {
    try {
        return f();
    } catch (const tunnelkit::ConfigError& e) {
        return report(e, "config error", 1);
    } catch (const tunnelkit::IoError& e) {
        return report(e, "i/o error", 3);
    } catch (const tunnelkit::NumericError& e) {
        return report(e, "numeric failure", 2);
    } catch (const std::exception& e) {
        return report(e, "numeric failure", 2);
    }
}

void print_warnings(const tunnelkit::Warnings& w) {
    for (const auto& msg : w) std::cerr << "warning: " << msg << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Relativistic tunneling scenarios: scans, arrival densities and regime comparisons"};
    app.require_subcommand(1);

    std::string config;
    std::string out_dir = ".";
    unsigned threads = 0;
    auto* run = app.add_subcommand("run", "run a scenario and write CSV files plus a JSON manifest");
    run->add_option("config", config, "scenario JSON file")->required();
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--threads", threads, "worker threads (0: configuration or hardware default)");

    std::string vconfig;
    auto* validate = app.add_subcommand("validate", "check a scenario against the schema without running it");
    validate->add_option("config", vconfig, "scenario JSON file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (*validate) {
        return guarded([&] {
            const auto s = tunnelkit::load_scenario(vconfig);
            print_warnings(s.warnings);
            std::cout << s.name << ": ok (" << tunnelkit::to_string(s.task) << ")\n";
            return 0;
        });
    }
    return guarded([&] {
        const auto s = tunnelkit::load_scenario(config);
        const auto r = tunnelkit::run_scenario(s, out_dir, threads);
        print_warnings(r.warnings);
        for (const auto& p : r.outputs) std::cout << p.string() << "\n";
        return 0;
    });
}
