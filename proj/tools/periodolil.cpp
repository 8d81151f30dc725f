#include "periodolil/cli/runner.hpp"

#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

using namespace periodolil;

namespace {

int guarded(const std::function<void()>& body) {
    try {
        body();
        return 0;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return 2;
    } catch (const numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 3;
    } catch (const generation_error& e) {
        std::cerr << "generation error: " << e.what() << '\n';
        return 3;
    } catch (const data_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Periodogram law-of-the-iterated-logarithm experiments"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
    run->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", seed, "Override the master seed");
    run->add_option("--out", out_dir, "Output directory (defaults to [output] dir)");

    std::vector<std::string> dirs;
    auto* summarize = app.add_subcommand("summarize", "Aggregate final running maxima across lil runs");
    summarize->add_option("dirs", dirs, "Run directories")->required()->check(CLI::ExistingDirectory);

    std::string check_path;
    auto* check = app.add_subcommand("check", "Parse and validate a config file");
    check->add_option("config", check_path, "Config file")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (*run)
        return guarded([&] {
            auto c = load_config(config_path);
            if (seed) c.master_seed = *seed;
            if (!out_dir.empty()) c.output_dir = out_dir;
            const auto man = run_experiment(c, c.output_dir);
            std::cout << fmt::format("wrote {} ({} files, {:.2f} s)\n", c.output_dir, man.checksums.size() + 1,
                                     man.wall_time);
        });
    if (*summarize) {
        std::vector<std::filesystem::path> paths(dirs.begin(), dirs.end());
        return guarded([&] { std::cout << render_summary(summarize_runs(paths)); });
    }
    if (*check)
        return guarded([&] {
            const auto c = load_config(check_path);
            validate_config(c);
            std::cout << render_config(c);
        });
    return 1;
}
