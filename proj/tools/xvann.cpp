#include <CLI11.hpp>
#include <iostream>
#include <map>

#include "xvann/cli/config.hpp"
#include "xvann/cli/pipeline.hpp"
#include "xvann/errors.hpp"

using namespace xvann;

namespace {

enum Exit { kOk = 0, kConfig = 2, kNumeric = 3, kCheck = 4 };

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Neural-network BSDE exposure engine"};
    app.require_subcommand(1);
    app.fallthrough();
    app.footer("Config keys by section (units in parentheses):\n" + cli::keys_help());

    std::string config, out = "out", stages = "all", method;
    std::uint64_t seed = 0;
    int threads = 0;
    bool check = false;
    app.add_option("--config", config, "configuration file")->required();
    app.add_option("--out", out, "output directory");
    auto* seed_opt = app.add_option("--seed", seed, "overrides run.seed");
    auto* method_opt = app.add_option("--method", method, "nn, proxy, amc or lattice; overrides run.method");
    auto* threads_opt = app.add_option("--threads", threads, "caps worker threads; overrides run.threads");
    app.add_flag("--check", check, "run the acceptance checks of the product and exit 4 if one fails");

    auto* run = app.add_subcommand("run", "run the stages given by --stages");
    run->add_option("--stages", stages, "all or a comma separated subset of simulate,train,expose,analyze");
    for (const char* s : {"simulate", "train", "expose", "analyze"}) app.add_subcommand(s, std::string("run the ") + s + " stage");

    CLI11_PARSE(app, argc, argv);

    try {
        std::map<std::string, std::string> over;
        if (*seed_opt) over["run.seed"] = std::to_string(seed);
        if (*method_opt) over["run.method"] = method;
        if (*threads_opt) over["run.threads"] = std::to_string(threads);
        const auto cfg = cli::parse_config(config, over);
        const auto* sub = app.get_subcommands().front();
        const auto list = sub->get_name() == "run" ? cli::parse_stages(stages) : cli::parse_stages(sub->get_name());

        cli::Pipeline pipe(cfg, out, &std::cout);
        pipe.run(list);
        if (check && !cli::check_run(pipe, std::cout)) return kCheck;
        return kOk;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const OrchestrationError& e) {
        std::cerr << "orchestration error: " << e.what() << "\n";
        return kConfig;
    } catch (const FormatError& e) {
        std::cerr << "artifact error: " << e.what() << "\n";
        return kConfig;
    } catch (const Error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kNumeric;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return kNumeric;
    }
}
