#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rebasin/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Permutation alignment experiment driver"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    std::int64_t seed = -1;
    std::int64_t runs = -1;

    const std::vector<std::string> experiments{"train", "find_ot", "lmc", "continual"};
    for (const std::string& name : experiments) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--seed", seed, "Base seed override");
        sub->add_option("--runs", runs, "Trial count override");
        sub->add_option("--out", out_dir, "Output directory override");
        sub->add_option("--set", overrides, "key=value config override (repeatable)");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        const std::string name = app.get_subcommands().front()->get_name();
        std::vector<std::string> all = overrides;
        all.push_back("experiment=\"" + name + "\"");
        if (seed >= 0) all.push_back("seed=" + std::to_string(seed));
        if (runs >= 0) all.push_back("runs=" + std::to_string(runs));
        if (!out_dir.empty()) all.push_back("out=\"" + out_dir + "\"");

        const rebasin::ExperimentConfig cfg =
            rebasin::parse_config(rebasin::read_text_file(config_path), all);
        const rebasin::ExperimentResult res = rebasin::run_experiment(cfg);
        std::cout << res.summary_json;
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
