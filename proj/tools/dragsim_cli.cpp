#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dragsim/experiment.hpp"
#include "dragsim/scenario.hpp"

using namespace dragsim;

int main(int argc, char** argv) {
    CLI::App app{"HetNet small-cell activation workbench"};
    app.require_subcommand(1);

    std::string spec_path, out_dir, agent_name = "drag", experiment_name = "stationary";
    std::uint64_t seed = 1;
    int days = 416;
    int traces = 20;
    auto* run = app.add_subcommand("run", "Run a seeded experiment");
    run->add_option("--spec", spec_path, "scenario file (key = value lines)")->required();
    run->add_option("--out", out_dir, "output directory")->required();
    run->add_option("--seed", seed, "master seed (trace i runs on seed xor i)");
    run->add_option("--agent", agent_name, "drag|ql|tact_style|sota|all_on|all_off");
    run->add_option("--days", days, "days per trace (48 slots each)");
    run->add_option("--traces", traces, "independent traffic traces");
    run->add_option("--experiment", experiment_name,
                    "stationary|pattern_shift_100d|noise_sweep|scale_sweep|width_sweep");

    std::string in_dir;
    auto* summ = app.add_subcommand("summarize", "Recompute a run directory's summary");
    summ->add_option("--in", in_dir, "run output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            ExperimentSpec spec;
            spec.scenario = load_scenario(spec_path);
            const auto agent = parse_agent_kind(agent_name);
            if (!agent) throw ConfigError("unknown agent kind: " + agent_name);
            const auto kind = parse_experiment_kind(experiment_name);
            if (!kind) throw ConfigError("unknown experiment kind: " + experiment_name);
            spec.agent = *agent;
            spec.kind = *kind;
            spec.days = days;
            spec.traces = traces;
            spec.master_seed = seed;
            spec.out_dir = out_dir;
            const ExperimentResult res = run_experiment(spec);
            for (const auto& pt : res.points) {
                std::cout << to_string(spec.agent);
                if (!pt.dir.empty()) std::cout << " [" << pt.dir << "]";
                std::cout << ": final-20-day normalized cost " << format_double(pt.mean)
                          << " +/- " << format_double(pt.stddev) << " over "
                          << pt.traces.size() << " traces\n";
            }
        } else {
            const DirSummary s = summarize_dir(in_dir);
            nlohmann::json j;
            j["traces"] = s.traces;
            j["mean"] = s.mean;
            j["stddev"] = s.stddev;
            j["per_trace"] = s.per_trace;
            std::cout << j.dump(2) << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
