// Command-line front end: scenario inspection, training, evaluation,
// transfer-learning runs, sweeps, and experience export.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "uavrl/d3ql.hpp"
#include "uavrl/qtable.hpp"
#include "uavrl/rollout.hpp"
#include "uavrl/scenario_io.hpp"
#include "uavrl/scenarios.hpp"
#include "uavrl/sweep.hpp"

namespace fs = std::filesystem;
using namespace uavrl;

namespace {

struct GlobalOptions {
    std::string config_path;
    std::uint64_t seed = 1;
};

EnvConfig resolve_scenario(const std::string& name, const GlobalOptions& global) {
    EnvConfig cfg = build_scenario(scenario_from_string(name));
    if (!global.config_path.empty())
        cfg = apply_config_overrides_file(cfg, global.config_path);
    return cfg;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        seeds.push_back(std::stoull(item));
    }
    if (seeds.empty()) throw std::invalid_argument("no seeds given");
    return seeds;
}

std::string checkpoint_kind(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    std::string header;
    std::getline(in, header);
    if (header == "QTAB v1") return "qlearning";
    if (header == "D3QL-CKPT v1") return "d3ql";
    throw std::runtime_error("unrecognized checkpoint header in " + path);
}

void print_scenarios() {
    for (ScenarioId id : {ScenarioId::SourceMS, ScenarioId::TargetMT1, ScenarioId::TargetMT2}) {
        const EnvConfig cfg = build_scenario(id);
        std::cout << to_string(id) << ": length " << cfg.trajectory.total_length() << " m, zones";
        for (double p : cfg.trajectory.zone_probs()) std::cout << ' ' << p;
        std::cout << ", E=" << cfg.max_energy << ", t_b=" << cfg.battery_swap_slots
                  << ", v_r=" << cfg.return_speed << ", speeds";
        for (double v : cfg.speeds) std::cout << ' ' << v;
        std::cout << '\n';
    }
}

struct TrainOutputs {
    fs::path checkpoint;
    fs::path trace;
    fs::path experiences;
};

TrainOutputs prepare_run_dir(const std::string& out_dir) {
    fs::create_directories(out_dir);
    const fs::path base(out_dir);
    return {base / "checkpoint.txt", base / "trace.csv", base / "experiences.txt"};
}

int run_train(const std::string& scenario, const std::string& algo, std::uint64_t seed,
              std::int64_t steps, const std::string& out_dir, const GlobalOptions& global) {
    const EnvConfig cfg = resolve_scenario(scenario, global);
    const TrainOutputs out = prepare_run_dir(out_dir);

    if (algo == "qlearning") {
        TabularParams params;
        params.total_steps = steps;
        params.epsilon.decay_steps = detail::default_decay_steps(steps);
        TabularRun run = train_tabular(cfg, params, seed);
        save_qtable(run.table, out.checkpoint.string());
        save_trace_csv(run.trace, out.trace.string());
        save_annotated_experiences(run.pool, out.experiences.string());
    } else if (algo == "d3ql" || algo == "d3ql-nora") {
        D3qlConfig dcfg;
        dcfg.total_steps = steps;
        dcfg.epsilon.decay_steps = detail::default_decay_steps(steps);
        D3qlRun run = train_d3ql(cfg, dcfg, seed, std::nullopt, algo == "d3ql-nora");
        save_agent(run.agent, run.final_epsilon, out.checkpoint.string());
        save_trace_csv(run.trace, out.trace.string());
        save_annotated_experiences(run.pool, out.experiences.string());
    } else {
        throw std::invalid_argument("unknown algorithm '" + algo +
                                    "' (expected qlearning, d3ql or d3ql-nora)");
    }
    std::cout << "wrote " << out.checkpoint.string() << '\n';
    return 0;
}

int run_transfer(const std::string& scenario, const std::string& mode_name,
                 const std::string& source_ckpt, const std::string& source_exp, std::size_t count,
                 double radius, std::uint64_t seed, std::int64_t steps,
                 const std::string& out_dir, const GlobalOptions& global) {
    const EnvConfig cfg = resolve_scenario(scenario, global);
    const TrainOutputs out = prepare_run_dir(out_dir);

    SourceKnowledge knowledge;
    const TransferVariant variant = transfer_variant_from_string(mode_name);
    if (variant != TransferVariant::ExperienceTransfer) {
        if (source_ckpt.empty()) throw std::invalid_argument("policy transfer needs --source-ckpt");
        knowledge.params = load_net_file(source_ckpt);
    }
    if (variant != TransferVariant::PolicyTransfer) {
        if (source_exp.empty()) throw std::invalid_argument("experience transfer needs --source-exp");
        knowledge.pool = load_annotated_experiences(source_exp);
    }

    TransferRequest request;
    request.knowledge = &knowledge;
    request.station_radius = radius;
    switch (variant) {
        case TransferVariant::ExperienceTransfer:
            request.mode = TransferMode::experience(count);
            break;
        case TransferVariant::PolicyTransfer:
            request.mode = TransferMode::policy();
            break;
        case TransferVariant::Hybrid:
            request.mode = TransferMode::hybrid(count);
            break;
    }

    D3qlConfig dcfg;
    dcfg.total_steps = steps;
    dcfg.epsilon.decay_steps = detail::default_decay_steps(steps);
    D3qlRun run = train_d3ql(cfg, dcfg, seed, request);
    save_agent(run.agent, run.final_epsilon, out.checkpoint.string());
    save_trace_csv(run.trace, out.trace.string());
    save_annotated_experiences(run.pool, out.experiences.string());
    std::cout << "wrote " << out.checkpoint.string() << '\n';
    return 0;
}

int run_eval(const std::string& checkpoint, const std::string& scenario, std::int64_t slots,
             const std::string& seeds_text, const std::string& out_csv, bool mask_battery,
             const GlobalOptions& global) {
    const EnvConfig cfg = resolve_scenario(scenario, global);
    const std::vector<std::uint64_t> seeds = parse_seed_list(seeds_text);
    const std::string kind = checkpoint_kind(checkpoint);

    Policy policy;
    std::string algo_label = kind;
    if (kind == "qlearning") {
        policy = greedy_qtable_policy(load_qtable(checkpoint));
    } else {
        LoadedAgent la = load_agent(checkpoint);
        policy = greedy_net_policy(std::move(la.agent.q_net), mask_battery);
        if (mask_battery) algo_label = "d3ql-nora";
    }

    std::vector<CsvRow> rows;
    for (std::uint64_t seed : seeds) {
        const RolloutAccumulator acc = run_rollout(cfg, policy, slots, seed);
        CsvRow row;
        row.scenario = scenario;
        row.algorithm = algo_label;
        row.seed = seed;
        row.avg_reward = acc.avg_reward();
        row.throughput = acc.throughput();
        row.energy_per_slot = acc.energy_per_slot();
        row.eval_slots = slots;
        rows.push_back(row);
    }
    emit_csv_file(rows, out_csv);
    std::cout << "wrote " << out_csv << '\n';
    return 0;
}

int run_sweep_cmd(const std::string& spec_path, const std::string& out_csv, unsigned jobs) {
    const ExperimentSpec spec = load_experiment_spec(spec_path);
    const std::vector<CsvRow> rows = run_sweep(spec, jobs);
    emit_csv_file(rows, out_csv);
    std::cout << "wrote " << out_csv << " (" << rows.size() << " rows)\n";
    return 0;
}

int run_export(const std::string& run_dir, const std::string& out_path) {
    const fs::path src = fs::path(run_dir) / "experiences.txt";
    const std::vector<AnnotatedExperience> pool = load_annotated_experiences(src.string());
    save_annotated_experiences(pool, out_path);
    std::cout << "wrote " << out_path << " (" << pool.size() << " experiences)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"UAV data-collection simulator and learning harness"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions global;
    app.add_option("--config", global.config_path, "scenario override config (JSON)");
    app.add_option("--seed", global.seed, "random seed");

    // scenario list
    CLI::App* scenario_cmd = app.add_subcommand("scenario", "scenario library");
    scenario_cmd->require_subcommand(1);
    scenario_cmd->add_subcommand("list", "print the built-in scenarios");

    // train
    CLI::App* train_cmd = app.add_subcommand("train", "train a policy");
    std::string train_scenario = "source_ms", train_algo = "d3ql", train_out;
    std::int64_t train_steps = 150000;
    train_cmd->add_option("--scenario", train_scenario, "scenario id");
    train_cmd->add_option("--algo", train_algo, "qlearning | d3ql | d3ql-nora");
    train_cmd->add_option("--steps", train_steps, "decision steps");
    train_cmd->add_option("--out", train_out, "output directory")->required();

    // eval
    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint greedily");
    std::string eval_ckpt, eval_scenario = "source_ms", eval_seeds = "1,2,3,4,5", eval_out;
    std::int64_t eval_slots = 100000;
    bool eval_mask_battery = false;
    eval_cmd->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
    eval_cmd->add_option("--scenario", eval_scenario, "scenario id");
    eval_cmd->add_option("--slots", eval_slots, "slots per rollout");
    eval_cmd->add_option("--seeds", eval_seeds, "comma-separated rollout seeds");
    eval_cmd->add_option("--out", eval_out, "output CSV")->required();
    eval_cmd->add_flag("--mask-battery", eval_mask_battery,
                       "evaluate without the battery action");

    // sweep
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "run an experiment spec");
    std::string sweep_spec, sweep_out;
    unsigned sweep_jobs = 0;
    sweep_cmd->add_option("--spec", sweep_spec, "experiment spec (JSON)")->required();
    sweep_cmd->add_option("--out", sweep_out, "output CSV")->required();
    sweep_cmd->add_option("--jobs", sweep_jobs, "worker threads (0 = auto)");

    // transfer
    CLI::App* transfer_cmd = app.add_subcommand("transfer", "train with transferred knowledge");
    std::string tr_mode, tr_ckpt, tr_exp, tr_scenario = "target_mt1", tr_out;
    std::size_t tr_count = 1000;
    double tr_radius = 20.0;
    std::int64_t tr_steps = 150000;
    transfer_cmd->add_option("--mode", tr_mode, "et | pt | hybrid")->required();
    transfer_cmd->add_option("--source-ckpt", tr_ckpt, "source network checkpoint");
    transfer_cmd->add_option("--source-exp", tr_exp, "source experience file (EXP-D v1)");
    transfer_cmd->add_option("--count", tr_count, "experiences to transfer");
    transfer_cmd->add_option("--radius", tr_radius, "near-station radius (m)");
    transfer_cmd->add_option("--scenario", tr_scenario, "target scenario id");
    transfer_cmd->add_option("--steps", tr_steps, "decision steps");
    transfer_cmd->add_option("--out", tr_out, "output directory")->required();

    // export-exp
    CLI::App* export_cmd = app.add_subcommand("export-exp", "export a run's experience pool");
    std::string export_from, export_out;
    export_cmd->add_option("--from-train-run", export_from, "training run directory")->required();
    export_cmd->add_option("--out", export_out, "output experience file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (scenario_cmd->parsed()) {
            print_scenarios();
            return 0;
        }
        if (train_cmd->parsed())
            return run_train(train_scenario, train_algo, global.seed, train_steps, train_out,
                             global);
        if (eval_cmd->parsed())
            return run_eval(eval_ckpt, eval_scenario, eval_slots, eval_seeds, eval_out,
                            eval_mask_battery, global);
        if (sweep_cmd->parsed()) return run_sweep_cmd(sweep_spec, sweep_out, sweep_jobs);
        if (transfer_cmd->parsed())
            return run_transfer(tr_scenario, tr_mode, tr_ckpt, tr_exp, tr_count, tr_radius,
                                global.seed, tr_steps, tr_out, global);
        if (export_cmd->parsed()) return run_export(export_from, export_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
