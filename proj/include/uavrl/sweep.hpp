#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "uavrl/d3ql.hpp"
#include "uavrl/metrics.hpp"
#include "uavrl/qtable.hpp"
#include "uavrl/rollout.hpp"
#include "uavrl/scenario_io.hpp"
#include "uavrl/scenarios.hpp"

namespace uavrl {

// Sweepable parameters: t_b, v_r, p3 (third zone's packet probability), E.
inline EnvConfig apply_sweep_value(const EnvConfig& base, const std::string& param, double value) {
    EnvConfig cfg = base;
    if (param == "t_b") {
        cfg.battery_swap_slots = static_cast<int>(std::llround(value));
    } else if (param == "v_r") {
        cfg.return_speed = value;
    } else if (param == "E") {
        cfg.max_energy = static_cast<int>(std::llround(value));
    } else if (param == "p3") {
        std::vector<double> probs = base.trajectory.zone_probs();
        if (probs.size() < 3) throw std::invalid_argument("scenario has no third zone");
        probs[2] = value;
        cfg.trajectory = TrajectorySpec(base.trajectory.waypoints(), base.trajectory.closed(),
                                        base.trajectory.zone_breaks(), std::move(probs));
    } else {
        throw std::invalid_argument("unknown sweep parameter '" + param + "'");
    }
    cfg.validate();
    return cfg;
}

struct TransferSourceSpec {
    TransferVariant variant = TransferVariant::ExperienceTransfer;
    std::size_t count = 1000;
    double station_radius = 20.0;
    std::string source_ckpt;
    std::string source_exp;
};

struct ExperimentSpec {
    ScenarioId scenario = ScenarioId::SourceMS;
    std::vector<std::string> algorithms;
    std::string sweep_param;           // empty for a single evaluation point
    std::vector<double> sweep_values;  // empty for a single evaluation point
    std::vector<std::uint64_t> seeds;
    std::int64_t train_steps = 150000;
    std::int64_t eval_slots = 100000;
    std::optional<TransferSourceSpec> transfer;
    std::optional<nlohmann::json> config_overrides;
};

inline TransferVariant transfer_variant_from_string(const std::string& s) {
    if (s == "et") return TransferVariant::ExperienceTransfer;
    if (s == "pt") return TransferVariant::PolicyTransfer;
    if (s == "hybrid") return TransferVariant::Hybrid;
    throw std::invalid_argument("unknown transfer mode '" + s + "'");
}

inline ExperimentSpec experiment_spec_from_json(const nlohmann::json& j) {
    detail::reject_unknown_keys(j,
                                {"scenario", "algorithms", "sweep", "seeds", "train_steps",
                                 "eval_slots", "transfer", "config"},
                                "experiment spec");
    ExperimentSpec spec;
    spec.scenario = scenario_from_string(j.at("scenario").get<std::string>());
    spec.algorithms = j.at("algorithms").get<std::vector<std::string>>();
    spec.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (spec.algorithms.empty()) throw std::invalid_argument("experiment needs algorithms");
    if (spec.seeds.empty()) throw std::invalid_argument("experiment needs seeds");
    if (j.contains("train_steps")) spec.train_steps = j.at("train_steps").get<std::int64_t>();
    if (j.contains("eval_slots")) spec.eval_slots = j.at("eval_slots").get<std::int64_t>();
    if (j.contains("sweep")) {
        detail::reject_unknown_keys(j.at("sweep"), {"param", "values"}, "sweep");
        spec.sweep_param = j.at("sweep").at("param").get<std::string>();
        spec.sweep_values = j.at("sweep").at("values").get<std::vector<double>>();
        if (spec.sweep_values.empty()) throw std::invalid_argument("sweep needs values");
    }
    if (j.contains("transfer")) {
        const auto& jt = j.at("transfer");
        detail::reject_unknown_keys(
            jt, {"mode", "count", "station_radius", "source_ckpt", "source_exp"}, "transfer");
        TransferSourceSpec ts;
        ts.variant = transfer_variant_from_string(jt.at("mode").get<std::string>());
        if (jt.contains("count")) ts.count = jt.at("count").get<std::size_t>();
        if (jt.contains("station_radius"))
            ts.station_radius = jt.at("station_radius").get<double>();
        ts.source_ckpt = jt.value("source_ckpt", std::string());
        ts.source_exp = jt.value("source_exp", std::string());
        spec.transfer = std::move(ts);
    }
    if (j.contains("config")) spec.config_overrides = j.at("config");
    return spec;
}

inline ExperimentSpec load_experiment_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open experiment spec: " + path);
    nlohmann::json j;
    in >> j;
    return experiment_spec_from_json(j);
}

struct CsvRow {
    std::string scenario;
    std::string algorithm;
    std::string sweep_param = "none";
    double sweep_value = 0.0;
    std::uint64_t seed = 0;
    bool ok = true;
    double avg_reward = 0.0;
    double throughput = 0.0;
    double energy_per_slot = 0.0;
    std::int64_t train_steps = 0;
    std::int64_t eval_slots = 0;
};

inline void emit_csv(const std::vector<CsvRow>& rows, std::ostream& out) {
    out << "scenario,algorithm,sweep_param,sweep_value,seed,avg_reward,throughput,"
           "energy_per_slot,train_steps,eval_slots\n";
    for (const CsvRow& r : rows) {
        out << r.scenario << ',' << r.algorithm << ',' << r.sweep_param << ','
            << format_double(r.sweep_value) << ',' << r.seed << ',';
        if (r.ok) {
            out << format_double(r.avg_reward) << ',' << format_double(r.throughput) << ','
                << format_double(r.energy_per_slot);
        } else {
            out << "nan,nan,nan";
        }
        out << ',' << r.train_steps << ',' << r.eval_slots << '\n';
    }
}

inline void emit_csv_file(const std::vector<CsvRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write CSV: " + path);
    emit_csv(rows, out);
    if (!out) throw std::runtime_error("failed writing CSV: " + path);
}

namespace detail {

inline std::uint64_t sweep_point_seed(std::uint64_t seed, double sweep_value) {
    std::uint64_t bits;
    std::memcpy(&bits, &sweep_value, sizeof(bits));
    return Rng::mix(seed, bits);
}

// Exploration finishes inside the training budget even for short runs.
inline std::int64_t default_decay_steps(std::int64_t train_steps) {
    return std::min<std::int64_t>(100000, std::max<std::int64_t>(1, (2 * train_steps) / 3));
}

}  // namespace detail

// Trains (when the algorithm learns) and evaluates one sweep point for one
// seed. Both streams derive from (seed, sweep value) only, so algorithms at
// the same point share random numbers.
inline CsvRow run_sweep_job(const EnvConfig& cfg, const std::string& scenario_name,
                            const std::string& algorithm, const std::string& sweep_param,
                            double sweep_value, std::uint64_t seed, std::int64_t train_steps,
                            std::int64_t eval_slots, const SourceKnowledge* knowledge,
                            const TransferSourceSpec* transfer_spec) {
    CsvRow row;
    row.scenario = scenario_name;
    row.algorithm = algorithm;
    row.sweep_param = sweep_param.empty() ? "none" : sweep_param;
    row.sweep_value = sweep_value;
    row.seed = seed;
    row.eval_slots = eval_slots;

    const std::uint64_t point_seed = detail::sweep_point_seed(seed, sweep_value);
    const std::uint64_t eval_seed = Rng::mix(point_seed, 0xE7A1);

    Policy policy;
    if (algorithm.rfind("fixed", 0) == 0) {
        policy = fixed_speed_policy(std::stoi(algorithm.substr(5)));
    } else if (algorithm == "qlearning") {
        TabularParams params;
        params.total_steps = train_steps;
        params.epsilon.decay_steps = detail::default_decay_steps(train_steps);
        TabularRun run = train_tabular(cfg, params, point_seed, /*record_pool=*/false);
        policy = greedy_qtable_policy(std::move(run.table));
        row.train_steps = train_steps;
    } else if (algorithm == "d3ql" || algorithm == "d3ql-nora" ||
               algorithm.rfind("d3ql-tl-", 0) == 0) {
        const bool nora = algorithm == "d3ql-nora";
        std::optional<TransferRequest> request;
        if (algorithm.rfind("d3ql-tl-", 0) == 0) {
            if (!knowledge || !transfer_spec)
                throw std::invalid_argument("transfer algorithm needs a transfer source");
            TransferRequest req;
            const TransferVariant variant =
                transfer_variant_from_string(algorithm.substr(std::strlen("d3ql-tl-")));
            switch (variant) {
                case TransferVariant::ExperienceTransfer:
                    req.mode = TransferMode::experience(transfer_spec->count);
                    break;
                case TransferVariant::PolicyTransfer:
                    req.mode = TransferMode::policy();
                    break;
                case TransferVariant::Hybrid:
                    req.mode = TransferMode::hybrid(transfer_spec->count);
                    break;
            }
            req.knowledge = knowledge;
            req.station_radius = transfer_spec->station_radius;
            request = req;
        }
        D3qlConfig dcfg;
        dcfg.total_steps = train_steps;
        dcfg.epsilon.decay_steps = detail::default_decay_steps(train_steps);
        D3qlRun run = train_d3ql(cfg, dcfg, point_seed, request, nora, /*record_pool=*/false);
        policy = greedy_net_policy(std::move(run.agent.q_net), nora);
        row.train_steps = train_steps;
    } else {
        throw std::invalid_argument("unknown algorithm '" + algorithm + "'");
    }

    const RolloutAccumulator acc = run_rollout(cfg, policy, eval_slots, eval_seed);
    row.avg_reward = acc.avg_reward();
    row.throughput = acc.throughput();
    row.energy_per_slot = acc.energy_per_slot();
    return row;
}

// Runs every (sweep value, algorithm, seed) job, in parallel up to `jobs`
// workers; rows come back in deterministic (value, algorithm, seed) order and
// per-point failures turn into error rows without stopping the sweep.
inline std::vector<CsvRow> run_sweep(const ExperimentSpec& spec, unsigned jobs = 0) {
    EnvConfig base = build_scenario(spec.scenario);
    if (spec.config_overrides) base = apply_config_overrides(base, *spec.config_overrides);

    SourceKnowledge knowledge;
    bool has_knowledge = false;
    if (spec.transfer) {
        if (!spec.transfer->source_ckpt.empty())
            knowledge.params = load_net_file(spec.transfer->source_ckpt);
        if (!spec.transfer->source_exp.empty())
            knowledge.pool = load_annotated_experiences(spec.transfer->source_exp);
        has_knowledge = true;
    }

    struct Job {
        double value = 0.0;
        std::string algorithm;
        std::uint64_t seed = 0;
    };
    std::vector<Job> job_list;
    const bool has_sweep = !spec.sweep_param.empty();
    const std::vector<double> values = has_sweep ? spec.sweep_values : std::vector<double>{0.0};
    for (double v : values)
        for (const std::string& algo : spec.algorithms)
            for (std::uint64_t s : spec.seeds) job_list.push_back({v, algo, s});

    std::vector<CsvRow> rows(job_list.size());
    std::atomic<std::size_t> next{0};
    const std::string scenario_name = to_string(spec.scenario);

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= job_list.size()) return;
            const Job& job = job_list[i];
            try {
                EnvConfig cfg =
                    has_sweep ? apply_sweep_value(base, spec.sweep_param, job.value) : base;
                rows[i] = run_sweep_job(cfg, scenario_name, job.algorithm, spec.sweep_param,
                                        job.value, job.seed, spec.train_steps, spec.eval_slots,
                                        has_knowledge ? &knowledge : nullptr,
                                        spec.transfer ? &*spec.transfer : nullptr);
            } catch (const std::exception&) {
                CsvRow& row = rows[i];
                row.scenario = scenario_name;
                row.algorithm = job.algorithm;
                row.sweep_param = has_sweep ? spec.sweep_param : "none";
                row.sweep_value = job.value;
                row.seed = job.seed;
                row.eval_slots = spec.eval_slots;
                row.ok = false;
            }
        }
    };

    unsigned n_workers = jobs ? jobs : std::max(1u, std::thread::hardware_concurrency());
    n_workers = std::min<unsigned>(n_workers, static_cast<unsigned>(job_list.size()));
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (unsigned i = 0; i < n_workers; ++i) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    return rows;
}

}  // namespace uavrl
