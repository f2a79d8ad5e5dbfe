#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace uavrl {

// Slot-level accounting shared by trainers and evaluation rollouts. Idle
// slots contribute zero reward and zero packets but still count in the
// denominator of every per-slot average.
struct RolloutAccumulator {
    std::int64_t slots = 0;
    double reward_sum = 0.0;
    std::int64_t packets = 0;
    std::int64_t energy_spent = 0;

    void add(double reward, int packet_count, int energy, int elapsed_slots) {
        slots += elapsed_slots;
        reward_sum += reward;
        packets += packet_count;
        energy_spent += energy;
    }

    double avg_reward() const { return slots ? reward_sum / static_cast<double>(slots) : 0.0; }
    double throughput() const { return slots ? packets / static_cast<double>(slots) : 0.0; }
    double energy_per_slot() const {
        return slots ? energy_spent / static_cast<double>(slots) : 0.0;
    }
};

struct MetricRow {
    std::int64_t step = 0;  // decision steps completed at this checkpoint
    double avg_reward = 0.0;
    double throughput = 0.0;
    double energy_per_slot = 0.0;
};

// Per-checkpoint running averages recorded during training.
struct MetricTrace {
    std::vector<MetricRow> rows;

    void checkpoint(std::int64_t step, const RolloutAccumulator& acc) {
        rows.push_back({step, acc.avg_reward(), acc.throughput(), acc.energy_per_slot()});
    }
    std::size_t size() const { return rows.size(); }
    bool empty() const { return rows.empty(); }
};

inline std::string format_double(double v, int significant = 10) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", significant, v);
    return buf;
}

inline void save_trace_csv(const MetricTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write trace: " + path);
    out << "step,avg_reward,throughput,energy_per_slot\n";
    for (const MetricRow& r : trace.rows)
        out << r.step << ',' << format_double(r.avg_reward) << ',' << format_double(r.throughput)
            << ',' << format_double(r.energy_per_slot) << '\n';
    if (!out) throw std::runtime_error("failed writing trace: " + path);
}

inline MetricTrace load_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "step,avg_reward,throughput,energy_per_slot")
        throw std::runtime_error("bad trace header in " + path);
    MetricTrace trace;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        MetricRow row;
        char comma;
        std::istringstream ss(line);
        ss >> row.step >> comma >> row.avg_reward >> comma >> row.throughput >> comma >>
            row.energy_per_slot;
        if (ss.fail()) throw std::runtime_error("bad trace row in " + path);
        trace.rows.push_back(row);
    }
    return trace;
}

}  // namespace uavrl
