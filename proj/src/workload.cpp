#include "gsched/workload.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gsched/rng.hpp"

namespace gsched::workload {

GpuType v100() { return GpuType{"V100", 1.0}; }
GpuType t4() { return GpuType{"T4", 0.4}; }

ProfileTable synthesize_profiles(const std::vector<std::string>& classes,
                                 const std::vector<GpuType>& gpu_types, int max_gpus,
                                 std::uint64_t seed, double beta) {
    if (beta <= 0 || beta > 1)
        throw SchedulerError("profile beta must be in (0, 1] for sublinear speedup");
    ProfileTable table;
    Rng rng(seed);
    for (const auto& cls : classes) {
        const double base = 20.0 + rng.uniform01() * 100.0;
        for (const auto& type : gpu_types)
            for (int g = 1; g <= max_gpus; ++g)
                table.set(cls, type.name, g,
                          base / (type.relative_speed * std::pow(g, beta)));
    }
    table.validate();
    return table;
}

namespace {

std::string padded(const std::string& prefix, int value, int width) {
    std::string digits = std::to_string(value);
    while (static_cast<int>(digits.size()) < width) digits.insert(digits.begin(), '0');
    return prefix + digits;
}

Seconds fastest_total_time(const JobSpec& job, const sim::Catalog& catalog) {
    Seconds best = std::numeric_limits<Seconds>::infinity();
    for (const auto& node : catalog.nodes)
        for (int g = 1; g <= node.capacity; ++g) {
            auto per = catalog.profiles.per_epoch(job.job_class, node.gpu_type.name, g);
            if (per) best = std::min(best, job.total_epochs * *per);
        }
    return best;
}

ProfileTable fixed_profiles(const std::vector<std::pair<std::string, double>>& bases,
                            int max_gpus, double beta) {
    ProfileTable table;
    for (const auto& [cls, base] : bases)
        for (const auto& type : {v100(), t4()})
            for (int g = 1; g <= max_gpus; ++g)
                table.set(cls, type.name, g,
                          base / (type.relative_speed * std::pow(g, beta)));
    table.validate();
    return table;
}

}  // namespace

GeneratedInstance generate(const ScenarioSpec& spec) {
    if (spec.n_nodes < 1) throw SchedulerError("n_nodes must be >= 1");
    if (spec.jobs_per_node < 1) throw SchedulerError("jobs_per_node must be >= 1");

    GeneratedInstance out;
    out.catalog.rho = spec.rho;

    const int v100_gpus = spec.node_mix == NodeMix::scenario1 ? 2 : 4;
    const int t4_gpus = spec.node_mix == NodeMix::scenario1 ? 1 : 2;
    const int n_v100 = (spec.n_nodes + 1) / 2;
    for (int i = 0; i < spec.n_nodes; ++i) {
        const bool is_v100 = i < n_v100;
        out.catalog.nodes.push_back(sim::NodePower{
            padded("node-", i, 3), is_v100 ? v100() : t4(),
            is_v100 ? v100_gpus : t4_gpus, kIdleWatts,
            is_v100 ? kV100Watts : kT4Watts});
    }

    const std::vector<std::string> classes = {"LSTM", "EfficientNet", "ConvNet"};
    const int max_gpus = std::max(v100_gpus, t4_gpus);
    out.catalog.profiles =
        synthesize_profiles(classes, {v100(), t4()}, max_gpus, spec.seed);

    const int total_jobs = spec.n_nodes * spec.jobs_per_node;
    const int epochs_options[] = {60, 80, 160};
    const int batch_options[] = {4096, 8192};

    Rng rng(mix64(spec.seed) ^ 0x5bf0f1a5ULL);
    Seconds at = 0;
    for (int i = 0; i < total_jobs; ++i) {
        JobSpec job;
        job.id = padded("job-", i, 4);
        job.job_class = classes[rng.index(classes.size())];
        job.total_epochs = epochs_options[rng.index(3)];
        job.batch_size = batch_options[rng.index(2)];
        job.tardiness_weight = static_cast<double>(1 + rng.index(5));

        const bool burst = (i / spec.arrivals.phase_jobs) % 2 == 0;
        at += rng.exponential(burst ? spec.arrivals.high_mean : spec.arrivals.low_mean);
        job.submission_time = at;

        const double slack = 1.2 + rng.uniform01() * 1.8;
        job.due_date = job.submission_time + slack * fastest_total_time(job, out.catalog);
        out.jobs.push_back(std::move(job));
    }
    return out;
}

GeneratedInstance armida_trace() {
    GeneratedInstance out;
    out.catalog.rho = 100;
    out.catalog.nodes = {
        sim::NodePower{"armida-05", v100(), 1, kIdleWatts, kV100Watts},
        sim::NodePower{"armida-06", v100(), 2, kIdleWatts, kV100Watts},
        sim::NodePower{"armida-07", t4(), 1, kIdleWatts, kT4Watts},
    };
    // synthetic per-epoch baselines (V100, 1 GPU), chosen inside [20, 120] s
    out.catalog.profiles = fixed_profiles({{"EfficientNet", 30.0},
                                           {"ConvNet", 20.0},
                                           {"LSTM-big", 60.0},
                                           {"LSTM-small", 25.0}},
                                          2, 0.8);

    auto job = [](std::string id, std::string cls, int epochs, int batch, Seconds submit,
                  Seconds due, double weight) {
        return JobSpec{std::move(id), std::move(cls), epochs, batch, submit, due, weight};
    };
    out.jobs = {
        job("J6", "EfficientNet", 80, 4096, 0, 3600, 4),
        job("J9", "ConvNet", 160, 8192, 1200, 2600, 2),
        job("J10", "ConvNet", 80, 8192, 2400, 7600, 3),
        job("J7", "LSTM-big", 160, 8192, 3600, 17600, 3),
        job("J8", "LSTM-small", 160, 8192, 4800, 7600, 3),
        job("J1", "LSTM-big", 60, 8192, 6000, 5600, 5),
        job("J2", "LSTM-small", 60, 8192, 7200, 12600, 2),
        job("J3", "EfficientNet", 60, 4096, 8400, 11600, 1),
    };
    return out;
}

}  // namespace gsched::workload
