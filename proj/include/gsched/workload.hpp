#pragma once

#include <cstdint>

#include "gsched/model.hpp"
#include "gsched/sim.hpp"

namespace gsched::workload {

// Reference GPU speeds: V100 is the unit, T4 runs at 0.4x.
GpuType v100();
GpuType t4();

// Vendor-TDP-style synthetic power figures (watts).
constexpr double kIdleWatts = 200.0;
constexpr double kV100Watts = 250.0;
constexpr double kT4Watts = 70.0;

enum class NodeMix {
    scenario1,  // half the nodes 2x V100, half 1x T4
    scenario2,  // half the nodes 4x V100, half 2x T4
};

// Two-phase arrival process: phases of `phase_jobs` consecutive jobs
// alternate between bursty and sparse exponential inter-arrivals. The
// defaults keep the desk-scale clusters below saturation while bursts are
// several times over capacity, so queues build and drain.
struct ArrivalModel {
    Seconds high_mean = 300;
    Seconds low_mean = 2400;
    int phase_jobs = 10;
};

struct ScenarioSpec {
    int n_nodes = 10;
    int jobs_per_node = 10;  // J = jobs_per_node * n_nodes
    NodeMix node_mix = NodeMix::scenario1;
    ArrivalModel arrivals;
    double rho = 100;
    std::uint64_t seed = 1;
};

// per_epoch(class, type, g) = base(class) / (relative_speed * g^beta), with
// base drawn once per class from [20, 120] s. beta in (0, 1] keeps the
// speedup sublinear.
ProfileTable synthesize_profiles(const std::vector<std::string>& classes,
                                 const std::vector<GpuType>& gpu_types, int max_gpus,
                                 std::uint64_t seed, double beta = 0.8);

struct GeneratedInstance {
    std::vector<JobSpec> jobs;  // sorted by submission time
    sim::Catalog catalog;
};

// Random scenario: J = 10N jobs over the chosen node mix, classes from
// {LSTM, EfficientNet, ConvNet}, epochs from {60, 80, 160}, batch sizes from
// {4096, 8192}, weights from 1..5, due dates at 1.2..3x the fastest total
// time after submission. Deterministic given the seed.
GeneratedInstance generate(const ScenarioSpec& spec);

// The fixed 8-job replay workload on the three-node cluster (one 1x V100,
// one 2x V100, one 1x T4), jobs submitted 1200 s apart. No randomness.
GeneratedInstance armida_trace();

}  // namespace gsched::workload
