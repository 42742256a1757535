#pragma once

#include <cstdint>
#include <map>

#include "gsched/model.hpp"
#include "gsched/rng.hpp"

namespace gsched::rg {

struct GreedyConfig {
    int max_iterations = 1000;          // MaxIt_RG
    std::uint64_t seed = 0;
    double swap_base_probability = 0.5; // adjacent-swap randomization strength
    int candidate_pool_size = 5;        // top-k configurations eligible for sampling
    int threads = 1;                    // iteration evaluation parallelism

    void validate() const;
};

// Stream seed for one construction iteration; depends only on (seed, iteration)
// so parallel and sequential runs see identical streams.
std::uint64_t iteration_seed(std::uint64_t seed, int iteration);

// Pressure-sorted queue (decreasing, ties by job id) followed by one adjacent
// swap pass: pair (j, k) swaps with probability swap_base * min(1, w_k/w_j).
// rng == nullptr skips the swap pass.
std::vector<JobState> sort_jobs_list(const std::vector<JobState>& queue,
                                     const std::map<std::string, Seconds>& pressures,
                                     const GreedyConfig& config, Rng* rng);

// Randomized configuration pick: top candidate_pool_size entries of D*_j by
// cost (all configurations by time when D*_j is empty), sampled with weight
// 1/cost (1/time in the fallback). rng == nullptr returns best_configuration.
Placement select_candidate_configuration(const JobState& job,
                                         const ProblemInstance& instance,
                                         const GreedyConfig& config, Rng* rng);

// One randomized construction pass over the queue. Postponement is the
// absorbing fallback; the result always satisfies node capacities.
Schedule construct_schedule(const ProblemInstance& instance, const GreedyConfig& config,
                            Rng* rng);

struct OptimizeResult {
    Schedule schedule;
    ObjectiveBreakdown objective;
    int winning_iteration = 0;
};

// Best-of-max_iterations randomized construction. Iteration 0 is fully
// deterministic, so the result never loses to the plain greedy. Deterministic
// given (instance, config), independently of the thread count.
OptimizeResult optimize(const ProblemInstance& instance, const GreedyConfig& config);

}  // namespace gsched::rg
