#pragma once

#include <map>

#include "gsched/model.hpp"

namespace gsched::baselines {

enum class Policy { fifo, edf, ps };

const char* policy_name(Policy policy);

// Service order of the queued jobs under a policy: FIFO by submission time,
// EDF by due date, PS by descending tardiness weight; ties by job id.
std::vector<std::string> policy_order(const std::vector<JobState>& queue, Policy policy);

// First-principle scheduler: jobs in `locked` keep their placement verbatim
// (no preemption, no migration); the rest are placed in policy order via the
// best-configuration rule, falling back through cheaper-to-faster feasible
// configurations on any node with free GPUs. Unplaceable jobs are postponed.
Schedule baseline_schedule(const ProblemInstance& instance, Policy policy,
                           const std::map<std::string, Placement>& locked);

}  // namespace gsched::baselines
