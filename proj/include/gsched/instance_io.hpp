#pragma once

#include <optional>
#include <string>

#include "gsched/model.hpp"
#include "gsched/sim.hpp"
#include "gsched/workload.hpp"

namespace gsched::io {

// Malformed or semantically invalid input file; the message carries the
// origin and a line anchor or field path.
struct ParseError : SchedulerError {
    using SchedulerError::SchedulerError;
};

struct EconomicsSpec {
    double price_per_kwh = 0.172;
    double pue = 1.33;
    bool operator==(const EconomicsSpec&) const = default;
};

struct GpuTypeSpec {
    std::string name;
    double relative_speed = 1.0;
    double gpu_watts = 250.0;
    bool operator==(const GpuTypeSpec&) const = default;
};

struct NodeSpec {
    std::string id;
    std::string gpu_type;
    int capacity = 1;
    double idle_watts = 200.0;
    std::optional<double> gpu_watts;  // overrides the type default
    bool operator==(const NodeSpec&) const = default;
};

struct ProfileEntry {
    std::string job_class;
    std::string gpu_type;
    int gpus = 1;
    Seconds per_epoch_s = 1;
    bool operator==(const ProfileEntry&) const = default;
};

struct JobEntry {
    std::string id;
    std::string job_class;
    int epochs = 1;
    int batch = 1;
    Seconds submit_s = 0;
    Seconds due_s = 0;
    double weight = 0;
    bool operator==(const JobEntry&) const = default;
};

// The on-disk instance document: workload plus catalog plus economics.
struct InstanceDoc {
    std::vector<GpuTypeSpec> gpu_types;
    std::vector<NodeSpec> nodes;
    std::vector<ProfileEntry> profiles;
    std::vector<JobEntry> jobs;
    EconomicsSpec economics;
    double rho = 100;
    std::optional<Seconds> horizon;
    bool operator==(const InstanceDoc&) const = default;
};

InstanceDoc parse_instance(const std::string& text, const std::string& origin);
InstanceDoc load_instance(const std::string& path);
std::string write_instance(const InstanceDoc& doc);  // canonical form
void save_instance(const InstanceDoc& doc, const std::string& path);

sim::Catalog to_catalog(const InstanceDoc& doc);
std::vector<JobSpec> to_workload(const InstanceDoc& doc);
InstanceDoc from_generated(const workload::GeneratedInstance& gen,
                           EconomicsSpec economics = {},
                           std::optional<Seconds> horizon = {});

// Schedule files: {"timestamp": s, "decisions": {job: null | {node, gpus}}}
Schedule parse_schedule(const std::string& text, const std::string& origin);
Schedule load_schedule(const std::string& path);
std::string write_schedule(const Schedule& schedule);

// Shortest exact round-trip decimal form; deterministic.
std::string format_double(double value);

std::string trace_csv(const std::vector<sim::TraceRecord>& trace);
std::string calls_csv(const std::vector<sim::CallStat>& calls);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace gsched::io
