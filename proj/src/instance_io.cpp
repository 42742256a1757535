#include "gsched/instance_io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace gsched::io {

using ordered_json = nlohmann::ordered_json;

namespace {

// byte offset -> "line L" anchor for parse diagnostics
std::string line_anchor(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return "line " + std::to_string(line);
}

ordered_json parse_json(const std::string& text, const std::string& origin) {
    try {
        return ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(origin + ": " + line_anchor(text, e.byte) + ": " + e.what());
    }
}

void check_keys(const ordered_json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ParseError(path + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) throw ParseError(path + ": unknown field '" + key + "'");
    }
}

template <typename T>
T require(const ordered_json& obj, const std::string& path, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(path + ": missing field '" + key + "'");
    try {
        return it->get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ParseError(path + "." + key + ": wrong type");
    }
}

template <typename T>
std::optional<T> optional_field(const ordered_json& obj, const std::string& path,
                                const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    try {
        return it->get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ParseError(path + "." + key + ": wrong type");
    }
}

std::string indexed(const char* section, std::size_t i) {
    return std::string(section) + "[" + std::to_string(i) + "]";
}

}  // namespace

InstanceDoc parse_instance(const std::string& text, const std::string& origin) {
    const ordered_json root = parse_json(text, origin);
    check_keys(root, origin,
               {"gpu_types", "nodes", "profiles", "jobs", "economics", "rho", "horizon"});
    InstanceDoc doc;

    const auto& types = require<ordered_json>(root, origin, "gpu_types");
    if (!types.is_array()) throw ParseError(origin + ".gpu_types: expected an array");
    for (std::size_t i = 0; i < types.size(); ++i) {
        const std::string path = origin + "." + indexed("gpu_types", i);
        check_keys(types[i], path, {"name", "relative_speed", "gpu_watts"});
        GpuTypeSpec t;
        t.name = require<std::string>(types[i], path, "name");
        t.relative_speed = require<double>(types[i], path, "relative_speed");
        t.gpu_watts = require<double>(types[i], path, "gpu_watts");
        if (t.relative_speed <= 0) throw ParseError(path + ": relative_speed must be > 0");
        doc.gpu_types.push_back(std::move(t));
    }

    const auto& nodes = require<ordered_json>(root, origin, "nodes");
    if (!nodes.is_array()) throw ParseError(origin + ".nodes: expected an array");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const std::string path = origin + "." + indexed("nodes", i);
        check_keys(nodes[i], path, {"id", "gpu_type", "capacity", "idle_watts", "gpu_watts"});
        NodeSpec n;
        n.id = require<std::string>(nodes[i], path, "id");
        n.gpu_type = require<std::string>(nodes[i], path, "gpu_type");
        n.capacity = require<int>(nodes[i], path, "capacity");
        n.idle_watts = require<double>(nodes[i], path, "idle_watts");
        n.gpu_watts = optional_field<double>(nodes[i], path, "gpu_watts");
        if (n.capacity < 1) throw ParseError(path + ": capacity must be >= 1");
        doc.nodes.push_back(std::move(n));
    }

    const auto& profiles = require<ordered_json>(root, origin, "profiles");
    if (!profiles.is_array()) throw ParseError(origin + ".profiles: expected an array");
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        const std::string path = origin + "." + indexed("profiles", i);
        check_keys(profiles[i], path, {"class", "gpu_type", "g", "per_epoch_s"});
        ProfileEntry p;
        p.job_class = require<std::string>(profiles[i], path, "class");
        p.gpu_type = require<std::string>(profiles[i], path, "gpu_type");
        p.gpus = require<int>(profiles[i], path, "g");
        p.per_epoch_s = require<double>(profiles[i], path, "per_epoch_s");
        if (p.gpus < 1) throw ParseError(path + ": g must be >= 1");
        if (!(p.per_epoch_s > 0)) throw ParseError(path + ": per_epoch_s must be > 0");
        doc.profiles.push_back(std::move(p));
    }

    const auto& jobs = require<ordered_json>(root, origin, "jobs");
    if (!jobs.is_array()) throw ParseError(origin + ".jobs: expected an array");
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const std::string path = origin + "." + indexed("jobs", i);
        check_keys(jobs[i], path,
                   {"id", "class", "epochs", "batch", "submit_s", "due_s", "weight"});
        JobEntry j;
        j.id = require<std::string>(jobs[i], path, "id");
        j.job_class = require<std::string>(jobs[i], path, "class");
        j.epochs = require<int>(jobs[i], path, "epochs");
        j.batch = require<int>(jobs[i], path, "batch");
        j.submit_s = require<double>(jobs[i], path, "submit_s");
        j.due_s = require<double>(jobs[i], path, "due_s");
        j.weight = require<double>(jobs[i], path, "weight");
        if (j.epochs < 1) throw ParseError(path + ": epochs must be >= 1");
        if (j.weight < 0) throw ParseError(path + ": weight must be >= 0");
        doc.jobs.push_back(std::move(j));
    }

    const auto& econ = require<ordered_json>(root, origin, "economics");
    check_keys(econ, origin + ".economics", {"price_per_kwh", "pue"});
    doc.economics.price_per_kwh = require<double>(econ, origin + ".economics", "price_per_kwh");
    doc.economics.pue = require<double>(econ, origin + ".economics", "pue");
    if (doc.economics.pue < 1) throw ParseError(origin + ".economics: pue must be >= 1");

    doc.rho = require<double>(root, origin, "rho");
    if (doc.rho < 0) throw ParseError(origin + ": rho must be >= 0");
    doc.horizon = optional_field<double>(root, origin, "horizon");
    if (doc.horizon && !(*doc.horizon > 0))
        throw ParseError(origin + ": horizon must be > 0");
    return doc;
}

InstanceDoc load_instance(const std::string& path) {
    return parse_instance(read_file(path), path);
}

std::string write_instance(const InstanceDoc& doc) {
    ordered_json root;
    root["gpu_types"] = ordered_json::array();
    for (const auto& t : doc.gpu_types)
        root["gpu_types"].push_back(ordered_json{{"name", t.name},
                                                 {"relative_speed", t.relative_speed},
                                                 {"gpu_watts", t.gpu_watts}});
    root["nodes"] = ordered_json::array();
    for (const auto& n : doc.nodes) {
        ordered_json node{{"id", n.id},
                          {"gpu_type", n.gpu_type},
                          {"capacity", n.capacity},
                          {"idle_watts", n.idle_watts}};
        if (n.gpu_watts) node["gpu_watts"] = *n.gpu_watts;
        root["nodes"].push_back(std::move(node));
    }
    root["profiles"] = ordered_json::array();
    for (const auto& p : doc.profiles)
        root["profiles"].push_back(ordered_json{{"class", p.job_class},
                                                {"gpu_type", p.gpu_type},
                                                {"g", p.gpus},
                                                {"per_epoch_s", p.per_epoch_s}});
    root["jobs"] = ordered_json::array();
    for (const auto& j : doc.jobs)
        root["jobs"].push_back(ordered_json{{"id", j.id},
                                            {"class", j.job_class},
                                            {"epochs", j.epochs},
                                            {"batch", j.batch},
                                            {"submit_s", j.submit_s},
                                            {"due_s", j.due_s},
                                            {"weight", j.weight}});
    root["economics"] = ordered_json{{"price_per_kwh", doc.economics.price_per_kwh},
                                     {"pue", doc.economics.pue}};
    root["rho"] = doc.rho;
    if (doc.horizon) root["horizon"] = *doc.horizon;
    return root.dump(2) + "\n";
}

void save_instance(const InstanceDoc& doc, const std::string& path) {
    write_file(path, write_instance(doc));
}

sim::Catalog to_catalog(const InstanceDoc& doc) {
    std::map<std::string, GpuTypeSpec> types;
    for (const auto& t : doc.gpu_types) {
        if (!types.emplace(t.name, t).second)
            throw ParseError("duplicate gpu type " + t.name);
    }
    sim::Catalog catalog;
    catalog.rho = doc.rho;
    for (const auto& n : doc.nodes) {
        auto it = types.find(n.gpu_type);
        if (it == types.end())
            throw ParseError("node " + n.id + ": unknown gpu type " + n.gpu_type);
        catalog.nodes.push_back(
            sim::NodePower{n.id, GpuType{it->second.name, it->second.relative_speed},
                           n.capacity, n.idle_watts,
                           n.gpu_watts ? *n.gpu_watts : it->second.gpu_watts});
    }
    for (const auto& p : doc.profiles)
        catalog.profiles.set(p.job_class, p.gpu_type, p.gpus, p.per_epoch_s);
    catalog.profiles.validate();
    return catalog;
}

std::vector<JobSpec> to_workload(const InstanceDoc& doc) {
    std::vector<JobSpec> jobs;
    jobs.reserve(doc.jobs.size());
    for (const auto& j : doc.jobs)
        jobs.push_back(
            JobSpec{j.id, j.job_class, j.epochs, j.batch, j.submit_s, j.due_s, j.weight});
    return jobs;
}

InstanceDoc from_generated(const workload::GeneratedInstance& gen, EconomicsSpec economics,
                           std::optional<Seconds> horizon) {
    InstanceDoc doc;
    doc.economics = economics;
    doc.rho = gen.catalog.rho;
    doc.horizon = horizon;
    std::map<std::string, double> type_speed;
    std::map<std::string, double> type_watts;
    for (const auto& n : gen.catalog.nodes) {
        type_speed[n.gpu_type.name] = n.gpu_type.relative_speed;
        auto [it, fresh] = type_watts.try_emplace(n.gpu_type.name, n.gpu_watts);
        doc.nodes.push_back(NodeSpec{n.id, n.gpu_type.name, n.capacity, n.idle_watts,
                                     (!fresh && it->second != n.gpu_watts)
                                         ? std::optional<double>(n.gpu_watts)
                                         : std::nullopt});
    }
    for (const auto& [name, speed] : type_speed)
        doc.gpu_types.push_back(GpuTypeSpec{name, speed, type_watts.at(name)});
    for (const auto& [key, t] : gen.catalog.profiles.entries())
        doc.profiles.push_back(ProfileEntry{key.job_class, key.gpu_type, key.gpus, t});
    for (const auto& j : gen.jobs)
        doc.jobs.push_back(JobEntry{j.id, j.job_class, j.total_epochs, j.batch_size,
                                    j.submission_time, j.due_date, j.tardiness_weight});
    return doc;
}

Schedule parse_schedule(const std::string& text, const std::string& origin) {
    const ordered_json root = parse_json(text, origin);
    check_keys(root, origin, {"timestamp", "decisions"});
    Schedule schedule;
    schedule.timestamp = require<double>(root, origin, "timestamp");
    const auto& decisions = require<ordered_json>(root, origin, "decisions");
    if (!decisions.is_object())
        throw ParseError(origin + ".decisions: expected an object");
    for (const auto& [job, value] : decisions.items()) {
        const std::string path = origin + ".decisions." + job;
        if (value.is_null()) {
            schedule.decisions[job] = std::nullopt;
            continue;
        }
        check_keys(value, path, {"node", "gpus"});
        Placement p;
        p.node_id = require<std::string>(value, path, "node");
        p.gpus = require<int>(value, path, "gpus");
        schedule.decisions[job] = p;
    }
    return schedule;
}

Schedule load_schedule(const std::string& path) {
    return parse_schedule(read_file(path), path);
}

std::string write_schedule(const Schedule& schedule) {
    ordered_json decisions = ordered_json::object();
    for (const auto& [job, decision] : schedule.decisions) {
        if (decision)
            decisions[job] = ordered_json{{"node", decision->node_id},
                                          {"gpus", decision->gpus}};
        else
            decisions[job] = nullptr;
    }
    ordered_json root{{"timestamp", schedule.timestamp}, {"decisions", decisions}};
    return root.dump(2) + "\n";
}

std::string format_double(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, end);
}

std::string trace_csv(const std::vector<sim::TraceRecord>& trace) {
    std::ostringstream os;
    os << "time,kind,job,node,gpus\n";
    for (const auto& r : trace) {
        os << format_double(r.time) << "," << sim::trace_kind_name(r.kind) << "," << r.job
           << "," << r.node << ",";
        if (r.gpus > 0) os << r.gpus;
        os << "\n";
    }
    return os.str();
}

std::string calls_csv(const std::vector<sim::CallStat>& calls) {
    std::ostringstream os;
    os << "t,wall_seconds,f_obj\n";
    for (const auto& c : calls)
        os << format_double(c.at) << "," << format_double(c.wall_seconds) << ","
           << format_double(c.objective) << "\n";
    return os.str();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ": cannot open file");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SchedulerError(path + ": cannot write file");
    out << content;
    if (!out) throw SchedulerError(path + ": write failed");
}

}  // namespace gsched::io
