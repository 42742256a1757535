#include <doctest.h>

#include <cstdlib>

#include "gsched/instance_io.hpp"
#include "gsched/workload.hpp"
#include "test_support.hpp"

using namespace gsched;

namespace {

io::InstanceDoc sample_doc() {
    auto gen = workload::generate(workload::ScenarioSpec{4, 3});
    return io::from_generated(gen, io::EconomicsSpec{0.2, 1.5}, 250.0);
}

}  // namespace

TEST_CASE("instance documents round-trip") {
    const io::InstanceDoc doc = sample_doc();
    const std::string text = io::write_instance(doc);

    const io::InstanceDoc back = io::parse_instance(text, "mem");
    CHECK(back == doc);

    // canonical writer is idempotent byte for byte
    CHECK(io::write_instance(back) == text);
}

TEST_CASE("armida preset survives the file format") {
    auto gen = workload::armida_trace();
    auto doc = io::from_generated(gen);
    auto back = io::parse_instance(io::write_instance(doc), "mem");
    CHECK(back == doc);

    auto catalog = io::to_catalog(back);
    REQUIRE(catalog.nodes.size() == 3);
    CHECK(catalog.nodes[1].capacity == 2);
    CHECK(catalog.nodes[2].gpu_watts == workload::kT4Watts);
    auto jobs = io::to_workload(back);
    CHECK(jobs.size() == 8);
    CHECK(jobs[0].job_class == "EfficientNet");
}

TEST_CASE("unknown fields are rejected with a field path") {
    const io::InstanceDoc doc = sample_doc();
    std::string text = io::write_instance(doc);

    SUBCASE("top level") {
        text.insert(text.find_first_of('{') + 1, "\"surprise\": 1,");
        CHECK_THROWS_WITH_AS(io::parse_instance(text, "f"),
                             doctest::Contains("unknown field 'surprise'"),
                             io::ParseError);
    }
    SUBCASE("inside a node") {
        const auto pos = text.find("\"idle_watts\"");
        text.insert(pos, "\"sneaky\": true, ");
        try {
            io::parse_instance(text, "f");
            FAIL("expected a parse error");
        } catch (const io::ParseError& e) {
            CHECK(std::string(e.what()).find("nodes[0]") != std::string::npos);
            CHECK(std::string(e.what()).find("sneaky") != std::string::npos);
        }
    }
}

TEST_CASE("malformed JSON diagnostics carry a line anchor") {
    const std::string broken = "{\n  \"gpu_types\": [\n  oops\n";
    try {
        io::parse_instance(broken, "bad.json");
        FAIL("expected a parse error");
    } catch (const io::ParseError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("bad.json") != std::string::npos);
        CHECK(msg.find("line 3") != std::string::npos);
    }
}

TEST_CASE("semantic validation of instance fields") {
    io::InstanceDoc doc = sample_doc();
    doc.jobs[0].epochs = 0;
    CHECK_THROWS_AS(io::parse_instance(io::write_instance(doc), "f"), io::ParseError);

    io::InstanceDoc bad_rho = sample_doc();
    bad_rho.rho = -1;
    CHECK_THROWS_AS(io::parse_instance(io::write_instance(bad_rho), "f"), io::ParseError);

    io::InstanceDoc bad_type = sample_doc();
    bad_type.nodes[0].gpu_type = "missing";
    CHECK_THROWS_AS(io::to_catalog(bad_type), io::ParseError);
}

TEST_CASE("schedule files round-trip and reject junk") {
    Schedule s;
    s.timestamp = 1200;
    s.decisions["a"] = Placement{"n1", 2};
    s.decisions["b"] = std::nullopt;
    const std::string text = io::write_schedule(s);
    Schedule back = io::parse_schedule(text, "mem");
    CHECK(back.timestamp == 1200);
    CHECK(back.decisions == s.decisions);

    CHECK_THROWS_AS(io::parse_schedule("{\"timestamp\": 0}", "m"), io::ParseError);
    CHECK_THROWS_AS(
        io::parse_schedule(
            "{\"timestamp\": 0, \"decisions\": {\"a\": {\"node\": \"n\", \"gpus\": 1, "
            "\"extra\": 2}}}",
            "m"),
        io::ParseError);
}

TEST_CASE("format_double survives the round trip" * doctest::timeout(60)) {
    Rng rng(99);
    for (int i = 0; i < 2000; ++i) {
        double v = (rng.uniform01() - 0.5) * std::pow(10.0, rng.index(12));
        if (i % 7 == 0) v = std::floor(v);
        const std::string s = io::format_double(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
}

TEST_CASE("csv emission shapes") {
    std::vector<sim::TraceRecord> trace = {
        {0, sim::TraceKind::arrival, "a", "", 0},
        {0, sim::TraceKind::start, "a", "n1", 2},
        {42.5, sim::TraceKind::completion, "a", "n1", 2},
    };
    const std::string csv = io::trace_csv(trace);
    CHECK(csv.find("time,kind,job,node,gpus\n") == 0);
    CHECK(csv.find("0,arrival,a,,\n") != std::string::npos);
    CHECK(csv.find("0,start,a,n1,2\n") != std::string::npos);
    CHECK(csv.find("42.5,completion,a,n1,2\n") != std::string::npos);

    std::vector<sim::CallStat> calls = {{0, 0.001, 12.5}};
    const std::string ccsv = io::calls_csv(calls);
    CHECK(ccsv.find("t,wall_seconds,f_obj\n") == 0);
    CHECK(ccsv.find("0,0.001,12.5\n") != std::string::npos);
}
