#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "resq/backend.hpp"
#include "test_support.hpp"

namespace resq {
namespace {

using Code = BackendError::Code;
using nlohmann::json;

std::string read(const std::string& name) {
    std::ifstream in(std::string(RESQ_TEST_DATA) + "/" + name);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

BackendError::Code calibration_error(const json& doc, std::string* path = nullptr) {
    try {
        calibration_from_json(doc);
    } catch (const BackendError& e) {
        if (path) {
            *path = e.path();
        }
        return e.code();
    }
    ADD_FAILURE() << "expected BackendError for " << doc.dump();
    return Code::ExecutionFailed;
}

ExperimentResult recorded(BitstringCounts::Map counts) {
    ExperimentResult r;
    r.counts = BitstringCounts(std::move(counts));
    r.shots = r.counts.total();
    r.backend_name = "ibm_fake";
    r.submitted_at = testing::at_seconds(0);
    r.completed_at = testing::at_seconds(90);
    r.metadata = {{"job_id", "abc"}};
    return r;
}

TEST(Calibration, ParsesDocument) {
    const auto snap = parse_calibration(read("calibration_2q.json"));
    EXPECT_EQ(snap.num_qubits, 2u);
    ASSERT_EQ(snap.qubits.size(), 2u);
    EXPECT_EQ(snap.qubits[0], (QubitCalibration{100, 80, 0.01}));
    EXPECT_EQ(snap.qubits[1], (QubitCalibration{120, 100, 0.02}));
    EXPECT_EQ(snap.gates.size(), 3u);
    EXPECT_EQ(snap.gates[2].name, "cx");
    EXPECT_EQ(snap.coupling_map.size(), 2u);
    EXPECT_EQ(format_rfc3339(snap.taken_at), "2025-06-01T12:00:00.000000Z");
}

TEST(Calibration, MissingCouplingMap) {
    auto doc = json::parse(read("calibration_2q.json"));
    doc.erase("coupling_map");
    std::string path;
    EXPECT_EQ(calibration_error(doc, &path), Code::SchemaViolation);
    EXPECT_EQ(path, "coupling_map");
}

TEST(Calibration, RangeAndPhysicalBounds) {
    const auto base = json::parse(read("calibration_2q.json"));
    std::string path;

    auto doc = base;
    doc["qubits"][1]["readout_error"] = 1.5;
    EXPECT_EQ(calibration_error(doc, &path), Code::RangeViolation);
    EXPECT_EQ(path, "qubits[1].readout_error");

    doc = base;
    doc["qubits"][0]["t2_us"] = 201.0;
    EXPECT_EQ(calibration_error(doc, &path), Code::PhysicalBound);
    EXPECT_EQ(path, "qubits[0].t2_us");

    doc = base;
    doc["qubits"][0]["t2_us"] = 200.0;  // exactly 2*T1 is allowed
    EXPECT_NO_THROW(calibration_from_json(doc));

    doc = base;
    doc["coupling_map"].push_back({0, 2});
    EXPECT_EQ(calibration_error(doc, &path), Code::RangeViolation);
    EXPECT_EQ(path, "coupling_map[2]");

    doc = base;
    doc["gates"][0]["error"] = -0.1;
    EXPECT_EQ(calibration_error(doc), Code::RangeViolation);

    doc = base;
    doc["qubits"].erase(1);
    EXPECT_EQ(calibration_error(doc), Code::SchemaViolation);

    doc = base;
    doc["taken_at"] = "yesterday";
    EXPECT_EQ(calibration_error(doc, &path), Code::SchemaViolation);
    EXPECT_EQ(path, "taken_at");

    EXPECT_THROW(parse_calibration("{not json"), BackendError);
}

TEST(Calibration, JsonRoundTrip) {
    const auto snap = testing::two_qubit_snapshot();
    EXPECT_EQ(calibration_from_json(calibration_to_json(snap)), snap);
}

TEST(SimulatorAdapter, RunContract) {
    auto adapter = testing::make_simulator(NoiseModel::defaults(5));
    const auto result = adapter->run(phi_plus(), 1024);
    EXPECT_EQ(result.counts.total(), 1024u);
    EXPECT_EQ(result.shots, 1024u);
    EXPECT_EQ(result.backend_name, "simulator");
    EXPECT_EQ(result.counts.width(), 2u);
    EXPECT_GE(result.completed_at, result.submitted_at);
    EXPECT_NO_THROW(result.validate());
    EXPECT_EQ(adapter->name(), "simulator");
}

TEST(SimulatorAdapter, NoiselessPhiPlus) {
    auto adapter = testing::make_simulator(NoiseModel::noiseless());
    const auto result = adapter->run(phi_plus(), 10000);
    EXPECT_EQ(result.counts.count("00") + result.counts.count("11"), 10000u);
}

TEST(SimulatorAdapter, CalibrationIsRestamped) {
    auto clock = std::make_shared<ManualClock>(testing::at_seconds(0));
    SimulatorAdapter adapter(NoiseModel{}, testing::two_qubit_snapshot(), clock);
    const auto first = adapter.calibration();
    clock->advance(std::chrono::seconds{30});
    const auto second = adapter.calibration();
    EXPECT_EQ(first.qubits, second.qubits);
    EXPECT_EQ(first.gates, second.gates);
    EXPECT_LE(first.taken_at, second.taken_at);
    EXPECT_EQ(second.taken_at, testing::at_seconds(30));
}

TEST(SimulatorAdapter, RunsAreIndependentButReproducible) {
    const NoiseModel noise{0.01, 0.05, 0.02, 77};
    auto a = testing::make_simulator(noise);
    auto b = testing::make_simulator(noise);
    const auto a1 = a->run(packed_chsh_circuit(), 2000);
    const auto a2 = a->run(packed_chsh_circuit(), 2000);
    EXPECT_NE(a1.counts, a2.counts);
    EXPECT_EQ(b->run(packed_chsh_circuit(), 2000).counts, a1.counts);
    EXPECT_EQ(b->run(packed_chsh_circuit(), 2000).counts, a2.counts);
}

TEST(SimulatorAdapter, RejectsInvalidSetup) {
    EXPECT_THROW(SimulatorAdapter(NoiseModel{2, 0, 0, 0}, testing::two_qubit_snapshot()), std::invalid_argument);
    auto bad = testing::two_qubit_snapshot();
    bad.qubits[0].t2_us = 500;
    EXPECT_THROW(SimulatorAdapter(NoiseModel{}, bad), BackendError);
    auto adapter = testing::make_simulator(NoiseModel{});
    EXPECT_THROW(adapter->run(phi_plus(), 0), BackendError);
}

TEST(ReplayAdapter, ExhaustsAfterRecordedResults) {
    ReplayAdapter replay({testing::two_qubit_snapshot(), {recorded({{"00", 10}}), recorded({{"11", 10}})}});
    EXPECT_EQ(replay.remaining(), 2u);
    replay.run(phi_plus(), 10);
    replay.run(phi_plus(), 10);
    try {
        replay.run(phi_plus(), 10);
        FAIL();
    } catch (const BackendError& e) {
        EXPECT_EQ(e.code(), Code::RecordingExhausted);
    }
    EXPECT_EQ(replay.submitted().size(), 2u);
}

TEST(ReplayAdapter, ReturnsResultsVerbatimInOrder) {
    const auto first = recorded({{"00", 700}, {"11", 324}});
    const auto second = recorded({{"01", 5}});
    ReplayAdapter replay({testing::two_qubit_snapshot(), {first, second}});
    // The circuit argument is only logged.
    EXPECT_EQ(replay.run(packed_chsh_circuit(), 1), first);
    EXPECT_EQ(replay.run(phi_plus(), 99), second);
    EXPECT_EQ(replay.submitted()[0], packed_chsh_circuit());
    EXPECT_EQ(replay.calibration(), testing::two_qubit_snapshot());
}

TEST(ReplayAdapter, StrictModeChecksWidthAndShots) {
    ReplayAdapter strict({testing::two_qubit_snapshot(), {recorded({{"00", 7}}), recorded({{"00", 7}})}}, true);
    EXPECT_THROW(strict.run(packed_chsh_circuit(), 7), BackendError);
    EXPECT_THROW(strict.run(phi_plus(), 8), BackendError);
    EXPECT_NO_THROW(strict.run(phi_plus(), 7));
}

TEST(ReplayAdapter, RecordingDocumentLoadsAndValidates) {
    Recording rec{testing::two_qubit_snapshot(), {recorded({{"00", 700}, {"11", 324}})}};
    auto doc = recording_to_json(rec);
    EXPECT_EQ(recording_from_json(doc), rec);
    EXPECT_EQ(doc["results"][0]["counts"]["00"], 700);
    EXPECT_EQ(doc["results"][0]["shots"], 1024);

    auto bad = doc;
    bad["calibration"]["qubits"][0]["t2_us"] = 1000.0;
    try {
        recording_from_json(bad);
        FAIL();
    } catch (const BackendError& e) {
        EXPECT_EQ(e.code(), Code::PhysicalBound);
        EXPECT_EQ(e.path(), "calibration.qubits[0].t2_us");
    }

    bad = doc;
    bad["results"][0]["shots"] = 1000;
    EXPECT_THROW(recording_from_json(bad), BackendError);

    bad = doc;
    bad["results"][0]["completed_at"] = "2020-01-01T00:00:00Z";
    EXPECT_THROW(recording_from_json(bad), BackendError);

    bad = doc;
    bad.erase("results");
    EXPECT_THROW(recording_from_json(bad), BackendError);

    bad = doc;
    bad["results"][0]["counts"] = {{"00", 1000}, {"1", 24}};
    EXPECT_THROW(recording_from_json(bad), BackendError);
}

TEST(RecordingAdapter, CapturedSessionReplaysIdentically) {
    auto sim = testing::make_simulator(NoiseModel{0.01, 0.02, 0.01, 9});
    RecordingAdapter recorder(*sim);
    const auto cal = recorder.calibration();
    const auto r1 = recorder.run(packed_chsh_circuit(), 500);
    const auto r2 = recorder.run(phi_plus(), 300);

    const auto text = recording_to_json(recorder.recording()).dump();
    ReplayAdapter replay(parse_recording(text), true);
    EXPECT_EQ(replay.calibration(), cal);
    EXPECT_EQ(replay.run(packed_chsh_circuit(), 500), r1);
    EXPECT_EQ(replay.run(phi_plus(), 300), r2);
}

}  // namespace
}  // namespace resq
