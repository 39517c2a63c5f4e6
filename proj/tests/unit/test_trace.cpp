#include "lotaru/error.hpp"
#include "lotaru/trace.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace lotaru;

namespace {

const std::string kHeader =
    "Workflow,Task,Node,Realtime,%cpu,rss,InputSizeCompressed,InputSizeUncompressed,FreqMode,PartitionLabel\n";

ParseResult parse(const std::string& text, const ColumnMapping& schema = {}) {
    std::istringstream in(text);
    return parse_traces(in, schema);
}

RunRecord record(std::string task, std::string label, double ms, FreqMode mode, Bytes size = 100) {
    RunRecord r;
    r.workflow = "wf";
    r.task = std::move(task);
    r.node = "local";
    r.input_size_uncompressed = size;
    r.runtime_ms = ms;
    r.freq_mode = mode;
    r.partition_label = std::move(label);
    return r;
}

}  // namespace

TEST(TraceParse, SingleValidRow) {
    const auto res = parse(kHeader + "eager,fastqc,local,120000,98.1,1024,2000,4808,Normal,p1\n");
    ASSERT_EQ(res.records.size(), 1u);
    EXPECT_TRUE(res.errors.empty());
    const auto& r = res.records[0];
    EXPECT_EQ(r.task, "fastqc");
    EXPECT_EQ(r.input_size_uncompressed, 4808u);
    EXPECT_EQ(r.input_size_compressed, 2000u);
    EXPECT_DOUBLE_EQ(r.runtime_ms, 120000);
    EXPECT_EQ(r.freq_mode, FreqMode::Normal);
    EXPECT_EQ(r.partition_label, "p1");
    EXPECT_DOUBLE_EQ(*r.cpu_percent, 98.1);
}

TEST(TraceParse, NonNumericRuntimeIsRowError) {
    const auto res = parse(kHeader + "eager,fastqc,local,abc,,,2000,4808,Normal,p1\n");
    EXPECT_TRUE(res.records.empty());
    ASSERT_EQ(res.errors.size(), 1u);
    EXPECT_EQ(res.errors[0].row, 1u);
}

TEST(TraceParse, TenRowsTwoMalformedKeepsOrder) {
    std::string text = kHeader;
    for (int i = 1; i <= 10; ++i) {
        if (i == 4) {
            text += "wf,t4,local,-5,,,10,20,Normal,p4\n";  // runtime <= 0
        } else if (i == 8) {
            text += "wf,t8,local,100,,,10\n";  // too few columns
        } else {
            text += "wf,t" + std::to_string(i) + ",local," + std::to_string(100 * i) + ",,,10,20,Normal,p" +
                    std::to_string(i) + "\n";
        }
    }
    const auto res = parse(text);
    ASSERT_EQ(res.records.size(), 8u);
    ASSERT_EQ(res.errors.size(), 2u);
    EXPECT_EQ(res.errors[0].row, 4u);
    EXPECT_EQ(res.errors[1].row, 8u);
    const std::vector<std::string> expected{"t1", "t2", "t3", "t5", "t6", "t7", "t9", "t10"};
    for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_EQ(res.records[i].task, expected[i]);
}

TEST(TraceParse, MissingRequiredColumnThrows) {
    EXPECT_THROW(parse("Workflow,Task,Node,FreqMode\nwf,t,n,Normal\n"), ValidationError);
}

TEST(TraceParse, MachineAliasAndMetadata) {
    const auto res = parse(
        "# freq_old = 2400\n"
        "Workflow,Task,Machine,Realtime,InputSizeCompressed,InputSizeUncompressed,FreqMode,PartitionLabel\n"
        "wf,t,n1,5,1,2,reduced,p1\n");
    ASSERT_EQ(res.records.size(), 1u);
    EXPECT_EQ(res.records[0].node, "n1");
    EXPECT_EQ(res.records[0].freq_mode, FreqMode::Reduced);
    EXPECT_EQ(res.metadata.at("freq_old"), "2400");
}

TEST(TraceParse, UncompressedSmallerThanCompressedWarns) {
    const auto res = parse(kHeader + "wf,t,n,5,,,200,100,Normal,p1\n");
    EXPECT_EQ(res.records.size(), 1u);
    EXPECT_EQ(res.warnings.size(), 1u);
}

TEST(TraceParse, SchemaMappingAndUnits) {
    std::istringstream schema_text(
        "task = step\nrealtime = duration\nsize_uncompressed = bytes_in\nsize_unit = MB\ntime_unit = s\n"
        "delimiter = ;\n");
    const auto schema = parse_column_mapping(schema_text);
    const auto res = parse(
        "Workflow;step;Node;duration;InputSizeCompressed;bytes_in;FreqMode;PartitionLabel\n"
        "wf;align;n;1.5;-;2;Normal;p1\n",
        schema);
    ASSERT_EQ(res.records.size(), 1u) << (res.errors.empty() ? "" : res.errors[0].message);
    EXPECT_DOUBLE_EQ(res.records[0].runtime_ms, 1500.0);
    EXPECT_EQ(res.records[0].input_size_uncompressed, 2u << 20);
    EXPECT_FALSE(res.records[0].input_size_compressed.has_value());
}

TEST(TraceParse, RoundTripRandomRecords) {
    std::mt19937 rng(11);
    std::uniform_int_distribution<Bytes> size(1, 1ull << 40);
    std::uniform_real_distribution<double> ms(0.5, 1e7);
    std::vector<RunRecord> records;
    for (int i = 0; i < 200; ++i) {
        auto r = record("task \"" + std::to_string(i % 7) + "\", x", "p" + std::to_string(i % 10), ms(rng),
                        i % 3 ? FreqMode::Normal : FreqMode::Reduced, size(rng));
        if (i % 4 == 0) r.input_size_compressed = *r.input_size_uncompressed / 2;
        if (i % 5 == 0) r.cpu_percent = ms(rng) / 1e5;
        if (i % 6 == 0) r.rss_bytes = static_cast<double>(size(rng));
        records.push_back(std::move(r));
    }
    std::ostringstream out;
    write_traces(out, records, {{"freq_old", "1000"}});
    const auto res = parse(out.str());
    EXPECT_TRUE(res.errors.empty());
    EXPECT_EQ(res.records, records);
    EXPECT_EQ(res.metadata.at("freq_old"), "1000");
}

TEST(EffectiveSize, PrefersUncompressed) {
    RunRecord r;
    r.input_size_compressed = 2014ull << 20;
    r.input_size_uncompressed = 5000ull << 20;
    const auto e = effective_input_size(r);
    EXPECT_EQ(e.bytes, 5000ull << 20);
    EXPECT_FALSE(e.compressed_fallback);
}

TEST(EffectiveSize, FallsBackToCompressed) {
    RunRecord r;
    r.input_size_compressed = 100;
    auto e = effective_input_size(r);
    EXPECT_EQ(e.bytes, 100u);
    EXPECT_TRUE(e.compressed_fallback);

    r.input_size_uncompressed = 0;
    e = effective_input_size(r);
    EXPECT_EQ(e.bytes, 100u);
    EXPECT_TRUE(e.compressed_fallback);
}

TEST(EffectiveSize, BothAbsentThrows) { EXPECT_THROW(effective_input_size(RunRecord{}), ValidationError); }

TEST(TrainingSets, FullMatch) {
    std::vector<RunRecord> rs;
    for (int i = 1; i <= 5; ++i) {
        rs.push_back(record("t", "p" + std::to_string(i), 100.0 * i, FreqMode::Normal));
        rs.push_back(record("t", "p" + std::to_string(i), 125.0 * i, FreqMode::Reduced));
    }
    const auto sets = build_training_sets(rs);
    ASSERT_EQ(sets.size(), 1u);
    EXPECT_EQ(sets.at("t").pairs.size(), 5u);
    EXPECT_EQ(sets.at("t").normal_runs.size(), 5u);
}

TEST(TrainingSets, PartialReducedRuns) {
    std::vector<RunRecord> rs;
    for (int i = 1; i <= 5; ++i) rs.push_back(record("t", "p" + std::to_string(i), 100.0 * i, FreqMode::Normal));
    rs.push_back(record("t", "p1", 125, FreqMode::Reduced));
    rs.push_back(record("t", "p2", 250, FreqMode::Reduced));
    const auto& ts = build_training_sets(rs).at("t");
    EXPECT_EQ(ts.pairs.size(), 2u);
    EXPECT_EQ(ts.normal_runs.size(), 5u);
    EXPECT_DOUBLE_EQ(ts.pairs[0].time_old_ms, 100);
    EXPECT_DOUBLE_EQ(ts.pairs[0].time_new_ms, 125);
}

TEST(TrainingSets, NoReducedRuns) {
    const auto& ts = build_training_sets({record("t", "p1", 100, FreqMode::Normal)}).at("t");
    EXPECT_TRUE(ts.pairs.empty());
}

TEST(TrainingSets, RejectsMultipleNodesAndDuplicates) {
    auto a = record("t", "p1", 100, FreqMode::Normal);
    auto b = a;
    b.node = "other";
    EXPECT_THROW(build_training_sets({a, b}), ValidationError);
    EXPECT_THROW(build_training_sets({a, a}), ValidationError);
}
