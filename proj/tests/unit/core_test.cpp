#include <atomic>
#include <sstream>

#include <gtest/gtest.h>

#include "streetcrime/core/csv.hpp"
#include "streetcrime/core/error.hpp"
#include "streetcrime/core/io.hpp"
#include "streetcrime/core/numfmt.hpp"
#include "streetcrime/core/parallel.hpp"
#include "streetcrime/core/random.hpp"
#include "streetcrime/core/table.hpp"
#include "test_support.hpp"

using namespace streetcrime;

TEST(SplitMix64, ReferenceSequence) {
    // Published output of the reference C implementation for seed 1234567.
    SplitMix64 g(1234567);
    EXPECT_EQ(g(), 6457827717110365317ULL);
    EXPECT_EQ(g(), 3203168211198807973ULL);
    EXPECT_EQ(g(), 9817491932198370423ULL);
    EXPECT_EQ(g(), 4593380528125082431ULL);
    EXPECT_EQ(g(), 16408922859458223821ULL);
}

TEST(SplitMix64, Fnv1a) {
    EXPECT_EQ(fnv1a64(""), 0xCBF29CE484222325ULL);
    EXPECT_EQ(fnv1a64("hello"), 0xA430D84680AABD0BULL);
}

TEST(SplitMix64, BoundedDrawsStayInRange) {
    SplitMix64 g(9);
    std::vector<int> hist(7, 0);
    for (int i = 0; i < 70000; ++i) ++hist[static_cast<std::size_t>(g.uniform_below(7))];
    for (int h : hist) EXPECT_NEAR(h, 10000, 500);
    for (int i = 0; i < 1000; ++i) {
        const double u = g.uniform01();
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
}

TEST(SplitMix64, DerivedSeedsDependOnKeyOnly) {
    EXPECT_EQ(derive_seed(5, "101"), derive_seed(5, "101"));
    EXPECT_NE(derive_seed(5, "101"), derive_seed(5, "102"));
    EXPECT_NE(derive_seed(5, "101"), derive_seed(6, "101"));
    EXPECT_NE(derive_seed(0, std::uint64_t{0}), derive_seed(0, std::uint64_t{1}));
}

TEST(Parallel, EverySlotOnceAndErrorsPropagate) {
    for (std::size_t threads : {1u, 3u, 8u}) {
        std::vector<std::atomic<int>> hits(1000);
        parallel_for(hits.size(), threads, [&](std::size_t i) { hits[i]++; });
        for (auto& h : hits) EXPECT_EQ(h.load(), 1);
        EXPECT_THROW(parallel_for(50, threads,
                                  [](std::size_t i) {
                                      if (i == 17) throw ValidationError("boom");
                                  }),
                     ValidationError);
    }
    parallel_for(0, 4, [](std::size_t) { FAIL(); });
}

TEST(Csv, QuotingRoundTrip) {
    const std::vector<std::string> row{"plain", "with,comma", "with \"quote\"", "two\nlines", ""};
    std::stringstream ss;
    csv::write_record(ss, row);
    csv::write_record(ss, {"x"});
    std::vector<std::string> back;
    ASSERT_TRUE(csv::read_record(ss, back));
    EXPECT_EQ(back, row);
    ASSERT_TRUE(csv::read_record(ss, back));
    EXPECT_EQ(back, std::vector<std::string>{"x"});
    EXPECT_FALSE(csv::read_record(ss, back));
}

TEST(Csv, CrlfAndBom) {
    std::istringstream in("\xEF\xBB\xBF" "a,b\r\n1,2\r\n");
    std::vector<std::string> f;
    ASSERT_TRUE(csv::read_record(in, f));
    csv::strip_bom(f);
    EXPECT_EQ(f, (std::vector<std::string>{"a", "b"}));
    ASSERT_TRUE(csv::read_record(in, f));
    EXPECT_EQ(f, (std::vector<std::string>{"1", "2"}));
}

TEST(NumFmt, ShortestRoundTrip) {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -0.0140912}) {
        const auto s = format_double(v);
        EXPECT_EQ(*parse_double(s), v) << s;
    }
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_fixed(0.014085, 5), "0.01409");  // binary value sits just above the tie
    EXPECT_EQ(format_sig(0.74852879123, 8), "0.74852879");
}

TEST(NumFmt, ParsingIsStrict) {
    EXPECT_FALSE(parse_double(""));
    EXPECT_FALSE(parse_double("1.5x"));
    EXPECT_FALSE(parse_double("nan"));
    EXPECT_FALSE(parse_double("inf"));
    EXPECT_EQ(*parse_double(" +2.5 "), 2.5);
    EXPECT_EQ(*parse_integer<int>("42"), 42);
    EXPECT_FALSE(parse_integer<unsigned>("-1"));
    EXPECT_FALSE(parse_integer<int>("4.2"));
}

TEST(Io, AtomicWriteReplacesWholeFile) {
    testing_support::TempDir dir("io");
    const auto p = dir / "out.txt";
    io::write_file_atomic(p, "first version, long\n");
    io::write_file_atomic(p, "second\n");
    EXPECT_EQ(io::read_file(p), "second\n");
    EXPECT_FALSE(std::filesystem::exists(p.string() + ".tmp"));
    EXPECT_THROW(io::read_file(dir / "missing.txt"), Error);
}

TEST(Table, AlignsColumns) {
    std::ostringstream out;
    write_aligned(out, {{"Class", "Importance"}, {"Aeroplane", "0.5"}, {"Cat", "0.25"}}, 1);
    EXPECT_EQ(out.str(), "Class      Importance\nAeroplane         0.5\nCat              0.25\n");
}
