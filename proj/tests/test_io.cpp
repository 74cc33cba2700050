#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "masksplitter/pgm_io.hpp"
#include "test_util.hpp"

using namespace masksplitter;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("ms_io_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_bytes(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("gray image round trip") {
    TempDir dir;
    msut::TestRng rng(8);
    GrayImage img(13, 7);
    for (auto& v : img.intensities) v = static_cast<std::uint8_t>(rng.range(0, 255));
    write_pgm(dir.file("img.pgm"), img);
    const GrayImage back = read_pgm_gray(dir.file("img.pgm"));
    CHECK(back.width == img.width);
    CHECK(back.height == img.height);
    CHECK(back.intensities == img.intensities);
}

TEST_CASE("mask and label round trips") {
    TempDir dir;
    msut::TestRng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        BinaryMask m(rng.range(1, 10), rng.range(1, 10));
        for (auto& v : m.data) v = rng.u01() < 0.4 ? 1 : 0;
        write_pgm(dir.file("m.pgm"), m);
        CHECK(read_pgm_mask(dir.file("m.pgm")).data == m.data);

        const LabelMap lm = connected_components(m);
        write_pgm(dir.file("l.pgm"), lm);
        const LabelMap back = read_pgm_labels(dir.file("l.pgm"));
        CHECK(back.labels == lm.labels);
        CHECK(back.count == lm.count);
    }
}

TEST_CASE("16-bit label payload with sparse ids is relabeled contiguously") {
    TempDir dir;
    // 3x1, values 0,1,2 big-endian under maxval 65535
    write_bytes(dir.file("l.pgm"), std::string("P5\n3 1\n65535\n") +
                                       std::string("\x00\x00\x00\x01\x00\x02", 6));
    const LabelMap lm = read_pgm_labels(dir.file("l.pgm"));
    CHECK(lm.count == 2);
    CHECK(lm.labels == std::vector<int>{0, 1, 2});

    // non-contiguous ids collapse in order of first appearance
    write_bytes(dir.file("l2.pgm"), std::string("P5\n3 1\n65535\n") +
                                        std::string("\x00\x09\x00\x00\x00\x02", 6));
    const LabelMap lm2 = read_pgm_labels(dir.file("l2.pgm"));
    CHECK(lm2.count == 2);
    CHECK(lm2.labels == std::vector<int>{1, 0, 2});
}

TEST_CASE("malformed PGM inputs") {
    TempDir dir;
    write_bytes(dir.file("ascii.pgm"), "P2\n2 2\n255\n0 1 2 3\n");
    CHECK_THROWS_WITH_AS(read_pgm_gray(dir.file("ascii.pgm")),
                         doctest::Contains("unsupported format"), std::runtime_error);

    write_bytes(dir.file("trunc.pgm"), std::string("P5\n4 4\n255\n") + "abc");
    CHECK_THROWS_WITH_AS(read_pgm_mask(dir.file("trunc.pgm")),
                         doctest::Contains("truncated"), std::runtime_error);

    write_bytes(dir.file("badmax.pgm"), "P5\n2 2\n1023\nxxxxxxxx");
    CHECK_THROWS_WITH_AS(read_pgm_gray(dir.file("badmax.pgm")),
                         doctest::Contains("maxval"), std::runtime_error);

    CHECK_THROWS_AS(read_pgm_gray(dir.file("missing.pgm")), std::runtime_error);
}

TEST_CASE("manifest parsing") {
    TempDir dir;
    {
        std::ofstream out(dir.file("m.csv"));
        out << "# comment line\n";
        out << "img1.pgm,pred1.pgm,gt1.pgm\n";
        out << "img2.pgm,pred2.pgm,gt2.pgm,scores2.txt\n";
    }
    const auto records = read_manifest(dir.file("m.csv"));
    REQUIRE(records.size() == 2);
    CHECK(records[0].image_path == "img1.pgm");
    CHECK(records[0].score_path.empty());
    CHECK(records[1].score_path == "scores2.txt");

    {
        std::ofstream out(dir.file("dup.csv"));
        out << "a.pgm,p.pgm,g.pgm\na.pgm,p2.pgm,g2.pgm\n";
    }
    CHECK_THROWS_WITH_AS(read_manifest(dir.file("dup.csv")), doctest::Contains("duplicate"),
                         std::runtime_error);

    {
        std::ofstream out(dir.file("short.csv"));
        out << "a.pgm,p.pgm\n";
    }
    CHECK_THROWS_AS(read_manifest(dir.file("short.csv")), std::runtime_error);
}

TEST_CASE("score files") {
    TempDir dir;
    write_bytes(dir.file("s.txt"), "0.5\n0.25\n1\n");
    CHECK(read_score_file(dir.file("s.txt")) == std::vector<double>{0.5, 0.25, 1.0});
}
