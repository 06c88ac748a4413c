#include "mtfest/cli.hpp"
#include "mtfest/image.hpp"
#include "mtfest/report.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

using namespace mtfest;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("mtfest_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }

    int mtf(std::initializer_list<std::string> args) {
        std::vector<std::string> storage{"mtf"};
        storage.insert(storage.end(), args.begin(), args.end());
        std::vector<const char*> argv;
        for (const auto& s : storage) {
            argv.push_back(s.c_str());
        }
        out_.str("");
        err_.str("");
        return run_cli(static_cast<int>(argv.size()), argv.data(), out_, err_);
    }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    static std::string read(const fs::path& p) {
        std::ifstream f(p, std::ios::binary);
        return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
    }

    fs::path dir_;
    std::ostringstream out_;
    std::ostringstream err_;
};

std::string manifest_value(const CsvDocument& doc, const std::string& key) {
    for (const auto& [k, v] : doc.manifest) {
        if (k == key) {
            return v;
        }
    }
    return {};
}

} // namespace

TEST(ExitCodes, Mapping) {
    EXPECT_EQ(exit_code(ErrorCode::InvalidSpec), 1);
    EXPECT_EQ(exit_code(ErrorCode::MissingHint), 1);
    EXPECT_EQ(exit_code(ErrorCode::NoLinearRegion), 2);
    EXPECT_EQ(exit_code(ErrorCode::NoEdgeFound), 2);
    EXPECT_EQ(exit_code(ErrorCode::PoorFit), 3);
    EXPECT_EQ(exit_code(ErrorCode::ImageTooSmall), 4);
    EXPECT_EQ(exit_code(ErrorCode::CorruptFile), 4);
}

TEST_F(Cli, HelpAndVersion) {
    EXPECT_EQ(mtf({"--help"}), 0);
    EXPECT_NE(out_.str().find("estimate"), std::string::npos);
    EXPECT_EQ(mtf({"--version"}), 0);
    EXPECT_NE(out_.str().find(kToolVersion), std::string::npos);
    EXPECT_EQ(mtf({}), 1);
    EXPECT_EQ(mtf({"estimate"}), 1);
}

TEST_F(Cli, SynthThenEstimateGaussian) {
    ASSERT_EQ(mtf({"synth", "--psf", "gaussian:6", "--width", "256", "--height", "256", "--seed",
                   "3", "-o", path("g6.png")}),
              0)
        << err_.str();
    ASSERT_EQ(mtf({"estimate", "-i", path("g6.png"), "--pixel-size", "0.5", "--out-dir",
                   dir_.string()}),
              0) << err_.str();
    const CsvDocument doc = load_csv(dir_ / "g6_estimate.csv");
    EXPECT_EQ(manifest_value(doc, "tool"), std::string("mtf ") + kToolVersion);
    const CsvSection* est = doc.find("estimate");
    ASSERT_NE(est, nullptr);
    EXPECT_NEAR(est->number(0, "fwhm"), 6.0, 0.6);
    const CsvSection* summary = doc.find("summary");
    ASSERT_NE(summary, nullptr);
    EXPECT_NEAR(*summary->lookup("fwhm_length"), 0.5 * est->number(0, "fwhm"), 1e-6);
    EXPECT_EQ(*summary->lookup("transform_width"), *summary->lookup("transform_height"));
}

TEST_F(Cli, CompareApertureWithinTolerance) {
    ASSERT_EQ(mtf({"synth", "--psf", "aperture:2", "--seed", "1", "-o", path("a2.png")}), 0)
        << err_.str();
    ASSERT_EQ(mtf({"compare", "-i", path("a2.png"), "--psf", "aperture:2", "--strategy", "airy",
                   "--out-dir", dir_.string()}),
              0)
        << err_.str();
    const CsvDocument doc = load_csv(dir_ / "a2_compare.csv");
    const CsvSection* summary = doc.find("summary");
    ASSERT_NE(summary, nullptr);
    EXPECT_LE(*summary->lookup("max_abs_diff"), 0.1);
    const CsvSection* curves = doc.find("curves");
    ASSERT_NE(curves, nullptr);
    EXPECT_EQ(curves->rows.size(), 101u);
    EXPECT_EQ(curves->number(0, "predicted"), 1.0);
}

TEST_F(Cli, EdgeCommand) {
    ASSERT_EQ(mtf({"synth", "--target", "edge", "--psf", "gaussian:4", "--width", "96", "--height",
                   "96", "-o", path("edge.png")}),
              0)
        << err_.str();
    ASSERT_EQ(mtf({"edge", "-i", path("edge.png"), "--roi", "8,8,80,80", "--out-dir", dir_.string()}),
              0) << err_.str();
    const CsvDocument doc = load_csv(dir_ / "edge_edge.csv");
    for (const char* name : {"profile", "lsf", "mtf", "summary"}) {
        EXPECT_NE(doc.find(name), nullptr) << name;
    }
    EXPECT_NEAR(*doc.find("summary")->lookup("fwhm"), 4.0, 0.4);
}

TEST_F(Cli, ProfileCommandWritesUnnamedSection) {
    ASSERT_EQ(mtf({"synth", "--psf", "gaussian:4", "--width", "128", "--height", "128", "-o",
                   path("t.png")}), 0);
    ASSERT_EQ(mtf({"profile", "-i", path("t.png"), "-o", path("p.csv")}), 0) << err_.str();
    const CsvDocument doc = load_csv(dir_ / "p.csv");
    ASSERT_EQ(doc.sections.size(), 1u);
    EXPECT_EQ(doc.sections[0].name, "");
    EXPECT_EQ(doc.sections[0].header,
              (std::vector<std::string>{"k2", "mean_log_power", "count"}));
}

TEST_F(Cli, BarsWriteContrastTable) {
    ASSERT_EQ(mtf({"synth", "--target", "bars", "--psf", "gaussian:3.815", "--pixel-size",
                   "0.262", "-o", path("bars.png")}),
              0)
        << err_.str();
    const CsvDocument doc = load_csv(dir_ / "bars.csv");
    const CsvSection* bands = doc.find("bands");
    ASSERT_NE(bands, nullptr);
    EXPECT_EQ(bands->rows.size(), 6u);
    EXPECT_GT(bands->number(0, "contrast"), bands->number(5, "contrast"));
}

TEST_F(Cli, OutputsAreDeterministic) {
    ASSERT_EQ(mtf({"synth", "--psf", "gaussian:5", "--width", "128", "--height", "128", "--noise",
                   "20", "--seed", "9", "-o", path("a.png")}),
              0);
    ASSERT_EQ(mtf({"synth", "--psf", "gaussian:5", "--width", "128", "--height", "128", "--noise",
                   "20", "--seed", "9", "-o", path("b.png")}),
              0);
    EXPECT_EQ(read(dir_ / "a.png"), read(dir_ / "b.png"));
    ASSERT_EQ(mtf({"estimate", "-i", path("a.png"), "-o", path("1.csv")}), 0) << err_.str();
    ASSERT_EQ(mtf({"estimate", "-i", path("a.png"), "-o", path("2.csv")}), 0);
    const std::string first = read(dir_ / "1.csv");
    EXPECT_EQ(first, read(dir_ / "2.csv"));
    EXPECT_EQ(to_csv(load_csv(dir_ / "1.csv")), first);
}

TEST_F(Cli, OutputDirectoryFromEnvironment) {
    ASSERT_EQ(mtf({"synth", "--psf", "gaussian:4", "--width", "128", "--height", "128", "-o",
                   path("t.png")}), 0);
    const fs::path outdir = dir_ / "env_out";
    fs::create_directories(outdir);
    ::setenv(kOutputDirEnv, outdir.c_str(), 1);
    const int code = mtf({"estimate", "-i", path("t.png")});
    ::unsetenv(kOutputDirEnv);
    ASSERT_EQ(code, 0) << err_.str();
    EXPECT_TRUE(fs::exists(outdir / "t_estimate.csv"));
}

TEST_F(Cli, BatchWithJobs) {
    for (const char* name : {"a", "b", "c"}) {
        ASSERT_EQ(mtf({"synth", "--psf", "gaussian:4", "--width", "128", "--height", "128",
                       "-o", path(std::string(name) + ".png")}),
                  0);
    }
    ASSERT_EQ(mtf({"estimate", "-j", "3", "-i", path("a.png"), path("b.png"), path("c.png"),
                   "--out-dir", path("out")}),
              4)
        << "missing output directory";
    fs::create_directories(dir_ / "out");
    ASSERT_EQ(mtf({"estimate", "-j", "3", "-i", path("a.png"), path("b.png"), path("c.png"),
                   "--out-dir", path("out")}),
              0)
        << err_.str();
    for (const char* name : {"a", "b", "c"}) {
        EXPECT_TRUE(fs::exists(dir_ / "out" / (std::string(name) + "_estimate.csv")));
    }
    EXPECT_EQ(mtf({"estimate", "-i", path("a.png"), path("b.png"), "-o", path("x.csv")}), 1);
}

TEST_F(Cli, ErrorExitCodes) {
    // Too small to transform.
    save_image(GrayImage(32, 32, 100.0), dir_ / "small.pgm");
    EXPECT_EQ(mtf({"estimate", "-i", path("small.pgm")}), 4);
    EXPECT_NE(err_.str().find("small.pgm"), std::string::npos);

    EXPECT_EQ(mtf({"estimate", "-i", path("missing.png")}), 4);

    ASSERT_EQ(mtf({"synth", "--psf", "gaussian:4", "--width", "128", "--height", "128", "-o",
                   path("t.png")}), 0);
    EXPECT_EQ(mtf({"estimate", "-i", path("t.png"), "--strategy", "airy"}), 1);
    EXPECT_EQ(mtf({"estimate", "-i", path("t.png"), "--strategy", "bogus"}), 1);
    EXPECT_EQ(mtf({"estimate", "-i", path("t.png"), "--roi", "100,100,64,64"}), 1);
    EXPECT_EQ(mtf({"synth", "--psf", "blob:2", "-o", path("x.png")}), 1);
    EXPECT_EQ(mtf({"estimate", "-i", path("t.png"), "--bin", "0"}), 1);

    // Flat image has no spectrum to fit.
    save_image(GrayImage(128, 128, 100.0), dir_ / "flat.pgm");
    EXPECT_EQ(mtf({"estimate", "-i", path("flat.pgm")}), 2);
    EXPECT_EQ(mtf({"edge", "-i", path("flat.pgm")}), 2);
}
