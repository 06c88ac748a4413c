#pragma once

#include "mtfest/error.hpp"
#include "mtfest/gaussian_mtf.hpp"
#include "mtfest/kernel_lab.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mtfest {

inline constexpr const char* kToolVersion = "1.0.0";

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "MTF_OUTPUT_DIR";

enum class Command { Synth, Estimate, Edge, Compare, Profile };

enum class SynthTarget { Texture, Edge, Bars };

struct RunConfig {
    Command command = Command::Estimate;
    std::vector<std::filesystem::path> inputs;
    std::optional<std::filesystem::path> output;     // single input only
    std::optional<std::filesystem::path> output_dir; // falls back to $MTF_OUTPUT_DIR, then "."
    int jobs = 1;

    std::optional<double> pixel_size;

    // estimate / profile / compare
    EstimateOptions estimate;

    // edge, and the optional edge curve of compare
    std::optional<Rect> edge_roi;
    int oversample = 4;
    std::optional<double> smoothing;
    std::optional<std::filesystem::path> edge_input;

    // synth, and the predicted curve of compare
    std::optional<PsfSpec> psf;
    int subdiv = 4;
    SynthTarget target = SynthTarget::Texture;
    int width = 512;
    int height = 512;
    std::uint64_t seed = 0;
    double noise = 0.0;
    double edge_angle = 5.0;
    std::vector<double> pitches{2.0, 1.6, 1.2, 1.0, 0.8, 0.6};
    std::optional<std::filesystem::path> kernel_output;
};

/// Process exit status for a library error: 1 configuration, 2 no usable
/// fit or edge, 3 poor fit, 4 input/output.
int exit_code(ErrorCode code) noexcept;

struct ParseResult {
    std::optional<RunConfig> config; // empty when the process should exit
    int exit_code = 0;
};

/// Parses the command line. Help requests and usage errors are reported on
/// `out` / `err` and leave config empty.
ParseResult parse_args(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Executes a parsed configuration; returns the process exit status.
int run(const RunConfig& config, std::ostream& err);

/// parse_args + run.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace mtfest
