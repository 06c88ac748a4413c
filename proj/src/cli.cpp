#include "mtfest/cli.hpp"

#include "mtfest/edge_mtf.hpp"
#include "mtfest/image.hpp"
#include "mtfest/report.hpp"
#include "mtfest/spectrum.hpp"

#include <CLI11.hpp>
#include <fftw3.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

namespace mtfest {

namespace fs = std::filesystem;

namespace {

constexpr double kDegree = std::numbers::pi / 180.0;

Error config_error(const std::string& msg) { return Error(ErrorCode::InvalidArgument, msg); }

std::vector<double> parse_list(const std::string& text, std::size_t expected,
                               const char* what) {
    std::vector<double> out;
    std::istringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        char* end = nullptr;
        const double v = std::strtod(cell.c_str(), &end);
        if (cell.empty() || end != cell.c_str() + cell.size() || !std::isfinite(v)) {
            throw config_error(std::string(what) + ": '" + cell + "' is not a number");
        }
        out.push_back(v);
    }
    if (expected != 0 && out.size() != expected) {
        throw config_error(std::string(what) + " needs " + std::to_string(expected) +
                           " comma-separated values, got '" + text + "'");
    }
    return out;
}

Rect parse_rect(const std::string& text, const char* what) {
    const auto v = parse_list(text, 4, what);
    for (double x : v) {
        if (x != std::floor(x)) {
            throw config_error(std::string(what) + " must be integers");
        }
    }
    return {static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2]),
            static_cast<int>(v[3])};
}

const char* command_name(Command c) {
    switch (c) {
    case Command::Synth: return "synth";
    case Command::Estimate: return "estimate";
    case Command::Edge: return "edge";
    case Command::Compare: return "compare";
    case Command::Profile: return "profile";
    }
    return "unknown";
}

const char* target_name(SynthTarget t) {
    switch (t) {
    case SynthTarget::Texture: return "texture";
    case SynthTarget::Edge: return "edge";
    case SynthTarget::Bars: return "bars";
    }
    return "unknown";
}

std::string psf_text(const PsfSpec& p) {
    return std::string(p.kind == PsfSpec::Kind::CircularAperture ? "aperture:" : "gaussian:") +
           format_number(p.size);
}

std::string rect_text(const Rect& r) {
    return std::to_string(r.x0) + "," + std::to_string(r.y0) + "," + std::to_string(r.w) + "," +
           std::to_string(r.h);
}

// Command-line strings before validation.
struct RawOptions {
    std::vector<std::string> inputs;
    std::string out;
    std::string out_dir;
    int jobs = 1;
    double pixel_size = 0.0;
    std::string roi;
    std::string strategy = "kink";
    double lobe_fraction = 0.8;
    std::string lobe_axis = "k";
    int bin = 5;
    int ramp = 16;
    int margin = -1;
    std::string sector;
    bool allow_poor_fit = false;
    double min_r2 = 0.9;
    bool uniform_weights = false;
    std::string edge_roi;
    std::string edge_in;
    int oversample = 4;
    double smooth = 0.0;
    std::string psf;
    int subdiv = 4;
    std::string target = "texture";
    int width = 512;
    int height = 512;
    std::uint64_t seed = 0;
    double noise = 0.0;
    double angle = 5.0;
    std::string pitches;
    std::string kernel_out;
};

void add_output_options(CLI::App* cmd, RawOptions& raw) {
    cmd->add_option("-o,--out", raw.out, "Output file");
    cmd->add_option("--out-dir", raw.out_dir,
                    std::string("Output directory when --out is not given (default: $") +
                        kOutputDirEnv + ", then the working directory)");
}

void add_input_options(CLI::App* cmd, RawOptions& raw, bool batch) {
    auto* in = cmd->add_option("-i,--in", raw.inputs, "Input image (PGM, PPM or PNG)")->required();
    if (batch) {
        in->description("Input images (PGM, PPM or PNG); several are processed as a batch");
        cmd->add_option("-j,--jobs", raw.jobs, "Inputs processed in parallel")
            ->check(CLI::PositiveNumber);
    } else {
        in->expected(1);
    }
    cmd->add_option("--pixel-size", raw.pixel_size, "Physical length of one pixel")
        ->check(CLI::PositiveNumber);
    add_output_options(cmd, raw);
}

void add_spectrum_options(CLI::App* cmd, RawOptions& raw) {
    cmd->add_option("--roi", raw.roi, "Region of interest x,y,w,h");
    cmd->add_option("--bin", raw.bin, "Annulus width in spectral pixels")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--ramp", raw.ramp, "Width of the border blended toward the mean")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--margin", raw.margin,
                    "Mean-filled margin in pixels (default: pad to the next power of two "
                    "at or above 1.25x the larger side)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--sector", raw.sector,
                    "Directional profile: center,half_width in degrees");
}

void add_fit_options(CLI::App* cmd, RawOptions& raw) {
    cmd->add_option("--strategy", raw.strategy,
                    "Fit region: kink | airy[:RADIUS] | explicit:K2MIN,K2MAX");
    cmd->add_option("--lobe-fraction", raw.lobe_fraction,
                    "Fraction of the first aperture zero used by the airy strategy")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--lobe-axis", raw.lobe_axis,
                    "Axis the lobe fraction applies to: k (frequency) or k2 (squared)")
        ->check(CLI::IsMember({"k", "k2"}));
    cmd->add_option("--min-r2", raw.min_r2, "Minimum r2 of the logarithmic fit")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_flag("--allow-poor-fit", raw.allow_poor_fit,
                  "Report fits below --min-r2 instead of failing");
    cmd->add_flag("--uniform-weights", raw.uniform_weights,
                  "Weight profile bins equally instead of by sample count");
}

RegionOptions region_options(const RawOptions& raw, const std::optional<PsfSpec>& psf) {
    RegionOptions r;
    r.lobe_fraction = raw.lobe_fraction;
    r.lobe_axis = raw.lobe_axis == "k2" ? LobeAxis::SquaredFrequency : LobeAxis::Frequency;
    const std::string& s = raw.strategy;
    if (s == "kink") {
        r.strategy = FitStrategy::KinkDetection;
    } else if (s == "airy" || s.rfind("airy:", 0) == 0) {
        r.strategy = FitStrategy::AiryLobeFraction;
        if (s.size() > 5) {
            r.hint = PsfSpec::aperture(parse_list(s.substr(5), 1, "airy radius")[0]);
        } else if (psf && psf->kind == PsfSpec::Kind::CircularAperture) {
            r.hint = psf;
        } else {
            throw Error(ErrorCode::MissingHint,
                        "airy strategy needs a radius: --strategy airy:R or --psf aperture:R");
        }
        if (!(r.hint->size > 0.0)) {
            throw config_error("airy radius must be positive");
        }
    } else if (s.rfind("explicit:", 0) == 0) {
        const auto v = parse_list(s.substr(9), 2, "explicit region");
        r.strategy = FitStrategy::Explicit;
        r.k2_min = v[0];
        r.k2_max = v[1];
        if (!(r.k2_min >= 0.0 && r.k2_min < r.k2_max)) {
            throw config_error("explicit region needs 0 <= K2MIN < K2MAX");
        }
    } else {
        throw config_error("unknown strategy '" + s + "'");
    }
    return r;
}

RunConfig build_config(Command command, const RawOptions& raw, const CLI::App& cmd) {
    RunConfig c;
    c.command = command;
    for (const auto& in : raw.inputs) {
        c.inputs.emplace_back(in);
    }
    if (!raw.out.empty()) {
        c.output = raw.out;
    }
    if (!raw.out_dir.empty()) {
        c.output_dir = raw.out_dir;
    }
    if (c.output && c.inputs.size() > 1) {
        throw config_error("--out names a single file; use --out-dir for several inputs");
    }
    c.jobs = raw.jobs;
    if (cmd.count("--pixel-size")) {
        c.pixel_size = raw.pixel_size;
    }
    if (!raw.psf.empty()) {
        c.psf = parse_psf_spec(raw.psf);
    }
    c.subdiv = raw.subdiv;

    EstimateOptions& e = c.estimate;
    if (command == Command::Edge) {
        if (!raw.roi.empty()) {
            c.edge_roi = parse_rect(raw.roi, "--roi");
        }
    } else if (!raw.roi.empty()) {
        e.roi = parse_rect(raw.roi, "--roi");
    }
    e.bin_width = raw.bin;
    e.ramp = raw.ramp;
    if (raw.margin >= 0) {
        e.margin = raw.margin;
    }
    if (!raw.sector.empty()) {
        const auto v = parse_list(raw.sector, 2, "--sector");
        if (!(v[1] > 0.0 && v[1] <= 90.0)) {
            throw config_error("sector half width must lie in (0, 90] degrees");
        }
        e.sector = Sector{v[0] * kDegree, v[1] * kDegree};
    }
    if (command == Command::Estimate || command == Command::Compare) {
        e.region = region_options(raw, c.psf);
    }
    e.fit.min_r2 = raw.min_r2;
    e.fit.allow_poor_fit = raw.allow_poor_fit;
    e.fit.weighting = raw.uniform_weights ? Weighting::Uniform : Weighting::SampleCount;

    c.oversample = raw.oversample;
    if (raw.smooth > 0.0) {
        c.smoothing = raw.smooth;
    }
    if (!raw.edge_in.empty()) {
        c.edge_input = raw.edge_in;
        if (raw.edge_roi.empty()) {
            throw config_error("--edge-in needs --edge-roi");
        }
    }
    if (!raw.edge_roi.empty()) {
        c.edge_roi = parse_rect(raw.edge_roi, "--edge-roi");
    }

    if (command == Command::Compare && !c.psf) {
        throw config_error("compare needs --psf for the predicted curve");
    }

    if (raw.target == "texture") {
        c.target = SynthTarget::Texture;
    } else if (raw.target == "edge") {
        c.target = SynthTarget::Edge;
    } else if (raw.target == "bars") {
        c.target = SynthTarget::Bars;
    } else {
        throw config_error("unknown synth target '" + raw.target + "'");
    }
    if (command == Command::Synth && c.target == SynthTarget::Bars && !c.pixel_size) {
        throw config_error("bars need --pixel-size to convert pitches to pixels");
    }
    c.width = raw.width;
    c.height = raw.height;
    c.seed = raw.seed;
    c.noise = raw.noise;
    c.edge_angle = raw.angle;
    if (!raw.pitches.empty()) {
        c.pitches = parse_list(raw.pitches, 0, "--pitches");
    }
    if (!raw.kernel_out.empty()) {
        if (!c.psf) {
            throw config_error("--kernel-out needs --psf");
        }
        c.kernel_output = raw.kernel_out;
    }
    return c;
}

// ---------------------------------------------------------------------------

fs::path output_directory(const RunConfig& c) {
    if (c.output_dir) {
        return *c.output_dir;
    }
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) {
        return env;
    }
    return ".";
}

fs::path output_path(const RunConfig& c, const fs::path& input) {
    if (c.output) {
        return *c.output;
    }
    return output_directory(c) /
           (input.stem().string() + "_" + command_name(c.command) + ".csv");
}

std::vector<std::pair<std::string, std::string>> manifest(const RunConfig& c,
                                                          const fs::path& input) {
    std::vector<std::pair<std::string, std::string>> m{
        {"tool", std::string("mtf ") + kToolVersion},
        {"fftw", fftw_version},
        {"command", command_name(c.command)},
    };
    if (!input.empty()) {
        m.emplace_back("input", input.generic_string());
    }
    if (c.pixel_size) {
        m.emplace_back("pixel_size", format_number(*c.pixel_size));
    }
    const EstimateOptions& e = c.estimate;
    switch (c.command) {
    case Command::Estimate:
    case Command::Compare:
        m.emplace_back("strategy", std::string(to_string(e.region.strategy)));
        if (e.region.hint) {
            m.emplace_back("airy_radius", format_number(e.region.hint->size));
            m.emplace_back("lobe_fraction", format_number(e.region.lobe_fraction));
            m.emplace_back("lobe_axis",
                           e.region.lobe_axis == LobeAxis::SquaredFrequency ? "k2" : "k");
        }
        if (e.region.strategy == FitStrategy::Explicit) {
            m.emplace_back("k2_range",
                           format_number(e.region.k2_min) + "," + format_number(e.region.k2_max));
        }
        m.emplace_back("weighting",
                       e.fit.weighting == Weighting::SampleCount ? "sample_count" : "uniform");
        m.emplace_back("min_r2", format_number(e.fit.min_r2));
        [[fallthrough]];
    case Command::Profile:
        if (e.roi) {
            m.emplace_back("roi", rect_text(*e.roi));
        }
        m.emplace_back("bin_width", std::to_string(e.bin_width));
        m.emplace_back("ramp", std::to_string(e.ramp));
        m.emplace_back("margin", e.margin ? std::to_string(*e.margin) : "auto");
        if (e.sector) {
            m.emplace_back("sector_deg", format_number(e.sector->center_angle / kDegree) + "," +
                                             format_number(e.sector->half_width / kDegree));
        }
        break;
    case Command::Edge:
    case Command::Synth:
        break;
    }
    if (c.command == Command::Edge || (c.command == Command::Compare && c.edge_input)) {
        if (c.edge_input) {
            m.emplace_back("edge_input", c.edge_input->generic_string());
        }
        if (c.edge_roi) {
            m.emplace_back("edge_roi", rect_text(*c.edge_roi));
        }
        m.emplace_back("oversample", std::to_string(c.oversample));
        m.emplace_back("smoothing", c.smoothing ? format_number(*c.smoothing) : "0");
    }
    if (c.psf) {
        m.emplace_back("psf", psf_text(*c.psf));
        m.emplace_back("subdiv", std::to_string(c.subdiv));
    }
    if (c.command == Command::Synth) {
        m.emplace_back("target", target_name(c.target));
        m.emplace_back("size", std::to_string(c.width) + "x" + std::to_string(c.height));
        m.emplace_back("seed", std::to_string(c.seed));
        m.emplace_back("noise", format_number(c.noise));
    }
    return m;
}

GrayImage load_input(const fs::path& path, const RunConfig& c) {
    GrayImage img = load_image(path);
    if (c.pixel_size) {
        img.set_pixel_size(c.pixel_size);
    }
    return img;
}

struct EdgeResult {
    EdgeProfile profile;
    Lsf lsf;
    MtfCurve mtf;
};

EdgeResult run_edge_method(const GrayImage& img, const RunConfig& c) {
    const Rect roi = c.edge_roi.value_or(Rect{0, 0, img.width(), img.height()});
    EdgeResult r;
    r.profile = extract_edge_profile(img, roi, c.oversample);
    r.lsf = lsf_from_edge(r.profile, c.smoothing);
    r.mtf = mtf_from_lsf(r.lsf);
    return r;
}

CsvSection summary_section() { return {"summary", {"metric", "value"}, {}}; }

void add_metric(CsvSection& s, const std::string& key, double v) {
    s.rows.push_back({key, format_number(v)});
}

CsvDocument estimate_document(const RunConfig& c, const fs::path& input) {
    const GrayImage img = load_input(input, c);
    const MtfReport report = estimate_mtf(img, c.estimate);
    CsvDocument doc{manifest(c, input), estimate_sections(report)};
    CsvSection summary = summary_section();
    add_metric(summary, "transform_width", report.transform_width);
    add_metric(summary, "transform_height", report.transform_height);
    add_metric(summary, "fit_bins", static_cast<double>(report.estimate.region.bin_count()));
    add_metric(summary, "poor_fit", report.estimate.poor_fit ? 1.0 : 0.0);
    if (report.pixel_size) {
        add_metric(summary, "sigma_length", report.estimate.sigma * *report.pixel_size);
        add_metric(summary, "fwhm_length", report.estimate.fwhm * *report.pixel_size);
    }
    doc.sections.push_back(std::move(summary));
    return doc;
}

CsvDocument profile_document(const RunConfig& c, const fs::path& input) {
    const GrayImage img = load_input(input, c);
    const EstimateOptions& e = c.estimate;
    const GrayImage work = e.roi ? clip_roi(img, *e.roi) : img;
    const int margin = e.margin.value_or(default_margin(work.width(), work.height()));
    const LogPowerSpectrum spec = log_power_spectrum(prepare_for_fft(work, e.ramp, margin));
    const RadialProfile profile =
        e.sector ? sector_profile(spec, e.sector->center_angle, e.sector->half_width, e.bin_width)
                 : radial_profile(spec, e.bin_width);
    return {manifest(c, input), {profile_section(profile, "")}};
}

CsvDocument edge_document(const RunConfig& c, const fs::path& input) {
    const GrayImage img = load_input(input, c);
    const EdgeResult r = run_edge_method(img, c);
    CsvDocument doc{manifest(c, input), edge_sections(r.profile, r.lsf, r.mtf)};
    CsvSection summary = summary_section();
    add_metric(summary, "fwhm", r.lsf.fwhm);
    if (const auto len = r.lsf.fwhm_length()) {
        add_metric(summary, "fwhm_length", *len);
    }
    add_metric(summary, "angle_deg", r.profile.angle_deg);
    add_metric(summary, "smoothing", r.lsf.smoothing);
    if (const auto half = r.mtf.half_modulation_frequency()) {
        add_metric(summary, "half_modulation_k", *half);
    }
    doc.sections.push_back(std::move(summary));
    return doc;
}

CsvDocument compare_document(const RunConfig& c, const fs::path& input) {
    const GrayImage img = load_input(input, c);
    EstimateOptions opts = c.estimate;
    opts.freqs = frequency_grid(0.5, 101);
    const MtfReport report = estimate_mtf(img, opts);
    const MtfCurve predicted = predicted_mtf(*c.psf, opts.freqs, c.subdiv);
    const double k_hi = c.psf->kind == PsfSpec::Kind::CircularAperture
                            ? std::min(c.psf->first_zero_frequency(), 0.5)
                            : 0.5;

    std::optional<MtfCurve> edge;
    if (c.edge_input) {
        edge = run_edge_method(load_input(*c.edge_input, c), c).mtf;
    }

    CsvSection curves{"curves", {"k", "estimated", "m_low", "m_high", "predicted"}, {}};
    if (edge) {
        curves.header.emplace_back("edge");
    }
    for (std::size_t i = 0; i < opts.freqs.size(); ++i) {
        std::vector<double> row{opts.freqs[i], report.curve.samples[i].m,
                                report.curve.band[i].low, report.curve.band[i].high,
                                predicted.samples[i].m};
        if (edge) {
            row.push_back(edge->at(opts.freqs[i]));
        }
        curves.add_row(row);
    }

    CsvSection summary = summary_section();
    add_metric(summary, "max_abs_diff", max_abs_difference(report.curve, predicted, 0.0, k_hi));
    add_metric(summary, "k_max", k_hi);
    add_metric(summary, "sigma", report.estimate.sigma);
    add_metric(summary, "fwhm", report.estimate.fwhm);
    add_metric(summary, "r2", report.estimate.r2);
    if (edge) {
        const double edge_hi = edge->half_modulation_frequency().value_or(0.5);
        add_metric(summary, "max_abs_diff_edge",
                   max_abs_difference(report.curve, *edge, 0.0, std::min(edge_hi, 0.5)));
    }
    return {manifest(c, input), {std::move(curves), std::move(summary)}};
}

int run_synth(const RunConfig& c) {
    GrayImage img;
    std::vector<BarBand> bands;
    switch (c.target) {
    case SynthTarget::Texture:
        img = binned_noise_texture(c.width, c.height, c.seed);
        break;
    case SynthTarget::Edge:
        img = slanted_edge_image(c.width, c.height, c.edge_angle, 0.0, 10000.0, 50000.0, 8);
        break;
    case SynthTarget::Bars: {
        BarPatternLayout layout;
        layout.width = c.width;
        BarPattern p = square_wave_pattern(c.pitches, *c.pixel_size, 40000.0, layout);
        img = std::move(p.image);
        bands = std::move(p.bands);
        break;
    }
    }
    if (c.psf) {
        const Kernel k = make_kernel(*c.psf, c.subdiv);
        img = convolve_subpixel(img, k);
        if (c.kernel_output) {
            save_csv({manifest(c, {}), {kernel_section(k)}}, *c.kernel_output);
        }
    }
    if (c.noise > 0.0) {
        img = add_gaussian_noise(img, c.noise, c.seed + 1);
    }
    const fs::path out =
        c.output.value_or(output_directory(c) / (std::string("synth_") + target_name(c.target) + ".png"));
    save_image(img, out);

    if (!bands.empty()) {
        CsvSection s{"bands", {"x0", "y0", "w", "h", "pitch", "pitch_px", "contrast"}, {}};
        for (const auto& b : bands) {
            double contrast = std::nan("");
            try {
                contrast = pattern_contrast(img, b.rect, b.pitch_px);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::TooFewPeriods) {
                    throw;
                }
            }
            s.add_row({static_cast<double>(b.rect.x0), static_cast<double>(b.rect.y0),
                       static_cast<double>(b.rect.w), static_cast<double>(b.rect.h), b.pitch,
                       b.pitch_px, contrast});
        }
        fs::path csv = out;
        csv.replace_extension(".csv");
        save_csv({manifest(c, {}), {std::move(s)}}, csv);
    }
    return 0;
}

CsvDocument document_for(const RunConfig& c, const fs::path& input) {
    switch (c.command) {
    case Command::Estimate: return estimate_document(c, input);
    case Command::Edge: return edge_document(c, input);
    case Command::Compare: return compare_document(c, input);
    case Command::Profile: return profile_document(c, input);
    case Command::Synth: break;
    }
    throw config_error("synth produces no document");
}

int guarded(std::ostream& err, std::mutex& err_mutex, const std::string& context,
            const std::function<int()>& body) {
    try {
        return body();
    } catch (const Error& e) {
        std::lock_guard lock(err_mutex);
        err << "mtf: " << context << e.what() << '\n';
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::lock_guard lock(err_mutex);
        err << "mtf: " << context << e.what() << '\n';
        return 4;
    }
}

constexpr const char* kDescription =
    "Estimate the modulation transfer function of an imaging system from sample "
    "images by fitting a Gaussian point spread function to the logarithmic power "
    "spectrum, with a slanted-edge reference method.";

} // namespace

int exit_code(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::OutOfBounds:
    case ErrorCode::InvalidSpec:
    case ErrorCode::KernelTooLarge:
    case ErrorCode::InvalidPitch:
    case ErrorCode::TooFewPeriods:
    case ErrorCode::EmptySector:
    case ErrorCode::MissingHint:
        return 1;
    case ErrorCode::EmptyResult:
    case ErrorCode::NoLinearRegion:
    case ErrorCode::NonNegativeSlope:
    case ErrorCode::NoEdgeFound:
    case ErrorCode::EdgeTooAligned:
    case ErrorCode::NoPeak:
        return 2;
    case ErrorCode::PoorFit:
        return 3;
    case ErrorCode::UnsupportedFormat:
    case ErrorCode::CorruptFile:
    case ErrorCode::Io:
    case ErrorCode::ImageTooSmall:
        return 4;
    }
    return 1;
}

ParseResult parse_args(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{kDescription, "mtf"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);
    app.footer(std::string("Outputs are CSV with '# key: value' manifest lines and '#name' "
                           "section markers. Exit codes: 0 ok, 1 bad configuration, 2 no "
                           "linear region or edge, 3 poor fit, 4 input/output. $") +
               kOutputDirEnv + " sets the default output directory.");

    RawOptions raw;

    auto* synth = app.add_subcommand(
        "synth", "Render test images: binned-noise texture, slanted edge or square-wave bars, "
                 "optionally blurred with a PSF on a sub-pixel grid");
    synth->add_option("--target", raw.target, "texture | edge | bars");
    synth->add_option("--psf", raw.psf, "aperture:RADIUS or gaussian:FWHM, in pixels");
    synth->add_option("--subdiv", raw.subdiv, "Sub-pixel grid of the PSF convolution")
        ->check(CLI::PositiveNumber);
    synth->add_option("--width", raw.width, "Image width (bars: pattern width)")
        ->check(CLI::PositiveNumber);
    synth->add_option("--height", raw.height, "Image height (ignored for bars)")
        ->check(CLI::PositiveNumber);
    synth->add_option("--seed", raw.seed, "Seed for texture and noise");
    synth->add_option("--noise", raw.noise, "Additive Gaussian noise sigma")
        ->check(CLI::NonNegativeNumber);
    synth->add_option("--angle", raw.angle, "Edge slant from the vertical, degrees");
    synth->add_option("--pitches", raw.pitches,
                      "Bar pitches as a comma-separated list, physical units");
    synth->add_option("--pixel-size", raw.pixel_size, "Physical length of one pixel")
        ->check(CLI::PositiveNumber);
    synth->add_option("--kernel-out", raw.kernel_out, "Also write the rasterized PSF as CSV");
    add_output_options(synth, raw);

    auto* estimate = app.add_subcommand(
        "estimate", "Gaussian PSF and MTF from the logarithmic power spectrum of an image");
    add_input_options(estimate, raw, true);
    add_spectrum_options(estimate, raw);
    add_fit_options(estimate, raw);
    estimate->add_option("--psf", raw.psf, "aperture:RADIUS, supplies the airy strategy radius");

    auto* edge = app.add_subcommand(
        "edge", "Edge spread profile, line spread function and MTF from a slanted edge");
    add_input_options(edge, raw, true);
    edge->add_option("--roi", raw.roi, "Region holding a single edge x,y,w,h");
    edge->add_option("--oversample", raw.oversample, "Profile bins per pixel")
        ->check(CLI::PositiveNumber);
    edge->add_option("--smooth", raw.smooth, "Gaussian smoothing of the LSF, sigma in pixels")
        ->check(CLI::NonNegativeNumber);

    auto* compare = app.add_subcommand(
        "compare", "Overlay the estimated MTF, the predicted MTF of a known PSF and optionally "
                   "an edge-derived MTF; reports the maximum absolute difference");
    add_input_options(compare, raw, true);
    add_spectrum_options(compare, raw);
    add_fit_options(compare, raw);
    compare->add_option("--psf", raw.psf, "Known PSF, aperture:RADIUS or gaussian:FWHM")
        ->required();
    compare->add_option("--subdiv", raw.subdiv, "Sub-pixel grid of the predicted PSF")
        ->check(CLI::PositiveNumber);
    compare->add_option("--edge-in", raw.edge_in, "Image with a slanted edge");
    compare->add_option("--edge-roi", raw.edge_roi, "Edge region x,y,w,h");
    compare->add_option("--oversample", raw.oversample, "Edge profile bins per pixel")
        ->check(CLI::PositiveNumber);
    compare->add_option("--smooth", raw.smooth, "Gaussian smoothing of the LSF, pixels")
        ->check(CLI::NonNegativeNumber);

    auto* profile = app.add_subcommand(
        "profile", "Mean log power per frequency annulus against squared frequency");
    add_input_options(profile, raw, true);
    add_spectrum_options(profile, raw);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return {std::nullopt, code == 0 ? 0 : 1};
    }

    const std::pair<CLI::App*, Command> commands[] = {
        {synth, Command::Synth},     {estimate, Command::Estimate}, {edge, Command::Edge},
        {compare, Command::Compare}, {profile, Command::Profile},
    };
    for (const auto& [cmd, command] : commands) {
        if (!cmd->parsed()) {
            continue;
        }
        try {
            return {build_config(command, raw, *cmd), 0};
        } catch (const Error& e) {
            err << "mtf: " << e.what() << '\n';
            return {std::nullopt, exit_code(e.code())};
        }
    }
    return {std::nullopt, 1};
}

int run(const RunConfig& config, std::ostream& err) {
    std::mutex err_mutex;
    if (config.command == Command::Synth) {
        return guarded(err, err_mutex, "", [&] { return run_synth(config); });
    }
    if (config.inputs.empty()) {
        err << "mtf: no input\n";
        return 1;
    }

    std::vector<int> codes(config.inputs.size(), 0);
    auto process = [&](std::size_t i) {
        const fs::path& in = config.inputs[i];
        codes[i] = guarded(err, err_mutex, in.generic_string() + ": ", [&] {
            save_csv(document_for(config, in), output_path(config, in));
            return 0;
        });
    };

    const auto workers = static_cast<std::size_t>(
        std::clamp<int>(config.jobs, 1, static_cast<int>(config.inputs.size())));
    if (workers == 1) {
        for (std::size_t i = 0; i < config.inputs.size(); ++i) {
            process(i);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < config.inputs.size(); i = next++) {
                    process(i);
                }
            });
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    return *std::max_element(codes.begin(), codes.end());
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    const ParseResult parsed = parse_args(argc, argv, out, err);
    if (!parsed.config) {
        return parsed.exit_code;
    }
    return run(*parsed.config, err);
}

} // namespace mtfest
