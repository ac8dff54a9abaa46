// vface: resampling-forgery detection + gated face recognition toolkit.
//
// Exit codes: 0 success/original, 1 I/O error, 2 usage error,
// 3 forged/gate-block, 4 indeterminate, 5 training did not reach the goal.

#include "vface/config.hpp"
#include "vface/io_util.hpp"
#include "vface/synth.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <random>

namespace {

using namespace vface;

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path,
                    "key=value config file (default: $VFACE_CONFIG)");
    cmd->add_option("--set", opts.sets, "config override, e.g. --set net.hidden=40")
        ->take_all();
}

ToolConfig make_config(const CommonOpts& opts) {
    ToolConfig config;
    std::string path = opts.config_path;
    if (path.empty())
        if (const char* env = std::getenv("VFACE_CONFIG")) path = env;
    if (!path.empty()) config = load_config(path);
    for (const auto& kv : opts.sets) {
        const size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--set expects key=value, got: " + kv);
        config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (opts.seed) {
        config.seed = *opts.seed;
        config.train.net.seed = *opts.seed;
    }
    return config;
}

int verdict_exit(const Verdict& v) {
    switch (v.label) {
        case Authenticity::Original: return 0;
        case Authenticity::Forged: return 3;
        case Authenticity::Indeterminate: return 4;
    }
    return 1;
}

void print_verdict(const Verdict& v) {
    std::printf("%s score=%s threshold=%s\n", to_string(v.label),
                format_g9(v.score).c_str(), format_g9(v.threshold).c_str());
}

int cmd_authenticate(const std::string& image_path, const std::string& csv,
                     const std::string& svg, const ToolConfig& config) {
    const Image img = load_image(image_path);
    const Verdict v = authenticate(img, config.detector);
    print_verdict(v);
    if (!csv.empty()) emit_spectrum_csv(v, csv);
    if (!svg.empty()) emit_spectrum_svg(v, svg);
    return verdict_exit(v);
}

AffineParams compose(const AffineParams& second, const AffineParams& first) {
    AffineParams c;
    c.a1 = second.a1 * first.a1 + second.a2 * first.b1;
    c.a2 = second.a1 * first.a2 + second.a2 * first.b2;
    c.b1 = second.b1 * first.a1 + second.b2 * first.b1;
    c.b2 = second.b1 * first.a2 + second.b2 * first.b2;
    c.a0 = second.a0 + second.a1 * first.a0 + second.a2 * first.b0;
    c.b0 = second.b0 + second.b1 * first.a0 + second.b2 * first.b0;
    return c;
}

struct SynthOpts {
    double scale = 1.0;
    std::optional<double> scale_x, scale_y;
    double rotate = 0.0;
    double skew_x = 0.0, skew_y = 0.0;
    std::string kernel = "linear";
    double cubic_a = -0.5;
};

KernelSpec kernel_from_name(const std::string& name, double cubic_a) {
    if (name == "nearest") return {KernelKind::nearest, cubic_a};
    if (name == "linear") return {KernelKind::linear, cubic_a};
    if (name == "cubic") return {KernelKind::cubic, cubic_a};
    throw std::invalid_argument("unknown kernel: " + name);
}

int cmd_synthesize(const std::string& source, const std::string& out, const SynthOpts& opts) {
    const Image src = load_image(source);
    const double sx = opts.scale_x.value_or(opts.scale);
    const double sy = opts.scale_y.value_or(opts.scale);
    // forward map: skew, then rotate, then scale
    AffineParams fwd = compose(AffineParams::scaling(sx, sy),
                               compose(AffineParams::rotation_deg(opts.rotate),
                                       AffineParams::skew(opts.skew_x, opts.skew_y)));
    if (fwd.determinant() == 0.0) throw std::invalid_argument("transform is not invertible");

    // shift mapped pixel centers to start at 0; size output to cover the
    // mapped [0,w]x[0,h] box
    const double w = src.cols(), h = src.rows();
    double cmin_x = 1e300, cmin_y = 1e300, smax_x = -1e300, smax_y = -1e300,
           smin_x = 1e300, smin_y = 1e300;
    for (int corner = 0; corner < 4; ++corner) {
        const double cx = (corner & 1) ? w - 1 : 0.0, cy = (corner & 2) ? h - 1 : 0.0;
        const auto [u, v] = affine_apply(fwd, cx, cy);
        cmin_x = std::min(cmin_x, u);
        cmin_y = std::min(cmin_y, v);
        const double bx = (corner & 1) ? w : 0.0, by = (corner & 2) ? h : 0.0;
        const auto [bu, bv] = affine_apply(fwd, bx, by);
        smin_x = std::min(smin_x, bu);
        smax_x = std::max(smax_x, bu);
        smin_y = std::min(smin_y, bv);
        smax_y = std::max(smax_y, bv);
    }
    fwd.a0 = -cmin_x + 0.0;  // + 0.0 normalizes negative zero
    fwd.b0 = -cmin_y + 0.0;
    const int out_w = static_cast<int>(std::ceil(smax_x - smin_x));
    const int out_h = static_cast<int>(std::ceil(smax_y - smin_y));

    const KernelSpec spec = kernel_from_name(opts.kernel, opts.cubic_a);
    save_image(warp(src, fwd, spec, out_w, out_h), out);

    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "a0=%.17g\na1=%.17g\na2=%.17g\nb0=%.17g\nb1=%.17g\nb2=%.17g\n"
                  "kernel=%s\ncubic_a=%.17g\nwidth=%d\nheight=%d\n",
                  fwd.a0, fwd.a1, fwd.a2, fwd.b0, fwd.b1, fwd.b2, opts.kernel.c_str(),
                  opts.cubic_a, out_w, out_h);
    write_file_atomic(out + ".meta", buf);
    std::printf("wrote %s (%dx%d)\n", out.c_str(), out_w, out_h);
    return 0;
}

std::vector<double> score_directory(const std::string& dir, const DetectorConfig& detector) {
    std::vector<std::string> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".pgm")
            files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    std::vector<double> scores;
    for (const auto& f : files) scores.push_back(authenticate(load_image(f), detector).score);
    return scores;
}

int cmd_calibrate(int trials, const std::string& corpus_dir, std::uint64_t seed,
                  const std::string& roc_path, const std::string& config_out,
                  const ToolConfig& config) {
    std::vector<double> pristine, forged;
    if (!corpus_dir.empty()) {
        pristine = score_directory(corpus_dir + "/pristine", config.detector);
        forged = score_directory(corpus_dir + "/forged", config.detector);
        if (pristine.empty() || forged.empty())
            throw std::invalid_argument("calibrate: corpus must hold pristine/ and forged/ PGMs");
    } else {
        if (trials < 1) throw std::invalid_argument("calibrate: --trials must be >= 1");
        std::mt19937_64 rng(seed);
        for (int i = 0; i < trials; ++i) {
            pristine.push_back(authenticate(white_noise_image(128, 128, rng), config.detector).score);
            forged.push_back(
                authenticate(upscale2x_linear(white_noise_image(64, 64, rng)), config.detector).score);
        }
    }
    const CalibrationResult cal = calibrate_threshold(pristine, forged);
    std::printf("seed=%llu threshold=%s tpr=%s fpr=%s\n",
                static_cast<unsigned long long>(seed), format_g9(cal.threshold).c_str(),
                format_g9(cal.tpr).c_str(), format_g9(cal.fpr).c_str());
    if (!roc_path.empty()) {
        std::string csv = "threshold,tpr,fpr\n";
        for (const auto& p : cal.roc)
            csv += format_g9(p.threshold) + "," + format_g9(p.tpr) + "," + format_g9(p.fpr) + "\n";
        write_file_atomic(roc_path, csv);
    }
    if (!config_out.empty())
        write_file_atomic(config_out, "detector.threshold=" + format_g9(cal.threshold) + "\n");
    return 0;
}

int cmd_train(const std::string& manifest_path, const std::string& validation_path,
              const std::string& model_path, const std::string& curve_path,
              const std::string& curve_svg, const ToolConfig& config) {
    const auto training = load_manifest(manifest_path);
    std::vector<ManifestEntry> validation;
    if (!validation_path.empty()) validation = load_manifest(validation_path);
    TrainReport report;
    try {
        report = train_pipeline(training, validation, config.train);
    } catch (const TrainingFailure& failure) {
        if (!curve_path.empty()) write_curve_csv(failure.curve, curve_path);
        if (!curve_svg.empty()) write_curve_svg(failure.curve, curve_svg);
        std::fprintf(stderr, "error: %s\n", failure.what());
        return 5;
    }
    save_model(report.model, model_path);
    if (!curve_path.empty()) write_curve_csv(report.curve, curve_path);
    if (!curve_svg.empty()) write_curve_svg(report.curve, curve_svg);
    std::printf("seed=%llu epochs=%zu final_mse=%s stop=goal_reached model=%s\n",
                static_cast<unsigned long long>(config.train.net.seed), report.curve.mse.size(),
                format_g9(report.curve.mse.back()).c_str(), model_path.c_str());
    return 0;
}

std::optional<CropRect> parse_crop(const std::string& crop) {
    if (crop.empty()) return std::nullopt;
    CropRect r;
    if (std::sscanf(crop.c_str(), "%d,%d,%d,%d", &r.x0, &r.y0, &r.w, &r.h) != 4)
        throw std::invalid_argument("--crop expects x0,y0,w,h");
    return r;
}

int cmd_recognize(const std::string& image_path, const std::string& model_path, bool gate,
                  const std::string& crop, const ToolConfig& config) {
    const Image img = load_image(image_path);
    const PipelineModel model = load_model(model_path);
    const MatchResult r = recognize(img, model, gate, config.detector, parse_crop(crop));
    const char* gate_str = r.gate ? to_string(r.gate->label) : "OFF";
    if (!r.recognized) {
        std::printf("label=- confidence=- nn=- dist=- gate=%s score=%s threshold=%s\n", gate_str,
                    format_g9(r.gate->score).c_str(), format_g9(r.gate->threshold).c_str());
        return 3;
    }
    std::printf("label=%s confidence=%s nn=%s dist=%s gate=%s", r.label.c_str(),
                format_g9(r.network_confidence).c_str(), r.nn_label.c_str(),
                format_g9(r.nn_distance).c_str(), gate_str);
    if (r.secondary_disagrees)
        std::printf(" secondary=%s secondary_dist=%s", r.secondary_label.c_str(),
                    format_g9(r.secondary_distance).c_str());
    std::printf("\n");
    return 0;
}

int cmd_evaluate(const std::string& manifest_path, const std::string& model_path,
                 const std::string& out_csv) {
    const PipelineModel model = load_model(model_path);
    const EvalReport report = evaluate(model, load_manifest(manifest_path));
    if (!out_csv.empty()) write_eval_csv(report, out_csv);
    std::printf("accuracy=%s total=%d correct=%d mean_nn_distance=%s\n",
                format_g9(report.accuracy).c_str(), report.total, report.correct,
                format_g9(report.mean_nn_distance).c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"image authenticity check + gated face recognition"};
    app.require_subcommand(1);

    CommonOpts common;
    std::string image_path, model_path, manifest_path, validation_path;
    std::string out_path, csv_path, svg_path, roc_path, config_out, corpus_dir, crop;
    std::string curve_path, curve_svg;
    int trials = 0;
    std::uint64_t seed = 1;
    bool no_gate = false;
    SynthOpts synth;

    auto* c_auth = app.add_subcommand("authenticate", "decide Original vs Forged");
    c_auth->add_option("image", image_path, "input PGM/PNG")->required();
    c_auth->add_option("--spectrum", csv_path, "write best-angle spectrum CSV");
    c_auth->add_option("--svg", svg_path, "write best-angle spectrum SVG");
    add_common(c_auth, common);

    auto* c_spec = app.add_subcommand("spectrum", "authenticate and emit the spectrum");
    c_spec->add_option("image", image_path, "input PGM/PNG")->required();
    c_spec->add_option("--csv", csv_path, "spectrum CSV path")->required();
    c_spec->add_option("--svg", svg_path, "spectrum SVG path");
    add_common(c_spec, common);

    auto* c_synth = app.add_subcommand("synthesize", "apply an affine warp, keep ground truth");
    c_synth->add_option("source", image_path, "source PGM/PNG")->required();
    c_synth->add_option("--out", out_path, "output PGM")->required();
    c_synth->add_option("--scale", synth.scale, "uniform scale factor");
    c_synth->add_option("--scale-x", synth.scale_x, "horizontal scale");
    c_synth->add_option("--scale-y", synth.scale_y, "vertical scale");
    c_synth->add_option("--rotate", synth.rotate, "rotation in degrees");
    c_synth->add_option("--skew-x", synth.skew_x, "horizontal shear");
    c_synth->add_option("--skew-y", synth.skew_y, "vertical shear");
    c_synth->add_option("--kernel", synth.kernel, "nearest|linear|cubic (default linear)");
    c_synth->add_option("--cubic-a", synth.cubic_a, "Keys parameter (default -0.5)");

    auto* c_cal = app.add_subcommand("calibrate", "pick the detector threshold");
    c_cal->add_option("--trials", trials, "synthesize N pristine/forged pairs");
    c_cal->add_option("--corpus", corpus_dir, "directory with pristine/ and forged/ PGMs");
    c_cal->add_option("--seed", seed, "corpus seed (printed)");
    c_cal->add_option("--roc", roc_path, "ROC CSV path");
    c_cal->add_option("--out-config", config_out, "config fragment with the threshold");
    add_common(c_cal, common);

    auto* c_train = app.add_subcommand("train", "train the recognition pipeline");
    c_train->add_option("--manifest", manifest_path, "training manifest CSV")->required();
    c_train->add_option("--validation", validation_path, "validation manifest CSV");
    c_train->add_option("--model", model_path, "output model file")->required();
    c_train->add_option("--curve", curve_path, "training-curve CSV");
    c_train->add_option("--curve-svg", curve_svg, "training-curve SVG");
    c_train->add_option("--seed", common.seed, "training seed (printed)");
    add_common(c_train, common);

    auto* c_rec = app.add_subcommand("recognize", "label a probe image");
    c_rec->add_option("image", image_path, "probe PGM/PNG")->required();
    c_rec->add_option("--model", model_path, "model file")->required();
    c_rec->add_flag("--no-gate", no_gate, "skip the authenticity gate");
    c_rec->add_option("--crop", crop, "face rectangle x0,y0,w,h");
    add_common(c_rec, common);

    auto* c_eval = app.add_subcommand("evaluate", "accuracy over a labeled manifest");
    c_eval->add_option("--manifest", manifest_path, "test manifest CSV")->required();
    c_eval->add_option("--model", model_path, "model file")->required();
    c_eval->add_option("--out", out_path, "accuracy CSV");
    add_common(c_eval, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const ToolConfig config = make_config(common);
        if (c_auth->parsed()) return cmd_authenticate(image_path, csv_path, svg_path, config);
        if (c_spec->parsed()) return cmd_authenticate(image_path, csv_path, svg_path, config);
        if (c_synth->parsed()) return cmd_synthesize(image_path, out_path, synth);
        if (c_cal->parsed())
            return cmd_calibrate(trials, corpus_dir, seed, roc_path, config_out, config);
        if (c_train->parsed())
            return cmd_train(manifest_path, validation_path, model_path, curve_path, curve_svg,
                             config);
        if (c_rec->parsed()) return cmd_recognize(image_path, model_path, !no_gate, crop, config);
        if (c_eval->parsed()) return cmd_evaluate(manifest_path, model_path, out_path);
    } catch (const vface::IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const vface::TrainingFailure& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 5;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
