// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Emits benchmark CSVs under acceptance_out/ in the working
// directory.

#include "vface/authenticate.hpp"
#include "vface/config.hpp"
#include "vface/io_util.hpp"
#include "vface/recognizer.hpp"
#include "vface/resample.hpp"
#include "vface/synth.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

using namespace vface;
using Clock = std::chrono::steady_clock;

namespace {

int checks_failed = 0;

void expect(bool ok, const std::string& what) {
    if (!ok) {
        ++checks_failed;
        std::printf("       check failed: %s\n", what.c_str());
    }
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// --- criterion 1: Monte-Carlo oracle for the variance predictor -------------

// Empirical variance of the forward-difference nth derivative of the
// kernel-interpolated signal at fixed positions; independent of
// predicted_variance (which sums analytic kernel derivatives).
double mc_derivative_variance(const KernelSpec& spec, int n, double x, int realizations,
                              std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int len = 16;
    Signal sig;
    sig.samples.resize(len);
    sig.step = 1.0;
    const double h = n == 1 ? 1e-5 : 1e-3;
    double sum = 0.0, sumsq = 0.0;
    for (int r = 0; r < realizations; ++r) {
        for (int i = 0; i < len; ++i) sig.samples[i] = gauss(rng);
        double d;
        if (n == 1) {
            d = (interpolate_1d(sig, spec, x + h) - interpolate_1d(sig, spec, x)) / h;
        } else {
            d = (interpolate_1d(sig, spec, x + 2 * h) - 2.0 * interpolate_1d(sig, spec, x + h) +
                 interpolate_1d(sig, spec, x)) /
                (h * h);
        }
        sum += d;
        sumsq += d * d;
    }
    const double mean = sum / realizations;
    return sumsq / realizations - mean * mean;
}

bool criterion1() {
    const auto start = Clock::now();
    const KernelSpec linear{KernelKind::linear, -0.5};
    const NoiseModel unit{1.0};
    const int realizations = 100000;
    // 2x upscale samples the interpolated signal at phases 0 and 1/2
    int case_id = 0;
    for (int n = 1; n <= 2; ++n) {
        for (double phase : {0.0, 0.5}) {
            ++case_id;
            const double predicted = predicted_variance(linear, n, unit, phase);
            const double empirical =
                mc_derivative_variance(linear, n, 8.0 + phase, realizations, 4000 + case_id);
            char what[160];
            std::snprintf(what, sizeof(what), "n=%d phase=%.1f: |%.6f - %.6f| <= 3%%", n, phase,
                          empirical, predicted);
            expect(std::abs(empirical - predicted) <= 0.03 * predicted + 1e-6, what);
        }
    }
    const double elapsed = seconds_since(start);
    expect(elapsed < 30.0, "runtime under 30 s");
    std::printf("       (%.1f s, %d realizations per phase bin)\n", elapsed, realizations);
    return true;
}

// --- criterion 2: exact integer-shift periodicity ---------------------------

bool criterion2() {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<long> mantissa(0, (1L << 26) - 1);
    std::uniform_int_distribution<int> shift(-1000000, 1000000);
    const NoiseModel unit{1.0};
    for (const auto kind : {KernelKind::nearest, KernelKind::linear, KernelKind::cubic}) {
        const KernelSpec spec{kind, -0.5};
        for (int n = 1; n <= 2; ++n) {
            for (int i = 0; i < 100; ++i) {
                // dyadic phase so phi + theta is exactly representable
                const double phi = double(mantissa(rng)) / double(1L << 26);
                int theta = shift(rng);
                if (theta == 0) theta = 1;
                const double direct = predicted_variance(spec, n, unit, phi);
                const double shifted = predicted_variance(spec, n, unit, phi + theta);
                const double reduced =
                    predicted_variance(spec, n, unit, std::fmod(phi + theta, 1.0));
                if (direct != shifted || direct != reduced) {
                    expect(false, "bitwise equality at phi=" + format_g9(phi) +
                                      " theta=" + std::to_string(theta));
                    return false;
                }
            }
        }
    }
    return true;
}

// --- criterion 3: detector separability -------------------------------------

bool criterion3() {
    const auto start = Clock::now();
    const int trials = 200;
    const DetectorConfig config;  // threshold unused; scores only
    std::mt19937_64 rng(1);
    std::vector<double> pristine_scores, forged_scores, forged_freqs;
    for (int i = 0; i < trials; ++i) {
        pristine_scores.push_back(authenticate(white_noise_image(128, 128, rng), config).score);
        const Verdict v = authenticate(upscale2x_linear(white_noise_image(64, 64, rng)), config);
        forged_scores.push_back(v.score);
        forged_freqs.push_back(v.report.best_frequency);
    }
    const CalibrationResult cal = calibrate_threshold(pristine_scores, forged_scores);
    std::printf("       threshold=%.2f tpr=%.3f fpr=%.3f\n", cal.threshold, cal.tpr, cal.fpr);
    expect(cal.tpr >= 0.95, "TPR >= 95% at the calibrated threshold");
    expect(cal.fpr <= 0.05, "FPR <= 5% at the calibrated threshold");

    const double bin = 1.0 / kSpectrumSize;
    int good_freq = 0, positives = 0;
    for (int i = 0; i < trials; ++i) {
        if (forged_scores[i] > cal.threshold) {
            ++positives;
            if (std::abs(forged_freqs[i] - 0.5) <= bin + 1e-12) ++good_freq;
        }
    }
    expect(good_freq == positives, "best_frequency within one bin of 0.5 on true positives");

    const double elapsed = seconds_since(start);
    expect(elapsed < 300.0, "runtime under 5 min");
    std::printf("       (%.1f s for %d+%d images)\n", elapsed, trials, trials);
    return true;
}

// --- criterion 4: radon identities -------------------------------------------

bool criterion4() {
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> dim(16, 64);
    std::uniform_real_distribution<double> level(0.0, 255.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int w = dim(rng), h = dim(rng);
        Image img(h, w);
        for (long i = 0; i < img.size(); ++i) img.data()[i] = level(rng);

        const Sinogram sg = radon(img, all_degrees());
        const Eigen::VectorXd cols = img.matrix().colwise().sum();
        const Eigen::VectorXd rows = img.matrix().rowwise().sum();
        for (int x = 0; x < w; ++x) {
            const double got = sg.projections(sg.offset[0] + x, 0);
            if (std::abs(got - cols[x]) > 1e-9 * std::max(1.0, std::abs(cols[x]))) {
                expect(false, "theta=0 equals column sums");
                return false;
            }
        }
        for (int y = 0; y < h; ++y) {
            const double got = sg.projections(sg.offset[90] + y, 90);
            if (std::abs(got - rows[y]) > 1e-9 * std::max(1.0, std::abs(rows[y]))) {
                expect(false, "theta=90 equals row sums");
                return false;
            }
        }
        const double mass = img.sum();
        for (int a = 0; a < 180; ++a) {
            if (std::abs(sg.projections.col(a).sum() - mass) > 0.005 * mass) {
                expect(false, "mass conserved within 0.5% at angle " + std::to_string(a));
                return false;
            }
        }
    }
    return true;
}

// --- criterion 5: gradient check ---------------------------------------------

bool criterion5() {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> in(-1.0, 1.0), tgt(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Mlp net = mlp_init(4, 3, 2, 500 + trial);
        Eigen::MatrixXd x(4, 5), t(2, 5);
        for (long c = 0; c < 5; ++c) {
            for (long r = 0; r < 4; ++r) x(r, c) = in(rng);
            for (long r = 0; r < 2; ++r) t(r, c) = tgt(rng);
        }
        Mlp stepped = net;
        MlpVelocity vel = MlpVelocity::zeros_like(net);
        backprop_step(stepped, x, t, 1.0, 0.0, vel);  // analytic gradient = net - stepped

        std::vector<std::pair<double*, double>> params;
        auto collect = [&](Eigen::MatrixXd& p, const Eigen::MatrixXd& s) {
            for (long i = 0; i < p.size(); ++i)
                params.push_back({p.data() + i, p.data()[i] - s.data()[i]});
        };
        collect(net.w1, stepped.w1);
        collect(net.w2, stepped.w2);
        auto collect_v = [&](Eigen::VectorXd& p, const Eigen::VectorXd& s) {
            for (long i = 0; i < p.size(); ++i)
                params.push_back({p.data() + i, p.data()[i] - s.data()[i]});
        };
        collect_v(net.b1, stepped.b1);
        collect_v(net.b2, stepped.b2);

        const double h = 1e-5;
        for (auto& [ptr, analytic] : params) {
            const double keep = *ptr;
            *ptr = keep + h;
            const double up = mse(net, x, t);
            *ptr = keep - h;
            const double down = mse(net, x, t);
            *ptr = keep;
            const double fd = (up - down) / (2.0 * h);
            if (std::abs(fd - analytic) > 1e-5 * std::max(1.0, std::abs(fd) + std::abs(analytic))) {
                expect(false, "finite-difference agreement on net " + std::to_string(trial));
                return false;
            }
        }
    }
    return true;
}

// --- criterion 6: transform round-trips ---------------------------------------

bool criterion6() {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> level(-2.0, 2.0);

    for (int trial = 0; trial < 10; ++trial) {
        Image img(8 + trial, 20 - trial);
        for (long i = 0; i < img.size(); ++i) img.data()[i] = level(rng);
        const double err = (idct2(dct2(img)) - img).abs().maxCoeff();
        if (err > 1e-9) {
            expect(false, "idct2(dct2(x)) == x within 1e-9");
            return false;
        }
    }

    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const long dim = 10 + trial, count = 8;
        Eigen::MatrixXd data(dim, count);
        for (long c = 0; c < count; ++c)
            for (long r = 0; r < dim; ++r) data(r, c) = gauss(rng);
        const PcaModel model = pca_fit(data, static_cast<int>(count - 1));
        for (long c = 0; c < count; ++c) {
            const Eigen::VectorXd back =
                model.mean + model.basis * pca_project(model, data.col(c));
            const double rms = std::sqrt((back - data.col(c)).squaredNorm() / double(dim));
            if (rms > 1e-6) {
                expect(false, "full-rank PCA reconstruction RMS <= 1e-6");
                return false;
            }
        }
    }

    for (int trial = 0; trial < 10; ++trial) {
        const long dim = 6 + trial;  // up to 15
        const long count = dim + 4;
        Eigen::MatrixXd data(dim, count);
        for (long c = 0; c < count; ++c)
            for (long r = 0; r < dim; ++r) data(r, c) = gauss(rng);
        const int m = static_cast<int>(dim);
        const PcaModel g = pca_fit(data, m, PcaSolver::gram);
        const PcaModel d = pca_fit(data, m, PcaSolver::covariance);
        const double gap = (g.eigenvalues - d.eigenvalues).cwiseAbs().maxCoeff();
        if (gap > 1e-8) {
            expect(false, "gram vs covariance eigenvalues within 1e-8");
            return false;
        }
    }
    return true;
}

// --- criterion 7: recognition error at desk scale -----------------------------

bool criterion7(const std::string& out_dir) {
    const auto start = Clock::now();
    CorpusSpec spec;
    spec.subjects = 12;
    spec.train_per_subject = 3;
    spec.test_per_subject = 5;
    spec.image_size = 64;
    spec.noise_sigma = 4.0;
    spec.seed = 7;
    const CorpusPaths corpus = synth_recognition_corpus(spec, out_dir + "/corpus12");

    TrainOptions options;
    options.net.seed = 7;
    const TrainReport report =
        train_pipeline(load_manifest(corpus.train_manifest), {}, options);
    const EvalReport eval = evaluate(report.model, load_manifest(corpus.test_manifest));
    const double error = 1.0 - eval.accuracy;
    std::printf("       test error %.4f over %d probes (%zu subjects)\n", error, eval.total,
                report.model.labels.size());
    expect(error <= 0.02, "test error <= 2%");
    const double elapsed = seconds_since(start);
    expect(elapsed < 180.0, "runtime under 3 min");
    std::printf("       (%.1f s)\n", elapsed);
    return true;
}

// --- criterion 8: benchmark sweeps --------------------------------------------

bool criterion8(const std::string& out_dir) {
    // hidden-size sweep on one fixed task
    CorpusSpec spec;
    spec.subjects = 10;
    spec.train_per_subject = 3;
    spec.test_per_subject = 2;
    spec.seed = 8;
    const CorpusPaths corpus = synth_recognition_corpus(spec, out_dir + "/corpus_h");
    const auto manifest = load_manifest(corpus.train_manifest);

    std::string hidden_csv = "hidden_neurons,epochs,goal_reached,wall_ms\n";
    for (int hidden : {5, 10, 20, 40}) {
        TrainOptions options;
        options.hidden = hidden;
        options.net.seed = 8;
        options.net.max_epochs = 20000;
        const auto t0 = Clock::now();
        size_t epochs = 0;
        bool reached = false;
        try {
            const TrainReport report = train_pipeline(manifest, {}, options);
            epochs = report.curve.mse.size();
            reached = true;
        } catch (const TrainingFailure& failure) {
            epochs = failure.curve.mse.size();
        }
        const double ms = seconds_since(t0) * 1000.0;
        hidden_csv += std::to_string(hidden) + "," + std::to_string(epochs) + "," +
                      (reached ? "1" : "0") + "," + format_g9(ms) + "\n";
    }
    write_file_atomic(out_dir + "/hidden_neurons_sweep.csv", hidden_csv);

    // subject-count sweep
    std::string subj_csv = "subjects,accuracy,test_probes\n";
    for (int subjects : {5, 10, 15, 20}) {
        CorpusSpec s;
        s.subjects = subjects;
        s.train_per_subject = 3;
        s.test_per_subject = 5;
        s.seed = 80 + subjects;
        const CorpusPaths c = synth_recognition_corpus(s, out_dir + "/corpus_s" +
                                                              std::to_string(subjects));
        TrainOptions options;
        options.net.seed = 80 + subjects;
        try {
            const TrainReport report = train_pipeline(load_manifest(c.train_manifest), {}, options);
            const EvalReport eval = evaluate(report.model, load_manifest(c.test_manifest));
            subj_csv += std::to_string(subjects) + "," + format_g9(eval.accuracy) + "," +
                        std::to_string(eval.total) + "\n";
        } catch (const TrainingFailure&) {
            subj_csv += std::to_string(subjects) + ",unconverged,0\n";
        }
    }
    write_file_atomic(out_dir + "/subject_count_sweep.csv", subj_csv);

    std::printf("       wrote %s/hidden_neurons_sweep.csv and subject_count_sweep.csv\n",
                out_dir.c_str());
    // trends are reported, not asserted
    expect(std::filesystem::exists(out_dir + "/hidden_neurons_sweep.csv"), "hidden sweep CSV");
    expect(std::filesystem::exists(out_dir + "/subject_count_sweep.csv"), "subject sweep CSV");
    return true;
}

// --- criterion 9: persistence --------------------------------------------------

bool criterion9(const std::string& out_dir) {
    // image round-trip
    std::mt19937_64 rng(9);
    const Image img = white_noise_image(37, 23, rng);
    const std::string pgm = out_dir + "/roundtrip.pgm";
    save_image(img, pgm);
    const Image back = load_image(pgm);
    expect(back.rows() == img.rows() && back.cols() == img.cols() && (back == img).all(),
           "PGM round-trip bit-exact");

    // model round-trip
    CorpusSpec spec;
    spec.subjects = 3;
    spec.train_per_subject = 2;
    spec.test_per_subject = 1;
    spec.seed = 91;
    const CorpusPaths corpus = synth_recognition_corpus(spec, out_dir + "/corpus9");
    TrainOptions options;
    options.net.seed = 91;
    const TrainReport report = train_pipeline(load_manifest(corpus.train_manifest), {}, options);
    const std::string m1 = out_dir + "/m1.vfm", m2 = out_dir + "/m2.vfm";
    save_model(report.model, m1);
    save_model(load_model(m1), m2);
    std::ifstream f1(m1, std::ios::binary), f2(m2, std::ios::binary);
    const std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    const std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    expect(!b1.empty() && b1 == b2, "model round-trip bit-exact");

    // corruption rejected via checksum
    std::string corrupt = b1;
    corrupt[corrupt.size() / 2] ^= 0x01;
    const std::string bad = out_dir + "/bad.vfm";
    write_file_atomic(bad, corrupt);
    bool rejected = false;
    try {
        load_model(bad);
    } catch (const IoError& e) {
        rejected = std::string(e.what()).find("checksum") != std::string::npos;
    }
    expect(rejected, "corrupted model rejected via checksum");

    bool truncated_rejected = false;
    write_file_atomic(bad, b1.substr(0, b1.size() - 9));
    try {
        load_model(bad);
    } catch (const IoError& e) {
        truncated_rejected = std::string(e.what()).find("checksum") != std::string::npos;
    }
    expect(truncated_rejected, "truncated model rejected via checksum");
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    const std::string out_dir = argc > 1 ? argv[1] : "acceptance_out";
    std::filesystem::create_directories(out_dir);

    struct Criterion {
        const char* name;
        bool (*fn)();
        bool (*fn_dir)(const std::string&);
    };
    const std::vector<Criterion> criteria = {
        {"1 variance predictor vs Monte-Carlo oracle (3%, <30s)", criterion1, nullptr},
        {"2 exact periodicity under integer phase shifts", criterion2, nullptr},
        {"3 detector separability (TPR>=95%, FPR<=5%, f=0.5)", criterion3, nullptr},
        {"4 radon identities and mass conservation", criterion4, nullptr},
        {"5 backprop gradient vs central finite differences", criterion5, nullptr},
        {"6 DCT inverse, PCA reconstruction, gram-vs-direct", criterion6, nullptr},
        {"7 recognition test error <= 2% at desk scale (<3min)", nullptr, criterion7},
        {"8 hidden-neuron and subject-count benchmark sweeps", nullptr, criterion8},
        {"9 bit-exact persistence with checksummed rejects", nullptr, criterion9},
    };

    int failed = 0;
    for (const auto& c : criteria) {
        const int before = checks_failed;
        bool threw = false;
        std::string what;
        try {
            if (c.fn)
                c.fn();
            else
                c.fn_dir(out_dir);
        } catch (const std::exception& e) {
            threw = true;
            what = e.what();
        }
        const bool ok = !threw && checks_failed == before;
        if (!ok) ++failed;
        std::printf("[%s] criterion %s%s%s\n", ok ? "PASS" : "FAIL", c.name,
                    threw ? " — exception: " : "", threw ? what.c_str() : "");
        std::fflush(stdout);
    }
    if (failed > 0) {
        std::printf("%d of %zu criteria failed\n", failed, criteria.size());
        return 1;
    }
    std::printf("all %zu criteria passed\n", criteria.size());
    return 0;
}
