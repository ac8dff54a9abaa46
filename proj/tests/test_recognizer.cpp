#include "vface/recognizer.hpp"

#include "vface/synth.hpp"

#include <doctest.h>
#include <zlib.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

using namespace vface;

namespace {

std::string temp_dir(const std::string& name) {
    auto d = std::filesystem::temp_directory_path() / "vface_recognizer_tests" / name;
    std::filesystem::create_directories(d);
    return d.string();
}

std::string read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

// one corpus + trained model shared across the test cases below
struct Fixture {
    std::string dir;
    CorpusPaths corpus;
    TrainReport report;

    Fixture() {
        dir = temp_dir("corpus");
        CorpusSpec spec;
        spec.subjects = 6;
        spec.train_per_subject = 3;
        spec.test_per_subject = 3;
        spec.seed = 11;
        corpus = synth_recognition_corpus(spec, dir);
        TrainOptions options;
        options.net.seed = 11;
        report = train_pipeline(load_manifest(corpus.train_manifest), {}, options);
    }
};

const Fixture& fixture() {
    static Fixture f;
    return f;
}

}  // namespace

TEST_CASE("load_manifest parses rows and resolves paths") {
    const std::string dir = temp_dir("manifest");
    write_bytes(dir + "/m.csv",
                "# comment line\n"
                "a.pgm,alice,0,0,16,16\n"
                "b.pgm,bob\n"
                "c.pgm,carol,0,0,0,0\n");
    const auto entries = load_manifest(dir + "/m.csv");
    REQUIRE(entries.size() == 3);
    CHECK(entries[0].path == dir + "/a.pgm");
    CHECK(entries[0].label == "alice");
    REQUIRE(entries[0].crop.has_value());
    CHECK(entries[0].crop->w == 16);
    CHECK(!entries[1].crop.has_value());
    CHECK(!entries[2].crop.has_value());  // zero-size rectangle means full frame

    write_bytes(dir + "/bad.csv", "a.pgm\n");
    CHECK_THROWS_AS(load_manifest(dir + "/bad.csv"), std::invalid_argument);
    write_bytes(dir + "/bad2.csv", "a.pgm,x,1,2,3\n");
    CHECK_THROWS_AS(load_manifest(dir + "/bad2.csv"), std::invalid_argument);
    write_bytes(dir + "/bad3.csv", "a.pgm,\n");
    CHECK_THROWS_AS(load_manifest(dir + "/bad3.csv"), std::invalid_argument);
    CHECK_THROWS_AS(load_manifest(dir + "/missing.csv"), IoError);
}

TEST_CASE("euclidean_match fundamentals") {
    Gallery g;
    Eigen::VectorXd a(2), b(2);
    a << 0.0, 0.0;
    b << 3.0, 4.0;
    g.entries.push_back({"first", a, ""});
    g.entries.push_back({"second", b, ""});

    const auto [label, dist] = euclidean_match(a, g);
    CHECK(label == "first");
    CHECK(dist == 0.0);

    Eigen::VectorXd probe(2);
    probe << 3.1, 4.1;
    CHECK(euclidean_match(probe, g).first == "second");

    // tie: equidistant entries resolve to the lowest index
    Eigen::VectorXd mid(2);
    mid << 1.5, 2.0;
    CHECK(euclidean_match(mid, g).first == "first");

    Gallery empty;
    CHECK_THROWS_AS(euclidean_match(a, empty), std::invalid_argument);
    Eigen::VectorXd wrong(3);
    CHECK_THROWS_AS(euclidean_match(wrong, g), std::invalid_argument);
}

TEST_CASE("train_pipeline reaches the goal and recognizes its training set") {
    const auto& f = fixture();
    CHECK(f.report.curve.stop_reason == StopReason::goal_reached);
    CHECK(f.report.curve.mse.back() <= 1e-3);
    CHECK(f.report.model.labels.size() == 6);
    CHECK(f.report.model.net.output_dim() == 6);
    CHECK(f.report.model.dual.primary.entries.size() == 18);
    CHECK(f.report.model.dual.secondary.entries.size() == 6);  // last image per label

    const EvalReport eval = evaluate(f.report.model, load_manifest(f.corpus.train_manifest));
    CHECK(eval.accuracy == 1.0);
    CHECK(eval.per_label.size() == 6);

    const EvalReport test_eval = evaluate(f.report.model, load_manifest(f.corpus.test_manifest));
    CHECK(test_eval.accuracy >= 0.98);
}

TEST_CASE("train_pipeline rejects degenerate manifests") {
    const auto& f = fixture();
    auto entries = load_manifest(f.corpus.train_manifest);
    std::vector<ManifestEntry> single(entries.begin(), entries.begin() + 3);  // one label
    CHECK_THROWS_WITH_AS(train_pipeline(single, {}, {}), doctest::Contains(">=2 classes"),
                         std::invalid_argument);
    CHECK_THROWS_AS(train_pipeline({}, {}, {}), std::invalid_argument);
}

TEST_CASE("training failure carries the curve") {
    const auto& f = fixture();
    TrainOptions options;
    options.net.max_epochs = 2;
    options.net.error_goal = 1e-12;
    try {
        train_pipeline(load_manifest(f.corpus.train_manifest), {}, options);
        FAIL("expected TrainingFailure");
    } catch (const TrainingFailure& failure) {
        CHECK(failure.curve.mse.size() == 2);
        CHECK(failure.curve.stop_reason == StopReason::max_epochs);
    }
}

TEST_CASE("extract_features is deterministic with the model dimension") {
    const auto& f = fixture();
    const auto entries = load_manifest(f.corpus.train_manifest);
    const Image img = load_image(entries[0].path);
    const Eigen::VectorXd v1 = extract_features(img, f.report.model, entries[0].crop);
    const Eigen::VectorXd v2 = extract_features(img, f.report.model, entries[0].crop);
    CHECK(v1 == v2);
    CHECK(v1.size() == f.report.model.pca.m);
}

TEST_CASE("recognize labels enrolled images and cross-checks galleries") {
    const auto& f = fixture();
    const auto entries = load_manifest(f.corpus.train_manifest);
    const Image img = load_image(entries[0].path);
    const MatchResult r = recognize(img, f.report.model, /*gate_enabled=*/false);
    CHECK(r.recognized);
    CHECK(r.label == entries[0].label);
    CHECK(r.nn_label == entries[0].label);
    CHECK(r.nn_distance == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(r.agreement);
    CHECK(r.network_confidence > 0.5);
    CHECK(!r.gate.has_value());
}

TEST_CASE("the authenticity gate blocks upscaled probes and passes clean ones") {
    const auto& f = fixture();
    const auto entries = load_manifest(f.corpus.test_manifest);
    const Image probe = load_image(entries[0].path);

    const MatchResult clean = recognize(probe, f.report.model, /*gate_enabled=*/true);
    CHECK(clean.recognized);
    REQUIRE(clean.gate.has_value());
    CHECK(clean.gate->label == Authenticity::Original);
    CHECK(clean.label == entries[0].label);

    const Image forged = upscale2x_linear(probe);
    const MatchResult blocked = recognize(forged, f.report.model, /*gate_enabled=*/true);
    CHECK(!blocked.recognized);
    REQUIRE(blocked.gate.has_value());
    CHECK(blocked.gate->label == Authenticity::Forged);
    CHECK(blocked.label.empty());
}

TEST_CASE("recognized label is invariant to pre-stretch intensity scaling") {
    const auto& f = fixture();
    const auto entries = load_manifest(f.corpus.test_manifest);
    for (size_t i = 0; i < 4; ++i) {
        const Image probe = load_image(entries[i].path);
        const std::string base = recognize(probe, f.report.model, false).label;
        for (double c : {0.5, 0.85}) {
            const Image scaled = (probe * c).eval();
            CHECK(recognize(scaled, f.report.model, false).label == base);
        }
    }
}

TEST_CASE("nearest match agrees with a brute-force rescan") {
    const auto& f = fixture();
    const Gallery& gallery = f.report.model.dual.primary;
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd probe(f.report.model.pca.m);
        for (long i = 0; i < probe.size(); ++i) probe[i] = gauss(rng);
        const auto [label, dist] = euclidean_match(probe, gallery);
        // independent re-scan
        double best = -1.0;
        std::string want;
        for (const auto& e : gallery.entries) {
            const double d = (e.feature - probe).norm();
            if (best < 0.0 || d < best) {
                best = d;
                want = e.label;
            }
        }
        CHECK(label == want);
        CHECK(dist == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("model files round-trip bit-exactly") {
    const auto& f = fixture();
    const std::string dir = temp_dir("model");
    const std::string p1 = dir + "/a.vfm", p2 = dir + "/b.vfm";
    save_model(f.report.model, p1);
    const PipelineModel back = load_model(p1);
    save_model(back, p2);
    CHECK(read_bytes(p1) == read_bytes(p2));

    CHECK(back.net.w1 == f.report.model.net.w1);
    CHECK(back.net.b2 == f.report.model.net.b2);
    CHECK(back.pca.mean == f.report.model.pca.mean);
    CHECK(back.pca.basis == f.report.model.pca.basis);
    CHECK(back.pca.eigenvalues == f.report.model.pca.eigenvalues);
    CHECK(back.labels == f.report.model.labels);
    CHECK(back.dct_keep == f.report.model.dct_keep);
    CHECK(back.preproc.filter_size == f.report.model.preproc.filter_size);
    REQUIRE(back.dual.primary.entries.size() == f.report.model.dual.primary.entries.size());
    for (size_t i = 0; i < back.dual.primary.entries.size(); ++i) {
        CHECK(back.dual.primary.entries[i].label == f.report.model.dual.primary.entries[i].label);
        CHECK(back.dual.primary.entries[i].feature == f.report.model.dual.primary.entries[i].feature);
    }

    // retraining with the same seed reproduces the file byte for byte
    TrainOptions options;
    options.net.seed = 11;
    const TrainReport again =
        train_pipeline(load_manifest(f.corpus.train_manifest), {}, options);
    const std::string p3 = dir + "/c.vfm";
    save_model(again.model, p3);
    CHECK(read_bytes(p1) == read_bytes(p3));
}

TEST_CASE("corrupt and mismatched model files are rejected") {
    const auto& f = fixture();
    const std::string dir = temp_dir("badmodel");
    const std::string good = dir + "/good.vfm";
    save_model(f.report.model, good);
    const std::string bytes = read_bytes(good);

    write_bytes(dir + "/truncated.vfm", bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_WITH_AS(load_model(dir + "/truncated.vfm"), doctest::Contains("checksum"),
                         IoError);

    std::string flipped = bytes;
    flipped[bytes.size() / 3] = static_cast<char>(flipped[bytes.size() / 3] ^ 0x40);
    write_bytes(dir + "/flipped.vfm", flipped);
    CHECK_THROWS_WITH_AS(load_model(dir + "/flipped.vfm"), doctest::Contains("checksum"), IoError);

    // bump the version and re-sign the checksum: must fail on the version
    std::string versioned = bytes;
    versioned[7] = 9;
    const std::uint32_t crc = static_cast<std::uint32_t>(
        crc32(crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef*>(versioned.data()),
              static_cast<uInt>(versioned.size() - 4)));
    for (int i = 0; i < 4; ++i)
        versioned[versioned.size() - 4 + i] = static_cast<char>((crc >> (8 * i)) & 0xff);
    write_bytes(dir + "/versioned.vfm", versioned);
    CHECK_THROWS_WITH_AS(load_model(dir + "/versioned.vfm"), doctest::Contains("version"), IoError);

    write_bytes(dir + "/junk.vfm", "definitely not a model");
    CHECK_THROWS_WITH_AS(load_model(dir + "/junk.vfm"), doctest::Contains("not a model"), IoError);
}

TEST_CASE("evaluate writes one row per label plus a summary") {
    const auto& f = fixture();
    const EvalReport report = evaluate(f.report.model, load_manifest(f.corpus.test_manifest));
    const std::string path = temp_dir("eval") + "/report.csv";
    write_eval_csv(report, path);
    const std::string csv = read_bytes(path);
    CHECK(std::count(csv.begin(), csv.end(), '\n') ==
          static_cast<long>(report.per_label.size()) + 2);  // header + labels + ALL
    CHECK(csv.rfind("label,total,correct,accuracy\n", 0) == 0);
    CHECK(csv.find("ALL,") != std::string::npos);

    CHECK_THROWS_AS(evaluate(f.report.model, {}), std::invalid_argument);
}
