#pragma once

#include "vface/authenticate.hpp"
#include "vface/features.hpp"
#include "vface/neural.hpp"
#include "vface/preprocess.hpp"

#include <optional>
#include <string>
#include <vector>

namespace vface {

struct GalleryEntry {
    std::string label;
    Eigen::VectorXd feature;
    std::string source_path;
};

struct Gallery {
    std::string name;
    std::vector<GalleryEntry> entries;
};

// Paired enrollment/validation galleries. The primary side backs the
// nearest-match answer; the secondary side cross-checks it.
struct DualDatabase {
    Gallery primary;
    Gallery secondary;
};

inline constexpr std::uint32_t kModelVersion = 1;

// Everything needed to run recognition: preprocessing config, DCT retention,
// PCA basis, trained network, galleries and the label table mapping network
// outputs to names.
struct PipelineModel {
    PreprocConfig preproc;
    int dct_keep = 8;
    PcaModel pca;
    Mlp net;
    DualDatabase dual;
    std::vector<std::string> labels;
    std::uint32_t version = kModelVersion;
};

// One manifest row: "path,label,x0,y0,w,h". A "path,label" row or a zero-size
// rectangle means the full frame. Paths are resolved against the manifest's
// directory.
struct ManifestEntry {
    std::string path;
    std::string label;
    std::optional<CropRect> crop;
};

std::vector<ManifestEntry> load_manifest(const std::string& path);

// preprocess -> dct_compress -> pca_project, deterministic per config.
Eigen::VectorXd extract_features(const Image& image, const PipelineModel& model,
                                 const std::optional<CropRect>& crop = std::nullopt);

// Entry minimizing the Euclidean distance; ties go to the lowest index.
std::pair<std::string, double> euclidean_match(const Eigen::VectorXd& v, const Gallery& gallery);

struct TrainOptions {
    PreprocConfig preproc;
    int dct_keep = 8;
    int pca_components_cap = 40;
    int hidden = 20;
    TrainConfig net;
};

// Raised when the network exhausts max_epochs without reaching the error
// goal; carries the curve for reporting.
class TrainingFailure : public std::runtime_error {
 public:
    TrainingFailure(std::string what, TrainingCurve curve)
        : std::runtime_error(std::move(what)), curve(std::move(curve)) {}
    TrainingCurve curve;
};

struct TrainReport {
    PipelineModel model;
    TrainingCurve curve;
};

// Fits PCA on the training features, trains the network on one-hot labels to
// the error goal, enrolls training features into the primary gallery and
// validation features (explicit manifest, or the last image of each label
// when none is given) into the secondary gallery.
TrainReport train_pipeline(const std::vector<ManifestEntry>& training,
                           const std::vector<ManifestEntry>& validation,
                           const TrainOptions& options);

struct MatchResult {
    bool recognized = false;
    std::string label;
    double network_confidence = 0.0;
    std::string nn_label;
    double nn_distance = 0.0;
    bool agreement = false;
    std::string secondary_label;
    double secondary_distance = 0.0;
    bool secondary_disagrees = false;
    std::optional<Verdict> gate;
};

// Authenticate-then-recognize. With the gate enabled a Forged verdict stops
// recognition entirely (recognized stays false and only the gate is filled).
// The label is the network argmax; the Euclidean match is the reported
// cross-check.
MatchResult recognize(const Image& image, const PipelineModel& model, bool gate_enabled,
                      const DetectorConfig& detector = {},
                      const std::optional<CropRect>& crop = std::nullopt);

// Versioned binary container: magic "VFMODEL", format version, section
// table, little-endian 64-bit floats, trailing CRC-32. Round-trips are
// bit-exact; corrupt or truncated files fail the checksum; unknown versions
// are rejected before any parsing.
void save_model(const PipelineModel& model, const std::string& path);
PipelineModel load_model(const std::string& path);

struct EvalRow {
    std::string label;
    int total = 0;
    int correct = 0;
    double accuracy = 0.0;
};

struct EvalReport {
    std::vector<EvalRow> per_label;
    int total = 0;
    int correct = 0;
    double accuracy = 0.0;
    double mean_nn_distance = 0.0;
};

// Gate-off accuracy over a labeled manifest.
EvalReport evaluate(const PipelineModel& model, const std::vector<ManifestEntry>& manifest);

// "label,total,correct,accuracy" rows, one per label plus an ALL summary row.
void write_eval_csv(const EvalReport& report, const std::string& path);

}  // namespace vface
