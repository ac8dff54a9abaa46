#include "vface/recognizer.hpp"

#include "vface/io_util.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace vface {

// --- manifest ---------------------------------------------------------------

std::vector<ManifestEntry> load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path + ": cannot open file");
    const std::string base = std::filesystem::path(path).parent_path().string();
    std::vector<ManifestEntry> entries;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 2 && fields.size() != 6)
            throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                        ": expected \"path,label[,x0,y0,w,h]\"");
        ManifestEntry e;
        e.path = base.empty() ? fields[0] : base + "/" + fields[0];
        e.label = fields[1];
        if (e.label.empty())
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": empty label");
        if (fields.size() == 6) {
            CropRect r;
            try {
                r.x0 = std::stoi(fields[2]);
                r.y0 = std::stoi(fields[3]);
                r.w = std::stoi(fields[4]);
                r.h = std::stoi(fields[5]);
            } catch (const std::exception&) {
                throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                            ": bad crop rectangle");
            }
            if (r.w > 0 && r.h > 0) e.crop = r;
        }
        entries.push_back(std::move(e));
    }
    return entries;
}

// --- feature extraction and matching ----------------------------------------

Eigen::VectorXd extract_features(const Image& image, const PipelineModel& model,
                                 const std::optional<CropRect>& crop) {
    const Image conditioned = preprocess_chain(image, model.preproc, crop);
    return pca_project(model.pca, dct_compress(conditioned, model.dct_keep));
}

std::pair<std::string, double> euclidean_match(const Eigen::VectorXd& v, const Gallery& gallery) {
    if (gallery.entries.empty())
        throw std::invalid_argument("euclidean_match: empty gallery");
    size_t best = 0;
    double best_d2 = -1.0;
    for (size_t i = 0; i < gallery.entries.size(); ++i) {
        const auto& e = gallery.entries[i];
        if (e.feature.size() != v.size())
            throw std::invalid_argument("euclidean_match: feature dimension mismatch");
        const double d2 = (e.feature - v).squaredNorm();
        if (best_d2 < 0.0 || d2 < best_d2) {
            best_d2 = d2;
            best = i;
        }
    }
    return {gallery.entries[best].label, std::sqrt(best_d2)};
}

// --- training ----------------------------------------------------------------

namespace {

Eigen::VectorXd raw_feature(const ManifestEntry& e, const PreprocConfig& preproc, int keep) {
    const Image img = load_image(e.path);
    return dct_compress(preprocess_chain(img, preproc, e.crop), keep);
}

}  // namespace

TrainReport train_pipeline(const std::vector<ManifestEntry>& training,
                           const std::vector<ManifestEntry>& validation,
                           const TrainOptions& options) {
    if (training.empty()) throw std::invalid_argument("train_pipeline: empty manifest");
    std::set<std::string> label_set;
    for (const auto& e : training) label_set.insert(e.label);
    if (label_set.size() < 2) throw std::invalid_argument("train_pipeline: need >=2 classes");

    TrainReport report;
    PipelineModel& model = report.model;
    model.preproc = options.preproc;
    model.dct_keep = options.dct_keep;
    model.labels.assign(label_set.begin(), label_set.end());  // sorted

    const long count = static_cast<long>(training.size());
    Eigen::MatrixXd raw(static_cast<long>(options.dct_keep) * options.dct_keep, count);
    for (long i = 0; i < count; ++i)
        raw.col(i) = raw_feature(training[static_cast<size_t>(i)], model.preproc, model.dct_keep);

    const int m = static_cast<int>(
        std::min<long>({count - 1, raw.rows(), options.pca_components_cap}));
    model.pca = pca_fit(raw, m);

    Eigen::MatrixXd features(m, count);
    for (long i = 0; i < count; ++i)
        features.col(i) = model.pca.basis.transpose() * (raw.col(i) - model.pca.mean);

    const int n_classes = static_cast<int>(model.labels.size());
    Eigen::MatrixXd targets = Eigen::MatrixXd::Zero(n_classes, count);
    for (long i = 0; i < count; ++i) {
        const auto it = std::lower_bound(model.labels.begin(), model.labels.end(),
                                         training[static_cast<size_t>(i)].label);
        targets(it - model.labels.begin(), i) = 1.0;
    }

    model.net = mlp_init(m, options.hidden, n_classes, options.net.seed);
    report.curve = train(model.net, features, targets, options.net);
    if (report.curve.stop_reason != StopReason::goal_reached)
        throw TrainingFailure("train_pipeline: error goal not reached after " +
                                  std::to_string(report.curve.mse.size()) + " epochs (final MSE " +
                                  format_g9(report.curve.mse.back()) + ")",
                              report.curve);

    model.dual.primary.name = "primary";
    model.dual.secondary.name = "secondary";
    for (long i = 0; i < count; ++i) {
        const auto& e = training[static_cast<size_t>(i)];
        model.dual.primary.entries.push_back({e.label, features.col(i), e.path});
    }
    if (!validation.empty()) {
        for (const auto& e : validation) {
            const Eigen::VectorXd f =
                model.pca.basis.transpose() * (raw_feature(e, model.preproc, model.dct_keep) - model.pca.mean);
            model.dual.secondary.entries.push_back({e.label, f, e.path});
        }
    } else {
        // default split: the last training image of each label cross-checks it
        std::map<std::string, long> last;
        for (long i = 0; i < count; ++i) last[training[static_cast<size_t>(i)].label] = i;
        for (const auto& [label, idx] : last)
            model.dual.secondary.entries.push_back(
                {label, features.col(idx), training[static_cast<size_t>(idx)].path});
    }
    return report;
}

// --- recognition ---------------------------------------------------------------

MatchResult recognize(const Image& image, const PipelineModel& model, bool gate_enabled,
                      const DetectorConfig& detector, const std::optional<CropRect>& crop) {
    MatchResult r;
    if (gate_enabled) {
        r.gate = authenticate(image, detector);
        if (r.gate->label == Authenticity::Forged) return r;
    }
    const Eigen::VectorXd v = extract_features(image, model, crop);
    const Eigen::VectorXd y = forward(model.net, v);
    long arg = 0;
    y.maxCoeff(&arg);
    r.recognized = true;
    r.label = model.labels[static_cast<size_t>(arg)];
    r.network_confidence = y[arg];
    std::tie(r.nn_label, r.nn_distance) = euclidean_match(v, model.dual.primary);
    r.agreement = r.label == r.nn_label;
    if (!model.dual.secondary.entries.empty()) {
        std::tie(r.secondary_label, r.secondary_distance) =
            euclidean_match(v, model.dual.secondary);
        r.secondary_disagrees = r.secondary_label != r.label;
    }
    return r;
}

// --- persistence ---------------------------------------------------------------

namespace {

constexpr char kMagic[7] = {'V', 'F', 'M', 'O', 'D', 'E', 'L'};

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    put_u64(out, bits);
}

void put_string(std::string& out, const std::string& s) {
    put_u64(out, s.size());
    out += s;
}

void put_matrix(std::string& out, const Eigen::MatrixXd& m) {
    put_u64(out, static_cast<std::uint64_t>(m.rows()));
    put_u64(out, static_cast<std::uint64_t>(m.cols()));
    for (long c = 0; c < m.cols(); ++c)
        for (long r = 0; r < m.rows(); ++r) put_f64(out, m(r, c));
}

void put_gallery(std::string& out, const Gallery& g) {
    put_string(out, g.name);
    put_u64(out, g.entries.size());
    for (const auto& e : g.entries) {
        put_string(out, e.label);
        put_string(out, e.source_path);
        put_u64(out, static_cast<std::uint64_t>(e.feature.size()));
        for (long i = 0; i < e.feature.size(); ++i) put_f64(out, e.feature[i]);
    }
}

class Reader {
 public:
    Reader(const unsigned char* data, size_t size, std::string path)
        : data_(data), size_(size), path_(std::move(path)) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(data_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(data_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }
    double f64() {
        const std::uint64_t bits = u64();
        double d;
        std::memcpy(&d, &bits, 8);
        return d;
    }
    std::string str() {
        const std::uint64_t n = u64();
        need(n);
        std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
        pos_ += n;
        return s;
    }
    Eigen::MatrixXd matrix() {
        const auto rows = static_cast<long>(u64());
        const auto cols = static_cast<long>(u64());
        if (rows < 0 || cols < 0 || double(rows) * double(cols) > 1e9)
            throw IoError(path_ + ": corrupt model file (matrix size)");
        Eigen::MatrixXd m(rows, cols);
        for (long c = 0; c < cols; ++c)
            for (long r = 0; r < rows; ++r) m(r, c) = f64();
        return m;
    }
    Gallery gallery() {
        Gallery g;
        g.name = str();
        const std::uint64_t n = u64();
        for (std::uint64_t i = 0; i < n; ++i) {
            GalleryEntry e;
            e.label = str();
            e.source_path = str();
            const std::uint64_t dim = u64();
            e.feature.resize(static_cast<long>(dim));
            for (std::uint64_t j = 0; j < dim; ++j) e.feature[static_cast<long>(j)] = f64();
            g.entries.push_back(std::move(e));
        }
        return g;
    }
    void seek(size_t pos) {
        if (pos > size_) throw IoError(path_ + ": corrupt model file (bad section offset)");
        pos_ = pos;
    }
    size_t pos() const { return pos_; }

 private:
    void need(std::uint64_t n) {
        if (pos_ + n > size_) throw IoError(path_ + ": corrupt model file (short read)");
    }
    const unsigned char* data_;
    size_t size_;
    size_t pos_ = 0;
    std::string path_;
};

}  // namespace

void save_model(const PipelineModel& model, const std::string& path) {
    struct Section {
        const char* tag;
        std::string payload;
    };
    std::vector<Section> sections;

    {
        std::string s;
        put_u64(s, static_cast<std::uint64_t>(model.preproc.filter_size));
        put_f64(s, model.preproc.stretch_low_pct);
        put_f64(s, model.preproc.stretch_high_pct);
        put_u64(s, static_cast<std::uint64_t>(model.preproc.target_width));
        put_u64(s, static_cast<std::uint64_t>(model.preproc.target_height));
        put_u64(s, static_cast<std::uint64_t>(model.preproc.resize_kernel.kind));
        put_f64(s, model.preproc.resize_kernel.cubic_a);
        sections.push_back({"PREP", std::move(s)});
    }
    {
        std::string s;
        put_u64(s, static_cast<std::uint64_t>(model.dct_keep));
        sections.push_back({"DCTK", std::move(s)});
    }
    {
        std::string s;
        put_u64(s, static_cast<std::uint64_t>(model.pca.m));
        put_matrix(s, model.pca.mean);
        put_matrix(s, model.pca.basis);
        put_matrix(s, model.pca.eigenvalues);
        sections.push_back({"PCA0", std::move(s)});
    }
    {
        std::string s;
        put_matrix(s, model.net.w1);
        put_matrix(s, model.net.b1);
        put_matrix(s, model.net.w2);
        put_matrix(s, model.net.b2);
        sections.push_back({"NET0", std::move(s)});
    }
    {
        std::string s;
        put_u64(s, model.labels.size());
        for (const auto& l : model.labels) put_string(s, l);
        sections.push_back({"LABL", std::move(s)});
    }
    {
        std::string s;
        put_gallery(s, model.dual.primary);
        sections.push_back({"GALP", std::move(s)});
    }
    {
        std::string s;
        put_gallery(s, model.dual.secondary);
        sections.push_back({"GALS", std::move(s)});
    }

    std::string out(kMagic, sizeof(kMagic));
    put_u32(out, model.version);
    put_u32(out, static_cast<std::uint32_t>(sections.size()));
    const size_t table_at = out.size();
    std::uint64_t offset = out.size() + sections.size() * 20;  // tag + offset + size
    std::string table;
    for (const auto& s : sections) {
        table.append(s.tag, 4);
        put_u64(table, offset);
        put_u64(table, s.payload.size());
        offset += s.payload.size();
    }
    out.insert(table_at, table);
    for (const auto& s : sections) out += s.payload;
    const std::uint32_t crc = static_cast<std::uint32_t>(
        crc32(crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef*>(out.data()),
              static_cast<uInt>(out.size())));
    put_u32(out, crc);
    write_file_atomic(path, out);
}

PipelineModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path + ": cannot open file");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < sizeof(kMagic) + 12 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
        throw IoError(path + ": not a model file");
    const std::uint32_t want = static_cast<std::uint32_t>(
        crc32(crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef*>(bytes.data()),
              static_cast<uInt>(bytes.size() - 4)));
    std::uint32_t got = 0;
    for (int i = 0; i < 4; ++i)
        got |= std::uint32_t(static_cast<unsigned char>(bytes[bytes.size() - 4 + i])) << (8 * i);
    if (want != got) throw IoError(path + ": model file checksum mismatch");

    Reader r(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size() - 4, path);
    r.seek(sizeof(kMagic));
    PipelineModel model;
    model.version = r.u32();
    if (model.version != kModelVersion)
        throw IoError(path + ": unsupported model version " + std::to_string(model.version));
    const std::uint32_t n_sections = r.u32();
    std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> table;
    for (std::uint32_t i = 0; i < n_sections; ++i) {
        r.seek(sizeof(kMagic) + 8 + i * 20);
        std::string tag(4, '\0');
        for (int j = 0; j < 4; ++j) tag[j] = bytes[r.pos() + j];
        r.seek(r.pos() + 4);
        const std::uint64_t off = r.u64();
        const std::uint64_t size = r.u64();
        table[tag] = {off, size};
    }
    auto section = [&](const char* tag) {
        const auto it = table.find(tag);
        if (it == table.end())
            throw IoError(path + ": corrupt model file (missing section " + tag + ")");
        r.seek(it->second.first);
    };

    section("PREP");
    model.preproc.filter_size = static_cast<int>(r.u64());
    model.preproc.stretch_low_pct = r.f64();
    model.preproc.stretch_high_pct = r.f64();
    model.preproc.target_width = static_cast<int>(r.u64());
    model.preproc.target_height = static_cast<int>(r.u64());
    model.preproc.resize_kernel.kind = static_cast<KernelKind>(r.u64());
    model.preproc.resize_kernel.cubic_a = r.f64();

    section("DCTK");
    model.dct_keep = static_cast<int>(r.u64());

    section("PCA0");
    model.pca.m = static_cast<int>(r.u64());
    model.pca.mean = r.matrix();
    model.pca.basis = r.matrix();
    model.pca.eigenvalues = r.matrix();

    section("NET0");
    model.net.w1 = r.matrix();
    model.net.b1 = r.matrix();
    model.net.w2 = r.matrix();
    model.net.b2 = r.matrix();

    section("LABL");
    const std::uint64_t n_labels = r.u64();
    for (std::uint64_t i = 0; i < n_labels; ++i) model.labels.push_back(r.str());

    section("GALP");
    model.dual.primary = r.gallery();
    section("GALS");
    model.dual.secondary = r.gallery();
    return model;
}

// --- evaluation ------------------------------------------------------------------

EvalReport evaluate(const PipelineModel& model, const std::vector<ManifestEntry>& manifest) {
    if (manifest.empty()) throw std::invalid_argument("evaluate: empty manifest");
    EvalReport report;
    std::map<std::string, EvalRow> rows;
    double nn_sum = 0.0;
    for (const auto& e : manifest) {
        const Image img = load_image(e.path);
        const MatchResult r = recognize(img, model, /*gate_enabled=*/false, {}, e.crop);
        auto& row = rows[e.label];
        row.label = e.label;
        row.total++;
        if (r.label == e.label) row.correct++;
        nn_sum += r.nn_distance;
        report.total++;
        if (r.label == e.label) report.correct++;
    }
    for (auto& [label, row] : rows) {
        row.accuracy = double(row.correct) / double(row.total);
        report.per_label.push_back(row);
    }
    report.accuracy = double(report.correct) / double(report.total);
    report.mean_nn_distance = nn_sum / double(report.total);
    return report;
}

void write_eval_csv(const EvalReport& report, const std::string& path) {
    std::string out = "label,total,correct,accuracy\n";
    for (const auto& row : report.per_label) {
        out += row.label + "," + std::to_string(row.total) + "," +
               std::to_string(row.correct) + "," + format_g9(row.accuracy) + "\n";
    }
    out += "ALL," + std::to_string(report.total) + "," + std::to_string(report.correct) + "," +
           format_g9(report.accuracy) + "\n";
    write_file_atomic(path, out);
}

}  // namespace vface
