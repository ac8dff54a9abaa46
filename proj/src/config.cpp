#include "vface/config.hpp"

#include "vface/io_util.hpp"

#include <fstream>
#include <sstream>

namespace vface {
namespace {

double parse_real(const std::string& key, const std::string& value) {
    size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad numeric value for " + key + ": " + value);
    }
    if (used != value.size())
        throw std::invalid_argument("config: bad numeric value for " + key + ": " + value);
    return v;
}

long parse_int(const std::string& key, const std::string& value) {
    size_t used = 0;
    long v = 0;
    try {
        v = std::stol(value, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad integer value for " + key + ": " + value);
    }
    if (used != value.size())
        throw std::invalid_argument("config: bad integer value for " + key + ": " + value);
    return v;
}

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("config: " + what);
}

}  // namespace

void ToolConfig::set(const std::string& key, const std::string& value) {
    if (key == "detector.threshold") {
        detector.threshold = parse_real(key, value);
        require(detector.threshold > 0.0, "detector.threshold must be positive");
    } else if (key == "detector.f_lo") {
        detector.f_lo = parse_real(key, value);
        require(detector.f_lo >= 0.0 && detector.f_lo < 0.5, "detector.f_lo must be in [0, 0.5)");
    } else if (key == "detector.max_lag") {
        detector.max_lag_cap = static_cast<int>(parse_int(key, value));
        require(detector.max_lag_cap >= 16 && detector.max_lag_cap <= 256,
                "detector.max_lag must be in [16, 256]");
    } else if (key == "detector.flat_floor") {
        detector.flat_floor = parse_real(key, value);
        require(detector.flat_floor >= 0.0, "detector.flat_floor must be non-negative");
    } else if (key == "preproc.filter_size") {
        const long v = parse_int(key, value);
        require(v >= 1 && v % 2 == 1, "preproc.filter_size must be odd and positive");
        train.preproc.filter_size = static_cast<int>(v);
    } else if (key == "preproc.stretch_low_pct") {
        train.preproc.stretch_low_pct = parse_real(key, value);
        require(train.preproc.stretch_low_pct >= 0.0 && train.preproc.stretch_low_pct < 100.0,
                "preproc.stretch_low_pct must be in [0, 100)");
    } else if (key == "preproc.stretch_high_pct") {
        train.preproc.stretch_high_pct = parse_real(key, value);
        require(train.preproc.stretch_high_pct > 0.0 && train.preproc.stretch_high_pct < 100.0,
                "preproc.stretch_high_pct must be in (0, 100)");
    } else if (key == "preproc.target_width") {
        const long v = parse_int(key, value);
        require(v >= 1, "preproc.target_width must be positive");
        train.preproc.target_width = static_cast<int>(v);
    } else if (key == "preproc.target_height") {
        const long v = parse_int(key, value);
        require(v >= 1, "preproc.target_height must be positive");
        train.preproc.target_height = static_cast<int>(v);
    } else if (key == "features.dct_keep") {
        const long v = parse_int(key, value);
        require(v >= 1, "features.dct_keep must be positive");
        train.dct_keep = static_cast<int>(v);
    } else if (key == "features.pca_m") {
        const long v = parse_int(key, value);
        require(v >= 1, "features.pca_m must be positive");
        train.pca_components_cap = static_cast<int>(v);
    } else if (key == "net.hidden") {
        const long v = parse_int(key, value);
        require(v >= 1, "net.hidden must be positive");
        train.hidden = static_cast<int>(v);
    } else if (key == "net.learning_rate") {
        train.net.learning_rate = parse_real(key, value);
        require(train.net.learning_rate > 0.0, "net.learning_rate must be positive");
    } else if (key == "net.momentum") {
        train.net.momentum = parse_real(key, value);
        require(train.net.momentum >= 0.0 && train.net.momentum < 1.0,
                "net.momentum must be in [0, 1)");
    } else if (key == "net.error_goal") {
        train.net.error_goal = parse_real(key, value);
        require(train.net.error_goal > 0.0, "net.error_goal must be positive");
    } else if (key == "net.max_epochs") {
        const long v = parse_int(key, value);
        require(v >= 1, "net.max_epochs must be positive");
        train.net.max_epochs = static_cast<int>(v);
    } else if (key == "seed") {
        seed = static_cast<std::uint64_t>(parse_int(key, value));
        train.net.seed = seed;
    } else {
        throw std::invalid_argument("config: unknown key " + key);
    }
    require(train.preproc.stretch_low_pct < train.preproc.stretch_high_pct,
            "stretch percentiles must satisfy low < high");
}

ToolConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path + ": cannot open file");
    ToolConfig config;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        // trim
        const size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        const size_t e = line.find_last_not_of(" \t\r");
        line = line.substr(b, e - b + 1);
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                        ": expected key=value");
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        const size_t ke = key.find_last_not_of(" \t");
        key = ke == std::string::npos ? "" : key.substr(0, ke + 1);
        const size_t vb = value.find_first_not_of(" \t");
        value = vb == std::string::npos ? "" : value.substr(vb);
        config.set(key, value);
    }
    return config;
}

std::string config_to_string(const ToolConfig& c) {
    std::string out;
    out += "detector.threshold=" + format_g9(c.detector.threshold) + "\n";
    out += "detector.f_lo=" + format_g9(c.detector.f_lo) + "\n";
    out += "detector.max_lag=" + std::to_string(c.detector.max_lag_cap) + "\n";
    out += "detector.flat_floor=" + format_g9(c.detector.flat_floor) + "\n";
    out += "preproc.filter_size=" + std::to_string(c.train.preproc.filter_size) + "\n";
    out += "preproc.stretch_low_pct=" + format_g9(c.train.preproc.stretch_low_pct) + "\n";
    out += "preproc.stretch_high_pct=" + format_g9(c.train.preproc.stretch_high_pct) + "\n";
    out += "preproc.target_width=" + std::to_string(c.train.preproc.target_width) + "\n";
    out += "preproc.target_height=" + std::to_string(c.train.preproc.target_height) + "\n";
    out += "features.dct_keep=" + std::to_string(c.train.dct_keep) + "\n";
    out += "features.pca_m=" + std::to_string(c.train.pca_components_cap) + "\n";
    out += "net.hidden=" + std::to_string(c.train.hidden) + "\n";
    out += "net.learning_rate=" + format_g9(c.train.net.learning_rate) + "\n";
    out += "net.momentum=" + format_g9(c.train.net.momentum) + "\n";
    out += "net.error_goal=" + format_g9(c.train.net.error_goal) + "\n";
    out += "net.max_epochs=" + std::to_string(c.train.net.max_epochs) + "\n";
    out += "seed=" + std::to_string(c.seed) + "\n";
    return out;
}

}  // namespace vface
