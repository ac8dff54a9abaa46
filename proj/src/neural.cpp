#include "vface/neural.hpp"

#include "vface/io_util.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace vface {
namespace {

inline auto sigmoid(const Eigen::MatrixXd& z) {
    return (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

void check_batch(const Mlp& net, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets) {
    if (inputs.rows() != net.input_dim())
        throw std::invalid_argument("mlp: input dimension mismatch");
    if (targets.rows() != net.output_dim())
        throw std::invalid_argument("mlp: target dimension mismatch");
    if (inputs.cols() != targets.cols())
        throw std::invalid_argument("mlp: input/target count mismatch");
    if (inputs.cols() == 0) throw std::invalid_argument("mlp: empty batch");
}

}  // namespace

Mlp mlp_init(int input_dim, int hidden_dim, int output_dim, std::uint64_t seed) {
    if (input_dim < 1 || hidden_dim < 1 || output_dim < 1)
        throw std::invalid_argument("mlp_init: layer sizes must be positive");
    std::mt19937_64 rng(seed);
    Mlp net;
    net.w1.resize(hidden_dim, input_dim);
    net.w2.resize(output_dim, hidden_dim);
    net.b1 = Eigen::VectorXd::Zero(hidden_dim);
    net.b2 = Eigen::VectorXd::Zero(output_dim);
    const double r1 = 1.0 / std::sqrt(double(input_dim));
    std::uniform_real_distribution<double> d1(-r1, r1);
    for (int i = 0; i < hidden_dim; ++i)
        for (int j = 0; j < input_dim; ++j) net.w1(i, j) = d1(rng);
    const double r2 = 1.0 / std::sqrt(double(hidden_dim));
    std::uniform_real_distribution<double> d2(-r2, r2);
    for (int i = 0; i < output_dim; ++i)
        for (int j = 0; j < hidden_dim; ++j) net.w2(i, j) = d2(rng);
    return net;
}

Eigen::MatrixXd forward_batch(const Mlp& net, const Eigen::MatrixXd& inputs) {
    if (inputs.rows() != net.input_dim())
        throw std::invalid_argument("forward: input dimension mismatch");
    const Eigen::MatrixXd h = sigmoid((net.w1 * inputs).colwise() + net.b1);
    return sigmoid((net.w2 * h).colwise() + net.b2);
}

Eigen::VectorXd forward(const Mlp& net, const Eigen::VectorXd& x) {
    return forward_batch(net, x);
}

double mse(const Mlp& net, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets) {
    check_batch(net, inputs, targets);
    return (forward_batch(net, inputs) - targets).array().square().mean();
}

MlpVelocity MlpVelocity::zeros_like(const Mlp& net) {
    MlpVelocity v;
    v.w1 = Eigen::MatrixXd::Zero(net.w1.rows(), net.w1.cols());
    v.w2 = Eigen::MatrixXd::Zero(net.w2.rows(), net.w2.cols());
    v.b1 = Eigen::VectorXd::Zero(net.b1.size());
    v.b2 = Eigen::VectorXd::Zero(net.b2.size());
    return v;
}

void backprop_step(Mlp& net, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                   double learning_rate, double momentum, MlpVelocity& velocity) {
    check_batch(net, inputs, targets);
    const long n = inputs.cols();
    const Eigen::MatrixXd h = sigmoid((net.w1 * inputs).colwise() + net.b1);
    const Eigen::MatrixXd y = sigmoid((net.w2 * h).colwise() + net.b2);

    // gradient of mean((y - t)^2) over samples and units
    const double scale = 2.0 / double(n * net.output_dim());
    const Eigen::MatrixXd delta2 =
        (scale * (y - targets).array() * y.array() * (1.0 - y.array())).matrix();
    const Eigen::MatrixXd delta1 =
        ((net.w2.transpose() * delta2).array() * h.array() * (1.0 - h.array())).matrix();

    velocity.w2 = momentum * velocity.w2 - learning_rate * (delta2 * h.transpose());
    velocity.b2 = momentum * velocity.b2 - learning_rate * delta2.rowwise().sum();
    velocity.w1 = momentum * velocity.w1 - learning_rate * (delta1 * inputs.transpose());
    velocity.b1 = momentum * velocity.b1 - learning_rate * delta1.rowwise().sum();
    net.w2 += velocity.w2;
    net.b2 += velocity.b2;
    net.w1 += velocity.w1;
    net.b1 += velocity.b1;
}

TrainingCurve train(Mlp& net, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                    const TrainConfig& config) {
    check_batch(net, inputs, targets);
    if (!(config.error_goal > 0.0))
        throw std::invalid_argument("train: error goal must be positive");
    if (config.momentum < 0.0 || config.momentum >= 1.0)
        throw std::invalid_argument("train: momentum must be in [0, 1)");
    if (config.max_epochs < 1)
        throw std::invalid_argument("train: max_epochs must be positive");
    TrainingCurve curve;
    MlpVelocity velocity = MlpVelocity::zeros_like(net);
    for (;;) {
        const double err = mse(net, inputs, targets);
        curve.mse.push_back(err);
        if (err <= config.error_goal) {
            curve.stop_reason = StopReason::goal_reached;
            break;
        }
        if (static_cast<int>(curve.mse.size()) >= config.max_epochs) {
            curve.stop_reason = StopReason::max_epochs;
            break;
        }
        backprop_step(net, inputs, targets, config.learning_rate, config.momentum, velocity);
    }
    return curve;
}

void write_curve_csv(const TrainingCurve& curve, const std::string& path) {
    std::string out = "epoch,mse\n";
    for (size_t i = 0; i < curve.mse.size(); ++i) {
        out += std::to_string(i + 1);
        out += ',';
        out += format_g9(curve.mse[i]);
        out += '\n';
    }
    write_file_atomic(path, out);
}

void write_curve_svg(const TrainingCurve& curve, const std::string& path) {
    const double margin = 20.0, width = 800.0, height = 400.0;
    double lo = 1e300, hi = -1e300;
    for (double m : curve.mse) {
        const double l = std::log10(std::max(m, 1e-300));
        lo = std::min(lo, l);
        hi = std::max(hi, l);
    }
    if (hi <= lo) hi = lo + 1.0;
    std::string pts;
    char buf[64];
    const size_t n = curve.mse.size();
    for (size_t i = 0; i < n; ++i) {
        const double l = std::log10(std::max(curve.mse[i], 1e-300));
        const double px = margin + (width - 2 * margin) * (n > 1 ? double(i) / double(n - 1) : 0.0);
        const double py = height - margin - (height - 2 * margin) * (l - lo) / (hi - lo);
        std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", px, py);
        pts += buf;
    }
    if (!pts.empty()) pts.pop_back();
    std::string svg =
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 400\">\n"
        "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"1\" points=\"" +
        pts + "\"/>\n</svg>\n";
    write_file_atomic(path, svg);
}

}  // namespace vface
