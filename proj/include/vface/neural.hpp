#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace vface {

// Three-layer feed-forward network, logistic sigmoid on hidden and output.
struct Mlp {
    Eigen::MatrixXd w1;  // hidden x input
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2;  // output x hidden
    Eigen::VectorXd b2;

    int input_dim() const { return static_cast<int>(w1.cols()); }
    int hidden_dim() const { return static_cast<int>(w1.rows()); }
    int output_dim() const { return static_cast<int>(w2.rows()); }
};

struct TrainConfig {
    double error_goal = 1e-3;  // stop once batch MSE drops to this
    double learning_rate = 0.5;
    double momentum = 0.9;
    int max_epochs = 50000;
    std::uint64_t seed = 0;
};

enum class StopReason { goal_reached, max_epochs };

struct TrainingCurve {
    std::vector<double> mse;  // one entry per epoch, net state at epoch start
    StopReason stop_reason = StopReason::max_epochs;
};

// Weights drawn uniformly from +-1/sqrt(fan_in) with a seeded generator;
// biases zero. Same seed, same parameters.
Mlp mlp_init(int input_dim, int hidden_dim, int output_dim, std::uint64_t seed);

Eigen::VectorXd forward(const Mlp& net, const Eigen::VectorXd& x);
// Columns are samples.
Eigen::MatrixXd forward_batch(const Mlp& net, const Eigen::MatrixXd& inputs);

// Mean over samples and output units of (y - t)^2.
double mse(const Mlp& net, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets);

struct MlpVelocity {
    Eigen::MatrixXd w1, w2;
    Eigen::VectorXd b1, b2;

    static MlpVelocity zeros_like(const Mlp& net);
};

// One full-batch gradient step with momentum:
// v <- momentum * v - lr * grad(MSE); params += v.
void backprop_step(Mlp& net, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                   double learning_rate, double momentum, MlpVelocity& velocity);

// Full-batch epochs until MSE <= error_goal or max_epochs. The curve records
// the MSE at the start of every epoch; the returned net's MSE equals
// curve.mse.back().
TrainingCurve train(Mlp& net, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                    const TrainConfig& config);

// "epoch,mse" rows; epoch is 1-based.
void write_curve_csv(const TrainingCurve& curve, const std::string& path);
// 800x400 polyline of log10 MSE per epoch.
void write_curve_svg(const TrainingCurve& curve, const std::string& path);

}  // namespace vface
