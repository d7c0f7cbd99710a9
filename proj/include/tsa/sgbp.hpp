#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "tsa/oselm.hpp"

namespace tsa {

// Stochastic-gradient back-propagation baseline: one sigmoid hidden layer,
// linear output, squared-error loss on +/-1 targets.
struct SgbpNet {
    Eigen::MatrixXd w1;  // hidden x input
    Eigen::VectorXd b1;
    Eigen::RowVectorXd w2;  // 1 x hidden
    double b2 = 0.0;
};

struct SgbpGradients {
    Eigen::MatrixXd w1;
    Eigen::VectorXd b1;
    Eigen::RowVectorXd w2;
    double b2 = 0.0;
};

SgbpNet sgbp_init(int input_dim, int hidden, std::uint64_t seed);

double sgbp_forward(const SgbpNet& net, const Eigen::VectorXd& x);

// Analytic gradients of L = 0.5 (y - t)^2 for one sample.
SgbpGradients sgbp_gradients(const SgbpNet& net, const Eigen::VectorXd& x, double t);

// One SGD step on one sample.
void sgbp_train_sample(SgbpNet& net, const Sample& sample, double learning_rate);

inline int sgbp_label(const SgbpNet& net, const Eigen::VectorXd& x) {
    return sgbp_forward(net, x) >= 0.0 ? 1 : -1;
}

}  // namespace tsa
