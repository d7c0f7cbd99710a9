#include "tsa/sgbp.hpp"

#include <cmath>

namespace tsa {

SgbpNet sgbp_init(int input_dim, int hidden, std::uint64_t seed) {
    if (input_dim < 1 || hidden < 1) throw ConfigError("sgbp_init: invalid dimensions");
    SgbpNet net;
    net.w1.resize(hidden, input_dim);
    net.b1.resize(hidden);
    net.w2.resize(hidden);
    Rng rng(seed);
    for (int i = 0; i < hidden; ++i) {
        for (int j = 0; j < input_dim; ++j) net.w1(i, j) = rng.uniform(-1.0, 1.0);
        net.b1(i) = rng.uniform(-1.0, 1.0);
        net.w2(i) = rng.uniform(-1.0, 1.0);
    }
    net.b2 = rng.uniform(-1.0, 1.0);
    return net;
}

namespace {

Eigen::VectorXd hidden_activations(const SgbpNet& net, const Eigen::VectorXd& x) {
    Eigen::VectorXd z = net.w1 * x + net.b1;
    return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

}  // namespace

double sgbp_forward(const SgbpNet& net, const Eigen::VectorXd& x) {
    if (x.size() != net.w1.cols()) throw InputError("sgbp_forward: dimension mismatch");
    return net.w2 * hidden_activations(net, x) + net.b2;
}

SgbpGradients sgbp_gradients(const SgbpNet& net, const Eigen::VectorXd& x, double t) {
    Eigen::VectorXd h = hidden_activations(net, x);
    double y = net.w2 * h + net.b2;
    double err = y - t;

    SgbpGradients grad;
    grad.w2 = err * h.transpose();
    grad.b2 = err;
    Eigen::VectorXd dh =
        err * net.w2.transpose().cwiseProduct(h.cwiseProduct(Eigen::VectorXd::Ones(h.size()) - h));
    grad.w1 = dh * x.transpose();
    grad.b1 = dh;
    return grad;
}

void sgbp_train_sample(SgbpNet& net, const Sample& sample, double learning_rate) {
    SgbpGradients grad = sgbp_gradients(net, sample.x, sample.t(0));
    net.w1 -= learning_rate * grad.w1;
    net.b1 -= learning_rate * grad.b1;
    net.w2 -= learning_rate * grad.w2;
    net.b2 -= learning_rate * grad.b2;
}

}  // namespace tsa
