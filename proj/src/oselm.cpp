#include "tsa/oselm.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <iostream>

namespace tsa {

std::string to_string(Activation a) {
    switch (a) {
        case Activation::sigmoid: return "sigmoid";
        case Activation::rbf: return "rbf";
        case Activation::polynomial: return "polynomial";
    }
    return "sigmoid";
}

Activation activation_from_string(const std::string& s) {
    if (s == "sigmoid") return Activation::sigmoid;
    if (s == "rbf") return Activation::rbf;
    if (s == "polynomial") return Activation::polynomial;
    throw ConfigError("unknown activation: " + s);
}

HiddenLayer init_hidden(int input_dim, int node_count, Activation activation,
                        std::uint64_t seed) {
    if (input_dim < 1) throw ConfigError("init_hidden: input_dim must be >= 1");
    if (node_count < 1) throw ConfigError("init_hidden: node count L must be >= 1");

    HiddenLayer layer;
    layer.input_dim = input_dim;
    layer.node_count = node_count;
    layer.activation = activation;
    layer.seed = seed;
    layer.weights.resize(node_count, input_dim);
    layer.biases.resize(node_count);

    Rng rng(seed);
    for (int i = 0; i < node_count; ++i) {
        for (int j = 0; j < input_dim; ++j) layer.weights(i, j) = rng.uniform(-1.0, 1.0);
        layer.biases(i) = rng.uniform();
    }
    return layer;
}

namespace {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double node_output(const HiddenLayer& layer, int node, const Eigen::VectorXd& x) {
    switch (layer.activation) {
        case Activation::sigmoid:
            return sigmoid(layer.weights.row(node).dot(x) + layer.biases(node));
        case Activation::rbf: {
            // centers a_i, width from b_i (kept strictly positive)
            double d2 = (x.transpose() - layer.weights.row(node)).squaredNorm();
            double width = layer.biases(node) + 1e-3;
            return std::exp(-width * d2);
        }
        case Activation::polynomial: {
            double z = layer.weights.row(node).dot(x) + layer.biases(node);
            return z * z;
        }
    }
    return 0.0;
}

}  // namespace

Eigen::MatrixXd hidden_output(const HiddenLayer& layer, const Eigen::MatrixXd& X) {
    if (X.cols() != layer.input_dim)
        throw InputError("hidden_output: sample dimension " + std::to_string(X.cols()) +
                         " does not match input_dim " + std::to_string(layer.input_dim));
    const auto n = X.rows();
    if (layer.activation == Activation::sigmoid) {
        // H = sigmoid(X A' + 1 b')
        Eigen::MatrixXd z = X * layer.weights.transpose();
        z.rowwise() += layer.biases.transpose();
        return z.unaryExpr([](double v) { return sigmoid(v); });
    }
    Eigen::MatrixXd h(n, layer.node_count);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd x = X.row(i).transpose();
        for (int j = 0; j < layer.node_count; ++j) h(i, j) = node_output(layer, j, x);
    }
    return h;
}

Eigen::RowVectorXd hidden_row(const HiddenLayer& layer, const Eigen::VectorXd& x) {
    if (x.size() != layer.input_dim)
        throw InputError("hidden_row: sample dimension " + std::to_string(x.size()) +
                         " does not match input_dim " + std::to_string(layer.input_dim));
    Eigen::RowVectorXd h(layer.node_count);
    for (int j = 0; j < layer.node_count; ++j) h(j) = node_output(layer, j, x);
    return h;
}

void stack_samples(const std::vector<Sample>& data, Eigen::MatrixXd& X,
                   Eigen::MatrixXd& T) {
    if (data.empty()) throw InputError("stack_samples: empty sample set");
    const auto d = data.front().x.size();
    const auto m = data.front().t.size();
    X.resize(static_cast<Eigen::Index>(data.size()), d);
    T.resize(static_cast<Eigen::Index>(data.size()), m);
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data[i].x.size() != d || data[i].t.size() != m)
            throw InputError("stack_samples: inconsistent sample shapes");
        if (!data[i].x.allFinite())
            throw InputError("stack_samples: non-finite feature value at row " +
                             std::to_string(i));
        X.row(static_cast<Eigen::Index>(i)) = data[i].x.transpose();
        T.row(static_cast<Eigen::Index>(i)) = data[i].t.transpose();
    }
}

namespace {

void symmetrize(Eigen::MatrixXd& p) { p = 0.5 * (p + p.transpose()).eval(); }

}  // namespace

OselmState init_phase(const HiddenLayer& layer, const std::vector<Sample>& d0) {
    const auto n0 = static_cast<long>(d0.size());
    if (n0 < layer.node_count)
        throw ConfigError("init_phase: N0 = " + std::to_string(n0) +
                          " is smaller than L = " + std::to_string(layer.node_count));

    Eigen::MatrixXd x0, t0;
    stack_samples(d0, x0, t0);
    Eigen::MatrixXd h0 = hidden_output(layer, x0);
    Eigen::MatrixXd a = h0.transpose() * h0;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    bool ridged = false;
    if (!lu.isInvertible()) {
        double eps = 1e-8 * a.trace() / layer.node_count;
        std::cerr << "tsa: init_phase: H0'H0 is singular, using ridge eps=" << eps
                  << "\n";
        a += eps * Eigen::MatrixXd::Identity(layer.node_count, layer.node_count);
        lu.compute(a);
        ridged = true;
    }

    OselmState state;
    state.layer = layer;
    state.output_dim = static_cast<int>(t0.cols());
    state.P = lu.inverse();
    symmetrize(state.P);
    // beta0 = P0 H0' T0; the unridged case is solved by QR, which computes
    // the same least-squares solution without squaring the conditioning
    state.beta = ridged ? (state.P * h0.transpose() * t0).eval()
                        : h0.colPivHouseholderQr().solve(t0).eval();
    state.chunk_count = 0;
    return state;
}

void update_chunk(OselmState& state, std::span<const Sample> chunk) {
    if (chunk.empty()) throw InputError("update_chunk: empty chunk");
    if (state.beta.rows() != state.layer.node_count)
        throw ConfigError("update_chunk: state not initialized");

    const auto c = static_cast<Eigen::Index>(chunk.size());
    Eigen::MatrixXd h(c, state.layer.node_count);
    Eigen::MatrixXd t(c, state.output_dim);
    for (Eigen::Index i = 0; i < c; ++i) {
        h.row(i) = hidden_row(state.layer, chunk[i].x);
        t.row(i) = chunk[i].t.transpose();
    }

    Eigen::MatrixXd pht = state.P * h.transpose();                     // L x c
    Eigen::MatrixXd s = Eigen::MatrixXd::Identity(c, c) + h * pht;     // c x c
    Eigen::MatrixXd gain = s.ldlt().solve(pht.transpose());            // c x L
    state.P -= pht * gain;
    symmetrize(state.P);
    state.beta += state.P * h.transpose() * (t - h * state.beta);
    ++state.chunk_count;

    if (!state.P.allFinite() || !state.beta.allFinite())
        throw NumericError("update_chunk: non-finite update at chunk " +
                           std::to_string(state.chunk_count));
}

void update_one(OselmState& state, const Sample& sample) {
    if (state.beta.rows() != state.layer.node_count)
        throw ConfigError("update_one: state not initialized");

    Eigen::VectorXd h = hidden_row(state.layer, sample.x).transpose();
    Eigen::VectorXd ph = state.P * h;
    double denom = 1.0 + h.dot(ph);
    state.P -= (ph * ph.transpose()) / denom;
    symmetrize(state.P);
    state.beta += (state.P * h) * (sample.t.transpose() - h.transpose() * state.beta);
    ++state.chunk_count;

    if (!state.P.allFinite() || !state.beta.allFinite())
        throw NumericError("update_one: non-finite update at chunk " +
                           std::to_string(state.chunk_count));
}

Prediction predict(const OselmState& state, const Eigen::VectorXd& x) {
    Prediction out;
    out.score = (hidden_row(state.layer, x) * state.beta).transpose();
    out.label = out.score(0) >= 0.0 ? 1 : -1;
    return out;
}

Eigen::MatrixXd batch_elm(const HiddenLayer& layer, const std::vector<Sample>& data) {
    if (static_cast<long>(data.size()) < layer.node_count)
        throw ConfigError("batch_elm: need at least L samples");
    Eigen::MatrixXd x, t;
    stack_samples(data, x, t);
    Eigen::MatrixXd h = hidden_output(layer, x);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(h, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.rank() < layer.node_count)
        std::cerr << "tsa: batch_elm: rank-deficient H (rank " << svd.rank() << " < L "
                  << layer.node_count << "), returning minimum-norm solution\n";
    return svd.solve(t);
}

double relative_frobenius_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    double denom = std::max(b.norm(), 1e-300);
    return (a - b).norm() / denom;
}

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
    const auto rows = j.size();
    if (rows == 0) return {};
    const auto cols = j.at(0).size();
    Eigen::MatrixXd m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t k = 0; k < cols; ++k)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                j.at(i).at(k).get<double>();
    return m;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = j.at(i).get<double>();
    return v;
}

}  // namespace

nlohmann::json to_json(const HiddenLayer& layer) {
    return {
        {"input_dim", layer.input_dim},
        {"hidden_nodes", layer.node_count},
        {"activation", to_string(layer.activation)},
        {"seed", layer.seed},
        {"weights", matrix_to_json(layer.weights)},
        {"biases", vector_to_json(layer.biases)},
    };
}

HiddenLayer hidden_layer_from_json(const nlohmann::json& j) {
    HiddenLayer layer;
    layer.input_dim = j.at("input_dim").get<int>();
    layer.node_count = j.at("hidden_nodes").get<int>();
    layer.activation = activation_from_string(j.at("activation").get<std::string>());
    layer.seed = j.at("seed").get<std::uint64_t>();
    layer.weights = matrix_from_json(j.at("weights"));
    layer.biases = vector_from_json(j.at("biases"));
    if (layer.weights.rows() != layer.node_count ||
        layer.weights.cols() != layer.input_dim ||
        layer.biases.size() != layer.node_count)
        throw InputError("hidden_layer_from_json: inconsistent shapes");
    return layer;
}

nlohmann::json to_json(const OselmState& state) {
    return {
        {"format", "tsa-oselm"},
        {"layer", to_json(state.layer)},
        {"beta", matrix_to_json(state.beta)},
        {"P", matrix_to_json(state.P)},
        {"chunk_count", state.chunk_count},
        {"output_dim", state.output_dim},
    };
}

OselmState oselm_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "tsa-oselm")
        throw InputError("oselm_from_json: not a tsa-oselm document");
    OselmState state;
    state.layer = hidden_layer_from_json(j.at("layer"));
    state.beta = matrix_from_json(j.at("beta"));
    state.P = matrix_from_json(j.at("P"));
    state.chunk_count = j.at("chunk_count").get<long>();
    state.output_dim = j.at("output_dim").get<int>();
    if (state.beta.rows() != state.layer.node_count)
        throw InputError("oselm_from_json: beta row count does not match L");
    return state;
}

}  // namespace tsa
