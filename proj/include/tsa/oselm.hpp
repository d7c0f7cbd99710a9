#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tsa/common.hpp"
#include "json.hpp"

namespace tsa {

enum class Activation { sigmoid, rbf, polynomial };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

// The frozen random feature map shared by batch ELM and OS-ELM.
// weights row i = a_i, biases(i) = b_i. Immutable after construction.
struct HiddenLayer {
    int input_dim = 0;
    int node_count = 0;  // L
    Eigen::MatrixXd weights;  // L x input_dim
    Eigen::VectorXd biases;   // L
    Activation activation = Activation::sigmoid;
    std::uint64_t seed = 0;
};

// a_i components uniform on [-1, 1], b_i uniform on [0, 1].
HiddenLayer init_hidden(int input_dim, int node_count, Activation activation,
                        std::uint64_t seed);

// Row i = [G(a_1,b_1,x_i) ... G(a_L,b_L,x_i)]. X is N x input_dim.
Eigen::MatrixXd hidden_output(const HiddenLayer& layer, const Eigen::MatrixXd& X);

// h(x) as a single row.
Eigen::RowVectorXd hidden_row(const HiddenLayer& layer, const Eigen::VectorXd& x);

struct Sample {
    Eigen::VectorXd x;
    Eigen::VectorXd t;
};

// Output weights beta and the covariance-like matrix P evolved by the
// recursive updates. Plain value type: copy before updating to keep a
// snapshot.
struct OselmState {
    HiddenLayer layer;
    Eigen::MatrixXd beta;  // L x m
    Eigen::MatrixXd P;     // L x L, kept symmetric
    long chunk_count = 0;  // k
    int output_dim = 0;    // m
};

// Initialization phase: P0 = (H0' H0)^-1, beta0 = P0 H0' T0.
// Requires |d0| >= L. A singular H0'H0 falls back to a ridge-regularized
// inverse (eps = 1e-8 * trace/L) with a warning on stderr.
OselmState init_phase(const HiddenLayer& layer, const std::vector<Sample>& d0);

// Sequential phase, chunk update:
//   P    <- P - P H' (I + H P H')^-1 H P
//   beta <- beta + P H' (T - H beta)
void update_chunk(OselmState& state, std::span<const Sample> chunk);

// Rank-1 specialization of the chunk update.
void update_one(OselmState& state, const Sample& sample);

struct Prediction {
    Eigen::VectorXd score;  // h(x) beta, length m
    int label = 0;          // sign of score(0); tie at 0 -> +1
};

Prediction predict(const OselmState& state, const Eigen::VectorXd& x);

// Minimum-norm least-squares solution of H beta = T over the whole set,
// used as the batch reference the sequential updates must reproduce.
Eigen::MatrixXd batch_elm(const HiddenLayer& layer, const std::vector<Sample>& data);

// Convenience: stack samples into X (N x d) and T (N x m).
void stack_samples(const std::vector<Sample>& data, Eigen::MatrixXd& X,
                   Eigen::MatrixXd& T);

double relative_frobenius_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

nlohmann::json to_json(const HiddenLayer& layer);
HiddenLayer hidden_layer_from_json(const nlohmann::json& j);
nlohmann::json to_json(const OselmState& state);
OselmState oselm_from_json(const nlohmann::json& j);

}  // namespace tsa
