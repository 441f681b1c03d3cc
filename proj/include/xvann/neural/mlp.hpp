#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace xvann::neural {

enum class Activation { Tanh, Relu, Sigmoid };

Activation parse_activation(const std::string& name);
std::string to_string(Activation a);

// Fully connected network: hidden layers with activations, linear output.
struct MlpSpec {
    std::size_t input = 1;
    std::vector<std::size_t> hidden;
    std::size_t output = 1;
    std::vector<Activation> activations;  // one per hidden layer
    bool bias = true;

    // Two hidden layers of width d + extra, as used for the Delta networks.
    static MlpSpec delta_net(std::size_t d, std::size_t extra, Activation act, bool bias = true,
                             std::size_t input = 0);

    std::size_t layers() const { return hidden.size() + 1; }
    std::size_t fan_in(std::size_t l) const { return l == 0 ? input : hidden[l - 1]; }
    std::size_t fan_out(std::size_t l) const { return l == hidden.size() ? output : hidden[l]; }
    std::size_t param_count() const;
    void validate() const;
};

// Reusable per-batch buffers holding the layer activations of one forward pass.
struct MlpWorkspace {
    std::vector<Eigen::MatrixXd> act;  // act[0] = input, act[l+1] = output of layer l
    Eigen::MatrixXd grad[2];           // scratch for the reverse pass
};

struct LayerParams {
    Eigen::MatrixXd weight;  // fan_out x fan_in
    Eigen::VectorXd bias;    // empty when the spec has no biases
};

// Stateless evaluator over flat parameter vectors. Layout per layer: weight
// matrix (fan_out x fan_in, column-major) followed by the bias vector.
class Mlp {
   public:
    Mlp() = default;
    explicit Mlp(MlpSpec spec);

    const MlpSpec& spec() const { return spec_; }
    std::size_t size() const { return size_; }
    std::size_t weight_offset(std::size_t l) const { return offsets_[l]; }
    std::size_t bias_offset(std::size_t l) const { return offsets_[l] + spec_.fan_out(l) * spec_.fan_in(l); }

    // Glorot-uniform weights, zero biases, deterministic in seed.
    void init(std::span<double> params, std::uint64_t seed) const;

    std::vector<LayerParams> unpack(std::span<const double> params) const;
    std::vector<double> pack(const std::vector<LayerParams>& layers) const;

    Eigen::VectorXd forward(std::span<const double> params, const Eigen::VectorXd& x) const;

    // x is input x batch; result is output x batch. Activations are kept in ws.
    const Eigen::MatrixXd& forward_batch(std::span<const double> params, const Eigen::MatrixXd& x,
                                         MlpWorkspace& ws) const;

    // Reverse pass after forward_batch on the same ws: adds upstream^T d(out)/d(params)
    // summed over the batch into grad; writes the input gradient when grad_x is given.
    void backward_batch(std::span<const double> params, const Eigen::MatrixXd& upstream,
                        MlpWorkspace& ws, std::span<double> grad, Eigen::MatrixXd* grad_x = nullptr) const;

    // Single-sample reverse pass.
    void backward(std::span<const double> params, const Eigen::VectorXd& x, const Eigen::VectorXd& upstream,
                  std::span<double> grad, Eigen::VectorXd* grad_x = nullptr) const;

   private:
    MlpSpec spec_;
    std::size_t size_ = 0;
    std::vector<std::size_t> offsets_;
};

}  // namespace xvann::neural
