#include "xvann/neural/mlp.hpp"

#include <cmath>

#include "xvann/errors.hpp"
#include "xvann/rng.hpp"

namespace xvann::neural {

Activation parse_activation(const std::string& name) {
    if (name == "tanh") return Activation::Tanh;
    if (name == "relu") return Activation::Relu;
    if (name == "sigmoid") return Activation::Sigmoid;
    throw ConfigError("unknown activation '" + name + "' (expected tanh, relu or sigmoid)");
}

std::string to_string(Activation a) {
    switch (a) {
        case Activation::Tanh: return "tanh";
        case Activation::Relu: return "relu";
        case Activation::Sigmoid: return "sigmoid";
    }
    return "?";
}

MlpSpec MlpSpec::delta_net(std::size_t d, std::size_t extra, Activation act, bool bias,
                           std::size_t input) {
    MlpSpec s;
    s.input = input == 0 ? d : input;
    s.hidden = {d + extra, d + extra};
    s.output = d;
    s.activations = {act, act};
    s.bias = bias;
    return s;
}

std::size_t MlpSpec::param_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < layers(); ++l) n += fan_out(l) * fan_in(l) + (bias ? fan_out(l) : 0);
    return n;
}

void MlpSpec::validate() const {
    if (input == 0 || output == 0) throw SpecError("network input and output widths must be >= 1");
    for (std::size_t w : hidden)
        if (w == 0) throw SpecError("hidden layer widths must be >= 1");
    if (activations.size() != hidden.size())
        throw SpecError("need exactly one activation per hidden layer");
}

Mlp::Mlp(MlpSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    std::size_t off = 0;
    for (std::size_t l = 0; l < spec_.layers(); ++l) {
        offsets_.push_back(off);
        off += spec_.fan_out(l) * spec_.fan_in(l) + (spec_.bias ? spec_.fan_out(l) : 0);
    }
    size_ = off;
}

void Mlp::init(std::span<double> params, std::uint64_t seed) const {
    if (params.size() != size_) throw DimensionError("parameter vector has the wrong length");
    std::fill(params.begin(), params.end(), 0.0);
    for (std::size_t l = 0; l < spec_.layers(); ++l) {
        const double fi = static_cast<double>(spec_.fan_in(l)), fo = static_cast<double>(spec_.fan_out(l));
        const double a = std::sqrt(6.0 / (fi + fo));
        const std::size_t nw = spec_.fan_out(l) * spec_.fan_in(l);
        for (std::size_t k = 0; k < nw; ++k)
            params[offsets_[l] + k] = a * (2.0 * counter_uniform(seed, 0x1417, l, k, 0) - 1.0);
    }
}

std::vector<LayerParams> Mlp::unpack(std::span<const double> params) const {
    if (params.size() != size_) throw DimensionError("parameter vector has the wrong length");
    std::vector<LayerParams> out(spec_.layers());
    for (std::size_t l = 0; l < spec_.layers(); ++l) {
        const auto fo = static_cast<Eigen::Index>(spec_.fan_out(l));
        const auto fi = static_cast<Eigen::Index>(spec_.fan_in(l));
        out[l].weight = Eigen::Map<const Eigen::MatrixXd>(params.data() + offsets_[l], fo, fi);
        if (spec_.bias) out[l].bias = Eigen::Map<const Eigen::VectorXd>(params.data() + bias_offset(l), fo);
    }
    return out;
}

std::vector<double> Mlp::pack(const std::vector<LayerParams>& layers) const {
    if (layers.size() != spec_.layers()) throw DimensionError("wrong number of layers");
    std::vector<double> out(size_, 0.0);
    for (std::size_t l = 0; l < spec_.layers(); ++l) {
        const auto fo = static_cast<Eigen::Index>(spec_.fan_out(l));
        const auto fi = static_cast<Eigen::Index>(spec_.fan_in(l));
        if (layers[l].weight.rows() != fo || layers[l].weight.cols() != fi)
            throw DimensionError("layer weight has the wrong shape");
        Eigen::Map<Eigen::MatrixXd>(out.data() + offsets_[l], fo, fi) = layers[l].weight;
        if (spec_.bias) {
            if (layers[l].bias.size() != fo) throw DimensionError("layer bias has the wrong length");
            Eigen::Map<Eigen::VectorXd>(out.data() + bias_offset(l), fo) = layers[l].bias;
        }
    }
    return out;
}

namespace {

using Mat = Eigen::MatrixXd;
using ConstMap = Eigen::Map<const Mat>;
using Map = Eigen::Map<Mat>;

void activate(Activation a, Mat& z) {
    switch (a) {
        case Activation::Tanh: {
            // tanh(z) = 1 - 2 / (exp(2z) + 1), vectorized exp; clamped against overflow
            auto e = (2.0 * z.array().min(20.0).max(-20.0)).exp();
            z.array() = 1.0 - 2.0 / (e + 1.0);
            break;
        }
        case Activation::Relu: z.array() = z.array().max(0.0); break;
        case Activation::Sigmoid: z.array() = 1.0 / (1.0 + (-z.array().min(40.0).max(-40.0)).exp()); break;
    }
}

// Multiply g in place by the activation derivative expressed through the output y.
void activation_grad(Activation a, const Mat& y, Mat& g) {
    switch (a) {
        case Activation::Tanh: g.array() *= 1.0 - y.array().square(); break;
        case Activation::Relu: g.array() *= (y.array() > 0.0).cast<double>(); break;
        case Activation::Sigmoid: g.array() *= y.array() * (1.0 - y.array()); break;
    }
}

}  // namespace

const Eigen::MatrixXd& Mlp::forward_batch(std::span<const double> params, const Eigen::MatrixXd& x,
                                          MlpWorkspace& ws) const {
    if (params.size() != size_) throw DimensionError("parameter vector has the wrong length");
    if (static_cast<std::size_t>(x.rows()) != spec_.input) throw DimensionError("network input has the wrong dimension");
    const std::size_t nl = spec_.layers();
    if (ws.act.size() != nl + 1) ws.act.resize(nl + 1);
    if (&x != &ws.act[0]) ws.act[0] = x;
    for (std::size_t l = 0; l < nl; ++l) {
        const Eigen::Index fo = static_cast<Eigen::Index>(spec_.fan_out(l));
        const Eigen::Index fi = static_cast<Eigen::Index>(spec_.fan_in(l));
        ConstMap w(params.data() + offsets_[l], fo, fi);
        Mat& z = ws.act[l + 1];
        z.noalias() = w * ws.act[l];
        if (spec_.bias) {
            Eigen::Map<const Eigen::VectorXd> b(params.data() + bias_offset(l), fo);
            z.colwise() += b;
        }
        if (l + 1 < nl) activate(spec_.activations[l], z);
    }
    return ws.act[nl];
}

void Mlp::backward_batch(std::span<const double> params, const Eigen::MatrixXd& upstream,
                         MlpWorkspace& ws, std::span<double> grad, Eigen::MatrixXd* grad_x) const {
    if (grad.size() != size_) throw DimensionError("gradient vector has the wrong length");
    const std::size_t nl = spec_.layers();
    if (ws.act.size() != nl + 1) throw DimensionError("backward pass without a forward pass");
    if (upstream.rows() != ws.act[nl].rows() || upstream.cols() != ws.act[nl].cols())
        throw DimensionError("upstream gradient has the wrong shape");
    Mat& g = ws.grad[0];
    Mat& next = ws.grad[1];
    g = upstream;
    for (std::size_t l = nl; l-- > 0;) {
        const Eigen::Index fo = static_cast<Eigen::Index>(spec_.fan_out(l));
        const Eigen::Index fi = static_cast<Eigen::Index>(spec_.fan_in(l));
        if (l + 1 < nl) activation_grad(spec_.activations[l], ws.act[l + 1], g);
        Map gw(grad.data() + offsets_[l], fo, fi);
        gw.noalias() += g * ws.act[l].transpose();
        if (spec_.bias) {
            Eigen::Map<Eigen::VectorXd> gb(grad.data() + bias_offset(l), fo);
            gb += g.rowwise().sum();
        }
        if (l > 0 || grad_x) {
            ConstMap w(params.data() + offsets_[l], fo, fi);
            next.noalias() = w.transpose() * g;
            g.swap(next);
        }
    }
    if (grad_x) *grad_x = g;
}

Eigen::VectorXd Mlp::forward(std::span<const double> params, const Eigen::VectorXd& x) const {
    MlpWorkspace ws;
    return forward_batch(params, x, ws);
}

void Mlp::backward(std::span<const double> params, const Eigen::VectorXd& x, const Eigen::VectorXd& upstream,
                   std::span<double> grad, Eigen::VectorXd* grad_x) const {
    MlpWorkspace ws;
    forward_batch(params, x, ws);
    Eigen::MatrixXd gx;
    backward_batch(params, upstream, ws, grad, grad_x ? &gx : nullptr);
    if (grad_x) *grad_x = gx.col(0);
}

}  // namespace xvann::neural
