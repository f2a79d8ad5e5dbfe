#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "uavrl/metrics.hpp"
#include "uavrl/rng.hpp"

namespace uavrl {

// Dense layer, weights stored row-major: w[o * in + i] feeds output o.
struct DenseLayer {
    int in = 0;
    int out = 0;
    std::vector<double> w;
    std::vector<double> b;

    static DenseLayer zeros(int in, int out) {
        DenseLayer l;
        l.in = in;
        l.out = out;
        l.w.assign(static_cast<std::size_t>(in) * out, 0.0);
        l.b.assign(static_cast<std::size_t>(out), 0.0);
        return l;
    }
};

enum class Aggregator { Mean, Max };

inline const char* to_string(Aggregator a) { return a == Aggregator::Mean ? "mean" : "max"; }

// Dueling architecture: shared trunk, a scalar state-value stream and a
// per-action advantage stream, combined by subtracting the advantage mean
// (or maximum) so the decomposition is identifiable.
struct DuelingNetParams {
    std::vector<DenseLayer> trunk;
    std::vector<DenseLayer> value;      // ends in one output
    std::vector<DenseLayer> advantage;  // ends in one output per action
    Aggregator aggregator = Aggregator::Mean;

    int input_dim() const { return trunk.front().in; }
    int action_count() const { return advantage.back().out; }

    bool shape_congruent(const DuelingNetParams& other) const {
        auto same = [](const std::vector<DenseLayer>& a, const std::vector<DenseLayer>& b) {
            if (a.size() != b.size()) return false;
            for (std::size_t i = 0; i < a.size(); ++i)
                if (a[i].in != b[i].in || a[i].out != b[i].out) return false;
            return true;
        };
        return same(trunk, other.trunk) && same(value, other.value) &&
               same(advantage, other.advantage);
    }
};

// Gradients of the batch loss, shaped exactly like the network parameters.
struct GradientSet {
    std::vector<DenseLayer> trunk;
    std::vector<DenseLayer> value;
    std::vector<DenseLayer> advantage;
};

struct NetConfig {
    std::vector<int> trunk_hidden = {64, 64};
    std::vector<int> stream_hidden = {32};
    int input_dim = 3;
    int actions = 4;
    double alpha = 1e-4;  // SGD step size
    Aggregator aggregator = Aggregator::Mean;

    void validate() const {
        if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
        if (input_dim < 1 || actions < 1)
            throw std::invalid_argument("network needs inputs and actions");
    }
};

// Symmetric scaled-uniform initialization, bound sqrt(6 / (fan_in + fan_out));
// biases start at zero.
inline DuelingNetParams init_params(const NetConfig& cfg, Rng& rng) {
    cfg.validate();
    auto init_layer = [&rng](int in, int out) {
        DenseLayer l = DenseLayer::zeros(in, out);
        const double bound = std::sqrt(6.0 / (in + out));
        for (double& w : l.w) w = rng.uniform_sym(bound);
        return l;
    };
    auto init_chain = [&](int in, const std::vector<int>& hidden, int out) {
        std::vector<DenseLayer> chain;
        int prev = in;
        for (int h : hidden) {
            chain.push_back(init_layer(prev, h));
            prev = h;
        }
        chain.push_back(init_layer(prev, out));
        return chain;
    };

    DuelingNetParams net;
    net.aggregator = cfg.aggregator;
    int prev = cfg.input_dim;
    for (int h : cfg.trunk_hidden) {
        net.trunk.push_back(init_layer(prev, h));
        prev = h;
    }
    net.value = init_chain(prev, cfg.stream_hidden, 1);
    net.advantage = init_chain(prev, cfg.stream_hidden, cfg.actions);
    return net;
}

inline DuelingNetParams clone_params(const DuelingNetParams& src) { return src; }

struct ForwardResult {
    double v = 0.0;
    std::vector<double> advantage;
    std::vector<double> q;
};

namespace detail {

inline void affine(const DenseLayer& l, const double* x, double* y) {
    for (int o = 0; o < l.out; ++o) {
        const double* row = l.w.data() + static_cast<std::size_t>(o) * l.in;
        double acc = l.b[static_cast<std::size_t>(o)];
        for (int i = 0; i < l.in; ++i) acc += row[i] * x[i];
        y[o] = acc;
    }
}

inline void relu_inplace(double* y, int n) {
    for (int i = 0; i < n; ++i) y[i] = y[i] > 0.0 ? y[i] : 0.0;
}

// Pre- and post-activation values for one stream; the final layer stays
// linear, hidden layers use the rectifier.
struct StreamTape {
    std::vector<std::vector<double>> pre;   // affine outputs per layer
    std::vector<std::vector<double>> post;  // activated outputs per layer
};

inline void run_stream(const std::vector<DenseLayer>& layers, const std::vector<double>& input,
                       StreamTape& tape) {
    tape.pre.resize(layers.size());
    tape.post.resize(layers.size());
    const std::vector<double>* x = &input;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        tape.pre[i].assign(static_cast<std::size_t>(layers[i].out), 0.0);
        affine(layers[i], x->data(), tape.pre[i].data());
        tape.post[i] = tape.pre[i];
        if (i + 1 < layers.size()) relu_inplace(tape.post[i].data(), layers[i].out);
        x = &tape.post[i];
    }
}

// Backpropagates through a stream, accumulating parameter gradients and
// returning the gradient with respect to the stream input.
inline std::vector<double> back_stream(const std::vector<DenseLayer>& layers,
                                       const std::vector<double>& input, const StreamTape& tape,
                                       std::vector<double> grad_out,
                                       std::vector<DenseLayer>& grads) {
    for (std::size_t li = layers.size(); li-- > 0;) {
        const DenseLayer& l = layers[li];
        DenseLayer& g = grads[li];
        if (li + 1 < layers.size()) {
            // rectifier derivative on the hidden activation
            for (int o = 0; o < l.out; ++o)
                if (tape.pre[li][static_cast<std::size_t>(o)] <= 0.0) grad_out[static_cast<std::size_t>(o)] = 0.0;
        }
        const std::vector<double>& x = li == 0 ? input : tape.post[li - 1];
        std::vector<double> grad_in(static_cast<std::size_t>(l.in), 0.0);
        for (int o = 0; o < l.out; ++o) {
            const double go = grad_out[static_cast<std::size_t>(o)];
            if (go == 0.0) continue;
            double* grow = g.w.data() + static_cast<std::size_t>(o) * l.in;
            const double* wrow = l.w.data() + static_cast<std::size_t>(o) * l.in;
            for (int i = 0; i < l.in; ++i) {
                grow[i] += go * x[static_cast<std::size_t>(i)];
                grad_in[static_cast<std::size_t>(i)] += go * wrow[i];
            }
            g.b[static_cast<std::size_t>(o)] += go;
        }
        grad_out = std::move(grad_in);
    }
    return grad_out;
}

struct Tape {
    std::vector<double> input;
    StreamTape trunk;
    StreamTape value;
    StreamTape advantage;
    double v = 0.0;
    std::vector<double> adv;
    std::vector<double> q;
};

inline void forward_tape(const DuelingNetParams& net, const double* features, Tape& tape) {
    tape.input.assign(features, features + net.input_dim());
    run_stream(net.trunk, tape.input, tape.trunk);
    // trunk output is rectified before feeding the streams
    std::vector<double>& trunk_out = tape.trunk.post.back();
    relu_inplace(trunk_out.data(), static_cast<int>(trunk_out.size()));
    run_stream(net.value, trunk_out, tape.value);
    run_stream(net.advantage, trunk_out, tape.advantage);
    tape.v = tape.value.post.back()[0];
    tape.adv = tape.advantage.post.back();

    const std::size_t n = tape.adv.size();
    double ref = 0.0;
    if (net.aggregator == Aggregator::Mean) {
        for (double d : tape.adv) ref += d;
        ref /= static_cast<double>(n);
    } else {
        ref = tape.adv[0];
        for (double d : tape.adv) ref = std::max(ref, d);
    }
    tape.q.resize(n);
    for (std::size_t a = 0; a < n; ++a) tape.q[a] = tape.v + tape.adv[a] - ref;
}

}  // namespace detail

// Evaluates V, the advantage vector and the aggregated Q-values.
inline ForwardResult forward(const DuelingNetParams& net, const std::array<double, 3>& features) {
    for (double f : features)
        if (!std::isfinite(f)) throw std::domain_error("non-finite input feature");
    detail::Tape tape;
    detail::forward_tape(net, features.data(), tape);
    return {tape.v, tape.adv, tape.q};
}

inline GradientSet zero_gradients(const DuelingNetParams& net) {
    GradientSet g;
    auto zero = [](const std::vector<DenseLayer>& layers) {
        std::vector<DenseLayer> out;
        out.reserve(layers.size());
        for (const DenseLayer& l : layers) out.push_back(DenseLayer::zeros(l.in, l.out));
        return out;
    };
    g.trunk = zero(net.trunk);
    g.value = zero(net.value);
    g.advantage = zero(net.advantage);
    return g;
}

struct TrainSample {
    std::array<double, 3> features{};
    int action = 0;
    double target = 0.0;
};

// Mean squared error over the batch between each sample's target and the
// Q-value of its action, with exact reverse-mode gradients for every
// parameter (propagated through the aggregator).
inline std::pair<GradientSet, double> backward(const DuelingNetParams& net,
                                               const std::vector<TrainSample>& batch) {
    if (batch.empty()) throw std::logic_error("backward needs a non-empty batch");
    GradientSet grads = zero_gradients(net);
    double loss = 0.0;
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    const int actions = net.action_count();

    detail::Tape tape;
    for (const TrainSample& sample : batch) {
        if (!std::isfinite(sample.target)) throw std::domain_error("non-finite target");
        detail::forward_tape(net, sample.features.data(), tape);
        const std::size_t a = static_cast<std::size_t>(sample.action);
        if (sample.action < 0 || sample.action >= actions)
            throw std::logic_error("sample action out of range");
        const double err = tape.q[a] - sample.target;
        loss += err * err * inv_n;
        const double g = 2.0 * err * inv_n;

        // Q_a = V + (D_a - ref(D)); grad splits into the value stream and an
        // advantage vector depending on the aggregator.
        std::vector<double> g_adv(static_cast<std::size_t>(actions), 0.0);
        if (net.aggregator == Aggregator::Mean) {
            const double share = g / static_cast<double>(actions);
            for (int b = 0; b < actions; ++b) g_adv[static_cast<std::size_t>(b)] = -share;
            g_adv[a] += g;
        } else {
            std::size_t arg = 0;
            for (std::size_t b = 1; b < tape.adv.size(); ++b)
                if (tape.adv[b] > tape.adv[arg]) arg = b;
            g_adv[a] += g;
            g_adv[arg] -= g;
        }

        const std::vector<double>& trunk_out = tape.trunk.post.back();
        std::vector<double> g_trunk_out = detail::back_stream(net.value, trunk_out, tape.value,
                                                              {g}, grads.value);
        std::vector<double> g_from_adv = detail::back_stream(net.advantage, trunk_out,
                                                             tape.advantage, std::move(g_adv),
                                                             grads.advantage);
        for (std::size_t i = 0; i < g_trunk_out.size(); ++i) g_trunk_out[i] += g_from_adv[i];
        // trunk output rectifier
        for (std::size_t i = 0; i < g_trunk_out.size(); ++i)
            if (tape.trunk.pre.back()[i] <= 0.0) g_trunk_out[i] = 0.0;
        detail::back_stream(net.trunk, tape.input, tape.trunk, std::move(g_trunk_out),
                            grads.trunk);
    }
    return {std::move(grads), loss};
}

// Plain gradient step: p <- p - alpha * g for every parameter.
inline void sgd_step(DuelingNetParams& net, const GradientSet& grads, double alpha) {
    auto apply = [alpha](std::vector<DenseLayer>& layers, const std::vector<DenseLayer>& gs) {
        if (layers.size() != gs.size()) throw std::logic_error("gradient shape mismatch");
        for (std::size_t li = 0; li < layers.size(); ++li) {
            DenseLayer& l = layers[li];
            const DenseLayer& g = gs[li];
            if (l.in != g.in || l.out != g.out)
                throw std::logic_error("gradient shape mismatch");
            for (std::size_t i = 0; i < l.w.size(); ++i) l.w[i] -= alpha * g.w[i];
            for (std::size_t i = 0; i < l.b.size(); ++i) l.b[i] -= alpha * g.b[i];
        }
    };
    apply(net.trunk, grads.trunk);
    apply(net.value, grads.value);
    apply(net.advantage, grads.advantage);
}

// --- checkpoint format -------------------------------------------------
//
// D3QL-CKPT v1
// arch trunk <dims...> value <dims...> advantage <dims...> aggregator <mean|max>
// layer <in> <out>            for each layer: trunk, value, advantage order
// <out lines of in weights>
// <one line of out biases>
//
// Values render with 17 significant digits and round-trip bit-exactly.

namespace detail {

inline void write_chain(std::ostream& out, const std::vector<DenseLayer>& layers) {
    for (const DenseLayer& l : layers) {
        out << "layer " << l.in << ' ' << l.out << '\n';
        for (int o = 0; o < l.out; ++o) {
            for (int i = 0; i < l.in; ++i) {
                if (i) out << ' ';
                out << format_double(l.w[static_cast<std::size_t>(o) * l.in + i], 17);
            }
            out << '\n';
        }
        for (int i = 0; i < l.out; ++i) {
            if (i) out << ' ';
            out << format_double(l.b[static_cast<std::size_t>(i)], 17);
        }
        out << '\n';
    }
}

inline std::vector<DenseLayer> read_chain(std::istream& in, std::size_t count) {
    std::vector<DenseLayer> layers;
    for (std::size_t li = 0; li < count; ++li) {
        std::string tag;
        int nin, nout;
        if (!(in >> tag >> nin >> nout) || tag != "layer")
            throw std::runtime_error("malformed checkpoint layer header");
        DenseLayer l = DenseLayer::zeros(nin, nout);
        for (double& w : l.w)
            if (!(in >> w)) throw std::runtime_error("truncated checkpoint weights");
        for (double& b : l.b)
            if (!(in >> b)) throw std::runtime_error("truncated checkpoint biases");
        layers.push_back(std::move(l));
    }
    return layers;
}

inline void write_dims(std::ostream& out, const char* name, int input,
                       const std::vector<DenseLayer>& layers) {
    out << ' ' << name << ' ' << input;
    for (const DenseLayer& l : layers) out << ' ' << l.out;
}

}  // namespace detail

inline void save_net(const DuelingNetParams& net, std::ostream& out) {
    out << "D3QL-CKPT v1\n";
    out << "arch";
    detail::write_dims(out, "trunk", net.input_dim(), net.trunk);
    detail::write_dims(out, "value", net.value.front().in, net.value);
    detail::write_dims(out, "advantage", net.advantage.front().in, net.advantage);
    out << " aggregator " << to_string(net.aggregator) << '\n';
    detail::write_chain(out, net.trunk);
    detail::write_chain(out, net.value);
    detail::write_chain(out, net.advantage);
}

inline DuelingNetParams load_net(std::istream& in) {
    std::string header;
    std::getline(in, header);
    if (header != "D3QL-CKPT v1") throw std::runtime_error("bad network checkpoint header");
    std::string arch_line;
    std::getline(in, arch_line);
    std::istringstream arch(arch_line);
    std::string tag;
    arch >> tag;
    if (tag != "arch") throw std::runtime_error("missing arch line in checkpoint");

    // parse: trunk d0..dn value d0..dn advantage d0..dn aggregator <agg>
    std::vector<int> trunk_dims, value_dims, adv_dims;
    std::string agg_name;
    {
        std::vector<int>* current = nullptr;
        std::string token;
        while (arch >> token) {
            if (token == "trunk") current = &trunk_dims;
            else if (token == "value") current = &value_dims;
            else if (token == "advantage") current = &adv_dims;
            else if (token == "aggregator") {
                arch >> agg_name;
                break;
            } else {
                if (!current) throw std::runtime_error("malformed arch line in checkpoint");
                current->push_back(std::stoi(token));
            }
        }
    }
    if (trunk_dims.size() < 2 || value_dims.size() < 2 || adv_dims.size() < 2)
        throw std::runtime_error("malformed arch line in checkpoint");

    DuelingNetParams net;
    net.aggregator = agg_name == "max" ? Aggregator::Max : Aggregator::Mean;
    net.trunk = detail::read_chain(in, trunk_dims.size() - 1);
    net.value = detail::read_chain(in, value_dims.size() - 1);
    net.advantage = detail::read_chain(in, adv_dims.size() - 1);
    return net;
}

inline void save_net_file(const DuelingNetParams& net, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    save_net(net, out);
    if (!out) throw std::runtime_error("failed writing checkpoint: " + path);
}

inline DuelingNetParams load_net_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    return load_net(in);
}

}  // namespace uavrl
