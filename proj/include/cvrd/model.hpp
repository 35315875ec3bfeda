#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cvrd/activation.hpp"
#include "cvrd/adam.hpp"
#include "cvrd/batchnorm.hpp"
#include "cvrd/conv.hpp"
#include "cvrd/loss.hpp"
#include "cvrd/radar.hpp"
#include "cvrd/rng.hpp"
#include "cvrd/tensor.hpp"

namespace cvrd::models {

using nn::CTensor;
using nn::Tensor4;

enum class Domain { real_valued, complex_valued };

// Three-layer fully convolutional denoiser: conv -> act, conv -> BN -> act,
// conv. Channel counts are per-layer kernel counts in the layer's number
// domain; the complex output is one complex channel, the real output two
// stacked real channels.
struct ModelSpec {
    Domain domain = Domain::complex_valued;
    std::size_t c1 = 8, c2 = 4, c3 = 1;
    std::size_t kernel = 3;

    void validate() const {
        if (c1 < 1 || c2 < 1 || c3 < 1) throw config_error("ModelSpec: channel counts must be >= 1");
        if (kernel % 2 == 0) throw config_error("ModelSpec: kernel size must be odd");
        if (domain == Domain::complex_valued && c3 != 1)
            throw config_error("ModelSpec: complex output layer must have 1 kernel");
        if (domain == Domain::real_valued && c3 != 2)
            throw config_error("ModelSpec: real output layer must have 2 kernels");
    }

    std::string name() const {
        const char* d = domain == Domain::complex_valued ? "C" : "R";
        return std::string(d) + "-" + std::to_string(c1) + "-" + std::to_string(c2) + "-" +
               std::to_string(c3);
    }

    // Parses "C-8-4-1" / "R-16-8-2".
    static ModelSpec parse(const std::string& s) {
        ModelSpec spec;
        if (s.size() < 7 || (s[0] != 'C' && s[0] != 'R') || s[1] != '-')
            throw config_error("ModelSpec: expected C-<c1>-<c2>-<c3> or R-<c1>-<c2>-<c3>, got " + s);
        spec.domain = s[0] == 'C' ? Domain::complex_valued : Domain::real_valued;
        std::size_t vals[3];
        std::size_t pos = 2;
        for (int i = 0; i < 3; ++i) {
            std::size_t end = s.find('-', pos);
            const std::string tok =
                end == std::string::npos ? s.substr(pos) : s.substr(pos, end - pos);
            if (tok.empty()) throw config_error("ModelSpec: bad spec string " + s);
            vals[i] = static_cast<std::size_t>(std::stoul(tok));
            pos = end == std::string::npos ? s.size() : end + 1;
        }
        spec.c1 = vals[0];
        spec.c2 = vals[1];
        spec.c3 = vals[2];
        spec.validate();
        return spec;
    }
};

// Exact trainable parameter count. Real domain: k^2*Cin*Cout weights plus a
// bias per kernel, plus (gamma, beta) per BN channel. Complex domain: two
// real kernels and a complex bias per kernel, plus (gamma_rr, gamma_ii,
// beta_re, beta_im) per BN channel.
inline std::size_t count_params(const ModelSpec& spec) {
    spec.validate();
    const std::size_t k2 = spec.kernel * spec.kernel;
    if (spec.domain == Domain::real_valued) {
        const std::size_t cin = 2;
        std::size_t total = k2 * cin * spec.c1 + spec.c1;
        total += k2 * spec.c1 * spec.c2 + spec.c2 + 2 * spec.c2;
        total += k2 * spec.c2 * spec.c3 + spec.c3;
        return total;
    }
    const std::size_t cin = 1;
    std::size_t total = 2 * k2 * cin * spec.c1 + 2 * spec.c1;
    total += 2 * k2 * spec.c1 * spec.c2 + 2 * spec.c2 + 4 * spec.c2;
    total += 2 * k2 * spec.c2 * spec.c3 + 2 * spec.c3;
    return total;
}

// FLOP count for one prediction on an h x w map, in MFLOP. Convention:
// real conv h*w*Cout*(2 k^2 Cin) plus one bias add per output; complex conv
// four real convs plus two combine adds and two bias adds per complex
// output; BN 4 (real) / 12 (complex) FLOP per element; activations 1 FLOP
// per real component.
inline double count_flops_mflop(const ModelSpec& spec, std::size_t h = 96, std::size_t w = 96) {
    spec.validate();
    if (h == 0 || w == 0) throw config_error("count_flops_mflop: empty map");
    const double hw = static_cast<double>(h * w);
    const double k2 = static_cast<double>(spec.kernel * spec.kernel);
    auto real_conv = [&](double cin, double cout) { return hw * cout * (2.0 * k2 * cin) + hw * cout; };
    auto complex_conv = [&](double cin, double cout) {
        return 4.0 * hw * cout * (2.0 * k2 * cin) + 2.0 * hw * cout + 2.0 * hw * cout;
    };
    double total = 0.0;
    if (spec.domain == Domain::real_valued) {
        total += real_conv(2, static_cast<double>(spec.c1));
        total += hw * static_cast<double>(spec.c1);  // ReLU
        total += real_conv(static_cast<double>(spec.c1), static_cast<double>(spec.c2));
        total += 4.0 * hw * static_cast<double>(spec.c2);  // BN
        total += hw * static_cast<double>(spec.c2);        // ReLU
        total += real_conv(static_cast<double>(spec.c2), static_cast<double>(spec.c3));
    } else {
        total += complex_conv(1, static_cast<double>(spec.c1));
        total += 2.0 * hw * static_cast<double>(spec.c1);  // CReLU
        total += complex_conv(static_cast<double>(spec.c1), static_cast<double>(spec.c2));
        total += 12.0 * hw * static_cast<double>(spec.c2);  // complex BN
        total += 2.0 * hw * static_cast<double>(spec.c2);   // CReLU
        total += complex_conv(static_cast<double>(spec.c2), static_cast<double>(spec.c3));
    }
    return total / 1e6;
}

struct ParamEntry {
    std::string name;
    std::size_t offset = 0;
    std::size_t count = 0;
    bool trainable = true;
};

struct TrainConfig {
    std::size_t epochs = 20;
    double lr = 5e-3;
    std::size_t batch = 8;
    std::uint64_t seed = 0;
};

struct TrainResult {
    std::vector<double> loss_curve;  // mean training loss per epoch
};

class Model {
public:
    ModelSpec spec;
    std::vector<double> values;        // trainable parameters + BN running stats
    std::vector<ParamEntry> registry;  // checkpoint order
    std::vector<std::uint8_t> trainable_mask;
    double bn_epsilon = 1e-5;
    double bn_momentum = 0.1;

    static Model build(const ModelSpec& spec, std::uint64_t init_seed) {
        spec.validate();
        Model m;
        m.spec = spec;
        m.layout();
        m.init_values(init_seed);
        return m;
    }

    std::size_t trainable_count() const {
        std::size_t n = 0;
        for (const auto& e : registry)
            if (e.trainable) n += e.count;
        return n;
    }

    const ParamEntry& entry(const std::string& name) const {
        for (const auto& e : registry)
            if (e.name == name) return e;
        throw config_error("Model: no registry entry " + name);
    }

    double* data(const std::string& name) { return values.data() + entry(name).offset; }
    const double* data(const std::string& name) const { return values.data() + entry(name).offset; }

    // Saved activations of one forward pass, consumed by backward().
    struct Ctx {
        // complex domain
        CTensor in, z1, a1, z2, bn2, a2;
        nn::CBatchNormContext bnctx;
        // real domain
        Tensor4 rin, rz1, ra1, rz2, rbn2, ra2;
        nn::BatchNormContext rbnctx;
    };

    // Forward pass on a batch with one complex input channel. The real
    // domain stacks (re, im) into two channels internally and unstacks the
    // two output kernels back into one complex channel.
    CTensor forward(const CTensor& input, bool training, Ctx* ctx) {
        if (spec.domain == Domain::complex_valued) return forward_complex(input, training, ctx);
        const Tensor4 rin = nn::stack_channels(input);
        return nn::unstack_channels(forward_real(rin, training, ctx));
    }

    // Gradient of the scalar loss w.r.t. every value; aligned with `values`.
    std::vector<double> backward(const CTensor& grad_out, const Ctx& ctx) {
        std::vector<double> grads(values.size(), 0.0);
        if (spec.domain == Domain::complex_valued) {
            backward_complex(grad_out, ctx, grads);
        } else {
            const Tensor4 rgrad = nn::stack_channels(grad_out);
            backward_real(rgrad, ctx, grads);
        }
        return grads;
    }

private:
    nn::ConvDims dims1_, dims2_, dims3_;

    void layout() {
        const std::size_t k = spec.kernel;
        registry.clear();
        std::size_t off = 0;
        auto add = [&](const std::string& name, std::size_t count, bool trainable) {
            registry.push_back({name, off, count, trainable});
            off += count;
        };
        if (spec.domain == Domain::complex_valued) {
            dims1_ = {spec.c1, 1, k};
            dims2_ = {spec.c2, spec.c1, k};
            dims3_ = {spec.c3, spec.c2, k};
            add("layer1.A", dims1_.weight_count(), true);
            add("layer1.B", dims1_.weight_count(), true);
            add("layer1.bias_re", spec.c1, true);
            add("layer1.bias_im", spec.c1, true);
            add("layer2.A", dims2_.weight_count(), true);
            add("layer2.B", dims2_.weight_count(), true);
            add("layer2.bias_re", spec.c2, true);
            add("layer2.bias_im", spec.c2, true);
            add("layer2.bn.gamma_rr", spec.c2, true);
            add("layer2.bn.gamma_ii", spec.c2, true);
            add("layer2.bn.beta_re", spec.c2, true);
            add("layer2.bn.beta_im", spec.c2, true);
            add("layer2.bn.running_mean_re", spec.c2, false);
            add("layer2.bn.running_mean_im", spec.c2, false);
            add("layer2.bn.running_vrr", spec.c2, false);
            add("layer2.bn.running_vii", spec.c2, false);
            add("layer2.bn.running_vri", spec.c2, false);
            add("layer3.A", dims3_.weight_count(), true);
            add("layer3.B", dims3_.weight_count(), true);
            add("layer3.bias_re", spec.c3, true);
            add("layer3.bias_im", spec.c3, true);
        } else {
            dims1_ = {spec.c1, 2, k};
            dims2_ = {spec.c2, spec.c1, k};
            dims3_ = {spec.c3, spec.c2, k};
            add("layer1.W", dims1_.weight_count(), true);
            add("layer1.bias", spec.c1, true);
            add("layer2.W", dims2_.weight_count(), true);
            add("layer2.bias", spec.c2, true);
            add("layer2.bn.gamma", spec.c2, true);
            add("layer2.bn.beta", spec.c2, true);
            add("layer2.bn.running_mean", spec.c2, false);
            add("layer2.bn.running_var", spec.c2, false);
            add("layer3.W", dims3_.weight_count(), true);
            add("layer3.bias", spec.c3, true);
        }
        values.assign(off, 0.0);
        trainable_mask.assign(off, 0);
        for (const auto& e : registry)
            if (e.trainable)
                std::fill_n(trainable_mask.begin() + static_cast<long>(e.offset), e.count, 1);
    }

    // Kernels: each real component uniform on +/- sqrt(3 / (k^2 * real input
    // channels)); gamma 1, beta/bias 0, running variance at unit total power.
    void init_values(std::uint64_t seed) {
        Rng rng(seed);
        const double k2 = static_cast<double>(spec.kernel * spec.kernel);
        auto fill_uniform = [&](const std::string& name, double cin_real) {
            const double a = std::sqrt(3.0 / (k2 * cin_real));
            const ParamEntry& e = entry(name);
            for (std::size_t i = 0; i < e.count; ++i) values[e.offset + i] = rng.uniform(-a, a);
        };
        auto fill_const = [&](const std::string& name, double v) {
            const ParamEntry& e = entry(name);
            std::fill_n(values.begin() + static_cast<long>(e.offset), e.count, v);
        };
        if (spec.domain == Domain::complex_valued) {
            fill_uniform("layer1.A", 2.0);
            fill_uniform("layer1.B", 2.0);
            fill_uniform("layer2.A", 2.0 * static_cast<double>(spec.c1));
            fill_uniform("layer2.B", 2.0 * static_cast<double>(spec.c1));
            fill_uniform("layer3.A", 2.0 * static_cast<double>(spec.c2));
            fill_uniform("layer3.B", 2.0 * static_cast<double>(spec.c2));
            fill_const("layer2.bn.gamma_rr", 1.0);
            fill_const("layer2.bn.gamma_ii", 1.0);
            fill_const("layer2.bn.running_vrr", 0.5);
            fill_const("layer2.bn.running_vii", 0.5);
        } else {
            fill_uniform("layer1.W", 2.0);
            fill_uniform("layer2.W", static_cast<double>(spec.c1));
            fill_uniform("layer3.W", static_cast<double>(spec.c2));
            fill_const("layer2.bn.gamma", 1.0);
            fill_const("layer2.bn.running_var", 1.0);
        }
    }

    nn::CBatchNormParams bn_params() {
        nn::CBatchNormParams prm;
        prm.gamma_rr = data("layer2.bn.gamma_rr");
        prm.gamma_ii = data("layer2.bn.gamma_ii");
        prm.beta_re = data("layer2.bn.beta_re");
        prm.beta_im = data("layer2.bn.beta_im");
        prm.running_mean_re = data("layer2.bn.running_mean_re");
        prm.running_mean_im = data("layer2.bn.running_mean_im");
        prm.running_vrr = data("layer2.bn.running_vrr");
        prm.running_vii = data("layer2.bn.running_vii");
        prm.running_vri = data("layer2.bn.running_vri");
        prm.epsilon = bn_epsilon;
        prm.momentum = bn_momentum;
        return prm;
    }

    CTensor forward_complex(const CTensor& input, bool training, Ctx* ctx) {
        if (input.re.c != 1) throw config_error("Model: complex input must have 1 channel");
        CTensor z1 = nn::cconv2d(input, data("layer1.A"), data("layer1.B"), data("layer1.bias_re"),
                                 data("layer1.bias_im"), dims1_);
        CTensor a1 = nn::crelu(z1);
        CTensor z2 = nn::cconv2d(a1, data("layer2.A"), data("layer2.B"), data("layer2.bias_re"),
                                 data("layer2.bias_im"), dims2_);
        CTensor bn2 = nn::cbatchnorm_forward(z2, bn_params(), training, ctx ? &ctx->bnctx : nullptr);
        CTensor a2 = nn::crelu(bn2);
        CTensor out = nn::cconv2d(a2, data("layer3.A"), data("layer3.B"), data("layer3.bias_re"),
                                  data("layer3.bias_im"), dims3_);
        if (ctx) {
            ctx->in = input;
            ctx->z1 = std::move(z1);
            ctx->a1 = std::move(a1);
            ctx->z2 = std::move(z2);
            ctx->bn2 = std::move(bn2);
            ctx->a2 = std::move(a2);
        }
        return out;
    }

    Tensor4 forward_real(const Tensor4& input, bool training, Ctx* ctx) {
        if (input.c != 2) throw config_error("Model: real input must have 2 channels");
        Tensor4 z1 = nn::conv2d(input, data("layer1.W"), data("layer1.bias"), dims1_);
        Tensor4 a1 = nn::relu(z1);
        Tensor4 z2 = nn::conv2d(a1, data("layer2.W"), data("layer2.bias"), dims2_);
        Tensor4 bn2 = nn::batchnorm_forward(
            z2, data("layer2.bn.gamma"), data("layer2.bn.beta"), data("layer2.bn.running_mean"),
            data("layer2.bn.running_var"), bn_epsilon, bn_momentum, training,
            ctx ? &ctx->rbnctx : nullptr);
        Tensor4 a2 = nn::relu(bn2);
        Tensor4 out = nn::conv2d(a2, data("layer3.W"), data("layer3.bias"), dims3_);
        if (ctx) {
            ctx->rin = input;
            ctx->rz1 = std::move(z1);
            ctx->ra1 = std::move(a1);
            ctx->rz2 = std::move(z2);
            ctx->rbn2 = std::move(bn2);
            ctx->ra2 = std::move(a2);
        }
        return out;
    }

    void backward_complex(const CTensor& grad_out, const Ctx& ctx, std::vector<double>& grads) {
        auto g = [&](const char* name) { return grads.data() + entry(name).offset; };
        CTensor g_a2;
        nn::cconv2d_backward(grad_out, ctx.a2, data("layer3.A"), data("layer3.B"), dims3_, g_a2,
                             g("layer3.A"), g("layer3.B"), g("layer3.bias_re"),
                             g("layer3.bias_im"));
        CTensor g_bn2 = nn::crelu_backward(g_a2, ctx.bn2);
        CTensor g_z2;
        nn::cbatchnorm_backward(g_bn2, ctx.bnctx, data("layer2.bn.gamma_rr"),
                                data("layer2.bn.gamma_ii"), g_z2, g("layer2.bn.gamma_rr"),
                                g("layer2.bn.gamma_ii"), g("layer2.bn.beta_re"),
                                g("layer2.bn.beta_im"));
        CTensor g_a1;
        nn::cconv2d_backward(g_z2, ctx.a1, data("layer2.A"), data("layer2.B"), dims2_, g_a1,
                             g("layer2.A"), g("layer2.B"), g("layer2.bias_re"),
                             g("layer2.bias_im"));
        CTensor g_z1 = nn::crelu_backward(g_a1, ctx.z1);
        CTensor g_in;
        nn::cconv2d_backward(g_z1, ctx.in, data("layer1.A"), data("layer1.B"), dims1_, g_in,
                             g("layer1.A"), g("layer1.B"), g("layer1.bias_re"),
                             g("layer1.bias_im"));
    }

    void backward_real(const Tensor4& grad_out, const Ctx& ctx, std::vector<double>& grads) {
        auto g = [&](const char* name) { return grads.data() + entry(name).offset; };
        Tensor4 g_a2;
        nn::conv2d_backward(grad_out, ctx.ra2, data("layer3.W"), dims3_, g_a2, g("layer3.W"),
                            g("layer3.bias"));
        Tensor4 g_bn2 = nn::relu_backward(g_a2, ctx.rbn2);
        Tensor4 g_z2;
        nn::batchnorm_backward(g_bn2, ctx.rbnctx, data("layer2.bn.gamma"), g_z2,
                               g("layer2.bn.gamma"), g("layer2.bn.beta"));
        Tensor4 g_a1;
        nn::conv2d_backward(g_z2, ctx.ra1, data("layer2.W"), dims2_, g_a1, g("layer2.W"),
                            g("layer2.bias"));
        Tensor4 g_z1 = nn::relu_backward(g_a1, ctx.rz1);
        Tensor4 g_in;
        nn::conv2d_backward(g_z1, ctx.rin, data("layer1.W"), dims1_, g_in, g("layer1.W"),
                            g("layer1.bias"));
    }
};

inline Model build_model(const ModelSpec& spec, std::uint64_t init_seed) {
    return Model::build(spec, init_seed);
}

// Assembles batch tensors from sample pairs (one complex channel each).
inline void fill_batch(const std::vector<radar::SamplePair>& samples,
                       const std::vector<std::size_t>& indices, std::size_t first,
                       std::size_t count, CTensor& x, CTensor& y) {
    const auto& ref = samples[indices[first]].interfered.data;
    x = CTensor(count, 1, ref.rows, ref.cols);
    y = CTensor(count, 1, ref.rows, ref.cols);
    for (std::size_t b = 0; b < count; ++b) {
        const radar::SamplePair& s = samples[indices[first + b]];
        nn::load_map(x, b, s.interfered.data);
        nn::load_map(y, b, s.clean.data);
    }
}

// Mini-batch Adam training on standardized sample pairs. Deterministic per
// seed: shuffling, batching and reductions all use fixed orders.
inline TrainResult train(Model& model, const std::vector<radar::SamplePair>& dataset,
                         const TrainConfig& cfg) {
    if (dataset.empty()) throw config_error("train: dataset is empty");
    if (cfg.batch < 1) throw config_error("train: batch must be >= 1");
    nn::AdamState adam(model.values.size(), cfg.lr);
    TrainResult result;
    std::vector<std::size_t> order(dataset.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng rng = Rng::derive(cfg.seed, epoch);
        rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t first = 0; first < order.size(); first += cfg.batch) {
            const std::size_t count = std::min(cfg.batch, order.size() - first);
            CTensor x, y;
            fill_batch(dataset, order, first, count, x, y);
            Model::Ctx ctx;
            const CTensor pred = model.forward(x, /*training=*/true, &ctx);
            CTensor grad;
            const double loss = nn::split_mse_loss(pred, y, &grad);
            if (!std::isfinite(loss))
                throw numeric_error("train: loss diverged at epoch " + std::to_string(epoch));
            const std::vector<double> grads = model.backward(grad, ctx);
            nn::adam_step(model.values, grads, adam, &model.trainable_mask);
            epoch_loss += loss;
            ++batches;
        }
        result.loss_curve.push_back(epoch_loss / static_cast<double>(batches));
    }
    return result;
}

// Applies the model to one standardized map. The output keeps the input's
// standardization statistics so it can be inverted to physical scale.
inline radar::RDMap denoise(Model& model, const radar::RDMap& rd) {
    if (!rd.standardized) throw config_error("denoise: input map must be standardized");
    CTensor x(1, 1, rd.data.rows, rd.data.cols);
    nn::load_map(x, 0, rd.data);
    const CTensor out = model.forward(x, /*training=*/false, nullptr);
    radar::RDMap result;
    result.data = nn::extract_map(out, 0);
    result.standardized = true;
    result.mean = rd.mean;
    result.scale = rd.scale;
    return result;
}

}  // namespace cvrd::models
