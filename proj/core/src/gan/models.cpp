#include "cilab/gan/models.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "cilab/errors.hpp"

namespace cilab::gan {

namespace {

namespace F = torch::nn::functional;
using torch::indexing::Slice;

constexpr double kSigmaFloor = 1e-12;

int floor_log2(int n) {
    return std::bit_width(static_cast<unsigned>(n)) - 1;
}

torch::Tensor unit_normalized(const torch::Tensor& x) {
    return F::normalize(x, F::NormalizeFuncOptions().p(2).dim(0).eps(kSigmaFloor));
}

void require_square_batch(const torch::Tensor& x, int channels, const char* what) {
    if (x.dim() != 4 || x.size(1) != channels || x.size(2) != x.size(3)) {
        throw ShapeError(std::string(what) + " expects [B," + std::to_string(channels) +
                         ",n,n] input");
    }
}

} // namespace

GeneratorSpec GeneratorSpec::for_grid(int grid_n, int base_width) {
    if (grid_n < 3) {
        throw GridError("grid side must be >= 3, got " + std::to_string(grid_n));
    }
    GeneratorSpec spec;
    spec.base_width = base_width;
    spec.depth = std::min(6, std::max(1, floor_log2(grid_n) - 1));
    spec.validate();
    return spec;
}

int GeneratorSpec::width(int level) const {
    return base_width * std::min(1 << level, 8);
}

int GeneratorSpec::padded_side(int n) const {
    const int m = 1 << depth;
    return (n + m - 1) / m * m;
}

void GeneratorSpec::validate() const {
    if (in_channels < 1 || out_channels < 1) {
        throw ConfigError("generator channel counts must be >= 1");
    }
    if (base_width < 1) {
        throw ConfigError("generator base width must be >= 1");
    }
    if (depth < 1 || depth > 8) {
        throw ConfigError("generator depth must be in [1, 8], got " + std::to_string(depth));
    }
}

CriticSpec CriticSpec::for_grid(int grid_n) {
    if (grid_n < 8) {
        throw GridError("critic needs grid side >= 8, got " + std::to_string(grid_n));
    }
    const int d2 = std::clamp(floor_log2(grid_n) - 3, 1, 3);
    CriticSpec spec;
    spec.widths.clear();
    spec.strides.clear();
    for (int i = 0; i <= d2; ++i) {
        spec.widths.push_back(64 * std::min(1 << i, 8));
        spec.strides.push_back(i < d2 ? 2 : 1);
    }
    spec.validate();
    return spec;
}

void CriticSpec::validate() const {
    if (in_channels < 1) {
        throw ConfigError("critic in_channels must be >= 1");
    }
    if (widths.empty() || widths.size() != strides.size()) {
        throw ConfigError("critic widths and strides must be non-empty and equal-length");
    }
    for (size_t i = 0; i < widths.size(); ++i) {
        if (widths[i] < 1) {
            throw ConfigError("critic widths must be >= 1");
        }
        if (strides[i] != 1 && strides[i] != 2) {
            throw ConfigError("critic strides must be 1 or 2");
        }
    }
}

int conv_out_side(int in_side, int stride, int kernel, int padding) {
    const int span = in_side + 2 * padding - kernel;
    if (span < 0) {
        throw ShapeError("side " + std::to_string(in_side) +
                         " too small for kernel " + std::to_string(kernel));
    }
    return span / stride + 1;
}

int score_map_side(const CriticSpec& spec, int in_side) {
    int side = in_side;
    for (int s : spec.strides) {
        side = conv_out_side(side, s);
    }
    return conv_out_side(side, 1);
}

torch::Tensor spectral_sigma(const torch::Tensor& w_mat, torch::Tensor& u,
                             torch::Tensor& v, int iters) {
    if (w_mat.dim() != 2) {
        throw ShapeError("spectral_sigma expects a 2-D matrix");
    }
    if (u.dim() != 1 || u.size(0) != w_mat.size(0) || v.dim() != 1 ||
        v.size(0) != w_mat.size(1)) {
        throw ShapeError("singular-vector estimates do not match the matrix shape");
    }
    if (iters < 1) {
        throw ConfigError("power-iteration count must be >= 1");
    }
    {
        torch::NoGradGuard no_grad;
        const auto w = w_mat.detach();
        for (int i = 0; i < iters; ++i) {
            v.copy_(unit_normalized(w.t().mv(u)));
            u.copy_(unit_normalized(w.mv(v)));
        }
    }
    // Clones decouple sigma's graph from in-place refinements on later calls.
    return torch::dot(u.clone(), w_mat.mv(v.clone()));
}

SpectralConv2dImpl::SpectralConv2dImpl(int in_ch, int out_ch, int kernel, int stride,
                                       int padding, bool enabled)
    : stride_(stride), padding_(padding), enabled_(enabled) {
    weight_orig = register_parameter(
        "weight_orig", torch::empty({out_ch, in_ch, kernel, kernel}));
    torch::nn::init::normal_(weight_orig, 0.0, 0.02);
    bias = register_parameter("bias", torch::zeros({out_ch}));

    const int64_t cols = weight_orig.numel() / out_ch;
    torch::NoGradGuard no_grad;
    u = register_buffer("u", unit_normalized(torch::randn({out_ch})));
    v = register_buffer("v", unit_normalized(torch::randn({cols})));
}

torch::Tensor SpectralConv2dImpl::normalized_weight() {
    if (!enabled_) {
        return weight_orig;
    }
    const auto w_mat = weight_orig.flatten(1);
    torch::Tensor sigma;
    if (is_training()) {
        sigma = spectral_sigma(w_mat, u, v, 1);
    } else {
        sigma = torch::dot(u.clone(), w_mat.mv(v.clone()));
    }
    return weight_orig / sigma.clamp_min(kSigmaFloor);
}

torch::Tensor SpectralConv2dImpl::forward(const torch::Tensor& x) {
    return torch::conv2d(x, normalized_weight(), bias, stride_, padding_);
}

UnetGeneratorImpl::UnetGeneratorImpl(const GeneratorSpec& spec) : spec_(spec) {
    spec_.validate();
    for (int i = 0; i < spec_.depth; ++i) {
        const int in = i == 0 ? spec_.in_channels : spec_.width(i - 1);
        down_.push_back(register_module(
            "down_" + std::to_string(i),
            torch::nn::Conv2d(
                torch::nn::Conv2dOptions(in, spec_.width(i), 4).stride(2).padding(1))));
        if (i > 0) {
            down_norm_.push_back(register_module(
                "down_norm_" + std::to_string(i),
                torch::nn::InstanceNorm2d(torch::nn::InstanceNorm2dOptions(spec_.width(i)))));
        }
    }
    for (int i = 0; i < spec_.depth; ++i) {
        const int in = i == spec_.depth - 1 ? spec_.width(i) : 2 * spec_.width(i);
        const int out = i == 0 ? spec_.out_channels : spec_.width(i - 1);
        up_.push_back(register_module(
            "up_" + std::to_string(i),
            torch::nn::ConvTranspose2d(
                torch::nn::ConvTranspose2dOptions(in, out, 4).stride(2).padding(1))));
        if (i > 0) {
            up_norm_.push_back(register_module(
                "up_norm_" + std::to_string(i),
                torch::nn::InstanceNorm2d(torch::nn::InstanceNorm2dOptions(out))));
        }
    }
    init_weights(*this);
}

torch::Tensor UnetGeneratorImpl::forward(const torch::Tensor& x) {
    require_square_batch(x, spec_.in_channels, "generator");
    const int64_t n = x.size(2);
    const int64_t target = spec_.padded_side(static_cast<int>(n));

    torch::Tensor cur = x;
    if (target != n) {
        cur = F::pad(cur, F::PadFuncOptions({0, target - n, 0, target - n})
                              .mode(torch::kReplicate));
    }

    std::vector<torch::Tensor> skips;
    skips.reserve(spec_.depth);
    for (int i = 0; i < spec_.depth; ++i) {
        if (i == 0) {
            cur = down_[0]->forward(cur);
        } else {
            cur = down_[i]->forward(torch::leaky_relu(cur, 0.2));
            if (spec_.norm) {
                cur = down_norm_[i - 1]->forward(cur);
            }
        }
        skips.push_back(cur);
    }

    for (int i = spec_.depth - 1; i >= 0; --i) {
        if (i < spec_.depth - 1) {
            cur = torch::cat({skips[i], cur}, 1);
        }
        cur = up_[i]->forward(torch::relu(cur));
        if (i > 0 && spec_.norm) {
            cur = up_norm_[i - 1]->forward(cur);
        }
    }
    cur = torch::tanh(cur);

    if (target != n) {
        cur = cur.index({Slice(), Slice(), Slice(0, n), Slice(0, n)});
    }
    return cur;
}

PatchCriticImpl::PatchCriticImpl(const CriticSpec& spec) : spec_(spec) {
    spec_.validate();
    int in = spec_.in_channels;
    for (size_t i = 0; i < spec_.widths.size(); ++i) {
        convs_.push_back(register_module(
            "conv_" + std::to_string(i),
            SpectralConv2d(in, spec_.widths[i], 4, spec_.strides[i], 1,
                           spec_.spectral_norm)));
        in = spec_.widths[i];
    }
    convs_.push_back(register_module(
        "conv_out", SpectralConv2d(in, 1, 4, 1, 1, spec_.spectral_norm)));
}

torch::Tensor PatchCriticImpl::forward(const torch::Tensor& src,
                                       const torch::Tensor& candidate) {
    require_square_batch(src, 1, "critic");
    if (!src.sizes().equals(candidate.sizes())) {
        throw ShapeError("critic source and candidate shapes differ");
    }
    torch::Tensor cur = torch::cat({src, candidate}, 1);
    for (size_t i = 0; i < convs_.size(); ++i) {
        cur = convs_[i]->forward(cur);
        if (i + 1 < convs_.size()) {
            cur = torch::leaky_relu(cur, 0.2);
        }
    }
    return cur;
}

torch::Tensor PatchCriticImpl::score(const torch::Tensor& src,
                                     const torch::Tensor& candidate) {
    return forward(src, candidate).flatten(1).mean(1);
}

void init_weights(torch::nn::Module& module, double std_dev) {
    // include_self=false keeps this callable from module constructors, where
    // shared_from_this() is not yet available. The root is never a conv.
    for (const auto& m : module.modules(/*include_self=*/false)) {
        if (auto* conv = m->as<torch::nn::Conv2d>()) {
            torch::nn::init::normal_(conv->weight, 0.0, std_dev);
            if (conv->bias.defined()) {
                torch::nn::init::zeros_(conv->bias);
            }
        } else if (auto* tconv = m->as<torch::nn::ConvTranspose2d>()) {
            torch::nn::init::normal_(tconv->weight, 0.0, std_dev);
            if (tconv->bias.defined()) {
                torch::nn::init::zeros_(tconv->bias);
            }
        } else if (auto* sconv = m->as<SpectralConv2d>()) {
            torch::nn::init::normal_(sconv->weight_orig, 0.0, std_dev);
            torch::nn::init::zeros_(sconv->bias);
        }
    }
}

} // namespace cilab::gan
