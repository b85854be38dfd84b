#pragma once

#include <torch/torch.h>

#include <vector>

namespace cilab::gan {

/// U-Net generator layout. Encoder widths follow base_width * min(2^i, 8);
/// depth shrinks on small grids so the bottleneck stays at least 2x2.
struct GeneratorSpec {
    int in_channels = 1;
    int out_channels = 1;
    int base_width = 64;
    int depth = 6;
    bool norm = true;

    static GeneratorSpec for_grid(int grid_n, int base_width = 64);

    /// Encoder channel count at the given level.
    int width(int level) const;
    /// Smallest side >= n divisible by 2^depth.
    int padded_side(int n) const;
    void validate() const;
};

/// Patch critic layout: kernel-4 convolutions over the (source, candidate)
/// channel pair, a stride-1 output convolution appended after `widths`.
struct CriticSpec {
    int in_channels = 2;
    std::vector<int> widths{64, 128, 256, 512};
    std::vector<int> strides{2, 2, 2, 1};
    bool spectral_norm = true;

    static CriticSpec for_grid(int grid_n);
    void validate() const;
};

/// Output side of one kernel-4 convolution with the given stride.
int conv_out_side(int in_side, int stride, int kernel = 4, int padding = 1);

/// Score-map side for an n x n input, including the output convolution.
int score_map_side(const CriticSpec& spec, int in_side);

/// Power-iteration estimate of the largest singular value of a 2-D matrix.
/// u [rows] and v [cols] are refined in place under no-grad; the returned
/// sigma keeps the autograd path through w_mat. Zero matrices yield 0.
torch::Tensor spectral_sigma(const torch::Tensor& w_mat, torch::Tensor& u,
                             torch::Tensor& v, int iters);

/// Convolution whose weight is divided by the power-iteration estimate of
/// its largest singular value on every forward pass. The singular-vector
/// estimates persist as buffers and are refined only in training mode.
class SpectralConv2dImpl : public torch::nn::Module {
  public:
    SpectralConv2dImpl(int in_ch, int out_ch, int kernel, int stride, int padding,
                       bool enabled = true);

    torch::Tensor forward(const torch::Tensor& x);
    /// weight_orig / max(sigma-hat, floor); weight_orig itself when disabled.
    torch::Tensor normalized_weight();

    torch::Tensor weight_orig;
    torch::Tensor bias;
    torch::Tensor u;
    torch::Tensor v;

  private:
    int64_t stride_ = 1;
    int64_t padding_ = 1;
    bool enabled_ = true;
};

TORCH_MODULE(SpectralConv2d);

/// Kernel-4 stride-2 U-Net with channel-concatenated skips and a final tanh.
/// Inputs whose side is not divisible by 2^depth are replicate-padded on the
/// bottom/right and cropped back after decoding.
class UnetGeneratorImpl : public torch::nn::Module {
  public:
    explicit UnetGeneratorImpl(const GeneratorSpec& spec);

    torch::Tensor forward(const torch::Tensor& x);
    const GeneratorSpec& spec() const { return spec_; }

  private:
    GeneratorSpec spec_;
    std::vector<torch::nn::Conv2d> down_;
    std::vector<torch::nn::InstanceNorm2d> down_norm_; ///< levels 1..depth-1
    std::vector<torch::nn::ConvTranspose2d> up_;
    std::vector<torch::nn::InstanceNorm2d> up_norm_;   ///< levels 1..depth-1
};

TORCH_MODULE(UnetGenerator);

/// Spectrally normalized patch critic over concatenated (source, candidate).
class PatchCriticImpl : public torch::nn::Module {
  public:
    explicit PatchCriticImpl(const CriticSpec& spec);

    /// Patch score map, shape [B,1,m,m].
    torch::Tensor forward(const torch::Tensor& src, const torch::Tensor& candidate);
    /// Mean over the score map per sample, shape [B].
    torch::Tensor score(const torch::Tensor& src, const torch::Tensor& candidate);
    const CriticSpec& spec() const { return spec_; }

  private:
    CriticSpec spec_;
    std::vector<SpectralConv2d> convs_;
};

TORCH_MODULE(PatchCritic);

/// Zero-mean normal convolution weights, zero biases, applied recursively.
void init_weights(torch::nn::Module& module, double std_dev = 0.02);

} // namespace cilab::gan
