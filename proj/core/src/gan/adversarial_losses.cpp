#include "cilab/gan/adversarial_losses.hpp"

#include <string>

#include "cilab/errors.hpp"
#include "cilab/gan/physics_ops.hpp"

namespace cilab::gan {

namespace {

torch::Tensor require_scores(torch::Tensor scores, int64_t batch) {
    if (scores.dim() != 1 || scores.size(0) != batch) {
        throw ShapeError("critic must return one score per sample, got " +
                         std::to_string(scores.dim()) + "-d output");
    }
    return scores;
}

} // namespace

torch::Tensor gradient_penalty(const CriticFn& critic, const torch::Tensor& src,
                               const torch::Tensor& real_tar,
                               const torch::Tensor& fake_tar,
                               std::optional<torch::Generator> gen) {
    if (!real_tar.sizes().equals(fake_tar.sizes())) {
        throw ShapeError("gradient_penalty: real and fake shapes differ");
    }
    const int64_t b = real_tar.size(0);
    std::vector<int64_t> eps_shape(real_tar.dim(), 1);
    eps_shape[0] = b;
    const auto eps = gen ? torch::rand(eps_shape, *gen, real_tar.options())
                         : torch::rand(eps_shape, real_tar.options());

    auto x_hat =
        (eps * real_tar + (1.0 - eps) * fake_tar).detach().requires_grad_(true);
    const auto scores = require_scores(critic(src, x_hat), b);

    // A critic constant in x_hat (detached stub) has gradient identically
    // zero; autograd::grad cannot be asked for it, so short-circuit.
    if (!scores.requires_grad()) {
        return torch::ones({}, x_hat.options());
    }

    auto grads = torch::autograd::grad({scores.sum()}, {x_hat}, /*grad_outputs=*/{},
                                       /*retain_graph=*/std::nullopt,
                                       /*create_graph=*/true,
                                       /*allow_unused=*/true);
    const auto g = grads[0].defined() ? grads[0] : torch::zeros_like(x_hat);
    const auto norms = (g.flatten(1) * g.flatten(1)).sum(1).sqrt();
    return (norms - 1.0).pow(2).mean();
}

torch::Tensor critic_loss(const CriticFn& critic, const torch::Tensor& src,
                          const torch::Tensor& real_tar, const torch::Tensor& fake_tar,
                          const LossWeights& weights,
                          std::optional<torch::Generator> gen) {
    weights.validate();
    const auto fake = fake_tar.detach();
    const int64_t b = real_tar.size(0);
    const auto fake_score = require_scores(critic(src, fake), b).mean();
    const auto real_score = require_scores(critic(src, real_tar), b).mean();
    const auto penalty = gradient_penalty(critic, src, real_tar, fake, gen);
    return fake_score - real_score + weights.lambda_gp * penalty;
}

GeneratorLossResult generator_loss(const CriticFn& critic, const torch::Tensor& src,
                                   const torch::Tensor& tar, const torch::Tensor& gen_out,
                                   const LossWeights& weights, const PdeParams& params,
                                   double scale) {
    weights.validate();
    const int64_t b = gen_out.size(0);

    const auto adv = -require_scores(critic(src, gen_out), b).mean();
    const auto energy = energy_loss_t(gen_out, tar, params, weights.energy_match).mean();
    const auto residual = residual_loss_t(gen_out, src, params, scale, weights.s_steps).mean();
    const auto mae = pixel_mae_t(gen_out, tar).mean();
    const auto moments = moment_losses_t(gen_out, tar);
    const auto mean_l = moments.mean_loss.mean();
    const auto var_l = moments.var_loss.mean();

    GeneratorLossResult result;
    result.total = adv + weights.lambda_e * energy + weights.lambda_r * residual +
                   weights.lambda_mae * mae + weights.lambda_mu * mean_l +
                   weights.lambda_sigma * var_l;
    result.parts.adversarial = adv.item<double>();
    result.parts.energy = energy.item<double>();
    result.parts.residual = residual.item<double>();
    result.parts.mae = mae.item<double>();
    result.parts.mean = mean_l.item<double>();
    result.parts.variance = var_l.item<double>();
    return result;
}

} // namespace cilab::gan
