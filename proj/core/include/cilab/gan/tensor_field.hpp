#pragma once

#include <span>

#include <torch/torch.h>

#include "cilab/field.hpp"

namespace cilab::gan {

/// Field as a [1,1,n,n] tensor.
torch::Tensor field_to_tensor(const Field& f, torch::Dtype dtype = torch::kFloat64);

/// Batch of fields as [B,1,n,n].
torch::Tensor fields_to_batch(std::span<const Field> fields,
                              torch::Dtype dtype = torch::kFloat64);

/// Accepts [n,n], [1,n,n] or [1,1,n,n]; copies back to double precision.
Field tensor_to_field(const torch::Tensor& t);

} // namespace cilab::gan
