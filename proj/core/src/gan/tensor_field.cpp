#include "cilab/gan/tensor_field.hpp"

#include <string>

#include "cilab/errors.hpp"

namespace cilab::gan {

torch::Tensor field_to_tensor(const Field& f, torch::Dtype dtype) {
    auto t = torch::from_blob(const_cast<double*>(f.values().data()),
                              {1, 1, f.n(), f.n()}, torch::kFloat64)
                 .clone();
    return dtype == torch::kFloat64 ? t : t.to(dtype);
}

torch::Tensor fields_to_batch(std::span<const Field> fields, torch::Dtype dtype) {
    if (fields.empty()) {
        throw ShapeError("cannot build an empty field batch");
    }
    std::vector<torch::Tensor> ts;
    ts.reserve(fields.size());
    const int n = fields.front().n();
    for (const Field& f : fields) {
        if (f.n() != n) {
            throw ShapeError("field batch mixes grid sizes");
        }
        ts.push_back(field_to_tensor(f, dtype));
    }
    return torch::cat(ts, 0);
}

Field tensor_to_field(const torch::Tensor& t) {
    auto x = t;
    while (x.dim() > 2) {
        if (x.size(0) != 1) {
            throw ShapeError("tensor_to_field expects a single sample, got batch of " +
                             std::to_string(x.size(0)));
        }
        x = x.squeeze(0);
    }
    if (x.dim() != 2 || x.size(0) != x.size(1)) {
        throw ShapeError("tensor_to_field expects a square 2-D tensor");
    }
    x = x.to(torch::kFloat64).contiguous();
    const int n = static_cast<int>(x.size(0));
    Field f(n, 0.0);
    std::memcpy(f.values().data(), x.data_ptr<double>(),
                static_cast<size_t>(n) * n * sizeof(double));
    return f;
}

} // namespace cilab::gan
