#include "cilab/gan/evaluate.hpp"

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include "cilab/dataset.hpp"
#include "cilab/errors.hpp"
#include "cilab/gan/tensor_field.hpp"
#include "cilab/image.hpp"
#include "cilab/losses.hpp"

namespace cilab::gan {

namespace {

constexpr int kChunk = 8;

Field scaled(Field f, double scale) {
    for (double& v : f.values()) {
        v *= scale;
    }
    return f;
}

std::string fnv_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace

UnetGenerator generator_from_checkpoint(const Checkpoint& ckpt) {
    auto spec = GeneratorSpec::for_grid(ckpt.manifest.grid_n, ckpt.manifest.base_width);
    UnetGenerator gen(spec);
    restore_generator(gen, ckpt);
    gen->eval();
    return gen;
}

EvalReport evaluate(const std::filesystem::path& checkpoint_path,
                    const std::filesystem::path& data_path,
                    const EvalOptions& options) {
    const Checkpoint ckpt = load_checkpoint(checkpoint_path);
    UnetGenerator gen = generator_from_checkpoint(ckpt);

    DatasetReader reader(data_path);
    const DatasetMeta meta = reader.meta();
    if (meta.grid_n != ckpt.manifest.grid_n) {
        throw ShapeError("dataset grid " + std::to_string(meta.grid_n) +
                         " does not match checkpoint grid " +
                         std::to_string(ckpt.manifest.grid_n));
    }
    if (meta.scale != ckpt.manifest.scale) {
        throw ConfigError("dataset scale differs from the checkpoint's training scale");
    }
    const double scale = meta.scale;

    if (options.triptychs > 0) {
        std::filesystem::create_directories(options.triptych_dir);
    }

    torch::NoGradGuard no_grad;
    std::vector<SampleMae> per_sample;
    per_sample.reserve(static_cast<size_t>(meta.n_samples));

    for (std::int64_t begin = 0; begin < meta.n_samples; begin += kChunk) {
        const std::int64_t end = std::min<std::int64_t>(begin + kChunk, meta.n_samples);
        std::vector<SamplePair> pairs;
        pairs.reserve(static_cast<size_t>(end - begin));
        for (std::int64_t k = begin; k < end; ++k) {
            pairs.push_back(reader.read(k));
        }

        std::vector<Field> srcs;
        srcs.reserve(pairs.size());
        for (const auto& p : pairs) {
            srcs.push_back(p.src);
        }
        const auto src_t = (fields_to_batch(srcs) * scale).to(torch::kFloat32);
        const auto out_t = gen->forward(src_t);

        for (size_t i = 0; i < pairs.size(); ++i) {
            const Field out = tensor_to_field(
                out_t.index({static_cast<std::int64_t>(i)}).unsqueeze(0));
            const Field tar_scaled = scaled(pairs[i].tar, scale);
            const double mae = pixel_mae(out, tar_scaled);
            per_sample.push_back({pairs[i].index, mae});

            if (pairs[i].index < options.triptychs) {
                char name[48];
                std::snprintf(name, sizeof(name), "triptych_%06lld.png",
                              static_cast<long long>(pairs[i].index));
                render_triptych(scaled(pairs[i].src, scale), out, tar_scaled,
                                options.triptych_dir / name);
            }
        }
    }

    const std::string config_hash =
        fnv_hex(ckpt.manifest.id + ":" + ckpt.manifest.dataset_meta_hash + ":" +
                dataset_meta_hash(data_path) + ":" + ckpt.manifest.precision);
    return summarize_maes(std::move(per_sample), config_hash, ckpt.manifest.id);
}

} // namespace cilab::gan
