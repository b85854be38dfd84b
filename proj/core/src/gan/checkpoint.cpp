#include "cilab/gan/checkpoint.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <memory>
#include <utility>
#include <vector>

#include "cilab/binary_io.hpp"
#include "cilab/errors.hpp"
#include "json_detail.hpp"

namespace cilab::gan {

namespace {

constexpr char kMagic[4] = {'C', 'K', 'P', '1'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kMaxRank = 8;
constexpr std::int64_t kMaxNumel = 1LL << 31;

nlohmann::json manifest_to_json(const CheckpointManifest& m) {
    return nlohmann::json{
        {"id", m.id},
        {"iteration", m.iteration},
        {"val_mae", m.val_mae},
        {"grid_n", m.grid_n},
        {"base_width", m.base_width},
        {"scale", m.scale},
        {"precision", m.precision},
        {"dataset_meta_hash", m.dataset_meta_hash},
        {"weights", detail::weights_to_json(m.weights)},
    };
}

CheckpointManifest manifest_from_json(const nlohmann::json& j) {
    CheckpointManifest m;
    try {
        m.id = j.at("id").get<std::string>();
        m.iteration = j.at("iteration").get<std::int64_t>();
        m.val_mae = j.at("val_mae").get<double>();
        m.grid_n = j.at("grid_n").get<int>();
        m.base_width = j.at("base_width").get<int>();
        m.scale = j.at("scale").get<double>();
        m.precision = j.at("precision").get<std::string>();
        m.dataset_meta_hash = j.at("dataset_meta_hash").get<std::string>();
        m.weights = detail::weights_from_json(j.at("weights"));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad checkpoint manifest: ") + e.what());
    }
    return m;
}

CheckpointManifest read_manifest(std::istream& is, const std::filesystem::path& path) {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
        throw FormatError("not a checkpoint file: " + path.string());
    }
    const auto version = io::get_u32(is, "checkpoint version");
    if (version != kVersion) {
        throw FormatError("unsupported checkpoint version " + std::to_string(version));
    }
    const auto manifest_len = io::get_u64(is, "manifest length");
    if (manifest_len > (1u << 20)) {
        throw FormatError("implausible manifest length " + std::to_string(manifest_len));
    }
    std::string text(manifest_len, '\0');
    if (!is.read(text.data(), static_cast<std::streamsize>(manifest_len))) {
        throw FormatError("truncated checkpoint manifest in " + path.string());
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("unparseable checkpoint manifest: ") + e.what());
    }
    return manifest_from_json(j);
}

const torch::Tensor* find_tensor(const Checkpoint& ckpt, const std::string& name) {
    for (const auto& nt : ckpt.tensors) {
        if (nt.name == name) {
            return &nt.tensor;
        }
    }
    return nullptr;
}

const torch::Tensor& require_tensor(const Checkpoint& ckpt, const std::string& name) {
    const auto* t = find_tensor(ckpt, name);
    if (t == nullptr) {
        throw FormatError("checkpoint is missing tensor \"" + name + "\"");
    }
    return *t;
}

void copy_into(torch::Tensor dst, const torch::Tensor& src, const std::string& name) {
    if (!dst.sizes().equals(src.sizes())) {
        throw FormatError("checkpoint tensor \"" + name + "\" has mismatched shape");
    }
    torch::NoGradGuard no_grad;
    dst.copy_(src.to(dst.dtype()));
}

torch::optim::AdamParamState* adam_state(torch::optim::Adam& opt, const torch::Tensor& p) {
    auto it = opt.state().find(p.unsafeGetTensorImpl());
    if (it == opt.state().end()) {
        return nullptr;
    }
    return static_cast<torch::optim::AdamParamState*>(it->second.get());
}

} // namespace

void save_checkpoint(const std::filesystem::path& path,
                     const CheckpointManifest& manifest,
                     const std::vector<NamedTensor>& tensors) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) {
        throw IoError("cannot open checkpoint for writing: " + path.string());
    }
    os.write(kMagic, 4);
    io::put_u32(os, kVersion);
    const std::string text = manifest_to_json(manifest).dump();
    io::put_u64(os, text.size());
    os.write(text.data(), static_cast<std::streamsize>(text.size()));

    io::put_u32(os, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& nt : tensors) {
        io::put_u32(os, static_cast<std::uint32_t>(nt.name.size()));
        os.write(nt.name.data(), static_cast<std::streamsize>(nt.name.size()));
        const auto t = nt.tensor.detach().to(torch::kFloat32).contiguous();
        io::put_u32(os, static_cast<std::uint32_t>(t.dim()));
        for (int64_t d = 0; d < t.dim(); ++d) {
            io::put_u64(os, static_cast<std::uint64_t>(t.size(d)));
        }
        io::put_f32_array(os, {t.data_ptr<float>(), static_cast<size_t>(t.numel())});
    }
    if (!os.good()) {
        throw IoError("failed while writing checkpoint: " + path.string());
    }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw IoError("cannot open checkpoint: " + path.string());
    }
    Checkpoint ckpt;
    ckpt.manifest = read_manifest(is, path);

    const auto count = io::get_u32(is, "tensor count");
    ckpt.tensors.reserve(count);
    for (std::uint32_t k = 0; k < count; ++k) {
        const auto name_len = io::get_u32(is, "tensor name length");
        if (name_len > 4096) {
            throw FormatError("implausible tensor name length");
        }
        std::string name(name_len, '\0');
        if (!is.read(name.data(), name_len)) {
            throw FormatError("truncated tensor name in " + path.string());
        }
        const auto rank = io::get_u32(is, "tensor rank");
        if (rank > kMaxRank) {
            throw FormatError("tensor \"" + name + "\" has implausible rank " +
                              std::to_string(rank));
        }
        std::vector<std::int64_t> dims(rank);
        std::int64_t numel = 1;
        for (auto& d : dims) {
            d = static_cast<std::int64_t>(io::get_u64(is, "tensor dim"));
            if (d < 0 || (d > 0 && numel > kMaxNumel / d)) {
                throw FormatError("tensor \"" + name + "\" has implausible shape");
            }
            numel *= d;
        }
        auto t = torch::empty(dims, torch::kFloat32);
        io::get_f32_array(is, {t.data_ptr<float>(), static_cast<size_t>(t.numel())},
                          "tensor \"" + name + "\" payload");
        ckpt.tensors.push_back({std::move(name), std::move(t)});
    }
    return ckpt;
}

CheckpointManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw IoError("cannot open checkpoint: " + path.string());
    }
    return read_manifest(is, path);
}

std::vector<NamedTensor> snapshot_state(const UnetGenerator& gen,
                                        const PatchCritic& critic,
                                        torch::optim::Adam& opt_g,
                                        torch::optim::Adam& opt_c) {
    std::vector<NamedTensor> out;
    const auto add_module = [&out](const std::string& prefix, const torch::nn::Module& m) {
        for (const auto& p : m.named_parameters()) {
            out.push_back({prefix + p.key(), p.value().detach().clone()});
        }
        for (const auto& b : m.named_buffers()) {
            out.push_back({prefix + b.key(), b.value().detach().clone()});
        }
    };
    const auto add_optimizer = [&out](const std::string& prefix, torch::optim::Adam& opt,
                                      const torch::nn::Module& m) {
        for (const auto& p : m.named_parameters()) {
            const auto* st = adam_state(opt, p.value());
            if (st == nullptr) {
                continue;
            }
            out.push_back({prefix + p.key() + ".exp_avg", st->exp_avg().detach().clone()});
            out.push_back(
                {prefix + p.key() + ".exp_avg_sq", st->exp_avg_sq().detach().clone()});
            out.push_back({prefix + p.key() + ".step",
                           torch::full({}, static_cast<double>(st->step()),
                                       torch::kFloat64)});
        }
    };
    add_module("g.", *gen);
    add_module("c.", *critic);
    add_optimizer("opt_g.", opt_g, *gen);
    add_optimizer("opt_c.", opt_c, *critic);
    return out;
}

void restore_generator(UnetGenerator& gen, const Checkpoint& ckpt) {
    for (const auto& p : gen->named_parameters()) {
        copy_into(p.value(), require_tensor(ckpt, "g." + p.key()), "g." + p.key());
    }
    for (const auto& b : gen->named_buffers()) {
        copy_into(b.value(), require_tensor(ckpt, "g." + b.key()), "g." + b.key());
    }
}

void restore_state(UnetGenerator& gen, PatchCritic& critic,
                   torch::optim::Adam& opt_g, torch::optim::Adam& opt_c,
                   const Checkpoint& ckpt) {
    restore_generator(gen, ckpt);
    for (const auto& p : critic->named_parameters()) {
        copy_into(p.value(), require_tensor(ckpt, "c." + p.key()), "c." + p.key());
    }
    for (const auto& b : critic->named_buffers()) {
        copy_into(b.value(), require_tensor(ckpt, "c." + b.key()), "c." + b.key());
    }

    const auto restore_optimizer = [&ckpt](const std::string& prefix,
                                           torch::optim::Adam& opt,
                                           const torch::nn::Module& m) {
        for (const auto& p : m.named_parameters()) {
            const auto* avg = find_tensor(ckpt, prefix + p.key() + ".exp_avg");
            if (avg == nullptr) {
                continue;
            }
            const auto& avg_sq = require_tensor(ckpt, prefix + p.key() + ".exp_avg_sq");
            const auto& step = require_tensor(ckpt, prefix + p.key() + ".step");
            auto st = std::make_unique<torch::optim::AdamParamState>();
            st->step(static_cast<std::int64_t>(step.item<float>()));
            st->exp_avg(avg->to(p.value().dtype()).clone());
            st->exp_avg_sq(avg_sq.to(p.value().dtype()).clone());
            opt.state()[p.value().unsafeGetTensorImpl()] = std::move(st);
        }
    };
    restore_optimizer("opt_g.", opt_g, *gen);
    restore_optimizer("opt_c.", opt_c, *critic);
}

CheckpointRef select_best_checkpoint(const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(out_dir, ec)) {
        if (entry.is_regular_file() && entry.path().extension() == ".ckpt") {
            files.push_back(entry.path());
        }
    }
    if (ec) {
        throw IoError("cannot scan checkpoint directory " + out_dir.string() + ": " +
                      ec.message());
    }
    if (files.empty()) {
        throw IoError("no checkpoints found in " + out_dir.string());
    }
    std::sort(files.begin(), files.end());

    CheckpointRef best;
    bool have = false;
    for (const auto& file : files) {
        const auto m = load_manifest(file);
        const bool better = !have || m.val_mae < best.val_mae ||
                            (m.val_mae == best.val_mae && m.iteration < best.iteration);
        if (better) {
            best = {file, m.id, m.iteration, m.val_mae};
            have = true;
        }
    }
    return best;
}

void write_best_pointer(const std::filesystem::path& out_dir, const CheckpointRef& best) {
    const nlohmann::json j{
        {"id", best.id},
        {"file", best.file.filename().string()},
        {"iteration", best.iteration},
        {"val_mae", best.val_mae},
    };
    const auto path = out_dir / "best_checkpoint.json";
    std::ofstream os(path, std::ios::trunc);
    if (!os) {
        throw IoError("cannot write " + path.string());
    }
    os << j.dump(2) << "\n";
    if (!os.good()) {
        throw IoError("failed while writing " + path.string());
    }
}

} // namespace cilab::gan
