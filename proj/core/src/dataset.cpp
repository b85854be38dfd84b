#include "cilab/dataset.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "cilab/binary_io.hpp"
#include "cilab/solver.hpp"

namespace cilab {

namespace {

constexpr std::array<char, 4> kMagic = {'C', 'I', 'P', '1'};
constexpr std::uint32_t kVersion = 1;
constexpr std::streamoff kHeaderBytes = 80;

std::filesystem::path sidecar_path(std::filesystem::path p) {
    p.replace_extension(".meta.json");
    return p;
}

void write_header(std::ostream& os, const DatasetMeta& m) {
    os.write(kMagic.data(), kMagic.size());
    io::put_u32(os, kVersion);
    io::put_u32(os, static_cast<std::uint32_t>(m.grid_n));
    io::put_u64(os, static_cast<std::uint64_t>(m.n_samples));
    io::put_u32(os, static_cast<std::uint32_t>(m.float_width));
    io::put_u32(os, 0); // reserved
    io::put_f64(os, m.pde.gamma);
    io::put_f64(os, m.pde.kappa);
    io::put_f64(os, m.pde.dt);
    io::put_u32(os, static_cast<std::uint32_t>(m.pde.n_steps));
    io::put_f64(os, m.init_amp);
    io::put_u64(os, m.seed);
    io::put_f64(os, m.scale);
}

void write_field_f32(std::ostream& os, const Field& f) {
    std::vector<float> buf(f.size());
    const auto vals = f.values();
    for (size_t k = 0; k < buf.size(); ++k) buf[k] = static_cast<float>(vals[k]);
    io::put_f32_array(os, buf);
}

Field read_field_f32(std::istream& is, int n, const std::string& what) {
    std::vector<float> buf(static_cast<size_t>(n) * n);
    io::get_f32_array(is, buf, what);
    Field f(n, 0.0);
    auto vals = f.values();
    for (size_t k = 0; k < buf.size(); ++k) {
        const double v = static_cast<double>(buf[k]);
        if (!std::isfinite(v)) {
            throw FormatError("non-finite value in " + what);
        }
        vals[k] = v;
    }
    return f;
}

void write_sidecar(const std::filesystem::path& path, const DatasetMeta& m) {
    nlohmann::json j;
    j["magic"] = "CIP1";
    j["version"] = kVersion;
    j["grid_n"] = m.grid_n;
    j["n_samples"] = m.n_samples;
    j["float_width"] = m.float_width;
    j["gamma"] = m.pde.gamma;
    j["kappa"] = m.pde.kappa;
    j["dt"] = m.pde.dt;
    j["n_steps"] = m.pde.n_steps;
    j["init_amp"] = m.init_amp;
    j["seed"] = m.seed;
    j["scale"] = m.scale;
    std::ofstream os(sidecar_path(path));
    if (!os) throw IoError("cannot write " + sidecar_path(path).string());
    os << j.dump(2) << "\n";
}

} // namespace

Field sample_initial_condition(CounterRng& rng, int grid_n, double amp,
                               double bc_value) {
    if (grid_n < 3) {
        throw GridError("grid_n must be >= 3, got " + std::to_string(grid_n));
    }
    if (amp < 0.0 || !std::isfinite(amp)) {
        throw GridError("init amplitude must be >= 0 and finite");
    }
    Field f(grid_n, bc_value);
    for (int i = 1; i < grid_n - 1; ++i) {
        for (int j = 1; j < grid_n - 1; ++j) {
            f(i, j) = rng.next_symmetric(amp);
        }
    }
    return f;
}

namespace {

void validate_meta(const DatasetMeta& meta) {
    if (meta.grid_n != meta.pde.grid_n) {
        throw ShapeError("meta.grid_n does not match pde.grid_n");
    }
    if (!(meta.scale > 0.0) || !std::isfinite(meta.scale)) {
        throw ConfigError("scale must be positive and finite");
    }
    if (meta.float_width != 4) {
        throw ConfigError("only float_width 4 is supported");
    }
}

} // namespace

GenerateSummary generate_dataset(const DatasetMeta& meta,
                                 const std::filesystem::path& out_path) {
    if (meta.n_samples < 1) {
        throw ConfigError("n_samples must be >= 1");
    }
    validate_meta(meta);

    const auto t0 = std::chrono::steady_clock::now();

    std::ofstream os(out_path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot write " + out_path.string());
    write_header(os, meta);

    for (std::int64_t k = 0; k < meta.n_samples; ++k) {
        CounterRng rng(child_seed(meta.seed, static_cast<std::uint64_t>(k)));
        const Field tar = sample_initial_condition(rng, meta.grid_n, meta.init_amp,
                                                   meta.pde.bc_value);
        const Field src = simulate(tar, meta.pde, meta.pde.n_steps);
        write_field_f32(os, src);
        write_field_f32(os, tar);
    }
    os.flush();
    if (!os) throw IoError("write failed for " + out_path.string());
    os.close();

    write_sidecar(out_path, meta);

    const auto t1 = std::chrono::steady_clock::now();
    return {meta.n_samples, std::chrono::duration<double>(t1 - t0).count()};
}

void write_pairs(const std::filesystem::path& out_path, const DatasetMeta& meta,
                 const std::vector<SamplePair>& pairs) {
    if (meta.n_samples != static_cast<std::int64_t>(pairs.size())) {
        throw ConfigError("meta.n_samples does not match the record count");
    }
    if (pairs.empty()) {
        throw ConfigError("write_pairs needs at least one record");
    }
    validate_meta(meta);
    for (const auto& p : pairs) {
        if (p.src.n() != meta.grid_n || p.tar.n() != meta.grid_n) {
            throw ShapeError("record " + std::to_string(p.index) +
                             " does not match grid_n " + std::to_string(meta.grid_n));
        }
    }

    std::ofstream os(out_path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot write " + out_path.string());
    write_header(os, meta);
    for (const auto& p : pairs) {
        write_field_f32(os, p.src);
        write_field_f32(os, p.tar);
    }
    os.flush();
    if (!os) throw IoError("write failed for " + out_path.string());
    os.close();

    write_sidecar(out_path, meta);
}

namespace {

DatasetMeta read_header(std::istream& is, const std::filesystem::path& path) {
    std::array<char, 4> magic{};
    if (!is.read(magic.data(), magic.size())) {
        throw FormatError(path.string() + ": truncated magic at byte offset 0");
    }
    if (magic != kMagic) {
        throw FormatError(path.string() + ": bad magic at byte offset 0");
    }
    const auto version = io::get_u32(is, "version");
    if (version != kVersion) {
        throw FormatError(path.string() + ": unsupported version " + std::to_string(version));
    }
    DatasetMeta m;
    m.grid_n = static_cast<int>(io::get_u32(is, "grid_n"));
    m.n_samples = static_cast<std::int64_t>(io::get_u64(is, "n_samples"));
    m.float_width = static_cast<int>(io::get_u32(is, "float_width"));
    if (m.float_width != 4) {
        throw FormatError(path.string() + ": unsupported float width " +
                          std::to_string(m.float_width));
    }
    const auto reserved = io::get_u32(is, "reserved");
    if (reserved != 0) {
        throw FormatError(path.string() + ": nonzero reserved word");
    }
    const double gamma = io::get_f64(is, "gamma");
    const double kappa = io::get_f64(is, "kappa");
    const double dt = io::get_f64(is, "dt");
    const int n_steps = static_cast<int>(io::get_u32(is, "n_steps"));
    m.init_amp = io::get_f64(is, "init_amp");
    m.seed = io::get_u64(is, "seed");
    m.scale = io::get_f64(is, "scale");
    // The container does not carry bc_value; the format fixes it at 0.
    m.pde = PdeParams::create(gamma, kappa, dt, n_steps, m.grid_n, 0.0);
    return m;
}

} // namespace

DatasetMeta read_dataset_meta(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    const DatasetMeta m = read_header(is, path);

    is.seekg(0, std::ios::end);
    const std::streamoff actual = is.tellg();
    const std::streamoff record = static_cast<std::streamoff>(m.grid_n) * m.grid_n * 2 * 4;
    const std::streamoff expected = kHeaderBytes + record * m.n_samples;
    if (actual != expected) {
        throw FormatError(path.string() + ": payload size " + std::to_string(actual) +
                          " does not match expected " + std::to_string(expected) +
                          " (truncation or trailing bytes after offset " +
                          std::to_string(std::min(actual, expected)) + ")");
    }
    return m;
}

std::pair<std::vector<SamplePair>, DatasetMeta>
load_pairs(const std::filesystem::path& path, std::optional<IndexRange> range) {
    const DatasetMeta m = read_dataset_meta(path);

    IndexRange r = range.value_or(IndexRange{0, m.n_samples});
    if (r.begin < 0 || r.end > m.n_samples || r.begin > r.end) {
        throw FormatError(path.string() + ": record range [" + std::to_string(r.begin) +
                          "," + std::to_string(r.end) + ") out of bounds for " +
                          std::to_string(m.n_samples) + " samples");
    }

    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    const std::streamoff record = static_cast<std::streamoff>(m.grid_n) * m.grid_n * 2 * 4;
    is.seekg(kHeaderBytes + record * r.begin);

    std::vector<SamplePair> pairs;
    pairs.reserve(static_cast<size_t>(r.end - r.begin));
    for (std::int64_t k = r.begin; k < r.end; ++k) {
        SamplePair p;
        p.src = read_field_f32(is, m.grid_n, "src record " + std::to_string(k));
        p.tar = read_field_f32(is, m.grid_n, "tar record " + std::to_string(k));
        p.index = k;
        pairs.push_back(std::move(p));
    }
    return {std::move(pairs), m};
}

DatasetReader::DatasetReader(const std::filesystem::path& path)
    : path_(path), meta_(read_dataset_meta(path)), is_(path, std::ios::binary) {
    if (!is_) throw IoError("cannot open " + path.string());
}

SamplePair DatasetReader::read(std::int64_t index) {
    if (index < 0 || index >= meta_.n_samples) {
        throw FormatError(path_.string() + ": record " + std::to_string(index) +
                          " out of bounds for " + std::to_string(meta_.n_samples) +
                          " samples");
    }
    const std::streamoff record =
        static_cast<std::streamoff>(meta_.grid_n) * meta_.grid_n * 2 * 4;
    is_.clear();
    is_.seekg(kHeaderBytes + record * index);

    SamplePair p;
    p.src = read_field_f32(is_, meta_.grid_n, "src record " + std::to_string(index));
    p.tar = read_field_f32(is_, meta_.grid_n, "tar record " + std::to_string(index));
    p.index = index;
    return p;
}

SamplePair to_training_scale(SamplePair pair, double scale) {
    if (!(scale > 0.0)) {
        throw ConfigError("scale must be > 0");
    }
    for (double& v : pair.src.values()) v *= scale;
    for (double& v : pair.tar.values()) v *= scale;
    return pair;
}

std::string dataset_meta_hash(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    std::array<char, kHeaderBytes> header{};
    if (!is.read(header.data(), header.size())) {
        throw FormatError(path.string() + ": truncated header");
    }
    // FNV-1a over the raw header bytes.
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : header) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

} // namespace cilab
