#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <utility>
#include <vector>

#include "cilab/field.hpp"
#include "cilab/rng.hpp"

namespace cilab {

/// One dataset record: src is the late-time field the model observes,
/// tar the initial condition it must reconstruct. Both are stored in
/// physical amplitude; see to_training_scale.
struct SamplePair {
    Field src;
    Field tar;
    std::int64_t index = 0;
};

/// Everything needed to regenerate a dataset byte-for-byte.
struct DatasetMeta {
    int grid_n = 128;
    std::int64_t n_samples = 1;
    PdeParams pde;
    double init_amp = 0.02; ///< interior init drawn Uniform[-init_amp, init_amp)
    std::uint64_t seed = 0;
    double scale = 50.0;    ///< training scale hint, default 1/init_amp
    int float_width = 4;    ///< serialized float byte width (f32)
};

/// Interior nodes i.i.d. Uniform[-amp, amp), drawn row-major so the seed
/// pins the field exactly; boundary ring set to bc_value.
Field sample_initial_condition(CounterRng& rng, int grid_n, double amp,
                               double bc_value = 0.0);

struct GenerateSummary {
    std::int64_t count = 0;
    double elapsed_seconds = 0.0;
};

/// Generates n_samples pairs: tar_k from child_seed(seed, k), src_k by
/// running the forward solver for pde.n_steps steps. Writes the binary
/// container at out_path plus a human-readable sidecar
/// (<stem>.meta.json) duplicating the header.
///
/// Container layout (little-endian):
///   magic "CIP1" | u32 version=1 | u32 grid_n | u64 n_samples |
///   u32 float_width=4 | u32 reserved=0 | f64 gamma | f64 kappa | f64 dt |
///   u32 n_steps | f64 init_amp | u64 seed | f64 scale
/// followed by n_samples records, each src then tar as grid_n^2 f32
/// values in row-major order.
GenerateSummary generate_dataset(const DatasetMeta& meta,
                                 const std::filesystem::path& out_path);

/// Writes explicit records under the same container layout (plus sidecar);
/// meta.n_samples must equal pairs.size(). Simulation snapshots use this.
void write_pairs(const std::filesystem::path& out_path, const DatasetMeta& meta,
                 const std::vector<SamplePair>& pairs);

/// Half-open record range [begin, end).
struct IndexRange {
    std::int64_t begin = 0;
    std::int64_t end = 0;
};

/// Header only; validates magic/version/width and the exact payload size.
DatasetMeta read_dataset_meta(const std::filesystem::path& path);

/// Loads records (all, or the given range). Fields come back as doubles
/// widened from the serialized f32 values, so a load after generate
/// round-trips bit-exactly at serialized precision.
std::pair<std::vector<SamplePair>, DatasetMeta>
load_pairs(const std::filesystem::path& path,
           std::optional<IndexRange> range = std::nullopt);

/// Both fields multiplied by scale. With the default scale = 1/init_amp
/// the targets fill [-1,1), matching the generator's output range.
SamplePair to_training_scale(SamplePair pair, double scale);

/// Random-access record reader that keeps the file open, for datasets too
/// large to hold in memory. The header is validated once at construction.
class DatasetReader {
  public:
    explicit DatasetReader(const std::filesystem::path& path);

    const DatasetMeta& meta() const { return meta_; }
    SamplePair read(std::int64_t index);

  private:
    std::filesystem::path path_;
    DatasetMeta meta_;
    std::ifstream is_;
};

/// Raw header bytes of a dataset file, hashed into checkpoint manifests
/// so a model stays tied to the data it was trained on.
std::string dataset_meta_hash(const std::filesystem::path& path);

} // namespace cilab
