#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gvg {

// Multichannel time-series window, channel-major buffer.
struct EegEpoch {
    int channels = 8;
    int samples = 256;
    double rate_hz = 200.0;
    std::vector<double> data;  // channels * samples

    double at(int ch, int t) const { return data[ch * samples + t]; }
};

// H x W x C float image with values in [0,1].
struct ImageTensor {
    int height = 32;
    int width = 32;
    int channels = 3;
    std::vector<double> data;  // (h*W + w)*C + c

    double at(int h, int w, int c) const { return data[(h * width + w) * channels + c]; }
    double& at(int h, int w, int c) { return data[(h * width + w) * channels + c]; }
};

struct TextLabel {
    int class_id = 0;
    std::string prompt;
};

enum class DatasetKind { visual, clinical };
enum class Split { train, val, test };

std::string to_string(DatasetKind k);
std::string to_string(Split s);
DatasetKind dataset_kind_from_string(const std::string& s);
Split split_from_string(const std::string& s);

// The alignment training unit. Clinical samples have no image until a proxy
// is attached.
struct TripletSample {
    EegEpoch eeg;
    std::optional<ImageTensor> image;
    TextLabel label;
    std::string dataset_tag;
    int coarse = 0;  // latent factors, recorded for diagnostics
    int fine = 0;
};

struct ClassInfo {
    int id = 0;
    std::string name;    // unique within the dataset, used as the option label
    std::string prompt;  // names the coarse category; shared across classes with equal coarse
    int coarse = 0;
    int fine = 0;
};

struct SampleInfo {
    std::string eeg_path;    // relative to base_dir
    std::string image_path;  // empty means absent
    int class_id = 0;
    Split split = Split::train;
    int coarse = 0;
    int fine = 0;

    bool has_image() const { return !image_path.empty(); }
};

struct DatasetManifest {
    std::string name;
    DatasetKind kind = DatasetKind::visual;
    std::vector<ClassInfo> classes;
    double sampling_weight = 1.0;
    std::vector<SampleInfo> samples;
    std::map<std::string, std::string> provenance;  // set when proxies are attached
    std::string base_dir;  // directory the relative paths resolve against (not serialized)

    std::vector<int64_t> split_indices(Split s) const;
    std::string resolve(const std::string& rel_path) const;
};

struct DatasetSpec {
    std::string name = "dataset";
    DatasetKind kind = DatasetKind::visual;
    int num_classes = 4;
    int samples_per_class = 48;
    double noise_level = 0.5;
    uint64_t seed = 0;
    double sampling_weight = 0.0;  // 0 -> default by kind (visual 1.0, clinical 0.3)
    // (coarse, fine) per class; empty -> class c maps to (c % 2, c / 2)
    std::vector<std::pair<int, int>> class_latents;
    int channels = 8;
    int samples = 256;
    double rate_hz = 200.0;
    int image_size = 32;
};

// ---- file formats -----------------------------------------------------------

// EEG1: magic, u16 channels, u32 samples, f32 rate_hz, payload LE f32
// channel-major.
void save_eeg(const std::string& path, const EegEpoch& e);
EegEpoch load_eeg(const std::string& path);

// IMG1: magic, u16 height, u16 width, u16 channels, payload LE f32 row-major.
void save_image(const std::string& path, const ImageTensor& img);
ImageTensor load_image(const std::string& path);

void save_manifest(const std::string& path, const DatasetManifest& m);
DatasetManifest load_manifest(const std::string& path);

// ---- generation ---------------------------------------------------------------

// Draws every sample from a counter-based substream of spec.seed, so output
// bytes depend only on the spec. EEG mixes class-keyed sinusoids (frequency
// from the coarse factor, spatial mixing from the fine factor) plus Gaussian
// noise; visual-kind datasets also render a hue (coarse) / layout (fine)
// pattern image sharing a per-sample instance latent with the EEG phase.
DatasetManifest generate_dataset(const DatasetSpec& spec, const std::string& out_dir);

// Per-class largest-remainder apportionment; each split's per-class count is
// within one sample of the exact ratio.
void stratified_split(DatasetManifest& m, double train, double val, double test, uint64_t seed);

// ---- loading --------------------------------------------------------------------

// Caches decoded samples and records every file it opens; tests audit the
// log to prove a stage never touched files it must not read.
class DataStore {
public:
    const TripletSample& get(const DatasetManifest& m, int64_t index);
    const std::vector<std::string>& access_log() const { return access_log_; }

private:
    std::map<std::string, TripletSample> cache_;
    std::vector<std::string> access_log_;
};

}  // namespace gvg
