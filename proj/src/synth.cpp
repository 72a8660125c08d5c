#include "gvg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "gvg/common.hpp"
#include "gvg/rng.hpp"
#include "gvg/serialize.hpp"
#include "json.hpp"

namespace gvg {

namespace {

constexpr const char* kCoarseWords[4] = {"crimson", "azure", "emerald", "amber"};
constexpr const char* kFineWords[4] = {"stripes", "rings", "bars", "checker"};
constexpr double kPalette[4][3] = {
    {0.82, 0.38, 0.30},
    {0.30, 0.42, 0.82},
    {0.35, 0.75, 0.38},
    {0.80, 0.70, 0.30},
};

// EEG mixture: a primary sinusoid whose frequency is keyed to the coarse
// factor, spatially mixed by a fine-keyed channel profile, plus a harmonic
// whose phase/amplitude carry the per-sample instance latent, plus noise.
EegEpoch synth_eeg(const DatasetSpec& spec, int coarse, int fine, double u, Rng& rng) {
    EegEpoch e;
    e.channels = spec.channels;
    e.samples = spec.samples;
    e.rate_hz = spec.rate_hz;
    e.data.assign(static_cast<size_t>(e.channels) * e.samples, 0.0);

    const double freq = 6.0 * (coarse + 1);
    std::vector<double> w1(e.channels), w2(e.channels);
    for (int ch = 0; ch < e.channels; ch++) {
        w1[ch] = std::sin(M_PI * (ch + 1.0) * (fine + 1.0) / (e.channels + 1.0));
        w2[ch] = 0.6 * std::cos(M_PI * (ch + 0.5) * (fine + 2.0) / (e.channels + 1.0));
    }
    const double amp = 0.9 + 0.2 * rng.uniform();
    const double phase = 0.9 * (u - 0.5);
    const double phase2 = 2.2 * u;
    for (int ch = 0; ch < e.channels; ch++) {
        for (int t = 0; t < e.samples; t++) {
            double tt = t / e.rate_hz;
            double v = amp * w1[ch] * std::sin(2.0 * M_PI * freq * tt + phase) +
                       0.45 * w2[ch] * std::sin(4.0 * M_PI * freq * tt + phase2) +
                       spec.noise_level * rng.gaussian();
            e.data[static_cast<size_t>(ch) * e.samples + t] = v;
        }
    }
    return e;
}

// Hue from the coarse factor, layout from the fine factor, pattern shift from
// the instance latent, uniform pixel jitter on top.
ImageTensor render_image(const DatasetSpec& spec, int coarse, int fine, double u, Rng& rng) {
    ImageTensor img;
    img.height = img.width = spec.image_size;
    img.channels = 3;
    img.data.assign(static_cast<size_t>(img.height) * img.width * 3, 0.0);
    const double* base = kPalette[coarse % 4];
    double accent[3];
    for (int c = 0; c < 3; c++) accent[c] = 0.15 + 0.7 * (1.0 - base[c]);
    const double offset = 8.0 * u;
    const double jitter = 0.10 * spec.noise_level;
    const double cx = (img.height - 1) / 2.0, cy = (img.width - 1) / 2.0;
    for (int h = 0; h < img.height; h++) {
        for (int w = 0; w < img.width; w++) {
            bool on = false;
            switch (fine % 4) {
                case 0: on = std::fmod(h + offset, 8.0) < 4.0; break;
                case 1: on = std::fmod(std::hypot(h - cx, w - cy) + offset, 8.0) < 4.0; break;
                case 2: on = std::fmod(w + offset, 8.0) < 4.0; break;
                default:
                    on = (static_cast<int>((h + offset) / 4.0) + static_cast<int>((w + offset) / 4.0)) % 2 == 0;
            }
            for (int c = 0; c < 3; c++) {
                double v = (on ? accent[c] : base[c]) + jitter * (2.0 * rng.uniform() - 1.0);
                img.at(h, w, c) = std::clamp(v, 0.0, 1.0);
            }
        }
    }
    return img;
}

std::string sample_stem(int64_t index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%05lld", static_cast<long long>(index));
    return buf;
}

}  // namespace

std::string to_string(DatasetKind k) { return k == DatasetKind::visual ? "visual" : "clinical"; }

std::string to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        default: return "test";
    }
}

DatasetKind dataset_kind_from_string(const std::string& s) {
    if (s == "visual") return DatasetKind::visual;
    if (s == "clinical") return DatasetKind::clinical;
    require(false, "unknown dataset kind: " + s);
    return DatasetKind::visual;
}

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "val") return Split::val;
    if (s == "test") return Split::test;
    require(false, "unknown split: " + s);
    return Split::train;
}

std::vector<int64_t> DatasetManifest::split_indices(Split s) const {
    std::vector<int64_t> out;
    for (size_t i = 0; i < samples.size(); i++)
        if (samples[i].split == s) out.push_back(static_cast<int64_t>(i));
    return out;
}

std::string DatasetManifest::resolve(const std::string& rel_path) const {
    if (base_dir.empty()) return rel_path;
    return (std::filesystem::path(base_dir) / rel_path).string();
}

// ---- file formats -------------------------------------------------------------

void save_eeg(const std::string& path, const EegEpoch& e) {
    require(e.data.size() == static_cast<size_t>(e.channels) * e.samples,
            "EEG buffer does not match declared channels x samples");
    std::string buf;
    buf += "EEG1";
    put_u16(buf, static_cast<uint16_t>(e.channels));
    put_u32(buf, static_cast<uint32_t>(e.samples));
    put_f32(buf, static_cast<float>(e.rate_hz));
    for (double v : e.data) put_f32(buf, static_cast<float>(v));
    write_file_atomic(path, buf);
}

EegEpoch load_eeg(const std::string& path) {
    std::string buf = read_file(path);
    require(buf.size() >= 4 && buf.compare(0, 4, "EEG1") == 0, "not an EEG1 file: " + path);
    size_t pos = 4;
    EegEpoch e;
    e.channels = get_u16(buf, pos);
    e.samples = static_cast<int>(get_u32(buf, pos));
    e.rate_hz = get_f32(buf, pos);
    size_t n = static_cast<size_t>(e.channels) * e.samples;
    e.data.resize(n);
    for (size_t i = 0; i < n; i++) e.data[i] = get_f32(buf, pos);
    require(pos == buf.size(), "trailing bytes in EEG1 file: " + path);
    return e;
}

void save_image(const std::string& path, const ImageTensor& img) {
    require(img.data.size() == static_cast<size_t>(img.height) * img.width * img.channels,
            "image buffer does not match declared shape");
    std::string buf;
    buf += "IMG1";
    put_u16(buf, static_cast<uint16_t>(img.height));
    put_u16(buf, static_cast<uint16_t>(img.width));
    put_u16(buf, static_cast<uint16_t>(img.channels));
    for (double v : img.data) put_f32(buf, static_cast<float>(v));
    write_file_atomic(path, buf);
}

ImageTensor load_image(const std::string& path) {
    std::string buf = read_file(path);
    require(buf.size() >= 4 && buf.compare(0, 4, "IMG1") == 0, "not an IMG1 file: " + path);
    size_t pos = 4;
    ImageTensor img;
    img.height = get_u16(buf, pos);
    img.width = get_u16(buf, pos);
    img.channels = get_u16(buf, pos);
    size_t n = static_cast<size_t>(img.height) * img.width * img.channels;
    img.data.resize(n);
    for (size_t i = 0; i < n; i++) img.data[i] = get_f32(buf, pos);
    require(pos == buf.size(), "trailing bytes in IMG1 file: " + path);
    return img;
}

// ---- manifest JSON --------------------------------------------------------------

void save_manifest(const std::string& path, const DatasetManifest& m) {
    nlohmann::json j;
    j["name"] = m.name;
    j["kind"] = to_string(m.kind);
    j["sampling_weight"] = m.sampling_weight;
    j["classes"] = nlohmann::json::array();
    for (const auto& c : m.classes) {
        j["classes"].push_back({{"id", c.id},
                                {"name", c.name},
                                {"prompt", c.prompt},
                                {"latent", {{"coarse", c.coarse}, {"fine", c.fine}}}});
    }
    j["samples"] = nlohmann::json::array();
    for (const auto& s : m.samples) {
        nlohmann::json js = {{"eeg_path", s.eeg_path},
                             {"class_id", s.class_id},
                             {"split", to_string(s.split)},
                             {"latent", {{"coarse", s.coarse}, {"fine", s.fine}}}};
        if (s.has_image())
            js["image_path"] = s.image_path;
        else
            js["image_path"] = nullptr;
        j["samples"].push_back(js);
    }
    if (!m.provenance.empty()) j["provenance"] = m.provenance;
    write_file_atomic(path, j.dump(2) + "\n");
}

DatasetManifest load_manifest(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        fail("manifest " + path + " is not valid JSON: " + e.what());
    }
    DatasetManifest m;
    m.name = j.at("name").get<std::string>();
    m.kind = dataset_kind_from_string(j.at("kind").get<std::string>());
    m.sampling_weight = j.at("sampling_weight").get<double>();
    for (const auto& jc : j.at("classes")) {
        ClassInfo c;
        c.id = jc.at("id").get<int>();
        c.name = jc.at("name").get<std::string>();
        c.prompt = jc.at("prompt").get<std::string>();
        c.coarse = jc.at("latent").at("coarse").get<int>();
        c.fine = jc.at("latent").at("fine").get<int>();
        m.classes.push_back(std::move(c));
    }
    for (const auto& js : j.at("samples")) {
        SampleInfo s;
        s.eeg_path = js.at("eeg_path").get<std::string>();
        if (!js.at("image_path").is_null()) s.image_path = js.at("image_path").get<std::string>();
        s.class_id = js.at("class_id").get<int>();
        s.split = split_from_string(js.at("split").get<std::string>());
        s.coarse = js.at("latent").at("coarse").get<int>();
        s.fine = js.at("latent").at("fine").get<int>();
        m.samples.push_back(std::move(s));
    }
    if (j.contains("provenance"))
        m.provenance = j.at("provenance").get<std::map<std::string, std::string>>();
    m.base_dir = std::filesystem::path(path).parent_path().string();
    return m;
}

// ---- generation -------------------------------------------------------------------

DatasetManifest generate_dataset(const DatasetSpec& spec, const std::string& out_dir) {
    require(spec.num_classes >= 2, "generate_dataset: need at least 2 classes");
    require(spec.samples_per_class >= 4, "generate_dataset: need at least 4 samples per class");
    require(spec.noise_level >= 0.0, "generate_dataset: noise_level must be >= 0");
    require(spec.samples % 2 == 0 && spec.samples > 0, "generate_dataset: invalid sample count");

    std::vector<std::pair<int, int>> latents = spec.class_latents;
    if (latents.empty()) {
        for (int c = 0; c < spec.num_classes; c++) latents.push_back({c % 2, c / 2});
    }
    require(static_cast<int>(latents.size()) == spec.num_classes,
            "generate_dataset: class_latents size must equal num_classes");
    for (auto [co, fi] : latents)
        require(co >= 0 && co < 4 && fi >= 0 && fi < 4,
                "generate_dataset: latent factors must be in [0,4)");

    DatasetManifest m;
    m.name = spec.name;
    m.kind = spec.kind;
    m.sampling_weight = spec.sampling_weight > 0.0
                            ? spec.sampling_weight
                            : (spec.kind == DatasetKind::visual ? 1.0 : 0.3);
    for (int c = 0; c < spec.num_classes; c++) {
        ClassInfo ci;
        ci.id = c;
        ci.coarse = latents[c].first;
        ci.fine = latents[c].second;
        ci.name = std::string(kCoarseWords[ci.coarse]) + "_" + kFineWords[ci.fine];
        ci.prompt = std::string("a mostly ") + kCoarseWords[ci.coarse] + " scene";
        m.classes.push_back(std::move(ci));
    }

    std::filesystem::create_directories(std::filesystem::path(out_dir) / "eeg");
    if (spec.kind == DatasetKind::visual)
        std::filesystem::create_directories(std::filesystem::path(out_dir) / "img");
    m.base_dir = out_dir;

    const int64_t total = static_cast<int64_t>(spec.num_classes) * spec.samples_per_class;
    m.samples.resize(total);
    parallel_for(total, [&](int64_t i) {
        const int c = static_cast<int>(i / spec.samples_per_class);
        Rng rng = Rng::substream(spec.seed, static_cast<uint64_t>(i));
        const double u = rng.uniform();  // instance latent shared by EEG and image
        SampleInfo s;
        s.class_id = c;
        s.coarse = latents[c].first;
        s.fine = latents[c].second;
        s.eeg_path = "eeg/" + sample_stem(i) + ".eeg";
        EegEpoch eeg = synth_eeg(spec, s.coarse, s.fine, u, rng);
        save_eeg(m.resolve(s.eeg_path), eeg);
        if (spec.kind == DatasetKind::visual) {
            s.image_path = "img/" + sample_stem(i) + ".img";
            ImageTensor img = render_image(spec, s.coarse, s.fine, u, rng);
            save_image(m.resolve(s.image_path), img);
        }
        m.samples[i] = std::move(s);
    });
    return m;
}

void stratified_split(DatasetManifest& m, double train, double val, double test, uint64_t seed) {
    const double ratios[3] = {train, val, test};
    double sum = 0.0;
    int positive = 0;
    for (double r : ratios) {
        require(r >= 0.0, "stratified_split: ratios must be nonnegative");
        sum += r;
        if (r > 0.0) positive++;
    }
    require(std::fabs(sum - 1.0) <= 1e-9, "stratified_split: ratios must sum to 1");
    require(positive >= 1, "stratified_split: at least one ratio must be positive");

    for (size_t c = 0; c < m.classes.size(); c++) {
        std::vector<int64_t> idx;
        for (size_t i = 0; i < m.samples.size(); i++)
            if (m.samples[i].class_id == static_cast<int>(c)) idx.push_back(i);
        require(static_cast<int>(idx.size()) >= positive,
                "stratified_split: class " + std::to_string(c) + " has " +
                    std::to_string(idx.size()) + " samples, fewer than the " +
                    std::to_string(positive) + " splits");
        Rng rng = Rng::substream(seed, c);
        rng.shuffle(idx);

        const int64_t n = static_cast<int64_t>(idx.size());
        int64_t counts[3];
        double fracs[3];
        int64_t assigned = 0;
        for (int k = 0; k < 3; k++) {
            double target = ratios[k] * n;
            counts[k] = static_cast<int64_t>(std::floor(target));
            fracs[k] = target - counts[k];
            assigned += counts[k];
        }
        // hand leftover samples to the largest remainders, split order on ties
        std::vector<int> order = {0, 1, 2};
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return fracs[a] > fracs[b]; });
        for (int64_t r = 0; r < n - assigned; r++) counts[order[r % 3]]++;

        int64_t pos = 0;
        for (int k = 0; k < 3; k++) {
            Split s = k == 0 ? Split::train : (k == 1 ? Split::val : Split::test);
            for (int64_t j = 0; j < counts[k]; j++) m.samples[idx[pos++]].split = s;
        }
    }
}

// ---- loading ------------------------------------------------------------------------

const TripletSample& DataStore::get(const DatasetManifest& m, int64_t index) {
    require(index >= 0 && index < static_cast<int64_t>(m.samples.size()),
            "DataStore: sample index out of range for " + m.name);
    std::string key = m.name + "#" + std::to_string(index);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;

    const SampleInfo& s = m.samples[index];
    TripletSample t;
    std::string eeg_path = m.resolve(s.eeg_path);
    access_log_.push_back(eeg_path);
    t.eeg = load_eeg(eeg_path);
    if (s.has_image()) {
        std::string img_path = m.resolve(s.image_path);
        access_log_.push_back(img_path);
        t.image = load_image(img_path);
    }
    t.label.class_id = s.class_id;
    t.label.prompt = m.classes.at(s.class_id).prompt;
    t.dataset_tag = m.name;
    t.coarse = s.coarse;
    t.fine = s.fine;
    return cache_.emplace(std::move(key), std::move(t)).first->second;
}

}  // namespace gvg
