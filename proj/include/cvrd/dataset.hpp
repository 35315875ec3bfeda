#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cvrd/parallel.hpp"
#include "cvrd/radar.hpp"
#include "cvrd/rng.hpp"

namespace cvrd::radar {

static_assert(std::endian::native == std::endian::little,
              "sample records are little-endian on disk");

// Randomized scene generator parameters. Amplitudes are log-uniform,
// interferer strength is relative to the strongest object.
struct SceneDistribution {
    std::size_t n_objects_min = 1;
    std::size_t n_objects_max = 20;
    double beat_min = 0.02;
    double beat_max = 0.48;
    double doppler_min = -0.35;
    double doppler_max = 0.35;
    double object_amp_span_db = 30.0;
    std::size_t n_interferers_min = 1;
    std::size_t n_interferers_max = 3;
    double interferer_db_above_min = 10.0;
    double interferer_db_above_max = 30.0;
    double interferer_slope_ratio_max = 3.5;  // |slope_i / slope_ego| upper bound
    double noise_std = 0.3;
    std::size_t crop_rows = 96;
    std::size_t crop_cols = 96;

    void validate() const {
        if (n_objects_min < 1 || n_objects_max < n_objects_min || n_objects_max > 64)
            throw config_error("SceneDistribution: bad object count range");
        if (n_interferers_max < n_interferers_min || n_interferers_max > 8)
            throw config_error("SceneDistribution: bad interferer count range");
        if (!(beat_min >= 0.0 && beat_max < 0.5 && beat_min <= beat_max))
            throw config_error("SceneDistribution: bad beat range");
        if (!(doppler_min >= -0.5 && doppler_max < 0.5 && doppler_min <= doppler_max))
            throw config_error("SceneDistribution: bad doppler range");
        if (noise_std < 0.0) throw config_error("SceneDistribution: noise_std must be >= 0");
    }
};

inline Scene sample_scene(const SceneDistribution& dist, const RadarParams& p, Rng& rng) {
    Scene scene;
    const std::size_t n_obj = rng.integer(dist.n_objects_min, dist.n_objects_max);
    double strongest = 0.0;
    for (std::size_t i = 0; i < n_obj; ++i) {
        ObjectSpec o;
        o.beat_freq_norm = rng.uniform(dist.beat_min, dist.beat_max);
        o.doppler_freq_norm = rng.uniform(dist.doppler_min, dist.doppler_max);
        o.amplitude = db_to_amplitude(rng.uniform(-dist.object_amp_span_db, 0.0));
        o.phase_rad = rng.uniform(0.0, kTwoPi);
        strongest = std::max(strongest, o.amplitude);
        scene.objects.push_back(o);
    }
    const std::size_t n_intf =
        dist.n_interferers_max == 0 ? 0 : rng.integer(dist.n_interferers_min, dist.n_interferers_max);
    for (std::size_t i = 0; i < n_intf; ++i) {
        InterfererSpec f;
        // Slope ratio away from 1 so the difference chirp sweeps the IF band.
        double ratio = 0.0;
        do {
            ratio = rng.uniform(-dist.interferer_slope_ratio_max, dist.interferer_slope_ratio_max);
        } while (std::abs(ratio - 1.0) < 0.3);
        f.chirp_slope_hz_per_s = ratio * p.chirp_slope_hz_per_s;
        f.time_offset_s = 0.0;
        // Pick the ramp and in-ramp instant where the chirps cross, then
        // solve for the interferer start frequency that realizes it.
        const double cross_ramp = static_cast<double>(rng.index(p.n_ramps));
        const double tau = rng.uniform(0.0, static_cast<double>(p.n_fast) / p.sample_rate_hz);
        const double t_global = cross_ramp * p.ramp_duration_s + tau;
        f.chirp_start_hz = p.chirp_start_hz + p.chirp_slope_hz_per_s * tau -
                           f.chirp_slope_hz_per_s * (t_global - f.time_offset_s);
        f.amplitude = strongest * db_to_amplitude(rng.uniform(dist.interferer_db_above_min,
                                                              dist.interferer_db_above_max));
        f.phase_rad = rng.uniform(0.0, kTwoPi);
        scene.interferers.push_back(f);
    }
    scene.noise_std = dist.noise_std;
    scene.rng_seed = rng.bits();
    return scene;
}

// RD cell closest to an object's frequencies, in cropped coordinates.
// Returns false when the peak falls outside the crop window.
inline bool truth_cell(const ObjectSpec& o, const RadarParams& p, std::size_t crop_rows,
                       std::size_t crop_cols, std::pair<std::uint16_t, std::uint16_t>& cell) {
    const auto N = static_cast<double>(p.n_fast);
    const auto M = static_cast<long>(p.n_ramps);
    const long row = std::lround(o.beat_freq_norm * N);
    long col = std::lround(o.doppler_freq_norm * static_cast<double>(M));
    col = ((col % M) + M) % M;
    col = (col + M / 2) % M;  // fftshifted Doppler axis
    col -= static_cast<long>(crop_col_offset(p.n_ramps, crop_cols));
    if (row < 0 || row >= static_cast<long>(crop_rows) || col < 0 ||
        col >= static_cast<long>(crop_cols))
        return false;
    cell = {static_cast<std::uint16_t>(row), static_cast<std::uint16_t>(col)};
    return true;
}

inline std::vector<std::pair<std::uint16_t, std::uint16_t>> truth_cells_for_scene(
    const Scene& scene, const RadarParams& p, std::size_t crop_rows, std::size_t crop_cols) {
    std::set<std::pair<std::uint16_t, std::uint16_t>> cells;
    std::pair<std::uint16_t, std::uint16_t> cell;
    for (const auto& o : scene.objects)
        if (truth_cell(o, p, crop_rows, crop_cols, cell)) cells.insert(cell);
    return {cells.begin(), cells.end()};
}

// Scene for global sample `index` of a dataset run. The per-sample stream is
// derived from (seed, index), so generation order and worker count do not
// matter.
inline Scene scene_for_index(const SceneDistribution& dist, const RadarParams& p,
                             std::uint64_t seed, std::uint64_t index) {
    Rng rng = Rng::derive(seed, index);
    return sample_scene(dist, p, rng);
}

inline SamplePair make_sample(const Scene& scene, const RadarParams& p,
                              const SceneDistribution& dist) {
    const auto [clean_if, intf_if] = synthesize_if(scene, p);
    const RDMap rd_clean = range_doppler_map(clean_if);
    const RDMap rd_intf = range_doppler_map(intf_if);
    SamplePair pair = crop_and_standardize(rd_intf, rd_clean, dist.crop_rows, dist.crop_cols);
    pair.truth_cells = truth_cells_for_scene(scene, p, dist.crop_rows, dist.crop_cols);
    return pair;
}

inline std::vector<SamplePair> generate_dataset(std::size_t count, const RadarParams& p,
                                                const SceneDistribution& dist, std::uint64_t seed,
                                                std::uint64_t index_offset = 0) {
    if (count < 1) throw config_error("generate_dataset: count must be >= 1");
    p.validate();
    dist.validate();
    std::vector<SamplePair> out(count);
    parallel_for(count, [&](std::size_t i) {
        const Scene scene = scene_for_index(dist, p, seed, index_offset + i);
        out[i] = make_sample(scene, p, dist);
    });
    return out;
}

// --- on-disk records ------------------------------------------------------

namespace io {

inline constexpr char kMagic[5] = {'C', 'V', 'R', 'D', '1'};

template <typename T>
void write_raw(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::istream& is) {
    T v;
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}

inline void write_map_f32(std::ostream& os, const CMat& m) {
    for (const cplx& z : m.data) {
        write_raw(os, static_cast<float>(z.real()));
        write_raw(os, static_cast<float>(z.imag()));
    }
}

inline void read_map_f32(std::istream& is, CMat& m) {
    for (cplx& z : m.data) {
        const float re = read_raw<float>(is);
        const float im = read_raw<float>(is);
        z = cplx(re, im);
    }
}

}  // namespace io

inline void save_sample(const SamplePair& pair, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw config_error("save_sample: cannot open " + path);
    os.write(io::kMagic, sizeof(io::kMagic));
    const std::uint8_t flags = pair.interfered.standardized ? 1 : 0;
    io::write_raw(os, flags);
    io::write_raw(os, static_cast<std::uint16_t>(pair.interfered.data.rows));
    io::write_raw(os, static_cast<std::uint16_t>(pair.interfered.data.cols));
    io::write_raw(os, static_cast<std::uint16_t>(pair.truth_cells.size()));
    io::write_raw(os, static_cast<float>(pair.interfered.mean.real()));
    io::write_raw(os, static_cast<float>(pair.interfered.mean.imag()));
    io::write_raw(os, static_cast<float>(pair.interfered.scale));
    io::write_map_f32(os, pair.interfered.data);
    io::write_map_f32(os, pair.clean.data);
    for (const auto& [n, m] : pair.truth_cells) {
        io::write_raw(os, n);
        io::write_raw(os, m);
    }
}

inline SamplePair load_sample(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw config_error("load_sample: cannot open " + path);
    char magic[5];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, io::kMagic, sizeof(magic)) != 0)
        throw config_error("load_sample: bad magic in " + path);
    SamplePair pair;
    const std::uint8_t flags = io::read_raw<std::uint8_t>(is);
    const auto rows = io::read_raw<std::uint16_t>(is);
    const auto cols = io::read_raw<std::uint16_t>(is);
    const auto n_truth = io::read_raw<std::uint16_t>(is);
    const float mean_re = io::read_raw<float>(is);
    const float mean_im = io::read_raw<float>(is);
    const float scale = io::read_raw<float>(is);
    for (RDMap* m : {&pair.interfered, &pair.clean}) {
        m->standardized = (flags & 1) != 0;
        m->mean = cplx(mean_re, mean_im);
        m->scale = scale;
        m->data = CMat(rows, cols);
    }
    io::read_map_f32(is, pair.interfered.data);
    io::read_map_f32(is, pair.clean.data);
    pair.truth_cells.resize(n_truth);
    for (auto& [n, m] : pair.truth_cells) {
        n = io::read_raw<std::uint16_t>(is);
        m = io::read_raw<std::uint16_t>(is);
    }
    if (!is) throw config_error("load_sample: truncated record " + path);
    return pair;
}

// JSON round-trip for manifest persistence.
inline void to_json(nlohmann::json& j, const RadarParams& p) {
    j = {{"n_fast", p.n_fast},
         {"n_ramps", p.n_ramps},
         {"sample_rate_hz", p.sample_rate_hz},
         {"ramp_duration_s", p.ramp_duration_s},
         {"chirp_start_hz", p.chirp_start_hz},
         {"chirp_slope_hz_per_s", p.chirp_slope_hz_per_s},
         {"if_bandwidth_hz", p.if_bandwidth_hz}};
}

inline void from_json(const nlohmann::json& j, RadarParams& p) {
    p.n_fast = j.value("n_fast", p.n_fast);
    p.n_ramps = j.value("n_ramps", p.n_ramps);
    p.sample_rate_hz = j.value("sample_rate_hz", p.sample_rate_hz);
    p.ramp_duration_s = j.value("ramp_duration_s", p.ramp_duration_s);
    p.chirp_start_hz = j.value("chirp_start_hz", p.chirp_start_hz);
    p.chirp_slope_hz_per_s = j.value("chirp_slope_hz_per_s", p.chirp_slope_hz_per_s);
    p.if_bandwidth_hz = j.value("if_bandwidth_hz", p.if_bandwidth_hz);
}

inline void to_json(nlohmann::json& j, const SceneDistribution& d) {
    j = {{"n_objects_min", d.n_objects_min},
         {"n_objects_max", d.n_objects_max},
         {"beat_min", d.beat_min},
         {"beat_max", d.beat_max},
         {"doppler_min", d.doppler_min},
         {"doppler_max", d.doppler_max},
         {"object_amp_span_db", d.object_amp_span_db},
         {"n_interferers_min", d.n_interferers_min},
         {"n_interferers_max", d.n_interferers_max},
         {"interferer_db_above_min", d.interferer_db_above_min},
         {"interferer_db_above_max", d.interferer_db_above_max},
         {"interferer_slope_ratio_max", d.interferer_slope_ratio_max},
         {"noise_std", d.noise_std},
         {"crop_rows", d.crop_rows},
         {"crop_cols", d.crop_cols}};
}

inline void from_json(const nlohmann::json& j, SceneDistribution& d) {
    d.n_objects_min = j.value("n_objects_min", d.n_objects_min);
    d.n_objects_max = j.value("n_objects_max", d.n_objects_max);
    d.beat_min = j.value("beat_min", d.beat_min);
    d.beat_max = j.value("beat_max", d.beat_max);
    d.doppler_min = j.value("doppler_min", d.doppler_min);
    d.doppler_max = j.value("doppler_max", d.doppler_max);
    d.object_amp_span_db = j.value("object_amp_span_db", d.object_amp_span_db);
    d.n_interferers_min = j.value("n_interferers_min", d.n_interferers_min);
    d.n_interferers_max = j.value("n_interferers_max", d.n_interferers_max);
    d.interferer_db_above_min = j.value("interferer_db_above_min", d.interferer_db_above_min);
    d.interferer_db_above_max = j.value("interferer_db_above_max", d.interferer_db_above_max);
    d.interferer_slope_ratio_max = j.value("interferer_slope_ratio_max", d.interferer_slope_ratio_max);
    d.noise_std = j.value("noise_std", d.noise_std);
    d.crop_rows = j.value("crop_rows", d.crop_rows);
    d.crop_cols = j.value("crop_cols", d.crop_cols);
}

struct DatasetManifest {
    RadarParams params;
    SceneDistribution distribution;
    std::uint64_t seed = 0;
    std::size_t count = 0;       // training samples
    std::size_t eval_count = 0;  // held-out samples, indices continue after `count`
};

inline std::string sample_path(const std::string& dir, const std::string& split, std::size_t i) {
    char name[32];
    std::snprintf(name, sizeof(name), "sample_%06zu.bin", i);
    return dir + "/" + split + "/" + name;
}

inline void save_manifest(const DatasetManifest& mf, const std::string& dir) {
    nlohmann::json j;
    j["format"] = "CVRD1";
    j["params"] = mf.params;
    j["distribution"] = mf.distribution;
    j["seed"] = mf.seed;
    j["count"] = mf.count;
    j["eval_count"] = mf.eval_count;
    std::ofstream os(dir + "/manifest.json");
    if (!os) throw config_error("save_manifest: cannot write to " + dir);
    os << j.dump(2) << "\n";
}

inline DatasetManifest load_manifest(const std::string& dir) {
    std::ifstream is(dir + "/manifest.json");
    if (!is) throw config_error("load_manifest: no manifest.json in " + dir);
    nlohmann::json j = nlohmann::json::parse(is);
    DatasetManifest mf;
    mf.params = j.value("params", nlohmann::json::object()).get<RadarParams>();
    mf.distribution = j.value("distribution", nlohmann::json::object()).get<SceneDistribution>();
    mf.seed = j.value("seed", std::uint64_t{0});
    mf.count = j.value("count", std::size_t{0});
    mf.eval_count = j.value("eval_count", std::size_t{0});
    return mf;
}

// Generates and persists the train and eval splits of a dataset directory.
inline void write_dataset(const DatasetManifest& mf, const std::string& dir) {
    namespace fsys = std::filesystem;
    fsys::create_directories(dir + "/train");
    fsys::create_directories(dir + "/eval");
    save_manifest(mf, dir);
    const auto train = generate_dataset(mf.count, mf.params, mf.distribution, mf.seed, 0);
    for (std::size_t i = 0; i < train.size(); ++i)
        save_sample(train[i], sample_path(dir, "train", i));
    if (mf.eval_count > 0) {
        const auto eval =
            generate_dataset(mf.eval_count, mf.params, mf.distribution, mf.seed, mf.count);
        for (std::size_t i = 0; i < eval.size(); ++i)
            save_sample(eval[i], sample_path(dir, "eval", i));
    }
}

inline std::vector<SamplePair> load_split(const std::string& dir, const std::string& split,
                                          std::size_t count) {
    std::vector<SamplePair> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(load_sample(sample_path(dir, split, i)));
    return out;
}

}  // namespace cvrd::radar
