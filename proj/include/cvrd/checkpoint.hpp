#pragma once

#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cvrd/model.hpp"

namespace cvrd::models {

// Checkpoint file: magic "CVCK", u32 JSON header length, JSON header (spec,
// seed, epoch, loss curve, registry layout), then the value vector as
// little-endian float64 in registry order.
struct Checkpoint {
    ModelSpec spec;
    std::uint64_t seed = 0;
    std::size_t epoch = 0;
    std::vector<double> loss_curve;
    std::vector<double> values;
};

inline constexpr char kCkptMagic[4] = {'C', 'V', 'C', 'K'};

inline void save_checkpoint(const Model& model, std::uint64_t seed, std::size_t epoch,
                            const std::vector<double>& loss_curve, const std::string& path) {
    nlohmann::json header;
    header["spec"] = model.spec.name();
    header["kernel"] = model.spec.kernel;
    header["seed"] = seed;
    header["epoch"] = epoch;
    header["loss_curve"] = loss_curve;
    nlohmann::json reg = nlohmann::json::array();
    for (const auto& e : model.registry)
        reg.push_back({{"name", e.name}, {"count", e.count}, {"trainable", e.trainable}});
    header["registry"] = reg;
    const std::string hs = header.dump();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw config_error("save_checkpoint: cannot open " + path);
    os.write(kCkptMagic, sizeof(kCkptMagic));
    const std::uint32_t len = static_cast<std::uint32_t>(hs.size());
    os.write(reinterpret_cast<const char*>(&len), sizeof(len));
    os.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    os.write(reinterpret_cast<const char*>(model.values.data()),
             static_cast<std::streamsize>(model.values.size() * sizeof(double)));
}

struct LoadedCheckpoint {
    Model model;
    std::uint64_t seed = 0;
    std::size_t epoch = 0;
    std::vector<double> loss_curve;
};

inline LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw config_error("load_checkpoint: cannot open " + path);
    char magic[4];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kCkptMagic, sizeof(magic)) != 0)
        throw config_error("load_checkpoint: bad magic in " + path);
    std::uint32_t len = 0;
    is.read(reinterpret_cast<char*>(&len), sizeof(len));
    std::string hs(len, '\0');
    is.read(hs.data(), len);
    const nlohmann::json header = nlohmann::json::parse(hs);
    LoadedCheckpoint out;
    ModelSpec spec = ModelSpec::parse(header.at("spec").get<std::string>());
    spec.kernel = header.value("kernel", spec.kernel);
    out.model = Model::build(spec, /*init_seed=*/0);
    out.seed = header.value("seed", std::uint64_t{0});
    out.epoch = header.value("epoch", std::size_t{0});
    out.loss_curve = header.value("loss_curve", std::vector<double>{});
    const nlohmann::json& reg = header.at("registry");
    if (reg.size() != out.model.registry.size())
        throw config_error("load_checkpoint: registry layout mismatch");
    for (std::size_t i = 0; i < reg.size(); ++i) {
        if (reg[i].at("name").get<std::string>() != out.model.registry[i].name ||
            reg[i].at("count").get<std::size_t>() != out.model.registry[i].count)
            throw config_error("load_checkpoint: registry entry mismatch at " +
                               out.model.registry[i].name);
    }
    is.read(reinterpret_cast<char*>(out.model.values.data()),
            static_cast<std::streamsize>(out.model.values.size() * sizeof(double)));
    if (!is) throw config_error("load_checkpoint: truncated value blob in " + path);
    return out;
}

}  // namespace cvrd::models
