#pragma once

#include <bit>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "motcap/model.hpp"

namespace motcap {

static_assert(std::endian::native == std::endian::little,
              "checkpoint blobs are little-endian float64; add byte swapping for this platform");

// Layout on disk: <dir>/manifest.json lists every parameter's shape and its
// element offset into <dir>/params.bin, a raw little-endian float64 blob.
// The manifest also carries the model config, skeleton layout and vocabulary
// needed to rebuild the model.
inline void save_checkpoint(const CaptionModel& model, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    nlohmann::ordered_json manifest;
    manifest["format"] = "motcap-checkpoint-v1";
    manifest["config"] = model_config_to_json(model.config());
    manifest["layout"] = layout_to_json(model.layout());
    manifest["vocab"] = model.vocab().regular_words();

    nlohmann::ordered_json params;
    int64_t offset = 0;
    for (const auto& [name, p] : model.params()) {
        params[name] = {{"shape", p->value.shape()}, {"offset", offset}};
        offset += p->value.numel();
    }
    manifest["params"] = std::move(params);
    manifest["total_values"] = offset;

    std::ofstream mf(fs::path(dir) / "manifest.json");
    if (!mf) throw std::runtime_error("cannot write manifest in " + dir);
    mf << manifest.dump(2) << "\n";

    std::ofstream bf(fs::path(dir) / "params.bin", std::ios::binary);
    if (!bf) throw std::runtime_error("cannot write params.bin in " + dir);
    for (const auto& [name, p] : model.params()) {
        bf.write(reinterpret_cast<const char*>(p->value.data()),
                 static_cast<std::streamsize>(p->value.numel() * sizeof(double)));
    }
}

inline CaptionModel load_checkpoint(const std::string& dir) {
    namespace fs = std::filesystem;
    std::ifstream mf(fs::path(dir) / "manifest.json");
    if (!mf) throw std::runtime_error("cannot read manifest in " + dir);
    nlohmann::json manifest;
    mf >> manifest;
    if (manifest.at("format").get<std::string>() != "motcap-checkpoint-v1") {
        throw std::runtime_error("unsupported checkpoint format in " + dir);
    }

    auto config = model_config_from_json(manifest.at("config"));
    auto layout = layout_from_json(manifest.at("layout"));
    auto vocab = Vocabulary::from_words(manifest.at("vocab").get<std::vector<std::string>>());

    CaptionModel model(config, std::move(layout), std::move(vocab), /*seed=*/0);

    std::ifstream bf(fs::path(dir) / "params.bin", std::ios::binary);
    if (!bf) throw std::runtime_error("cannot read params.bin in " + dir);
    const auto& params_json = manifest.at("params");
    for (auto& [name, p] : model.params()) {
        const auto it = params_json.find(name);
        if (it == params_json.end()) {
            throw std::runtime_error("checkpoint missing parameter " + name);
        }
        const auto shape = it->at("shape").get<std::vector<int>>();
        if (shape != p->value.shape()) {
            throw std::runtime_error("checkpoint shape mismatch for " + name);
        }
        const int64_t offset = it->at("offset").get<int64_t>();
        bf.seekg(offset * static_cast<int64_t>(sizeof(double)));
        bf.read(reinterpret_cast<char*>(p->value.data()),
                static_cast<std::streamsize>(p->value.numel() * sizeof(double)));
        if (!bf) throw std::runtime_error("checkpoint blob truncated at " + name);
    }
    return model;
}

}  // namespace motcap
