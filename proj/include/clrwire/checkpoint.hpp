#pragma once

#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include "json.hpp"

#include "clrwire/nn.hpp"
#include "clrwire/wireframe.hpp"

namespace clrwire {

static_assert(std::endian::native == std::endian::little, "checkpoint blobs are little-endian f64");

constexpr char kCheckpointMagic[9] = "CLRWIRE1";

// Flat key -> array parameter container with a JSON manifest.
// Layout: 8-byte magic, u64 header length, JSON header, f64 blob.
struct Checkpoint {
    std::string stage;       // training stage that produced it: curve | wire | flow
    nlohmann::json config;   // run configuration snapshot
    nlohmann::json extra;    // stage-specific side data (e.g. latent statistics)
    NamedParams params;

    const Tensor& find(const std::string& name) const {
        for (const auto& [n, t] : params)
            if (n == name) return t;
        throw CheckpointError("missing parameter " + name);
    }
    bool has(const std::string& name) const {
        for (const auto& [n, t] : params)
            if (n == name) return true;
        return false;
    }
};

inline void save_checkpoint(const std::string& path, const std::string& stage, const nlohmann::json& config,
                            const NamedParams& params, const nlohmann::json& extra = nlohmann::json::object()) {
    nlohmann::json manifest = nlohmann::json::array();
    size_t offset = 0;
    for (const auto& [name, t] : params) {
        manifest.push_back({{"name", name}, {"rows", t.rows()}, {"cols", t.cols()}, {"offset", offset}});
        offset += t.size();
    }
    nlohmann::json header = {{"stage", stage}, {"config", config}, {"extra", extra}, {"params", manifest}};
    std::string htext = header.dump();

    std::string blob;
    blob.reserve(16 + htext.size() + offset * 8);
    blob.append(kCheckpointMagic, 8);
    uint64_t hlen = htext.size();
    blob.append(reinterpret_cast<const char*>(&hlen), 8);
    blob += htext;
    for (const auto& [name, t] : params)
        blob.append(reinterpret_cast<const char*>(t.values().data()), t.size() * sizeof(double));
    write_text_atomic(path, blob);
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint " + path);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (data.size() < 16 || data.compare(0, 8, kCheckpointMagic, 8) != 0)
        throw CheckpointError(path + " is not a checkpoint (bad magic)");
    uint64_t hlen;
    std::memcpy(&hlen, data.data() + 8, 8);
    if (16 + hlen > data.size()) throw CheckpointError(path + ": truncated header");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(data.substr(16, hlen));
    } catch (const nlohmann::json::parse_error& e) {
        throw CheckpointError(path + ": header parse failed: " + e.what());
    }
    Checkpoint ck;
    ck.stage = header.at("stage").get<std::string>();
    ck.config = header.value("config", nlohmann::json::object());
    ck.extra = header.value("extra", nlohmann::json::object());
    size_t blob_start = 16 + hlen;
    size_t blob_doubles = (data.size() - blob_start) / 8;
    for (const auto& m : header.at("params")) {
        std::string name = m.at("name").get<std::string>();
        int rows = m.at("rows").get<int>();
        int cols = m.at("cols").get<int>();
        size_t offset = m.at("offset").get<size_t>();
        size_t count = size_t(rows) * size_t(cols);
        if (offset + count > blob_doubles) throw CheckpointError(path + ": blob truncated at " + name);
        std::vector<double> vals(count);
        std::memcpy(vals.data(), data.data() + blob_start + offset * 8, count * 8);
        ck.params.push_back({name, Tensor::from_data(std::move(vals), rows, cols, true)});
    }
    return ck;
}

// Copy checkpoint values into an existing model's parameters, by name.
inline void assign_params(const Checkpoint& ck, NamedParams& model) {
    for (auto& [name, t] : model) {
        const Tensor& src = ck.find(name);
        if (src.rows() != t.rows() || src.cols() != t.cols())
            throw CheckpointError("parameter " + name + " is " + src.shape_str() + ", model wants " + t.shape_str());
        t.values() = src.values();
    }
}

}  // namespace clrwire
