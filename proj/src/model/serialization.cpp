#include "vsa/model/serialization.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <zlib.h>

#include "vsa/core/error.hpp"

namespace vsa::model {

static_assert(std::endian::native == std::endian::little, "parameter blobs are stored little-endian");

namespace {

using nlohmann::json;

constexpr char kWeightsMagic[8] = {'V', 'S', 'A', 'W', 'G', 'T', '\0', '\0'};
constexpr char kCheckpointMagic[8] = {'V', 'S', 'A', 'C', 'K', 'P', 'T', '\0'};

template <class T>
void put(std::string& out, T value) {
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    out.append(bytes, sizeof(T));
}

std::uint32_t crc32_of(const char* data, std::size_t size) {
    uLong crc = crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed large buffers in chunks.
    while (size > 0) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(size, 1u << 30));
        crc = crc32(crc, reinterpret_cast<const Bytef*>(data), chunk);
        data += chunk;
        size -= chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

void write_container(const std::filesystem::path& path, const char (&magic)[8], std::uint32_t version,
                     const json& header, const std::vector<std::span<const double>>& blocks) {
    const auto header_text = header.dump();
    std::size_t count = 0;
    for (const auto& b : blocks) count += b.size();

    std::string out;
    out.reserve(32 + header_text.size() + count * sizeof(double));
    out.append(magic, 8);
    put<std::uint32_t>(out, version);
    put<std::uint64_t>(out, header_text.size());
    out += header_text;
    put<std::uint64_t>(out, count);
    for (const auto& b : blocks) {
        out.append(reinterpret_cast<const char*>(b.data()), b.size() * sizeof(double));
    }
    put<std::uint32_t>(out, crc32_of(out.data(), out.size()));

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream file(tmp, std::ios::binary | std::ios::trunc);
        if (!file) throw Error(ErrorKind::not_found, "cannot write '" + path.string() + "'");
        file.write(out.data(), static_cast<std::streamsize>(out.size()));
        if (!file) throw Error(ErrorKind::corrupt, "short write to '" + path.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

struct Container {
    std::uint32_t version = 0;
    json header;
    std::vector<double> params;
};

Container read_container(const std::filesystem::path& path, const char (&magic)[8], std::uint32_t max_version,
                         std::string_view what) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw Error(ErrorKind::not_found, std::string(what) + " not found: '" + path.string() + "'");
    const std::string bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
    const auto corrupt = [&](const std::string& detail) {
        return Error(ErrorKind::corrupt, "corrupt " + std::string(what) + " '" + path.string() + "': " + detail);
    };

    std::size_t pos = 0;
    const auto take = [&](void* dst, std::size_t n) {
        if (bytes.size() - pos < n) throw corrupt("truncated");
        std::memcpy(dst, bytes.data() + pos, n);
        pos += n;
    };

    char file_magic[8];
    take(file_magic, 8);
    if (std::memcmp(file_magic, magic, 8) != 0) throw corrupt("bad magic");
    Container c;
    take(&c.version, sizeof c.version);
    if (c.version == 0 || c.version > max_version) {
        throw Error(ErrorKind::version_mismatch, std::string(what) + " '" + path.string() + "' has format version " +
                                                     std::to_string(c.version) + ", supported up to " +
                                                     std::to_string(max_version));
    }
    std::uint64_t header_size = 0;
    take(&header_size, sizeof header_size);
    if (header_size > bytes.size() - pos) throw corrupt("truncated");
    const std::string_view header_text(bytes.data() + pos, header_size);
    pos += header_size;
    std::uint64_t count = 0;
    take(&count, sizeof count);
    if (count > (bytes.size() - pos) / sizeof(double)) throw corrupt("truncated");
    c.params.resize(count);
    take(c.params.data(), count * sizeof(double));
    std::uint32_t stored_crc = 0;
    take(&stored_crc, sizeof stored_crc);
    if (pos != bytes.size()) throw corrupt("trailing bytes");
    if (crc32_of(bytes.data(), bytes.size() - sizeof stored_crc) != stored_crc) throw corrupt("checksum mismatch");

    try {
        c.header = json::parse(header_text);
    } catch (const json::exception& e) {
        throw corrupt(std::string("bad header: ") + e.what());
    }
    return c;
}

json backbone_header(const Backbone& b) {
    json layers = json::array();
    for (const auto& layer : b.layers()) layers.push_back(layer_to_json(layer.config()));
    return {{"architecture", architecture_info(b.spec().architecture).slug},
            {"pretraining", to_string(b.spec().pretraining)},
            {"feature_dim", b.feature_dim()},
            {"preprocessing", preprocessing_to_json(b.preprocessing())},
            {"layers", layers}};
}

// Rebuilds a backbone from its header, consuming parameters from `params`
// starting at `offset`.
Backbone backbone_from_header(const json& h, const std::vector<double>& params, std::size_t& offset) {
    BackboneSpec spec{parse_architecture(h.at("architecture").get<std::string>()),
                      parse_pretraining(h.at("pretraining").get<std::string>()),
                      h.at("feature_dim").get<std::size_t>()};
    std::vector<Layer> layers;
    for (const auto& lj : h.at("layers")) {
        Layer layer(layer_from_json(lj));
        auto p = layer.params();
        if (params.size() - offset < p.size()) {
            throw Error(ErrorKind::corrupt, "parameter blob is shorter than the topology requires");
        }
        std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(offset), p.size(), p.begin());
        offset += p.size();
        layers.push_back(std::move(layer));
    }
    return Backbone(spec, preprocessing_from_json(h.at("preprocessing")), std::move(layers));
}

std::vector<std::span<const double>> backbone_blocks(const Backbone& b) {
    std::vector<std::span<const double>> blocks;
    for (const auto& layer : b.layers()) blocks.push_back(layer.params());
    return blocks;
}

}  // namespace

json layer_to_json(const LayerConfig& c) {
    json j{{"type", to_string(c.kind)}};
    switch (c.kind) {
        case LayerKind::conv2d:
            j["in_channels"] = c.in_channels;
            j["out_channels"] = c.out_channels;
            j["kernel"] = c.kernel;
            j["stride"] = c.stride;
            j["pad"] = c.pad;
            break;
        case LayerKind::maxpool2d:
            j["kernel"] = c.kernel;
            j["stride"] = c.stride;
            break;
        case LayerKind::dense:
            j["in_features"] = c.in_features;
            j["out_features"] = c.out_features;
            break;
        default:
            break;
    }
    return j;
}

LayerConfig layer_from_json(const json& j) {
    const auto kind = parse_layer_kind(j.at("type").get<std::string>());
    switch (kind) {
        case LayerKind::conv2d:
            return LayerConfig::conv(j.at("in_channels"), j.at("out_channels"), j.at("kernel"), j.value("stride", 1u),
                                     j.value("pad", 0u));
        case LayerKind::maxpool2d:
            return LayerConfig::maxpool(j.at("kernel"), j.value("stride", j.at("kernel").get<std::size_t>()));
        case LayerKind::dense:
            return LayerConfig::dense(j.at("in_features"), j.at("out_features"));
        case LayerKind::relu:
            return LayerConfig::relu();
        case LayerKind::global_avgpool:
            return LayerConfig::global_avgpool();
        case LayerKind::flatten:
            return LayerConfig::flatten();
    }
    throw Error(ErrorKind::unsupported, "unknown layer");
}

json preprocessing_to_json(const Preprocessing& p) {
    return {{"channels", p.channels}, {"height", p.height}, {"width", p.width}, {"mean", p.mean}, {"std", p.stddev}};
}

Preprocessing preprocessing_from_json(const json& j) {
    Preprocessing p;
    p.channels = j.at("channels");
    p.height = j.at("height");
    p.width = j.at("width");
    p.mean = j.at("mean").get<std::array<double, 3>>();
    p.stddev = j.at("std").get<std::array<double, 3>>();
    return p;
}

void write_weights_file(const std::filesystem::path& path, const Backbone& backbone) {
    write_container(path, kWeightsMagic, kWeightsFormatVersion, backbone_header(backbone), backbone_blocks(backbone));
}

Backbone read_weights_file(const std::filesystem::path& path) {
    const auto c = read_container(path, kWeightsMagic, kWeightsFormatVersion, "weights file");
    try {
        std::size_t offset = 0;
        auto backbone = backbone_from_header(c.header, c.params, offset);
        if (offset != c.params.size()) throw Error(ErrorKind::corrupt, "parameter count does not match the topology");
        return backbone;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::corrupt, "weights file '" + path.string() + "' has a malformed header: " + e.what());
    }
}

void save_checkpoint(const std::filesystem::path& path, const Classifier& classifier, std::string_view task,
                     std::span<const std::string> class_names, const json& metadata) {
    if (class_names.size() != classifier.num_classes()) {
        throw Error(ErrorKind::shape_mismatch, "class name count does not match the head");
    }
    json branches = json::array();
    for (const auto& b : classifier.branches()) branches.push_back(backbone_header(b));
    const auto& head = classifier.head();
    json header{{"format", "vsa-checkpoint"},
                {"task", task},
                {"class_names", std::vector<std::string>(class_names.begin(), class_names.end())},
                {"head", {{"mode", to_string(head.mode)}, {"num_classes", head.num_classes}, {"threshold", head.threshold}}},
                {"branches", branches},
                {"metadata", metadata.is_null() ? json::object() : metadata}};
    write_container(path, kCheckpointMagic, kCheckpointFormatVersion, header, classifier.parameter_blocks());
}

Checkpoint load_checkpoint(const std::filesystem::path& path, std::optional<std::string_view> expected_task) {
    const auto c = read_container(path, kCheckpointMagic, kCheckpointFormatVersion, "checkpoint");
    try {
        const auto& h = c.header;
        const auto task = h.at("task").get<std::string>();
        if (expected_task && *expected_task != task) {
            throw Error(ErrorKind::task_mismatch, "checkpoint '" + path.string() + "' was trained for " + task +
                                                      ", not " + std::string(*expected_task));
        }
        HeadSpec head{parse_head_mode(h.at("head").at("mode").get<std::string>()),
                      h.at("head").at("num_classes").get<std::size_t>(),
                      h.at("head").at("threshold").get<double>()};
        std::size_t offset = 0;
        std::vector<Backbone> branches;
        for (const auto& bj : h.at("branches")) branches.push_back(backbone_from_header(bj, c.params, offset));
        std::size_t width = 0;
        for (const auto& b : branches) width += b.feature_dim();
        Layer head_layer(LayerConfig::dense(width, head.num_classes));
        auto p = head_layer.params();
        if (c.params.size() - offset != p.size()) {
            throw Error(ErrorKind::corrupt, "checkpoint '" + path.string() + "' parameter count does not match");
        }
        std::copy(c.params.begin() + static_cast<std::ptrdiff_t>(offset), c.params.end(), p.begin());
        return Checkpoint{Classifier(std::move(branches), head, std::move(head_layer)), task,
                          h.at("class_names").get<std::vector<std::string>>(), h.value("metadata", json::object())};
    } catch (const json::exception& e) {
        throw Error(ErrorKind::corrupt, "checkpoint '" + path.string() + "' has a malformed header: " + e.what());
    }
}

}  // namespace vsa::model
