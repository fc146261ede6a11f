#include "vsa/model/backbone.hpp"

#include <algorithm>
#include <cctype>

#include "vsa/core/error.hpp"
#include "vsa/model/serialization.hpp"

namespace vsa::model {
namespace {

// Feature widths are those of the penultimate layer of the reference
// variants: AlexNet/VGG-16 fc7, ResNet and Inception pool, DenseNet-121 and
// EfficientNet-B0 pool. Scene-centric weights exist for AlexNet, VGG-16 and
// ResNet-50.
constexpr std::array<ArchitectureInfo, 7> kRegistry{{
    {Architecture::alexnet, "AlexNet", "alexnet", 4096, 224, true},
    {Architecture::vggnet, "VGGNet", "vggnet", 4096, 224, true},
    {Architecture::inception_v3, "Inception-v3", "inception_v3", 2048, 299, false},
    {Architecture::resnet50, "ResNet-50", "resnet50", 2048, 224, true},
    {Architecture::resnet101, "ResNet-101", "resnet101", 2048, 224, false},
    {Architecture::densenet, "DenseNet", "densenet", 1024, 224, false},
    {Architecture::efficientnet, "EfficientNet", "efficientnet", 1280, 224, false},
}};

std::string normalize(std::string_view text) {
    std::string out;
    for (unsigned char c : text) {
        if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

}  // namespace

std::span<const ArchitectureInfo> architecture_registry() { return kRegistry; }

const ArchitectureInfo& architecture_info(Architecture arch) {
    return kRegistry[static_cast<std::size_t>(arch)];
}

Architecture parse_architecture(std::string_view text) {
    const auto key = normalize(text);
    for (const auto& info : kRegistry) {
        if (normalize(info.display_name) == key || normalize(info.slug) == key) return info.architecture;
    }
    if (key == "vgg" || key == "vgg16") return Architecture::vggnet;
    if (key == "inception" || key == "inceptionv3") return Architecture::inception_v3;
    if (key == "densenet121") return Architecture::densenet;
    if (key == "efficientnetb0") return Architecture::efficientnet;
    throw Error(ErrorKind::unknown_architecture, "unknown architecture '" + std::string(text) + "'");
}

std::string_view to_string(Pretraining p) {
    return p == Pretraining::object_centric ? "object_centric" : "scene_centric";
}

Pretraining parse_pretraining(std::string_view text) {
    const auto key = normalize(text);
    if (key == "objectcentric" || key == "imagenet" || key == "object") return Pretraining::object_centric;
    if (key == "scenecentric" || key == "places" || key == "places365" || key == "scene") {
        return Pretraining::scene_centric;
    }
    throw Error(ErrorKind::invalid_argument, "unknown pretraining '" + std::string(text) + "'");
}

Preprocessing canonical_preprocessing(Architecture arch, Pretraining) {
    Preprocessing p;
    p.height = p.width = architecture_info(arch).input_size;
    if (arch == Architecture::inception_v3) {
        p.mean = {0.5, 0.5, 0.5};
        p.stddev = {0.5, 0.5, 0.5};
    }
    return p;
}

Backbone::Backbone(BackboneSpec spec, Preprocessing preprocessing, std::vector<Layer> layers)
    : spec_(spec), preprocessing_(preprocessing), layers_(std::move(layers)) {
    const auto out = propagate_shape(layers_, {1, preprocessing_.channels, preprocessing_.height,
                                               preprocessing_.width});
    if (out.size() != 2 || out[1] != spec_.feature_dim) {
        throw Error(ErrorKind::shape_mismatch,
                    "backbone maps its input to " + to_string(out) + ", expected [1x" +
                        std::to_string(spec_.feature_dim) + "]");
    }
}

Backbone Backbone::random(BackboneSpec spec, Preprocessing preprocessing,
                          const std::vector<LayerConfig>& topology, Rng& rng) {
    std::vector<Layer> layers;
    layers.reserve(topology.size());
    for (const auto& config : topology) {
        layers.emplace_back(config);
        layers.back().initialize(rng);
    }
    return Backbone(spec, preprocessing, std::move(layers));
}

void Backbone::check_input(const Tensor& batch) const {
    const auto& p = preprocessing_;
    if (batch.shape.size() != 4 || batch.shape[1] != p.channels || batch.shape[2] != p.height ||
        batch.shape[3] != p.width) {
        throw Error(ErrorKind::shape_mismatch,
                    "input batch " + to_string(batch.shape) + " does not match the expected resolution [Nx" +
                        std::to_string(p.channels) + "x" + std::to_string(p.height) + "x" +
                        std::to_string(p.width) + "]");
    }
}

Tensor Backbone::forward(const Tensor& batch) const {
    check_input(batch);
    Tensor current = batch;
    Tensor next;
    for (const auto& layer : layers_) {
        layer.forward(current, next);
        std::swap(current, next);
    }
    return current;
}

std::vector<Tensor> Backbone::forward_cached(const Tensor& batch) const {
    check_input(batch);
    std::vector<Tensor> acts;
    acts.reserve(layers_.size() + 1);
    acts.push_back(batch);
    for (const auto& layer : layers_) {
        Tensor out;
        layer.forward(acts.back(), out);
        acts.push_back(std::move(out));
    }
    return acts;
}

void Backbone::backward(const std::vector<Tensor>& activations, const Tensor& grad_features,
                        std::vector<std::vector<double>>& grads) const {
    if (activations.size() != layers_.size() + 1) {
        throw Error(ErrorKind::shape_mismatch, "activation cache does not match the layer stack");
    }
    grads.resize(layers_.size());
    Tensor grad = grad_features;
    Tensor grad_in;
    for (std::size_t i = layers_.size(); i-- > 0;) {
        const auto& layer = layers_[i];
        grads[i].assign(layer.params().size(), 0.0);
        // The input gradient of the first layer is never needed.
        layer.backward(activations[i], grad, i > 0 ? &grad_in : nullptr, grads[i]);
        if (i > 0) std::swap(grad, grad_in);
    }
}

bool operator==(const Backbone& a, const Backbone& b) {
    if (!(a.spec_ == b.spec_) || !(a.preprocessing_ == b.preprocessing_) || a.layers_.size() != b.layers_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.layers_.size(); ++i) {
        const auto& la = a.layers_[i];
        const auto& lb = b.layers_[i];
        if (!(la.config() == lb.config()) ||
            !std::equal(la.params().begin(), la.params().end(), lb.params().begin(), lb.params().end())) {
            return false;
        }
    }
    return true;
}

std::filesystem::path weights_file(const std::filesystem::path& dir, Architecture arch, Pretraining p) {
    return dir / (std::string(architecture_info(arch).slug) + "_" + std::string(to_string(p)) + ".vsw");
}

Backbone load_pretrained(const std::filesystem::path& dir, Architecture arch, Pretraining p) {
    const auto& info = architecture_info(arch);
    if (p == Pretraining::scene_centric && !info.scene_weights) {
        throw Error(ErrorKind::unsupported, std::string(info.display_name) +
                                                " has no published scene-centric weights; scene branches "
                                                "support AlexNet, VGGNet and ResNet-50");
    }
    const auto path = weights_file(dir, arch, p);
    if (!std::filesystem::exists(path)) {
        throw Error(ErrorKind::missing_weights, "pretrained weights not found: '" + path.string() + "'");
    }
    auto backbone = read_weights_file(path);
    if (backbone.spec().architecture != arch || backbone.spec().pretraining != p) {
        throw Error(ErrorKind::corrupt, "'" + path.string() + "' holds weights for a different backbone");
    }
    if (backbone.feature_dim() != info.feature_dim) {
        throw Error(ErrorKind::shape_mismatch, "'" + path.string() + "' has feature width " +
                                                   std::to_string(backbone.feature_dim()) + ", expected " +
                                                   std::to_string(info.feature_dim));
    }
    return backbone;
}

}  // namespace vsa::model
