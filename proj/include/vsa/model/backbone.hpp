#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vsa/core/rng.hpp"
#include "vsa/model/layers.hpp"
#include "vsa/model/tensor.hpp"

namespace vsa::model {

enum class Architecture { alexnet, vggnet, inception_v3, resnet50, resnet101, densenet, efficientnet };

enum class Pretraining { object_centric, scene_centric };

struct ArchitectureInfo {
    Architecture architecture;
    std::string_view display_name;  // "VGGNet"
    std::string_view slug;          // "vggnet", used in weight file names
    std::size_t feature_dim;        // penultimate representation width
    std::size_t input_size;         // canonical square input resolution
    bool scene_weights;             // scene-centric weights are published
};

std::span<const ArchitectureInfo> architecture_registry();
const ArchitectureInfo& architecture_info(Architecture arch);

/// Accepts display names and slugs, case-insensitively ("VGGNet", "vgg16",
/// "ResNet-50", "inception_v3"). Throws Error(unknown_architecture).
Architecture parse_architecture(std::string_view text);

std::string_view to_string(Pretraining p);          // "object_centric"
Pretraining parse_pretraining(std::string_view text);  // also "imagenet" / "places"

/// Canonical input resolution and channel normalization of a backbone.
struct Preprocessing {
    std::size_t channels = 3;
    std::size_t height = 224;
    std::size_t width = 224;
    std::array<double, 3> mean{0.485, 0.456, 0.406};
    std::array<double, 3> stddev{0.229, 0.224, 0.225};

    friend bool operator==(const Preprocessing&, const Preprocessing&) = default;
};

/// Preprocessing of the published weights for an architecture/pretraining.
Preprocessing canonical_preprocessing(Architecture arch, Pretraining pretraining);

struct BackboneSpec {
    Architecture architecture = Architecture::vggnet;
    Pretraining pretraining = Pretraining::object_centric;
    std::size_t feature_dim = 0;

    friend bool operator==(const BackboneSpec&, const BackboneSpec&) = default;
};

/// Convolutional feature extractor: a sequential layer stack mapping a
/// preprocessed [N, C, H, W] batch to [N, feature_dim] features.
class Backbone {
public:
    /// Throws Error(shape_mismatch) unless the stack maps the preprocessing's
    /// input shape to [N, spec.feature_dim].
    Backbone(BackboneSpec spec, Preprocessing preprocessing, std::vector<Layer> layers);

    /// Random He-initialized stack.
    static Backbone random(BackboneSpec spec, Preprocessing preprocessing,
                           const std::vector<LayerConfig>& topology, Rng& rng);

    const BackboneSpec& spec() const noexcept { return spec_; }
    const Preprocessing& preprocessing() const noexcept { return preprocessing_; }
    const std::vector<Layer>& layers() const noexcept { return layers_; }
    std::vector<Layer>& layers() noexcept { return layers_; }
    std::size_t feature_dim() const noexcept { return spec_.feature_dim; }

    /// Throws Error(shape_mismatch) if the batch does not have the backbone's
    /// expected resolution.
    Tensor forward(const Tensor& batch) const;

    /// Forward pass keeping every activation: result[0] is the input and
    /// result.back() the features.
    std::vector<Tensor> forward_cached(const Tensor& batch) const;

    /// Backpropagates `grad_features` through the stack; gradients of the
    /// layers with parameters are written to `grads` (one buffer per layer,
    /// empty for parameterless layers).
    void backward(const std::vector<Tensor>& activations, const Tensor& grad_features,
                  std::vector<std::vector<double>>& grads) const;

    void check_input(const Tensor& batch) const;

    friend bool operator==(const Backbone& a, const Backbone& b);

private:
    BackboneSpec spec_;
    Preprocessing preprocessing_;
    std::vector<Layer> layers_;
};

/// `<dir>/<slug>_<pretraining>.vsw`, e.g. "vggnet_scene_centric.vsw".
std::filesystem::path weights_file(const std::filesystem::path& dir, Architecture arch, Pretraining p);

/// Loads pretrained weights for (arch, pretraining) from `dir`.
///
/// Throws Error(unsupported) when scene-centric weights are requested for an
/// architecture without published scene-centric weights,
/// Error(missing_weights) when the file is absent, and Error(shape_mismatch)
/// when the stored network's feature width differs from the registry.
Backbone load_pretrained(const std::filesystem::path& dir, Architecture arch, Pretraining p);

}  // namespace vsa::model
