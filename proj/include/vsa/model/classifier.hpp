#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "vsa/core/rng.hpp"
#include "vsa/model/backbone.hpp"
#include "vsa/model/layers.hpp"
#include "vsa/model/tensor.hpp"

namespace vsa::model {

enum class HeadMode { single_label, multi_label };

std::string_view to_string(HeadMode mode);
HeadMode parse_head_mode(std::string_view text);

struct HeadSpec {
    HeadMode mode = HeadMode::single_label;
    std::size_t num_classes = 3;
    /// Decision threshold of multi-label heads.
    double threshold = 0.5;

    /// Throws Error(invalid_argument) for zero classes or a threshold outside (0,1).
    void validate() const;

    friend bool operator==(const HeadSpec&, const HeadSpec&) = default;
};

/// Early fusion of an object-centric and a scene-centric backbone.
struct FusionSpec {
    BackboneSpec object;
    BackboneSpec scene;
};

using ClassifierSpec = std::variant<BackboneSpec, FusionSpec>;

enum class FreezePolicy { none, head_only };

std::string_view to_string(FreezePolicy policy);
FreezePolicy parse_freeze_policy(std::string_view text);

/// One or two backbones whose features are concatenated in branch order and
/// fed to a dense classification layer with a softmax or sigmoid output.
class Classifier {
public:
    /// Throws Error(shape_mismatch) when the head layer is not a dense layer of
    /// width sum(feature_dim) -> num_classes, or when the branches expect
    /// different inputs.
    Classifier(std::vector<Backbone> branches, HeadSpec head, Layer head_layer);

    /// He-initialized head on top of the given branches.
    Classifier(std::vector<Backbone> branches, HeadSpec head, Rng& rng);

    const HeadSpec& head() const noexcept { return head_; }
    const std::vector<Backbone>& branches() const noexcept { return branches_; }
    const Layer& head_layer() const noexcept { return head_layer_; }
    const Preprocessing& preprocessing() const { return branches_.front().preprocessing(); }

    std::size_t head_input_width() const noexcept { return head_layer_.config().in_features; }
    std::size_t num_classes() const noexcept { return head_.num_classes; }

    /// Concatenated branch features, [N, head_input_width].
    Tensor features(const Tensor& batch) const;
    Tensor logits_from_features(const Tensor& features) const;
    /// Softmax or sigmoid of the logits.
    Tensor scores_from_logits(const Tensor& logits) const;

    Tensor logits(const Tensor& batch) const;

    /// Score matrix [N, num_classes]. Throws Error(shape_mismatch) for a batch
    /// of the wrong resolution and Error(non_finite) for NaN or infinite scores.
    Tensor forward(const Tensor& batch) const;

    struct Cache {
        std::vector<std::vector<Tensor>> branch_activations;
        Tensor features;
        Tensor logits;
    };

    /// Forward pass keeping what backward() needs; returns the logits.
    const Tensor& forward_train(const Tensor& batch, Cache& cache) const;

    /// Parameter gradients for d(loss)/d(logits), one buffer per parameter
    /// block (see parameter_blocks). With head_only the backbone buffers are
    /// left empty and no backbone backpropagation is done.
    void backward(const Cache& cache, const Tensor& grad_logits, std::vector<std::vector<double>>& grads,
                  FreezePolicy policy = FreezePolicy::none) const;

    /// Parameter buffers in a fixed order: each branch's layers, then the
    /// head. Parameterless layers contribute empty spans.
    std::vector<std::span<double>> parameter_blocks();
    std::vector<std::span<const double>> parameter_blocks() const;
    std::size_t parameter_count() const;

    friend bool operator==(const Classifier&, const Classifier&);

private:
    std::vector<Backbone> branches_;
    HeadSpec head_;
    Layer head_layer_;
};

/// Loads the pretrained branches for `spec` from `weights_dir` and attaches a
/// freshly initialized head. Fusion requires scene-centric weights for the
/// scene branch and the same input preprocessing for both branches.
/// Propagates Error(missing_weights), Error(unsupported) and
/// Error(unknown_architecture) from the weight loader.
Classifier build_classifier(const ClassifierSpec& spec, const HeadSpec& head,
                            const std::filesystem::path& weights_dir, std::uint64_t seed);

/// Label assignments from a score matrix: the argmax per row for
/// single-label heads, every class scoring at least the threshold for
/// multi-label heads (possibly none).
std::vector<std::vector<std::size_t>> predict_labels(const Tensor& scores, const HeadSpec& head);

}  // namespace vsa::model
