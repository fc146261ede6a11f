#include "vsa/model/classifier.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "vsa/core/error.hpp"
#include "vsa/model/kernels.hpp"

namespace vsa::model {

std::string_view to_string(HeadMode mode) {
    return mode == HeadMode::single_label ? "single_label" : "multi_label";
}

HeadMode parse_head_mode(std::string_view text) {
    if (text == "single_label" || text == "single") return HeadMode::single_label;
    if (text == "multi_label" || text == "multi") return HeadMode::multi_label;
    throw Error(ErrorKind::invalid_argument, "unknown head mode '" + std::string(text) + "'");
}

void HeadSpec::validate() const {
    if (num_classes == 0) throw Error(ErrorKind::invalid_argument, "a head needs at least one class");
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw Error(ErrorKind::invalid_argument, "threshold must lie in (0,1)");
    }
}

std::string_view to_string(FreezePolicy policy) {
    return policy == FreezePolicy::none ? "none" : "head_only";
}

FreezePolicy parse_freeze_policy(std::string_view text) {
    if (text == "none" || text == "all") return FreezePolicy::none;
    if (text == "head_only" || text == "head") return FreezePolicy::head_only;
    throw Error(ErrorKind::invalid_argument, "unknown freeze policy '" + std::string(text) + "'");
}

namespace {

std::size_t total_features(const std::vector<Backbone>& branches) {
    std::size_t width = 0;
    for (const auto& b : branches) width += b.feature_dim();
    return width;
}

}  // namespace

Classifier::Classifier(std::vector<Backbone> branches, HeadSpec head, Layer head_layer)
    : branches_(std::move(branches)), head_(head), head_layer_(std::move(head_layer)) {
    head_.validate();
    if (branches_.empty() || branches_.size() > 2) {
        throw Error(ErrorKind::invalid_argument, "a classifier has one or two backbones");
    }
    for (const auto& b : branches_) {
        if (!(b.preprocessing() == branches_.front().preprocessing())) {
            throw Error(ErrorKind::shape_mismatch, "fused backbones must share their input preprocessing");
        }
    }
    const auto& c = head_layer_.config();
    if (c.kind != LayerKind::dense || c.in_features != total_features(branches_) ||
        c.out_features != head_.num_classes) {
        throw Error(ErrorKind::shape_mismatch, "classification layer must map " +
                                                   std::to_string(total_features(branches_)) + " features to " +
                                                   std::to_string(head_.num_classes) + " classes");
    }
}

Classifier::Classifier(std::vector<Backbone> branches, HeadSpec head, Rng& rng)
    : Classifier(branches, head, Layer(LayerConfig::dense(total_features(branches), head.num_classes))) {
    head_layer_.initialize(rng);
}

Tensor Classifier::features(const Tensor& batch) const {
    if (branches_.size() == 1) return branches_.front().forward(batch);
    std::vector<Tensor> parts;
    for (const auto& b : branches_) parts.push_back(b.forward(batch));
    const auto n = batch.batch();
    Tensor out({n, head_input_width()});
    for (std::size_t i = 0; i < n; ++i) {
        auto dst = out.sample(i).begin();
        for (const auto& p : parts) dst = std::copy(p.sample(i).begin(), p.sample(i).end(), dst);
    }
    return out;
}

Tensor Classifier::logits_from_features(const Tensor& features) const {
    Tensor out;
    head_layer_.forward(features, out);
    return out;
}

Tensor Classifier::scores_from_logits(const Tensor& logits) const {
    Tensor out(logits.shape);
    if (head_.mode == HeadMode::single_label) {
        kernels::softmax_rows(logits.batch(), head_.num_classes, logits.data, out.data);
    } else {
        kernels::sigmoid(logits.data, out.data);
    }
    return out;
}

Tensor Classifier::logits(const Tensor& batch) const { return logits_from_features(features(batch)); }

Tensor Classifier::forward(const Tensor& batch) const {
    auto scores = scores_from_logits(logits(batch));
    if (!std::all_of(scores.data.begin(), scores.data.end(), [](double v) { return std::isfinite(v); })) {
        throw Error(ErrorKind::non_finite, "non-finite activations in the forward pass");
    }
    return scores;
}

const Tensor& Classifier::forward_train(const Tensor& batch, Cache& cache) const {
    cache.branch_activations.clear();
    for (const auto& b : branches_) cache.branch_activations.push_back(b.forward_cached(batch));
    const auto n = batch.batch();
    if (branches_.size() == 1) {
        cache.features = cache.branch_activations.front().back();
    } else {
        cache.features = Tensor({n, head_input_width()});
        for (std::size_t i = 0; i < n; ++i) {
            auto dst = cache.features.sample(i).begin();
            for (const auto& acts : cache.branch_activations) {
                dst = std::copy(acts.back().sample(i).begin(), acts.back().sample(i).end(), dst);
            }
        }
    }
    head_layer_.forward(cache.features, cache.logits);
    return cache.logits;
}

void Classifier::backward(const Cache& cache, const Tensor& grad_logits, std::vector<std::vector<double>>& grads,
                          FreezePolicy policy) const {
    std::size_t blocks = 1;
    for (const auto& b : branches_) blocks += b.layers().size();
    grads.resize(blocks);

    const bool train_backbones = policy == FreezePolicy::none;
    Tensor grad_features;
    grads.back().assign(head_layer_.params().size(), 0.0);
    head_layer_.backward(cache.features, grad_logits, train_backbones ? &grad_features : nullptr, grads.back());

    std::size_t block = 0;
    std::size_t offset = 0;
    for (std::size_t k = 0; k < branches_.size(); ++k) {
        const auto& branch = branches_[k];
        const auto width = branch.feature_dim();
        const auto layer_count = branch.layers().size();
        if (!train_backbones) {
            for (std::size_t i = 0; i < layer_count; ++i) grads[block + i].clear();
        } else {
            const auto n = grad_features.batch();
            Tensor part({n, width});
            for (std::size_t i = 0; i < n; ++i) {
                const auto src = grad_features.sample(i).subspan(offset, width);
                std::copy(src.begin(), src.end(), part.sample(i).begin());
            }
            std::vector<std::vector<double>> branch_grads;
            branch.backward(cache.branch_activations[k], part, branch_grads);
            for (std::size_t i = 0; i < layer_count; ++i) grads[block + i] = std::move(branch_grads[i]);
        }
        block += layer_count;
        offset += width;
    }
}

std::vector<std::span<double>> Classifier::parameter_blocks() {
    std::vector<std::span<double>> out;
    for (auto& b : branches_) {
        for (auto& layer : b.layers()) out.push_back(layer.params());
    }
    out.push_back(head_layer_.params());
    return out;
}

std::vector<std::span<const double>> Classifier::parameter_blocks() const {
    std::vector<std::span<const double>> out;
    for (const auto& b : branches_) {
        for (const auto& layer : b.layers()) out.push_back(layer.params());
    }
    out.push_back(head_layer_.params());
    return out;
}

std::size_t Classifier::parameter_count() const {
    std::size_t total = 0;
    for (const auto& block : parameter_blocks()) total += block.size();
    return total;
}

bool operator==(const Classifier& a, const Classifier& b) {
    return a.head_ == b.head_ && a.branches_ == b.branches_ && a.head_layer_.config() == b.head_layer_.config() &&
           std::ranges::equal(a.head_layer_.params(), b.head_layer_.params());
}

Classifier build_classifier(const ClassifierSpec& spec, const HeadSpec& head,
                            const std::filesystem::path& weights_dir, std::uint64_t seed) {
    std::vector<Backbone> branches;
    if (const auto* single = std::get_if<BackboneSpec>(&spec)) {
        branches.push_back(load_pretrained(weights_dir, single->architecture, single->pretraining));
    } else {
        const auto& fusion = std::get<FusionSpec>(spec);
        if (fusion.object.pretraining != Pretraining::object_centric ||
            fusion.scene.pretraining != Pretraining::scene_centric) {
            throw Error(ErrorKind::invalid_argument,
                        "fusion pairs an object-centric branch with a scene-centric branch");
        }
        branches.push_back(load_pretrained(weights_dir, fusion.object.architecture, Pretraining::object_centric));
        branches.push_back(load_pretrained(weights_dir, fusion.scene.architecture, Pretraining::scene_centric));
    }
    Rng rng(mix_seed(seed, 0x6865616455));
    return Classifier(std::move(branches), head, rng);
}

std::vector<std::vector<std::size_t>> predict_labels(const Tensor& scores, const HeadSpec& head) {
    const auto n = scores.batch();
    const auto c = n ? scores.per_sample() : head.num_classes;
    if (n && c != head.num_classes) {
        throw Error(ErrorKind::shape_mismatch, "score matrix has " + std::to_string(c) + " columns, head has " +
                                                   std::to_string(head.num_classes));
    }
    std::vector<std::vector<std::size_t>> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = scores.sample(i);
        if (head.mode == HeadMode::single_label) {
            out[i].push_back(static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin()));
        } else {
            for (std::size_t j = 0; j < c; ++j) {
                if (row[j] >= head.threshold) out[i].push_back(j);
            }
        }
    }
    return out;
}

}  // namespace vsa::model
