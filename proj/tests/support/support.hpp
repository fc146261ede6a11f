#pragma once

// Generators and independent reference computations shared by the unit and
// acceptance tests. The oracles deliberately avoid the library's own helpers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include "vsa/core/label_matrix.hpp"
#include "vsa/core/rng.hpp"
#include "vsa/crowd/response.hpp"
#include "vsa/eval/metrics.hpp"
#include "vsa/model/backbone.hpp"
#include "vsa/model/classifier.hpp"
#include "vsa/model/loss.hpp"
#include "vsa/model/tensor.hpp"
#include "vsa/train/data_source.hpp"

namespace vsa::testing {

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("vsa_test_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::vector<std::size_t> random_subset(std::mt19937_64& gen, std::size_t n, double p) {
    std::bernoulli_distribution pick(p);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n; ++i) {
        if (pick(gen)) out.push_back(i);
    }
    return out;
}

// Responses for `images` images with `per_image` distinct workers each.
inline std::vector<crowd::CrowdResponse> random_responses(std::uint64_t seed, std::size_t images,
                                                          std::size_t per_image) {
    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<int> rating(1, 10);
    std::uniform_real_distribution<double> elapsed(5.0, 300.0);
    std::vector<crowd::CrowdResponse> out;
    std::size_t id = 0;
    for (std::size_t i = 0; i < images; ++i) {
        for (std::size_t w = 0; w < per_image; ++w) {
            crowd::CrowdResponse r;
            r.response_id = "r" + std::to_string(id++);
            r.worker_id = "w" + std::to_string(w);
            r.image_id = "img" + std::to_string(i);
            r.elapsed_seconds = std::round(elapsed(gen) * 10.0) / 10.0;
            r.q1 = rating(gen);
            r.q2 = rating(gen);
            r.q3_tags = random_subset(gen, 7, 0.3);
            if (r.q3_tags.empty()) r.q3_other = "calm";
            r.q4_tags = random_subset(gen, 10, 0.25);
            if (r.q4_tags.empty()) r.q4_other = "hope";
            for (std::size_t f = 0; f < 5; ++f) {
                if (std::bernoulli_distribution(0.3)(gen)) r.q5_features.push_back(static_cast<crowd::InfluenceFeature>(f));
            }
            r.submitted_at = "2024-01-01T00:00:00Z";
            out.push_back(std::move(r));
        }
    }
    return out;
}

// Rating bucket by name: 1-4 low, 5 middle, 6-10 high.
inline std::string oracle_bucket(int vote, bool set1) {
    if (vote >= 1 && vote <= 4) return set1 ? "negative" : "relax";
    if (vote == 5) return set1 ? "neutral" : "normal";
    return set1 ? "positive" : "stimulated";
}

// Plurality with ties to the middle class, then canonical order.
inline std::string oracle_scale(const std::vector<int>& votes, bool set1) {
    const std::vector<std::string> order = set1 ? std::vector<std::string>{"positive", "negative", "neutral"}
                                                : std::vector<std::string>{"relax", "stimulated", "normal"};
    std::map<std::string, int> counts;
    for (int v : votes) counts[oracle_bucket(v, set1)] += 1;
    int best = 0;
    for (const auto& [_, c] : counts) best = std::max(best, c);
    const std::string middle = set1 ? "neutral" : "normal";
    if (counts[middle] == best) return middle;
    for (const auto& name : order) {
        if (counts[name] == best) return name;
    }
    return middle;
}

// Tags chosen by more than half of the annotators; otherwise the first
// most-chosen tag.
inline std::vector<std::size_t> oracle_tagset(const std::vector<std::vector<std::size_t>>& picks,
                                              std::size_t vocabulary) {
    std::vector<std::size_t> chosen;
    std::size_t best_count = 0;
    std::size_t best_tag = 0;
    for (std::size_t t = 0; t < vocabulary; ++t) {
        std::size_t count = 0;
        for (const auto& p : picks) count += std::count(p.begin(), p.end(), t) > 0;
        if (2 * count > picks.size()) chosen.push_back(t);
        if (count > best_count) {
            best_count = count;
            best_tag = t;
        }
    }
    if (chosen.empty()) chosen.push_back(best_tag);
    return chosen;
}

// Exhaustive tuple counts: every ascending tuple of the vocabulary is tested
// against every set.
inline std::map<std::vector<std::size_t>, std::size_t> oracle_cooccurrence(
    const std::vector<std::vector<std::size_t>>& sets, std::size_t vocabulary, std::size_t arity) {
    std::map<std::vector<std::size_t>, std::size_t> out;
    const auto contains = [](const std::vector<std::size_t>& s, std::size_t t) {
        return std::find(s.begin(), s.end(), t) != s.end();
    };
    for (std::size_t a = 0; a < vocabulary; ++a) {
        for (std::size_t b = a + 1; b < vocabulary; ++b) {
            if (arity == 2) {
                std::size_t n = 0;
                for (const auto& s : sets) n += contains(s, a) && contains(s, b);
                if (n) out[{a, b}] = n;
                continue;
            }
            for (std::size_t c = b + 1; c < vocabulary; ++c) {
                std::size_t n = 0;
                for (const auto& s : sets) n += contains(s, a) && contains(s, b) && contains(s, c);
                if (n) out[{a, b, c}] = n;
            }
        }
    }
    return out;
}

// Pearson correlation of two 0/1 columns from means and covariances.
inline double oracle_phi(const std::vector<std::uint8_t>& x, const std::vector<std::uint8_t>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0 || syy == 0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

inline LabelMatrix random_matrix(std::mt19937_64& gen, std::size_t rows, std::size_t cols, double density) {
    std::vector<std::string> ids;
    std::vector<std::string> names;
    for (std::size_t i = 0; i < rows; ++i) ids.push_back("s" + std::to_string(i));
    for (std::size_t c = 0; c < cols; ++c) names.push_back("c" + std::to_string(c));
    LabelMatrix m(ids, names);
    std::bernoulli_distribution bit(density);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t c = 0; c < cols; ++c) m.set(i, c, bit(gen));
    }
    return m;
}

struct Counts {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

// One-vs-rest counts read off a full confusion matrix.
inline std::vector<Counts> oracle_confusion_counts(const std::vector<std::size_t>& pred,
                                                   const std::vector<std::size_t>& truth, std::size_t classes) {
    std::vector<std::vector<std::size_t>> m(classes, std::vector<std::size_t>(classes, 0));
    for (std::size_t i = 0; i < pred.size(); ++i) ++m[truth[i]][pred[i]];
    std::vector<Counts> out(classes);
    for (std::size_t c = 0; c < classes; ++c) {
        std::size_t row = 0, col = 0;
        for (std::size_t k = 0; k < classes; ++k) {
            row += m[c][k];
            col += m[k][c];
        }
        out[c].tp = m[c][c];
        out[c].fn = row - m[c][c];
        out[c].fp = col - m[c][c];
        out[c].tn = pred.size() - out[c].tp - out[c].fn - out[c].fp;
    }
    return out;
}

inline double safe_div(double a, double b) { return b == 0 ? 0.0 : a / b; }

// Small conv backbone for [3, size, size] inputs producing `feature_dim` features.
inline model::Backbone tiny_backbone(std::size_t size, std::size_t feature_dim, std::uint64_t seed,
                                     model::Architecture arch = model::Architecture::vggnet,
                                     model::Pretraining pretraining = model::Pretraining::object_centric) {
    model::Preprocessing p;
    p.height = p.width = size;
    Rng rng(seed);
    const std::vector<model::LayerConfig> topology{
        model::LayerConfig::conv(3, 4, 3, 1, 1), model::LayerConfig::relu(),
        model::LayerConfig::maxpool(2, 2),       model::LayerConfig::conv(4, 6, 3, 1, 1),
        model::LayerConfig::relu(),              model::LayerConfig::global_avgpool(),
        model::LayerConfig::dense(6, feature_dim)};
    return model::Backbone::random({arch, pretraining, feature_dim}, p, topology, rng);
}

inline model::Tensor random_tensor(const model::Shape& shape, std::uint64_t seed, double scale = 1.0) {
    model::Tensor t(shape);
    Rng rng(seed);
    for (auto& v : t.data) v = scale * rng.normal();
    return t;
}

// Balanced toy set for TASK1: class c images are dominated by colour channel c,
// with per-pixel noise. Returns images [n, 3, size, size] and labels.
inline std::pair<model::Tensor, std::vector<std::size_t>> toy_images(std::size_t n, std::size_t size,
                                                                     std::uint64_t seed) {
    model::Tensor images({n, 3, size, size});
    std::vector<std::size_t> labels(n);
    Rng rng(seed);
    const auto plane = size * size;
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = i % 3;
        auto sample = images.sample(i);
        for (std::size_t c = 0; c < 3; ++c) {
            const double base = c == labels[i] ? 1.0 : -0.5;
            for (std::size_t k = 0; k < plane; ++k) sample[c * plane + k] = base + 0.3 * rng.normal();
        }
    }
    return {images, labels};
}

inline model::Classifier tiny_classifier(std::size_t size, std::size_t feature_dim, model::HeadMode mode,
                                         std::size_t classes, std::uint64_t seed) {
    Rng rng(mix_seed(seed, 1));
    return model::Classifier({tiny_backbone(size, feature_dim, seed)}, model::HeadSpec{mode, classes, 0.5}, rng);
}

// Random targets: one-hot rows for single-label, independent bits otherwise.
inline model::Tensor random_targets(std::size_t rows, std::size_t classes, model::HeadMode mode, std::uint64_t seed) {
    model::Tensor t({rows, classes});
    Rng rng(seed);
    for (std::size_t r = 0; r < rows; ++r) {
        if (mode == model::HeadMode::single_label) {
            t.at(r, rng.uniform_index(classes)) = 1.0;
        } else {
            for (std::size_t c = 0; c < classes; ++c) t.at(r, c) = rng.uniform_index(2) ? 1.0 : 0.0;
        }
    }
    return t;
}

struct GradCheck {
    double max_relative_error = 0.0;
    std::size_t checked = 0;
};

// Central differences over every parameter of the classifier.
inline GradCheck gradient_check(model::Classifier c, const model::Tensor& batch, const model::Tensor& targets,
                                double h = 1e-5) {
    const auto mode = c.head().mode;
    model::Classifier::Cache cache;
    const auto analytic_loss = model::loss_from_logits(c.forward_train(batch, cache), targets, mode);
    std::vector<std::vector<double>> grads;
    c.backward(cache, analytic_loss.grad_logits, grads);

    GradCheck out;
    auto blocks = c.parameter_blocks();
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        for (std::size_t i = 0; i < blocks[b].size(); ++i) {
            double& p = blocks[b][i];
            const double saved = p;
            p = saved + h;
            const double up = model::loss_from_logits(c.logits(batch), targets, mode).value;
            p = saved - h;
            const double down = model::loss_from_logits(c.logits(batch), targets, mode).value;
            p = saved;
            const double numeric = (up - down) / (2 * h);
            const double a = grads[b][i];
            const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
            out.max_relative_error = std::max(out.max_relative_error, rel);
            ++out.checked;
        }
    }
    return out;
}

struct ToyTask {
    train::InMemoryImages images;
    LabelMatrix labels;
};

// Balanced TASK1 data over the SET1 class names.
inline ToyTask toy_task1(std::size_t n, std::size_t size, std::uint64_t seed) {
    auto [images, labels] = toy_images(n, size, seed);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("toy" + std::to_string(i));
    return {train::InMemoryImages(std::move(images)),
            LabelMatrix::from_single_labels(ids, {"positive", "negative", "neutral"}, labels)};
}

}  // namespace vsa::testing
