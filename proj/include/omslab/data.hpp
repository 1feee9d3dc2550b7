#pragma once

// Synthetic conditional datasets, the closed-form forward noising process and
// offset-noise sampling. Class id 0 is reserved everywhere for the null
// (unconditional) condition.

#include <cstdint>
#include <string>
#include <vector>

#include "omslab/rng.hpp"
#include "omslab/schedule.hpp"
#include "omslab/vecmath.hpp"

namespace omslab {

struct Batch {
    struct Item {
        Vec values;
        int class_id = 0;
    };
    std::size_t dim = 0;
    std::vector<Item> items;

    std::size_t size() const { return items.size(); }
};

struct ToyDatasetSpec {
    struct Component {
        Vec mean;
        double scale = 1.0;
        double weight = 1.0;
    };
    struct ClassSpec {
        int class_id = 1;
        std::vector<Component> components;
    };
    std::size_t dim = 0;
    std::vector<ClassSpec> classes;
    int n_per_class = 0;
    std::uint64_t seed = 0;

    void validate() const {
        require(dim >= 1, "dataset spec: dim must be >= 1");
        require(n_per_class >= 1, "dataset spec: n_per_class must be >= 1");
        require(!classes.empty(), "dataset spec: needs at least one class");
        std::vector<int> seen;
        for (const auto& c : classes) {
            require(c.class_id >= 1, "dataset spec: class ids must be >= 1 (0 is reserved)");
            for (int id : seen) require(id != c.class_id, "dataset spec: duplicate class id");
            seen.push_back(c.class_id);
            require(!c.components.empty(), "dataset spec: class without components");
            double wsum = 0.0;
            for (const auto& comp : c.components) {
                require(comp.mean.size() == dim, "dataset spec: component mean dim mismatch");
                require(comp.scale >= 0.0, "dataset spec: negative scale");
                require(comp.weight > 0.0, "dataset spec: component weight must be > 0");
                wsum += comp.weight;
            }
            require(std::abs(wsum - 1.0) <= 1e-12,
                    "dataset spec: component weights must sum to 1");
        }
    }
};

// d = 16, classes dark/mid/light with means -0.7, 0, +0.7 per dimension,
// per-class scale 0.2, 4096 points per class.
inline ToyDatasetSpec default_toy_spec(std::uint64_t seed) {
    ToyDatasetSpec spec;
    spec.dim = 16;
    spec.n_per_class = 4096;
    spec.seed = seed;
    for (int cid = 1; cid <= 3; ++cid) {
        double level = cid == 1 ? -0.7 : cid == 2 ? 0.0 : 0.7;
        ToyDatasetSpec::ClassSpec c;
        c.class_id = cid;
        c.components.push_back({Vec(spec.dim, level), 0.2, 1.0});
        spec.classes.push_back(std::move(c));
    }
    return spec;
}

// Names used by the CLI for the default toy classes.
inline int toy_class_id_from_name(const std::string& name) {
    if (name == "null" || name == "uncond") return 0;
    if (name == "dark") return 1;
    if (name == "mid") return 2;
    if (name == "light") return 3;
    return -1;
}

inline Batch generate_dataset(const ToyDatasetSpec& spec) {
    spec.validate();
    Batch batch;
    batch.dim = spec.dim;
    batch.items.reserve(spec.classes.size() * static_cast<std::size_t>(spec.n_per_class));
    Rng rng = Rng::stream(spec.seed, {stream_tag::kDataset});
    for (const auto& c : spec.classes) {
        for (int i = 0; i < spec.n_per_class; ++i) {
            double pick = rng.uniform01();
            std::size_t k = 0;
            double acc = 0.0;
            for (; k + 1 < c.components.size(); ++k) {
                acc += c.components[k].weight;
                if (pick < acc) break;
            }
            const auto& comp = c.components[k];
            Batch::Item item;
            item.class_id = c.class_id;
            item.values.resize(spec.dim);
            for (std::size_t j = 0; j < spec.dim; ++j)
                item.values[j] = comp.mean[j] + comp.scale * rng.normal();
            batch.items.push_back(std::move(item));
        }
    }
    return batch;
}

// x_t = sqrt(abar_t) x0 + sqrt(1 - abar_t) noise
inline Vec forward_sample(const Vec& x0, int t, const Schedule& sched, const Vec& noise) {
    sched.check_timestep(t);
    require_same_dim(x0, noise, "forward_sample");
    double a = sched.abar(t);
    return lin_comb(std::sqrt(a), x0, std::sqrt(1.0 - a), noise);
}

// z + sqrt(strength) * (w  x  1_{dim/groups}), w one standard normal per group;
// within-group covariance I + strength * 11^T.
inline Vec offset_noise_sample(std::size_t dim, std::size_t groups, double strength, Rng& rng) {
    require(dim >= 1 && groups >= 1, "offset_noise_sample: dim and groups must be >= 1");
    require(dim % groups == 0, "offset_noise_sample: groups must divide dim");
    require(strength >= 0.0, "offset_noise_sample: strength must be >= 0");
    Vec z(dim);
    for (auto& v : z) v = rng.normal();
    if (strength == 0.0) return z;
    const std::size_t group_len = dim / groups;
    const double root = std::sqrt(strength);
    for (std::size_t g = 0; g < groups; ++g) {
        double w = root * rng.normal();
        for (std::size_t j = 0; j < group_len; ++j) z[g * group_len + j] += w;
    }
    return z;
}

inline Vec offset_noise_sample(std::size_t dim, std::size_t groups, double strength,
                               std::uint64_t seed) {
    Rng rng = Rng::stream(seed, {stream_tag::kMonteCarlo});
    return offset_noise_sample(dim, groups, strength, rng);
}

// Mean of x0 per class id, negated: the Bayes-optimal constant v-prediction at
// zero SNR. Keys are the class ids present in the batch.
inline std::vector<std::pair<int, Vec>> oracle_oms(const Batch& data) {
    require(!data.items.empty(), "oracle_oms: empty batch");
    std::vector<std::pair<int, Vec>> out;
    std::vector<std::size_t> counts;
    for (const auto& item : data.items) {
        std::size_t k = 0;
        for (; k < out.size(); ++k)
            if (out[k].first == item.class_id) break;
        if (k == out.size()) {
            out.push_back({item.class_id, Vec(data.dim, 0.0)});
            counts.push_back(0);
        }
        for (std::size_t j = 0; j < data.dim; ++j) out[k].second[j] += item.values[j];
        counts[k] += 1;
    }
    for (std::size_t k = 0; k < out.size(); ++k) {
        require(counts[k] > 0, "oracle_oms: empty class");
        for (auto& v : out[k].second) v = -v / static_cast<double>(counts[k]);
    }
    return out;
}

inline const Vec* find_class(const std::vector<std::pair<int, Vec>>& table, int class_id) {
    for (const auto& [id, vec] : table)
        if (id == class_id) return &vec;
    return nullptr;
}

}  // namespace omslab
