#pragma once

// Mean-bias diagnostics: per-sample means, histograms with overflow tracking,
// the exact 1-D Wasserstein distance by sorted matching, and the per-class
// bias report comparing generated output against the data it was trained on.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "omslab/data.hpp"
#include "omslab/numfmt.hpp"
#include "omslab/rng.hpp"
#include "omslab/vecmath.hpp"

namespace omslab {

// Arithmetic mean over each item's coordinates.
inline std::vector<double> sample_means(const Batch& batch) {
    require(!batch.items.empty(), "sample_means: empty batch");
    std::vector<double> out;
    out.reserve(batch.items.size());
    for (const auto& item : batch.items) out.push_back(mean(item.values));
    return out;
}

struct Histogram {
    double lo = 0.0, hi = 0.0;
    std::vector<long> counts;  // half-open bins [lo + k w, lo + (k+1) w); last closed
    long below = 0, above = 0;

    long total() const {
        long t = below + above;
        for (long c : counts) t += c;
        return t;
    }
};

inline Histogram mean_histogram(const std::vector<double>& values, int bins, double lo,
                                double hi) {
    require(bins >= 1, "mean_histogram: bins must be >= 1");
    require(lo < hi, "mean_histogram: need lo < hi");
    Histogram h;
    h.lo = lo;
    h.hi = hi;
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    const double w = (hi - lo) / bins;
    for (double v : values) {
        if (v < lo) {
            ++h.below;
        } else if (v > hi) {
            ++h.above;
        } else {
            int k = static_cast<int>((v - lo) / w);
            if (k >= bins) k = bins - 1;  // v == hi lands in the closed last bin
            ++h.counts[static_cast<std::size_t>(k)];
        }
    }
    return h;
}

inline std::string histogram_csv(const Histogram& h) {
    std::string out = "bin_lo,bin_hi,count\n";
    const double w = (h.hi - h.lo) / static_cast<double>(h.counts.size());
    for (std::size_t k = 0; k < h.counts.size(); ++k) {
        out += fmt_g17(h.lo + static_cast<double>(k) * w) + "," +
               fmt_g17(h.lo + static_cast<double>(k + 1) * w) + "," +
               std::to_string(h.counts[k]) + "\n";
    }
    return out;
}

// Exact 1-D optimal transport cost between equal-length samples:
// sort both and average |a_(i) - b_(i)|.
inline double wasserstein1(std::vector<double> a, std::vector<double> b) {
    require(!a.empty(), "wasserstein1: empty input");
    require(a.size() == b.size(), "wasserstein1: length mismatch");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
    return acc / static_cast<double>(a.size());
}

struct BiasReport {
    struct PerClass {
        int class_id = 0;
        double data_mean = 0.0;
        double generated_mean = 0.0;
        double abs_error = 0.0;
        double wasserstein_means = 0.0;
    };
    std::vector<PerClass> per_class;
    double global_wasserstein = 0.0;
    std::size_t n_generated = 0;
    std::size_t n_data = 0;
    std::string config_digest;
};

namespace detail {

// Seeded choice of k entries without replacement (partial Fisher-Yates),
// preserving determinism of the report across runs.
inline std::vector<double> subsample(const std::vector<double>& values, std::size_t k,
                                     Rng& rng) {
    if (values.size() <= k) return values;
    std::vector<double> pool = values;
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + rng.uniform_index(pool.size() - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

inline double grand_mean(const Batch& batch, int class_id, std::size_t* count) {
    double acc = 0.0;
    std::size_t n = 0;
    for (const auto& item : batch.items) {
        if (item.class_id != class_id) continue;
        acc += mean(item.values);
        ++n;
    }
    *count = n;
    return n > 0 ? acc / static_cast<double>(n) : 0.0;
}

inline std::vector<double> class_means(const Batch& batch, int class_id) {
    std::vector<double> out;
    for (const auto& item : batch.items)
        if (item.class_id == class_id) out.push_back(mean(item.values));
    return out;
}

}  // namespace detail

inline BiasReport bias_report(const Batch& generated, const Batch& data,
                              const std::string& config_digest) {
    require(!generated.items.empty(), "bias_report: empty generated batch");
    require(!data.items.empty(), "bias_report: empty data batch");
    BiasReport rep;
    rep.config_digest = config_digest;
    rep.n_generated = generated.items.size();
    rep.n_data = data.items.size();
    Rng rng = Rng::stream(fnv1a64(config_digest), {stream_tag::kSubsample});

    std::vector<int> class_ids;
    for (const auto& item : generated.items)
        if (std::find(class_ids.begin(), class_ids.end(), item.class_id) ==
            class_ids.end())
            class_ids.push_back(item.class_id);
    std::sort(class_ids.begin(), class_ids.end());

    for (int cid : class_ids) {
        std::size_t n_data_class = 0, n_gen_class = 0;
        double dm = detail::grand_mean(data, cid, &n_data_class);
        require(n_data_class > 0, "bias_report: class " + std::to_string(cid) +
                                      " present in generated but absent in data");
        double gm = detail::grand_mean(generated, cid, &n_gen_class);
        std::vector<double> gen_means = detail::class_means(generated, cid);
        std::vector<double> data_means = detail::class_means(data, cid);
        std::size_t k = std::min(gen_means.size(), data_means.size());
        BiasReport::PerClass pc;
        pc.class_id = cid;
        pc.data_mean = dm;
        pc.generated_mean = gm;
        pc.abs_error = std::abs(gm - dm);
        pc.wasserstein_means = wasserstein1(detail::subsample(gen_means, k, rng),
                                            detail::subsample(data_means, k, rng));
        rep.per_class.push_back(pc);
    }

    std::vector<double> gen_all = sample_means(generated);
    std::vector<double> data_all;
    for (const auto& item : data.items)
        for (int cid : class_ids)
            if (item.class_id == cid) {
                data_all.push_back(mean(item.values));
                break;
            }
    std::size_t k = std::min(gen_all.size(), data_all.size());
    rep.global_wasserstein = wasserstein1(detail::subsample(gen_all, k, rng),
                                          detail::subsample(data_all, k, rng));
    return rep;
}

}  // namespace omslab
