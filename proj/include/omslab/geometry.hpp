#pragma once

// High-dimensional Gaussian diagnostics: radius estimation for the terminal
// latents of a schedule, annulus/hemisphere concentration checks and the
// unit-sphere surface/volume formulas.
//
// Monte-Carlo loops derive each sample's randomness from (seed, sample index),
// never from the schedule or the worker id: results are independent of the
// worker count, and the radius rows of different schedules share their draws
// (common random numbers), which is what makes the small delta_r differences
// between schedules resolvable at n = 20k.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "omslab/data.hpp"
#include "omslab/numfmt.hpp"
#include "omslab/parallel.hpp"
#include "omslab/rng.hpp"
#include "omslab/schedule.hpp"

namespace omslab {

struct RadiusReport {
    std::string schedule_name;
    double snr_terminal = 0.0;
    double r_train = 0.0;   // radius of x_T^train = sqrt(abar_T) x0 + sqrt(1-abar_T) z
    double r_sample = 0.0;  // radius of x_T^sample ~ N(0, I)
    double delta_r = 0.0;   // r_sample - r_train
    std::size_t dim = 0;
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
};

inline double gaussian_radius(double sigma, std::size_t dim) {
    require(sigma > 0.0, "gaussian_radius: sigma must be > 0");
    require(dim >= 1, "gaussian_radius: dim must be >= 1");
    return sigma * std::sqrt(static_cast<double>(dim));
}

// sqrt of the mean squared norm over the batch.
inline double empirical_radius(const Batch& samples) {
    require(!samples.items.empty(), "empirical_radius: empty batch");
    double acc = 0.0;
    for (const auto& item : samples.items) acc += squared_norm(item.values);
    return std::sqrt(acc / static_cast<double>(samples.items.size()));
}

inline std::vector<RadiusReport> radius_table(const std::vector<Schedule>& schedules,
                                              const Batch& data, std::size_t n,
                                              std::uint64_t seed, int workers = 1) {
    require(!data.items.empty(), "radius_table: empty data batch");
    require(n >= 1, "radius_table: n must be >= 1");
    const std::size_t d = data.dim;
    std::vector<RadiusReport> reports;
    for (const auto& sched : schedules) {
        const double abar_T = sched.terminal_abar();
        const double sa = std::sqrt(abar_T);
        const double sb = std::sqrt(1.0 - abar_T);
        std::vector<double> sq_train(n), sq_sample(n);
        parallel_blocks(n, workers, [&](std::size_t begin, std::size_t end) {
            for (std::size_t j = begin; j < end; ++j) {
                Rng rt = Rng::stream(seed, {stream_tag::kRadiusTrain, j});
                const Vec& x0 = data.items[rt.uniform_index(data.items.size())].values;
                double acc_t = 0.0;
                for (std::size_t k = 0; k < d; ++k) {
                    double v = sa * x0[k] + sb * rt.normal();
                    acc_t += v * v;
                }
                sq_train[j] = acc_t;
                Rng rs = Rng::stream(seed, {stream_tag::kRadiusSample, j});
                double acc_s = 0.0;
                for (std::size_t k = 0; k < d; ++k) {
                    double v = rs.normal();
                    acc_s += v * v;
                }
                sq_sample[j] = acc_s;
            }
        });
        double sum_t = 0.0, sum_s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            sum_t += sq_train[j];
            sum_s += sq_sample[j];
        }
        RadiusReport rep;
        rep.schedule_name = sched.kind_name();
        rep.snr_terminal = snr(sched, sched.num_steps);
        rep.r_train = std::sqrt(sum_t / static_cast<double>(n));
        rep.r_sample = std::sqrt(sum_s / static_cast<double>(n));
        rep.delta_r = rep.r_sample - rep.r_train;
        rep.dim = d;
        rep.n_samples = n;
        rep.seed = seed;
        reports.push_back(std::move(rep));
    }
    return reports;
}

inline std::string radius_table_csv(const std::vector<RadiusReport>& reports) {
    std::string out = "schedule,snr_T,r_train,r_sample,delta_r,dim,n,seed\n";
    for (const auto& r : reports) {
        out += r.schedule_name + "," + fmt_g9(r.snr_terminal) + "," +
               fmt_g9(r.r_train) + "," + fmt_g9(r.r_sample) + "," +
               fmt_g9(r.delta_r) + "," + std::to_string(r.dim) + "," +
               std::to_string(r.n_samples) + "," + std::to_string(r.seed) + "\n";
    }
    return out;
}

struct AnnulusCheck {
    double fraction_outside = 0.0;
    double bound = 0.0;  // (4/c^2) e^{-c^2/4}
};

// Fraction of standard-normal samples with ||x|| outside
// [sqrt(dim-1)-c, sqrt(dim-1)+c], against the concentration bound.
inline AnnulusCheck annulus_mass_check(std::size_t dim, double c, std::size_t n,
                                       std::uint64_t seed, int workers = 1) {
    require(dim >= 2, "annulus_mass_check: dim must be >= 2");
    require(c > 0.0, "annulus_mass_check: c must be > 0");
    require(n >= 1000, "annulus_mass_check: n must be >= 1000");
    const double r0 = std::sqrt(static_cast<double>(dim - 1));
    const double lo = r0 - c, hi = r0 + c;
    std::atomic<std::size_t> total{0};
    parallel_blocks(n, workers, [&](std::size_t begin, std::size_t end) {
        std::size_t cnt = 0;
        for (std::size_t j = begin; j < end; ++j) {
            Rng rng = Rng::stream(seed, {stream_tag::kMonteCarlo, j});
            double acc = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                double v = rng.normal();
                acc += v * v;
            }
            double r = std::sqrt(acc);
            if (r < lo || r > hi) ++cnt;
        }
        total += cnt;
    });
    AnnulusCheck res;
    res.fraction_outside = static_cast<double>(total.load()) / static_cast<double>(n);
    res.bound = (4.0 / (c * c)) * std::exp(-c * c / 4.0);
    return res;
}

struct HemisphereCheck {
    double fraction_above = 0.0;
    double bound = 0.0;  // (2/c) e^{-c^2/2}
};

// Points uniform on the unit sphere (normalized Gaussians), restricted to the
// hemisphere x1 >= 0 by a sign flip; fraction with x1 > c/sqrt(dim-1).
inline HemisphereCheck hemisphere_slab_check(std::size_t dim, double c, std::size_t n,
                                             std::uint64_t seed, int workers = 1) {
    require(dim >= 3, "hemisphere_slab_check: dim must be >= 3");
    require(c > 0.0, "hemisphere_slab_check: c must be > 0");
    require(n >= 1, "hemisphere_slab_check: n must be >= 1");
    const double threshold = c / std::sqrt(static_cast<double>(dim - 1));
    std::atomic<std::size_t> total{0};
    parallel_blocks(n, workers, [&](std::size_t begin, std::size_t end) {
        std::size_t cnt = 0;
        for (std::size_t j = begin; j < end; ++j) {
            Rng rng = Rng::stream(seed, {stream_tag::kMonteCarlo, j});
            double x1 = rng.normal();
            double acc = x1 * x1;
            for (std::size_t k = 1; k < dim; ++k) {
                double v = rng.normal();
                acc += v * v;
            }
            double coord = std::fabs(x1) / std::sqrt(acc);
            if (coord > threshold) ++cnt;
        }
        total += cnt;
    });
    HemisphereCheck res;
    res.fraction_above = static_cast<double>(total.load()) / static_cast<double>(n);
    res.bound = (2.0 / c) * std::exp(-c * c / 2.0);
    return res;
}

struct SphereMeasures {
    double area = 0.0;    // A(d) = 2 pi^{d/2} / Gamma(d/2)
    double volume = 0.0;  // V(d) = pi^{d/2} / ((d/2) Gamma(d/2))
};

inline SphereMeasures unit_sphere_measures(std::size_t dim) {
    require(dim >= 1, "unit_sphere_measures: dim must be >= 1");
    const double half_d = static_cast<double>(dim) / 2.0;
    const double log_pi = std::log(std::numbers::pi);
    SphereMeasures m;
    m.area = std::exp(std::log(2.0) + half_d * log_pi - std::lgamma(half_d));
    m.volume = std::exp(half_d * log_pi - std::log(half_d) - std::lgamma(half_d));
    return m;
}

}  // namespace omslab
