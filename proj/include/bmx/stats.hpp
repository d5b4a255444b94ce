#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

namespace bmx {

inline constexpr double kLog2Pi = 1.8378770664093454836;

inline double log_sum_exp(std::span<const double> v) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : v) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

inline double normal_logpdf(double x, double mean, double sd) {
    double z = (x - mean) / sd;
    return -0.5 * (kLog2Pi + z * z) - std::log(sd);
}

inline double mean_of(std::span<const double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double var_of(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    double m = mean_of(v), s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

inline double sd_of(std::span<const double> v) { return std::sqrt(var_of(v)); }

inline double se_of_mean(std::span<const double> v) {
    return v.size() < 2 ? 0.0 : sd_of(v) / std::sqrt(static_cast<double>(v.size()));
}

/// Standard error of a chain mean from non-overlapping batches of size about sqrt(n).
inline double batch_means_se(std::span<const double> chain) {
    std::size_t n = chain.size();
    if (n < 4) return se_of_mean(chain);
    std::size_t b = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(n))));
    std::size_t k = n / b;
    if (k < 2) return se_of_mean(chain);
    std::vector<double> means(k);
    for (std::size_t j = 0; j < k; ++j)
        means[j] = mean_of(chain.subspan(j * b, b));
    return sd_of(means) / std::sqrt(static_cast<double>(k));
}

/// Average ranks, ties shared.
inline std::vector<double> ranks_of(std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

inline double pearson(std::span<const double> a, std::span<const double> b) {
    double ma = mean_of(a), mb = mean_of(b), sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0 || sbb == 0) return std::numeric_limits<double>::quiet_NaN();
    return sab / std::sqrt(saa * sbb);
}

inline double spearman(std::span<const double> a, std::span<const double> b) {
    auto ra = ranks_of(a), rb = ranks_of(b);
    return pearson(ra, rb);
}

}  // namespace bmx
