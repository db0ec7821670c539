#pragma once

// Independent reference computations for the test suites. Nothing here calls into the code
// paths it is used to check.

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <set>
#include <vector>

namespace oracle {

/// Direct O(N^2) evaluation of X(k) = (1/N) sum_n x(n) exp(-j 2 pi k n / N).
inline std::vector<std::complex<double>> direct_dft(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            // Reduce k*t mod N first so the angle stays small and exact.
            const auto m = static_cast<double>((k * t) % n);
            const double angle = -2.0 * std::numbers::pi * m / static_cast<double>(n);
            acc += x[t] * std::complex<double>(std::cos(angle), std::sin(angle));
        }
        out[k] = acc / static_cast<double>(n);
    }
    return out;
}

/// Band power by classifying every one-sided bin from scratch.
inline double brute_band_power(const std::vector<std::complex<double>>& spectrum, double fs, double lo, double hi,
                               bool inclusive_hi) {
    const std::size_t n = spectrum.size();
    double total = 0.0;
    for (std::size_t k = 0; k <= n / 2; ++k) {
        const double f = static_cast<double>(k) * fs / static_cast<double>(n);
        if (k == 0 || f < 0.5) continue;
        const bool inside = f >= lo && (inclusive_hi ? f <= hi : f < hi);
        if (inside) total += std::norm(spectrum[k]);
    }
    return total;
}

/// All offsets o with o % stride == 0 and o + len <= length.
inline std::set<std::size_t> window_offsets(std::size_t length, std::size_t len, std::size_t stride) {
    std::set<std::size_t> out;
    for (std::size_t o = 0; o < length; ++o) {
        if (o % stride == 0 && o + len <= length) out.insert(o);
    }
    return out;
}

/// Per-sample exclusion mask: true when |i/fs - m| <= radius for some marker m.
inline std::vector<bool> excluded_mask(std::size_t n, double fs, const std::vector<double>& markers, double radius) {
    std::vector<bool> mask(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / fs;
        for (double m : markers) {
            if (t >= m - radius && t <= m + radius) mask[i] = true;
        }
    }
    return mask;
}

/// Weighted Gini impurity 1 - sum p_c^2.
inline double gini(const std::vector<double>& counts) {
    double total = 0.0, sq = 0.0;
    for (double c : counts) total += c;
    if (total <= 0.0) return 0.0;
    for (double c : counts) sq += (c / total) * (c / total);
    return 1.0 - sq;
}

struct Row {
    std::vector<double> x;
    int y = 0;
};

/// Gini decrease of splitting `rows` at feature < threshold.
inline double gini_gain(const std::vector<Row>& rows, std::size_t n_classes, std::size_t feature, double threshold) {
    std::vector<double> all(n_classes, 0.0), left(n_classes, 0.0), right(n_classes, 0.0);
    for (const auto& r : rows) {
        all[r.y] += 1;
        (r.x[feature] < threshold ? left : right)[r.y] += 1;
    }
    double nl = 0, nr = 0;
    for (std::size_t c = 0; c < n_classes; ++c) {
        nl += left[c];
        nr += right[c];
    }
    const double n = nl + nr;
    return gini(all) - (nl / n) * gini(left) - (nr / n) * gini(right);
}

/// Best Gini gain over every feature and every midpoint between distinct sorted values.
inline double best_gini_gain(const std::vector<Row>& rows, std::size_t n_classes) {
    double best = 0.0;
    const std::size_t p = rows.front().x.size();
    for (std::size_t f = 0; f < p; ++f) {
        std::set<double> values;
        for (const auto& r : rows) values.insert(r.x[f]);
        for (auto it = values.begin(); std::next(it) != values.end(); ++it) {
            const double mid = (*it + *std::next(it)) / 2.0;
            best = std::max(best, gini_gain(rows, n_classes, f, mid));
        }
    }
    return best;
}

/// One-vs-rest binary counts for class c of a row-major confusion matrix.
struct Binary {
    std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

inline Binary one_vs_rest(const std::vector<std::uint64_t>& counts, std::size_t n, std::size_t c) {
    Binary b;
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t p = 0; p < n; ++p) {
            const auto v = counts[t * n + p];
            if (t == c && p == c) b.tp += v;
            else if (t != c && p == c) b.fp += v;
            else if (t == c && p != c) b.fn += v;
            else b.tn += v;
        }
    }
    return b;
}

}  // namespace oracle
