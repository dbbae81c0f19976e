#include "morphevo/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace morphevo {

namespace {

// Doubled mid-ranks of the pooled sample (integers, so sums compare exactly).
std::vector<long> doubled_ranks(std::span<const double> pooled) {
    std::vector<std::size_t> order(pooled.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return pooled[i] < pooled[j]; });
    std::vector<long> ranks(pooled.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && pooled[order[j + 1]] == pooled[order[i]]) ++j;
        // ranks i+1 .. j+1, doubled mid-rank = (i + 1) + (j + 1)
        const long r2 = static_cast<long>(i + j + 2);
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r2;
        i = j + 1;
    }
    return ranks;
}

std::vector<double> pool(std::span<const double> a, std::span<const double> b) {
    std::vector<double> out(a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

void check_sizes(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) {
        throw std::invalid_argument("mann_whitney_u: both samples must be non-empty");
    }
}

}  // namespace

double mann_whitney_u_a(std::span<const double> a, std::span<const double> b) {
    double u = 0.0;
    for (double x : a) {
        for (double y : b) {
            if (x > y) u += 1.0;
            else if (x == y) u += 0.5;
        }
    }
    return u;
}

double mann_whitney_exact_p(std::span<const double> a, std::span<const double> b) {
    check_sizes(a, b);
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    const auto ranks = doubled_ranks(pool(a, b));
    const long total = std::accumulate(ranks.begin(), ranks.end(), 0L);

    // counts[k][s]: number of k-subsets of the pooled items with doubled rank sum s.
    std::vector<std::vector<double>> counts(n + 1, std::vector<double>(static_cast<std::size_t>(total) + 1, 0.0));
    counts[0][0] = 1.0;
    for (std::size_t item = 0; item < ranks.size(); ++item) {
        const auto r = static_cast<std::size_t>(ranks[item]);
        for (std::size_t k = std::min(n, item + 1); k >= 1; --k) {
            auto& dst = counts[k];
            const auto& src = counts[k - 1];
            for (std::size_t s = dst.size(); s-- > r;) {
                dst[s] += src[s - r];
            }
        }
    }

    // Doubled U_a = doubled rank sum of a - n(n+1); centre at n*m.
    long observed = 0;
    for (std::size_t i = 0; i < n; ++i) observed += ranks[i];
    const long base = static_cast<long>(n * (n + 1));
    const long centre = static_cast<long>(n * m);
    const long observed_dev = std::labs(2 * (observed - base) - 2 * centre);

    double extreme = 0.0;
    double all = 0.0;
    for (std::size_t s = 0; s < counts[n].size(); ++s) {
        const double c = counts[n][s];
        if (c == 0.0) continue;
        all += c;
        const long dev = std::labs(2 * (static_cast<long>(s) - base) - 2 * centre);
        if (dev >= observed_dev) extreme += c;
    }
    return std::clamp(extreme / all, 0.0, 1.0);
}

double mann_whitney_normal_p(std::span<const double> a, std::span<const double> b) {
    check_sizes(a, b);
    const auto n = static_cast<double>(a.size());
    const auto m = static_cast<double>(b.size());
    const auto pooled = pool(a, b);
    const double big_n = n + m;

    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    double tie_term = 0.0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const auto t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }
    const double variance = n * m / 12.0 * ((big_n + 1.0) - tie_term / (big_n * (big_n - 1.0)));
    if (!(variance > 0.0)) return 1.0;
    const double u = mann_whitney_u_a(a, b);
    const double deviation = std::max(0.0, std::abs(u - n * m / 2.0) - 0.5);
    const double z = deviation / std::sqrt(variance);
    return std::clamp(std::erfc(z / std::sqrt(2.0)), 0.0, 1.0);
}

TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
    check_sizes(a, b);
    TestResult r;
    const double ua = mann_whitney_u_a(a, b);
    const double ub = static_cast<double>(a.size() * b.size()) - ua;
    r.u_statistic = std::min(ua, ub);

    const auto pooled = pool(a, b);
    const bool all_equal = std::all_of(pooled.begin(), pooled.end(), [&](double v) { return v == pooled.front(); });
    if (all_equal) {
        r.p_value = 1.0;
        r.degenerate = true;
        r.method = a.size() * b.size() <= kExactCutoff ? PValueMethod::Exact : PValueMethod::NormalApprox;
        return r;
    }
    if (a.size() * b.size() <= kExactCutoff) {
        r.method = PValueMethod::Exact;
        r.p_value = mann_whitney_exact_p(a, b);
    } else {
        r.method = PValueMethod::NormalApprox;
        r.p_value = mann_whitney_normal_p(a, b);
    }
    return r;
}

std::vector<double> best_so_far_series(std::span<const double> values) {
    if (values.empty()) {
        throw std::invalid_argument("best_so_far_series: empty input");
    }
    std::vector<double> out(values.begin(), values.end());
    for (std::size_t i = 1; i < out.size(); ++i) out[i] = std::max(out[i], out[i - 1]);
    return out;
}

}  // namespace morphevo
