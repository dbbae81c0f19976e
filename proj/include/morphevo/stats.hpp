#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace morphevo {

enum class PValueMethod { Exact, NormalApprox };

struct TestResult {
    double u_statistic = 0.0;  // min(U_a, U_b)
    double p_value = 1.0;      // two-sided
    PValueMethod method = PValueMethod::Exact;
    /// All pooled values identical; p is 1 by convention.
    bool degenerate = false;
};

/// Exact enumeration is used when |a| * |b| <= this.
inline constexpr std::size_t kExactCutoff = 400;

/// Two-sided Mann-Whitney U test with mid-ranks for ties.
TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b);

/// Exact two-sided p: share of all |a|-subsets of the pooled ranks whose U is
/// at least as far from n*m/2 as the observed one. Ties are handled exactly.
double mann_whitney_exact_p(std::span<const double> a, std::span<const double> b);

/// Normal approximation with tie and continuity corrections.
double mann_whitney_normal_p(std::span<const double> a, std::span<const double> b);

/// U_a: number of (a_i, b_j) pairs with a_i > b_j, ties counting one half.
double mann_whitney_u_a(std::span<const double> a, std::span<const double> b);

std::vector<double> best_so_far_series(std::span<const double> values);

}  // namespace morphevo
