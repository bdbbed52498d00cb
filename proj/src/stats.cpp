#include "gradebench/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gradebench/error.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gradebench::stats {

// Sums are accumulated per fixed-size block and the block partials are added
// in block order, so serial and OpenMP variants produce bitwise-identical
// doubles for any thread count.
namespace {

constexpr std::size_t kBlock = 4096;

inline std::size_t block_count(std::size_t n) { return (n + kBlock - 1) / kBlock; }

double block_sum(std::span<const double> xs, std::size_t block) {
    std::size_t begin = block * kBlock;
    std::size_t end = std::min(begin + kBlock, xs.size());
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += xs[i];
    return s;
}

double block_sq_dev(std::span<const double> xs, double mean_value, std::size_t block) {
    std::size_t begin = block * kBlock;
    std::size_t end = std::min(begin + kBlock, xs.size());
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        double d = xs[i] - mean_value;
        s += d * d;
    }
    return s;
}

}  // namespace

double mean_serial(std::span<const double> xs) {
    if (xs.empty()) throw Error(ErrorCode::DegenerateGroup, "mean of empty range");
    const std::size_t blocks = block_count(xs.size());
    double total = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) total += block_sum(xs, b);
    return total / static_cast<double>(xs.size());
}

double mean(std::span<const double> xs) {
    if (xs.empty()) throw Error(ErrorCode::DegenerateGroup, "mean of empty range");
    const std::size_t blocks = block_count(xs.size());
    std::vector<double> partial(blocks);
#pragma omp parallel for schedule(static)
    for (long long b = 0; b < static_cast<long long>(blocks); ++b)
        partial[static_cast<std::size_t>(b)] = block_sum(xs, static_cast<std::size_t>(b));
    double total = 0.0;
    for (double p : partial) total += p;
    return total / static_cast<double>(xs.size());
}

double sample_std_serial(std::span<const double> xs, double mean_value) {
    if (xs.empty()) throw Error(ErrorCode::DegenerateGroup, "std of empty range");
    if (xs.size() == 1) return 0.0;
    const std::size_t blocks = block_count(xs.size());
    double total = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) total += block_sq_dev(xs, mean_value, b);
    return std::sqrt(total / static_cast<double>(xs.size() - 1));
}

double sample_std(std::span<const double> xs, double mean_value) {
    if (xs.empty()) throw Error(ErrorCode::DegenerateGroup, "std of empty range");
    if (xs.size() == 1) return 0.0;
    const std::size_t blocks = block_count(xs.size());
    std::vector<double> partial(blocks);
#pragma omp parallel for schedule(static)
    for (long long b = 0; b < static_cast<long long>(blocks); ++b)
        partial[static_cast<std::size_t>(b)] = block_sq_dev(xs, mean_value, static_cast<std::size_t>(b));
    double total = 0.0;
    for (double p : partial) total += p;
    return std::sqrt(total / static_cast<double>(xs.size() - 1));
}

double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw Error(ErrorCode::DegenerateGroup, "quantile of empty range");
    if (sorted.size() == 1) return sorted[0];
    double pos = q * static_cast<double>(sorted.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    if (lo >= sorted.size() - 1) return sorted[sorted.size() - 1];
    double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

namespace {

Descriptive describe_impl(std::span<const double> xs, bool parallel) {
    if (xs.empty()) throw Error(ErrorCode::DegenerateGroup, "describe of empty range");
    Descriptive d;
    d.n = xs.size();
    d.mean = parallel ? mean(xs) : mean_serial(xs);
    d.std_dev = parallel ? sample_std(xs, d.mean) : sample_std_serial(xs, d.mean);
    std::vector<double> sorted(xs.begin(), xs.end());
    std::sort(sorted.begin(), sorted.end());
    d.min = sorted.front();
    d.max = sorted.back();
    d.q25 = quantile_sorted(sorted, 0.25);
    d.median = quantile_sorted(sorted, 0.50);
    d.q75 = quantile_sorted(sorted, 0.75);
    return d;
}

}  // namespace

Descriptive describe_serial(std::span<const double> xs) { return describe_impl(xs, false); }
Descriptive describe(std::span<const double> xs) { return describe_impl(xs, true); }

double pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size())
        throw Error(ErrorCode::InvalidArgument, "pearson: length mismatch");
    if (xs.size() < 2)
        throw Error(ErrorCode::InvalidArgument, "pearson: need at least 2 observations");
    double mx = mean_serial(xs);
    double my = mean_serial(ys);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double dx = xs[i] - mx;
        double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw Error(ErrorCode::UndefinedCorrelation, "pearson: constant input");
    return sxy / std::sqrt(sxx * syy);
}

std::vector<double> average_ranks(std::span<const double> xs) {
    const std::size_t n = xs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
        // Ranks are 1-based; a run [i, j] of equal values shares the mean rank.
        double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size())
        throw Error(ErrorCode::InvalidArgument, "spearman: length mismatch");
    if (xs.size() < 2)
        throw Error(ErrorCode::InvalidArgument, "spearman: need at least 2 observations");
    auto rx = average_ranks(xs);
    auto ry = average_ranks(ys);
    return pearson(rx, ry);
}

ChiSquareResult chi_square(const std::vector<std::vector<double>>& contingency) {
    const std::size_t rows = contingency.size();
    if (rows < 2) throw Error(ErrorCode::DegenerateTable, "chi_square: need at least 2 rows");
    const std::size_t cols = contingency.front().size();
    if (cols < 2) throw Error(ErrorCode::DegenerateTable, "chi_square: need at least 2 columns");
    for (const auto& row : contingency)
        if (row.size() != cols)
            throw Error(ErrorCode::InvalidArgument, "chi_square: ragged table");

    std::vector<double> row_sum(rows, 0.0), col_sum(cols, 0.0);
    double total = 0.0;
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            row_sum[r] += contingency[r][c];
            col_sum[c] += contingency[r][c];
            total += contingency[r][c];
        }
    for (double rs : row_sum)
        if (rs <= 0.0) throw Error(ErrorCode::DegenerateTable, "chi_square: zero row marginal");
    for (double cs : col_sum)
        if (cs <= 0.0) throw Error(ErrorCode::DegenerateTable, "chi_square: zero column marginal");

    double statistic = 0.0;
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            double expected = row_sum[r] * col_sum[c] / total;
            double diff = contingency[r][c] - expected;
            statistic += diff * diff / expected;
        }
    return ChiSquareResult{statistic, (rows - 1) * (cols - 1)};
}

std::vector<double> dot_many_serial(std::span<const double> query,
                                    const std::vector<std::vector<double>>& rows) {
    std::vector<double> out(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        double s = 0.0;
        for (std::size_t i = 0; i < row.size() && i < query.size(); ++i) s += query[i] * row[i];
        out[r] = s;
    }
    return out;
}

std::vector<double> dot_many(std::span<const double> query,
                             const std::vector<std::vector<double>>& rows) {
    std::vector<double> out(rows.size());
#pragma omp parallel for schedule(static)
    for (long long r = 0; r < static_cast<long long>(rows.size()); ++r) {
        const auto& row = rows[static_cast<std::size_t>(r)];
        double s = 0.0;
        for (std::size_t i = 0; i < row.size() && i < query.size(); ++i) s += query[i] * row[i];
        out[static_cast<std::size_t>(r)] = s;
    }
    return out;
}

}  // namespace gradebench::stats
