#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gradebench::stats {

struct Descriptive {
    std::size_t n = 0;
    double mean = 0.0;
    double std_dev = 0.0;  // sample standard deviation; 0 for n == 1
    double min = 0.0;
    double q25 = 0.0;
    double median = 0.0;
    double q75 = 0.0;
    double max = 0.0;
};

// Serial implementations are the reference used by tests; the unsuffixed
// entry points run the OpenMP kernels (identical results, element order of
// the reductions is fixed).

double mean_serial(std::span<const double> xs);
double mean(std::span<const double> xs);

double sample_std_serial(std::span<const double> xs, double mean_value);
double sample_std(std::span<const double> xs, double mean_value);

/// Quantile by linear interpolation between closest ranks on sorted data;
/// q in [0, 1].
double quantile_sorted(std::span<const double> sorted, double q);

/// Throws DegenerateGroup on empty input.
Descriptive describe_serial(std::span<const double> xs);
Descriptive describe(std::span<const double> xs);

/// Product-moment correlation. Throws UndefinedCorrelation when either input
/// is constant, InvalidArgument on length mismatch or n < 2.
double pearson(std::span<const double> xs, std::span<const double> ys);

/// Average ranks (ties share the mean of their rank run), 1-based.
std::vector<double> average_ranks(std::span<const double> xs);

/// Pearson over average-rank vectors.
double spearman(std::span<const double> xs, std::span<const double> ys);

struct ChiSquareResult {
    double statistic = 0.0;
    std::size_t dof = 0;
};

/// Pearson chi-square statistic for an r x c contingency table of counts.
/// Throws DegenerateTable when any row or column sum is zero.
ChiSquareResult chi_square(const std::vector<std::vector<double>>& contingency);

/// Dot products of one query against many vectors; the parallel variant
/// splits over rows. Both produce identical doubles.
std::vector<double> dot_many_serial(std::span<const double> query,
                                    const std::vector<std::vector<double>>& rows);
std::vector<double> dot_many(std::span<const double> query,
                             const std::vector<std::vector<double>>& rows);

}  // namespace gradebench::stats
