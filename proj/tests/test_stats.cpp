#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "gradebench/error.hpp"
#include "gradebench/stats.hpp"

using namespace gradebench;

namespace {

// Sort-based descriptive oracle, independent of the blocked kernels.
stats::Descriptive naive_describe(std::vector<double> xs) {
    stats::Descriptive d;
    d.n = xs.size();
    double sum = 0.0;
    for (double x : xs) sum += x;
    d.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - d.mean) * (x - d.mean);
        d.std_dev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    std::sort(xs.begin(), xs.end());
    d.min = xs.front();
    d.max = xs.back();
    auto q = [&](double p) {
        if (xs.size() == 1) return xs[0];
        double pos = p * static_cast<double>(xs.size() - 1);
        std::size_t lo = static_cast<std::size_t>(pos);
        if (lo + 1 >= xs.size()) return xs.back();
        return xs[lo] + (pos - static_cast<double>(lo)) * (xs[lo + 1] - xs[lo]);
    };
    d.q25 = q(0.25);
    d.median = q(0.50);
    d.q75 = q(0.75);
    return d;
}

// Quadratic-time average ranks, mirroring the textbook definition.
std::vector<double> naive_ranks(const std::vector<double>& xs) {
    std::vector<double> ranks(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        std::size_t below = 0, equal = 0;
        for (std::size_t j = 0; j < xs.size(); ++j) {
            if (xs[j] < xs[i]) ++below;
            if (xs[j] == xs[i]) ++equal;
        }
        ranks[i] = static_cast<double>(below) + (static_cast<double>(equal) + 1.0) / 2.0;
    }
    return ranks;
}

double naive_pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(xs.size());
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("pearson pins reference values") {
    std::vector<double> a{1, 2, 3, 4};
    CHECK(stats::pearson(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    std::vector<double> neg{-1, -2, -3, -4};
    CHECK(stats::pearson(a, neg) == doctest::Approx(-1.0).epsilon(1e-12));
    std::vector<double> b{2, 1, 4, 3};
    CHECK(std::abs(stats::pearson(a, b) - 0.6) < 1e-12);
}

TEST_CASE("pearson rejects constant input") {
    std::vector<double> a{1, 2, 3};
    std::vector<double> c{5, 5, 5};
    CHECK_THROWS_AS(stats::pearson(a, c), Error);
    CHECK_THROWS_AS(stats::pearson(c, a), Error);
    try {
        stats::pearson(a, c);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UndefinedCorrelation);
    }
}

TEST_CASE("spearman is +/-1 on monotone sequences") {
    std::vector<double> xs{1, 2, 3, 4, 5};
    std::vector<double> up{10, 20, 21, 90, 91};
    std::vector<double> down{91, 90, 21, 20, 10};
    CHECK(stats::spearman(xs, up) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(stats::spearman(xs, down) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("spearman tie case equals pearson of average ranks") {
    std::vector<double> xs{1, 2, 2, 4};
    std::vector<double> ys{1, 3, 2, 4};
    double expected = naive_pearson(naive_ranks(xs), naive_ranks(ys));
    CHECK(stats::spearman(xs, ys) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("correlations match brute force on random vectors with ties") {
    std::mt19937_64 rng(7);
    for (int iter = 0; iter < 1200; ++iter) {
        std::size_t n = 3 + rng() % 40;
        std::vector<double> xs(n), ys(n);
        for (std::size_t i = 0; i < n; ++i) {
            xs[i] = static_cast<double>(rng() % 12);  // coarse values force ties
            ys[i] = static_cast<double>(rng() % 12);
        }
        bool x_const = std::all_of(xs.begin(), xs.end(), [&](double v) { return v == xs[0]; });
        bool y_const = std::all_of(ys.begin(), ys.end(), [&](double v) { return v == ys[0]; });
        if (x_const || y_const) continue;
        CHECK(std::abs(stats::pearson(xs, ys) - naive_pearson(xs, ys)) < 1e-9);
        CHECK(std::abs(stats::spearman(xs, ys) -
                       naive_pearson(naive_ranks(xs), naive_ranks(ys))) < 1e-9);
    }
}

TEST_CASE("spearman is invariant under strictly increasing transforms") {
    std::mt19937_64 rng(11);
    for (int iter = 0; iter < 200; ++iter) {
        std::size_t n = 4 + rng() % 30;
        std::vector<double> xs(n), ys(n);
        for (std::size_t i = 0; i < n; ++i) {
            xs[i] = static_cast<double>(rng() % 100);
            ys[i] = static_cast<double>(rng() % 100);
        }
        bool x_const = std::all_of(xs.begin(), xs.end(), [&](double v) { return v == xs[0]; });
        bool y_const = std::all_of(ys.begin(), ys.end(), [&](double v) { return v == ys[0]; });
        if (x_const || y_const) continue;
        double base = stats::spearman(xs, ys);
        std::vector<double> tx(n);
        double a = 0.5 + static_cast<double>(rng() % 5);
        for (std::size_t i = 0; i < n; ++i) tx[i] = a * xs[i] + std::exp(xs[i] / 50.0);
        CHECK(stats::spearman(tx, ys) == doctest::Approx(base).epsilon(1e-9));
    }
}

TEST_CASE("chi-square pins hand-computed tables") {
    auto uniform = stats::chi_square({{10, 10}, {10, 10}});
    CHECK(uniform.statistic == doctest::Approx(0.0));
    CHECK(uniform.dof == 1);
    auto diagonal = stats::chi_square({{20, 0}, {0, 20}});
    CHECK(diagonal.statistic == doctest::Approx(40.0).epsilon(1e-12));
    CHECK(diagonal.dof == 1);
}

TEST_CASE("chi-square rejects zero marginals") {
    CHECK_THROWS_AS(stats::chi_square({{0, 0}, {1, 2}}), Error);
    CHECK_THROWS_AS(stats::chi_square({{1, 0}, {2, 0}}), Error);
}

TEST_CASE("chi-square matches a double-loop oracle on random 6x8 tables") {
    std::mt19937_64 rng(13);
    for (int iter = 0; iter < 100; ++iter) {
        std::vector<std::vector<double>> table(6, std::vector<double>(8));
        for (auto& row : table)
            for (auto& cell : row) cell = static_cast<double>(1 + rng() % 50);
        auto result = stats::chi_square(table);

        double total = 0.0;
        std::vector<double> rs(6, 0.0), cs(8, 0.0);
        for (std::size_t r = 0; r < 6; ++r)
            for (std::size_t c = 0; c < 8; ++c) {
                rs[r] += table[r][c];
                cs[c] += table[r][c];
                total += table[r][c];
            }
        double expected_stat = 0.0;
        for (std::size_t r = 0; r < 6; ++r)
            for (std::size_t c = 0; c < 8; ++c) {
                double e = rs[r] * cs[c] / total;
                expected_stat += (table[r][c] - e) * (table[r][c] - e) / e;
            }
        CHECK(std::abs(result.statistic - expected_stat) < 1e-9);
        CHECK(result.dof == 35);
    }
}

TEST_CASE("describe matches the sort-based oracle") {
    std::mt19937_64 rng(17);
    for (int iter = 0; iter < 200; ++iter) {
        std::size_t n = 1 + rng() % 500;
        std::vector<double> xs(n);
        for (auto& x : xs) x = static_cast<double>(rng() % 100000) / 100.0;
        auto got = stats::describe(xs);
        auto want = naive_describe(xs);
        CHECK(std::abs(got.mean - want.mean) < 1e-9);
        CHECK(std::abs(got.std_dev - want.std_dev) < 1e-9);
        CHECK(got.min == want.min);
        CHECK(got.max == want.max);
        CHECK(std::abs(got.q25 - want.q25) < 1e-9);
        CHECK(std::abs(got.median - want.median) < 1e-9);
        CHECK(std::abs(got.q75 - want.q75) < 1e-9);
        CHECK(got.min <= got.q25);
        CHECK(got.q25 <= got.median);
        CHECK(got.median <= got.q75);
        CHECK(got.q75 <= got.max);
    }
}

TEST_CASE("serial and OpenMP kernels produce identical doubles") {
    std::mt19937_64 rng(19);
    std::vector<double> xs(20000);
    for (auto& x : xs) x = static_cast<double>(rng()) / 1e12;
    CHECK(stats::mean(xs) == stats::mean_serial(xs));
    double m = stats::mean_serial(xs);
    CHECK(stats::sample_std(xs, m) == stats::sample_std_serial(xs, m));

    auto a = stats::describe(xs);
    auto b = stats::describe_serial(xs);
    CHECK(a.mean == b.mean);
    CHECK(a.std_dev == b.std_dev);
    CHECK(a.q25 == b.q25);
    CHECK(a.median == b.median);
    CHECK(a.q75 == b.q75);

    std::vector<std::vector<double>> rows(300, std::vector<double>(128));
    for (auto& row : rows)
        for (auto& v : row) v = static_cast<double>(rng()) / 1e12;
    std::vector<double> query(128);
    for (auto& v : query) v = static_cast<double>(rng()) / 1e12;
    CHECK(stats::dot_many(query, rows) == stats::dot_many_serial(query, rows));
}

TEST_CASE("describe handles single-element groups") {
    std::vector<double> one{5.0};
    auto d = stats::describe(one);
    CHECK(d.mean == 5.0);
    CHECK(d.std_dev == 0.0);
    CHECK(d.q25 == 5.0);
    CHECK(d.max == 5.0);
    CHECK_THROWS_AS(stats::describe(std::vector<double>{}), Error);
}
