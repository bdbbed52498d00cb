// Times the serial reference kernels against their OpenMP variants:
// similarity scoring of one query over many embeddings, and descriptive
// statistics over large latency arrays. Both variants must produce identical
// doubles; this binary reports throughput, the unit tests check equality.

#include <cstdio>
#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "gradebench/retrieval.hpp"
#include "gradebench/stats.hpp"

using namespace gradebench;

namespace {

double now_seconds() {
#ifdef _OPENMP
    return omp_get_wtime();
#else
    return static_cast<double>(clock()) / CLOCKS_PER_SEC;
#endif
}

template <typename F>
double time_best_of(int repeats, F&& fn) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        double start = now_seconds();
        fn();
        double elapsed = now_seconds() - start;
        if (elapsed < best) best = elapsed;
    }
    return best;
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads: %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP not available; parallel variants run serially\n");
#endif

    std::mt19937_64 rng(12345);

    std::printf("\nsimilarity scoring: 1 query x N embeddings (dim 256)\n");
    for (std::size_t n : {1000, 10000, 50000}) {
        std::vector<Embedding> embeddings(n);
        for (auto& e : embeddings) {
            e.vector.resize(256);
            for (auto& v : e.vector) v = static_cast<double>(rng() % 2000) / 1000.0 - 1.0;
            e.model_tag = "bench";
        }
        Embedding query;
        query.vector.resize(256);
        for (auto& v : query.vector) v = static_cast<double>(rng() % 2000) / 1000.0 - 1.0;
        query.model_tag = "bench";

        volatile double sink = 0.0;
        double serial = time_best_of(3, [&] { sink = cosine_scores_serial(query, embeddings)[0]; });
        double parallel = time_best_of(3, [&] { sink = cosine_scores(query, embeddings)[0]; });
        std::printf("  N=%-6zu serial %8.3f ms   omp %8.3f ms   speedup %.2fx\n", n,
                    serial * 1e3, parallel * 1e3, serial / parallel);
        (void)sink;
    }

    std::printf("\ndescriptive statistics over N latencies\n");
    for (std::size_t n : {100000, 1000000, 4000000}) {
        std::vector<double> xs(n);
        for (auto& x : xs) x = static_cast<double>(rng() % 100000) / 1000.0;
        volatile double sink = 0.0;
        double serial = time_best_of(3, [&] { sink = stats::describe_serial(xs).mean; });
        double parallel = time_best_of(3, [&] { sink = stats::describe(xs).mean; });
        std::printf("  N=%-8zu serial %8.3f ms   omp %8.3f ms   speedup %.2fx\n", n,
                    serial * 1e3, parallel * 1e3, serial / parallel);
        (void)sink;
    }

    std::printf("\ndot products: 1 query x N rows (dim 256)\n");
    for (std::size_t n : {1000, 20000}) {
        std::vector<std::vector<double>> rows(n, std::vector<double>(256));
        for (auto& row : rows)
            for (auto& v : row) v = static_cast<double>(rng() % 2000) / 1000.0 - 1.0;
        std::vector<double> query(256);
        for (auto& v : query) v = static_cast<double>(rng() % 2000) / 1000.0 - 1.0;

        volatile double sink = 0.0;
        double serial = time_best_of(3, [&] { sink = stats::dot_many_serial(query, rows)[0]; });
        double parallel = time_best_of(3, [&] { sink = stats::dot_many(query, rows)[0]; });
        std::printf("  N=%-6zu serial %8.3f ms   omp %8.3f ms   speedup %.2fx\n", n,
                    serial * 1e3, parallel * 1e3, serial / parallel);
        (void)sink;
    }
    return 0;
}
