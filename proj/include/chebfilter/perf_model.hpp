#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "parallel.hpp"

namespace chebfilter {

// Workload and traffic constants of one filter iteration. The defaults
// (20-byte matrix entries, 16-byte vector elements, 13 nonzeros per row,
// 146 flops per row per vector) reproduce the Topi accounting.
struct KernelGeometry {
    std::size_t n = 1;
    double n_nzr = 13.0;
    std::size_t entry_bytes = 20;     // 16-byte value + 4-byte index
    std::size_t vec_elem_bytes = 16;  // complex double
    double flops_per_row_per_vec = 146.0;
    std::size_t n_b = 1;

    void validate() const {
        if (n_nzr <= 0 || entry_bytes == 0 || vec_elem_bytes == 0 ||
            flops_per_row_per_vec <= 0 || n_b == 0)
            throw std::invalid_argument("kernel geometry fields must be positive");
    }
};

struct RooflinePoint {
    double p_max = 0.0;      // flop/s
    double bandwidth = 0.0;  // bytes/s
    double intensity = 0.0;  // flop/byte
    double p_star = 0.0;     // min(p_max, intensity * bandwidth)
};

// I(n_b) = flops / (n_nzr * entry_bytes / n_b + 5 * vec_elem_bytes);
// with the defaults, 146 / (260/n_b + 80) flop/byte.
inline double arithmetic_intensity(const KernelGeometry& g) {
    g.validate();
    return g.flops_per_row_per_vec /
           (g.n_nzr * g.entry_bytes / static_cast<double>(g.n_b) + 5.0 * g.vec_elem_bytes);
}

inline RooflinePoint roofline_limit(double p_max, double bandwidth, double intensity) {
    if (p_max <= 0 || bandwidth <= 0 || intensity <= 0)
        throw std::invalid_argument("roofline inputs must be positive");
    return {p_max, bandwidth, intensity, std::min(p_max, intensity * bandwidth)};
}

// Minimum per-iteration traffic: the matrix plus three panels read (U, W,
// X), two panels written (W, X); U is read only. Write-allocate transfers
// are not counted.
inline std::pair<double, double> min_traffic_volume(const KernelGeometry& g) {
    g.validate();
    double read = static_cast<double>(g.n) * g.n_nzr * g.entry_bytes +
                  3.0 * g.n * g.n_b * g.vec_elem_bytes;
    double write = 2.0 * g.n * g.n_b * g.vec_elem_bytes;
    return {read, write};
}

inline double flop_count(const KernelGeometry& g, std::size_t iterations) {
    g.validate();
    return g.flops_per_row_per_vec * static_cast<double>(g.n) * static_cast<double>(g.n_b) *
           static_cast<double>(iterations);
}

// First-order amortization model for a working set streamed from slow
// memory once per filter application: the excess over the fast-memory
// iteration time shrinks as 1/n_p.
inline double slow_memory_amortization(double working_set_bytes, double slow_bw, std::size_t n_p,
                                       double t_iter_fast) {
    if (working_set_bytes <= 0 || slow_bw <= 0 || n_p == 0 || t_iter_fast <= 0)
        throw std::invalid_argument("amortization inputs must be positive");
    return 1.0 + (working_set_bytes / slow_bw) / (static_cast<double>(n_p) * t_iter_fast);
}

enum class StreamKind { copy, scale, add, triad };

inline double stream_bytes_per_element(StreamKind kind) {
    return (kind == StreamKind::copy || kind == StreamKind::scale) ? 16.0 : 24.0;
}

// STREAM-style bandwidth microbenchmark. Byte accounting follows the
// STREAM convention: copy/scale move 16 bytes per element, add/triad 24;
// write-allocate traffic is not counted. Reports best-of-repetitions.
inline double stream_bench(std::size_t array_elems, StreamKind kind, std::size_t repetitions = 10) {
    if (array_elems == 0 || repetitions == 0)
        throw std::invalid_argument("stream_bench inputs must be positive");
    std::vector<double> a(array_elems, 1.0), b(array_elems, 2.0), c(array_elems, 0.5);
    const double scalar = 3.0;
    double best = 0.0;
    auto chunks = fixed_row_chunks(array_elems);
    for (std::size_t rep = 0; rep < repetitions; ++rep) {
        auto t0 = std::chrono::steady_clock::now();
        parallel_for_chunks(chunks.size(), [&](std::size_t ci) {
            std::size_t lo = chunks[ci].begin, hi = chunks[ci].end;
            switch (kind) {
                case StreamKind::copy:
                    for (std::size_t i = lo; i < hi; ++i) c[i] = a[i];
                    break;
                case StreamKind::scale:
                    for (std::size_t i = lo; i < hi; ++i) b[i] = scalar * c[i];
                    break;
                case StreamKind::add:
                    for (std::size_t i = lo; i < hi; ++i) c[i] = a[i] + b[i];
                    break;
                case StreamKind::triad:
                    for (std::size_t i = lo; i < hi; ++i) a[i] = b[i] + scalar * c[i];
                    break;
            }
        });
        auto t1 = std::chrono::steady_clock::now();
        double secs = std::chrono::duration<double>(t1 - t0).count();
        double bytes = stream_bytes_per_element(kind) * static_cast<double>(array_elems);
        if (secs > 0) best = std::max(best, bytes / secs);
    }
    return best;
}

}  // namespace chebfilter
