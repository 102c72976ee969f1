#pragma once

#include <algorithm>
#include <cstdlib>
#include <cstddef>
#include <string>
#include <thread>
#include <vector>

namespace chebfilter {

// Upper bound on worker threads used by the kernels. Controlled by the
// CHEBFILTER_THREADS environment variable; defaults to the hardware
// concurrency.
inline unsigned thread_cap() {
    if (const char* env = std::getenv("CHEBFILTER_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

// Fixed number of row chunks used for moment accumulation. Independent of
// the thread count so that reductions are reproducible.
inline constexpr std::size_t kReductionChunks = 64;

struct RowChunk {
    std::size_t begin;
    std::size_t end;
};

// Splits [0, n) into at most kReductionChunks contiguous chunks. The split
// depends only on n.
inline std::vector<RowChunk> fixed_row_chunks(std::size_t n) {
    std::size_t nchunks = std::min<std::size_t>(kReductionChunks, std::max<std::size_t>(n, 1));
    std::vector<RowChunk> chunks;
    chunks.reserve(nchunks);
    for (std::size_t c = 0; c < nchunks; ++c) {
        std::size_t lo = n * c / nchunks;
        std::size_t hi = n * (c + 1) / nchunks;
        chunks.push_back({lo, hi});
    }
    return chunks;
}

// Runs f(chunk_index) for every chunk, distributing chunks over up to
// thread_cap() threads. f must only touch state owned by its chunk.
template <typename F>
void parallel_for_chunks(std::size_t nchunks, F&& f) {
    unsigned nthreads = std::min<std::size_t>(thread_cap(), nchunks);
    if (nthreads <= 1) {
        for (std::size_t c = 0; c < nchunks; ++c) f(c);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (unsigned t = 0; t < nthreads; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t c = t; c < nchunks; c += nthreads) f(c);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace chebfilter
