#pragma once

#include <map>
#include <set>

#include "sparse_matrix.hpp"

namespace chebfilter {

// Contiguous row sharding plus the halo-exchange schedule derived from the
// sparsity pattern. halo_in[w][v] lists, sorted ascending, the global rows
// owned by v that worker w needs; halo_out mirrors it.
struct PartitionPlan {
    std::size_t worker_count = 1;
    std::vector<std::pair<std::size_t, std::size_t>> row_ranges;  // [start, end)
    std::vector<std::map<std::size_t, std::vector<std::size_t>>> halo_in;
    std::vector<std::map<std::size_t, std::vector<std::size_t>>> halo_out;

    std::size_t owner_of(std::size_t row) const {
        for (std::size_t w = 0; w < worker_count; ++w)
            if (row >= row_ranges[w].first && row < row_ranges[w].second) return w;
        throw std::out_of_range("row not covered by partition");
    }
};

// Balanced contiguous row ranges. Rows are grouped in blocks of 4 when the
// dimension allows it, keeping lattice sites unsplit.
inline PartitionPlan partition_rows(const SparseMatrixCRS& H, std::size_t workers) {
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");
    std::size_t granule = (H.n % 4 == 0) ? 4 : 1;
    std::size_t units = H.n / granule;
    if (workers > units) throw std::invalid_argument("more workers than row blocks");

    PartitionPlan plan;
    plan.worker_count = workers;
    plan.row_ranges.resize(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        std::size_t lo = units * w / workers;
        std::size_t hi = units * (w + 1) / workers;
        plan.row_ranges[w] = {lo * granule, hi * granule};
    }
    plan.halo_in.resize(workers);
    plan.halo_out.resize(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        auto [lo, hi] = plan.row_ranges[w];
        std::set<std::size_t> remote;
        for (std::size_t i = lo; i < hi; ++i)
            for (std::size_t k = H.row_ptr[i]; k < H.row_ptr[i + 1]; ++k) {
                std::size_t c = static_cast<std::size_t>(H.col_idx[k]);
                if (c < lo || c >= hi) remote.insert(c);
            }
        for (std::size_t c : remote) {
            std::size_t owner = plan.owner_of(c);
            plan.halo_in[w][owner].push_back(c);  // set iteration is sorted
        }
    }
    for (std::size_t w = 0; w < workers; ++w)
        for (const auto& [owner, rows] : plan.halo_in[w]) plan.halo_out[owner][w] = rows;
    return plan;
}

}  // namespace chebfilter
