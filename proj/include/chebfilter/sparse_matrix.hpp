#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

namespace chebfilter {

using cplx = std::complex<double>;

enum class Symmetry { hermitian, general };

// Hermitian (or general) complex sparse matrix in compressed row storage.
// Column indices are 4-byte integers. Within each row the column indices
// are strictly increasing.
struct SparseMatrixCRS {
    std::size_t n = 0;
    std::vector<std::size_t> row_ptr;   // n+1 entries, row_ptr[0] == 0
    std::vector<std::int32_t> col_idx;  // global column indices
    std::vector<cplx> values;
    Symmetry symmetry = Symmetry::hermitian;

    std::size_t nnz() const { return values.size(); }
    double avg_nnz_per_row() const {
        return n ? static_cast<double>(nnz()) / static_cast<double>(n) : 0.0;
    }
};

struct Triplet {
    std::size_t row;
    std::size_t col;
    cplx value;
};

// Builds a CRS matrix from triplets. Duplicate (row, col) entries are
// summed; exact zeros produced by the summation are kept.
inline SparseMatrixCRS build_from_triplets(std::size_t n, const std::vector<Triplet>& trips,
                                           Symmetry sym = Symmetry::hermitian) {
    std::vector<std::map<std::int32_t, cplx>> rows(n);
    for (const auto& t : trips) {
        if (t.row >= n || t.col >= n) throw std::invalid_argument("triplet index out of range");
        rows[t.row][static_cast<std::int32_t>(t.col)] += t.value;
    }
    SparseMatrixCRS H;
    H.n = n;
    H.symmetry = sym;
    H.row_ptr.resize(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) H.row_ptr[i + 1] = H.row_ptr[i] + rows[i].size();
    H.col_idx.reserve(H.row_ptr[n]);
    H.values.reserve(H.row_ptr[n]);
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& [c, v] : rows[i]) {
            H.col_idx.push_back(c);
            H.values.push_back(v);
        }
    }
    return H;
}

inline SparseMatrixCRS diagonal_matrix(const std::vector<double>& d) {
    std::vector<Triplet> trips;
    trips.reserve(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) trips.push_back({i, i, cplx(d[i], 0.0)});
    return build_from_triplets(d.size(), trips, Symmetry::hermitian);
}

// max |H - H^dagger| over all stored entries.
inline double hermiticity_defect(const SparseMatrixCRS& H) {
    std::map<std::pair<std::size_t, std::size_t>, cplx> entries;
    for (std::size_t i = 0; i < H.n; ++i)
        for (std::size_t k = H.row_ptr[i]; k < H.row_ptr[i + 1]; ++k)
            entries[{i, static_cast<std::size_t>(H.col_idx[k])}] = H.values[k];
    double defect = 0.0;
    for (const auto& [ij, v] : entries) {
        auto it = entries.find({ij.second, ij.first});
        cplx mirror = (it != entries.end()) ? it->second : cplx(0.0);
        defect = std::max(defect, std::abs(v - std::conj(mirror)));
    }
    return defect;
}

// Gershgorin disc enclosure of the spectrum of a Hermitian matrix.
inline std::pair<double, double> gershgorin_bounds(const SparseMatrixCRS& H) {
    if (H.symmetry != Symmetry::hermitian)
        throw std::invalid_argument("gershgorin_bounds requires a hermitian matrix");
    if (H.n == 0) throw std::invalid_argument("empty matrix");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < H.n; ++i) {
        double diag = 0.0, radius = 0.0;
        for (std::size_t k = H.row_ptr[i]; k < H.row_ptr[i + 1]; ++k) {
            if (static_cast<std::size_t>(H.col_idx[k]) == i)
                diag = H.values[k].real();
            else
                radius += std::abs(H.values[k]);
        }
        lo = std::min(lo, diag - radius);
        hi = std::max(hi, diag + radius);
    }
    return {lo, hi};
}

enum class Boundary { periodic, open };

// 3D lattice with four degrees of freedom per site; n = 4*Nx*Ny*Nz.
struct LatticeSpec {
    std::size_t nx = 1, ny = 1, nz = 1;
    double mass = 1.0;
    double hop = 1.0;
    Boundary boundary = Boundary::periodic;
    std::uint64_t seed = 0;  // reserved for onsite disorder (amplitude 0)

    std::size_t sites() const { return nx * ny * nz; }
    std::size_t dim() const { return 4 * sites(); }
};

namespace detail {

// 4x4 blocks of the stencil. B = diag(1,1,-1,-1); the hop generators each
// have exactly one nonzero per row with entries in {+-1, +-i}.
struct Block4 {
    cplx a[4][4] = {};
};

inline Block4 onsite_block(double m) {
    Block4 b;
    b.a[0][0] = m;
    b.a[1][1] = m;
    b.a[2][2] = -m;
    b.a[3][3] = -m;
    return b;
}

inline Block4 hop_block(double t, int dir) {
    const cplx I(0.0, 1.0);
    Block4 alpha;
    switch (dir) {
        case 0:  // x
            alpha.a[0][3] = 1;
            alpha.a[1][2] = 1;
            alpha.a[2][1] = 1;
            alpha.a[3][0] = 1;
            break;
        case 1:  // y
            alpha.a[0][3] = -I;
            alpha.a[1][2] = I;
            alpha.a[2][1] = -I;
            alpha.a[3][0] = I;
            break;
        default:  // z
            alpha.a[0][2] = 1;
            alpha.a[1][3] = -1;
            alpha.a[2][0] = 1;
            alpha.a[3][1] = -1;
            break;
    }
    Block4 b = onsite_block(1.0);  // B
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) b.a[r][c] = 0.5 * t * (b.a[r][c] + I * alpha.a[r][c]);
    return b;
}

inline Block4 adjoint(const Block4& b) {
    Block4 r;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r.a[i][j] = std::conj(b.a[j][i]);
    return r;
}

}  // namespace detail

// Scalable Hermitian test matrix family on a 3D lattice with four degrees
// of freedom per site, 13 nonzeros per interior row (every row, with
// periodic boundaries). Wrap-around duplicates at extents < 3 are summed.
inline SparseMatrixCRS topi_generate(const LatticeSpec& spec) {
    if (spec.nx < 1 || spec.ny < 1 || spec.nz < 1)
        throw std::invalid_argument("lattice extents must be positive");
    const std::size_t nx = spec.nx, ny = spec.ny, nz = spec.nz;
    auto site = [&](std::size_t x, std::size_t y, std::size_t z) {
        return (z * ny + y) * nx + x;
    };
    std::vector<Triplet> trips;
    trips.reserve(spec.dim() * 13);
    auto add_block = [&](std::size_t s_row, std::size_t s_col, const detail::Block4& b) {
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c)
                if (b.a[r][c] != cplx(0.0))
                    trips.push_back({4 * s_row + r, 4 * s_col + c, b.a[r][c]});
    };
    const detail::Block4 onsite = detail::onsite_block(spec.mass);
    detail::Block4 hop[3], hop_adj[3];
    for (int d = 0; d < 3; ++d) {
        hop[d] = detail::hop_block(spec.hop, d);
        hop_adj[d] = detail::adjoint(hop[d]);
    }
    const std::size_t ext[3] = {nx, ny, nz};
    for (std::size_t z = 0; z < nz; ++z)
        for (std::size_t y = 0; y < ny; ++y)
            for (std::size_t x = 0; x < nx; ++x) {
                std::size_t s = site(x, y, z);
                add_block(s, s, onsite);
                std::size_t coord[3] = {x, y, z};
                for (int d = 0; d < 3; ++d) {
                    // forward neighbor in +d
                    std::size_t fwd[3] = {coord[0], coord[1], coord[2]};
                    bool fwd_ok = true;
                    if (coord[d] + 1 < ext[d]) {
                        fwd[d] = coord[d] + 1;
                    } else if (spec.boundary == Boundary::periodic) {
                        fwd[d] = 0;
                    } else {
                        fwd_ok = false;
                    }
                    if (fwd_ok) {
                        std::size_t sn = site(fwd[0], fwd[1], fwd[2]);
                        add_block(s, sn, hop[d]);
                        add_block(sn, s, hop_adj[d]);
                    }
                }
            }
    return build_from_triplets(spec.dim(), trips, Symmetry::hermitian);
}

}  // namespace chebfilter
