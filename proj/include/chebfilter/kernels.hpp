#pragma once

#include "block_vector.hpp"
#include "parallel.hpp"
#include "sparse_matrix.hpp"

namespace chebfilter {

// Affine spectral map x -> alpha*x + beta applied on the fly; the stored
// matrix is never modified, so one matrix serves all windows.
struct ShiftScale {
    double alpha = 1.0;
    double beta = 0.0;
};

// Per-degree, per-column Chebyshev moments eta_p = <w, u>, mu_p = <u, u>
// for degrees 3..degree_max. mu is real up to rounding.
struct MomentSeries {
    std::size_t degree_max = 2;
    std::size_t columns = 0;
    std::vector<cplx> eta;
    std::vector<cplx> mu;

    MomentSeries() = default;
    MomentSeries(std::size_t np, std::size_t ns) : degree_max(np), columns(ns) {
        std::size_t rows = np >= 3 ? np - 2 : 0;
        eta.assign(rows * ns, cplx(0.0));
        mu.assign(rows * ns, cplx(0.0));
    }

    std::size_t index(std::size_t p, std::size_t j) const {
        if (p < 3 || p > degree_max || j >= columns)
            throw std::out_of_range("moment index out of range");
        return (p - 3) * columns + j;
    }
    cplx& eta_at(std::size_t p, std::size_t j) { return eta[index(p, j)]; }
    cplx& mu_at(std::size_t p, std::size_t j) { return mu[index(p, j)]; }
    const cplx& eta_at(std::size_t p, std::size_t j) const { return eta[index(p, j)]; }
    const cplx& mu_at(std::size_t p, std::size_t j) const { return mu[index(p, j)]; }
};

// Debug-mode accounting of panel sweeps and matrix sweeps per kernel call.
struct TrafficCounter {
    std::size_t panel_reads = 0;
    std::size_t panel_writes = 0;
    std::size_t matrix_sweeps = 0;

    // Byte volumes for a panel of shape n x n_b and the matrix sweeps.
    double read_bytes(std::size_t n, std::size_t n_b, std::size_t nnz,
                      std::size_t entry_bytes = 20, std::size_t vec_elem_bytes = 16) const {
        return static_cast<double>(panel_reads) * n * n_b * vec_elem_bytes +
               static_cast<double>(matrix_sweeps) * nnz * entry_bytes;
    }
    double write_bytes(std::size_t n, std::size_t n_b, std::size_t vec_elem_bytes = 16) const {
        return static_cast<double>(panel_writes) * n * n_b * vec_elem_bytes;
    }
};

namespace detail {

inline void check_spmmv_shapes(const SparseMatrixCRS& H, const SubblockView& X,
                               const SubblockView& Y) {
    if (X.width() != Y.width()) throw std::invalid_argument("spmmv: block width mismatch");
    if (Y.rows() < H.n) throw std::invalid_argument("spmmv: output rows must cover matrix rows");
    if (X.rows() < H.n) throw std::invalid_argument("spmmv: input rows must cover matrix rows");
    if (X.data() == Y.data()) throw std::invalid_argument("spmmv: X and Y must not alias");
}

// Fixed-shape pairwise reduction over per-chunk partials; the combine order
// depends only on the chunk count, not on scheduling.
inline void tree_reduce_partials(std::vector<std::vector<cplx>>& partials) {
    std::size_t len = partials.size();
    for (std::size_t stride = 1; stride < len; stride *= 2)
        for (std::size_t c = 0; c + stride < len; c += 2 * stride)
            for (std::size_t j = 0; j < partials[c].size(); ++j)
                partials[c][j] += partials[c + stride][j];
}

}  // namespace detail

// Y = (alpha*H + beta*1) X.
inline void spmmv_shifted(const SparseMatrixCRS& H, ShiftScale s, const SubblockView& X,
                          SubblockView Y) {
    detail::check_spmmv_shapes(H, X, Y);
    const std::size_t nb = X.width();
    const cplx* x = X.data();
    cplx* y = Y.data();
    auto chunks = fixed_row_chunks(H.n);
    parallel_for_chunks(chunks.size(), [&](std::size_t c) {
        std::vector<cplx> acc(nb);
        for (std::size_t i = chunks[c].begin; i < chunks[c].end; ++i) {
            for (std::size_t j = 0; j < nb; ++j) acc[j] = s.beta * x[i * nb + j];
            for (std::size_t k = H.row_ptr[i]; k < H.row_ptr[i + 1]; ++k) {
                cplx av = s.alpha * H.values[k];
                const cplx* xr = x + static_cast<std::size_t>(H.col_idx[k]) * nb;
                for (std::size_t j = 0; j < nb; ++j) acc[j] += av * xr[j];
            }
            for (std::size_t j = 0; j < nb; ++j) y[i * nb + j] = acc[j];
        }
    });
}

// Y = 2*(alpha*H + beta*1) X - Z, evaluated per row so Z may equal Y.
inline void spmmv_shifted_two_minus(const SparseMatrixCRS& H, ShiftScale s, const SubblockView& X,
                                    SubblockView Y, const SubblockView& Z) {
    detail::check_spmmv_shapes(H, X, Y);
    if (Z.width() != Y.width() || Z.rows() < H.n)
        throw std::invalid_argument("spmmv: Z shape mismatch");
    if (X.data() == Z.data()) throw std::invalid_argument("spmmv: X and Z must not alias");
    const std::size_t nb = X.width();
    const cplx* x = X.data();
    const cplx* z = Z.data();
    cplx* y = Y.data();
    auto chunks = fixed_row_chunks(H.n);
    parallel_for_chunks(chunks.size(), [&](std::size_t c) {
        std::vector<cplx> acc(nb);
        for (std::size_t i = chunks[c].begin; i < chunks[c].end; ++i) {
            for (std::size_t j = 0; j < nb; ++j) acc[j] = s.beta * x[i * nb + j];
            for (std::size_t k = H.row_ptr[i]; k < H.row_ptr[i + 1]; ++k) {
                cplx av = s.alpha * H.values[k];
                const cplx* xr = x + static_cast<std::size_t>(H.col_idx[k]) * nb;
                for (std::size_t j = 0; j < nb; ++j) acc[j] += av * xr[j];
            }
            for (std::size_t j = 0; j < nb; ++j) y[i * nb + j] = 2.0 * acc[j] - z[i * nb + j];
        }
    });
}

// Recurrence start, lines preceding the degree loop: for one panel,
//   U = (alpha*H + beta) X0
//   W = 2 (alpha*H + beta) U - X0
//   X = g0c0*X0 + g1c1*U + g2c2*W
inline void cheb_init(const SparseMatrixCRS& H, ShiftScale s, SubblockView X, SubblockView U,
                      SubblockView W, double g0c0, double g1c1, double g2c2,
                      TrafficCounter* tc = nullptr) {
    spmmv_shifted(H, s, X, U);
    spmmv_shifted_two_minus(H, s, U, W, X);
    const std::size_t nb = X.width();
    cplx* x = X.data();
    const cplx* u = U.data();
    const cplx* w = W.data();
    auto chunks = fixed_row_chunks(H.n);
    parallel_for_chunks(chunks.size(), [&](std::size_t c) {
        for (std::size_t i = chunks[c].begin * nb; i < chunks[c].end * nb; ++i)
            x[i] = g0c0 * x[i] + g1c1 * u[i] + g2c2 * w[i];
    });
    if (tc) {
        tc->matrix_sweeps += 2;
        tc->panel_reads += 2 /* spmmv X */ + 2 /* spmmv U, X */ + 3 /* axpy X,U,W */;
        tc->panel_writes += 1 /* U */ + 1 /* W */ + 1 /* X */;
    }
}

// Fused degree-p step on one panel; the caller has already swapped W and U.
// One pass per row computes
//   w_new = 2 (alpha*H + beta) u - w
//   eta_p[j] += conj(w_new_ij) u_ij,  mu_p[j] += conj(u_ij) u_ij
//   x_ij += gc * w_new_ij
// touching U, W, X once each (W and X written once, U read only).
inline void chebfd_op(const SparseMatrixCRS& H, ShiftScale s, const SubblockView& U, SubblockView W,
                      SubblockView X, std::size_t p, double gc, MomentSeries& out,
                      std::size_t moment_col_offset = 0, TrafficCounter* tc = nullptr) {
    detail::check_spmmv_shapes(H, U, W);
    if (X.width() != U.width() || X.rows() < H.n)
        throw std::invalid_argument("chebfd_op: X shape mismatch");
    if (p < 3 || p > out.degree_max) throw std::invalid_argument("chebfd_op: degree out of range");
    const std::size_t nb = U.width();
    if (moment_col_offset + nb > out.columns)
        throw std::invalid_argument("chebfd_op: moment column range out of range");
    const cplx* u = U.data();
    cplx* w = W.data();
    cplx* x = X.data();
    auto chunks = fixed_row_chunks(H.n);
    std::vector<std::vector<cplx>> eta_part(chunks.size(), std::vector<cplx>(nb, cplx(0.0)));
    std::vector<std::vector<cplx>> mu_part(chunks.size(), std::vector<cplx>(nb, cplx(0.0)));
    parallel_for_chunks(chunks.size(), [&](std::size_t c) {
        std::vector<cplx> acc(nb);
        cplx* eta = eta_part[c].data();
        cplx* mu = mu_part[c].data();
        for (std::size_t i = chunks[c].begin; i < chunks[c].end; ++i) {
            for (std::size_t j = 0; j < nb; ++j) acc[j] = s.beta * u[i * nb + j];
            for (std::size_t k = H.row_ptr[i]; k < H.row_ptr[i + 1]; ++k) {
                cplx av = s.alpha * H.values[k];
                const cplx* ur = u + static_cast<std::size_t>(H.col_idx[k]) * nb;
                for (std::size_t j = 0; j < nb; ++j) acc[j] += av * ur[j];
            }
            for (std::size_t j = 0; j < nb; ++j) {
                cplx ui = u[i * nb + j];
                cplx w_new = 2.0 * acc[j] - w[i * nb + j];
                eta[j] += std::conj(w_new) * ui;
                mu[j] += std::conj(ui) * ui;
                x[i * nb + j] += gc * w_new;
                w[i * nb + j] = w_new;
            }
        }
    });
    detail::tree_reduce_partials(eta_part);
    detail::tree_reduce_partials(mu_part);
    for (std::size_t j = 0; j < nb; ++j) {
        out.eta_at(p, moment_col_offset + j) += eta_part[0][j];
        out.mu_at(p, moment_col_offset + j) += mu_part[0][j];
    }
    if (tc) {
        tc->matrix_sweeps += 1;
        tc->panel_reads += 3;   // U, W, X
        tc->panel_writes += 2;  // W, X
    }
}

// Unfused reference for chebfd_op: separate spmmv, dot, and axpy passes
// with the same contract. Serves as the oracle for the fused kernel.
inline void chebfd_op_reference(const SparseMatrixCRS& H, ShiftScale s, const SubblockView& U,
                                SubblockView W, SubblockView X, std::size_t p, double gc,
                                MomentSeries& out, std::size_t moment_col_offset = 0,
                                TrafficCounter* tc = nullptr) {
    detail::check_spmmv_shapes(H, U, W);
    if (X.width() != U.width() || X.rows() < H.n)
        throw std::invalid_argument("chebfd_op_reference: X shape mismatch");
    if (p < 3 || p > out.degree_max)
        throw std::invalid_argument("chebfd_op_reference: degree out of range");
    const std::size_t nb = U.width();

    spmmv_shifted_two_minus(H, s, U, W, W);  // W <- 2(aH+b)U - W

    const cplx* u = U.data();
    const cplx* w = W.data();
    cplx* x = X.data();
    auto chunks = fixed_row_chunks(H.n);
    std::vector<std::vector<cplx>> eta_part(chunks.size(), std::vector<cplx>(nb, cplx(0.0)));
    std::vector<std::vector<cplx>> mu_part(chunks.size(), std::vector<cplx>(nb, cplx(0.0)));
    parallel_for_chunks(chunks.size(), [&](std::size_t c) {
        for (std::size_t i = chunks[c].begin; i < chunks[c].end; ++i)
            for (std::size_t j = 0; j < nb; ++j) {
                eta_part[c][j] += std::conj(w[i * nb + j]) * u[i * nb + j];
                mu_part[c][j] += std::conj(u[i * nb + j]) * u[i * nb + j];
            }
    });
    detail::tree_reduce_partials(eta_part);
    detail::tree_reduce_partials(mu_part);
    for (std::size_t j = 0; j < nb; ++j) {
        out.eta_at(p, moment_col_offset + j) += eta_part[0][j];
        out.mu_at(p, moment_col_offset + j) += mu_part[0][j];
    }

    parallel_for_chunks(chunks.size(), [&](std::size_t c) {
        for (std::size_t i = chunks[c].begin * nb; i < chunks[c].end * nb; ++i) x[i] += gc * w[i];
    });

    if (tc) {
        tc->matrix_sweeps += 1;
        tc->panel_reads += 2 /* spmmv U, W */ + 2 /* dots W, U */ + 2 /* axpy X, W */;
        tc->panel_writes += 1 /* W */ + 1 /* X */;
    }
}

}  // namespace chebfilter
