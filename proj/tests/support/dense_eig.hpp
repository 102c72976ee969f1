#pragma once

// Test-only dense Hermitian eigenvalue oracle, independent of the library's
// solvers: the complex Hermitian n x n matrix is embedded as the real
// symmetric 2n x 2n matrix [[Re, -Im], [Im, Re]], whose spectrum is the
// original one with every eigenvalue doubled. A plain real symmetric Jacobi
// iteration then delivers the eigenvalues.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "chebfilter/sparse_matrix.hpp"

namespace testsupport {

using chebfilter::cplx;

// Eigenvalues (ascending) of a dense Hermitian matrix given row-major.
inline std::vector<double> dense_hermitian_eigenvalues(const std::vector<cplx>& a, std::size_t n) {
    const std::size_t m = 2 * n;
    std::vector<double> s(m * m, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            s[i * m + j] = a[i * n + j].real();
            s[(n + i) * m + (n + j)] = a[i * n + j].real();
            s[i * m + (n + j)] = -a[i * n + j].imag();
            s[(n + i) * m + j] = a[i * n + j].imag();
        }

    auto off = [&] {
        double sum = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j) sum += s[i * m + j] * s[i * m + j];
        return std::sqrt(sum);
    };
    double scale = 0.0;
    for (double v : s) scale += v * v;
    scale = std::sqrt(scale);
    double thresh = 1e-13 * std::max(scale, 1.0);

    for (int sweep = 0; sweep < 100 && off() > thresh; ++sweep)
        for (std::size_t p = 0; p < m; ++p)
            for (std::size_t q = p + 1; q < m; ++q) {
                double apq = s[p * m + q];
                if (apq == 0.0) continue;
                double tau = (s[q * m + q] - s[p * m + p]) / (2.0 * apq);
                double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double sn = t * c;
                for (std::size_t i = 0; i < m; ++i) {
                    double sip = s[i * m + p], siq = s[i * m + q];
                    s[i * m + p] = c * sip - sn * siq;
                    s[i * m + q] = sn * sip + c * siq;
                }
                for (std::size_t j = 0; j < m; ++j) {
                    double spj = s[p * m + j], sqj = s[q * m + j];
                    s[p * m + j] = c * spj - sn * sqj;
                    s[q * m + j] = sn * spj + c * sqj;
                }
            }

    std::vector<double> diag(m);
    for (std::size_t i = 0; i < m; ++i) diag[i] = s[i * m + i];
    std::sort(diag.begin(), diag.end());
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = 0.5 * (diag[2 * i] + diag[2 * i + 1]);
    return out;
}

inline std::vector<cplx> to_dense(const chebfilter::SparseMatrixCRS& H) {
    std::vector<cplx> a(H.n * H.n, cplx(0.0));
    for (std::size_t i = 0; i < H.n; ++i)
        for (std::size_t k = H.row_ptr[i]; k < H.row_ptr[i + 1]; ++k)
            a[i * H.n + static_cast<std::size_t>(H.col_idx[k])] = H.values[k];
    return a;
}

inline std::vector<double> dense_eigenvalues(const chebfilter::SparseMatrixCRS& H) {
    return dense_hermitian_eigenvalues(to_dense(H), H.n);
}

// Deterministic random dense Hermitian matrix (also used to build random
// sparse test instances).
inline std::vector<cplx> random_hermitian(std::size_t n, std::uint64_t seed) {
    std::vector<cplx> a(n * n);
    auto u = [&](std::uint64_t k) {
        std::uint64_t x = seed * 0x9e3779b97f4a7c15ULL + k * 0xd1342543de82ef95ULL;
        x ^= x >> 29;
        x *= 0xbf58476d1ce4e5b9ULL;
        x ^= x >> 32;
        return static_cast<double>(x >> 11) * 0x1.0p-53 - 0.5;
    };
    for (std::size_t i = 0; i < n; ++i) {
        a[i * n + i] = cplx(2.0 * u(i * n + i), 0.0);
        for (std::size_t j = i + 1; j < n; ++j) {
            cplx v(u(i * n + j), u(j * n + i + 7));
            a[i * n + j] = v;
            a[j * n + i] = std::conj(v);
        }
    }
    return a;
}

inline chebfilter::SparseMatrixCRS to_sparse(const std::vector<cplx>& a, std::size_t n) {
    std::vector<chebfilter::Triplet> trips;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (a[i * n + j] != cplx(0.0)) trips.push_back({i, j, a[i * n + j]});
    return chebfilter::build_from_triplets(n, trips);
}

}  // namespace testsupport
