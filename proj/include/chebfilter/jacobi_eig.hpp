#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace chebfilter {

using cplx = std::complex<double>;

// Dense Hermitian k x k matrix, row-major.
struct HermitianDense {
    std::size_t k = 0;
    std::vector<cplx> a;  // k*k

    HermitianDense() = default;
    explicit HermitianDense(std::size_t dim) : k(dim), a(dim * dim, cplx(0.0)) {}
    cplx& at(std::size_t i, std::size_t j) { return a[i * k + j]; }
    const cplx& at(std::size_t i, std::size_t j) const { return a[i * k + j]; }
};

struct EigenDecomposition {
    std::vector<double> values;  // ascending
    std::vector<cplx> vectors;   // k*k row-major, column j is eigenvector j
};

// Cyclic two-sided Jacobi for complex Hermitian matrices. Sweeps until the
// off-diagonal Frobenius norm drops below tol relative to the matrix norm.
inline EigenDecomposition jacobi_hermitian_eig(HermitianDense A, double tol = 1e-12,
                                               std::size_t max_sweeps = 64) {
    const std::size_t k = A.k;
    std::vector<cplx> V(k * k, cplx(0.0));
    for (std::size_t i = 0; i < k; ++i) V[i * k + i] = 1.0;

    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = i + 1; j < k; ++j) s += std::norm(A.at(i, j));
        return std::sqrt(2.0 * s);
    };
    double full = 0.0;
    for (const cplx& z : A.a) full += std::norm(z);
    full = std::sqrt(full);
    double thresh = tol * std::max(full, 1.0);

    for (std::size_t sweep = 0; sweep < max_sweeps && off_norm() > thresh; ++sweep) {
        for (std::size_t p = 0; p < k; ++p)
            for (std::size_t q = p + 1; q < k; ++q) {
                cplx apq = A.at(p, q);
                double mag = std::abs(apq);
                if (mag == 0.0) continue;
                cplx phase = apq / mag;  // apq = mag * phase
                double app = A.at(p, p).real();
                double aqq = A.at(q, q).real();
                double tau = (aqq - app) / (2.0 * mag);
                double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double sr = t * c;
                cplx s = sr * phase;  // rotation: col_p' = c*col_p - conj(s)*col_q, etc.

                // A <- J^H A J with J acting on columns p, q:
                // J[p][p]=c, J[p][q]=s, J[q][p]=-conj(s), J[q][q]=c
                for (std::size_t i = 0; i < k; ++i) {
                    cplx aip = A.at(i, p), aiq = A.at(i, q);
                    A.at(i, p) = c * aip - std::conj(s) * aiq;
                    A.at(i, q) = s * aip + c * aiq;
                }
                for (std::size_t j = 0; j < k; ++j) {
                    cplx apj = A.at(p, j), aqj = A.at(q, j);
                    A.at(p, j) = c * apj - s * aqj;
                    A.at(q, j) = std::conj(s) * apj + c * aqj;
                }
                A.at(p, q) = 0.0;
                A.at(q, p) = 0.0;
                for (std::size_t i = 0; i < k; ++i) {
                    cplx vip = V[i * k + p], viq = V[i * k + q];
                    V[i * k + p] = c * vip - std::conj(s) * viq;
                    V[i * k + q] = s * vip + c * viq;
                }
            }
    }

    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return A.at(i, i).real() < A.at(j, j).real(); });
    EigenDecomposition out;
    out.values.resize(k);
    out.vectors.resize(k * k);
    for (std::size_t jj = 0; jj < k; ++jj) {
        out.values[jj] = A.at(order[jj], order[jj]).real();
        for (std::size_t i = 0; i < k; ++i) out.vectors[i * k + jj] = V[i * k + order[jj]];
    }
    return out;
}

}  // namespace chebfilter
