#pragma once

#include <cmath>
#include <optional>

#include "jacobi_eig.hpp"
#include "kernels.hpp"

namespace chebfilter {

enum class Damping { jackson, none };

// Chebyshev window coefficients c_p with damping factors g_p, together
// with the spectral map and the search window in the original spectrum.
struct FilterCoefficients {
    std::size_t np = 0;
    std::vector<double> c;  // c_0 .. c_np
    std::vector<double> g;  // g_0 .. g_np, g_0 = 1, |g_p| <= 1
    double window_lo = 0.0, window_hi = 0.0;
    ShiftScale map;
};

// Maps [lambda_min, lambda_max] (stretched by 1+margin) into [-1, 1]:
// alpha = 2 / ((max-min)(1+margin)), beta = -alpha (max+min)/2.
inline ShiftScale spectral_map(double lambda_min, double lambda_max, double margin = 0.0) {
    if (!(lambda_max > lambda_min)) throw std::invalid_argument("degenerate spectral interval");
    if (margin < 0.0) throw std::invalid_argument("margin must be >= 0");
    ShiftScale s;
    s.alpha = 2.0 / ((lambda_max - lambda_min) * (1.0 + margin));
    s.beta = -s.alpha * (lambda_max + lambda_min) / 2.0;
    return s;
}

// Window coefficients for the indicator of [window_lo, window_hi] mapped
// through `map`:
//   c_0 = (theta_a - theta_b)/pi,  c_p = 2/(pi p) (sin(p theta_a) - sin(p theta_b))
// with theta = arccos of the mapped endpoints. Jackson damping suppresses
// the Gibbs oscillations of the truncated series.
inline FilterCoefficients filter_coefficients(double window_lo, double window_hi, ShiftScale map,
                                              std::size_t np, Damping damping = Damping::jackson) {
    if (np < 2) throw std::invalid_argument("polynomial degree must be >= 2");
    double a = map.alpha * window_lo + map.beta;
    double b = map.alpha * window_hi + map.beta;
    if (!(a < b) || a <= -1.0 || b >= 1.0)
        throw std::invalid_argument("window must map strictly inside (-1, 1)");
    FilterCoefficients fc;
    fc.np = np;
    fc.window_lo = window_lo;
    fc.window_hi = window_hi;
    fc.map = map;
    const double pi = 3.14159265358979323846;
    double ta = std::acos(a), tb = std::acos(b);
    fc.c.resize(np + 1);
    fc.g.resize(np + 1);
    fc.c[0] = (ta - tb) / pi;
    for (std::size_t p = 1; p <= np; ++p)
        fc.c[p] = 2.0 / (pi * static_cast<double>(p)) *
                  (std::sin(p * ta) - std::sin(p * tb));
    fc.g[0] = 1.0;
    if (damping == Damping::jackson) {
        double q = pi / static_cast<double>(np + 1);
        double cot_q = std::cos(q) / std::sin(q);
        for (std::size_t p = 1; p <= np; ++p)
            fc.g[p] = ((np - p + 1) * std::cos(p * q) + std::sin(p * q) * cot_q) /
                      static_cast<double>(np + 1);
    } else {
        for (std::size_t p = 1; p <= np; ++p) fc.g[p] = 1.0;
    }
    return fc;
}

// Blocked filter application: panel-by-panel, the full-degree polynomial
// sum_p g_p c_p T_p(alpha H + beta) is applied in place to X using two
// scratch panels of width n_b (never n_s). Moments are recorded for every
// panel and degree.
inline MomentSeries apply_filter(const SparseMatrixCRS& H, BlockVector& X,
                                 const FilterCoefficients& fc, TrafficCounter* tc = nullptr) {
    if (X.rows() != H.n) throw std::invalid_argument("apply_filter: row count mismatch");
    if (fc.np < 2) throw std::invalid_argument("apply_filter: coefficients cover degrees < 2");
    const std::size_t nb = X.block_width();
    MomentSeries moments(fc.np, X.cols());
    for (std::size_t b = 0; b < X.panel_count(); ++b) {
        BlockVector U(H.n, nb, nb), W(H.n, nb, nb);
        SubblockView Xb(X, b), Ub(U, 0), Wb(W, 0);
        cheb_init(H, fc.map, Xb, Ub, Wb, fc.g[0] * fc.c[0], fc.g[1] * fc.c[1], fc.g[2] * fc.c[2],
                  tc);
        for (std::size_t p = 3; p <= fc.np; ++p) {
            swap_blocks(Wb, Ub);
            chebfd_op(H, fc.map, Ub, Wb, Xb, p, fc.g[p] * fc.c[p], moments, b * nb, tc);
        }
    }
    return moments;
}

namespace detail {

// Gram matrix S = X^H X over the first `cols` columns.
inline HermitianDense gram_matrix(const BlockVector& X, std::size_t cols) {
    HermitianDense S(cols);
    for (std::size_t j = 0; j < cols; ++j)
        for (std::size_t l = j; l < cols; ++l) {
            cplx acc(0.0);
            for (std::size_t i = 0; i < X.rows(); ++i) acc += std::conj(X(i, j)) * X(i, l);
            S.at(j, l) = acc;
            S.at(l, j) = std::conj(acc);
        }
    return S;
}

inline double max_gram_defect(const BlockVector& Q) {
    HermitianDense G = gram_matrix(Q, Q.cols());
    double defect = 0.0;
    for (std::size_t i = 0; i < G.k; ++i)
        for (std::size_t j = 0; j < G.k; ++j) {
            cplx expect = (i == j) ? cplx(1.0) : cplx(0.0);
            defect = std::max(defect, std::abs(G.at(i, j) - expect));
        }
    return defect;
}

inline BlockVector svqb_pass(const BlockVector& X, double drop_tol, std::size_t& rank) {
    HermitianDense S = gram_matrix(X, X.cols());
    EigenDecomposition eig = jacobi_hermitian_eig(S);
    double lmax = eig.values.empty() ? 0.0 : eig.values.back();
    if (!(lmax > 0.0)) throw std::runtime_error("svqb: all columns numerically zero");
    std::vector<std::size_t> keep;
    for (std::size_t j = 0; j < eig.values.size(); ++j)
        if (eig.values[j] > drop_tol * lmax) keep.push_back(j);
    rank = keep.size();
    if (rank == 0) throw std::runtime_error("svqb: empty basis after dropping");
    BlockVector Q(X.rows(), rank, rank);
    const std::size_t k = S.k;
    for (std::size_t r = 0; r < rank; ++r) {
        double inv_sqrt = 1.0 / std::sqrt(eig.values[keep[r]]);
        for (std::size_t i = 0; i < X.rows(); ++i) {
            cplx acc(0.0);
            for (std::size_t j = 0; j < k; ++j) acc += X(i, j) * eig.vectors[j * k + keep[r]];
            Q(i, r) = acc * inv_sqrt;
        }
    }
    return Q;
}

}  // namespace detail

// SVQB: eigendecompose the Gram matrix, drop directions below
// drop_tol * max eigenvalue, rescale. Extra passes are run while the
// orthogonality defect exceeds 1e-10; badly conditioned inputs (such as
// blocks filtered onto a degenerate cluster) may need more than one.
inline std::pair<BlockVector, std::size_t> orthogonalize_svqb(const BlockVector& X,
                                                              double drop_tol = 1e-12) {
    std::size_t rank = 0;
    BlockVector Q = detail::svqb_pass(X, drop_tol, rank);
    for (int pass = 0; pass < 3 && detail::max_gram_defect(Q) > 1e-10; ++pass) {
        std::size_t rank2 = 0;
        Q = detail::svqb_pass(Q, drop_tol, rank2);
        rank = rank2;
    }
    return {std::move(Q), rank};
}

struct RayleighRitzResult {
    std::vector<double> theta;   // ascending
    BlockVector basis;           // rotated basis Y = Q V, one panel
    std::vector<double> residuals;  // ||H y_j - theta_j y_j|| / ||y_j||
};

// Projects H onto the orthonormal basis Q and solves the small dense
// Hermitian eigenproblem with cyclic Jacobi rotations.
inline RayleighRitzResult rayleigh_ritz(const SparseMatrixCRS& H, const BlockVector& Q) {
    if (Q.rows() != H.n) throw std::invalid_argument("rayleigh_ritz: row count mismatch");
    if (detail::max_gram_defect(Q) > 1e-8)
        throw std::invalid_argument("rayleigh_ritz: basis not orthonormal");
    const std::size_t k = Q.cols();
    if (Q.block_width() != k) throw std::invalid_argument("rayleigh_ritz: expects a single panel");

    BlockVector HQ(H.n, k, k);
    spmmv_shifted(H, ShiftScale{1.0, 0.0}, SubblockView(const_cast<BlockVector&>(Q), 0),
                  SubblockView(HQ, 0));
    HermitianDense S(k);
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t l = j; l < k; ++l) {
            cplx acc(0.0);
            for (std::size_t i = 0; i < H.n; ++i) acc += std::conj(Q(i, j)) * HQ(i, l);
            S.at(j, l) = acc;
            S.at(l, j) = std::conj(acc);
        }
    EigenDecomposition eig = jacobi_hermitian_eig(S);

    RayleighRitzResult rr;
    rr.theta = eig.values;
    rr.basis = BlockVector(H.n, k, k);
    for (std::size_t i = 0; i < H.n; ++i)
        for (std::size_t r = 0; r < k; ++r) {
            cplx acc(0.0);
            for (std::size_t j = 0; j < k; ++j) acc += Q(i, j) * eig.vectors[j * k + r];
            rr.basis(i, r) = acc;
        }
    BlockVector HY(H.n, k, k);
    spmmv_shifted(H, ShiftScale{1.0, 0.0}, SubblockView(rr.basis, 0), SubblockView(HY, 0));
    rr.residuals.resize(k);
    for (std::size_t r = 0; r < k; ++r) {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < H.n; ++i) {
            num += std::norm(HY(i, r) - rr.theta[r] * rr.basis(i, r));
            den += std::norm(rr.basis(i, r));
        }
        rr.residuals[r] = std::sqrt(num) / std::sqrt(den);
    }
    return rr;
}

struct RitzPair {
    double value = 0.0;
    double residual = 0.0;
    bool inside_window = false;
    bool converged = false;
};

struct SolveResult {
    std::vector<double> eigenvalues;  // converged, in-window, ascending
    std::vector<double> residuals;    // matching eigenvalues
    BlockVector eigenvectors;         // matching columns (empty if none)
    std::vector<RitzPair> all_pairs;  // last Rayleigh-Ritz extraction
    std::vector<MomentSeries> moments;  // one series per restart
    std::size_t iterations = 0;
    bool converged = false;
};

struct SolveOptions {
    std::size_t n_s = 32;
    std::size_t n_b = 8;
    std::size_t n_p = 500;
    std::size_t max_restarts = 20;
    double res_tol = 1e-9;
    double margin = 0.01;
    std::uint64_t seed = 42;
    Damping damping = Damping::jackson;
    std::optional<std::pair<double, double>> spectral_bounds;  // default: Gershgorin
    double drop_tol = 1e-12;
};

// Restarted filter loop: apply_filter -> SVQB -> Rayleigh-Ritz until every
// Ritz value strictly inside the window has residual <= res_tol. A window
// that stays empty for two consecutive restarts yields zero pairs without
// error. Non-convergence is reported through the result, not an exception.
inline SolveResult chebfd_solve(const SparseMatrixCRS& H, double window_lo, double window_hi,
                                const SolveOptions& opt = {}) {
    auto bounds = opt.spectral_bounds ? *opt.spectral_bounds : gershgorin_bounds(H);
    if (window_lo < bounds.first || window_hi > bounds.second)
        throw std::invalid_argument("search window outside spectral bounds");
    ShiftScale map = spectral_map(bounds.first, bounds.second, opt.margin);
    FilterCoefficients fc = filter_coefficients(window_lo, window_hi, map, opt.n_p, opt.damping);

    SolveResult result;
    BlockVector X(H.n, opt.n_s, opt.n_b, InitSeededRandom{opt.seed});
    std::size_t empty_streak = 0;

    for (std::size_t restart = 1; restart <= opt.max_restarts; ++restart) {
        result.iterations = restart;
        result.moments.push_back(apply_filter(H, X, fc));
        auto [Q, rank] = orthogonalize_svqb(X, opt.drop_tol);
        RayleighRitzResult rr = rayleigh_ritz(H, Q);

        result.all_pairs.clear();
        std::size_t inside = 0, converged_inside = 0;
        for (std::size_t r = 0; r < rr.theta.size(); ++r) {
            RitzPair pair;
            pair.value = rr.theta[r];
            pair.residual = rr.residuals[r];
            pair.inside_window = rr.theta[r] > window_lo && rr.theta[r] < window_hi;
            pair.converged = pair.inside_window && pair.residual <= opt.res_tol;
            result.all_pairs.push_back(pair);
            inside += pair.inside_window;
            converged_inside += pair.converged;
        }

        bool done = inside > 0 && converged_inside == inside;
        if (inside == 0 && ++empty_streak >= 2) {
            result.converged = true;  // window verified empty
            return result;
        }
        if (inside > 0) empty_streak = 0;

        if (done) {
            result.converged = true;
            std::vector<std::size_t> sel;
            for (std::size_t r = 0; r < result.all_pairs.size(); ++r)
                if (result.all_pairs[r].converged) sel.push_back(r);
            result.eigenvalues.reserve(sel.size());
            result.residuals.reserve(sel.size());
            result.eigenvectors = BlockVector(H.n, sel.size(), sel.size());
            for (std::size_t c = 0; c < sel.size(); ++c) {
                result.eigenvalues.push_back(result.all_pairs[sel[c]].value);
                result.residuals.push_back(result.all_pairs[sel[c]].residual);
                for (std::size_t i = 0; i < H.n; ++i)
                    result.eigenvectors(i, c) = rr.basis(i, sel[c]);
            }
            return result;
        }

        // Restart basis: rotated Ritz basis, topped up with fresh random
        // columns if SVQB dropped directions.
        X = BlockVector(H.n, opt.n_s, opt.n_b);
        for (std::size_t j = 0; j < opt.n_s; ++j)
            for (std::size_t i = 0; i < H.n; ++i)
                X(i, j) = (j < rank)
                              ? rr.basis(i, j)
                              : rng::unit_complex_gaussian(opt.seed + restart, i, j);
    }

    // Out of restarts: report the best available pairs without raising.
    result.converged = false;
    for (const RitzPair& pair : result.all_pairs)
        if (pair.converged) {
            result.eigenvalues.push_back(pair.value);
            result.residuals.push_back(pair.residual);
        }
    return result;
}

}  // namespace chebfilter
