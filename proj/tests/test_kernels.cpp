#include <catch2/catch_amalgamated.hpp>

#include "chebfilter/kernels.hpp"
#include "support/dense_eig.hpp"

using namespace chebfilter;

namespace {

// Dense triple-loop oracle for Y = 2^pow_two * (alpha A + beta 1) X - sub.
std::vector<cplx> dense_shifted_mult(const std::vector<cplx>& a, std::size_t n, ShiftScale s,
                                     const std::vector<cplx>& x, std::size_t nb) {
    std::vector<cplx> y(n * nb, cplx(0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < nb; ++j) {
            cplx acc = s.beta * x[i * nb + j];
            for (std::size_t k = 0; k < n; ++k) acc += s.alpha * a[i * n + k] * x[k * nb + j];
            y[i * nb + j] = acc;
        }
    return y;
}

double max_rel_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    REQUIRE(a.size() == b.size());
    double scale = 0.0;
    for (const cplx& z : a) scale = std::max(scale, std::abs(z));
    double diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i] - b[i]));
    return diff / std::max(scale, 1e-300);
}

}  // namespace

TEST_CASE("spmmv identity and scaling cases") {
    auto I = diagonal_matrix({1.0, 1.0, 1.0, 1.0});
    BlockVector X(4, 2, 2, InitSeededRandom{5});
    BlockVector Y(4, 2, 2);
    spmmv_shifted(I, {1.0, 0.0}, SubblockView(X, 0), SubblockView(Y, 0));
    CHECK(Y.panel(0) == X.panel(0));

    spmmv_shifted(I, {0.0, 2.5}, SubblockView(X, 0), SubblockView(Y, 0));
    for (std::size_t i = 0; i < X.panel(0).size(); ++i)
        CHECK(Y.panel(0)[i] == 2.5 * X.panel(0)[i]);
}

TEST_CASE("spmmv matches the dense oracle") {
    const std::size_t n = 6, nb = 3;
    auto a = testsupport::random_hermitian(n, 11);
    auto H = testsupport::to_sparse(a, n);
    ShiftScale s{0.7, -0.2};
    BlockVector X(n, nb, nb, InitSeededRandom{21});
    BlockVector Y(n, nb, nb);
    spmmv_shifted(H, s, SubblockView(X, 0), SubblockView(Y, 0));
    auto expect = dense_shifted_mult(a, n, s, X.panel(0), nb);
    CHECK(max_rel_diff(Y.panel(0), expect) < 1e-13);
}

TEST_CASE("spmmv rejects aliasing") {
    auto I = diagonal_matrix({1.0, 1.0});
    BlockVector X(2, 2, 2);
    CHECK_THROWS_AS(spmmv_shifted(I, {}, SubblockView(X, 0), SubblockView(X, 0)),
                    std::invalid_argument);
}

TEST_CASE("two_minus form supports in-place update") {
    const std::size_t n = 8, nb = 2;
    auto a = testsupport::random_hermitian(n, 3);
    auto H = testsupport::to_sparse(a, n);
    ShiftScale s{0.5, 0.1};
    BlockVector U(n, nb, nb, InitSeededRandom{31});
    BlockVector W(n, nb, nb, InitSeededRandom{32});
    auto w_old = W.panel(0);
    spmmv_shifted_two_minus(H, s, SubblockView(U, 0), SubblockView(W, 0), SubblockView(W, 0));
    auto prod = dense_shifted_mult(a, n, s, U.panel(0), nb);
    for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = 2.0 * prod[i] - w_old[i];
    CHECK(max_rel_diff(W.panel(0), prod) < 1e-13);
}

TEST_CASE("cheb_init on a diagonal matrix gives T1 and T2") {
    // Mapped value x~ = alpha*d + beta on the diagonal decouples rows:
    // U = x~ X0, W = (2 x~^2 - 1) X0.
    std::vector<double> d{0.3, -0.8, 0.5, 0.0};
    auto H = diagonal_matrix(d);
    ShiftScale s{0.9, 0.05};
    BlockVector X(4, 2, 2, InitSeededRandom{8});
    auto x0 = X.panel(0);
    BlockVector U(4, 2, 2), W(4, 2, 2);
    cheb_init(H, s, SubblockView(X, 0), SubblockView(U, 0), SubblockView(W, 0), 1.0, 0.0, 0.0);
    for (std::size_t i = 0; i < 4; ++i) {
        double xt = s.alpha * d[i] + s.beta;
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(std::abs(U(i, j) - xt * x0[i * 2 + j]) < 1e-14);
            CHECK(std::abs(W(i, j) - (2 * xt * xt - 1) * x0[i * 2 + j]) < 1e-14);
        }
    }
    // g0 c0 = 1 and higher terms zero: X unchanged.
    CHECK(X.panel(0) == x0);
}

TEST_CASE("cheb_init against a dense Chebyshev recurrence oracle") {
    const std::size_t n = 8, nb = 4;
    auto a = testsupport::random_hermitian(n, 17);
    for (std::size_t i = 0; i < n * n; ++i) a[i] *= 0.2;  // keep mapped spectrum inside [-1,1]
    auto H = testsupport::to_sparse(a, n);
    ShiftScale s{0.6, 0.02};
    double g0c0 = 0.4, g1c1 = -0.3, g2c2 = 0.25;

    BlockVector X(n, nb, nb, InitSeededRandom{77});
    auto x0 = X.panel(0);
    BlockVector U(n, nb, nb), W(n, nb, nb);
    cheb_init(H, s, SubblockView(X, 0), SubblockView(U, 0), SubblockView(W, 0), g0c0, g1c1, g2c2);

    // Dense oracle: T0 = X0, T1 = M X0, T2 = 2 M T1 - T0.
    auto t1 = dense_shifted_mult(a, n, s, x0, nb);
    auto t2 = dense_shifted_mult(a, n, s, t1, nb);
    std::vector<cplx> expect(n * nb);
    for (std::size_t i = 0; i < n * nb; ++i) {
        t2[i] = 2.0 * t2[i] - x0[i];
        expect[i] = g0c0 * x0[i] + g1c1 * t1[i] + g2c2 * t2[i];
    }
    CHECK(max_rel_diff(X.panel(0), expect) < 1e-13);
    CHECK(max_rel_diff(U.panel(0), t1) < 1e-13);
    CHECK(max_rel_diff(W.panel(0), t2) < 1e-13);
}

TEST_CASE("fused kernel matches the unfused reference") {
    for (std::size_t nb : {1, 2, 4, 8, 16}) {
        const std::size_t n = 50;
        auto a = testsupport::random_hermitian(n, 40 + nb);
        for (auto& z : a) z *= 0.1;
        auto H = testsupport::to_sparse(a, n);
        ShiftScale s{1.0, 0.0};
        const std::size_t np = 8;

        BlockVector Uf(n, nb, nb, InitSeededRandom{1}), Wf(n, nb, nb, InitSeededRandom{2}),
            Xf(n, nb, nb, InitSeededRandom{3});
        BlockVector Ur(n, nb, nb, InitSeededRandom{1}), Wr(n, nb, nb, InitSeededRandom{2}),
            Xr(n, nb, nb, InitSeededRandom{3});
        MomentSeries mf(np, nb), mr(np, nb);
        for (std::size_t p = 3; p <= np; ++p) {
            swap_blocks(SubblockView(Wf, 0), SubblockView(Uf, 0));
            swap_blocks(SubblockView(Wr, 0), SubblockView(Ur, 0));
            double gc = 0.3 / double(p);
            chebfd_op(H, s, SubblockView(Uf, 0), SubblockView(Wf, 0), SubblockView(Xf, 0), p, gc,
                      mf);
            chebfd_op_reference(H, s, SubblockView(Ur, 0), SubblockView(Wr, 0),
                                SubblockView(Xr, 0), p, gc, mr);
        }
        CHECK(max_rel_diff(Wf.panel(0), Wr.panel(0)) < 1e-13);
        CHECK(max_rel_diff(Xf.panel(0), Xr.panel(0)) < 1e-13);
        CHECK(max_rel_diff(mf.eta, mr.eta) < 1e-13);
        CHECK(max_rel_diff(mf.mu, mr.mu) < 1e-13);
    }
}

TEST_CASE("recurrence on a diagonal matrix reproduces T_P pointwise") {
    // Unit-vector columns on a diagonal matrix decouple into scalars.
    std::vector<double> d{0.9, -0.4, 0.1, 0.7};
    auto H = diagonal_matrix(d);
    ShiftScale s{1.0, 0.0};
    const std::size_t n = 4, nb = 4, np = 12;
    BlockVector X(n, nb, nb), U(n, nb, nb), W(n, nb, nb);
    for (std::size_t j = 0; j < nb; ++j) X(j, j) = 1.0;
    auto x0 = X.panel(0);
    cheb_init(H, s, SubblockView(X, 0), SubblockView(U, 0), SubblockView(W, 0), 1.0, 0.0, 0.0);
    MomentSeries mom(np, nb);
    for (std::size_t p = 3; p <= np; ++p) {
        swap_blocks(SubblockView(W, 0), SubblockView(U, 0));
        chebfd_op(H, s, SubblockView(U, 0), SubblockView(W, 0), SubblockView(X, 0), p, 0.0, mom);
    }
    // W column j equals T_np(d_j) * X0 column j.
    for (std::size_t i = 0; i < n; ++i) {
        double t = std::cos(np * std::acos(d[i]));
        for (std::size_t j = 0; j < nb; ++j)
            CHECK(std::abs(W(i, j) - t * x0[i * nb + j]) < 1e-11);
    }
}

TEST_CASE("moments at the fixed point x~ = 1") {
    // With the whole mapped spectrum at 1, T_p(1) = 1 for all p, so
    // mu_p[j] = ||column j||^2 and eta_p[j] = mu_p[j].
    const std::size_t n = 5, nb = 2, np = 7;
    auto H = diagonal_matrix({1.0, 1.0, 1.0, 1.0, 1.0});
    ShiftScale s{1.0, 0.0};
    BlockVector X(n, nb, nb, InitSeededRandom{55});
    auto x0 = X.panel(0);
    std::vector<double> norms(nb, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < nb; ++j) norms[j] += std::norm(x0[i * nb + j]);

    BlockVector U(n, nb, nb), W(n, nb, nb);
    cheb_init(H, s, SubblockView(X, 0), SubblockView(U, 0), SubblockView(W, 0), 1.0, 0.0, 0.0);
    MomentSeries mom(np, nb);
    for (std::size_t p = 3; p <= np; ++p) {
        swap_blocks(SubblockView(W, 0), SubblockView(U, 0));
        chebfd_op(H, s, SubblockView(U, 0), SubblockView(W, 0), SubblockView(X, 0), p, 0.0, mom);
    }
    for (std::size_t p = 3; p <= np; ++p)
        for (std::size_t j = 0; j < nb; ++j) {
            CHECK(std::abs(mom.mu_at(p, j) - norms[j]) < 1e-12 * norms[j]);
            CHECK(std::abs(mom.eta_at(p, j) - mom.mu_at(p, j)) < 1e-12 * norms[j]);
        }
}

TEST_CASE("mu is real and nonnegative") {
    const std::size_t n = 30, nb = 4, np = 10;
    auto a = testsupport::random_hermitian(n, 9);
    for (auto& z : a) z *= 0.15;
    auto H = testsupport::to_sparse(a, n);
    BlockVector X(n, nb, nb, InitSeededRandom{66}), U(n, nb, nb), W(n, nb, nb);
    cheb_init(H, {1.0, 0.0}, SubblockView(X, 0), SubblockView(U, 0), SubblockView(W, 0), 1.0, 0.1,
              0.1);
    MomentSeries mom(np, nb);
    for (std::size_t p = 3; p <= np; ++p) {
        swap_blocks(SubblockView(W, 0), SubblockView(U, 0));
        chebfd_op(H, {1.0, 0.0}, SubblockView(U, 0), SubblockView(W, 0), SubblockView(X, 0), p, 0.1,
                  mom);
    }
    for (const cplx& m : mom.mu) {
        CHECK(m.real() >= 0.0);
        CHECK(std::abs(m.imag()) <= 1e-12 * std::max(std::abs(m), 1e-30));
    }
}

TEST_CASE("moments are bit-identical across reruns and thread counts") {
    const std::size_t n = 64, nb = 4, np = 9;
    auto a = testsupport::random_hermitian(n, 14);
    for (auto& z : a) z *= 0.1;
    auto H = testsupport::to_sparse(a, n);

    auto run = [&]() {
        BlockVector X(n, nb, nb, InitSeededRandom{4}), U(n, nb, nb), W(n, nb, nb);
        cheb_init(H, {1.0, 0.0}, SubblockView(X, 0), SubblockView(U, 0), SubblockView(W, 0), 0.5,
                  0.2, 0.1);
        MomentSeries mom(np, nb);
        for (std::size_t p = 3; p <= np; ++p) {
            swap_blocks(SubblockView(W, 0), SubblockView(U, 0));
            chebfd_op(H, {1.0, 0.0}, SubblockView(U, 0), SubblockView(W, 0), SubblockView(X, 0), p,
                      0.05, mom);
        }
        return mom;
    };

    setenv("CHEBFILTER_THREADS", "1", 1);
    auto m1 = run();
    setenv("CHEBFILTER_THREADS", "4", 1);
    auto m4 = run();
    auto m4b = run();
    unsetenv("CHEBFILTER_THREADS");
    CHECK(m4.eta == m4b.eta);
    CHECK(m4.mu == m4b.mu);
    // The fixed chunked reduction makes even different thread counts agree
    // bit for bit.
    CHECK(m1.eta == m4.eta);
    CHECK(m1.mu == m4.mu);
}

TEST_CASE("traffic counters match the minimum-traffic contract") {
    const std::size_t n = 20, nb = 2, np = 6;
    auto a = testsupport::random_hermitian(n, 2);
    auto H = testsupport::to_sparse(a, n);
    BlockVector X(n, nb, nb, InitSeededRandom{12}), U(n, nb, nb), W(n, nb, nb);
    TrafficCounter tc;
    cheb_init(H, {0.1, 0.0}, SubblockView(X, 0), SubblockView(U, 0), SubblockView(W, 0), 1, 0, 0,
              &tc);
    tc = {};
    for (std::size_t p = 3; p <= np; ++p) {
        MomentSeries mom(np, nb);
        TrafficCounter step;
        swap_blocks(SubblockView(W, 0), SubblockView(U, 0));
        chebfd_op(H, {0.1, 0.0}, SubblockView(U, 0), SubblockView(W, 0), SubblockView(X, 0), p, 0.0,
                  mom, 0, &step);
        CHECK(step.panel_reads == 3);
        CHECK(step.panel_writes == 2);
        CHECK(step.matrix_sweeps == 1);
    }

    // The unfused reference moves more panel traffic.
    MomentSeries mom(np, nb);
    TrafficCounter ref;
    swap_blocks(SubblockView(W, 0), SubblockView(U, 0));
    chebfd_op_reference(H, {0.1, 0.0}, SubblockView(U, 0), SubblockView(W, 0), SubblockView(X, 0),
                        3, 0.0, mom, 0, &ref);
    CHECK(ref.panel_reads > 3);
    CHECK(ref.panel_writes >= 2);
}
