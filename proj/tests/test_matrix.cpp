#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "chebfilter/matrix_market.hpp"
#include "chebfilter/partition.hpp"
#include "chebfilter/sparse_matrix.hpp"
#include "support/dense_eig.hpp"

using namespace chebfilter;

TEST_CASE("topi dimensions and nonzero structure") {
    LatticeSpec spec;
    spec.nx = 2;
    spec.ny = 2;
    spec.nz = 2;
    auto H = topi_generate(spec);
    CHECK(H.n == 32);

    // Paper-scale instance checked on the formula only (not generated).
    LatticeSpec big;
    big.nx = 128;
    big.ny = 64;
    big.nz = 64;
    CHECK(big.dim() == 2097152);

    spec.nx = spec.ny = spec.nz = 4;
    H = topi_generate(spec);
    CHECK(H.n == 256);
    for (std::size_t i = 0; i < H.n; ++i)
        CHECK(H.row_ptr[i + 1] - H.row_ptr[i] == 13);
    CHECK(H.avg_nnz_per_row() == Catch::Approx(13.0));
}

TEST_CASE("topi is exactly hermitian") {
    LatticeSpec spec;
    spec.nx = spec.ny = spec.nz = 4;
    CHECK(hermiticity_defect(topi_generate(spec)) == 0.0);

    spec.nx = 2;
    spec.ny = 3;
    spec.nz = 1;
    spec.mass = 0.7;
    spec.hop = -1.3;
    CHECK(hermiticity_defect(topi_generate(spec)) == 0.0);

    spec.boundary = Boundary::open;
    CHECK(hermiticity_defect(topi_generate(spec)) == 0.0);
}

TEST_CASE("topi rejects bad extents") {
    LatticeSpec spec;
    spec.nx = 0;
    CHECK_THROWS_AS(topi_generate(spec), std::invalid_argument);
}

TEST_CASE("gershgorin bounds") {
    auto D = diagonal_matrix({1.0, 2.0, 3.0});
    auto [lo, hi] = gershgorin_bounds(D);
    CHECK(lo == Catch::Approx(1.0));
    CHECK(hi == Catch::Approx(3.0));

    auto one = diagonal_matrix({5.0});
    auto b1 = gershgorin_bounds(one);
    CHECK(b1.first == Catch::Approx(5.0));
    CHECK(b1.second == Catch::Approx(5.0));

    SparseMatrixCRS G = diagonal_matrix({1.0});
    G.symmetry = Symmetry::general;
    CHECK_THROWS_AS(gershgorin_bounds(G), std::invalid_argument);
}

TEST_CASE("gershgorin interval contains the topi spectrum") {
    LatticeSpec spec;
    spec.nx = spec.ny = spec.nz = 4;
    auto H = topi_generate(spec);
    auto [lo, hi] = gershgorin_bounds(H);
    auto eigs = testsupport::dense_eigenvalues(H);
    CHECK(eigs.front() >= lo - 1e-10);
    CHECK(eigs.back() <= hi + 1e-10);
}

TEST_CASE("matrix market round trip") {
    LatticeSpec spec;
    spec.nx = spec.ny = spec.nz = 2;
    auto H = topi_generate(spec);
    auto path = std::filesystem::temp_directory_path() / "cheb_test_roundtrip.mtx";
    matrix_market_write(path.string(), H);
    auto H2 = matrix_market_read(path.string());
    REQUIRE(H2.n == H.n);
    CHECK(H2.row_ptr == H.row_ptr);
    CHECK(H2.col_idx == H.col_idx);
    CHECK(H2.values == H.values);
    std::filesystem::remove(path);
}

TEST_CASE("matrix market reports the offending line") {
    auto path = std::filesystem::temp_directory_path() / "cheb_test_bad.mtx";
    {
        std::ofstream out(path);
        out << "%%MatrixMarket matrix coordinate complex general\n";
        out << "3 3 2\n";
        out << "1 1 1.0 0.0\n";
        out << "4 1 1.0 0.0\n";
    }
    try {
        matrix_market_read(path.string());
        FAIL("expected parse error");
    } catch (const MatrixMarketError& e) {
        CHECK(e.line_number == 4);
    }
    std::filesystem::remove(path);
}

TEST_CASE("hermitian lower-triangle file expands correctly") {
    auto path = std::filesystem::temp_directory_path() / "cheb_test_herm.mtx";
    {
        std::ofstream out(path);
        out << "%%MatrixMarket matrix coordinate complex hermitian\n";
        out << "2 2 3\n";
        out << "1 1 2.0 0.0\n";
        out << "2 1 1.0 -0.5\n";
        out << "2 2 3.0 0.0\n";
    }
    auto H = matrix_market_read(path.string());
    auto expected = build_from_triplets(
        2, {{0, 0, {2.0, 0.0}}, {1, 0, {1.0, -0.5}}, {0, 1, {1.0, 0.5}}, {1, 1, {3.0, 0.0}}});
    CHECK(H.row_ptr == expected.row_ptr);
    CHECK(H.col_idx == expected.col_idx);
    CHECK(H.values == expected.values);
    std::filesystem::remove(path);
}

TEST_CASE("single worker partition is trivial") {
    LatticeSpec spec;
    spec.nx = spec.ny = spec.nz = 2;
    auto H = topi_generate(spec);
    auto plan = partition_rows(H, 1);
    REQUIRE(plan.row_ranges.size() == 1);
    CHECK(plan.row_ranges[0] == std::make_pair(std::size_t{0}, H.n));
    CHECK(plan.halo_in[0].empty());
}

TEST_CASE("two-worker partition of topi(4,4,4)") {
    LatticeSpec spec;
    spec.nx = spec.ny = spec.nz = 4;
    auto H = topi_generate(spec);
    auto plan = partition_rows(H, 2);

    std::size_t total = 0;
    for (auto [lo, hi] : plan.row_ranges) total += hi - lo;
    CHECK(total == H.n);
    CHECK(plan.row_ranges[0].second == plan.row_ranges[1].first);

    // Contiguous split of the z-ordered lattice: each worker needs the two
    // boundary planes of the other, 2 * 4 * Nx * Ny rows.
    for (std::size_t w = 0; w < 2; ++w) {
        std::size_t halo = 0;
        for (const auto& [nbr, rows] : plan.halo_in[w]) halo += rows.size();
        CHECK(halo == 2 * 4 * spec.nx * spec.ny);
    }

    // Halo lists are exactly the off-range columns of each worker's rows.
    for (std::size_t w = 0; w < 2; ++w) {
        auto [lo, hi] = plan.row_ranges[w];
        std::set<std::size_t> expected;
        for (std::size_t i = lo; i < hi; ++i)
            for (std::size_t k = H.row_ptr[i]; k < H.row_ptr[i + 1]; ++k) {
                std::size_t c = static_cast<std::size_t>(H.col_idx[k]);
                if (c < lo || c >= hi) expected.insert(c);
            }
        std::set<std::size_t> actual;
        for (const auto& [nbr, rows] : plan.halo_in[w]) actual.insert(rows.begin(), rows.end());
        CHECK(actual == expected);
    }
}

TEST_CASE("halo_out mirrors halo_in across workers") {
    LatticeSpec spec;
    spec.nx = spec.ny = spec.nz = 3;
    auto H = topi_generate(spec);
    for (std::size_t workers : {2, 3, 4}) {
        auto plan = partition_rows(H, workers);
        for (std::size_t w = 0; w < workers; ++w)
            for (const auto& [v, rows] : plan.halo_in[w]) {
                REQUIRE(plan.halo_out[v].count(w) == 1);
                CHECK(plan.halo_out[v].at(w) == rows);
                for (std::size_t g : rows) CHECK(plan.owner_of(g) == v);
            }
    }
}

TEST_CASE("partition rejects too many workers") {
    auto H = diagonal_matrix({1.0, 2.0, 3.0});
    CHECK_THROWS_AS(partition_rows(H, 4), std::invalid_argument);
    CHECK_THROWS_AS(partition_rows(H, 0), std::invalid_argument);
}
