#pragma once

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "sparse_matrix.hpp"

namespace chebfilter {

struct MatrixMarketError : std::runtime_error {
    MatrixMarketError(const std::string& msg, std::size_t line)
        : std::runtime_error(msg + " (line " + std::to_string(line) + ")"), line_number(line) {}
    std::size_t line_number;
};

// Reads a "matrix coordinate complex" file with general or hermitian
// qualifier. Hermitian files store the lower triangle and are expanded.
// Indices are 1-based in the file, 0-based in memory.
inline SparseMatrixCRS matrix_market_read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    std::size_t lineno = 0;

    if (!std::getline(in, line)) throw MatrixMarketError("empty file", 1);
    ++lineno;
    std::istringstream hdr(line);
    std::string banner, object, format, field, sym;
    hdr >> banner >> object >> format >> field >> sym;
    if (banner != "%%MatrixMarket" || object != "matrix" || format != "coordinate" ||
        field != "complex")
        throw MatrixMarketError("expected '%%MatrixMarket matrix coordinate complex' header", lineno);
    Symmetry symmetry;
    if (sym == "hermitian")
        symmetry = Symmetry::hermitian;
    else if (sym == "general")
        symmetry = Symmetry::general;
    else
        throw MatrixMarketError("unsupported symmetry qualifier '" + sym + "'", lineno);

    std::size_t nrows = 0, ncols = 0, nnz = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line[0] == '%') continue;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream sz(line);
        if (!(sz >> nrows >> ncols >> nnz))
            throw MatrixMarketError("malformed size line", lineno);
        break;
    }
    if (nrows == 0 || nrows != ncols)
        throw MatrixMarketError("matrix must be square and nonempty", lineno);

    std::vector<Triplet> trips;
    trips.reserve(symmetry == Symmetry::hermitian ? 2 * nnz : nnz);
    std::size_t seen = 0;
    while (seen < nnz) {
        if (!std::getline(in, line)) throw MatrixMarketError("unexpected end of file", lineno + 1);
        ++lineno;
        if (!line.empty() && line[0] == '%') continue;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream es(line);
        long long i = 0, j = 0;
        double re = 0.0, im = 0.0;
        if (!(es >> i >> j >> re >> im))
            throw MatrixMarketError("malformed entry", lineno);
        if (i < 1 || j < 1 || i > static_cast<long long>(nrows) || j > static_cast<long long>(ncols))
            throw MatrixMarketError("index out of range", lineno);
        if (!std::isfinite(re) || !std::isfinite(im))
            throw MatrixMarketError("non-finite value", lineno);
        std::size_t r = static_cast<std::size_t>(i - 1), c = static_cast<std::size_t>(j - 1);
        trips.push_back({r, c, cplx(re, im)});
        if (symmetry == Symmetry::hermitian && r != c)
            trips.push_back({c, r, std::conj(cplx(re, im))});
        ++seen;
    }
    return build_from_triplets(nrows, trips, symmetry);
}

// Writes H in coordinate complex format. Hermitian matrices store the
// lower triangle only.
inline void matrix_market_write(const std::string& path, const SparseMatrixCRS& H) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    bool herm = H.symmetry == Symmetry::hermitian;
    out << "%%MatrixMarket matrix coordinate complex " << (herm ? "hermitian" : "general") << "\n";
    std::size_t count = 0;
    for (std::size_t i = 0; i < H.n; ++i)
        for (std::size_t k = H.row_ptr[i]; k < H.row_ptr[i + 1]; ++k)
            if (!herm || static_cast<std::size_t>(H.col_idx[k]) <= i) ++count;
    out << H.n << " " << H.n << " " << count << "\n";
    out.precision(17);
    for (std::size_t i = 0; i < H.n; ++i)
        for (std::size_t k = H.row_ptr[i]; k < H.row_ptr[i + 1]; ++k) {
            std::size_t j = static_cast<std::size_t>(H.col_idx[k]);
            if (herm && j > i) continue;
            out << (i + 1) << " " << (j + 1) << " " << H.values[k].real() << " "
                << H.values[k].imag() << "\n";
        }
    if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace chebfilter
