#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace chebfilter {

using cplx = std::complex<double>;

namespace rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Counter-based complex Gaussian keyed by (seed, i, j): unit variance
// (E|z|^2 = 1), identical for any evaluation order or process layout.
inline cplx unit_complex_gaussian(std::uint64_t seed, std::uint64_t i, std::uint64_t j) {
    std::uint64_t h = splitmix64(splitmix64(seed) ^ splitmix64(i * 0xd1342543de82ef95ULL + j));
    std::uint64_t h2 = splitmix64(h);
    double u = (static_cast<double>(h >> 11) + 1.0) * 0x1.0p-53;   // (0, 1]
    double v = static_cast<double>(h2 >> 11) * 0x1.0p-53;          // [0, 1)
    double r = std::sqrt(-std::log(u));
    return cplx(r * std::cos(6.283185307179586477 * v), r * std::sin(6.283185307179586477 * v));
}

}  // namespace rng

struct InitZero {};
struct InitConstant {
    cplx value;
};
struct InitSeededRandom {
    std::uint64_t seed;
    std::uint64_t row_offset = 0;  // global row of local row 0
};
using BlockVectorInit = std::variant<InitZero, InitConstant, InitSeededRandom>;

// n x n_s complex block vector stored as n_s/n_b panels, each panel
// row-major n x n_b. Element (i, j) lives in panel j / n_b at offset
// i * n_b + j % n_b. Panels are individually owned so that swapping two
// panels is a buffer exchange, never an element copy.
class BlockVector {
  public:
    BlockVector() = default;

    BlockVector(std::size_t n, std::size_t n_s, std::size_t n_b,
                const BlockVectorInit& init = InitZero{})
        : n_(n), ns_(n_s), nb_(n_b) {
        if (n < 1) throw std::invalid_argument("n must be >= 1");
        if (n_b == 0 || n_s == 0 || n_s % n_b != 0)
            throw std::invalid_argument("n_b must divide n_s");
        panels_.assign(n_s / n_b, std::vector<cplx>(n * n_b));
        if (std::holds_alternative<InitConstant>(init)) {
            cplx c = std::get<InitConstant>(init).value;
            for (auto& p : panels_)
                for (auto& x : p) x = c;
        } else if (std::holds_alternative<InitSeededRandom>(init)) {
            const auto& r = std::get<InitSeededRandom>(init);
            for (std::size_t j = 0; j < n_s; ++j)
                for (std::size_t i = 0; i < n; ++i)
                    (*this)(i, j) = rng::unit_complex_gaussian(r.seed, r.row_offset + i, j);
        }
    }

    std::size_t rows() const { return n_; }
    std::size_t cols() const { return ns_; }
    std::size_t block_width() const { return nb_; }
    std::size_t panel_count() const { return panels_.size(); }

    cplx& operator()(std::size_t i, std::size_t j) {
        check(i, j);
        return panels_[j / nb_][i * nb_ + j % nb_];
    }
    const cplx& operator()(std::size_t i, std::size_t j) const {
        check(i, j);
        return panels_[j / nb_][i * nb_ + j % nb_];
    }

    // Linear offset of (i, j) in panel-concatenation order.
    std::size_t linear_offset(std::size_t i, std::size_t j) const {
        check(i, j);
        return (j / nb_) * n_ * nb_ + i * nb_ + j % nb_;
    }

    std::vector<cplx>& panel(std::size_t b) {
        if (b >= panels_.size()) throw std::invalid_argument("panel index out of range");
        return panels_[b];
    }
    const std::vector<cplx>& panel(std::size_t b) const {
        if (b >= panels_.size()) throw std::invalid_argument("panel index out of range");
        return panels_[b];
    }

  private:
    void check(std::size_t i, std::size_t j) const {
        if (i >= n_ || j >= ns_) throw std::out_of_range("block vector index out of range");
    }

    std::size_t n_ = 0, ns_ = 0, nb_ = 0;
    std::vector<std::vector<cplx>> panels_;
};

// Handle to one panel of a block vector. Distinct panels never alias, so
// writers holding views of distinct panels may run concurrently.
class SubblockView {
  public:
    SubblockView(BlockVector& parent, std::size_t b) : parent_(&parent), b_(b) {
        if (b >= parent.panel_count()) throw std::invalid_argument("panel index out of range");
    }

    std::size_t rows() const { return parent_->rows(); }
    std::size_t width() const { return parent_->block_width(); }
    std::size_t panel_index() const { return b_; }

    cplx* data() { return parent_->panel(b_).data(); }
    const cplx* data() const { return parent_->panel(b_).data(); }

    cplx& operator()(std::size_t i, std::size_t j) {
        bounds(i, j);
        return data()[i * width() + j];
    }
    const cplx& operator()(std::size_t i, std::size_t j) const {
        bounds(i, j);
        return data()[i * width() + j];
    }

    friend void swap_blocks(SubblockView a, SubblockView b) {
        if (a.rows() != b.rows() || a.width() != b.width())
            throw std::invalid_argument("swap_blocks: shape mismatch");
        a.parent_->panel(a.b_).swap(b.parent_->panel(b.b_));
    }

  private:
    void bounds(std::size_t i, std::size_t j) const {
        if (i >= rows() || j >= width()) throw std::out_of_range("subblock index out of range");
    }

    BlockVector* parent_;
    std::size_t b_;
};

namespace detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int k = 0; k < 4; ++k) b[k] = static_cast<unsigned char>(v >> (8 * k));
    out.write(reinterpret_cast<const char*>(b), 4);
}
inline void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(v >> (8 * k));
    out.write(reinterpret_cast<const char*>(b), 8);
}
inline std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(b[k]) << (8 * k);
    return v;
}
inline std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(b[k]) << (8 * k);
    return v;
}

}  // namespace detail

inline constexpr char kBlockVectorMagic[4] = {'C', 'F', 'D', 'B'};
inline constexpr std::uint32_t kBlockVectorVersion = 1;
inline constexpr unsigned char kLayoutPanelRowMajor = 0;

inline void block_vector_write(const std::string& path, const BlockVector& X) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write(kBlockVectorMagic, 4);
    detail::put_u32(out, kBlockVectorVersion);
    detail::put_u64(out, X.rows());
    detail::put_u64(out, X.cols());
    detail::put_u64(out, X.block_width());
    out.put(static_cast<char>(kLayoutPanelRowMajor));
    for (std::size_t b = 0; b < X.panel_count(); ++b)
        for (const cplx& z : X.panel(b)) {
            double re = z.real(), im = z.imag();
            std::uint64_t ure, uim;
            std::memcpy(&ure, &re, 8);
            std::memcpy(&uim, &im, 8);
            detail::put_u64(out, ure);
            detail::put_u64(out, uim);
        }
    if (!out) throw std::runtime_error("write failed for " + path);
}

inline BlockVector block_vector_read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kBlockVectorMagic, 4) != 0)
        throw std::runtime_error(path + ": bad magic");
    if (detail::get_u32(in) != kBlockVectorVersion) throw std::runtime_error(path + ": bad version");
    std::uint64_t n = detail::get_u64(in), ns = detail::get_u64(in), nb = detail::get_u64(in);
    int tag = in.get();
    if (tag != kLayoutPanelRowMajor) throw std::runtime_error(path + ": unknown layout tag");
    BlockVector X(n, ns, nb);
    for (std::size_t b = 0; b < X.panel_count(); ++b)
        for (cplx& z : X.panel(b)) {
            std::uint64_t ure = detail::get_u64(in), uim = detail::get_u64(in);
            double re, im;
            std::memcpy(&re, &ure, 8);
            std::memcpy(&im, &uim, 8);
            z = cplx(re, im);
        }
    if (!in) throw std::runtime_error(path + ": truncated data");
    return X;
}

}  // namespace chebfilter
