#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "geocot/error.hpp"
#include "geocot/util.hpp"

namespace geocot::posenc {

// H x W grid of D-dimensional vectors, stored [h][w][d].
struct PosTable {
    std::uint32_t height = 0, width = 0, dim = 0;
    std::vector<double> values;

    PosTable() = default;
    PosTable(std::uint32_t h, std::uint32_t w, std::uint32_t d)
        : height(h), width(w), dim(d), values(static_cast<std::size_t>(h) * w * d, 0.0) {}

    double& at(std::uint32_t h, std::uint32_t w, std::uint32_t d) {
        return values[(static_cast<std::size_t>(h) * width + w) * dim + d];
    }
    double at(std::uint32_t h, std::uint32_t w, std::uint32_t d) const {
        return values[(static_cast<std::size_t>(h) * width + w) * dim + d];
    }

    void validate() const {
        if (height < 1 || width < 1) throw Error(Errc::Schema, "position table must be at least 1x1");
        if (values.size() != static_cast<std::size_t>(height) * width * dim)
            throw Error(Errc::Schema, "position table size does not match its header");
        for (double v : values)
            if (!std::isfinite(v)) throw Error(Errc::Schema, "non-finite position table entry");
    }
};

// g = 2 * ((w + 0.5) / W, (h + 0.5) / H) - 1
inline std::pair<double, double> normalize_grid_coord(double w, double h, double W, double H) {
    if (!(W >= 1 && H >= 1) || !(w >= 0 && w < W) || !(h >= 0 && h < H))
        throw Error(Errc::CoordOutOfRange, "grid coordinate outside the grid");
    return {2.0 * ((w + 0.5) / W) - 1.0, 2.0 * ((h + 0.5) / H) - 1.0};
}

inline constexpr double kCubicA = -0.5;

inline double cubic_kernel(double s) {
    const double x = std::abs(s);
    const double a = kCubicA;
    if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
    if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
    return 0.0;
}

namespace detail {

// Continuous source index for a normalized coordinate. Round-off from the
// normalize/denormalize round trip is snapped so node centres stay exact.
inline double source_index(double g, std::uint32_t n) {
    const double x = (g + 1.0) / 2.0 * static_cast<double>(n) - 0.5;
    const double r = std::round(x);
    return std::abs(x - r) <= 1e-9 ? r : x;
}

inline std::array<double, 4> taps(double t) {
    return {cubic_kernel(1.0 + t), cubic_kernel(t), cubic_kernel(1.0 - t), cubic_kernel(2.0 - t)};
}

inline std::uint32_t clamp_index(long i, std::uint32_t n) {
    if (i < 0) return 0;
    if (i >= static_cast<long>(n)) return n - 1;
    return static_cast<std::uint32_t>(i);
}

} // namespace detail

// Separable cubic convolution (a = -0.5) with edge replication.
inline std::vector<double> bicubic_sample(const PosTable& t, double gx, double gy) {
    const double x = detail::source_index(gx, t.width);
    const double y = detail::source_index(gy, t.height);
    const double fx = std::floor(x), fy = std::floor(y);
    const auto wx = detail::taps(x - fx), wy = detail::taps(y - fy);
    const long ix = static_cast<long>(fx), iy = static_cast<long>(fy);
    std::vector<double> out(t.dim, 0.0);
    for (int j = 0; j < 4; ++j) {
        if (wy[j] == 0.0) continue;
        const std::uint32_t row = detail::clamp_index(iy - 1 + j, t.height);
        for (int i = 0; i < 4; ++i) {
            if (wx[i] == 0.0) continue;
            const std::uint32_t col = detail::clamp_index(ix - 1 + i, t.width);
            const double w = wy[j] * wx[i];
            for (std::uint32_t d = 0; d < t.dim; ++d) out[d] += w * t.at(row, col, d);
        }
    }
    return out;
}

inline PosTable adapt_table(const PosTable& src, std::uint32_t new_w, std::uint32_t new_h) {
    if (new_w < 1 || new_h < 1) throw Error(Errc::CoordOutOfRange, "target grid must be at least 1x1");
    src.validate();
    PosTable out(new_h, new_w, src.dim);
    for (std::uint32_t h = 0; h < new_h; ++h) {
        for (std::uint32_t w = 0; w < new_w; ++w) {
            const auto [gx, gy] = normalize_grid_coord(w, h, new_w, new_h);
            const auto v = bicubic_sample(src, gx, gy);
            for (std::uint32_t d = 0; d < src.dim; ++d) out.at(h, w, d) = v[d];
        }
    }
    return out;
}

// ---- I/O: little-endian u32 header (H, W, D) then f32 values ------------

namespace detail {

inline void put_u32(std::string& s, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

} // namespace detail

inline std::string encode_binary(const PosTable& t) {
    std::string s;
    s.reserve(12 + t.values.size() * 4);
    detail::put_u32(s, t.height);
    detail::put_u32(s, t.width);
    detail::put_u32(s, t.dim);
    for (double v : t.values) {
        const float f = static_cast<float>(v);
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        detail::put_u32(s, bits);
    }
    return s;
}

inline PosTable decode_binary(const std::string& s) {
    if (s.size() < 12) throw Error(Errc::Schema, "position table file shorter than its header");
    const auto* p = reinterpret_cast<const unsigned char*>(s.data());
    PosTable t;
    t.height = detail::get_u32(p);
    t.width = detail::get_u32(p + 4);
    t.dim = detail::get_u32(p + 8);
    const std::size_t n = static_cast<std::size_t>(t.height) * t.width * t.dim;
    if (s.size() != 12 + 4 * n) throw Error(Errc::Schema, "position table payload size mismatch");
    t.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t bits = detail::get_u32(p + 12 + 4 * i);
        float f;
        std::memcpy(&f, &bits, 4);
        t.values[i] = f;
    }
    t.validate();
    return t;
}

// One line per cell: h,w,v0,...,v{D-1}; preceded by a header line.
inline std::string encode_csv(const PosTable& t) {
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    os << "h,w";
    for (std::uint32_t d = 0; d < t.dim; ++d) os << ",v" << d;
    os << "\n";
    for (std::uint32_t h = 0; h < t.height; ++h)
        for (std::uint32_t w = 0; w < t.width; ++w) {
            os << h << "," << w;
            for (std::uint32_t d = 0; d < t.dim; ++d) os << "," << t.at(h, w, d);
            os << "\n";
        }
    return os.str();
}

inline PosTable decode_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) throw Error(Errc::Schema, "empty CSV position table");
    const auto header = util::split(util::trim(line), ",");
    if (header.size() < 2 || header[0] != "h" || header[1] != "w") throw Error(Errc::Schema, "bad CSV header");
    const auto dim = static_cast<std::uint32_t>(header.size() - 2);
    std::vector<std::tuple<long, long, std::vector<double>>> rows;
    long max_h = -1, max_w = -1;
    while (std::getline(is, line)) {
        if (util::trim(line).empty()) continue;
        const auto f = util::split(util::trim(line), ",");
        if (f.size() != header.size()) throw Error(Errc::Schema, "CSV row width mismatch");
        auto h = util::parse_double(f[0]), w = util::parse_double(f[1]);
        if (!h || !w || *h < 0 || *w < 0 || *h != std::floor(*h) || *w != std::floor(*w))
            throw Error(Errc::Schema, "bad CSV cell index");
        std::vector<double> v;
        for (std::size_t i = 2; i < f.size(); ++i) {
            auto x = util::parse_double(f[i]);
            if (!x) throw Error(Errc::Schema, "bad CSV value");
            v.push_back(*x);
        }
        max_h = std::max(max_h, static_cast<long>(*h));
        max_w = std::max(max_w, static_cast<long>(*w));
        rows.emplace_back(static_cast<long>(*h), static_cast<long>(*w), std::move(v));
    }
    if (rows.empty()) throw Error(Errc::Schema, "CSV position table has no rows");
    PosTable t(static_cast<std::uint32_t>(max_h + 1), static_cast<std::uint32_t>(max_w + 1), dim);
    if (rows.size() != static_cast<std::size_t>(t.height) * t.width) throw Error(Errc::Schema, "CSV grid incomplete");
    std::vector<bool> seen(rows.size(), false);
    for (auto& [h, w, v] : rows) {
        const std::size_t cell = static_cast<std::size_t>(h) * t.width + static_cast<std::size_t>(w);
        if (seen[cell]) throw Error(Errc::Schema, "duplicate CSV cell");
        seen[cell] = true;
        for (std::uint32_t d = 0; d < dim; ++d) t.at(static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(w), d) = v[d];
    }
    t.validate();
    return t;
}

} // namespace geocot::posenc
