#pragma once

// Little-endian binary containers.
//
//   TNSR: "TNSR", u32 version = 1, u32 rank, rank x u32 dims, f32 data (row-major)
//   TPSF: "TPSF", u32 version = 1, u32 height, u32 width, H x W x (x, y) f32

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "tpsalign/errors.hpp"
#include "tpsalign/feature_map.hpp"
#include "tpsalign/warp_field.hpp"

namespace tpsalign {

inline constexpr std::uint32_t kBinaryFormatVersion = 1;

namespace detail {

inline void write_u32(std::ostream& out, std::uint32_t v) {
    const std::array<char, 4> b{static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                                static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
    out.write(b.data(), 4);
}

inline void write_f32(std::ostream& out, float f) { write_u32(out, std::bit_cast<std::uint32_t>(f)); }

inline std::uint32_t read_u32(std::istream& in, const char* what) {
    std::array<unsigned char, 4> b{};
    if (!in.read(reinterpret_cast<char*>(b.data()), 4)) {
        throw ParseError(std::string(what) + ": truncated file");
    }
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline float read_f32(std::istream& in, const char* what) { return std::bit_cast<float>(read_u32(in, what)); }

inline void expect_magic(std::istream& in, const char (&magic)[5], const char* what) {
    char got[4] = {};
    if (!in.read(got, 4) || std::memcmp(got, magic, 4) != 0) {
        throw ParseError(std::string(what) + ": bad magic, expected '" + magic + "'");
    }
    const std::uint32_t version = read_u32(in, what);
    if (version != kBinaryFormatVersion) {
        throw ParseError(std::string(what) + ": unsupported version " + std::to_string(version));
    }
}

inline void expect_eof(std::istream& in, const char* what) {
    if (in.peek() != std::char_traits<char>::eof()) {
        throw ParseError(std::string(what) + ": trailing bytes after payload");
    }
}

} // namespace detail

/// A dense float32 tensor as stored in TNSR files.
struct Tensor {
    std::vector<std::uint32_t> dims;
    std::vector<float> data;

    std::size_t element_count() const {
        std::size_t n = 1;
        for (auto d : dims) {
            n *= d;
        }
        return n;
    }
};

inline void write_tensor(std::ostream& out, const Tensor& t) {
    if (t.data.size() != t.element_count()) {
        throw ShapeError("write_tensor: data size does not match dims");
    }
    out.write("TNSR", 4);
    detail::write_u32(out, kBinaryFormatVersion);
    detail::write_u32(out, static_cast<std::uint32_t>(t.dims.size()));
    for (auto d : t.dims) {
        detail::write_u32(out, d);
    }
    for (float v : t.data) {
        detail::write_f32(out, v);
    }
}

inline Tensor read_tensor(std::istream& in) {
    constexpr const char* what = "TNSR";
    detail::expect_magic(in, "TNSR", what);
    Tensor t;
    const std::uint32_t rank = detail::read_u32(in, what);
    if (rank == 0 || rank > 8) {
        throw ParseError("TNSR: unsupported rank " + std::to_string(rank));
    }
    for (std::uint32_t i = 0; i < rank; ++i) {
        t.dims.push_back(detail::read_u32(in, what));
    }
    const std::size_t n = t.element_count();
    t.data.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        t.data[i] = detail::read_f32(in, what);
    }
    detail::expect_eof(in, what);
    return t;
}

inline void save_tensor(const Tensor& t, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ParseError("TNSR: cannot write '" + path + "'");
    }
    write_tensor(out, t);
}

inline Tensor load_tensor(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("TNSR: cannot open '" + path + "'");
    }
    try {
        return read_tensor(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

/// Rank-2 tensor (count x dim) as a list of row vectors.
inline std::vector<std::vector<double>> tensor_rows(const Tensor& t) {
    if (t.dims.size() != 2) {
        throw ParseError("TNSR: embeddings must be rank 2, got rank " + std::to_string(t.dims.size()));
    }
    std::vector<std::vector<double>> rows(t.dims[0], std::vector<double>(t.dims[1]));
    for (std::size_t i = 0; i < t.dims[0]; ++i) {
        for (std::size_t k = 0; k < t.dims[1]; ++k) {
            rows[i][k] = t.data[i * t.dims[1] + k];
        }
    }
    return rows;
}

/// Rank-3 tensor (C x H x W) as a feature map.
template <class T>
FeatureMap<T> tensor_to_feature_map(const Tensor& t) {
    if (t.dims.size() != 3) {
        throw ParseError("TNSR: feature maps must be rank 3, got rank " + std::to_string(t.dims.size()));
    }
    return FeatureMap<T>(t.dims[0], t.dims[1], t.dims[2], std::vector<T>(t.data.begin(), t.data.end()));
}

template <class T>
Tensor feature_map_to_tensor(const FeatureMap<T>& m) {
    Tensor t;
    t.dims = {static_cast<std::uint32_t>(m.channels()), static_cast<std::uint32_t>(m.height()),
              static_cast<std::uint32_t>(m.width())};
    t.data.reserve(m.size());
    for (T v : m.values()) {
        t.data.push_back(static_cast<float>(v));
    }
    return t;
}

/// Coordinates are narrowed to float32 on write.
inline void write_field(std::ostream& out, const WarpField& field) {
    out.write("TPSF", 4);
    detail::write_u32(out, kBinaryFormatVersion);
    detail::write_u32(out, static_cast<std::uint32_t>(field.height()));
    detail::write_u32(out, static_cast<std::uint32_t>(field.width()));
    for (const auto& p : field.coords()) {
        detail::write_f32(out, static_cast<float>(p.x));
        detail::write_f32(out, static_cast<float>(p.y));
    }
}

inline WarpField read_field(std::istream& in) {
    constexpr const char* what = "TPSF";
    detail::expect_magic(in, "TPSF", what);
    const std::uint32_t h = detail::read_u32(in, what);
    const std::uint32_t w = detail::read_u32(in, what);
    if (h == 0 || w == 0) {
        throw ParseError("TPSF: zero dimension");
    }
    std::vector<Point2> coords(static_cast<std::size_t>(h) * w);
    for (auto& p : coords) {
        p.x = detail::read_f32(in, what);
        p.y = detail::read_f32(in, what);
    }
    detail::expect_eof(in, what);
    try {
        return WarpField(h, w, std::move(coords));
    } catch (const Error& e) {
        throw ParseError(std::string("TPSF: ") + e.what());
    }
}

inline void save_field(const WarpField& field, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ParseError("TPSF: cannot write '" + path + "'");
    }
    write_field(out, field);
}

inline WarpField load_field(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("TPSF: cannot open '" + path + "'");
    }
    try {
        return read_field(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

} // namespace tpsalign
