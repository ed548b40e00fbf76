#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "arsim/field.hpp"
#include "arsim/initial.hpp"

namespace arsim {
namespace io {

/// Raw binary state snapshot. 40-byte header:
///   bytes  0-4   magic "ARMV1"
///   byte   5     format version (1)
///   byte   6     spatial dimension d
///   byte   7     zero pad
///   bytes  8-11  grid points per axis, u32 little endian
///   bytes 12-19  gamma, f64 little endian
///   bytes 20-27  t, f64 little endian
///   bytes 28-39  reserved, zero
/// Payload: rho then w_1..w_d, each N^d f64 little endian, row major with the
/// x axis fastest.
struct SnapshotHeader {
    int dim = 0;
    int grid_points = 0;
    double gamma = 0.0;
    double t = 0.0;
};

namespace detail {

inline void put_u32le(std::vector<unsigned char>& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

inline void put_f64le(std::vector<unsigned char>& buf, double d) {
    std::uint64_t v;
    std::memcpy(&v, &d, 8);
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

inline std::uint32_t get_u32le(const unsigned char* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
}

inline double get_f64le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    double d;
    std::memcpy(&d, &v, 8);
    return d;
}

}  // namespace detail

inline constexpr char kSnapshotMagic[5] = {'A', 'R', 'M', 'V', '1'};
inline constexpr std::size_t kSnapshotHeaderSize = 40;

inline void write_snapshot(const std::string& path, const State& s, double gamma) {
    const Grid& g = s.rho.grid;
    std::vector<unsigned char> buf;
    buf.reserve(kSnapshotHeaderSize + (1 + static_cast<std::size_t>(g.dim)) * g.size() * 8);
    buf.insert(buf.end(), kSnapshotMagic, kSnapshotMagic + 5);
    buf.push_back(1);  // version
    buf.push_back(static_cast<unsigned char>(g.dim));
    buf.push_back(0);  // pad
    detail::put_u32le(buf, static_cast<std::uint32_t>(g.points));
    detail::put_f64le(buf, gamma);
    detail::put_f64le(buf, s.t);
    for (int i = 0; i < 12; ++i) buf.push_back(0);  // reserved

    auto put_field = [&](const ScalarField& f) {
        for (double x : f.v) detail::put_f64le(buf, x);
    };
    put_field(s.rho);
    for (int m = 0; m < g.dim; ++m) put_field(s.w[m]);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_snapshot: cannot open " + path);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size()));
    if (!out) throw std::runtime_error("write_snapshot: write failed for " + path);
}

inline State read_snapshot(const std::string& path, SnapshotHeader* header = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_snapshot: cannot open " + path);
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    if (buf.size() < kSnapshotHeaderSize)
        throw std::runtime_error("read_snapshot: " + path + " truncated header");
    if (std::memcmp(buf.data(), kSnapshotMagic, 5) != 0)
        throw std::runtime_error("read_snapshot: " + path + " has wrong magic");
    if (buf[5] != 1)
        throw std::runtime_error("read_snapshot: " + path + " has unsupported version " +
                                 std::to_string(buf[5]));
    int dim = buf[6];
    if (dim < 1 || dim > 3)
        throw std::runtime_error("read_snapshot: " + path + " has invalid dimension");
    int points = static_cast<int>(detail::get_u32le(buf.data() + 8));
    double gamma = detail::get_f64le(buf.data() + 12);
    double t = detail::get_f64le(buf.data() + 20);

    Grid g{dim, points};
    std::size_t expect = kSnapshotHeaderSize + (1 + static_cast<std::size_t>(dim)) * g.size() * 8;
    if (buf.size() != expect)
        throw std::runtime_error("read_snapshot: " + path + " payload length mismatch (" +
                                 std::to_string(buf.size()) + " vs expected " +
                                 std::to_string(expect) + ")");

    State s(g);
    s.t = t;
    std::size_t off = kSnapshotHeaderSize;
    auto get_field = [&](ScalarField& f) {
        for (auto& x : f.v) {
            x = detail::get_f64le(buf.data() + off);
            off += 8;
        }
    };
    get_field(s.rho);
    for (int m = 0; m < dim; ++m) get_field(s.w[m]);

    if (header) *header = SnapshotHeader{dim, points, gamma, t};
    return s;
}

}  // namespace io
}  // namespace arsim
