#pragma once

// `tetmesh v1` text format:
//
//   tetmesh v1
//   <nv> <nt>
//   x y z              (nv lines)
//   v0 v1 v2 v3 weight (nt lines, 0-based vertex indices)
//
// '#' starts a comment running to the end of the line; blank lines are ignored.
// Reals are written with 17 significant digits so a save/load cycle is exact.

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "tetlb/error.hpp"
#include "tetlb/mesh.hpp"

namespace tetlb {

namespace detail {

inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Next line with content, comments stripped. Returns false at end of input.
inline bool next_content_line(std::istream& in, std::string& line, std::size_t& lineno) {
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
}

template <class T>
bool read_fields(const std::string& line, T* out, int n) {
    std::istringstream ss(line);
    for (int i = 0; i < n; ++i) {
        if (!(ss >> out[i])) return false;
    }
    std::string rest;
    return !(ss >> rest);
}

} // namespace detail

inline void write_mesh(const TetMesh& mesh, std::ostream& out) {
    const auto live = mesh.live_elements();
    out << "tetmesh v1\n" << mesh.vertices().size() << ' ' << live.size() << '\n';
    for (const Point3& p : mesh.vertices()) {
        out << detail::format_real(p.x) << ' ' << detail::format_real(p.y) << ' '
            << detail::format_real(p.z) << '\n';
    }
    for (ElementId id : live) {
        const Tet& t = mesh.tet(id);
        out << t.vertices[0] << ' ' << t.vertices[1] << ' ' << t.vertices[2] << ' ' << t.vertices[3]
            << ' ' << detail::format_real(t.weight) << '\n';
    }
}

/// Parses a mesh; live elements of the saved mesh become elements 0..nt-1.
inline TetMesh read_mesh(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    if (!detail::next_content_line(in, line, lineno)) throw parse_error(0, "missing header");
    {
        std::istringstream ss(line);
        std::string magic, version, rest;
        ss >> magic >> version;
        if (magic != "tetmesh" || version != "v1" || (ss >> rest)) {
            throw parse_error(lineno, "expected header 'tetmesh v1'");
        }
    }
    if (!detail::next_content_line(in, line, lineno)) throw parse_error(lineno, "missing counts line");
    long long counts[2];
    if (!detail::read_fields(line, counts, 2) || counts[0] < 0 || counts[1] < 0) {
        throw parse_error(lineno, "expected '<nv> <nt>'");
    }
    const auto nv = static_cast<std::size_t>(counts[0]);
    const auto nt = static_cast<std::size_t>(counts[1]);

    std::vector<Point3> vertices;
    vertices.reserve(nv);
    for (std::size_t i = 0; i < nv; ++i) {
        if (!detail::next_content_line(in, line, lineno)) {
            throw parse_error(lineno, "expected " + std::to_string(nv) + " vertices, found " +
                                          std::to_string(i));
        }
        double c[3];
        if (!detail::read_fields(line, c, 3)) throw parse_error(lineno, "expected 'x y z'");
        Point3 p{c[0], c[1], c[2]};
        if (!p.finite()) throw parse_error(lineno, "non-finite coordinate");
        vertices.push_back(p);
    }

    std::vector<std::array<VertexId, 4>> tets;
    std::vector<double> weights;
    tets.reserve(nt);
    weights.reserve(nt);
    for (std::size_t i = 0; i < nt; ++i) {
        if (!detail::next_content_line(in, line, lineno)) {
            throw parse_error(lineno, "expected " + std::to_string(nt) + " tetrahedra, found " +
                                          std::to_string(i));
        }
        std::istringstream ss(line);
        long long v[4];
        double w;
        std::string rest;
        if (!(ss >> v[0] >> v[1] >> v[2] >> v[3] >> w) || (ss >> rest)) {
            throw parse_error(lineno, "expected 'v0 v1 v2 v3 weight'");
        }
        std::array<VertexId, 4> t{};
        for (int k = 0; k < 4; ++k) {
            if (v[k] < 0 || static_cast<std::size_t>(v[k]) >= nv) {
                throw parse_error(lineno, "vertex index " + std::to_string(v[k]) + " out of range");
            }
            t[k] = static_cast<VertexId>(v[k]);
        }
        if (!std::isfinite(w) || w < 0.0) throw parse_error(lineno, "invalid weight");
        const double vol = signed_volume(vertices[t[0]], vertices[t[1]], vertices[t[2]], vertices[t[3]]);
        if (!(vol > 0.0)) throw parse_error(lineno, "tetrahedron has non-positive volume");
        tets.push_back(t);
        weights.push_back(w);
    }
    if (detail::next_content_line(in, line, lineno)) {
        throw parse_error(lineno, "unexpected content after last tetrahedron (count mismatch?)");
    }
    try {
        return TetMesh(std::move(vertices), tets, weights);
    } catch (const error& e) {
        throw parse_error(lineno, e.what());
    }
}

inline void save_mesh(const TetMesh& mesh, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) detail::fail(errc::invalid_argument, "cannot open " + path.string() + " for writing");
    write_mesh(mesh, out);
    if (!out) detail::fail(errc::invalid_argument, "failed writing " + path.string());
}

inline TetMesh load_mesh(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) detail::fail(errc::not_found, "cannot open " + path.string());
    return read_mesh(in);
}

} // namespace tetlb
