#include "sega/mesh.hpp"

#include "mc_tables.hpp"
#include "sega/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fmt/format.h>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace sega {

namespace {

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

// Cube corner offsets and the corner pair of each of the 12 edges, in the
// numbering the triangle table expects.
constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                               {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
constexpr int kEdge[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                              {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};

std::uint64_t edge_key(const int a[3], const int b[3], std::int64_t i, std::int64_t j, std::int64_t k,
                       const std::array<std::int64_t, 3>& pd) {
    int axis = 0;
    std::int64_t lo[3];
    for (int t = 0; t < 3; ++t) {
        if (a[t] != b[t]) axis = t;
        lo[t] = std::min(a[t], b[t]);
    }
    const std::int64_t lin = (i + lo[0]) + pd[0] * ((j + lo[1]) + pd[1] * (k + lo[2]));
    return static_cast<std::uint64_t>(lin) * 3 + static_cast<std::uint64_t>(axis);
}

struct DisjointSet {
    std::vector<std::size_t> parent;
    explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

// Proper crossing of segment [p,q] with triangle (a,b,c); touching at the
// segment endpoints or triangle boundary does not count.
bool segment_crosses_triangle(const Vec3& p, const Vec3& q, const Vec3& a, const Vec3& b, const Vec3& c) {
    constexpr double eps = 1e-12;
    const Vec3 n = cross(sub(b, a), sub(c, a));
    const double dp = dot(n, sub(p, a)), dq = dot(n, sub(q, a));
    const double scale = norm(n) * std::max(norm(sub(q, p)), 1e-300);
    if (dp * dq >= 0.0 || std::abs(dp) <= eps * scale || std::abs(dq) <= eps * scale) return false;
    const double t = dp / (dp - dq);
    const Vec3 x{p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]), p[2] + t * (q[2] - p[2])};
    const double s0 = dot(n, cross(sub(b, a), sub(x, a)));
    const double s1 = dot(n, cross(sub(c, b), sub(x, b)));
    const double s2 = dot(n, cross(sub(a, c), sub(x, c)));
    const double tol = eps * dot(n, n) * std::max({norm(sub(b, a)), norm(sub(c, b)), norm(sub(a, c))});
    return s0 > tol && s1 > tol && s2 > tol;
}

bool triangles_intersect(const std::array<Vec3, 3>& t, const std::array<Vec3, 3>& u) {
    for (int e = 0; e < 3; ++e) {
        if (segment_crosses_triangle(t[e], t[(e + 1) % 3], u[0], u[1], u[2])) return true;
        if (segment_crosses_triangle(u[e], u[(e + 1) % 3], t[0], t[1], t[2])) return true;
    }
    return false;
}

std::size_t count_self_intersections(const SurfaceMesh& mesh) {
    const auto& V = mesh.vertices;
    const auto& T = mesh.triangles;
    if (T.empty()) return 0;

    // Uniform grid broad phase keyed on triangle bounding boxes.
    Vec3 lo{V[T[0][0]]}, hi{lo};
    double mean_edge = 0.0;
    for (const auto& t : T)
        for (int c = 0; c < 3; ++c) {
            for (int a = 0; a < 3; ++a) {
                lo[a] = std::min(lo[a], V[t[c]][a]);
                hi[a] = std::max(hi[a], V[t[c]][a]);
            }
            mean_edge += norm(sub(V[t[c]], V[t[(c + 1) % 3]]));
        }
    const double cell = std::max(mean_edge / static_cast<double>(3 * T.size()), 1e-9) * 2.0;
    auto cell_of = [&](double x, int a) { return static_cast<std::int64_t>(std::floor((x - lo[a]) / cell)); };

    std::map<std::array<std::int64_t, 3>, std::vector<std::uint32_t>> grid;
    for (std::uint32_t ti = 0; ti < T.size(); ++ti) {
        std::array<std::int64_t, 3> c0{}, c1{};
        for (int a = 0; a < 3; ++a) {
            const double mn = std::min({V[T[ti][0]][a], V[T[ti][1]][a], V[T[ti][2]][a]});
            const double mx = std::max({V[T[ti][0]][a], V[T[ti][1]][a], V[T[ti][2]][a]});
            c0[a] = cell_of(mn, a);
            c1[a] = cell_of(mx, a);
        }
        for (auto x = c0[0]; x <= c1[0]; ++x)
            for (auto y = c0[1]; y <= c1[1]; ++y)
                for (auto z = c0[2]; z <= c1[2]; ++z) grid[{x, y, z}].push_back(ti);
    }

    std::vector<std::pair<std::uint32_t, std::uint32_t>> hits;
    for (const auto& [key, tris] : grid)
        for (std::size_t a = 0; a < tris.size(); ++a)
            for (std::size_t b = a + 1; b < tris.size(); ++b) {
                const auto& ta = T[tris[a]];
                const auto& tb = T[tris[b]];
                bool shares = false;
                for (auto va : ta)
                    for (auto vb : tb) shares |= va == vb;
                if (shares) continue;
                if (triangles_intersect({V[ta[0]], V[ta[1]], V[ta[2]]}, {V[tb[0]], V[tb[1]], V[tb[2]]}))
                    hits.emplace_back(std::min(tris[a], tris[b]), std::max(tris[a], tris[b]));
            }
    std::sort(hits.begin(), hits.end());
    return static_cast<std::size_t>(std::unique(hits.begin(), hits.end()) - hits.begin());
}

std::vector<std::vector<std::uint32_t>> vertex_neighbours(const SurfaceMesh& mesh) {
    std::vector<std::vector<std::uint32_t>> nb(mesh.vertices.size());
    for (const auto& t : mesh.triangles)
        for (int c = 0; c < 3; ++c) {
            nb[t[c]].push_back(t[(c + 1) % 3]);
            nb[t[c]].push_back(t[(c + 2) % 3]);
        }
    for (auto& n : nb) {
        std::sort(n.begin(), n.end());
        n.erase(std::unique(n.begin(), n.end()), n.end());
    }
    return nb;
}

void laplacian_pass(std::vector<Vec3>& pos, const std::vector<std::vector<std::uint32_t>>& nb, double factor) {
    std::vector<Vec3> next = pos;
    for (std::size_t v = 0; v < pos.size(); ++v) {
        if (nb[v].empty()) continue;
        Vec3 c{0.0, 0.0, 0.0};
        for (const auto u : nb[v])
            for (int a = 0; a < 3; ++a) c[a] += pos[u][a];
        const double inv = 1.0 / static_cast<double>(nb[v].size());
        for (int a = 0; a < 3; ++a) next[v][a] = pos[v][a] + factor * (c[a] * inv - pos[v][a]);
    }
    pos.swap(next);
}

std::vector<std::string> data_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        out.push_back(line);
    }
    return out;
}

template <typename T>
std::vector<T> parse_fields(const std::string& line, const std::filesystem::path& path) {
    std::istringstream in(line);
    std::vector<T> out;
    T v;
    while (in >> v) out.push_back(v);
    if (!in.eof()) throw CorruptFile(fmt::format("{}: malformed line '{}'", path.string(), line));
    return out;
}

}  // namespace

SurfaceMesh marching_cubes(const LabelMask& mask) {
    if (mask.empty()) throw EmptyMask("marching cubes on an empty mask");
    const auto& g = mask.geometry;
    // Padded lattice: corner (i,j,k) samples voxel (i-1,j-1,k-1).
    const std::array<std::int64_t, 3> pd{static_cast<std::int64_t>(g.dims[0]) + 2,
                                         static_cast<std::int64_t>(g.dims[1]) + 2,
                                         static_cast<std::int64_t>(g.dims[2]) + 2};
    auto inside = [&](std::int64_t i, std::int64_t j, std::int64_t k) { return mask.at(Index3{i - 1, j - 1, k - 1}); };
    const bool flip = determinant(g.direction) < 0.0;

    SurfaceMesh mesh;
    std::unordered_map<std::uint64_t, std::uint32_t> welded;
    for (std::int64_t k = 0; k + 1 < pd[2]; ++k)
        for (std::int64_t j = 0; j + 1 < pd[1]; ++j)
            for (std::int64_t i = 0; i + 1 < pd[0]; ++i) {
                int cube = 0;
                for (int c = 0; c < 8; ++c)
                    if (!inside(i + kCorner[c][0], j + kCorner[c][1], k + kCorner[c][2])) cube |= 1 << c;
                if (cube == 0 || cube == 255) continue;

                const auto& row = detail::kTriTable[cube];
                for (int t = 0; row[t] != -1; t += 3) {
                    Triangle tri{};
                    for (int c = 0; c < 3; ++c) {
                        const auto& e = kEdge[static_cast<int>(row[t + c])];
                        const int* a = kCorner[e[0]];
                        const int* b = kCorner[e[1]];
                        const auto key = edge_key(a, b, i, j, k, pd);
                        auto [it, fresh] = welded.try_emplace(key, static_cast<std::uint32_t>(mesh.vertices.size()));
                        if (fresh) {
                            const Vec3 idx{static_cast<double>(i) + 0.5 * (a[0] + b[0]) - 1.0,
                                           static_cast<double>(j) + 0.5 * (a[1] + b[1]) - 1.0,
                                           static_cast<double>(k) + 0.5 * (a[2] + b[2]) - 1.0};
                            mesh.vertices.push_back(index_to_world(g, idx));
                        }
                        tri[c] = it->second;
                    }
                    // table winding faces outward in index space; a mirrored
                    // direction matrix reverses it in world space
                    if (flip) std::swap(tri[1], tri[2]);
                    mesh.triangles.push_back(tri);
                }
            }
    remove_degenerate_triangles(mesh);
    return mesh;
}

std::size_t remove_degenerate_triangles(SurfaceMesh& mesh) {
    const auto before = mesh.triangles.size();
    std::erase_if(mesh.triangles, [&](const Triangle& t) {
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) return true;
        const auto& v = mesh.vertices;
        return norm(cross(sub(v[t[1]], v[t[0]]), sub(v[t[2]], v[t[0]]))) == 0.0;
    });
    return before - mesh.triangles.size();
}

SurfaceMesh smooth(const SurfaceMesh& mesh, const SmoothOptions& options) {
    SurfaceMesh out = mesh;
    if (options.iterations <= 0) return out;
    if (!(options.lambda > 0.0)) throw DomainError("smoothing lambda must be > 0");
    const double mu = 1.0 / (options.pass_band - 1.0 / options.lambda);
    if (!(mu < 0.0)) throw DomainError("pass band must satisfy 0 < pass_band < 1/lambda");
    const auto nb = vertex_neighbours(mesh);
    for (int it = 0; it < options.iterations; ++it) {
        laplacian_pass(out.vertices, nb, options.lambda);
        laplacian_pass(out.vertices, nb, mu);
    }
    return out;
}

double enclosed_volume(const SurfaceMesh& mesh) {
    double vol = 0.0;
    for (const auto& t : mesh.triangles)
        vol += dot(mesh.vertices[t[0]], cross(mesh.vertices[t[1]], mesh.vertices[t[2]]));
    return vol / 6.0;
}

WatertightReport watertight_check(const SurfaceMesh& mesh, bool check_self_intersections) {
    // Directed edge counts per undirected edge.
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::pair<int, int>> edges;
    for (const auto& t : mesh.triangles)
        for (int c = 0; c < 3; ++c) {
            const auto a = t[c], b = t[(c + 1) % 3];
            auto& e = edges[{std::min(a, b), std::max(a, b)}];
            (a < b ? e.first : e.second) += 1;
        }

    WatertightReport r;
    for (const auto& [key, e] : edges) {
        const int total = e.first + e.second;
        if (total == 1) ++r.boundary_edges;
        else if (total > 2) ++r.nonmanifold_edges;
        else if (e.first != 1) ++r.misoriented_edges;
    }

    DisjointSet ds(mesh.vertices.size());
    std::vector<bool> used(mesh.vertices.size(), false);
    for (const auto& t : mesh.triangles) {
        ds.unite(t[0], t[1]);
        ds.unite(t[1], t[2]);
        used[t[0]] = used[t[1]] = used[t[2]] = true;
    }
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
        if (used[v] && ds.find(v) == v) ++r.component_count;

    if (check_self_intersections) {
        r.self_intersections_checked = true;
        r.self_intersections = count_self_intersections(mesh);
    }
    r.is_watertight = !mesh.triangles.empty() && r.boundary_edges == 0 && r.nonmanifold_edges == 0 &&
                      r.misoriented_edges == 0 && r.self_intersections == 0;
    return r;
}

double scaled_jacobian(const std::array<Vec3, 4>& tet) {
    // evaluate on a canonical vertex order so any permutation gives the same
    // magnitude bit for bit; the permutation parity carries the sign
    std::array<int, 4> order{0, 1, 2, 3};
    int parity = 1;
    for (int i = 1; i < 4; ++i)
        for (int j = i; j > 0 && tet[order[j]] < tet[order[j - 1]]; --j) {
            std::swap(order[j], order[j - 1]);
            parity = -parity;
        }
    const std::array<Vec3, 4> p{tet[order[0]], tet[order[1]], tet[order[2]], tet[order[3]]};

    static constexpr int kOthers[4][3] = {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}};
    double longest = 0.0;
    for (int c = 0; c < 4; ++c) {
        double prod = 1.0;
        for (const int o : kOthers[c]) prod *= norm(sub(p[o], p[c]));
        if (prod == 0.0) return 0.0;
        longest = std::max(longest, prod);
    }
    const double jac = dot(sub(p[1], p[0]), cross(sub(p[2], p[0]), sub(p[3], p[0])));
    const double sj = std::sqrt(2.0) * jac / longest;
    return std::abs(sj) < 1e-12 ? 0.0 : parity * sj;
}

MeshQualityReport tet_quality_report(const TetMesh& mesh) {
    if (mesh.tets.empty()) throw DomainError("tetrahedral mesh has no elements");
    MeshQualityReport r;
    r.scaled_jacobians.reserve(mesh.tets.size());
    for (const auto& t : mesh.tets) {
        for (const auto v : t)
            if (v >= mesh.nodes.size()) throw DomainError("tet references a missing node");
        const double sj = scaled_jacobian({mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]], mesh.nodes[t[3]]});
        r.scaled_jacobians.push_back(sj);
        if (sj < 0.0) ++r.invalid_count;
    }
    r.stats = robust_stats(r.scaled_jacobians);
    return r;
}

TetMesh read_tetmesh(const std::filesystem::path& node_path, const std::filesystem::path& ele_path) {
    const auto nodes = data_lines(node_path);
    if (nodes.empty()) throw CorruptFile(fmt::format("{}: missing header", node_path.string()));
    const auto nh = parse_fields<long long>(nodes[0], node_path);
    if (nh.size() < 2 || nh[0] < 0 || nh[1] != 3)
        throw CorruptFile(fmt::format("{}: header must be '<count> 3 <attrs> <markers>'", node_path.string()));
    const auto n_nodes = static_cast<std::size_t>(nh[0]);
    const std::size_t n_attrs = nh.size() > 2 ? static_cast<std::size_t>(nh[2]) : 0;
    const std::size_t n_markers = nh.size() > 3 ? static_cast<std::size_t>(nh[3]) : 0;
    if (nodes.size() - 1 != n_nodes)
        throw CorruptFile(fmt::format("{}: header declares {} nodes, found {}", node_path.string(), n_nodes, nodes.size() - 1));
    if (n_nodes < 4) throw CorruptFile(fmt::format("{}: a tetrahedral mesh needs at least 4 nodes", node_path.string()));

    TetMesh mesh;
    mesh.nodes.resize(n_nodes);
    long long base = 0;
    for (std::size_t n = 0; n < n_nodes; ++n) {
        const auto f = parse_fields<double>(nodes[n + 1], node_path);
        if (f.size() != 4 + n_attrs + n_markers)
            throw CorruptFile(fmt::format("{}: node line {} has {} fields", node_path.string(), n + 1, f.size()));
        const auto id = static_cast<long long>(f[0]);
        if (n == 0) {
            if (id != 0 && id != 1) throw CorruptFile(fmt::format("{}: first node index must be 0 or 1", node_path.string()));
            base = id;
        }
        if (id != static_cast<long long>(n) + base)
            throw CorruptFile(fmt::format("{}: node indices must be consecutive", node_path.string()));
        mesh.nodes[n] = {f[1], f[2], f[3]};
    }

    const auto eles = data_lines(ele_path);
    if (eles.empty()) throw CorruptFile(fmt::format("{}: missing header", ele_path.string()));
    const auto eh = parse_fields<long long>(eles[0], ele_path);
    if (eh.size() < 2 || eh[0] < 0 || eh[1] != 4)
        throw CorruptFile(fmt::format("{}: header must be '<count> 4 <markers>'", ele_path.string()));
    const auto n_tets = static_cast<std::size_t>(eh[0]);
    const std::size_t ele_attrs = eh.size() > 2 ? static_cast<std::size_t>(eh[2]) : 0;
    if (eles.size() - 1 != n_tets)
        throw CorruptFile(fmt::format("{}: header declares {} elements, found {}", ele_path.string(), n_tets, eles.size() - 1));
    mesh.tets.resize(n_tets);
    for (std::size_t t = 0; t < n_tets; ++t) {
        const auto f = parse_fields<double>(eles[t + 1], ele_path);
        if (f.size() != 5 + ele_attrs)
            throw CorruptFile(fmt::format("{}: element line {} has {} fields", ele_path.string(), t + 1, f.size()));
        for (int c = 0; c < 4; ++c) {
            const auto id = static_cast<long long>(f[1 + c]) - base;
            if (id < 0 || static_cast<std::size_t>(id) >= n_nodes || f[1 + c] != std::floor(f[1 + c]))
                throw CorruptFile(fmt::format("{}: element {} references node {}", ele_path.string(), t + 1, f[1 + c]));
            mesh.tets[t][c] = static_cast<std::uint32_t>(id);
        }
    }
    return mesh;
}

void write_tetmesh(const TetMesh& mesh, const std::filesystem::path& node_path, const std::filesystem::path& ele_path,
                   int index_base) {
    std::ofstream node(node_path), ele(ele_path);
    if (!node || !ele) throw IoError("cannot write tetrahedral mesh files");
    node << fmt::format("{} 3 0 0\n", mesh.nodes.size());
    for (std::size_t n = 0; n < mesh.nodes.size(); ++n)
        node << fmt::format("{} {} {} {}\n", n + index_base, mesh.nodes[n][0], mesh.nodes[n][1], mesh.nodes[n][2]);
    ele << fmt::format("{} 4 0\n", mesh.tets.size());
    for (std::size_t t = 0; t < mesh.tets.size(); ++t)
        ele << fmt::format("{} {} {} {} {}\n", t + index_base, mesh.tets[t][0] + index_base, mesh.tets[t][1] + index_base,
                           mesh.tets[t][2] + index_base, mesh.tets[t][3] + index_base);
    if (!node || !ele) throw IoError("write of tetrahedral mesh failed");
}

void write_stl(const SurfaceMesh& mesh, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
    char header[80] = {};
    std::strncpy(header, "binary STL", sizeof(header));
    out.write(header, sizeof(header));
    const auto count = static_cast<std::uint32_t>(mesh.triangles.size());
    out.write(reinterpret_cast<const char*>(&count), 4);
    for (const auto& t : mesh.triangles) {
        const auto& a = mesh.vertices[t[0]];
        const auto& b = mesh.vertices[t[1]];
        const auto& c = mesh.vertices[t[2]];
        Vec3 n = cross(sub(b, a), sub(c, a));
        const double len = norm(n);
        if (len > 0.0)
            for (auto& x : n) x /= len;
        float rec[12];
        for (int k = 0; k < 3; ++k) {
            rec[k] = static_cast<float>(n[k]);
            rec[3 + k] = static_cast<float>(a[k]);
            rec[6 + k] = static_cast<float>(b[k]);
            rec[9 + k] = static_cast<float>(c[k]);
        }
        out.write(reinterpret_cast<const char*>(rec), sizeof(rec));
        const std::uint16_t attr = 0;
        out.write(reinterpret_cast<const char*>(&attr), 2);
    }
    if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

}  // namespace sega
