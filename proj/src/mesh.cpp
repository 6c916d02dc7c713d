#include "flowlab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

namespace flowlab
{

namespace
{

double cross(const Vec2 &a, const Vec2 &b) { return a.x() * b.y() - a.y() * b.x(); }

bool near(const Point &a, const Point &b) { return (a - b).cwiseAbs().maxCoeff() <= periodic_tolerance; }

// Facets whose endpoints are translates of each other; returns -1 if none.
int find_translated(const Mesh &mesh, const std::vector<int> &candidates, int f, const Vec2 &shift)
{
    const auto &ff = mesh.facet(f);
    const Point a = mesh.vertex(ff.vertices[0]) + shift;
    const Point b = mesh.vertex(ff.vertices[1]) + shift;
    for (int g : candidates)
    {
        const auto &fg = mesh.facet(g);
        const Point &c = mesh.vertex(fg.vertices[0]);
        const Point &d = mesh.vertex(fg.vertices[1]);
        if ((near(a, c) && near(b, d)) || (near(a, d) && near(b, c)))
            return g;
    }
    return -1;
}

int find_root(std::vector<int> &parent, int i)
{
    while (parent[i] != i)
    {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    return i;
}

} // namespace

Mesh::Mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> cells)
    : vertices_(std::move(vertices)), cells_(std::move(cells))
{
    for (const auto &c : cells_)
        for (int v : c)
            if (v < 0 || v >= n_vertices())
                throw TopologyError("cell references vertex " + std::to_string(v) + " out of range");
    build_topology();
    validate();
    rebuild_vertex_representatives();
}

double Mesh::cell_area(int c) const
{
    const auto &t = cells_[c];
    return 0.5 * cross(vertices_[t[1]] - vertices_[t[0]], vertices_[t[2]] - vertices_[t[0]]);
}

bool Mesh::is_periodic_slave(int f) const
{
    return std::any_of(periodic_.begin(), periodic_.end(), [f](const PeriodicPair &p) { return p.slave == f; });
}

int Mesh::find_facet(int a, int b) const
{
    if (a > b)
        std::swap(a, b);
    auto it = std::lower_bound(facets_.begin(), facets_.end(), std::array<int, 2>{a, b},
                               [](const Facet &f, const std::array<int, 2> &key) { return f.vertices < key; });
    if (it != facets_.end() && it->vertices == std::array<int, 2>{a, b})
        return static_cast<int>(it - facets_.begin());
    return -1;
}

void Mesh::build_topology()
{
    for (int c = 0; c < n_cells(); ++c)
    {
        if (!(cell_area(c) > 0.0))
            throw TopologyError("cell " + std::to_string(c) + " has non-positive signed area");
    }

    std::map<std::array<int, 2>, std::vector<std::pair<int, int>>> edges;
    for (int c = 0; c < n_cells(); ++c)
    {
        const auto &t = cells_[c];
        for (int i = 0; i < 3; ++i)
        {
            int a = t[(i + 1) % 3], b = t[(i + 2) % 3];
            if (a > b)
                std::swap(a, b);
            edges[{a, b}].emplace_back(c, i);
        }
    }

    facets_.clear();
    facets_.reserve(edges.size());
    cell_facets_.assign(cells_.size(), {-1, -1, -1});
    for (const auto &[key, adj] : edges)
    {
        if (adj.size() > 2)
            throw TopologyError("edge (" + std::to_string(key[0]) + "," + std::to_string(key[1]) +
                                ") is shared by more than two cells");
        Facet f;
        f.vertices = key;
        f.cells = {adj[0].first, -1};
        f.local_index = {adj[0].second, -1};
        if (adj.size() == 2)
        {
            f.cells[1] = adj[1].first;
            f.local_index[1] = adj[1].second;
            if (f.cells[0] > f.cells[1])
            {
                std::swap(f.cells[0], f.cells[1]);
                std::swap(f.local_index[0], f.local_index[1]);
            }
        }
        else
        {
            f.marker = 0;
        }
        const auto &t = cells_[f.cells[0]];
        const int i = f.local_index[0];
        const Vec2 d = vertices_[t[(i + 2) % 3]] - vertices_[t[(i + 1) % 3]];
        f.length = d.norm();
        f.normal = Vec2(d.y(), -d.x()) / f.length;
        const int fi = static_cast<int>(facets_.size());
        facets_.push_back(f);
        cell_facets_[f.cells[0]][f.local_index[0]] = fi;
        if (f.cells[1] >= 0)
            cell_facets_[f.cells[1]][f.local_index[1]] = fi;
    }

    diameters_.resize(cells_.size());
    for (int c = 0; c < n_cells(); ++c)
    {
        double h = 0.0;
        for (int i = 0; i < 3; ++i)
            h = std::max(h, facets_[cell_facets_[c][i]].length);
        diameters_[c] = h;
    }
    partner_.assign(facets_.size(), -1);
}

void Mesh::validate() const
{
    // A hanging node shows up as a vertex in the relative interior of a
    // boundary edge (the coarse side of the non-conforming interface).
    std::vector<char> used(vertices_.size(), 0);
    for (const auto &t : cells_)
        for (int v : t)
            used[v] = 1;
    for (const auto &f : facets_)
    {
        if (!f.is_boundary())
            continue;
        const Point &a = vertices_[f.vertices[0]];
        const Point &b = vertices_[f.vertices[1]];
        const Vec2 d = b - a;
        for (int v = 0; v < n_vertices(); ++v)
        {
            if (!used[v] || v == f.vertices[0] || v == f.vertices[1])
                continue;
            const Vec2 r = vertices_[v] - a;
            const double s = r.dot(d) / d.squaredNorm();
            if (s <= 1e-12 || s >= 1.0 - 1e-12)
                continue;
            if (std::abs(cross(d, r)) / d.norm() <= 1e-12 * (1.0 + d.norm()))
                throw TopologyError("hanging node " + std::to_string(v) + " on edge (" +
                                    std::to_string(f.vertices[0]) + "," + std::to_string(f.vertices[1]) + ")");
        }
    }
}

void Mesh::set_boundary_marker(int f, int marker)
{
    if (f < 0 || f >= n_facets() || !facets_[f].is_boundary())
        throw TopologyError("boundary marker assigned to non-boundary facet " + std::to_string(f));
    facets_[f].marker = marker;
}

void Mesh::set_periodic_pairs(std::vector<PeriodicPair> pairs)
{
    std::vector<int> partner(facets_.size(), -1);
    for (auto &p : pairs)
    {
        if (p.master < 0 || p.master >= n_facets() || p.slave < 0 || p.slave >= n_facets() || p.master == p.slave)
            throw PeriodicityError("invalid periodic facet indices " + std::to_string(p.master) + "/" +
                                   std::to_string(p.slave));
        const auto &fm = facets_[p.master];
        const auto &fs = facets_[p.slave];
        if (!fm.is_boundary() || !fs.is_boundary())
            throw PeriodicityError("periodic facet " + std::to_string(fm.is_boundary() ? p.slave : p.master) +
                                   " is not a boundary facet");
        if (partner[p.master] >= 0 || partner[p.slave] >= 0)
            throw PeriodicityError("facet used in more than one periodic pair");
        const Point mm = 0.5 * (vertices_[fm.vertices[0]] + vertices_[fm.vertices[1]]);
        const Point ms = 0.5 * (vertices_[fs.vertices[0]] + vertices_[fs.vertices[1]]);
        p.shift = ms - mm;
        const Point a = vertices_[fm.vertices[0]] + p.shift;
        const Point b = vertices_[fm.vertices[1]] + p.shift;
        const Point &c = vertices_[fs.vertices[0]];
        const Point &d = vertices_[fs.vertices[1]];
        if (!((near(a, c) && near(b, d)) || (near(a, d) && near(b, c))))
            throw PeriodicityError("periodic pair " + std::to_string(p.master) + "/" + std::to_string(p.slave) +
                                   " does not match under translation");
        partner[p.master] = p.slave;
        partner[p.slave] = p.master;
    }
    periodic_ = std::move(pairs);
    partner_ = std::move(partner);
    rebuild_vertex_representatives();
}

void Mesh::rebuild_vertex_representatives()
{
    std::vector<int> parent(vertices_.size());
    std::iota(parent.begin(), parent.end(), 0);
    for (const auto &p : periodic_)
    {
        const auto &fm = facets_[p.master];
        const auto &fs = facets_[p.slave];
        for (int vm : fm.vertices)
        {
            const Point x = vertices_[vm] + p.shift;
            for (int vs : fs.vertices)
            {
                if (near(x, vertices_[vs]))
                {
                    int ra = find_root(parent, vm), rb = find_root(parent, vs);
                    if (ra != rb)
                        parent[std::max(ra, rb)] = std::min(ra, rb);
                }
            }
        }
    }
    vertex_rep_.resize(vertices_.size());
    for (int v = 0; v < n_vertices(); ++v)
        vertex_rep_[v] = find_root(parent, v);
}

MeshStats Mesh::stats() const
{
    MeshStats s;
    s.n_vertices = n_vertices();
    s.n_cells = n_cells();
    s.n_facets = n_facets();
    for (int f = 0; f < n_facets(); ++f)
    {
        if (!facets_[f].is_boundary())
            ++s.n_interior_facets;
        else if (partner_[f] < 0)
            ++s.n_boundary_facets;
    }
    s.n_interior_facets += static_cast<int>(periodic_.size());
    s.h_max = 0.0;
    s.h_min = std::numeric_limits<double>::infinity();
    s.min_angle = std::numbers::pi;
    for (int c = 0; c < n_cells(); ++c)
    {
        s.h_max = std::max(s.h_max, diameters_[c]);
        s.h_min = std::min(s.h_min, diameters_[c]);
        const auto &t = cells_[c];
        for (int i = 0; i < 3; ++i)
        {
            const Vec2 a = vertices_[t[(i + 1) % 3]] - vertices_[t[i]];
            const Vec2 b = vertices_[t[(i + 2) % 3]] - vertices_[t[i]];
            s.min_angle = std::min(s.min_angle, std::atan2(std::abs(cross(a, b)), a.dot(b)));
        }
    }
    return s;
}

Mesh read_mesh(std::istream &in)
{
    std::string line;
    auto next_line = [&](std::string &out) {
        while (std::getline(in, out))
        {
            auto pos = out.find('#');
            if (pos != std::string::npos)
                out.erase(pos);
            if (out.find_first_not_of(" \t\r") != std::string::npos)
                return true;
        }
        return false;
    };
    auto fail = [](const std::string &msg) -> ParseError { return ParseError("mesh parse error: " + msg); };

    if (!next_line(line))
        throw fail("empty file");
    {
        std::istringstream hs(line);
        std::string a, b, extra;
        hs >> a >> b;
        if (a != "tri-mesh" || b != "v1" || (hs >> extra))
            throw fail("expected header 'tri-mesh v1'");
    }

    auto read_count = [&](const std::string &keyword, bool required) -> long {
        std::streampos pos = in.tellg();
        std::string l;
        if (!next_line(l))
        {
            if (required)
                throw fail("missing section '" + keyword + "'");
            return -1;
        }
        std::istringstream ls(l);
        std::string kw;
        long n = -1;
        ls >> kw;
        if (kw != keyword)
        {
            if (required)
                throw fail("expected '" + keyword + "', got '" + kw + "'");
            in.clear();
            in.seekg(pos);
            return -1;
        }
        if (!(ls >> n) || n < 0)
            throw fail("bad count for '" + keyword + "'");
        return n;
    };

    auto read_values = [&](int n_values, const std::string &what) {
        std::string l;
        if (!next_line(l))
            throw fail("unexpected end of file in " + what);
        std::istringstream ls(l);
        std::vector<double> vals(n_values);
        for (auto &v : vals)
            if (!(ls >> v))
                throw fail("malformed " + what + " line: '" + l + "'");
        std::string extra;
        if (ls >> extra)
            throw fail("trailing data in " + what + " line: '" + l + "'");
        return vals;
    };

    const long nv = read_count("vertices", true);
    std::vector<Point> vertices;
    vertices.reserve(nv);
    for (long i = 0; i < nv; ++i)
    {
        auto v = read_values(2, "vertex");
        vertices.emplace_back(v[0], v[1]);
    }
    const long nc = read_count("cells", true);
    std::vector<std::array<int, 3>> cells;
    cells.reserve(nc);
    for (long i = 0; i < nc; ++i)
    {
        auto v = read_values(3, "cell");
        std::array<int, 3> t{};
        for (int j = 0; j < 3; ++j)
        {
            if (v[j] != std::floor(v[j]))
                throw fail("non-integer vertex index in cell line");
            t[j] = static_cast<int>(v[j]);
        }
        cells.push_back(t);
    }

    // Optional sections in either order.
    std::vector<std::array<int, 3>> markers;
    std::vector<std::array<int, 2>> periodic;
    for (;;)
    {
        std::string l;
        std::streampos pos = in.tellg();
        if (!next_line(l))
            break;
        std::istringstream ls(l);
        std::string kw;
        long n = -1;
        ls >> kw;
        if (!(ls >> n) || n < 0)
            throw fail("bad section line '" + l + "'");
        if (kw == "boundary")
        {
            for (long i = 0; i < n; ++i)
            {
                auto v = read_values(3, "boundary");
                markers.push_back({static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2])});
            }
        }
        else if (kw == "periodic")
        {
            for (long i = 0; i < n; ++i)
            {
                auto v = read_values(2, "periodic");
                periodic.push_back({static_cast<int>(v[0]), static_cast<int>(v[1])});
            }
        }
        else
        {
            (void)pos;
            throw fail("unknown section '" + kw + "'");
        }
    }

    Mesh mesh(std::move(vertices), std::move(cells));
    for (const auto &m : markers)
    {
        int f = mesh.find_facet(m[0], m[1]);
        if (f < 0 || !mesh.facet(f).is_boundary())
            throw TopologyError("boundary marker on (" + std::to_string(m[0]) + "," + std::to_string(m[1]) +
                                ") which is not a boundary edge");
        mesh.set_boundary_marker(f, m[2]);
    }
    if (!periodic.empty())
    {
        std::vector<PeriodicPair> pairs;
        for (const auto &p : periodic)
            pairs.push_back({p[0], p[1], Vec2::Zero()});
        mesh.set_periodic_pairs(std::move(pairs));
    }
    return mesh;
}

Mesh load_mesh(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open mesh file '" + path + "'");
    return read_mesh(in);
}

void write_mesh(std::ostream &out, const Mesh &mesh)
{
    out << "tri-mesh v1\n";
    out << "vertices " << mesh.n_vertices() << "\n";
    out << std::setprecision(17);
    for (const auto &v : mesh.vertices())
        out << v.x() << " " << v.y() << "\n";
    out << "cells " << mesh.n_cells() << "\n";
    for (const auto &c : mesh.cells())
        out << c[0] << " " << c[1] << " " << c[2] << "\n";
    std::vector<int> marked;
    for (int f = 0; f < mesh.n_facets(); ++f)
        if (mesh.facet(f).is_boundary() && mesh.facet(f).marker != 0)
            marked.push_back(f);
    if (!marked.empty())
    {
        out << "boundary " << marked.size() << "\n";
        for (int f : marked)
            out << mesh.facet(f).vertices[0] << " " << mesh.facet(f).vertices[1] << " " << mesh.facet(f).marker
                << "\n";
    }
    if (mesh.is_periodic())
    {
        out << "periodic " << mesh.periodic_pairs().size() << "\n";
        for (const auto &p : mesh.periodic_pairs())
            out << p.master << " " << p.slave << "\n";
    }
}

void save_mesh(const std::string &path, const Mesh &mesh)
{
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write mesh file '" + path + "'");
    write_mesh(out, mesh);
}

Mesh make_periodic(const Mesh &mesh, double period_x, double period_y)
{
    double xmin = std::numeric_limits<double>::infinity(), ymin = xmin;
    for (const auto &v : mesh.vertices())
    {
        xmin = std::min(xmin, v.x());
        ymin = std::min(ymin, v.y());
    }
    auto on_line = [&](int f, int axis, double value) {
        const auto &ff = mesh.facet(f);
        return std::abs(mesh.vertex(ff.vertices[0])[axis] - value) <= periodic_tolerance &&
               std::abs(mesh.vertex(ff.vertices[1])[axis] - value) <= periodic_tolerance;
    };

    std::vector<PeriodicPair> pairs;
    std::vector<char> paired(mesh.n_facets(), 0);
    for (int axis = 0; axis < 2; ++axis)
    {
        const double period = axis == 0 ? period_x : period_y;
        if (period <= 0.0)
            continue;
        const double lo = axis == 0 ? xmin : ymin;
        std::vector<int> low, high;
        for (int f = 0; f < mesh.n_facets(); ++f)
        {
            if (!mesh.facet(f).is_boundary())
                continue;
            if (on_line(f, axis, lo))
                low.push_back(f);
            else if (on_line(f, axis, lo + period))
                high.push_back(f);
        }
        Vec2 shift = Vec2::Zero();
        shift[axis] = period;
        std::vector<char> used(mesh.n_facets(), 0);
        for (int f : low)
        {
            int g = find_translated(mesh, high, f, shift);
            if (g < 0 || used[g])
                throw PeriodicityError("boundary facet " + std::to_string(f) + " has no periodic partner");
            used[g] = 1;
            paired[f] = paired[g] = 1;
            pairs.push_back({f, g, shift});
        }
        for (int g : high)
            if (!used[g])
                throw PeriodicityError("boundary facet " + std::to_string(g) + " has no periodic partner");
    }
    if (period_x > 0.0 && period_y > 0.0)
    {
        for (int f = 0; f < mesh.n_facets(); ++f)
            if (mesh.facet(f).is_boundary() && !paired[f])
                throw PeriodicityError("boundary facet " + std::to_string(f) + " has no periodic partner");
    }

    Mesh out = mesh;
    out.set_periodic_pairs(std::move(pairs));
    return out;
}

namespace
{

// Re-derives markers and periodic pairs on a child mesh whose boundary
// facets are sub-segments of the parent's.
void inherit_boundary(const Mesh &parent, Mesh &child, const std::vector<std::vector<int>> &children_of)
{
    for (int f = 0; f < parent.n_facets(); ++f)
    {
        if (!parent.facet(f).is_boundary())
            continue;
        for (int g : children_of[f])
            child.set_boundary_marker(g, parent.facet(f).marker);
    }
    std::vector<PeriodicPair> pairs;
    for (const auto &p : parent.periodic_pairs())
    {
        for (int g : children_of[p.master])
        {
            int h = find_translated(child, children_of[p.slave], g, p.shift);
            if (h < 0)
                throw PeriodicityError("refined periodic facets do not match");
            pairs.push_back({g, h, p.shift});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const PeriodicPair &a, const PeriodicPair &b) { return a.master < b.master; });
    if (!pairs.empty())
        child.set_periodic_pairs(std::move(pairs));
}

} // namespace

Mesh alfeld_split(const Mesh &mesh)
{
    std::vector<Point> vertices = mesh.vertices();
    std::vector<std::array<int, 3>> cells;
    cells.reserve(3 * mesh.n_cells());
    for (int c = 0; c < mesh.n_cells(); ++c)
    {
        const auto &t = mesh.cell(c);
        const int b = static_cast<int>(vertices.size());
        vertices.push_back((mesh.vertex(t[0]) + mesh.vertex(t[1]) + mesh.vertex(t[2])) / 3.0);
        cells.push_back({t[0], t[1], b});
        cells.push_back({t[1], t[2], b});
        cells.push_back({t[2], t[0], b});
    }
    Mesh out(std::move(vertices), std::move(cells));
    std::vector<std::vector<int>> children(mesh.n_facets());
    for (int f = 0; f < mesh.n_facets(); ++f)
        children[f] = {out.find_facet(mesh.facet(f).vertices[0], mesh.facet(f).vertices[1])};
    inherit_boundary(mesh, out, children);
    out.set_alfeld_flag(true);
    return out;
}

Mesh uniform_refine(const Mesh &mesh)
{
    std::vector<Point> vertices = mesh.vertices();
    const int nv = mesh.n_vertices();
    for (const auto &f : mesh.facets())
        vertices.push_back(0.5 * (mesh.vertex(f.vertices[0]) + mesh.vertex(f.vertices[1])));
    std::vector<std::array<int, 3>> cells;
    cells.reserve(4 * mesh.n_cells());
    for (int c = 0; c < mesh.n_cells(); ++c)
    {
        const auto &t = mesh.cell(c);
        const int m0 = nv + mesh.cell_facet(c, 0);
        const int m1 = nv + mesh.cell_facet(c, 1);
        const int m2 = nv + mesh.cell_facet(c, 2);
        cells.push_back({t[0], m2, m1});
        cells.push_back({m2, t[1], m0});
        cells.push_back({m1, m0, t[2]});
        cells.push_back({m0, m1, m2});
    }
    Mesh out(std::move(vertices), std::move(cells));
    std::vector<std::vector<int>> children(mesh.n_facets());
    for (int f = 0; f < mesh.n_facets(); ++f)
    {
        const auto &ff = mesh.facet(f);
        children[f] = {out.find_facet(ff.vertices[0], nv + f), out.find_facet(nv + f, ff.vertices[1])};
    }
    inherit_boundary(mesh, out, children);
    return out;
}

Mesh unit_square_mesh(int n)
{
    if (n < 1)
        throw ConfigError("unit_square_mesh needs n >= 1");
    std::vector<Point> vertices;
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            vertices.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
    std::vector<std::array<int, 3>> cells;
    auto id = [n](int i, int j) { return j * (n + 1) + i; };
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
        {
            cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            cells.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    return Mesh(std::move(vertices), std::move(cells));
}

#ifndef FLOWLAB_MESH_DIR
#define FLOWLAB_MESH_DIR "meshes"
#endif

Mesh mesh_from_id(const std::string &id)
{
    auto parse_n = [&](const std::string &prefix) {
        try
        {
            return std::stoi(id.substr(prefix.size()));
        }
        catch (const std::exception &)
        {
            throw ConfigError("bad mesh id '" + id + "'");
        }
    };
    if (id.rfind("square:", 0) == 0)
        return unit_square_mesh(parse_n("square:"));
    if (id.rfind("periodic-square:", 0) == 0)
        return make_periodic(unit_square_mesh(parse_n("periodic-square:")), 1.0, 1.0);
    if (id == "coarse" || id == "fine")
        return load_mesh(std::string(FLOWLAB_MESH_DIR) + "/" + id + ".msh");
    if (id == "coarse-periodic" || id == "fine-periodic")
        return make_periodic(load_mesh(std::string(FLOWLAB_MESH_DIR) + "/" + id.substr(0, id.find('-')) + ".msh"),
                             1.0, 1.0);
    return load_mesh(id);
}

} // namespace flowlab
