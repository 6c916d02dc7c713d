#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "flowlab/types.hpp"

namespace flowlab
{

/// An edge of the triangulation. Vertices are stored as (lower, higher) index.
///
/// For an interior facet `cells[0] < cells[1]` and `normal` is the outward
/// normal of `cells[0]`. Boundary facets have `cells[1] == -1` and carry the
/// outward normal of the domain.
struct Facet
{
    std::array<int, 2> vertices{-1, -1};
    std::array<int, 2> cells{-1, -1};
    std::array<int, 2> local_index{-1, -1}; ///< local edge index inside each adjacent cell
    Vec2 normal = Vec2::Zero();
    double length = 0.0;
    int marker = -1; ///< boundary marker, -1 for interior facets

    bool is_boundary() const { return cells[1] < 0; }
};

/// Two boundary facets identified by translation: slave = master + shift.
struct PeriodicPair
{
    int master = -1;
    int slave = -1;
    Vec2 shift = Vec2::Zero();

    friend bool operator==(const PeriodicPair &, const PeriodicPair &) = default;
};

struct MeshStats
{
    int n_vertices = 0;
    int n_cells = 0;
    int n_facets = 0;
    int n_interior_facets = 0; ///< periodic pairs count once
    int n_boundary_facets = 0; ///< geometric boundary facets that are not periodic
    double h_max = 0.0;
    double h_min = 0.0;
    double min_angle = 0.0; ///< radians
};

/// Conforming triangulation of a planar domain. Immutable once built.
///
/// Local edge `i` of a cell is the edge opposite local vertex `i`; its
/// endpoints are the two remaining local vertices in increasing local order.
class Mesh
{
  public:
    Mesh() = default;

    /// Builds facet topology and validates orientation and conformity.
    Mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> cells);

    const std::vector<Point> &vertices() const { return vertices_; }
    const std::vector<std::array<int, 3>> &cells() const { return cells_; }
    const std::vector<Facet> &facets() const { return facets_; }
    const std::vector<PeriodicPair> &periodic_pairs() const { return periodic_; }

    int n_vertices() const { return static_cast<int>(vertices_.size()); }
    int n_cells() const { return static_cast<int>(cells_.size()); }
    int n_facets() const { return static_cast<int>(facets_.size()); }

    const Point &vertex(int i) const { return vertices_[i]; }
    const std::array<int, 3> &cell(int c) const { return cells_[c]; }
    const Facet &facet(int f) const { return facets_[f]; }

    /// Facet index of local edge `i` of cell `c`.
    int cell_facet(int c, int i) const { return cell_facets_[c][i]; }
    double cell_diameter(int c) const { return diameters_[c]; }
    double cell_area(int c) const;

    /// Periodic partner of a facet or -1.
    int periodic_partner(int f) const { return partner_[f]; }
    bool is_periodic_slave(int f) const;
    bool is_periodic() const { return !periodic_.empty(); }

    /// True for boundary facets that are not identified with another facet.
    bool is_domain_boundary(int f) const { return facets_[f].is_boundary() && partner_[f] < 0; }

    /// Facet index by vertex pair, -1 if not an edge.
    int find_facet(int a, int b) const;

    /// True when every cell came from a barycentric split.
    bool is_alfeld_split() const { return alfeld_; }

    MeshStats stats() const;

    /// Representative vertex after periodic identification (identity if non-periodic).
    const std::vector<int> &vertex_representative() const { return vertex_rep_; }

    // Mutating helpers used by the constructors of derived meshes.
    void set_boundary_marker(int f, int marker);
    void set_periodic_pairs(std::vector<PeriodicPair> pairs);
    void set_alfeld_flag(bool flag) { alfeld_ = flag; }

  private:
    void build_topology();
    void validate() const;
    void rebuild_vertex_representatives();

    std::vector<Point> vertices_;
    std::vector<std::array<int, 3>> cells_;
    std::vector<Facet> facets_;
    std::vector<std::array<int, 3>> cell_facets_;
    std::vector<double> diameters_;
    std::vector<PeriodicPair> periodic_;
    std::vector<int> partner_;
    std::vector<int> vertex_rep_;
    bool alfeld_ = false;
};

inline constexpr double periodic_tolerance = 1e-8;

Mesh load_mesh(const std::string &path);
Mesh read_mesh(std::istream &in);
void write_mesh(std::ostream &out, const Mesh &mesh);
void save_mesh(const std::string &path, const Mesh &mesh);

/// Pairs boundary facets on opposite sides of the bounding box. A zero
/// period disables pairing in that direction.
Mesh make_periodic(const Mesh &mesh, double period_x, double period_y);

/// Splits every triangle into three through its barycentre.
Mesh alfeld_split(const Mesh &mesh);

/// Red refinement: four congruent children per triangle.
Mesh uniform_refine(const Mesh &mesh);

/// Structured n x n triangulation of the unit square, diagonals from
/// lower-left to upper-right. n = 1 gives the 2-cell square.
Mesh unit_square_mesh(int n);

/// Resolves a built-in mesh id (`square:N`, `periodic-square:N`) or a file path.
Mesh mesh_from_id(const std::string &id);

} // namespace flowlab
