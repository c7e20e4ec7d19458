#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace gibbslab {

enum class LatticeKind { SquareL, SquareDual, Triangular, Hexagonal, Medial };

std::string to_string(LatticeKind kind);
LatticeKind lattice_from_string(const std::string& name);
int full_degree(LatticeKind kind);

// Integer lattice site. Coordinate conventions per lattice:
//  SquareL / SquareDual: the point (x, y) itself (x+y even / odd).
//  Triangular: skew coordinates, embedded at (x + y/2, y*sqrt(3)/2).
//  Hexagonal: the up triangle (u,v) is (2u, v), the down triangle is (2u+1, v).
//  Medial: doubled coordinates, so (x, y) stands for (x/2, y/2) with x, y odd.
// `sheet` separates the upper (+1) and lower (-1) copies of split slit vertices.
struct Site {
  int x = 0;
  int y = 0;
  int sheet = 0;
  auto operator<=>(const Site&) const = default;
};

struct SiteHash {
  std::size_t operator()(const Site& s) const noexcept {
    std::uint64_t h = static_cast<std::uint32_t>(s.x);
    h = h * 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint32_t>(s.y);
    h = h * 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint32_t>(s.sheet + 2);
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

// Real-plane position of a site (unit nearest-neighbour distance on
// Triangular, sqrt(2) on SquareL).
std::pair<double, double> embed(LatticeKind kind, const Site& s);

struct Incidence {
  int edge;
  int other;
};

// Finite subgraph of a lattice. Vertices are sorted lexicographically, edges
// are sorted by (u, v) with u < v, and an edge's position is its index.
class Domain {
 public:
  Domain() = default;

  // Builds a domain spanned by the given edges. The boundary is the set of
  // vertices whose degree is below the lattice's full degree unless an
  // explicit boundary is supplied.
  static Domain from_edges(LatticeKind kind, const std::vector<std::pair<Site, Site>>& edges,
                           std::optional<std::vector<Site>> boundary = std::nullopt);

  LatticeKind lattice() const { return kind_; }
  int vertex_count() const { return static_cast<int>(vertices_.size()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::vector<Site>& vertices() const { return vertices_; }
  const Site& vertex(int v) const { return vertices_[v]; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::pair<int, int>& edge(int e) const { return edges_[e]; }
  const std::vector<int>& boundary() const { return boundary_; }
  bool is_boundary(int v) const { return boundary_flag_[v] != 0; }
  const std::vector<Incidence>& incident(int v) const { return incident_[v]; }
  int degree(int v) const { return static_cast<int>(incident_[v].size()); }

  int find_vertex(const Site& s) const;
  int find_edge(int u, int v) const;
  int find_edge(const Site& a, const Site& b) const;

  // Hash of the lattice kind and edge geometry; configurations carry it so
  // they cannot be applied to a different domain.
  std::uint64_t fingerprint() const { return fingerprint_; }

 private:
  LatticeKind kind_ = LatticeKind::SquareL;
  std::vector<Site> vertices_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<int> boundary_;
  std::vector<char> boundary_flag_;
  std::vector<std::vector<Incidence>> incident_;
  std::unordered_map<Site, int, SiteHash> vertex_lookup_;
  std::unordered_map<std::uint64_t, int> edge_lookup_;
  std::uint64_t fingerprint_ = 0;
};

// {"lattice", "vertices": [[x,y],...], "edges": [[i,j],...], "boundary": [...]};
// split slit copies carry a third coordinate, the sheet.
std::string to_json(const Domain& d);

// Diagonal steps of L and L*, counter-clockwise from north-east.
inline constexpr std::array<std::array<int, 2>, 4> kDiagonal = {{{1, 1}, {-1, 1}, {-1, -1}, {1, -1}}};

inline bool is_primal_point(int x, int y) { return ((x + y) & 1) == 0; }

// The primal edge crossed by the dual edge leaving dual point d in diagonal
// direction dir (and vice versa for a primal start).
std::pair<Site, Site> crossing_edge(const Site& from, int dir);

// Endpoints of the dual (or primal) edge crossing the edge {a, b}.
std::pair<Site, Site> crossing_edge(const Site& a, const Site& b);

Domain build_box(int n, LatticeKind kind);

// Edges of L that are sides of the faces centred at the given dual points.
Domain build_faces(const std::vector<Site>& face_centres);
// cols x rows block of L-faces with lower-left face centred at (1, 0).
Domain build_face_block(int cols, int rows);
Domain build_single_edge();
// Zig-zag path (0,0),(1,1),(2,0),... with the given number of edges.
Domain build_path(int edges);

bool is_simply_connected(const Domain& d);

struct DualDomain {
  Domain domain;
  std::vector<int> to_dual;    // primal edge index -> dual edge index
  std::vector<int> to_primal;  // dual edge index -> primal edge index
};

// Accepts SquareL domains (giving SquareDual) and SquareDual domains (giving
// SquareL). Throws std::domain_error for domains that are not simply connected.
DualDomain dual_domain(const Domain& d);

struct SlitDomain {
  int M = 0;
  int N = 0;
  int R = 0;
  Domain domain;
  std::vector<int> boundary_plus;   // upper copies of split axis vertices
  std::vector<int> boundary_minus;  // lower copies
  std::vector<int> outer;           // remaining vertices on the frame of the box
  std::vector<int> to_box_edge;     // slit edge index -> edge index in build_box(R)
};

SlitDomain build_slit(int M, int N, int R);

struct TriangleStar {
  Domain triangle;
  Domain star;
  std::array<int, 3> triangle_terminals;  // vertex indices of A, B, C
  std::array<int, 3> star_terminals;
  int star_centre = -1;
};

TriangleStar build_triangle_star();

// Hexagonal faces are indexed by the triangular-lattice site at their centre.
struct FaceDomain {
  Domain graph;                                 // hex edges bordering an inner face
  std::vector<Site> faces;                      // inner faces, then the exterior ring
  int inner_count = 0;
  std::vector<std::pair<int, int>> edge_faces;  // graph edge -> the two faces it separates
  std::vector<std::pair<int, int>> ring_pairs;  // adjacent pairs of ring faces
  int face_index(const Site& s) const;
  int ring_count() const { return static_cast<int>(faces.size()) - inner_count; }
};

FaceDomain build_hex_faces(std::vector<Site> inner_faces);
// The six triangular-lattice neighbours of a face.
std::array<Site, 6> face_neighbours(const Site& f);
// The hex edge separating two adjacent faces.
std::pair<Site, Site> hex_edge_between(const Site& f, const Site& g);

struct Subdomain {
  Domain domain;
  std::vector<int> to_window_vertex;  // subdomain vertex -> window vertex
  std::vector<int> to_window_edge;    // subdomain edge -> window edge
};

Subdomain make_subdomain(const Domain& window, const std::vector<int>& window_edges);

// Connected edge sets of L with 1..max_edges edges, one per translation class.
std::vector<Domain> enumerate_bond_animals(int max_edges);

}  // namespace gibbslab
