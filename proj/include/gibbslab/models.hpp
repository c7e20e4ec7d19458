#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gibbslab/lattice.hpp"

namespace gibbslab {

// Open/closed flags, bit i for edge index i.
class EdgeConfig {
 public:
  EdgeConfig() = default;
  explicit EdgeConfig(const Domain& d, bool open = false);
  static EdgeConfig from_id(const Domain& d, std::uint64_t id);
  static EdgeConfig from_hex(const Domain& d, const std::string& hex);

  std::size_t size() const { return bits_.size(); }
  bool operator[](std::size_t e) const { return bits_[e] != 0; }
  void set(std::size_t e, bool open) { bits_[e] = open ? 1 : 0; }
  int open_count() const;
  std::uint64_t id() const;  // requires at most 64 edges
  std::string to_hex() const;
  std::uint64_t domain_fingerprint() const { return fingerprint_; }
  void check_domain(const Domain& d) const;
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  friend bool operator==(const EdgeConfig& a, const EdgeConfig& b) {
    return a.fingerprint_ == b.fingerprint_ && a.bits_ == b.bits_;
  }
  // Pointwise a <= b.
  friend bool dominated_by(const EdgeConfig& a, const EdgeConfig& b);

 private:
  std::uint64_t fingerprint_ = 0;
  std::vector<std::uint8_t> bits_;
};

// Partition of the boundary of a domain; blocks are sorted vertex-index lists
// sorted by their first element, singletons included.
class BoundaryCondition {
 public:
  BoundaryCondition() = default;
  static BoundaryCondition free(const Domain& d);
  static BoundaryCondition wired(const Domain& d);
  // Missing boundary vertices become singletons. Blocks must be disjoint and
  // lie in the boundary.
  static BoundaryCondition from_blocks(const Domain& d, const std::vector<std::vector<int>>& blocks);
  static BoundaryCondition from_blocks(const std::vector<int>& boundary,
                                       const std::vector<std::vector<int>>& blocks);

  const std::vector<int>& boundary() const { return boundary_; }
  const std::vector<std::vector<int>>& blocks() const { return blocks_; }
  // Block id of a boundary vertex, -1 if not a boundary vertex.
  int block_of(int v) const;
  bool is_free() const { return blocks_.size() == boundary_.size(); }
  bool is_wired() const { return blocks_.size() <= 1; }
  std::string to_json() const;
  friend bool operator==(const BoundaryCondition& a, const BoundaryCondition& b) {
    return a.boundary_ == b.boundary_ && a.blocks_ == b.blocks_;
  }

 private:
  std::vector<int> boundary_;
  std::vector<std::vector<int>> blocks_;
};

enum class BcOrder { Equal, Coarser, Finer, Incomparable };
std::string to_string(BcOrder o);
// Coarser means a >= b: every block of b lies inside a block of a.
BcOrder bc_compare(const BoundaryCondition& a, const BoundaryCondition& b);

// Every set partition of the given vertices (restricted-growth enumeration),
// finest first is not guaranteed; order is deterministic.
std::vector<std::vector<std::vector<int>>> all_partitions(const std::vector<int>& items);

struct FKParams {
  double p;
  double q;
  FKParams(double p_, double q_);
  double y() const { return p / (1.0 - p); }
};

struct PottsParams {
  double T;
  int q;
  PottsParams(double T_, int q_);
};

struct Weight {
  double value;
  double log_value;
};

// Number of clusters of omega after fusing each block of xi.
int cluster_count(const Domain& d, const BoundaryCondition& xi, const EdgeConfig& omega);
Weight fk_weight(const Domain& d, const BoundaryCondition& xi, const FKParams& params,
                 const EdgeConfig& omega);

// Frame convention for clusters touching a designated set of frame vertices:
// either they count as one cluster (the default), or each counts with weight
// q_prime instead of q.
struct FrameConvention {
  std::vector<int> frame_vertices;
  bool merge = true;
  double q_prime = 1.0;
};
Weight fk_weight(const Domain& d, const BoundaryCondition& xi, const FKParams& params,
                 const EdgeConfig& omega, const FrameConvention& frame);

// Potts boundary colours per vertex: 0 means unconstrained, nonzero entries
// only on boundary vertices.
struct PottsBoundary {
  std::vector<int> colour;
  static PottsBoundary free(const Domain& d);
  static PottsBoundary monochromatic(const Domain& d, int colour);
  static PottsBoundary on(const Domain& d, const std::vector<int>& vertices, int colour);
};

struct PottsConfig {
  std::vector<int> spins;  // values in 1..q
};

bool compatible(const PottsBoundary& tau, const PottsConfig& sigma);
int disagreement_count(const Domain& d, const PottsConfig& sigma);
Weight potts_weight(const Domain& d, const PottsBoundary& tau, const PottsParams& params,
                    const PottsConfig& sigma);
double p_of_T(double T);

// Loop configuration on the graph of a FaceDomain.
struct LoopConfig {
  std::vector<std::uint8_t> bits;
  int edge_count() const;
};

// Exterior data for loops: pairs of boundary vertices joined by a strand
// outside the domain, and boundary vertices whose strand runs to infinity.
struct LoopBoundary {
  std::vector<std::pair<int, int>> arcs;
  std::vector<int> infinite_ends;
};

// Number of closed loops in omega together with the exterior arcs, not
// counting strands that reach infinity. Throws on odd degree.
int loop_count(const FaceDomain& fd, const LoopConfig& omega, const LoopBoundary& boundary = {});
Weight loop_weight(const FaceDomain& fd, double n, double x, const LoopConfig& omega,
                   const LoopBoundary& boundary = {});

struct FaceSpinConfig {
  std::vector<int> spins;  // +1 / -1 per face of the FaceDomain (inner then ring)
};

// Exterior data for face spins: ring spins, extra outside connections between
// ring faces, and which ring faces are joined to infinity.
struct SpinExterior {
  std::vector<int> ring_spins;
  std::vector<std::vector<int>> links;  // groups of ring indices connected outside
  std::vector<int> infinite;            // ring indices connected to infinity
  static SpinExterior constant(const FaceDomain& fd, int sign);
  SpinExterior flipped() const;
};

bool agrees_outside(const FaceDomain& fd, const SpinExterior& tau, const FaceSpinConfig& sigma);
// Number of finite spin clusters meeting the inner faces.
int finite_spin_clusters(const FaceDomain& fd, const SpinExterior& tau, const FaceSpinConfig& sigma);
// Number of adjacent face pairs with different spins, at least one inner.
int spin_disagreements(const FaceDomain& fd, const FaceSpinConfig& sigma);
Weight spin_weight(const FaceDomain& fd, const SpinExterior& tau, double n, double x,
                   const FaceSpinConfig& sigma);

}  // namespace gibbslab
