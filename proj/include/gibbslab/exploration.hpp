#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gibbslab/lattice.hpp"
#include "gibbslab/models.hpp"
#include "gibbslab/sampler.hpp"

namespace gibbslab {

enum class FrameRule { WiredAtFrame, FreeAtFrame };

// Partition of the boundary of D induced by the open edges of omega outside D
// (edges of D are ignored). Under WiredAtFrame every cluster touching the
// boundary of the window counts as one.
BoundaryCondition induced_bc(const Domain& window, const EdgeConfig& omega, const Subdomain& D, FrameRule rule);

// Number of clusters of omega restricted to Lambda_{2n} that meet both
// Lambda_n and the boundary of Lambda_{2n}.
int count_annulus_clusters(const Domain& window, const EdgeConfig& omega, int n);

bool in_box(const Site& s, int n);

enum class InterfaceStatus { ExitedWindow, ReturnedToAxis, StepLimit };
std::string to_string(InterfaceStatus status);

struct InterfacePath {
  std::vector<Site> medial;      // doubled coordinates of the visited medial vertices
  std::vector<int> primal_side;  // window edges seen open, kept on the primal side
  std::vector<int> dual_side;    // window edges seen closed, their duals kept on the dual side
  InterfaceStatus status = InterfaceStatus::StepLimit;
};

// Exploration path between the primal cluster and the dual cluster, started
// at the axis point (start.x / 2, 0) heading north. `start` is in doubled
// coordinates with start.x odd and start.y == 0. The walk keeps the primal
// endpoint of its current Z^2 step when the edge ahead is closed and keeps the
// dual endpoint when it is open.
InterfacePath trace_interface(const Domain& window, const EdgeConfig& omega, const Site& start, long max_steps = 0);

struct FirstHit {
  long index;  // T_h
  Site medial;
  int M;  // even integer closest to the first coordinate of the path there
};
// First medial vertex strictly above height h.
std::optional<FirstHit> first_hit(const InterfacePath& path, int h);
// Median of M_h over the paths that reach height h.
int median_first_hit(const std::vector<InterfacePath>& paths, int h);

struct DuplicatedState {
  std::shared_ptr<const Domain> window;
  EdgeConfig omega;
  EdgeConfig omega_prime;
  std::array<int, 2> translation{0, 0};
  void validate() const;
};

enum class ArcCase { A, B, C, D };
char to_char(ArcCase c);
ArcCase arc_case_from_char(char c);

struct ArcParams {
  int n = 1;
  int x = -4;       // even, left end on the axis
  int y = 4;        // even, right end on the axis
  int h = 4;        // strip height for cases c and d
  int m = 0;        // Step 1 target [m, inf) x {h} (mirrored for case d)
  int extent = 0;   // arcs must stay in Lambda_extent; 0 means the whole window
  bool upper = true;
  void validate(const Domain& window) const;
};

struct ShieldingArc {
  ArcCase kind = ArcCase::A;
  bool upper = true;
  std::vector<Site> primal_path;  // traversal order along the arc
  std::vector<Site> dual_path;
  std::vector<int> primal_edges;  // window edges, open in omega'
  std::vector<int> dual_edges;    // window edges crossed by the dual segment, closed in omega
  std::optional<std::pair<Site, Site>> junction;  // (first, second) in traversal order
  Site start;
  Site end;
  std::vector<int> above;  // window edges of the half-plane separated from the axis segment, plus the arc
  // Vertices of the arc from start to end, primal and dual sites interleaved as traversed.
  std::vector<Site> curve() const;
};

std::optional<ShieldingArc> explore_shielding_arc(const DuplicatedState& state, const ArcParams& params, ArcCase kind);
// Steps 1 and 2 of cases c and d succeed (case a: the arc exists; case b: always).
bool is_promising(const DuplicatedState& state, const ArcParams& params, ArcCase kind);
// Empty when every structural invariant holds.
std::vector<std::string> validate_arc(const DuplicatedState& state, const ArcParams& params, const ShieldingArc& arc);

struct MonotonicityReport {
  long instances = 0;
  long promising = 0;
  long found = 0;
  long checks = 0;
  long violations = 0;
  std::vector<std::string> details;
};

// For each trial, closes `closures` random omega-open edges (all of them when
// closures < 0) and re-runs the exploration; an arc that existed must persist
// whenever omega' is promising.
MonotonicityReport arc_monotonicity_check(const DuplicatedState& state, const ArcParams& params, ArcCase kind,
                                          int trials, std::uint64_t seed, int closures = 1);

// Window edges whose midpoints lie strictly inside the closed curve formed by
// the upper arc, the axis, and the lower arc.
std::vector<int> enclosed_edges(const Domain& window, const ShieldingArc& upper, const ShieldingArc& lower);
// Number of maximal primal/dual runs around the boundary of the enclosed domain.
int count_boundary_arcs(const ShieldingArc& upper, const ShieldingArc& lower);

enum class BcKind { Free, Wired };
std::string to_string(BcKind kind);
BcKind bc_kind_from_string(const std::string& name);

struct ScanSpec {
  FKParams params{0.5, 1.0};
  BcKind bc = BcKind::Free;         // law of omega
  BcKind bc_prime = BcKind::Wired;  // law of omega' before translation
  int R = 48;
  std::vector<int> ladder = {4, 8, 16};
  std::array<int, 2> translation{2, 0};
  int trials = 200;
  long sweeps = 400;
  std::uint64_t seed = 1;
  bool shared_stream = false;  // omega' reuses omega's chain (only for identical laws)
  std::string case_order = "abcd";
  int h_offset = 0;  // h = n + h_offset; 0 means h = extent
  int m = 0;
  int workers = 1;
  void validate() const;
};

struct ScanRow {
  long trial = 0;
  int scale = 0;
  bool upper_found = false;
  bool lower_found = false;
  char upper_case = '-';
  char lower_case = '-';
  bool arc_found = false;
  bool bc_dominates = false;
  std::string bc_order;
  int n_arcs = 0;
  int invariant_failures = 0;
};

struct ScaleSummary {
  int scale = 0;
  Estimate arc_frequency;
  long successes = 0;
  long dominated = 0;
};

struct ScanReport {
  std::vector<ScanRow> rows;
  std::vector<ScaleSummary> scales;
  long successes = 0;
  long dominated = 0;
  long invariant_failures = 0;
  long promising_upper = 0;
  std::vector<std::string> failure_details;
  std::vector<std::string> surrogates;
};

ScanReport run_duplication_scan(const ScanSpec& spec);

enum class OuterRule { UpperFrameWired, FrameFree };
std::string to_string(OuterRule rule);

// boundary_plus wired together; under UpperFrameWired the frame vertices above
// the axis join that block. Everything else is free.
BoundaryCondition dobrushin_bc(const SlitDomain& slit, OuterRule rule = OuterRule::UpperFrameWired);

struct GoodPointSpec {
  FKParams params{0.5, 1.0};
  OuterRule outer = OuterRule::UpperFrameWired;
  long samples = 10000;
  long burn_in = 1000;
  int thin = 1;
  std::uint64_t seed = 1;
  void validate() const;
};

struct GoodPoint {
  int x = 0;
  long successes = 0;
  long samples = 0;
  Estimate estimate;
};

// Connection of (z, 0) to boundary_plus through open edges of the closed
// upper half (the upper frame counts as plus under UpperFrameWired).
std::vector<GoodPoint> estimate_good_points(std::shared_ptr<const SlitDomain> slit, const GoodPointSpec& spec);

}  // namespace gibbslab
