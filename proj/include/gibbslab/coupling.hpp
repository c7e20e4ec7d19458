#pragma once

#include <array>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gibbslab/exact.hpp"
#include "gibbslab/lattice.hpp"
#include "gibbslab/models.hpp"
#include "gibbslab/oracle.hpp"
#include "gibbslab/rng.hpp"

namespace gibbslab {

double dual_p(double p, double q);
Rational dual_p(const Rational& p, const Rational& q);
double self_dual_p(double q);

// Positive root of y^3 + 3y^2 = q, by bisection.
double star_triangle_y(double q);
double p_c_tri(double q);
double p_c_hex(double q);
double x_c(double n);

// Q[s]/(s^2 - q): s is sqrt(q), the value of p/(1-p) at the self-dual point.
ContextPtr self_dual_context(const Rational& q);
// Q[y]/(y^3 + 3y^2 - q): y is p/(1-p) at the triangular critical point.
ContextPtr star_triangle_context(const Rational& q);

// omega* on the dual domain: e* open iff e closed.
EdgeConfig dual_config(const Domain& primal, const DualDomain& dual, const EdgeConfig& omega);

// Dualise, shift by (-1,0), reflect across the horizontal axis.
std::pair<Site, Site> rho_edge(const Site& a, const Site& b);

struct RhoMap {
  Domain image;
  std::vector<int> sigma;  // window edge -> image edge
};
RhoMap rho_map(const Domain& window);
// (rho omega) at sigma(e) equals 1 - omega at e; the result lives on map.image.
EdgeConfig rho(const Domain& window, const RhoMap& map, const EdgeConfig& omega);
// Same map, but the window must be closed under it.
EdgeConfig rho_in_place(const Domain& window, const EdgeConfig& omega);

class OffCriticalSurface : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Transition kernel from triangle configs (ids over triangle edges) to star
// configs. Rows sum to (y^3 + 3y^2)/q, which is 1 on the critical surface.
template <class S>
std::vector<std::vector<S>> star_triangle_kernel(const TriangleStar& ts, const S& y, const S& q);
extern template std::vector<std::vector<double>> star_triangle_kernel(const TriangleStar&, const double&,
                                                                      const double&);
extern template std::vector<std::vector<Rational>> star_triangle_kernel(const TriangleStar&, const Rational&,
                                                                        const Rational&);
extern template std::vector<std::vector<Algebraic>> star_triangle_kernel(const TriangleStar&,
                                                                         const Algebraic&, const Algebraic&);

// Star configuration with the same connections between A, B, C; an empty
// triangle maps at random. Throws OffCriticalSurface unless
// |y^3 + 3y^2 - q| <= 1e-9.
EdgeConfig star_triangle_map(const TriangleStar& ts, const EdgeConfig& triangle_config, double p, double q,
                             CounterStream& rng);

double es_joint_weight(const Domain& d, const PottsBoundary& tau, double p, const EdgeConfig& omega,
                       const PottsConfig& sigma);

class ColourConflict : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

PottsConfig sample_sigma_given_omega(const Domain& d, const EdgeConfig& omega, const PottsBoundary& tau, int q,
                                     CounterStream& rng);
EdgeConfig sample_omega_given_sigma(const Domain& d, const PottsConfig& sigma, double p, CounterStream& rng);
// Colour clusters of omega; clusters meeting a frame vertex take frame_colour
// when it is nonzero. The frame defaults to the domain boundary.
PottsConfig potts_from_fk(const Domain& d, const EdgeConfig& omega, int q, int frame_colour, CounterStream& rng,
                          const std::vector<int>* frame = nullptr);

// The two spin fields coherent with omega; the first has +1 on inner face 0.
std::pair<FaceSpinConfig, FaceSpinConfig> loops_to_spins(const FaceDomain& fd, const LoopConfig& omega);
LoopConfig spins_to_loops(const FaceDomain& fd, const FaceSpinConfig& sigma);

}  // namespace gibbslab
