// Seeded fixture families used by the verification suites: random token
// measures and layer stacks, Lipschitz space-time contexts (paths pushed
// from time grids plus a mass-sigma atom at t=0), identifiability pairs
// across dead time gaps, and the masked-measure convergence sequences.

#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "ictx/causal.hpp"

namespace ictx {

Vec random_point(std::mt19937_64& rng, int d, double scale);

/// Uniform-weight measure with points uniform in [-scale, scale]^d.
ParticleMeasure random_particle_measure(std::mt19937_64& rng, int n, int d,
                                        double scale);

/// Same support with random (normalized) positive weights.
ParticleMeasure random_weighted_measure(std::mt19937_64& rng, int n, int d,
                                        double scale);

MultiHeadParams random_attention(std::mt19937_64& rng, int d, int heads,
                                 int k_dim, double scale);

MlpParams random_mlp(std::mt19937_64& rng, int d, int hidden, double scale);

/// Alternating attention/MLP stack of `depth` attention layers.
LayerStack random_stack(std::mt19937_64& rng, int depth, int d, int max_heads,
                        bool masked, double scale);

/// (measure, query) pairs for algebra and elementary-map checks.
std::vector<std::pair<ParticleMeasure, Vec>> random_pairs(std::mt19937_64& rng,
                                                          int count, int n, int d,
                                                          double scale);

struct LipFamilyParams {
  int d = 2;
  double lipschitz = 1.0;   // C
  double sigma = 0.3;       // mass of the t=0 atom
  int path_points = 12;
  int atom_points = 2;
  double atom_spread = 0.05;
};

/// A C-Lipschitz path context: particles along a straight space path over
/// a uniform time grid, plus the time-0 atom.
SpaceTimeMeasure lip_path_fixture(std::mt19937_64& rng, const LipFamilyParams& params);

/// Fixtures over the sigma/C family grid used by the causality checks.
std::vector<CausalFixture> lip_causal_fixtures(std::uint64_t seed, int count, int d);

/// Contexts with a dead time interval and (t, t') pairs across it.
std::vector<IdentFixture> lip_ident_fixtures(std::uint64_t seed, int count, int d);

/// Fixture with a far outlier particle at a late time; separates causal
/// from non-causal maps.
CausalFixture future_outlier_fixture(std::uint64_t seed, int d);

/// Geometric-time context for the masked continuity probe: atom at 0 plus
/// particles at times 2^-j with sharply decaying weights.
SpaceTimeMeasure geometric_time_fixture(int levels, double sigma);

/// Masked-measure convergence sequences (cases: 1 has t_n -> t > 0,
/// 2 has t_n -> 0 from above, 3 has t_n = t = 0).
struct ConvergencePoint {
  SpaceTimeMeasure mu_n;
  double t_n = 0.0;
  SpaceTimeMeasure mu_limit;
  double t_limit = 0.0;
};
ConvergencePoint convergence_fixture(int which_case, int n);

}  // namespace ictx
