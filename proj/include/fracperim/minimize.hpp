#pragma once

#include "fracperim/geometry.hpp"
#include "fracperim/kernels.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace fracperim {

enum class WeightScheme {
  /// w(i, j) = I(cell_i, cell_j): exact pair formula in 1-D; in 2-D a radial
  /// closed form with angular Gauss-Kronrod quadrature for cells up to two apart,
  /// tensor Gauss-Legendre beyond.
  Exact,
  /// Exact for offsets up to 1/8 of the grid along each axis (at least one cell),
  /// k_s(center_i - center_j) |cell|^2 beyond.
  Collocation,
};

/// Voxelized P_{k_s}(E, Omega) with fixed data outside Omega. The grid occupancy
/// holds the exterior data; its values inside Omega are ignored.
struct VoxelProblem {
  VoxelGrid grid;
  std::vector<std::uint8_t> omega_mask;
  double s = 0.5;
  KernelFamily fam;
  WeightScheme scheme = WeightScheme::Exact;
  /// w for each cell offset, indexed by offset_index; symmetric under negation.
  std::vector<double> offset_weights;
  /// Bound on the interaction of Omega cells with space beyond the grid, which
  /// the discrete energy leaves out. Infinite when Omega touches the grid boundary.
  double tail_bound = 0.0;
  /// Position of each cell in the offset table: w(i, j) = offset_weights[center + pos[j] - pos[i]].
  std::vector<std::ptrdiff_t> table_pos;
  std::ptrdiff_t table_center = 0;

  int dim() const { return grid.dim(); }
  std::size_t size() const { return grid.size(); }
  double weight(std::size_t i, std::size_t j) const {
    return offset_weights[static_cast<std::size_t>(table_center + table_pos[j] - table_pos[i])];
  }
  std::size_t free_count() const;
  /// Exterior data outside Omega, `inside` in Omega.
  std::vector<std::uint8_t> fill(bool inside) const;
};

/// Interaction of two grid cells that are `offset` cells apart (dimensions 1 and 2).
double cell_pair_weight(const KernelFamily& fam, double s, const Vec& cell, const std::vector<int>& offset);

VoxelProblem make_voxel_problem(VoxelGrid exterior_data, std::vector<std::uint8_t> omega_mask,
                                const KernelFamily& fam, double s, WeightScheme scheme = WeightScheme::Exact);

/// Grid of `resolution` cells over `box`; Omega and the exterior data are
/// sampled at cell centers.
VoxelProblem voxel_problem_from_regions(const Box& box, const std::vector<int>& resolution, const SetRegion& omega,
                                        const SetRegion& exterior, const KernelFamily& fam, double s,
                                        WeightScheme scheme = WeightScheme::Exact);

/// Sum of w(i, j) over unordered pairs with different occupancy and at least one
/// cell in Omega: the pairs (E n Omega, E^c) and (E^c n Omega, E n Omega^c), each once.
double discrete_energy(const VoxelProblem& p, const std::vector<std::uint8_t>& occupancy);

/// Same sum with Omega replaced by `mask`, e.g. an inner box Omega'.
double discrete_energy_within(const VoxelProblem& p, const std::vector<std::uint8_t>& occupancy,
                              const std::vector<std::uint8_t>& mask);

/// Throws std::invalid_argument when occupancy differs from the exterior data outside Omega.
void check_exterior(const VoxelProblem& p, const std::vector<std::uint8_t>& occupancy);

struct Schedule {
  /// Metropolis sweeps before the greedy descent.
  bool anneal = false;
  /// Initial temperature as a fraction of the largest per-cell total weight.
  double t0 = 0.05;
  double cooling = 0.85;
  int levels = 40;
  int sweeps_per_level = 4;
  /// Cap on greedy sweeps.
  int max_sweeps = 10000;
};

struct MinimizeTrace {
  /// Energy at the start and after every sweep.
  std::vector<double> energies;
  std::vector<std::uint8_t> occupancy;
  std::size_t flips = 0;
  /// False when the sweep cap stopped the greedy descent.
  bool converged = false;
  std::uint64_t seed = 0;
  double energy = 0.0;
};

/// Greedy single-cell flips in row-major order, optionally after annealing.
/// On convergence no single flip lowers the energy.
MinimizeTrace local_minimize(const VoxelProblem& p, std::vector<std::uint8_t> init, const Schedule& schedule,
                             std::uint64_t seed);

/// Best of `starts` runs: empty, full, then random fills drawn from `seed`.
MinimizeTrace multi_start_minimize(const VoxelProblem& p, const Schedule& schedule, std::uint64_t seed,
                                   int starts = 8);

/// Smallest energy change over single flips of free cells; non-negative at a local minimum.
double best_single_flip(const VoxelProblem& p, const std::vector<std::uint8_t>& occupancy);

struct BruteForceResult {
  double energy = 0.0;
  std::vector<std::uint8_t> occupancy;
};

/// Exhaustive minimum over all fillings of Omega; at most 24 free cells.
BruteForceResult brute_force_minimum(const VoxelProblem& p);

/// Grid, Omega and exterior data shared by the runs of a convergence study.
struct StudyTemplate {
  Box box;
  std::vector<int> resolution;
  SetRegion omega;
  SetRegion exterior;
  /// Per-cell exterior data (e.g. from a mask file); replaces `exterior` when non-empty.
  std::vector<std::uint8_t> exterior_cells;
  /// Omega', compactly inside Omega.
  SetRegion inner;
  KernelFamily fam;
  /// Anisotropic perimeter of the expected flat interface inside Omega'.
  double flat_target = 0.0;
  WeightScheme scheme = WeightScheme::Exact;
};

struct StudyEntry {
  double s = 0.0;
  MinimizeTrace trace;
  /// (1 - s) times the discrete energy restricted to Omega'.
  double rescaled_inner = 0.0;
  /// Cells that changed since the previous s, and the same count in layers (per grid column).
  std::size_t symdiff = 0;
  double layers = 0.0;
  /// Share of columns whose interface lies within one layer of the flat one.
  double flat_columns = 0.0;
};

struct StudyReport {
  std::vector<StudyEntry> entries;
  double flat_target = 0.0;
  bool bounded = false;
  bool stable = false;
  bool passed = false;
};

/// Minimizes at each s with multi_start_minimize, then checks rescaled energies
/// <= 2 flat_target and successive minimizers within 2 layers. Greedy descent
/// alone can stall at a pinned bump on the interface; annealing avoids that.
StudyReport minimizer_convergence_study(const StudyTemplate& t, const std::vector<double>& s_list,
                                        const Schedule& schedule, std::uint64_t seed);

/// Standard study: Omega = (-1/2, 1/2)^n at cell size 1/cells, a four-cell frame
/// of exterior data {x_n <= 0}, Omega' the concentric box at 75% scale.
StudyTemplate halfplane_study_template(const KernelFamily& fam, int cells = 32);

/// Occupancy as text, one line per row of the last axis, '0'/'1' characters.
std::string occupancy_to_text(const VoxelGrid& grid, const std::vector<std::uint8_t>& occupancy);

}  // namespace fracperim
