#pragma once

#include <filesystem>
#include <vector>

#include "adaptrom/linalg.hpp"
#include "adaptrom/nssolver.hpp"
#include "adaptrom/pod.hpp"
#include "adaptrom/rom.hpp"

namespace adaptrom {

namespace fs = std::filesystem;

// Binary array files: the magic "ADRF", a uint32 element code (1 = float64,
// 2 = int32), uint64 rows, uint64 cols, then the entries in column-major
// order. Everything is little-endian.
void write_matrix(const fs::path& file, const Matrix& m);
Matrix read_matrix(const fs::path& file);
void write_vector(const fs::path& file, const Vector& v);
Vector read_vector(const fs::path& file);
void write_ints(const fs::path& file, const std::vector<int>& v);
std::vector<int> read_ints(const fs::path& file);

/// Snapshot archive directory:
///   manifest.json              run parameters and per-step records
///   forest_vertices.bin        2 x V vertex coordinates
///   forest_triangles.bin       4 x T (v0, v1, v2, parent)
///   mesh_%04d.bin              leaf ids of the step mesh (0: initial mesh)
///   vel_%04d.bin, prs_%04d.bin homogeneous velocity and pressure (vel_0000 is y_h^0)
///   lift_%04d.bin              lifting values on the step space
void save_snapshots(const SnapshotSet& set, const fs::path& dir);
SnapshotSet load_snapshots(const fs::path& dir);

/// manifest.json, modes.bin, eigenvalues.bin, spectrum.bin, xi.bin.
void save_pod(const PodBasis& basis, const fs::path& dir);
PodBasis load_pod(const fs::path& dir);

/// manifest.json with the method tag, times and Newton counts;
/// velocity.bin and pressure.bin hold one column per time level.
void save_trajectory(const RomTrajectory& tr, const fs::path& dir);
RomTrajectory load_trajectory(const fs::path& dir);

/// manifest.json with sizes; mass.bin, stiffness.bin, tensor.bin, coupling.bin,
/// and lift_jacobian.bin, rhs.bin, continuity.bin with one column per step.
void save_operators(const ReducedOperators& ops, const fs::path& dir);
ReducedOperators load_operators(const fs::path& dir);

}  // namespace adaptrom
