#pragma once

// Binary trajectory snapshots. Layout (little-endian) in docs/trajectory-format.md.

#include "dcreact/fem1d.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

namespace dcreact {

inline constexpr char kTrajectoryMagic[8] = {'D', 'C', 'R', 'T', 'R', 'A', 'J', '\0'};
inline constexpr std::uint32_t kTrajectoryVersion = 1;

struct TrajectoryHeader {
  double T = 0.0;
  std::int64_t N = 0;
  double k = 0.0;
  std::int32_t order = 2;
  std::int32_t n_cells = 0;
  std::int32_t J = 1;
  BoundaryCondition bc = BoundaryCondition::HomogeneousDirichlet;

  bool operator==(const TrajectoryHeader&) const = default;
};

struct Trajectory {
  TrajectoryHeader header;
  std::vector<DofVector> states;  // time indices 0..N
};

class TrajectoryFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::uint32_t bc_code(BoundaryCondition bc);
BoundaryCondition bc_from_code(std::uint32_t code);

/// Writes states[0..N]; every state must have J * (n_cells + 1) entries.
void write_trajectory(const std::filesystem::path& path, const TrajectoryHeader& header,
                      std::span<const DofVector> states);
Trajectory read_trajectory(const std::filesystem::path& path);

}  // namespace dcreact
