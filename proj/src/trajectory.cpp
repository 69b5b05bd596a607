#include "dcreact/trajectory.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace dcreact {

namespace {

template <class T>
void put(std::vector<char>& buf, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  buf.insert(buf.end(), bytes, bytes + sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::vector<char> data) : data_(std::move(data)) {}

  template <class T>
  T get() {
    if (pos_ + sizeof(T) > data_.size()) throw TrajectoryFormatError("trajectory file is truncated");
    char bytes[sizeof(T)];
    std::memcpy(bytes, data_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
  }

  void expect_magic() {
    if (data_.size() < sizeof(kTrajectoryMagic) ||
        std::memcmp(data_.data(), kTrajectoryMagic, sizeof(kTrajectoryMagic)) != 0)
      throw TrajectoryFormatError("not a trajectory file (bad magic)");
    pos_ = sizeof(kTrajectoryMagic);
  }

  bool at_end() const { return pos_ == data_.size(); }

 private:
  std::vector<char> data_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint32_t bc_code(BoundaryCondition bc) { return bc == BoundaryCondition::HomogeneousDirichlet ? 0u : 1u; }

BoundaryCondition bc_from_code(std::uint32_t code) {
  switch (code) {
    case 0: return BoundaryCondition::HomogeneousDirichlet;
    case 1: return BoundaryCondition::HomogeneousNeumann;
    default: throw TrajectoryFormatError("unknown boundary condition code " + std::to_string(code));
  }
}

void write_trajectory(const std::filesystem::path& path, const TrajectoryHeader& header,
                      std::span<const DofVector> states) {
  if (header.N < 0 || static_cast<std::int64_t>(states.size()) != header.N + 1)
    throw std::invalid_argument("trajectory needs exactly N + 1 states");
  const std::int64_t n_dofs = static_cast<std::int64_t>(header.J) * (header.n_cells + 1);
  for (const auto& s : states)
    if (s.size() != n_dofs) throw std::invalid_argument("trajectory state has the wrong size");

  std::vector<char> buf(kTrajectoryMagic, kTrajectoryMagic + sizeof(kTrajectoryMagic));
  put<std::uint32_t>(buf, kTrajectoryVersion);
  put<double>(buf, header.T);
  put<std::int64_t>(buf, header.N);
  put<double>(buf, header.k);
  put<std::int32_t>(buf, header.order);
  put<std::int32_t>(buf, header.n_cells);
  put<std::int32_t>(buf, header.J);
  put<std::uint32_t>(buf, bc_code(header.bc));
  for (const auto& s : states)
    for (Eigen::Index i = 0; i < s.size(); ++i) put<double>(buf, s[i]);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

Trajectory read_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  Reader r(std::vector<char>(std::istreambuf_iterator<char>(in), {}));
  r.expect_magic();
  const auto version = r.get<std::uint32_t>();
  if (version != kTrajectoryVersion)
    throw TrajectoryFormatError("unsupported trajectory version " + std::to_string(version));

  Trajectory t;
  TrajectoryHeader& h = t.header;
  h.T = r.get<double>();
  h.N = r.get<std::int64_t>();
  h.k = r.get<double>();
  h.order = r.get<std::int32_t>();
  h.n_cells = r.get<std::int32_t>();
  h.J = r.get<std::int32_t>();
  h.bc = bc_from_code(r.get<std::uint32_t>());
  if (h.N < 0 || h.n_cells < 1 || h.J < 1) throw TrajectoryFormatError("invalid trajectory header");

  const Eigen::Index n_dofs = static_cast<Eigen::Index>(h.J) * (h.n_cells + 1);
  t.states.reserve(static_cast<std::size_t>(h.N + 1));
  for (std::int64_t n = 0; n <= h.N; ++n) {
    DofVector s(n_dofs);
    for (Eigen::Index i = 0; i < n_dofs; ++i) s[i] = r.get<double>();
    t.states.push_back(std::move(s));
  }
  if (!r.at_end()) throw TrajectoryFormatError("trailing bytes after trajectory data");
  return t;
}

}  // namespace dcreact
