#pragma once

// Convergence studies: errors against references, observed orders and
// Table-style reports.

#include "dcreact/dc_time.hpp"
#include "dcreact/problems.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dcreact {

class AlignmentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// max_{n=0..N} ||u^n - ref(t_n)||_L2 where the reference has N_ref steps over
/// the same interval; N_ref must be a multiple of N. Entries past index N
/// (N_ref) are ignored.
double max_l2_error(const FemSpace& space, std::span<const DofVector> states, int N,
                    std::span<const DofVector> reference, int N_ref);
double max_l2_error(const FemSpace& space, const StageSeries& series, const StageSeries& reference);

/// Against a closed-form solution, interpolated at the nodes at each t_n.
double max_l2_error(const FemSpace& space, const StageSeries& series, const SpaceTimeField& exact);

/// Against a reference given directly as nodal coefficients at time t.
using NodalReference = std::function<DofVector(double t)>;
double max_l2_error(const FemSpace& space, const StageSeries& series, const NodalReference& reference);

/// ln(e1/e2) / ln(N2/N1).
double observed_order(double e1, double e2, long N1, long N2);

struct ReferenceSpec {
  enum class Kind { Exact, Dc };
  Kind kind = Kind::Exact;
  int order = 10;
  int N = 0;

  static ReferenceSpec exact() { return {}; }
  static ReferenceSpec dc(int order, int N) { return {Kind::Dc, order, N}; }
  std::string describe() const;
};

struct StudyOutputs {
  std::filesystem::path csv;
  std::filesystem::path json;
  std::filesystem::path markdown;
};

struct StudyConfig {
  std::string problem = "heat";
  std::vector<int> orders;
  std::vector<int> N_list;
  ReferenceSpec reference;
  int n_cells = 64;
  /// Final time; the problem's default when unset.
  std::optional<double> T;
  NewtonConfig newton;
  /// Reference trajectories are cached here when non-empty.
  std::filesystem::path cache_dir;
  StudyOutputs outputs;
  /// Rows run concurrently on this many threads; results do not depend on it.
  int threads = 1;

  /// Throws std::invalid_argument on odd orders, empty lists, misaligned
  /// reference grids or an exact reference for a problem without one.
  void validate() const;
  double final_time() const;
};

/// Bistable study with n_cells = 1000, T = 0.0295, reference DC10 at N = 1800.
StudyConfig bistable_study_defaults();

struct ConvergenceRow {
  int order = 2;
  int N = 0;
  double error = 0.0;
  double squared_error = 0.0;
  std::optional<double> observed_order;
  std::optional<double> observed_order_squared;
  long solves = 0;
  double wall_time = 0.0;
  bool failed = false;
  /// Error at or below the binary64 resolution of the reference.
  bool floor_limited = false;
  std::string note;

  bool operator==(const ConvergenceRow&) const = default;
};

struct ConvergenceReport {
  std::string problem;
  std::string reference;
  int n_cells = 0;
  double T = 0.0;
  std::vector<ConvergenceRow> rows;
  std::vector<std::string> warnings;

  const ConvergenceRow* find(int order, int N) const;
};

/// Runs every (order, N) pair. Failed trajectories are recorded as failed rows.
ConvergenceReport run_study(const StudyConfig& cfg);

/// Fills observed orders from consecutive successful rows of equal order
/// (rows sorted by order, then N).
void compute_observed_orders(ConvergenceReport& report);

enum class ReportFormat { Csv, Json, Markdown };

void write_report(const ConvergenceReport& report, ReportFormat format, std::ostream& out);
void emit_report(const ConvergenceReport& report, ReportFormat format, const std::filesystem::path& path);
std::string format_report(const ConvergenceReport& report, ReportFormat format);

/// Inverse of the CSV writer (rows only).
std::vector<ConvergenceRow> parse_report_csv(const std::string& text);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& text);

/// Cache key of a reference trajectory.
std::string reference_cache_key(const StudyConfig& cfg);

}  // namespace dcreact
