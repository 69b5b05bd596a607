#include "dcreact/harness.hpp"

#include "dcreact/trajectory.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace dcreact {

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string exact_double(double v) { return fmt("%.17g", v); }

double distance(const FemSpace& space, const DofVector& a, const DofVector& b) {
  if (a.size() != b.size()) throw AlignmentError("state sizes differ");
  return l2_norm(space, a - b);
}

}  // namespace

double max_l2_error(const FemSpace& space, std::span<const DofVector> states, int N,
                    std::span<const DofVector> reference, int N_ref) {
  if (N < 1 || N_ref < 1) throw AlignmentError("step counts must be positive");
  if (N_ref % N != 0)
    throw AlignmentError("reference N=" + std::to_string(N_ref) + " is not a multiple of N=" + std::to_string(N));
  if (states.size() < static_cast<std::size_t>(N) + 1 || reference.size() < static_cast<std::size_t>(N_ref) + 1)
    throw AlignmentError("series shorter than its step count");
  const int stride = N_ref / N;
  double err = 0.0;
  for (int n = 0; n <= N; ++n)
    err = std::max(err, distance(space, states[static_cast<std::size_t>(n)],
                                 reference[static_cast<std::size_t>(n) * stride]));
  return err;
}

double max_l2_error(const FemSpace& space, const StageSeries& series, const StageSeries& reference) {
  const double T = series.k() * series.N();
  const double T_ref = reference.k() * reference.N();
  if (std::abs(T - T_ref) > 1e-12 * std::max(1.0, std::abs(T)))
    throw AlignmentError("series and reference cover different intervals");
  return max_l2_error(space, series.states(), series.N(), reference.states(), reference.N());
}

double max_l2_error(const FemSpace& space, const StageSeries& series, const SpaceTimeField& exact) {
  return max_l2_error(space, series, NodalReference([&](double t) {
                        return interpolate(space, [&](double x, std::span<double> out) { exact(x, t, out); });
                      }));
}

double max_l2_error(const FemSpace& space, const StageSeries& series, const NodalReference& reference) {
  double err = 0.0;
  for (int n = 0; n <= series.N(); ++n)
    err = std::max(err, distance(space, series.at(n), reference(n * series.k())));
  return err;
}

double observed_order(double e1, double e2, long N1, long N2) {
  if (!(e1 > 0.0) || !(e2 > 0.0)) throw std::domain_error("observed order needs positive errors");
  if (N1 < 1 || N2 <= N1) throw std::domain_error("observed order needs 0 < N1 < N2");
  return std::log(e1 / e2) / std::log(static_cast<double>(N2) / static_cast<double>(N1));
}

std::string ReferenceSpec::describe() const {
  if (kind == Kind::Exact) return "exact";
  return "dc(" + std::to_string(order) + "," + std::to_string(N) + ")";
}

void StudyConfig::validate() const {
  if (orders.empty()) throw std::invalid_argument("study needs at least one order");
  if (N_list.empty()) throw std::invalid_argument("study needs at least one step count");
  for (int o : orders)
    if (o < 2 || o % 2 != 0) throw std::invalid_argument("DC orders must be even and >= 2");
  for (int N : N_list)
    if (N < 1) throw std::invalid_argument("step counts must be positive");
  if (n_cells < 2) throw std::invalid_argument("n_cells must be >= 2");
  if (T && !(*T > 0.0)) throw std::invalid_argument("final time must be positive");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  newton.validate();
  if (reference.kind == ReferenceSpec::Kind::Dc) {
    if (reference.order < 2 || reference.order % 2 != 0 || reference.N < 1)
      throw std::invalid_argument("invalid reference run");
    for (int N : N_list)
      if (reference.N % N != 0)
        throw std::invalid_argument("reference N=" + std::to_string(reference.N) + " is not a multiple of N=" +
                                    std::to_string(N));
  } else if (!make_problem(problem).exact) {
    throw std::invalid_argument("problem '" + problem + "' has no exact solution; use a dc reference");
  }
}

double StudyConfig::final_time() const { return T ? *T : make_problem(problem).default_T; }

StudyConfig bistable_study_defaults() {
  StudyConfig cfg;
  cfg.problem = "bistable";
  cfg.orders = {2, 4, 6, 8};
  cfg.N_list = {40, 90, 180, 360, 450, 900, 1800};
  cfg.reference = ReferenceSpec::dc(10, 1800);
  cfg.n_cells = 1000;
  cfg.T = 0.0295;
  return cfg;
}

const ConvergenceRow* ConvergenceReport::find(int order, int N) const {
  for (const auto& r : rows)
    if (r.order == order && r.N == N) return &r;
  return nullptr;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string reference_cache_key(const StudyConfig& cfg) {
  std::ostringstream s;
  s << cfg.problem << '|' << cfg.reference.order << '|' << cfg.reference.N << '|' << cfg.n_cells << '|'
    << exact_double(cfg.final_time()) << '|' << exact_double(cfg.newton.abs_tol) << '|'
    << exact_double(cfg.newton.rel_tol) << '|' << cfg.newton.max_iter;
  std::ostringstream hex;
  hex << std::hex << std::setw(16) << std::setfill('0') << fnv1a(s.str());
  return hex.str();
}

namespace {

std::uint64_t states_checksum(std::span<const DofVector> states) {
  std::string bytes;
  for (const auto& s : states)
    bytes.append(reinterpret_cast<const char*>(s.data()), static_cast<std::size_t>(s.size()) * sizeof(double));
  return fnv1a(bytes);
}

nlohmann::json sidecar(const StudyConfig& cfg, const std::string& key, std::uint64_t checksum) {
  return {{"key", key},
          {"problem", cfg.problem},
          {"order", cfg.reference.order},
          {"N", cfg.reference.N},
          {"n_cells", cfg.n_cells},
          {"T", cfg.final_time()},
          {"abs_tol", cfg.newton.abs_tol},
          {"rel_tol", cfg.newton.rel_tol},
          {"max_iter", cfg.newton.max_iter},
          {"checksum", checksum}};
}

std::optional<std::vector<DofVector>> load_cached(const StudyConfig& cfg, const std::string& key,
                                                  std::vector<std::string>& warnings) {
  const auto bin = cfg.cache_dir / ("ref-" + key + ".bin");
  const auto meta = cfg.cache_dir / ("ref-" + key + ".json");
  if (!std::filesystem::exists(bin) && !std::filesystem::exists(meta)) return std::nullopt;
  try {
    std::ifstream in(meta);
    const nlohmann::json stored = nlohmann::json::parse(in);
    Trajectory t = read_trajectory(bin);
    const std::uint64_t checksum = states_checksum(t.states);
    if (stored != sidecar(cfg, key, checksum)) throw std::runtime_error("sidecar metadata mismatch");
    if (t.header.N != cfg.reference.N || t.header.n_cells != cfg.n_cells)
      throw std::runtime_error("trajectory header mismatch");
    return std::move(t.states);
  } catch (const std::exception& e) {
    warnings.push_back("reference cache " + bin.string() + " unusable (" + e.what() + "); recomputing");
    return std::nullopt;
  }
}

void store_cached(const StudyConfig& cfg, const std::string& key, const ProblemSpec& problem,
                  std::span<const DofVector> states) {
  std::filesystem::create_directories(cfg.cache_dir);
  TrajectoryHeader h;
  h.T = cfg.final_time();
  h.N = cfg.reference.N;
  h.k = h.T / cfg.reference.N;
  h.order = cfg.reference.order;
  h.n_cells = cfg.n_cells;
  h.J = problem.J;
  h.bc = problem.bc;
  write_trajectory(cfg.cache_dir / ("ref-" + key + ".bin"), h, states);
  std::ofstream meta(cfg.cache_dir / ("ref-" + key + ".json"));
  meta << sidecar(cfg, key, states_checksum(states)).dump(2) << '\n';
}

}  // namespace

ConvergenceReport run_study(const StudyConfig& cfg) {
  cfg.validate();
  const ProblemSpec problem = make_problem(cfg.problem);
  const double T = cfg.final_time();
  const FemSpace space(Mesh1D(problem.left, problem.right, cfg.n_cells), problem.J, problem.bc);

  ConvergenceReport report;
  report.problem = cfg.problem;
  report.reference = cfg.reference.describe();
  report.n_cells = cfg.n_cells;
  report.T = T;

  std::vector<DofVector> reference;
  if (cfg.reference.kind == ReferenceSpec::Kind::Dc) {
    const std::string key = reference_cache_key(cfg);
    std::optional<std::vector<DofVector>> cached;
    if (!cfg.cache_dir.empty()) cached = load_cached(cfg, key, report.warnings);
    if (cached) {
      reference = std::move(*cached);
    } else {
      const DcRun ref = run_dc(cfg.reference.order, problem, space, TimeGrid(T, cfg.reference.N), cfg.newton);
      const auto& all = ref.final_stage().states();
      reference.assign(all.begin(), all.begin() + cfg.reference.N + 1);
      if (!cfg.cache_dir.empty()) store_cached(cfg, key, problem, reference);
    }
  }

  double scale = 0.0;
  for (const auto& s : reference) scale = std::max(scale, l2_norm(space, s));

  std::set<std::pair<int, int>> jobs;
  for (int o : cfg.orders)
    for (int N : cfg.N_list) jobs.insert({o, N});
  std::vector<std::pair<int, int>> job_list(jobs.begin(), jobs.end());
  report.rows.resize(job_list.size());

  auto run_row = [&](std::size_t idx) {
    const auto [order, N] = job_list[idx];
    ConvergenceRow row;
    row.order = order;
    row.N = N;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const DcRun run = run_dc(order, problem, space, TimeGrid(T, N), cfg.newton);
      const StageSeries& s = run.final_stage();
      row.solves = run.solves.total();
      if (cfg.reference.kind == ReferenceSpec::Kind::Dc) {
        row.error = max_l2_error(space, s.states(), N, reference, cfg.reference.N);
      } else {
        double ref_scale = 0.0;
        row.error = max_l2_error(space, s, NodalReference([&](double t) {
                                   DofVector v = interpolate(space, [&](double x, std::span<double> out) {
                                     problem.exact->value(x, t, out);
                                   });
                                   ref_scale = std::max(ref_scale, l2_norm(space, v));
                                   return v;
                                 }));
        row.floor_limited = row.error <= 100.0 * std::numeric_limits<double>::epsilon() * ref_scale;
      }
      row.squared_error = row.error * row.error;
      if (cfg.reference.kind == ReferenceSpec::Kind::Dc)
        row.floor_limited = row.error <= 100.0 * std::numeric_limits<double>::epsilon() * scale;
      if (row.floor_limited) row.note = "at binary64 resolution";
    } catch (const std::exception& e) {
      row.failed = true;
      row.note = e.what();
    }
    row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.rows[idx] = std::move(row);
  };

  if (cfg.threads == 1) {
    for (std::size_t i = 0; i < job_list.size(); ++i) run_row(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < cfg.threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < job_list.size(); i = next++) run_row(i);
      });
    for (auto& th : pool) th.join();
  }

  compute_observed_orders(report);
  if (!cfg.outputs.csv.empty()) emit_report(report, ReportFormat::Csv, cfg.outputs.csv);
  if (!cfg.outputs.json.empty()) emit_report(report, ReportFormat::Json, cfg.outputs.json);
  if (!cfg.outputs.markdown.empty()) emit_report(report, ReportFormat::Markdown, cfg.outputs.markdown);
  return report;
}

void compute_observed_orders(ConvergenceReport& report) {
  std::stable_sort(report.rows.begin(), report.rows.end(), [](const auto& a, const auto& b) {
    return a.order != b.order ? a.order < b.order : a.N < b.N;
  });
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    ConvergenceRow& row = report.rows[i];
    row.observed_order.reset();
    row.observed_order_squared.reset();
    if (i == 0 || row.failed) continue;
    const ConvergenceRow& prev = report.rows[i - 1];
    if (prev.order != row.order || prev.failed || prev.N >= row.N) continue;
    if (prev.error > 0.0 && row.error > 0.0) {
      row.observed_order = observed_order(prev.error, row.error, prev.N, row.N);
      row.observed_order_squared = observed_order(prev.squared_error, row.squared_error, prev.N, row.N);
    }
  }
}

namespace {

const char* kCsvHeader =
    "order,N,error,squared_error,observed_order,observed_order_of_square,solves,wall_time,status,note";

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string opt(const std::optional<double>& v) { return v ? exact_double(*v) : ""; }

std::string status(const ConvergenceRow& r) {
  if (r.failed) return "failed";
  return r.floor_limited ? "floor" : "ok";
}

std::string cell(double e, const std::optional<double>& o) {
  std::string s = fmt("%.2e", e);
  if (o) s += "(" + fmt("%.2f", *o) + ")";
  return s;
}

void write_markdown_table(const ConvergenceReport& report, std::ostream& out, bool squared) {
  std::set<int> orders;
  std::set<int> Ns;
  for (const auto& r : report.rows) {
    orders.insert(r.order);
    Ns.insert(r.N);
  }
  out << "| N |";
  for (int o : orders) out << " DC" << o << " |";
  out << "\n|---|";
  for (std::size_t i = 0; i < orders.size(); ++i) out << "---|";
  out << '\n';
  for (int N : Ns) {
    out << "| " << N << " |";
    for (int o : orders) {
      const ConvergenceRow* r = report.find(o, N);
      out << ' ';
      if (r == nullptr) {
      } else if (r->failed) {
        out << "failed";
      } else {
        out << (squared ? cell(r->squared_error, r->observed_order_squared) : cell(r->error, r->observed_order));
        if (r->floor_limited) out << '*';
      }
      out << " |";
    }
    out << '\n';
  }
}

}  // namespace

void write_report(const ConvergenceReport& report, ReportFormat format, std::ostream& out) {
  switch (format) {
    case ReportFormat::Csv:
      out << kCsvHeader << '\n';
      for (const auto& r : report.rows)
        out << r.order << ',' << r.N << ',' << exact_double(r.error) << ',' << exact_double(r.squared_error) << ','
            << opt(r.observed_order) << ',' << opt(r.observed_order_squared) << ',' << r.solves << ','
            << exact_double(r.wall_time) << ',' << status(r) << ',' << csv_quote(r.note) << '\n';
      break;
    case ReportFormat::Json: {
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& r : report.rows) {
        nlohmann::json j = {{"order", r.order},
                            {"N", r.N},
                            {"error", r.error},
                            {"squared_error", r.squared_error},
                            {"observed_order", nullptr},
                            {"observed_order_of_square", nullptr},
                            {"solves", r.solves},
                            {"wall_time", r.wall_time},
                            {"status", status(r)},
                            {"note", r.note}};
        if (r.observed_order) j["observed_order"] = *r.observed_order;
        if (r.observed_order_squared) j["observed_order_of_square"] = *r.observed_order_squared;
        rows.push_back(std::move(j));
      }
      const nlohmann::json doc = {{"problem", report.problem}, {"reference", report.reference},
                                  {"n_cells", report.n_cells}, {"T", report.T},
                                  {"warnings", report.warnings}, {"rows", rows}};
      out << doc.dump(2) << '\n';
      break;
    }
    case ReportFormat::Markdown:
      if (report.rows.empty()) {
        out << "| N |\n|---|\n";
        break;
      }
      out << "Max-in-time L2 error (observed order), problem " << report.problem << ", reference "
          << report.reference << ", " << report.n_cells << " cells, T = " << report.T << "\n\n";
      write_markdown_table(report, out, false);
      out << "\nSquared L2 error (observed order)\n\n";
      write_markdown_table(report, out, true);
      break;
  }
}

void emit_report(const ConvergenceReport& report, ReportFormat format, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_report(report, format, out);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string format_report(const ConvergenceReport& report, ReportFormat format) {
  std::ostringstream s;
  write_report(report, format, s);
  return s.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) throw std::invalid_argument("unterminated quote in report CSV");
  return fields;
}

std::optional<double> parse_opt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::stod(s);
}

}  // namespace

std::vector<ConvergenceRow> parse_report_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw std::invalid_argument("report CSV header mismatch");
  std::vector<ConvergenceRow> rows;
  std::string record;
  while (std::getline(in, line)) {
    record += line;
    if (std::count(record.begin(), record.end(), '"') % 2 != 0) {
      record += '\n';
      continue;
    }
    if (record.empty()) continue;
    const auto f = split_csv_line(record);
    record.clear();
    if (f.size() != 10) throw std::invalid_argument("report CSV row has " + std::to_string(f.size()) + " fields");
    ConvergenceRow r;
    r.order = std::stoi(f[0]);
    r.N = std::stoi(f[1]);
    r.error = std::stod(f[2]);
    r.squared_error = std::stod(f[3]);
    r.observed_order = parse_opt(f[4]);
    r.observed_order_squared = parse_opt(f[5]);
    r.solves = std::stol(f[6]);
    r.wall_time = std::stod(f[7]);
    if (f[8] == "failed") {
      r.failed = true;
    } else if (f[8] == "floor") {
      r.floor_limited = true;
    } else if (f[8] != "ok") {
      throw std::invalid_argument("unknown row status '" + f[8] + "'");
    }
    r.note = f[9];
    rows.push_back(std::move(r));
  }
  if (!record.empty()) throw std::invalid_argument("unterminated quote in report CSV");
  return rows;
}

}  // namespace dcreact
