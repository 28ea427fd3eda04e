#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <spdlog/fmt/fmt.h>

#include "bsf/bnp.hpp"
#include "bsf/errors.hpp"
#include "bsf/heuristics.hpp"
#include "bsf/instances.hpp"
#include "bsf/log.hpp"
#include "bsf/models.hpp"
#include "bsf/oracle.hpp"

namespace bsf {

enum class Method { Approx, Heur, Flow, FlowMaxMin, Cyc, Bp, Oracle };

inline const std::vector<Method>& all_methods() {
  static const std::vector<Method> m{Method::Approx, Method::Heur, Method::Flow, Method::FlowMaxMin,
                                     Method::Cyc,    Method::Bp,   Method::Oracle};
  return m;
}

inline const char* to_string(Method m) {
  switch (m) {
    case Method::Approx: return "approx";
    case Method::Heur: return "heur";
    case Method::Flow: return "flow";
    case Method::FlowMaxMin: return "flow-maxmin";
    case Method::Cyc: return "cyc";
    case Method::Bp: return "bp";
    case Method::Oracle: return "oracle";
  }
  return "?";
}

inline Method method_from_string(const std::string& s) {
  for (Method m : all_methods())
    if (s == to_string(m)) return m;
  throw InvalidArgument("unknown method '" + s + "'");
}

/// Comma-separated method names; "all" expands to every method.
inline std::vector<Method> parse_methods(const std::string& list) {
  std::vector<Method> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (item == "all") {
      for (Method m : all_methods()) out.push_back(m);
      continue;
    }
    out.push_back(method_from_string(item));
  }
  if (out.empty()) throw InvalidArgument("no methods given");
  return out;
}

/// Status words used in the CSV.
namespace run_status {
inline constexpr const char* kOptimal = "optimal";
inline constexpr const char* kFeasible = "feasible";
inline constexpr const char* kTimeLimit = "time_limit";  // no solution
inline constexpr const char* kInfeasible = "infeasible";  // rejected input
inline constexpr const char* kTooLarge = "too_large";
}  // namespace run_status

struct RunRecord {
  std::string instance;
  Method method = Method::Approx;
  std::string status;
  std::optional<double> value, bound, gap;
  double time_ms = 0.0;
  long nodes = 0;
  long columns = 0;

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

/// (value - bound) / max(1, value) for min-max; max-min bounds sit above the
/// value, so the difference is flipped.
inline std::optional<double> record_gap(Method m, std::optional<double> value, std::optional<double> bound) {
  if (!value || !bound || !std::isfinite(*value) || !std::isfinite(*bound)) return std::nullopt;
  const double diff = m == Method::FlowMaxMin ? *bound - *value : *value - *bound;
  return diff / std::max(1.0, *value);
}

struct RunOptions {
  double time_limit = 60.0;  // seconds
  std::uint64_t seed = 1;
};

struct RunOutcome {
  RunRecord record;
  std::optional<SpanningKForest> forest;
  std::string message;  // why the input was rejected, if it was
};

namespace detail {

/// Best known forest with exactly k trees from k_approx and the heuristic.
struct StartPoint {
  SpanningKForest forest;
  HeuristicResult heuristic;
};

inline StartPoint start_point(const WeightedGraph& g, int k, double time_limit) {
  StartPoint s;
  s.forest = k_approx(g, k);
  HeuristicOptions ho;
  ho.time_limit = std::min(10.0, 0.1 * time_limit);
  s.heuristic = heuristic_bnb(g, k, ho);
  if (s.heuristic.forest.k() == k && s.heuristic.forest.value_minmax < s.forest.value_minmax)
    s.forest = s.heuristic.forest;
  return s;
}

inline const char* status_of(MipStatus s) {
  switch (s) {
    case MipStatus::Optimal: return run_status::kOptimal;
    case MipStatus::Feasible: return run_status::kFeasible;
    case MipStatus::TimeLimit: return run_status::kTimeLimit;
    case MipStatus::Infeasible: return run_status::kInfeasible;
  }
  return "?";
}

inline void fill_from_mip(RunRecord& r, const MipResult& res) {
  r.status = status_of(res.status);
  r.nodes = res.nodes;
  if (res.has_solution()) r.value = std::round(res.objective);
  if (std::isfinite(res.bound)) {
    // objectives are integral weights; drop LP round-off
    const double near = std::round(res.bound);
    r.bound = std::abs(res.bound - near) < 1e-6 ? near : res.bound;
  }
}

}  // namespace detail

/// Runs one method on one instance. Input errors (disconnected graph, bad k,
/// oracle size) become a status, not an exception.
inline RunOutcome run_method(const Instance& inst, const std::string& id, Method method, const RunOptions& opt = {}) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto left = [&] {
    return std::max(0.0, opt.time_limit - std::chrono::duration<double>(Clock::now() - start).count());
  };
  const WeightedGraph& g = inst.graph;
  const int k = inst.k;
  RunOutcome out;
  RunRecord& r = out.record;
  r.instance = id;
  r.method = method;
  try {
    if (k < 1 || k > g.num_vertices()) throw InvalidArgument("k must lie in [1, n]");
    if (!is_connected(g)) throw DisconnectedGraph("graph is not connected");
    switch (method) {
      case Method::Approx: {
        out.forest = k_approx(g, k);
        r.status = run_status::kFeasible;
        r.value = static_cast<double>(out.forest->value_minmax);
        r.bound = static_cast<double>(valid_forest_bound(g, kruskal_mst(g), k));
        break;
      }
      case Method::Heur: {
        HeuristicOptions ho;
        ho.time_limit = opt.time_limit;
        auto h = heuristic_bnb(g, k, ho);
        out.forest = h.forest;
        r.status = run_status::kFeasible;
        r.value = static_cast<double>(h.ub);
        r.bound = static_cast<double>(valid_forest_bound(g, kruskal_mst(g), k));
        r.nodes = h.nodes_expanded;
        break;
      }
      case Method::Flow: {
        auto sp = detail::start_point(g, k, opt.time_limit);
        auto fm = build_flow_minmax(g, k, sp.forest.value_minmax);
        fm.spec.warm_start = flow_point(g, fm, sp.forest);
        MipOptions mo;
        mo.time_limit = left();
        auto res = solve_mip(fm.spec, mo);
        detail::fill_from_mip(r, res);
        if (res.has_solution()) out.forest = extract_forest_from_flow(g, fm, res.solution);
        break;
      }
      case Method::FlowMaxMin: {
        auto fm = build_flow_maxmin(g, k, max_spanning_tree(g).weight);
        MipOptions mo;
        mo.time_limit = left();
        auto res = solve_mip(fm.spec, mo);
        detail::fill_from_mip(r, res);
        if (res.has_solution()) {
          out.forest = extract_forest_from_flow(g, fm, res.solution);
          r.value = static_cast<double>(out.forest->value_maxmin);
        }
        break;
      }
      case Method::Cyc: {
        auto sp = detail::start_point(g, k, opt.time_limit);
        auto cm = build_cycle_minmax(g, k);
        cm.spec.warm_start = cycle_point(g, cm, sp.forest);
        MipOptions mo;
        mo.time_limit = left();
        auto res = solve_mip(cm.spec, mo);
        detail::fill_from_mip(r, res);
        if (res.has_solution()) out.forest = extract_forest_from_cycle(g, cm, res.solution);
        break;
      }
      case Method::Bp: {
        BnPOptions bo;
        bo.time_limit = opt.time_limit;
        bo.seed = opt.seed;
        auto res = branch_and_price(g, k, bo);
        r.status = res.status == BnPStatus::Optimal ? run_status::kOptimal : run_status::kFeasible;
        r.value = static_cast<double>(res.value);
        r.bound = static_cast<double>(res.lower_bound);
        r.nodes = res.nodes;
        r.columns = res.columns;
        out.forest = res.forest;
        break;
      }
      case Method::Oracle: {
        auto res = exact_minmax(g, k);
        r.status = run_status::kOptimal;
        r.value = r.bound = static_cast<double>(res.value);
        out.forest = res.forest;
        break;
      }
    }
  } catch (const TooLarge& e) {
    r.status = run_status::kTooLarge;
    logger().info("{} {}: {}", id, to_string(method), e.what());
    out.message = std::string("TooLarge: ") + e.what();
  } catch (const InvalidArgument& e) {
    r.status = run_status::kInfeasible;
    logger().info("{} {}: {}", id, to_string(method), e.what());
    out.message = std::string("InvalidArgument: ") + e.what();
  } catch (const DisconnectedGraph& e) {
    r.status = run_status::kInfeasible;
    logger().info("{} {}: {}", id, to_string(method), e.what());
    out.message = std::string("DisconnectedGraph: ") + e.what();
  }
  r.gap = record_gap(method, r.value, r.bound);
  r.time_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  return out;
}

// ---------------------------------------------------------------------------
// CSV

inline const char* csv_header() { return "instance,method,status,value,bound,gap,time_ms,nodes,columns"; }

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

inline std::string csv_number(const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string(); }

inline std::vector<std::string> split_csv_line(const std::string& line, int lineno) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw ParseError(lineno, "unterminated quote");
  out.push_back(std::move(cur));
  return out;
}

inline std::optional<double> parse_optional(const std::string& s, int lineno) {
  if (s.empty()) return std::nullopt;
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ParseError(lineno, "bad number '" + s + "'");
  }
  if (used != s.size()) throw ParseError(lineno, "bad number '" + s + "'");
  return v;
}

inline long parse_long(const std::string& s, int lineno) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(s, &used);
  } catch (const std::exception&) {
    throw ParseError(lineno, "bad integer '" + s + "'");
  }
  if (used != s.size()) throw ParseError(lineno, "bad integer '" + s + "'");
  return v;
}

}  // namespace detail

inline std::string csv_row(const RunRecord& r) {
  return fmt::format("{},{},{},{},{},{},{:.3f},{},{}", detail::csv_field(r.instance), to_string(r.method),
                     detail::csv_field(r.status), detail::csv_number(r.value), detail::csv_number(r.bound),
                     detail::csv_number(r.gap), r.time_ms, r.nodes, r.columns);
}

inline void write_csv(std::ostream& os, std::span<const RunRecord> records) {
  os << csv_header() << '\n';
  for (const RunRecord& r : records) os << csv_row(r) << '\n';
}

inline std::vector<RunRecord> read_csv(std::istream& is) {
  std::vector<RunRecord> out;
  std::string line;
  int lineno = 0;
  if (!std::getline(is, line)) throw ParseError(1, "missing header");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != csv_header()) throw ParseError(1, "unexpected header '" + line + "'");
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = detail::split_csv_line(line, lineno);
    if (f.size() != 9) throw ParseError(lineno, "expected 9 fields, got " + std::to_string(f.size()));
    RunRecord r;
    r.instance = f[0];
    try {
      r.method = method_from_string(f[1]);
    } catch (const InvalidArgument& e) {
      throw ParseError(lineno, e.what());
    }
    r.status = f[2];
    r.value = detail::parse_optional(f[3], lineno);
    r.bound = detail::parse_optional(f[4], lineno);
    r.gap = detail::parse_optional(f[5], lineno);
    auto t = detail::parse_optional(f[6], lineno);
    if (!t) throw ParseError(lineno, "missing time_ms");
    r.time_ms = *t;
    r.nodes = detail::parse_long(f[7], lineno);
    r.columns = detail::parse_long(f[8], lineno);
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Performance profiles

struct ProfileCurve {
  Method method = Method::Approx;
  std::vector<std::pair<double, double>> points;  // (tau, rho), tau ascending

  /// Step function: rho at the last breakpoint <= tau, 0 before the first.
  double at(double tau) const {
    double rho = 0.0;
    for (const auto& [t, r] : points) {
      if (t > tau) break;
      rho = r;
    }
    return rho;
  }
};

/// A run counts as solved when its status is optimal. Times below 1 us are
/// raised to 1 us so ratios stay finite.
inline std::vector<ProfileCurve> performance_profile(std::span<const RunRecord> records) {
  constexpr double kInfRatio = std::numeric_limits<double>::infinity();
  std::set<std::string> instances;
  std::set<Method> methods;
  std::map<std::pair<std::string, Method>, double> time;
  for (const RunRecord& r : records) {
    instances.insert(r.instance);
    methods.insert(r.method);
    const double t = r.status == run_status::kOptimal ? std::max(r.time_ms, 1e-3) : kInfRatio;
    auto [it, fresh] = time.emplace(std::make_pair(r.instance, r.method), t);
    if (!fresh) throw InvalidArgument("duplicate record for " + r.instance + "/" + to_string(r.method));
  }
  for (const auto& p : instances)
    for (Method m : methods)
      if (!time.count({p, m})) throw MissingCell("no record for instance " + p + " and method " + to_string(m));

  std::map<Method, std::vector<double>> ratios;
  for (const auto& p : instances) {
    double best = kInfRatio;
    for (Method m : methods) best = std::min(best, time[{p, m}]);
    for (Method m : methods) {
      const double t = time[{p, m}];
      ratios[m].push_back(std::isfinite(t) ? t / best : kInfRatio);
    }
  }
  std::vector<ProfileCurve> out;
  const double np = static_cast<double>(instances.size());
  for (Method m : methods) {
    ProfileCurve c;
    c.method = m;
    auto rs = ratios[m];
    std::sort(rs.begin(), rs.end());
    for (std::size_t i = 0; i < rs.size() && std::isfinite(rs[i]); ++i) {
      if (i + 1 < rs.size() && rs[i + 1] == rs[i]) continue;
      c.points.push_back({rs[i], static_cast<double>(i + 1) / np});
    }
    out.push_back(std::move(c));
  }
  return out;
}

inline void write_profile_csv(std::ostream& os, std::span<const ProfileCurve> curves) {
  os << "method,tau,rho\n";
  for (const ProfileCurve& c : curves)
    for (const auto& [t, r] : c.points) os << fmt::format("{},{},{}\n", to_string(c.method), t, r);
}

/// Plain-text plot, log2 tau axis from 1 to the largest finite ratio.
inline std::string profile_plot(std::span<const ProfileCurve> curves, int width = 60, int height = 20) {
  double tmax = 1.0;
  for (const ProfileCurve& c : curves)
    for (const auto& p : c.points) tmax = std::max(tmax, p.first);
  const double lmax = std::max(1.0, std::log2(tmax));
  const std::string marks = "*o+x#@%&";
  std::vector<std::string> grid(static_cast<std::size_t>(height + 1), std::string(static_cast<std::size_t>(width + 1), ' '));
  for (std::size_t ci = 0; ci < curves.size(); ++ci)
    for (int col = 0; col <= width; ++col) {
      const double tau = std::exp2(lmax * col / width);
      const int row = static_cast<int>(std::lround(curves[ci].at(tau) * height));
      grid[static_cast<std::size_t>(height - row)][static_cast<std::size_t>(col)] = marks[ci % marks.size()];
    }
  std::string s;
  for (int row = 0; row <= height; ++row) {
    const double rho = static_cast<double>(height - row) / height;
    s += fmt::format("{:4.2f} |{}\n", rho, grid[static_cast<std::size_t>(row)]);
  }
  s += "     +" + std::string(static_cast<std::size_t>(width + 1), '-') + "\n";
  s += fmt::format("      tau = 1 .. {:.3g} (log2 scale)\n", std::exp2(lmax));
  for (std::size_t ci = 0; ci < curves.size(); ++ci)
    s += fmt::format("      {} {}\n", marks[ci % marks.size()], to_string(curves[ci].method));
  return s;
}

// ---------------------------------------------------------------------------
// Bench driver

struct BenchInstance {
  std::string id;
  Instance instance;
};

/// Instance files (*.inst) of `dir`, sorted by file name; the id is the stem.
inline std::vector<BenchInstance> load_instance_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".inst") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<BenchInstance> out;
  for (const auto& f : files) out.push_back({f.stem().string(), read_instance(f.string())});
  return out;
}

/// Every (instance, method) pair, rows in instance-major order whatever the
/// worker count. `on_record` runs under a lock as each run finishes.
inline std::vector<RunRecord> run_bench(std::span<const BenchInstance> instances, std::span<const Method> methods,
                                        const RunOptions& opt, int workers = 1,
                                        const std::function<void(const RunRecord&)>& on_record = {}) {
  const std::size_t jobs = instances.size() * methods.size();
  std::vector<RunRecord> out(jobs);
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  auto work = [&] {
    for (std::size_t j; (j = next++) < jobs;) {
      const auto& bi = instances[j / methods.size()];
      auto rec = run_method(bi.instance, bi.id, methods[j % methods.size()], opt).record;
      std::lock_guard lock(mu);
      if (on_record) on_record(rec);
      out[j] = std::move(rec);
    }
  };
  workers = std::max(1, workers);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return out;
}

}  // namespace bsf
