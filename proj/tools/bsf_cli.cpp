// bsf: command-line front end (gen, solve, export-model, bench, profile).
//
// Exit codes: 0 success, 1 usage error, 2 infeasible or rejected input,
// 3 time limit reached without a feasible solution.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/fmt/fmt.h>

#include "bsf/bsf.hpp"

namespace {

using namespace bsf;

constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitTimeLimit = 3;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class F>
auto usage_checked(F&& f) {
  try {
    return f();
  } catch (const InvalidArgument& e) {
    throw InputError(e.what());
  }
}

std::string spec_file_name(const InstanceSpec& s) {
  return fmt::format("n{}_p{}_k{}_s{}.inst", s.n, s.p, s.k, s.seed);
}

// Writes to `path`, or stdout for "-" / empty.
template <class F>
void with_output(const std::string& path, F&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  write(os);
  if (!os) throw IoError("write failed: " + path);
}

int cmd_gen(InstanceSpec spec, int count, const std::string& out) {
  if (count <= 1) {
    auto inst = generate(spec);
    with_output(out, [&](std::ostream& os) { write_instance(os, inst); });
    return 0;
  }
  if (out.empty() || out == "-") throw InputError("--count > 1 needs --out DIR");
  std::filesystem::create_directories(out);
  const std::uint64_t base = spec.seed;
  for (int i = 0; i < count; ++i) {
    spec.seed = base + static_cast<std::uint64_t>(i);
    write_instance((std::filesystem::path(out) / spec_file_name(spec)).string(), generate(spec));
  }
  return 0;
}

int cmd_solve(const std::string& in, const std::string& method, const RunOptions& opt, const std::string& csv,
              const std::string& solution) {
  const Instance inst = read_instance(in);
  const Method m = usage_checked([&] { return method_from_string(method); });
  auto out = run_method(inst, std::filesystem::path(in).stem().string(), m, opt);
  const RunRecord& r = out.record;
  if (r.status == run_status::kInfeasible || r.status == run_status::kTooLarge) {
    std::cerr << out.message << '\n';
    return kExitInput;
  }
  with_output(csv, [&](std::ostream& os) { write_csv(os, std::span<const RunRecord>(&r, 1)); });
  if (!solution.empty() && out.forest) with_output(solution, [&](std::ostream& os) { write_solution(os, *out.forest); });
  if (r.status == run_status::kTimeLimit) {
    std::cerr << "time limit reached without a feasible solution\n";
    return kExitTimeLimit;
  }
  return 0;
}

int cmd_export(const std::string& in, const std::string& model, const std::string& mode, double time_limit,
               int max_vertices, const std::string& out) {
  const Instance inst = read_instance(in);
  const WeightedGraph& g = inst.graph;
  const int k = inst.k;
  if (k < 1 || k > g.num_vertices()) throw InvalidArgument("k must lie in [1, n]");
  if (!is_connected(g)) throw DisconnectedGraph("graph is not connected");
  // U for the min-max models: best of k_approx and the heuristic.
  auto upper = [&] {
    HeuristicOptions ho;
    ho.time_limit = time_limit;
    const Weight h = heuristic_bnb(g, k, ho).ub;
    return std::min(h, k_approx(g, k).value_minmax);
  };
  MipSpec spec;
  if (model == "flow") {
    spec = build_flow_minmax(g, k, upper()).spec;
  } else if (model == "flow-maxmin") {
    spec = build_flow_maxmin(g, k, max_spanning_tree(g).weight, mode == "theta" ? MaxMinMode::Theta : MaxMinMode::BigM)
               .spec;
  } else if (model == "cyc") {
    spec = build_cycle_minmax(g, k).spec;
  } else if (model == "partition") {
    const Weight ub = upper();
    auto trees = enumerate_dominant_trees(g, ub, max_vertices);
    spec = rmp_integer_spec(build_rmp(g, trees, k, {}, ub));
  } else {
    throw InputError("unknown model '" + model + "' (flow, flow-maxmin, cyc, partition)");
  }
  with_output(out, [&](std::ostream& os) { write_mps(os, spec, model == "flow-maxmin" ? "BSF_MAXMIN" : "BSF"); });
  return 0;
}

int cmd_bench(const std::string& dir, const std::string& methods, const RunOptions& opt, int workers,
              const std::string& csv) {
  const auto insts = load_instance_dir(dir);
  if (insts.empty()) throw InputError("no *.inst files in " + dir);
  const auto ms = usage_checked([&] { return parse_methods(methods); });
  auto records = run_bench(insts, ms, opt, workers, [](const RunRecord& r) {
    logger().info("{} {} {} value {}", r.instance, to_string(r.method), r.status, r.value ? *r.value : -1.0);
  });
  with_output(csv, [&](std::ostream& os) { write_csv(os, records); });
  return 0;
}

int cmd_profile(const std::string& csv, const std::string& out) {
  std::ifstream is(csv);
  if (!is) throw IoError("cannot open " + csv);
  const auto records = read_csv(is);
  const auto curves = performance_profile(records);
  if (!out.empty()) with_output(out, [&](std::ostream& os) { write_profile_csv(os, curves); });
  std::cout << profile_plot(curves);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Balanced spanning forest solvers"};
  app.require_subcommand(1);

  InstanceSpec spec;
  int count = 1;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "generate random instances");
  gen->add_option("--n", spec.n, "vertices")->required();
  gen->add_option("--p", spec.p, "density in (0, 1]")->required();
  gen->add_option("--k", spec.k, "number of trees")->required();
  gen->add_option("--seed", spec.seed, "RNG seed")->default_val(1);
  gen->add_option("--count", count, "instances; > 1 writes consecutive seeds into --out DIR")->default_val(1);
  gen->add_option("--out", gen_out, "output file or directory (stdout if omitted)");

  std::string in, method, csv, solution;
  RunOptions ropt;
  auto* solve = app.add_subcommand("solve", "solve one instance");
  solve->add_option("--in", in, "instance file")->required();
  solve->add_option("--method", method, "approx, heur, flow, flow-maxmin, cyc, bp or oracle")->required();
  solve->add_option("--time-limit", ropt.time_limit, "seconds")->default_val(60.0);
  solve->add_option("--seed", ropt.seed, "seed for randomized components")->default_val(1);
  solve->add_option("--csv", csv, "CSV output (stdout if omitted)");
  solve->add_option("--solution", solution, "write the forest here");

  std::string model, mode = "bigM", model_out;
  int max_vertices = 10;
  double export_time = 10.0;
  auto* exp = app.add_subcommand("export-model", "write a model as MPS");
  exp->add_option("--in", in, "instance file")->required();
  exp->add_option("--model", model, "flow, flow-maxmin, cyc or partition")->required();
  exp->add_option("--mode", mode, "flow-maxmin linking: bigM or theta")->default_val("bigM");
  exp->add_option("--heuristic-time", export_time, "seconds for the U heuristic")->default_val(10.0);
  exp->add_option("--max-vertices", max_vertices, "partition: enumeration size limit")->default_val(10);
  exp->add_option("--out", model_out, "MPS output (stdout if omitted)");

  std::string dir, methods = "approx,heur,flow,cyc,bp";
  int workers = 1;
  auto* bench = app.add_subcommand("bench", "run methods over a directory of instances");
  bench->add_option("--dir", dir, "directory with *.inst files")->required();
  bench->add_option("--methods", methods, "comma-separated methods or 'all'");
  bench->add_option("--time-limit", ropt.time_limit, "seconds per run")->default_val(60.0);
  bench->add_option("--seed", ropt.seed, "seed for randomized components")->default_val(1);
  bench->add_option("--workers", workers, "parallel workers")->default_val(1);
  bench->add_option("--csv", csv, "CSV output (stdout if omitted)");

  std::string profile_csv, profile_out;
  auto* prof = app.add_subcommand("profile", "performance profile of a bench CSV");
  prof->add_option("--csv", profile_csv, "bench CSV")->required();
  prof->add_option("--out", profile_out, "breakpoint CSV output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*gen) return cmd_gen(spec, count, gen_out);
    if (*solve) return cmd_solve(in, method, ropt, csv, solution);
    if (*exp) return cmd_export(in, model, mode, export_time, max_vertices, model_out);
    if (*bench) return cmd_bench(dir, methods, ropt, workers, csv);
    if (*prof) return cmd_profile(profile_csv, profile_out);
  } catch (const InputError& e) {
    std::cerr << e.what() << '\n';
    return kExitUsage;
  } catch (const TooLarge& e) {
    std::cerr << "TooLarge: " << e.what() << '\n';
    return kExitInput;
  } catch (const ParseError& e) {
    std::cerr << "ParseError: " << e.what() << '\n';
    return kExitInput;
  } catch (const bsf::Error& e) {
    std::cerr << e.what() << '\n';
    return kExitInput;
  }
  return kExitUsage;
}
