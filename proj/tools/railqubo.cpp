#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "railqubo/io.hpp"
#include "railqubo/qubo.hpp"
#include "railqubo/solvers.hpp"

namespace fs = std::filesystem;
using namespace railqubo;

namespace {

constexpr int kExitFeasible = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFailed = 2;

struct CommonFlags {
  std::string instance;
  std::optional<double> p_sum, p_pair;
  std::optional<int> d_max;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--instance", f.instance, "instance file or fixture name")->required();
  cmd->add_option("--p-sum", f.p_sum, "one-hot penalty constant");
  cmd->add_option("--p-pair", f.p_pair, "forbidden-pair penalty constant");
  cmd->add_option("--d-max", f.d_max, "maximum secondary delay for every train")
      ->check(CLI::NonNegativeNumber);
}

RailwayInstance prepare(const CommonFlags& f) {
  auto inst = load_instance(f.instance);
  if (f.d_max) {
    inst.set_uniform_d_max(*f.d_max);
    inst.finalize();
  }
  if (f.p_sum) inst.penalties.p_sum = *f.p_sum;
  if (f.p_pair) inst.penalties.p_pair = *f.p_pair;
  return inst;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

template <typename Writer>
std::string render(Writer&& w) {
  std::ostringstream s;
  w(s);
  return s.str();
}

struct SolveFlags {
  CommonFlags common;
  std::string method;
  std::uint64_t seed = 1;
  std::string out;
  bool svg = false;
  std::string mode = "restricted";
  std::size_t levels = 10;
  AnnealParams anneal;
  std::string objective = "weighted";
};

int run_solve(const SolveFlags& f) {
  const auto inst = prepare(f.common);
  SolverReport report;
  report.method = f.method;
  report.params = {{"p_sum", format_number(inst.penalties.p_sum)},
                   {"p_pair", format_number(inst.penalties.p_pair)}};
  std::optional<QuboInstance> qubo;
  const auto need_qubo = [&]() -> const QuboInstance& {
    if (!qubo) {
      qubo = compile(inst, inst.penalties);
      for (const auto& w : qubo->warnings) std::cerr << "warning: " << w << "\n";
    }
    return *qubo;
  };

  const auto adopt_config = [&](const Bits& x) {
    report.config = x;
    report.energy = decompose(*qubo, x);
    try {
      report.schedule = decode(*qubo, x);
    } catch (const BrokenOneHot& e) {
      report.notes.push_back(e.what());
    }
  };

  try {
    if (f.method == "enumerate") {
      const auto& q = need_qubo();
      SpectrumOptions opt;
      opt.levels = f.levels;
      opt.mode = f.mode == "full"        ? SpectrumMode::Full
                 : f.mode == "perturbed" ? SpectrumMode::OneHotPlusSingleViolations
                                         : SpectrumMode::OneHotRestricted;
      report.params.emplace_back("mode", f.mode);
      report.params.emplace_back("levels", std::to_string(f.levels));
      report.spectrum = enumerate_spectrum(q, opt);
      const auto& ground = report.spectrum->levels.front();
      report.notes.push_back("ground energy " + format_number(ground.energy) + ", degeneracy " +
                             std::to_string(ground.degeneracy));
      adopt_config(ground.representatives.front());
    } else if (f.method == "sa") {
      const auto& q = need_qubo();
      auto params = f.anneal;
      params.seed = f.seed;
      report.params.emplace_back("seed", std::to_string(params.seed));
      report.params.emplace_back("sweeps", std::to_string(params.sweeps));
      report.params.emplace_back("restarts", std::to_string(params.restarts));
      report.params.emplace_back("beta_start", format_number(params.beta_start));
      report.params.emplace_back("beta_end", format_number(params.beta_end));
      const auto res = simulated_annealing(q, params);
      adopt_config(res.best);
    } else if (f.method == "order") {
      need_qubo();
      report.params.emplace_back("objective", f.objective);
      const auto sol = exact_order_solver(inst, f.objective == "max" ? OrderObjective::MaxSecondaryDelay
                                                                     : OrderObjective::WeightedDelay);
      report.schedule = sol.schedule;
      report.notes.push_back("search nodes " + std::to_string(sol.nodes_explored));
    } else {
      need_qubo();
      const Dispatch rule = f.method == "fcfs" ? Dispatch::FCFS
                            : f.method == "flfs" ? Dispatch::FLFS
                                                 : Dispatch::AMCC;
      auto res = dispatch(inst, rule);
      report.schedule = res.schedule;
      report.notes = std::move(res.log);
      if (!res.within_bounds) report.notes.push_back("some delay exceeds d_U + d_max");
    }
  } catch (const Infeasible& e) {
    report.notes.push_back(e.what());
    std::cerr << "infeasible: " << e.what() << "\n";
  }

  complete_report(inst, qubo ? &*qubo : nullptr, report);
  if (report.schedule && f.method != "enumerate" && f.method != "sa") {
    // delays beyond the QUBO domains have no encoding and count as infeasible
    if (!report.config) report.feasible = false;
  }

  const auto json_text = report_json(inst, report);
  if (f.out.empty()) {
    std::cout << json_text;
  } else {
    const fs::path dir(f.out);
    fs::create_directories(dir);
    write_file(dir / "report.json", json_text);
    if (report.spectrum)
      write_file(dir / "spectrum.csv", render([&](std::ostream& o) { write_spectrum_csv(o, *report.spectrum); }));
    if (report.schedule) {
      write_file(dir / "schedule.csv",
                 render([&](std::ostream& o) { write_schedule_csv(o, inst, *report.schedule); }));
      const auto data = diagram_data(inst, *report.schedule);
      write_file(dir / "diagram.csv", render([&](std::ostream& o) { write_diagram_csv(o, inst, data); }));
      if (f.svg)
        write_file(dir / "diagram.svg", render([&](std::ostream& o) {
                     write_diagram_svg(o, inst, data, inst.name + " (" + f.method + ")");
                   }));
    }
  }
  std::cerr << f.method << ": " << (report.feasible ? "feasible" : "infeasible");
  if (report.schedule)
    std::cerr << ", objective " << format_number(report.objective) << ", max secondary delay "
              << report.max_secondary << ", delay sum " << report.delay_sum;
  if (report.energy) std::cerr << ", energy " << format_number(report.energy->total());
  std::cerr << "\n";
  for (const auto& v : report.violations) std::cerr << "  violation: " << v << "\n";
  return report.feasible ? kExitFeasible : kExitFailed;
}

int run_export(const CommonFlags& c, const std::string& format, const std::string& out) {
  const auto inst = prepare(c);
  const auto q = compile(inst, inst.penalties);
  for (const auto& w : q.warnings) std::cerr << "warning: " << w << "\n";
  const auto text = render([&](std::ostream& o) {
    if (format == "qubo")
      write_qubo(o, q);
    else
      write_ising(o, to_ising(q));
  });
  if (out.empty())
    std::cout << text;
  else
    write_file(out, text);
  return kExitFeasible;
}

int run_diagram(const CommonFlags& c, const std::string& schedule_path, const std::string& state,
                const std::string& out) {
  const auto inst = prepare(c);
  Schedule s;
  std::string label;
  if (!schedule_path.empty()) {
    std::ifstream in(schedule_path);
    if (!in) throw Error("cannot open " + schedule_path);
    std::stringstream buf;
    buf << in.rdbuf();
    s = schedule_from_report(inst, buf.str());
    label = "solution";
  } else if (state == "timetable") {
    s = Schedule::on_time(inst);
    label = "timetable";
  } else {
    s = Schedule::unavoidable(inst, UnavoidableDelays(inst));
    label = "conflicted";
  }
  const auto data = diagram_data(inst, s);
  const fs::path dir(out);
  fs::create_directories(dir);
  write_file(dir / "diagram.csv", render([&](std::ostream& o) { write_diagram_csv(o, inst, data); }));
  write_file(dir / "diagram.svg", render([&](std::ostream& o) {
               write_diagram_svg(o, inst, data, inst.name + " (" + label + ")");
             }));
  std::cerr << "diagram: " << data.rows.size() << " rows, " << data.conflicts.size()
            << " conflict markers\n";
  return kExitFeasible;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-track railway dispatching as a QUBO"};
  app.require_subcommand(1);

  SolveFlags solve;
  auto* cmd_solve = app.add_subcommand("solve", "solve an instance and write a report");
  add_common(cmd_solve, solve.common);
  cmd_solve->add_option("--method", solve.method, "solver")
      ->required()
      ->check(CLI::IsMember({"enumerate", "sa", "order", "fcfs", "flfs", "amcc"}));
  cmd_solve->add_option("--seed", solve.seed, "annealing seed");
  cmd_solve->add_option("--out", solve.out, "output directory (report to stdout if omitted)");
  cmd_solve->add_flag("--svg", solve.svg, "also render diagram.svg");
  cmd_solve->add_option("--mode", solve.mode, "enumeration space")
      ->check(CLI::IsMember({"full", "restricted", "perturbed"}));
  cmd_solve->add_option("--levels", solve.levels, "spectrum levels kept")->check(CLI::PositiveNumber);
  cmd_solve->add_option("--sweeps", solve.anneal.sweeps, "annealing sweeps")->check(CLI::PositiveNumber);
  cmd_solve->add_option("--restarts", solve.anneal.restarts, "annealing restarts")->check(CLI::PositiveNumber);
  cmd_solve->add_option("--beta-start", solve.anneal.beta_start, "initial inverse temperature")->check(CLI::PositiveNumber);
  cmd_solve->add_option("--beta-end", solve.anneal.beta_end, "final inverse temperature")->check(CLI::PositiveNumber);
  cmd_solve->add_option("--objective", solve.objective, "order solver objective")
      ->check(CLI::IsMember({"weighted", "max"}));

  CommonFlags exp;
  std::string exp_format, exp_out;
  auto* cmd_export = app.add_subcommand("export", "write the QUBO or Ising coefficients");
  add_common(cmd_export, exp);
  cmd_export->add_option("--format", exp_format)->required()->check(CLI::IsMember({"qubo", "ising"}));
  cmd_export->add_option("--out", exp_out, "output file (stdout if omitted)");

  CommonFlags dia;
  std::string dia_schedule, dia_state = "conflicted", dia_out = ".";
  auto* cmd_diagram = app.add_subcommand("diagram", "draw a distance-time diagram");
  add_common(cmd_diagram, dia);
  cmd_diagram->add_option("--schedule", dia_schedule, "report.json from a previous solve");
  cmd_diagram->add_option("--state", dia_state, "timetable or conflicted when no schedule is given")
      ->check(CLI::IsMember({"timetable", "conflicted"}));
  cmd_diagram->add_option("--out", dia_out, "output directory");

  CommonFlags desc;
  auto* cmd_describe = app.add_subcommand("describe", "list variables, groups and forbidden pairs");
  add_common(cmd_describe, desc);

  app.add_subcommand("fixtures", "list bundled instances");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*cmd_solve) return run_solve(solve);
    if (*cmd_export) return run_export(exp, exp_format, exp_out);
    if (*cmd_diagram) return run_diagram(dia, dia_schedule, dia_state, dia_out);
    if (*cmd_describe) {
      const auto inst = prepare(desc);
      const VariableIndex index(inst);
      std::cout << describe(inst, index, build_constraints(inst, index));
      return kExitFeasible;
    }
    for (const auto& name : fixture_names()) std::cout << name << "\n";
    return kExitFeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailed;
  }
}
