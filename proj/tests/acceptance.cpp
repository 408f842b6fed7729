// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only if all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

#include "railqubo/io.hpp"
#include "railqubo/qubo.hpp"
#include "railqubo/solvers.hpp"
#include "support/oracles.hpp"

using namespace railqubo;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

struct Line {
  bool ok = true;
  std::ostringstream why;
  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      why << " [" << what << "]";
    }
  }
};

int failures = 0;

void report(int id, const std::string& title, Line& line, const std::string& summary) {
  std::cout << (line.ok ? "PASS" : "FAIL") << "  criterion " << id << ": " << title << " -- "
            << summary << line.why.str() << "\n";
  if (!line.ok) ++failures;
}

// Exact ground energy of line 216: 3/7 of IC3521's weight plus 4/7 of R90602's,
// minus p_sum for each of the six one-hot groups.
double line216_ground(double p_sum) { return (3.0 * 1.5 + 4.0 * 1.0) / 7.0 - 6.0 * p_sum; }

double round3(double v) { return std::round(v * 1000.0) / 1000.0; }

void criterion1() {
  Line line;
  const auto inst = load_instance("meet-pass");
  const auto t0 = Clock::now();
  const auto q = compile(inst, {1.75, 1.75});
  const double e1 = energy(q, {0, 1, 1, 0});
  const double e2 = energy(q, {1, 0, 0, 1});
  const double e3 = energy(q, {1, 0, 1, 0});
  const double elapsed = ms_since(t0);

  const double expect[4][4] = {{-1.75, 1.75, 1.75, 0},
                               {1.75, -1.25, 0, 1.75},
                               {1.75, 0, -1.75, 1.75},
                               {0, 1.75, 1.75, -0.75}};
  line.require(q.size() == 4, "4 variables");
  bool exact = q.size() == 4;
  for (std::size_t i = 0; exact && i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) exact = exact && q(i, j) == expect[i][j];
  line.require(exact, "Q entrywise");
  line.require(e1 == -3.0 && e2 == -2.5 && e3 == 0.0, "energies");
  line.require(elapsed < 1.0, "runtime < 1 ms");
  report(1, "worked example", line,
         "E = " + format_number(e1) + ", " + format_number(e2) + ", " + format_number(e3) + "; " +
             fmt(elapsed, 3) + " ms");
}

void criterion2() {
  Line line;
  const auto inst = load_instance("line216");
  SpectrumOptions opt;
  opt.threads = 1;
  opt.levels = 4;
  opt.representatives = 16;

  const auto t0 = Clock::now();
  const auto q = compile(inst, {1.75, 1.75});
  const auto sp = enumerate_spectrum(q, opt);
  const auto q2 = compile(inst, {2.2, 2.7});
  const auto sp2 = enumerate_spectrum(q2, opt);
  const double elapsed = ms_since(t0);

  const auto& g = sp.levels.front();
  line.require(sp.configs_scanned == 262144, "262,144 configurations");
  line.require(std::abs(g.energy - line216_ground(1.75)) <= 1e-6 && round3(g.energy) == -9.286,
               "ground -9.286");
  line.require(g.degeneracy == 4 && g.feasible_count == 4, "degeneracy 4");
  bool same = !g.representatives.empty();
  for (const auto& x : g.representatives)
    same = same && is_ground_equivalent(inst, decode(q, x), decode(q, g.representatives.front()));
  line.require(same, "ground configs order-equivalent");
  const double e2 = sp2.levels.front().energy;
  line.require(std::abs(e2 - line216_ground(2.2)) <= 1e-6 && round3(e2) == -11.986, "ground -11.986");
  line.require(elapsed < 5000.0, "runtime < 5 s");
  report(2, "line-216 ground state", line,
         "E0 = " + fmt(g.energy, 9) + " x" + std::to_string(g.degeneracy) + ", E0(2.2/2.7) = " +
             fmt(e2, 9) + "; " + fmt(elapsed, 1) + " ms single-threaded");
}

void criterion3() {
  Line line;
  const auto inst = load_instance("line216");
  const UnavoidableDelays du(inst);
  const auto t0 = Clock::now();
  const auto a = fcfs(inst), b = flfs(inst), c = amcc(inst);
  const double elapsed = ms_since(t0);
  std::string summary;
  for (const auto* r : {&a, &b, &c}) {
    line.require(r->within_bounds, "within d_max");
    line.require(is_ground_equivalent(inst, r->schedule, a.schedule), "same order");
    line.require(max_secondary_delay(inst, du, r->schedule) == 4, "max secondary 4");
    line.require(scored_delay_sum(inst, du, r->schedule) == 7, "delay sum 7");
    line.require(check_conditions(inst, du, r->schedule).empty() && check_capacity(inst, r->schedule).empty(),
                 "feasible");
  }
  line.require(elapsed < 100.0, "runtime < 100 ms");
  report(3, "heuristic agreement", line,
         "max " + std::to_string(max_secondary_delay(inst, du, a.schedule)) + " min, sum " +
             std::to_string(scored_delay_sum(inst, du, a.schedule)) + " min, order " +
             format_signature(inst, equivalence_signature(inst, a.schedule)) + "; " + fmt(elapsed, 2) + " ms");
}

void criterion4() {
  Line line;
  const auto t0 = Clock::now();
  const auto inst = load_instance("line216");
  auto cv = cross_validate(inst, {1.75, 1.75});
  line.require(cv.match, "line216" + (cv.mismatches.empty() ? "" : ": " + cv.mismatches.front()));

  std::mt19937_64 rng(20240601);
  int checked = 0, drawn = 0, infeasible_agree = 0;
  while (checked < 50 && drawn < 2000) {
    ++drawn;
    const auto r = oracle::random_instance(rng);
    const auto best = oracle::best_objective(r);
    if (!best) {
      // no feasible schedule: the order solver must agree
      bool threw = false;
      try {
        exact_order_solver(r);
      } catch (const Infeasible&) {
        threw = true;
      }
      line.require(threw, "order solver found a schedule where none exists");
      infeasible_agree += threw;
      continue;
    }
    const auto c = cross_validate(r, {1.75, 1.75});
    line.require(c.match, "random #" + std::to_string(drawn) + (c.mismatches.empty() ? "" : ": " + c.mismatches.front()));
    line.require(std::abs(c.order_objective - *best) <= 1e-9, "order optimum vs brute force");
    ++checked;
  }
  line.require(checked == 50, "50 feasible random instances");
  const double elapsed = ms_since(t0);
  line.require(elapsed < 60000.0, "runtime < 60 s");
  report(4, "cross-solver equivalence", line,
         "line216 objective " + fmt(cv.order_objective, 9) + " vs ground " + fmt(cv.ground_objective, 9) +
             "; " + std::to_string(checked) + " random instances matched (" +
             std::to_string(infeasible_agree) + " infeasible draws agreed); " + fmt(elapsed / 1000.0, 2) + " s");
}

// Measured 100/100 with the portable draw; anything lower is a regression.
constexpr int kSaSuccessFloor = 100;

void criterion5() {
  Line line;
  const auto inst = load_instance("line216");
  const auto q = compile(inst, {1.75, 1.75});
  SpectrumOptions opt;
  opt.levels = 1;
  opt.representatives = 1;
  const double ground = enumerate_spectrum(q, opt).levels.front().energy;
  const auto t0 = Clock::now();
  int hits = 0;
  double lowest = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    AnnealParams p;
    p.seed = seed;
    const auto res = simulated_annealing(q, p);
    hits += std::abs(res.energy - ground) <= 1e-9;
    lowest = seed == 1 ? res.energy : std::min(lowest, res.energy);
    for (const double e : res.restart_energies) line.require(e >= ground - 1e-9, "energy below ground");
  }
  line.require(hits >= 90, "success rate >= 90%");
  line.require(hits >= kSaSuccessFloor, "below frozen rate " + std::to_string(kSaSuccessFloor) + "/100");
  report(5, "simulated annealing regression", line,
         std::to_string(hits) + "/100 seeds reach " + fmt(ground, 9) + ", lowest reported " +
             fmt(lowest, 9) + "; " + fmt(ms_since(t0) / 1000.0, 2) + " s");
}

void criterion6() {
  Line line;
  std::mt19937_64 rng(7);
  const auto l216 = load_instance("line216");
  const auto l191 = load_instance("line191-reconstructed");
  const auto mp = load_instance("meet-pass");
  std::size_t checks = 0;
  const auto expect = [&](const oracle::Outcome& o, const std::string& what) {
    ++checks;
    line.require(o.ok, what + (o.detail.empty() ? "" : ": " + o.detail));
  };
  for (const auto* inst : {&l216, &l191, &mp}) {
    const auto q = compile(*inst, inst->penalties);
    expect(oracle::q_symmetric(q), inst->name + " Q symmetry");
    expect(oracle::ising_matches(q, rng, 1000), inst->name + " Ising equality");
    expect(oracle::decode_encode_identity(*inst, rng, 200), inst->name + " decode/encode");
    expect(oracle::tau_ordering(*inst), inst->name + " tau2 >= tau1");
    expect(oracle::unavoidable_recursion(*inst), inst->name + " d_U recursion");
    expect(oracle::pairs_rederived(*inst), inst->name + " pair re-derivation");
    expect(oracle::skip_rule_sound(*inst), inst->name + " skip rule");
  }
  expect(oracle::hard_penalty_matches_checker(l216, rng, 10000), "line216 f'' vs checker");
  expect(oracle::hard_penalty_matches_checker(l191, rng, 10000), "line191 f'' vs checker");
  for (int k = 0; k < 30; ++k) {
    const auto r = oracle::random_instance(rng);
    const std::string tag = "random #" + std::to_string(k);
    const auto q = compile(r, r.penalties);
    expect(oracle::q_symmetric(q), tag + " Q symmetry");
    expect(oracle::ising_matches(q, rng, 100), tag + " Ising equality");
    expect(oracle::decode_encode_identity(r, rng, 50), tag + " decode/encode");
    expect(oracle::unavoidable_recursion(r), tag + " d_U recursion");
    expect(oracle::pairs_rederived(r), tag + " pair re-derivation");
    expect(oracle::skip_rule_sound(r), tag + " skip rule");
    expect(oracle::hard_penalty_matches_checker(r, rng, 400), tag + " f'' vs checker");
  }
  const VariableIndex idx(l191);
  line.require(idx.size() == 198, "198 variables on line191-reconstructed");
  line.require(VariableIndex(l216).size() == 48, "48 variables on line216");
  report(6, "property suites", line,
         std::to_string(checks) + " property checks on 3 fixtures and 30 random instances, line191-reconstructed has " +
             std::to_string(idx.size()) + " variables");
}

}  // namespace

int main() {
  const std::pair<int, std::function<void()>> runs[] = {
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4}, {5, criterion5}, {6, criterion6}};
  for (const auto& [id, run] : runs) {
    try {
      run();
    } catch (const std::exception& e) {
      std::cout << "FAIL  criterion " << id << ": exception: " << e.what() << "\n";
      ++failures;
    }
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << "\n";
  return failures == 0 ? 0 : 1;
}
