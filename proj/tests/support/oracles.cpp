#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "railqubo/constraints.hpp"
#include "railqubo/solvers.hpp"

namespace oracle {

using namespace railqubo;

std::vector<SegmentFacts> segments(const RailwayInstance& inst, TrainIndex j) {
  const auto& route = inst.trains[j].route;
  std::vector<std::size_t> at;  // route rows that are stations
  for (std::size_t k = 0; k < route.size(); ++k)
    if (inst.block(route[k].block).kind == BlockKind::Station) at.push_back(k);
  std::vector<SegmentFacts> out;
  for (std::size_t p = 0; p + 1 < at.size(); ++p) {
    SegmentFacts f;
    f.from = route[at[p]].block;
    f.to = route[at[p + 1]].block;
    f.departure = route[at[p]].t_out;
    f.tau2 = route[at[p + 1]].t_in - route[at[p]].t_out;
    for (auto k = at[p] + 1; k < at[p + 1]; ++k) f.tau1 = std::max(f.tau1, route[k].t_out - route[k].t_in);
    for (auto k = at[p] + 1; k <= at[p + 1]; ++k) f.reserve += (route[k].t_out - route[k].t_in) - route[k].p_min;
    out.push_back(f);
  }
  return out;
}

namespace {

const SegmentFacts* segment_from(const std::vector<SegmentFacts>& segs, BlockId s) {
  for (const auto& f : segs)
    if (f.from == s) return &f;
  return nullptr;
}

// Slack of a turnover: how late the arriving set may be before the next
// departure is affected.
Minutes slack(const RailwayInstance& inst, const Turnover& tr) {
  const auto segs = segments(inst, tr.from);
  const auto& last = segs.back();
  return segments(inst, tr.to).front().departure - last.departure - last.tau2 - tr.min_turnover;
}

}  // namespace

std::map<std::pair<TrainIndex, BlockId>, Minutes> unavoidable(const RailwayInstance& inst) {
  std::map<std::pair<TrainIndex, BlockId>, Minutes> du;
  std::vector<int> state(inst.trains.size(), 0);
  std::function<void(TrainIndex)> settle = [&](TrainIndex j) {
    if (state[j] == 2) return;
    Minutes d = inst.trains[j].initial_delay;
    for (const auto& tr : inst.turnovers) {
      if (tr.to != j) continue;
      settle(tr.from);
      const auto pen = segments(inst, tr.from).back().from;
      d = std::max(d, du.at({tr.from, pen}) - slack(inst, tr) + 1);
    }
    for (const auto& f : segments(inst, j)) {
      du[{j, f.from}] = d;
      d = std::max(d - f.reserve, 0);
    }
    state[j] = 2;
  };
  for (TrainIndex j = 0; j < inst.trains.size(); ++j) settle(j);
  return du;
}

bool feasible(const RailwayInstance& inst, const Schedule& s) {
  const auto du = unavoidable(inst);
  const auto n = inst.trains.size();
  std::vector<std::vector<SegmentFacts>> segs(n);
  for (TrainIndex j = 0; j < n; ++j) segs[j] = segments(inst, j);
  const auto delay = [&](TrainIndex j, BlockId st) { return s.delays.at({j, st}); };

  for (TrainIndex j = 0; j < n; ++j) {
    for (std::size_t p = 0; p < segs[j].size(); ++p) {
      const auto& f = segs[j][p];
      const auto d = delay(j, f.from);
      const auto lo = du.at({j, f.from});
      if (d < lo || d > lo + inst.d_max[j]) return false;
      if (p + 1 < segs[j].size() && delay(j, segs[j][p + 1].from) < d - f.reserve) return false;
    }
  }
  for (const auto& tr : inst.turnovers) {
    const auto pen = segs[tr.from].back().from;
    if (delay(tr.to, segs[tr.to].front().from) <= delay(tr.from, pen) - slack(inst, tr)) return false;
  }
  // t_b - t_a in [0, gap) means b enters before a has cleared
  const auto too_close = [](Minutes ta, Minutes tb, Minutes gap) { return tb >= ta && tb < ta + gap; };
  for (TrainIndex j = 0; j < n; ++j) {
    for (TrainIndex k = j + 1; k < n; ++k) {
      for (const auto& fj : segs[j]) {
        const auto tj = fj.departure + delay(j, fj.from);
        for (const auto& fk : segs[k]) {
          const auto tk = fk.departure + delay(k, fk.from);
          if (fj.from == fk.from && fj.to == fk.to) {
            if (too_close(tj, tk, fj.tau1) || too_close(tk, tj, fk.tau1)) return false;
          } else if (fj.from == fk.to && fj.to == fk.from) {
            if (too_close(tj, tk, fj.tau2) || too_close(tk, tj, fk.tau2)) return false;
          }
        }
      }
    }
  }
  return true;
}

std::optional<double> best_objective(const RailwayInstance& inst) {
  const auto du = unavoidable(inst);
  std::optional<double> best;
  for_each_schedule(inst, [&](const Schedule& s) {
    if (!feasible(inst, s)) return;
    double f = 0.0;
    for (TrainIndex j = 0; j < inst.trains.size(); ++j) {
      if (inst.d_max[j] == 0) continue;
      const auto pen = segments(inst, j).back().from;
      f += inst.trains[j].weight * (s.delays.at({j, pen}) - du.at({j, pen})) / inst.d_max[j];
    }
    if (!best || f < *best) best = f;
  });
  return best;
}

std::set<std::pair<std::size_t, std::size_t>> forbidden_pairs(const RailwayInstance& inst,
                                                              const VariableIndex& index) {
  // Two variables conflict when the two-entry partial schedule already breaks
  // an inequality between them.
  const auto n = inst.trains.size();
  std::vector<std::vector<SegmentFacts>> segs(n);
  for (TrainIndex j = 0; j < n; ++j) segs[j] = segments(inst, j);
  const auto seg = [&](TrainIndex j, BlockId st) { return segment_from(segs[j], st); };
  const auto too_close = [](Minutes ta, Minutes tb, Minutes gap) { return tb >= ta && tb < ta + gap; };

  std::set<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t u = 0; u < index.size(); ++u) {
    for (std::size_t v = u + 1; v < index.size(); ++v) {
      const auto& a = index.key(u);
      const auto& b = index.key(v);
      if (a.train == b.train && a.station == b.station) continue;  // one-hot, not a pair
      bool bad = false;
      if (a.train == b.train) {
        const auto* fa = seg(a.train, a.station);
        const auto* fb = seg(b.train, b.station);
        if (fa->to == b.station && b.delay < a.delay - fa->reserve) bad = true;
        if (fb->to == a.station && a.delay < b.delay - fb->reserve) bad = true;
      } else {
        const auto* fa = seg(a.train, a.station);
        const auto* fb = seg(b.train, b.station);
        const auto ta = fa->departure + a.delay, tb = fb->departure + b.delay;
        if (fa->from == fb->from && fa->to == fb->to)
          bad = too_close(ta, tb, fa->tau1) || too_close(tb, ta, fb->tau1);
        else if (fa->from == fb->to && fa->to == fb->from)
          bad = too_close(ta, tb, fa->tau2) || too_close(tb, ta, fb->tau2);
        for (const auto& tr : inst.turnovers) {
          const auto check = [&](const VarKey& x, const VarKey& y) {
            return tr.from == x.train && tr.to == y.train && x.station == segs[x.train].back().from &&
                   y.station == segs[y.train].front().from && y.delay <= x.delay - slack(inst, tr);
          };
          if (check(a, b) || check(b, a)) bad = true;
        }
      }
      if (bad) out.emplace(u, v);
    }
  }
  return out;
}

RailwayInstance random_instance(std::mt19937_64& rng, const RandomSpec& spec) {
  const auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  RailwayInstance inst;
  inst.name = "random";
  const int stations = pick(2, spec.max_decisions + 1);
  std::vector<BlockId> station_ids;
  std::vector<std::vector<BlockId>> between;  // line blocks after each station
  std::map<BlockId, std::pair<Minutes, Minutes>> line_time;  // run, p_min
  BlockId next_id = 1;
  for (int p = 0; p < stations; ++p) {
    station_ids.push_back(next_id);
    inst.blocks.push_back({next_id++, BlockKind::Station, 3, ""});
    if (p + 1 == stations) break;
    between.emplace_back();
    for (int b = pick(1, 2); b > 0; --b) {
      between.back().push_back(next_id);
      const Minutes run = pick(1, 4);
      line_time[next_id] = {run, std::max(1, run - pick(0, 1))};
      inst.blocks.push_back({next_id++, BlockKind::Line, 1, ""});
    }
  }

  // mostly several trains, so that they contend for segments
  const int trains = pick(0, 9) == 0 ? 1 : pick(std::min(2, spec.max_trains), spec.max_trains);
  for (int t = 0; t < trains; ++t) {
    Train tr;
    tr.id = "T" + std::to_string(t + 1);
    tr.direction = pick(0, 1) ? Direction::Dir1 : Direction::Dir0;
    tr.initial_delay = pick(0, 3);
    tr.weight = std::vector<double>{0.5, 0.75, 1.0}[static_cast<std::size_t>(pick(0, 2))];
    int a = pick(0, stations - 2), b = pick(a + 1, stations - 1);
    Minutes clock = 8 * 60 + pick(0, 8);
    const bool fwd = tr.direction == Direction::Dir0;
    if (!fwd) std::swap(a, b);
    for (int p = a;; p += fwd ? 1 : -1) {
      const Minutes dwell = pick(0, 2);
      tr.route.push_back({station_ids[static_cast<std::size_t>(p)], clock, clock + dwell,
                          dwell > 0 ? pick(0, dwell) : 0});
      clock += dwell;
      if (p == b) break;
      auto line = between[static_cast<std::size_t>(fwd ? p : p - 1)];
      if (!fwd) std::reverse(line.begin(), line.end());
      for (const auto id : line) {
        const auto [run, pmin] = line_time[id];
        tr.route.push_back({id, clock, clock + run, pmin});
        clock += run;
      }
    }
    inst.trains.push_back(tr);
  }
  inst.set_uniform_d_max(pick(1, spec.max_d_max));
  inst.finalize();
  return inst;
}

RailwayInstance meet_pass() {
  RailwayInstance inst;
  inst.name = "meet-pass";
  inst.blocks = {{1, BlockKind::Station, 2, "A"}, {3, BlockKind::Line, 1, ""}, {2, BlockKind::Station, 2, "B"}};
  Train t1{"T1", Direction::Dir0, 0.5, 1, {{1, 480, 480, 0}, {3, 480, 481, 1}, {2, 481, 481, 0}}, {}};
  Train t2{"T2", Direction::Dir1, 1.0, 1, {{2, 480, 480, 0}, {3, 480, 481, 1}, {1, 481, 481, 0}}, {}};
  inst.trains = {t1, t2};
  inst.set_uniform_d_max(1);
  inst.finalize();
  return inst;
}

// ------------------------------------------------------------- properties

Outcome q_symmetric(const QuboInstance& q) {
  Outcome o;
  for (std::size_t i = 0; i < q.size(); ++i)
    for (std::size_t j = 0; j < q.size(); ++j)
      if (q(i, j) != q(j, i)) o.fail("Q not symmetric at " + std::to_string(i) + "," + std::to_string(j));
  return o;
}

Outcome ising_matches(const QuboInstance& q, std::mt19937_64& rng, int samples) {
  Outcome o;
  const auto is = to_ising(q);
  for (int k = 0; k < samples; ++k) {
    Bits x(q.size());
    for (auto& b : x) b = static_cast<std::uint8_t>(rng() & 1);
    // plain double sum over the full matrix as the reference
    double ref = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i)
      for (std::size_t j = 0; j < q.size(); ++j) ref += x[i] * q(i, j) * x[j];
    const double e = ising_energy(is, to_spins(x)) + is.offset;
    if (std::abs(e - ref) > 1e-9) o.fail("Ising energy differs by " + std::to_string(e - ref));
    if (std::abs(energy(q, x) - ref) > 1e-9) o.fail("QUBO energy differs from x^T Q x");
  }
  return o;
}

namespace {

// Random one-hot configuration, sometimes nudged towards a feasible one.
Bits random_one_hot(const QuboInstance& q, std::mt19937_64& rng) {
  Bits x(q.size(), 0);
  for (const auto& g : q.groups) {
    const auto low = std::uniform_int_distribution<int>(0, 2)(rng) == 0;
    const auto pick = low ? std::size_t{0} : std::uniform_int_distribution<std::size_t>(0, g.size() - 1)(rng);
    x[g[pick]] = 1;
  }
  return x;
}

}  // namespace

Outcome hard_penalty_matches_checker(const RailwayInstance& inst, std::mt19937_64& rng, int samples) {
  Outcome o;
  const auto q = compile(inst, inst.penalties);
  // Most uniform draws are infeasible, so half the samples perturb a feasible
  // base configuration in one to three groups.
  Bits base;
  try {
    base = q.index.encode(exact_order_solver(inst).schedule);
  } catch (const Infeasible&) {
  }
  int feasible_seen = 0;
  for (int k = 0; k < samples; ++k) {
    Bits x;
    if (k % 4 == 3) {
      x.resize(q.size());
      for (auto& b : x) b = static_cast<std::uint8_t>(rng() & 1);
    } else if (k % 2 == 1 && !base.empty()) {
      x = base;
      for (int c = std::uniform_int_distribution<int>(0, 3)(rng); c > 0; --c) {
        const auto& g = q.groups[std::uniform_int_distribution<std::size_t>(0, q.groups.size() - 1)(rng)];
        for (const auto i : g) x[i] = 0;
        x[g[std::uniform_int_distribution<std::size_t>(0, g.size() - 1)(rng)]] = 1;
      }
    } else {
      x = random_one_hot(q, rng);
    }
    const auto parts = decompose(q, x);
    const bool zero = std::abs(parts.hard) <= 1e-9;
    bool ok = false;
    bool lib_ok = false;
    if (broken_groups(q, x).empty()) {
      const auto s = decode(q, x);
      ok = feasible(inst, s);
      lib_ok = check_conditions(inst, UnavoidableDelays(inst), s).empty();
    }
    feasible_seen += ok;
    if (zero != ok) o.fail("f'' = " + std::to_string(parts.hard) + " but oracle says " + (ok ? "feasible" : "infeasible"));
    if (lib_ok != ok) o.fail("constraint checker disagrees with the oracle");
    if (std::abs(energy(q, x) + q.offset_L - (parts.objective + parts.hard)) > 1e-9)
      o.fail("energy does not split into f + f'' - L");
  }
  if (o.ok) o.detail = std::to_string(feasible_seen) + " feasible of " + std::to_string(samples);
  return o;
}

Outcome decode_encode_identity(const RailwayInstance& inst, std::mt19937_64& rng, int samples) {
  Outcome o;
  const auto q = compile(inst, inst.penalties);
  for (int k = 0; k < samples; ++k) {
    const auto x = random_one_hot(q, rng);
    if (q.index.encode(decode(q, x)) != x) o.fail("encode(decode(x)) != x");
  }
  return o;
}

Outcome tau_ordering(const RailwayInstance& inst) {
  Outcome o;
  for (TrainIndex j = 0; j < inst.trains.size(); ++j)
    for (const auto& f : segments(inst, j)) {
      if (f.tau2 < f.tau1) o.fail(inst.trains[j].id + ": tau2 < tau1 after " + std::to_string(f.from));
      if (compute_tau1(inst, j, f.from) != f.tau1 || compute_tau2(inst, j, f.from) != f.tau2)
        o.fail(inst.trains[j].id + ": tau mismatch after " + std::to_string(f.from));
      if (time_reserve(inst, j, f.from) != f.reserve)
        o.fail(inst.trains[j].id + ": reserve mismatch after " + std::to_string(f.from));
    }
  return o;
}

Outcome unavoidable_recursion(const RailwayInstance& inst) {
  Outcome o;
  const UnavoidableDelays du(inst);
  for (const auto& [key, d] : unavoidable(inst))
    if (du.at(key.first, key.second) != d)
      o.fail(inst.trains[key.first].id + " at " + std::to_string(key.second) + ": " +
             std::to_string(du.at(key.first, key.second)) + " vs " + std::to_string(d));
  return o;
}

Outcome pairs_rederived(const RailwayInstance& inst) {
  Outcome o;
  const VariableIndex index(inst);
  const auto cs = build_constraints(inst, index);
  std::set<std::pair<std::size_t, std::size_t>> got;
  for (const auto& p : cs.forbidden_pairs) got.emplace(p.i, p.j);
  const auto want = forbidden_pairs(inst, index);
  for (const auto& p : want)
    if (!got.count(p)) o.fail("missing pair " + std::to_string(p.first) + "," + std::to_string(p.second));
  for (const auto& p : got)
    if (!want.count(p)) o.fail("extra pair " + std::to_string(p.first) + "," + std::to_string(p.second));
  return o;
}

Outcome skip_rule_sound(const RailwayInstance& inst) {
  Outcome o;
  const VariableIndex index(inst);
  const auto with = build_constraints(inst, index, {true});
  const auto without = build_constraints(inst, index, {false});
  if (with.forbidden_pairs != without.forbidden_pairs)
    o.fail("skipping never-conflicting trains changed the pair set");
  return o;
}

}  // namespace oracle
