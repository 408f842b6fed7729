#include "railqubo/constraints.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace railqubo {

VariableIndex::VariableIndex(const RailwayInstance& instance) : du_(instance) {
  for (TrainIndex j = 0; j < instance.trains.size(); ++j) {
    for (const auto s : instance.decision_stations(j)) {
      const auto range = delay_domain(instance, du_, j, s);
      groups_.push_back({j, s, range, keys_.size()});
      for (auto d = range.lo; d <= range.hi; ++d) {
        keys_.push_back({j, s, d});
        group_of_.push_back(groups_.size() - 1);
      }
    }
  }
}

std::optional<std::size_t> VariableIndex::group_for(TrainIndex j, BlockId station) const {
  for (std::size_t g = 0; g < groups_.size(); ++g)
    if (groups_[g].train == j && groups_[g].station == station) return g;
  return std::nullopt;
}

std::optional<std::size_t> VariableIndex::find(TrainIndex j, BlockId station, Minutes d) const {
  const auto g = group_for(j, station);
  if (!g || !groups_[*g].range.contains(d)) return std::nullopt;
  return groups_[*g].first + static_cast<std::size_t>(d - groups_[*g].range.lo);
}

std::vector<std::uint8_t> VariableIndex::encode(const Schedule& schedule) const {
  std::vector<std::uint8_t> x(size(), 0);
  for (const auto& g : groups_) {
    const auto d = schedule.delay(g.train, g.station);
    if (!g.range.contains(d))
      throw Error("delay " + std::to_string(d) + " of train #" + std::to_string(g.train) +
                  " at station " + std::to_string(g.station) + " is outside its domain");
    x[g.first + static_cast<std::size_t>(d - g.range.lo)] = 1;
  }
  if (schedule.delays.size() != groups_.size()) throw Error("schedule does not match the variable index");
  return x;
}

const char* condition_tag(Condition c) {
  switch (c) {
    case Condition::MinPassing: return "min-passing";
    case Condition::SingleBlock: return "single-block";
    case Condition::Deadlock: return "deadlock";
    case Condition::RollingStock: return "rolling-stock";
  }
  return "?";
}

namespace {

class PairSink {
 public:
  PairSink(const VariableIndex& index, Condition origin) : index_(index), origin_(origin) {}

  /// Forbids x_{j,s,d} together with every x_{k,t,d'} for d' in [lo, hi].
  void forbid(TrainIndex j, BlockId s, Minutes d, TrainIndex k, BlockId t, Minutes lo, Minutes hi) {
    const auto gk = index_.group_for(k, t);
    const auto a = index_.find(j, s, d);
    if (!gk || !a) return;
    const auto& range = index_.groups()[*gk].range;
    for (auto dp = std::max(lo, range.lo); dp <= std::min(hi, range.hi); ++dp) {
      const auto b = index_.groups()[*gk].first + static_cast<std::size_t>(dp - range.lo);
      pairs_.insert({std::min(*a, b), std::max(*a, b), origin_});
    }
  }

  std::vector<ForbiddenPair> take() { return {pairs_.begin(), pairs_.end()}; }

 private:
  const VariableIndex& index_;
  Condition origin_;
  std::set<ForbiddenPair> pairs_;
};

DelayRange range_of(const VariableIndex& index, TrainIndex j, BlockId s) {
  return index.groups()[*index.group_for(j, s)].range;
}

}  // namespace

std::vector<std::vector<std::size_t>> gen_one_hot(const RailwayInstance&, const VariableIndex& index) {
  std::vector<std::vector<std::size_t>> groups;
  for (const auto& g : index.groups()) {
    std::vector<std::size_t> members(g.range.size());
    for (std::size_t k = 0; k < members.size(); ++k) members[k] = g.first + k;
    groups.push_back(std::move(members));
  }
  return groups;
}

std::vector<ForbiddenPair> gen_single_block(const RailwayInstance& instance,
                                            const VariableIndex& index, GenerationOptions options) {
  PairSink sink(index, Condition::SingleBlock);
  const auto& du = index.unavoidable();
  for (TrainIndex j = 0; j < instance.trains.size(); ++j) {
    for (TrainIndex k = 0; k < instance.trains.size(); ++k) {
      if (j == k || instance.trains[j].direction != instance.trains[k].direction) continue;
      if (options.skip_never_conflicting && trains_never_conflict(instance, du, j, k)) continue;
      for (const auto s : common_path(instance, j, k).truncated) {
        if (instance.next_station(j, s) != instance.next_station(k, s)) continue;
        // k leaving s within tau1 after j breaks the headway.
        const Minutes offset = instance.scheduled_departure(j, s) - instance.scheduled_departure(k, s);
        const Minutes tau1 = compute_tau1(instance, j, s);
        const auto a = range_of(index, j, s);
        for (auto d = a.lo; d <= a.hi; ++d)
          sink.forbid(j, s, d, k, s, d + offset, d + offset + tau1 - 1);
      }
    }
  }
  return sink.take();
}

std::vector<ForbiddenPair> gen_deadlock(const RailwayInstance& instance, const VariableIndex& index,
                                        GenerationOptions options) {
  PairSink sink(index, Condition::Deadlock);
  const auto& du = index.unavoidable();
  for (TrainIndex j = 0; j < instance.trains.size(); ++j) {
    for (TrainIndex k = 0; k < instance.trains.size(); ++k) {
      if (j == k || instance.trains[j].direction == instance.trains[k].direction) continue;
      if (options.skip_never_conflicting && trains_never_conflict(instance, du, j, k)) continue;
      for (const auto s : common_path(instance, j, k).truncated) {
        const auto next = instance.next_station(j, s);
        if (!next || instance.next_station(k, *next) != s) continue;
        // k may not leave the far end while j is still on the segment.
        const Minutes offset =
            instance.scheduled_departure(j, s) - instance.scheduled_departure(k, *next);
        const Minutes tau2 = compute_tau2(instance, j, s);
        const auto a = range_of(index, j, s);
        for (auto d = a.lo; d <= a.hi; ++d)
          sink.forbid(j, s, d, k, *next, d + offset, d + offset + tau2 - 1);
      }
    }
  }
  return sink.take();
}

std::vector<ForbiddenPair> gen_min_passing(const RailwayInstance& instance,
                                           const VariableIndex& index) {
  PairSink sink(index, Condition::MinPassing);
  for (TrainIndex j = 0; j < instance.trains.size(); ++j) {
    const auto& sr = instance.trains[j].station_route;
    for (std::size_t p = 0; p + 2 < sr.size(); ++p) {
      const auto s = sr[p];
      const auto reserve = time_reserve(instance, j, s);
      const auto a = range_of(index, j, s);
      for (auto d = a.lo; d <= a.hi; ++d) sink.forbid(j, s, d, j, sr[p + 1], 0, d - reserve - 1);
    }
  }
  return sink.take();
}

std::vector<ForbiddenPair> gen_rolling_stock(const RailwayInstance& instance,
                                             const VariableIndex& index) {
  PairSink sink(index, Condition::RollingStock);
  for (const auto& tr : instance.turnovers) {
    const auto s = instance.scored_station(tr.from);
    const auto first = instance.trains[tr.to].station_route.front();
    const auto slack = turnover_slack(instance, tr);
    const auto a = range_of(index, tr.from, s);
    for (auto d = a.lo; d <= a.hi; ++d) sink.forbid(tr.from, s, d, tr.to, first, 0, d - slack);
  }
  return sink.take();
}

ConstraintSet build_constraints(const RailwayInstance& instance, const VariableIndex& index,
                                GenerationOptions options) {
  ConstraintSet cs;
  cs.one_hot_groups = gen_one_hot(instance, index);

  std::set<ForbiddenPair> merged;
  for (auto&& part : {gen_min_passing(instance, index), gen_single_block(instance, index, options),
                      gen_deadlock(instance, index, options), gen_rolling_stock(instance, index)})
    merged.insert(part.begin(), part.end());
  cs.forbidden_pairs.assign(merged.begin(), merged.end());

  for (const auto& b : instance.blocks) {
    if (b.kind != BlockKind::Station) continue;
    CapacityCheck check{b.id, b.capacity, {}};
    for (TrainIndex j = 0; j < instance.trains.size(); ++j)
      if (instance.station_position(j, b.id)) check.trains.push_back(j);
    if (static_cast<int>(check.trains.size()) > b.capacity) cs.capacity_checks.push_back(check);
  }
  return cs;
}

std::string describe(const RailwayInstance& instance, const VariableIndex& index,
                     const ConstraintSet& constraints) {
  std::ostringstream out;
  const auto name = [&](std::size_t i) {
    const auto& k = index.key(i);
    return "x[" + instance.trains[k.train].id + "," + std::to_string(k.station) + "," +
           std::to_string(k.delay) + "]";
  };
  out << "# variables " << index.size() << "\n";
  for (std::size_t g = 0; g < constraints.one_hot_groups.size(); ++g) {
    out << "group " << g << ":";
    for (const auto i : constraints.one_hot_groups[g]) out << ' ' << i;
    out << "\n";
  }
  for (const auto& p : constraints.forbidden_pairs)
    out << "pair " << p.i << ' ' << p.j << ' ' << condition_tag(p.origin) << "  " << name(p.i)
        << ' ' << name(p.j) << "\n";
  for (const auto& c : constraints.capacity_checks) {
    out << "capacity " << c.station << " tracks " << c.capacity << " trains";
    for (const auto j : c.trains) out << ' ' << instance.trains[j].id;
    out << "\n";
  }
  return out.str();
}

std::vector<CapacityViolation> check_capacity(const RailwayInstance& instance,
                                              const Schedule& schedule) {
  const auto occ = occupations(instance, schedule);
  std::vector<CapacityViolation> out;
  for (const auto& b : instance.blocks) {
    if (b.kind != BlockKind::Station) continue;
    std::vector<const Occupation*> here;
    for (const auto& o : occ)
      if (o.block == b.id) here.push_back(&o);
    std::set<std::vector<TrainIndex>> reported;
    // Closed intervals: the densest instant is always some arrival time.
    std::vector<Minutes> instants;
    for (const auto* o : here) instants.push_back(o->t_in);
    std::sort(instants.begin(), instants.end());
    instants.erase(std::unique(instants.begin(), instants.end()), instants.end());
    for (const auto t : instants) {
      std::vector<TrainIndex> present;
      for (const auto* o : here)
        if (o->t_in <= t && t <= o->t_out) present.push_back(o->train);
      if (static_cast<int>(present.size()) <= b.capacity) continue;
      std::sort(present.begin(), present.end());
      if (reported.insert(present).second) out.push_back({b.id, t, present});
    }
  }
  return out;
}

std::vector<std::string> check_conditions(const RailwayInstance& instance,
                                          const UnavoidableDelays& du, const Schedule& schedule) {
  check_shape(instance, schedule);
  std::vector<std::string> bad;
  const auto n = instance.trains.size();
  const auto id = [&](TrainIndex j) { return instance.trains[j].id; };
  const auto leave = [&](TrainIndex j, BlockId s) {
    return instance.scheduled_departure(j, s) + schedule.delay(j, s);
  };

  for (TrainIndex j = 0; j < n; ++j) {
    for (const auto s : instance.decision_stations(j)) {
      const auto d = schedule.delay(j, s);
      if (!delay_domain(instance, du, j, s).contains(d))
        bad.push_back("delay bound: " + id(j) + " at " + std::to_string(s));
    }
    const auto& sr = instance.trains[j].station_route;
    for (std::size_t p = 0; p + 2 < sr.size(); ++p) {
      if (schedule.delay(j, sr[p + 1]) < schedule.delay(j, sr[p]) - time_reserve(instance, j, sr[p]))
        bad.push_back("minimum passing time: " + id(j) + " " + std::to_string(sr[p]) + "->" +
                      std::to_string(sr[p + 1]));
    }
  }

  for (TrainIndex j = 0; j < n; ++j) {
    for (TrainIndex k = 0; k < n; ++k) {
      if (j == k) continue;
      const bool same = instance.trains[j].direction == instance.trains[k].direction;
      for (const auto s : common_path(instance, j, k).truncated) {
        const auto next = instance.next_station(j, s);
        if (same && instance.next_station(k, s) == next) {
          // j is the leader whenever k leaves no earlier than j.
          const auto tj = leave(j, s), tk = leave(k, s);
          if (tk >= tj && tk < tj + compute_tau1(instance, j, s))
            bad.push_back("single block occupation: " + id(j) + " then " + id(k) + " from " +
                          std::to_string(s));
        } else if (!same && next && instance.next_station(k, *next) == s) {
          const auto tj = leave(j, s), tk = leave(k, *next);
          if (tk >= tj && tk < tj + compute_tau2(instance, j, s))
            bad.push_back("deadlock: " + id(j) + " " + std::to_string(s) + "->" +
                          std::to_string(*next) + " meets " + id(k));
        }
      }
    }
  }

  for (const auto& tr : instance.turnovers) {
    const auto s = instance.scored_station(tr.from);
    const auto first = instance.trains[tr.to].station_route.front();
    if (!(schedule.delay(tr.to, first) > schedule.delay(tr.from, s) - turnover_slack(instance, tr)))
      bad.push_back("turnover: " + id(tr.from) + " -> " + id(tr.to));
  }
  return bad;
}

}  // namespace railqubo
