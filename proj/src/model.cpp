#include "railqubo/model.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <set>

namespace railqubo {

namespace {

[[noreturn]] void invalid(const std::string& what) { throw ValidationError(what); }

}  // namespace

void RailwayInstance::finalize() {
  std::set<BlockId> seen_blocks;
  for (const auto& b : blocks) {
    if (!seen_blocks.insert(b.id).second)
      invalid("duplicate block id " + std::to_string(b.id));
    if (b.capacity < 1) invalid("block " + std::to_string(b.id) + " has capacity < 1");
    if (b.kind == BlockKind::Line && b.capacity != 1)
      invalid("line block " + std::to_string(b.id) + " must have capacity 1");
  }
  if (trains.empty()) invalid("instance has no trains");
  if (d_max.size() != trains.size()) invalid("d_max must be given for every train");

  std::set<std::string> seen_trains;
  for (TrainIndex j = 0; j < trains.size(); ++j) {
    auto& t = trains[j];
    const std::string who = "train " + t.id;
    if (!seen_trains.insert(t.id).second) invalid("duplicate train id " + t.id);
    if (t.weight < 0.0) invalid(who + ": negative weight");
    if (t.initial_delay < 0) invalid(who + ": negative initial delay");
    if (d_max[j] < 0) invalid(who + ": negative d_max");
    if (t.route.empty()) invalid(who + ": empty route");

    std::set<BlockId> visited;
    t.station_route.clear();
    for (std::size_t k = 0; k < t.route.size(); ++k) {
      const auto& e = t.route[k];
      if (!seen_blocks.count(e.block))
        invalid(who + ": unknown block " + std::to_string(e.block));
      if (!visited.insert(e.block).second)
        invalid(who + ": block " + std::to_string(e.block) + " visited twice");
      if (e.t_out < e.t_in) invalid(who + ": leaves block " + std::to_string(e.block) + " before entering");
      if (e.p_min < 0 || e.p_min > e.p_timetable())
        invalid(who + ": p_min outside [0, p_timetable] at block " + std::to_string(e.block));
      if (k + 1 < t.route.size() && e.t_out != t.route[k + 1].t_in)
        invalid(who + ": leaving time of block " + std::to_string(e.block) +
                " differs from entering time of the next block");
      if (k > 0) {
        const auto prev = *line_position(t.route[k - 1].block);
        const auto here = *line_position(e.block);
        const bool forward = here == prev + 1;
        const bool backward = here + 1 == prev;
        if (!forward && !backward) invalid(who + ": route skips along the line");
        if (forward != (t.direction == Direction::Dir0))
          invalid(who + ": route runs against its direction");
      }
      if (is_station(e.block)) t.station_route.push_back(e.block);
    }
    if (!is_station(t.route.front().block) || !is_station(t.route.back().block))
      invalid(who + ": route must start and end at stations");
    if (t.station_route.size() < 2) invalid(who + ": route needs at least two stations");

    for (std::size_t k = 0; k + 1 < t.station_route.size(); ++k) {
      const auto from = *route_position(j, t.station_route[k]);
      const auto to = *route_position(j, t.station_route[k + 1]);
      bool moving = false;
      for (auto m = from + 1; m < to; ++m) moving = moving || t.route[m].p_timetable() > 0;
      if (!moving)
        invalid(who + ": stations " + std::to_string(t.station_route[k]) + " and " +
                std::to_string(t.station_route[k + 1]) +
                " need a line block with positive running time between them");
    }
  }

  std::vector<int> indegree(trains.size(), 0);
  for (const auto& tr : turnovers) {
    if (tr.from >= trains.size() || tr.to >= trains.size() || tr.from == tr.to)
      invalid("turnover references an unknown train");
    if (trains[tr.from].station_route.back() != trains[tr.to].station_route.front())
      invalid("turnover " + trains[tr.from].id + " -> " + trains[tr.to].id +
              " must end where the next train starts");
    if (tr.min_turnover < 0) invalid("negative minimum turnover time");
    ++indegree[tr.to];
  }
  // Kahn's algorithm; leftovers mean a circular turnover chain.
  std::vector<TrainIndex> ready;
  for (TrainIndex j = 0; j < trains.size(); ++j)
    if (indegree[j] == 0) ready.push_back(j);
  std::size_t done = 0;
  while (!ready.empty()) {
    const auto j = ready.back();
    ready.pop_back();
    ++done;
    for (const auto& tr : turnovers)
      if (tr.from == j && --indegree[tr.to] == 0) ready.push_back(tr.to);
  }
  if (done != trains.size()) invalid("turnover chain is circular");
}

const Block& RailwayInstance::block(BlockId id) const {
  for (const auto& b : blocks)
    if (b.id == id) return b;
  throw Error("unknown block " + std::to_string(id));
}

bool RailwayInstance::is_station(BlockId id) const { return block(id).kind == BlockKind::Station; }

TrainIndex RailwayInstance::train_index(const std::string& id) const {
  for (TrainIndex j = 0; j < trains.size(); ++j)
    if (trains[j].id == id) return j;
  throw Error("unknown train " + id);
}

std::optional<std::size_t> RailwayInstance::line_position(BlockId id) const {
  for (std::size_t k = 0; k < blocks.size(); ++k)
    if (blocks[k].id == id) return k;
  return std::nullopt;
}

std::optional<std::size_t> RailwayInstance::station_position(TrainIndex j, BlockId station) const {
  const auto& sr = trains.at(j).station_route;
  const auto it = std::find(sr.begin(), sr.end(), station);
  if (it == sr.end()) return std::nullopt;
  return static_cast<std::size_t>(it - sr.begin());
}

std::optional<std::size_t> RailwayInstance::route_position(TrainIndex j, BlockId b) const {
  const auto& route = trains.at(j).route;
  for (std::size_t k = 0; k < route.size(); ++k)
    if (route[k].block == b) return k;
  return std::nullopt;
}

std::optional<BlockId> RailwayInstance::next_station(TrainIndex j, BlockId station) const {
  const auto pos = station_position(j, station);
  const auto& sr = trains[j].station_route;
  if (!pos || *pos + 1 >= sr.size()) return std::nullopt;
  return sr[*pos + 1];
}

std::optional<BlockId> RailwayInstance::previous_station(TrainIndex j, BlockId station) const {
  const auto pos = station_position(j, station);
  if (!pos || *pos == 0) return std::nullopt;
  return trains[j].station_route[*pos - 1];
}

std::vector<BlockId> RailwayInstance::decision_stations(TrainIndex j) const {
  const auto& sr = trains.at(j).station_route;
  return {sr.begin(), sr.end() - 1};
}

BlockId RailwayInstance::scored_station(TrainIndex j) const {
  const auto& sr = trains.at(j).station_route;
  return sr[sr.size() - 2];
}

const RouteEntry& RailwayInstance::entry(TrainIndex j, BlockId b) const {
  const auto pos = route_position(j, b);
  if (!pos) throw Error("train " + trains.at(j).id + " does not visit block " + std::to_string(b));
  return trains[j].route[*pos];
}

Minutes RailwayInstance::scheduled_departure(TrainIndex j, BlockId station) const {
  return entry(j, station).t_out;
}

Minutes RailwayInstance::scheduled_arrival(TrainIndex j, BlockId station) const {
  return entry(j, station).t_in;
}

void RailwayInstance::set_uniform_d_max(int value) { d_max.assign(trains.size(), value); }

namespace {

struct Segment {
  std::size_t from;  // route index of the departure station
  std::size_t to;    // route index of the next station
};

Segment segment_after(const RailwayInstance& instance, TrainIndex j, BlockId station) {
  if (j >= instance.trains.size()) throw Error("unknown train index " + std::to_string(j));
  const auto next = instance.next_station(j, station);
  if (!instance.station_position(j, station))
    throw Error("station " + std::to_string(station) + " is not on the route of " +
                instance.trains[j].id);
  if (!next)
    throw Error("station " + std::to_string(station) + " is the last station of " +
                instance.trains[j].id);
  return {*instance.route_position(j, station), *instance.route_position(j, *next)};
}

}  // namespace

Minutes time_reserve(const RailwayInstance& instance, TrainIndex j, BlockId station) {
  const auto seg = segment_after(instance, j, station);
  const auto& route = instance.trains[j].route;
  Minutes reserve = 0;
  for (auto k = seg.from + 1; k <= seg.to; ++k) reserve += route[k].p_timetable() - route[k].p_min;
  return reserve;
}

Minutes compute_tau1(const RailwayInstance& instance, TrainIndex j, BlockId station) {
  const auto seg = segment_after(instance, j, station);
  const auto& route = instance.trains[j].route;
  Minutes longest = 0;
  for (auto k = seg.from + 1; k < seg.to; ++k)
    longest = std::max(longest, route[k + 1].t_in - route[k].t_in);
  return longest;
}

Minutes compute_tau2(const RailwayInstance& instance, TrainIndex j, BlockId station) {
  const auto seg = segment_after(instance, j, station);
  const auto& route = instance.trains[j].route;
  return route[seg.to].t_in - route[seg.from].t_out;
}

Minutes turnover_slack(const RailwayInstance& instance, const Turnover& turnover) {
  const auto last = instance.scored_station(turnover.from);
  const auto first = instance.trains[turnover.to].station_route.front();
  return instance.scheduled_departure(turnover.to, first) -
         instance.scheduled_departure(turnover.from, last) -
         compute_tau2(instance, turnover.from, last) - turnover.min_turnover;
}

UnavoidableDelays::UnavoidableDelays(const RailwayInstance& instance)
    : instance_(&instance), by_train_(instance.trains.size()) {
  std::vector<bool> done(instance.trains.size(), false);
  // Turnover chains are acyclic (checked by finalize), so this settles.
  std::size_t remaining = instance.trains.size();
  while (remaining > 0) {
    for (TrainIndex j = 0; j < instance.trains.size(); ++j) {
      if (done[j]) continue;
      bool blocked = false;
      Minutes start = instance.trains[j].initial_delay;
      for (const auto& tr : instance.turnovers) {
        if (tr.to != j) continue;
        if (!done[tr.from]) {
          blocked = true;
          break;
        }
        // d(j',1) > d(j, end-1) - R, so the earliest admissible value is one above.
        const auto carried = at(tr.from, instance.scored_station(tr.from)) -
                             turnover_slack(instance, tr) + 1;
        start = std::max(start, carried);
      }
      if (blocked) continue;
      const auto& sr = instance.trains[j].station_route;
      auto& du = by_train_[j];
      du.assign(sr.size(), 0);
      du[0] = std::max(start, 0);
      for (std::size_t k = 0; k + 1 < sr.size(); ++k)
        du[k + 1] = std::max(du[k] - time_reserve(instance, j, sr[k]), 0);
      done[j] = true;
      --remaining;
    }
  }
}

Minutes UnavoidableDelays::at(TrainIndex j, BlockId station) const {
  const auto pos = instance_->station_position(j, station);
  if (!pos)
    throw Error("station " + std::to_string(station) + " is not on the route of " +
                instance_->trains.at(j).id);
  return by_train_[j][*pos];
}

UnavoidableDelays propagate_unavoidable_delays(const RailwayInstance& instance) {
  return UnavoidableDelays(instance);
}

DelayRange delay_domain(const RailwayInstance& instance, const UnavoidableDelays& du,
                        TrainIndex j, BlockId station) {
  const auto lo = du.at(j, station);
  return {lo, lo + instance.d_max.at(j)};
}

CommonPath common_path(const RailwayInstance& instance, TrainIndex j, TrainIndex k) {
  CommonPath path;
  for (const auto s : instance.trains.at(j).station_route)
    if (instance.station_position(k, s)) path.stations.push_back(s);
  if (!path.stations.empty())
    path.truncated.assign(path.stations.begin(), path.stations.end() - 1);
  return path;
}

std::vector<Resource> contested_resources(const RailwayInstance& instance) {
  std::vector<Resource> out;
  const auto n = instance.trains.size();
  for (TrainIndex j = 0; j < n; ++j) {
    for (TrainIndex k = j + 1; k < n; ++k) {
      const bool same = instance.trains[j].direction == instance.trains[k].direction;
      for (const auto s : common_path(instance, j, k).truncated) {
        const auto next = instance.next_station(j, s);
        if (!next) continue;
        Resource r;
        r.a = j;
        r.a_station = s;
        r.b = k;
        if (same) {
          if (instance.next_station(k, s) != next) continue;
          r.kind = Resource::Kind::SameDirection;
          r.b_station = s;
          r.gap_a = compute_tau1(instance, j, s);
          r.gap_b = compute_tau1(instance, k, s);
        } else {
          if (instance.next_station(k, *next) != s) continue;
          r.kind = Resource::Kind::Opposite;
          r.b_station = *next;
          r.gap_a = compute_tau2(instance, j, s);
          r.gap_b = compute_tau2(instance, k, *next);
        }
        r.offset = instance.scheduled_departure(j, s) - instance.scheduled_departure(k, r.b_station);
        out.push_back(r);
      }
    }
  }
  return out;
}

bool never_conflicting(const Resource& r, const DelayRange& a_range, const DelayRange& b_range) {
  const Minutes diff_lo = b_range.lo - a_range.hi;
  const Minutes diff_hi = b_range.hi - a_range.lo;
  const Minutes bad_lo = r.offset - r.gap_b + 1;
  const Minutes bad_hi = r.offset + r.gap_a - 1;
  return bad_lo > bad_hi || diff_hi < bad_lo || diff_lo > bad_hi;
}

bool trains_never_conflict(const RailwayInstance& instance, const UnavoidableDelays& du,
                           TrainIndex j, TrainIndex k) {
  for (const auto& r : contested_resources(instance)) {
    if (!((r.a == j && r.b == k) || (r.a == k && r.b == j))) continue;
    if (!never_conflicting(r, delay_domain(instance, du, r.a, r.a_station),
                           delay_domain(instance, du, r.b, r.b_station)))
      return false;
  }
  return true;
}

std::string format_hhmm(Minutes t) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d:%02d", t / 60, t % 60);
  return buf;
}

Minutes parse_hhmm(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos || colon == 0 || text.size() - colon != 3)
    throw Error("expected HH:MM, got '" + text + "'");
  int h = 0, m = 0;
  const auto* first = text.data();
  const auto r1 = std::from_chars(first, first + colon, h);
  const auto r2 = std::from_chars(first + colon + 1, first + text.size(), m);
  if (r1.ec != std::errc{} || r1.ptr != first + colon || r2.ec != std::errc{} ||
      r2.ptr != first + text.size() || h < 0 || m < 0 || m > 59)
    throw Error("expected HH:MM, got '" + text + "'");
  return h * 60 + m;
}

}  // namespace railqubo
