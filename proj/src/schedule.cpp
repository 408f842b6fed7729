#include "railqubo/schedule.hpp"

#include <algorithm>

namespace railqubo {

Minutes Schedule::delay(TrainIndex j, BlockId station) const {
  const auto it = delays.find({j, station});
  if (it == delays.end())
    throw Error("schedule has no delay for train #" + std::to_string(j) + " at station " +
                std::to_string(station));
  return it->second;
}

Schedule Schedule::on_time(const RailwayInstance& instance) {
  Schedule s;
  for (TrainIndex j = 0; j < instance.trains.size(); ++j)
    for (const auto st : instance.decision_stations(j)) s.set(j, st, 0);
  return s;
}

Schedule Schedule::unavoidable(const RailwayInstance& instance, const UnavoidableDelays& du) {
  Schedule s;
  for (TrainIndex j = 0; j < instance.trains.size(); ++j)
    for (const auto st : instance.decision_stations(j)) s.set(j, st, du.at(j, st));
  return s;
}

void check_shape(const RailwayInstance& instance, const Schedule& schedule) {
  std::size_t expected = 0;
  for (TrainIndex j = 0; j < instance.trains.size(); ++j) {
    for (const auto st : instance.decision_stations(j)) {
      ++expected;
      schedule.delay(j, st);
    }
  }
  if (schedule.delays.size() != expected) {
    for (const auto& [key, d] : schedule.delays) {
      const auto [j, st] = key;
      if (j >= instance.trains.size()) throw Error("schedule references unknown train #" + std::to_string(j));
      if (!instance.next_station(j, st))
        throw Error("schedule references block " + std::to_string(st) +
                    " which is not a decision station of " + instance.trains[j].id);
    }
  }
}

std::vector<Occupation> occupations(const RailwayInstance& instance, const Schedule& schedule) {
  check_shape(instance, schedule);
  std::vector<Occupation> out;
  for (TrainIndex j = 0; j < instance.trains.size(); ++j) {
    const auto& train = instance.trains[j];
    const auto& route = train.route;
    Minutes shift = 0;  // delay carried by the blocks being traversed
    for (std::size_t k = 0; k < route.size(); ++k) {
      const auto& e = route[k];
      Occupation o{j, e.block, e.t_in + shift, e.t_out + shift, instance.is_station(e.block)};
      if (o.is_station) {
        if (k == 0) o.t_in = e.t_in + std::min(schedule.delay(j, e.block), train.initial_delay);
        if (k + 1 < route.size()) {
          shift = schedule.delay(j, e.block);
          o.t_out = e.t_out + shift;
        } else {
          o.t_out = o.t_in + e.p_timetable();
        }
      }
      out.push_back(o);
    }
  }
  return out;
}

std::map<std::pair<TrainIndex, BlockId>, Minutes> secondary_delays(
    const RailwayInstance& instance, const UnavoidableDelays& du, const Schedule& schedule) {
  check_shape(instance, schedule);
  std::map<std::pair<TrainIndex, BlockId>, Minutes> out;
  for (const auto& [key, d] : schedule.delays) out[key] = d - du.at(key.first, key.second);
  return out;
}

Minutes max_secondary_delay(const RailwayInstance& instance, const UnavoidableDelays& du,
                            const Schedule& schedule) {
  Minutes worst = 0;
  for (const auto& [key, ds] : secondary_delays(instance, du, schedule)) worst = std::max(worst, ds);
  return worst;
}

Minutes scored_delay_sum(const RailwayInstance& instance, const UnavoidableDelays& du,
                         const Schedule& schedule) {
  Minutes sum = 0;
  for (TrainIndex j = 0; j < instance.trains.size(); ++j) {
    const auto s = instance.scored_station(j);
    sum += schedule.delay(j, s) - du.at(j, s);
  }
  return sum;
}

double schedule_objective(const RailwayInstance& instance, const UnavoidableDelays& du,
                          const Schedule& schedule) {
  double f = 0.0;
  for (TrainIndex j = 0; j < instance.trains.size(); ++j) {
    if (instance.d_max[j] == 0) continue;
    const auto s = instance.scored_station(j);
    f += instance.trains[j].weight * (schedule.delay(j, s) - du.at(j, s)) / instance.d_max[j];
  }
  return f;
}

}  // namespace railqubo
