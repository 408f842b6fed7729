#pragma once

#include <map>
#include <utility>
#include <vector>

#include "railqubo/model.hpp"

namespace railqubo {

/// Departure delays per (train, decision station). Leaving the last station of
/// a route is never decided, so it carries no entry.
struct Schedule {
  std::map<std::pair<TrainIndex, BlockId>, Minutes> delays;

  Minutes delay(TrainIndex j, BlockId station) const;
  void set(TrainIndex j, BlockId station, Minutes d) { delays[{j, station}] = d; }

  bool operator==(const Schedule&) const = default;

  /// Every train leaves on time.
  static Schedule on_time(const RailwayInstance& instance);
  /// Every train carries only its unavoidable delay (the conflicted timetable).
  static Schedule unavoidable(const RailwayInstance& instance, const UnavoidableDelays& du);
};

/// Actual occupation of one block by one train.
struct Occupation {
  TrainIndex train = 0;
  BlockId block = 0;
  Minutes t_in = 0;
  Minutes t_out = 0;
  bool is_station = false;
};

/// Expands a schedule into block occupations. Line blocks are run as scheduled,
/// shifted by the delay at the preceding station; the final station is held for
/// its scheduled dwell. Throws Error on missing or unknown entries.
std::vector<Occupation> occupations(const RailwayInstance& instance, const Schedule& schedule);

/// Secondary delay d - d_U at every decision station.
std::map<std::pair<TrainIndex, BlockId>, Minutes> secondary_delays(
    const RailwayInstance& instance, const UnavoidableDelays& du, const Schedule& schedule);

Minutes max_secondary_delay(const RailwayInstance& instance, const UnavoidableDelays& du,
                            const Schedule& schedule);

/// Sum of secondary delays on leaving each train's penultimate station.
Minutes scored_delay_sum(const RailwayInstance& instance, const UnavoidableDelays& du,
                         const Schedule& schedule);

/// Weighted, normalised secondary delay at the penultimate stations: the
/// objective shared by the QUBO and the precedence model.
double schedule_objective(const RailwayInstance& instance, const UnavoidableDelays& du,
                          const Schedule& schedule);

/// Throws Error unless the schedule has exactly one delay per decision station.
void check_shape(const RailwayInstance& instance, const Schedule& schedule);

}  // namespace railqubo
