#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace railqubo {

/// Minutes since midnight. All timetable arithmetic runs at one-minute resolution.
using Minutes = int;
using BlockId = int;
using TrainIndex = std::size_t;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an instance violates one of the structural invariants.
class ValidationError : public Error {
 public:
  using Error::Error;
};

enum class BlockKind { Line, Station };
enum class Direction { Dir0, Dir1 };

struct Block {
  BlockId id = 0;
  BlockKind kind = BlockKind::Line;
  int capacity = 1;  // number of tracks; line blocks always hold one train
  std::string name;
};

/// One row of a train's timetable: the scheduled occupation of a block.
struct RouteEntry {
  BlockId block = 0;
  Minutes t_in = 0;
  Minutes t_out = 0;
  Minutes p_min = 0;

  Minutes p_timetable() const { return t_out - t_in; }
};

struct Train {
  std::string id;
  Direction direction = Direction::Dir0;
  double weight = 1.0;
  Minutes initial_delay = 0;
  std::vector<RouteEntry> route;

  /// Station blocks of the route, in travel order.
  std::vector<BlockId> station_route;
};

/// Rolling stock turnover: `to` starts with the train set that ran `from`.
struct Turnover {
  TrainIndex from = 0;
  TrainIndex to = 0;
  Minutes min_turnover = 0;
};

struct Penalties {
  double p_sum = 1.75;
  double p_pair = 1.75;
};

class RailwayInstance {
 public:
  std::string name;
  std::string description;
  std::vector<Block> blocks;  // listed in line order
  std::vector<Train> trains;
  std::vector<int> d_max;  // per train
  std::vector<Turnover> turnovers;
  Penalties penalties;

  /// Fills station_route from the block kinds and checks every invariant.
  /// Throws ValidationError naming the violated invariant.
  void finalize();

  const Block& block(BlockId id) const;
  bool is_station(BlockId id) const;
  TrainIndex train_index(const std::string& id) const;
  std::optional<std::size_t> line_position(BlockId id) const;

  /// Position of `station` in train j's station route, if present.
  std::optional<std::size_t> station_position(TrainIndex j, BlockId station) const;
  /// Route index (into Train::route) of `block`, if the train visits it.
  std::optional<std::size_t> route_position(TrainIndex j, BlockId block) const;

  /// Following station on j's route, if any.
  std::optional<BlockId> next_station(TrainIndex j, BlockId station) const;
  std::optional<BlockId> previous_station(TrainIndex j, BlockId station) const;

  /// Stations where j's departure is a decision (all but the last), i.e. S*_j.
  std::vector<BlockId> decision_stations(TrainIndex j) const;
  /// Penultimate station s_{j,end-1}; the one whose departure delay is scored.
  BlockId scored_station(TrainIndex j) const;

  Minutes scheduled_departure(TrainIndex j, BlockId station) const;
  Minutes scheduled_arrival(TrainIndex j, BlockId station) const;

  /// Sets a uniform maximum secondary delay for every train.
  void set_uniform_d_max(int value);

 private:
  const RouteEntry& entry(TrainIndex j, BlockId block) const;
};

/// Time reserve on the run from `station` to the next station of j, counting
/// every block after `station` up to and including the next station.
Minutes time_reserve(const RailwayInstance& instance, TrainIndex j, BlockId station);

/// Longest single intermediate block traversal on the segment starting at `station`.
Minutes compute_tau1(const RailwayInstance& instance, TrainIndex j, BlockId station);

/// Scheduled running time from leaving `station` to entering the next station.
Minutes compute_tau2(const RailwayInstance& instance, TrainIndex j, BlockId station);

/// Slack R(j,j') of a turnover: how much delay the arriving train may carry
/// before the departing one is affected.
Minutes turnover_slack(const RailwayInstance& instance, const Turnover& turnover);

/// Unavoidable (primary) delay d_U per train and station.
class UnavoidableDelays {
 public:
  UnavoidableDelays() = default;
  explicit UnavoidableDelays(const RailwayInstance& instance);

  Minutes at(TrainIndex j, BlockId station) const;
  const std::vector<Minutes>& along(TrainIndex j) const { return by_train_[j]; }

 private:
  const RailwayInstance* instance_ = nullptr;
  std::vector<std::vector<Minutes>> by_train_;  // indexed like station_route
};

UnavoidableDelays propagate_unavoidable_delays(const RailwayInstance& instance);

/// Admissible departure delays A_{j,s} = [d_U, d_U + d_max].
struct DelayRange {
  Minutes lo = 0;
  Minutes hi = 0;

  std::size_t size() const { return static_cast<std::size_t>(hi - lo + 1); }
  bool contains(Minutes d) const { return d >= lo && d <= hi; }
};

DelayRange delay_domain(const RailwayInstance& instance, const UnavoidableDelays& du,
                        TrainIndex j, BlockId station);

struct CommonPath {
  std::vector<BlockId> stations;   // S_{j,j'} in j's travel order
  std::vector<BlockId> truncated;  // S*_{j,j'}: the final element dropped
};

CommonPath common_path(const RailwayInstance& instance, TrainIndex j, TrainIndex k);

/// A headway or meeting requirement between two trains on one station-to-station
/// segment. With diff = d(b, b_station) - d(a, a_station), exactly one order
/// must hold:
///   a first:  diff >= offset + gap_a
///   b first:  diff <= offset - gap_b
/// where offset = t_out(a, a_station) - t_out(b, b_station). Same-direction
/// resources depart the same station (gaps are tau1); opposite-direction
/// resources depart the two ends of a shared segment (gaps are tau2).
struct Resource {
  enum class Kind { SameDirection, Opposite };
  Kind kind = Kind::SameDirection;
  TrainIndex a = 0;
  BlockId a_station = 0;
  TrainIndex b = 0;
  BlockId b_station = 0;
  Minutes offset = 0;
  Minutes gap_a = 0;
  Minutes gap_b = 0;

  /// d(b) >= d(a) + lag_a_first() when a goes first.
  Minutes lag_a_first() const { return offset + gap_a; }
  /// d(a) >= d(b) + lag_b_first() when b goes first.
  Minutes lag_b_first() const { return gap_b - offset; }
  bool in_conflict(Minutes d_a, Minutes d_b) const {
    const Minutes diff = d_b - d_a;
    return diff > offset - gap_b && diff < offset + gap_a;
  }
};

/// Every contested segment between a pair of trains, each listed once.
std::vector<Resource> contested_resources(const RailwayInstance& instance);

/// Interval test on delay windows: true when no choice of delays inside the
/// domains can bring the two trains into conflict on this resource.
bool never_conflicting(const Resource& r, const DelayRange& a_range, const DelayRange& b_range);

/// True when every resource shared by j and k is never conflicting.
bool trains_never_conflict(const RailwayInstance& instance, const UnavoidableDelays& du,
                           TrainIndex j, TrainIndex k);

std::string format_hhmm(Minutes t);
Minutes parse_hhmm(const std::string& text);

}  // namespace railqubo
