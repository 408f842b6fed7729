#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "railqubo/model.hpp"
#include "railqubo/schedule.hpp"

namespace railqubo {

/// One binary decision: train leaves station with the given delay.
struct VarKey {
  TrainIndex train = 0;
  BlockId station = 0;
  Minutes delay = 0;
};

/// Dense numbering of the (train, station, delay) variables. Variables of one
/// (train, station) delay domain occupy a contiguous range, ordered by train,
/// then station along the route, then delay.
class VariableIndex {
 public:
  struct Group {
    TrainIndex train = 0;
    BlockId station = 0;
    DelayRange range;
    std::size_t first = 0;
  };

  VariableIndex() = default;
  explicit VariableIndex(const RailwayInstance& instance);

  std::size_t size() const { return keys_.size(); }
  const VarKey& key(std::size_t i) const { return keys_.at(i); }
  std::optional<std::size_t> find(TrainIndex j, BlockId station, Minutes d) const;

  const std::vector<Group>& groups() const { return groups_; }
  std::size_t group_of(std::size_t i) const { return group_of_.at(i); }
  std::optional<std::size_t> group_for(TrainIndex j, BlockId station) const;

  const UnavoidableDelays& unavoidable() const { return du_; }

  /// Bit vector with the variables of `schedule` set. Throws Error when a delay
  /// lies outside its domain.
  std::vector<std::uint8_t> encode(const Schedule& schedule) const;

 private:
  UnavoidableDelays du_;
  std::vector<VarKey> keys_;
  std::vector<Group> groups_;
  std::vector<std::size_t> group_of_;
};

enum class Condition { MinPassing, SingleBlock, Deadlock, RollingStock };

const char* condition_tag(Condition c);

/// Two variables that must not both be set; i < j.
struct ForbiddenPair {
  std::size_t i = 0;
  std::size_t j = 0;
  Condition origin = Condition::SingleBlock;

  auto operator<=>(const ForbiddenPair& o) const {
    if (auto c = i <=> o.i; c != 0) return c;
    return j <=> o.j;
  }
  bool operator==(const ForbiddenPair& o) const { return i == o.i && j == o.j; }
};

struct CapacityCheck {
  BlockId station = 0;
  int capacity = 1;
  std::vector<TrainIndex> trains;
};

struct ConstraintSet {
  std::vector<std::vector<std::size_t>> one_hot_groups;
  std::vector<ForbiddenPair> forbidden_pairs;  // sorted, unique
  std::vector<CapacityCheck> capacity_checks;
};

struct GenerationOptions {
  /// Skip train pairs whose delay windows can never meet on a shared segment.
  bool skip_never_conflicting = true;
};

std::vector<std::vector<std::size_t>> gen_one_hot(const RailwayInstance& instance,
                                                  const VariableIndex& index);
std::vector<ForbiddenPair> gen_single_block(const RailwayInstance& instance,
                                            const VariableIndex& index,
                                            GenerationOptions options = {});
std::vector<ForbiddenPair> gen_deadlock(const RailwayInstance& instance, const VariableIndex& index,
                                        GenerationOptions options = {});
std::vector<ForbiddenPair> gen_min_passing(const RailwayInstance& instance,
                                           const VariableIndex& index);
std::vector<ForbiddenPair> gen_rolling_stock(const RailwayInstance& instance,
                                             const VariableIndex& index);

/// All groups and the union of every condition's pairs.
ConstraintSet build_constraints(const RailwayInstance& instance, const VariableIndex& index,
                                GenerationOptions options = {});

/// Human-readable listing of groups and pairs with their condition tags.
std::string describe(const RailwayInstance& instance, const VariableIndex& index,
                     const ConstraintSet& constraints);

struct CapacityViolation {
  BlockId station = 0;
  Minutes time = 0;
  std::vector<TrainIndex> trains;  // more than the station's capacity
};

/// Instants where more trains than tracks occupy a station. Verification only;
/// this condition is not part of the QUBO.
std::vector<CapacityViolation> check_capacity(const RailwayInstance& instance,
                                              const Schedule& schedule);

/// Direct check of the delay bounds and of the minimum passing, single block,
/// deadlock and turnover inequalities. Returns one line per violation.
std::vector<std::string> check_conditions(const RailwayInstance& instance,
                                          const UnavoidableDelays& du, const Schedule& schedule);

}  // namespace railqubo
