#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "railqubo/constraints.hpp"
#include "railqubo/model.hpp"
#include "railqubo/qubo.hpp"
#include "railqubo/schedule.hpp"

namespace railqubo {

/// Worker count for parallel solvers: RAILQUBO_THREADS if set, else the
/// hardware concurrency. Never below 1.
unsigned solver_threads();

// ---------------------------------------------------------------- spectrum

enum class SpectrumMode { Full, OneHotRestricted, OneHotPlusSingleViolations };

struct SpectrumOptions {
  SpectrumMode mode = SpectrumMode::OneHotRestricted;
  std::size_t levels = 10;           // lowest distinct energies kept
  std::size_t representatives = 16;  // configs stored per level (smallest bit strings)
  std::uint64_t max_configs = 100'000'000;
  std::size_t max_full_bits = 30;
  double tolerance = 1e-9;  // energies closer than this share a level
  unsigned threads = 0;     // 0 = solver_threads()
};

struct SpectrumLevel {
  double energy = 0.0;
  std::uint64_t degeneracy = 0;
  std::uint64_t feasible_count = 0;  // configs of this level with f'' = 0
  std::vector<Bits> representatives;

  bool feasible() const { return feasible_count > 0; }
};

struct Spectrum {
  SpectrumMode mode = SpectrumMode::OneHotRestricted;
  std::uint64_t configs_scanned = 0;
  std::vector<SpectrumLevel> levels;  // strictly increasing energy

  const SpectrumLevel* lowest_feasible() const;
};

/// Number of one-hot-satisfying configurations, or nullopt on overflow.
std::optional<std::uint64_t> restricted_space_size(const QuboInstance& qubo);

/// Throws Error when the requested space exceeds the configured caps.
Spectrum enumerate_spectrum(const QuboInstance& qubo, const SpectrumOptions& options = {});

/// True when no group is broken and no forbidden pair is fully set.
bool is_feasible(const QuboInstance& qubo, const Bits& x);

// ------------------------------------------------------- simulated annealing

struct AnnealParams {
  std::size_t sweeps = 1000;
  double beta_start = 0.1;
  double beta_end = 4.0;
  std::size_t restarts = 32;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

struct AnnealResult {
  Bits best;
  double energy = std::numeric_limits<double>::infinity();
  std::vector<double> restart_energies;
};

/// Single-spin-flip Metropolis annealing with a geometric inverse temperature
/// schedule. Each restart draws from its own generator derived from the seed,
/// so results do not depend on the thread count.
AnnealResult simulated_annealing(const QuboInstance& qubo, const AnnealParams& params = {});

// ------------------------------------------------------ precedence solvers

class Infeasible : public Error {
 public:
  using Error::Error;
};

/// Difference constraints d[to] >= d[from] + weight between decision delays.
struct DelayEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  Minutes weight = 0;
};

/// Decision delays of one instance as nodes of a difference-constraint graph:
/// lower bounds d_U, upper bounds d_U + d_max, running-time and turnover edges.
class DelayNetwork {
 public:
  explicit DelayNetwork(const RailwayInstance& instance);

  std::size_t size() const { return keys_.size(); }
  std::size_t node(TrainIndex j, BlockId station) const;
  const std::pair<TrainIndex, BlockId>& key(std::size_t v) const { return keys_[v]; }
  Minutes lower(std::size_t v) const { return lo_[v]; }
  Minutes upper(std::size_t v) const { return hi_[v]; }
  const UnavoidableDelays& unavoidable() const { return du_; }
  const std::vector<DelayEdge>& edges() const { return edges_; }

  /// Edge enforcing one order on a resource.
  DelayEdge precedence(const Resource& r, bool a_first) const;

  /// Least delays meeting every edge plus `extra`. nullopt on a positive cycle,
  /// or when `bounded` and some delay must exceed its upper bound.
  std::optional<std::vector<Minutes>> least(const std::vector<DelayEdge>& extra,
                                            bool bounded) const;

  Schedule to_schedule(const std::vector<Minutes>& d) const;
  bool within_bounds(const std::vector<Minutes>& d) const;

 private:
  const RailwayInstance* instance_;
  UnavoidableDelays du_;
  std::vector<std::pair<TrainIndex, BlockId>> keys_;
  std::map<std::pair<TrainIndex, BlockId>, std::size_t> node_of_;
  std::vector<Minutes> lo_, hi_;
  std::vector<DelayEdge> edges_;
};

struct Precedence {
  Resource resource;
  bool a_first = true;
};

/// One precedence per resource shared by two trains, read off a schedule.
using OrderAssignment = std::vector<Precedence>;

OrderAssignment order_assignment(const RailwayInstance& instance, const Schedule& schedule);

enum class OrderObjective {
  WeightedDelay,      // weighted, normalised secondary delay at penultimate stations
  MaxSecondaryDelay,  // largest secondary delay at any decision station
};

struct OrderSolution {
  Schedule schedule;
  double objective = 0.0;
  OrderAssignment assignment;
  std::size_t nodes_explored = 0;
};

/// Branch and bound over train orders on contested resources. Each node takes
/// the least delays consistent with the orders fixed so far, which bound the
/// monotone objective from below. Throws Infeasible when no order keeps every
/// delay within d_max.
OrderSolution exact_order_solver(const RailwayInstance& instance,
                                 OrderObjective objective = OrderObjective::WeightedDelay);

enum class Dispatch { FCFS, FLFS, AMCC };

const char* dispatch_name(Dispatch rule);

struct HeuristicResult {
  Schedule schedule;
  bool within_bounds = true;  // false if some delay exceeds d_U + d_max
  OrderAssignment assignment;
  std::vector<std::string> log;
};

/// Greedy conflict resolution. Throws Infeasible when the fixed orders leave no
/// consistent schedule at all.
HeuristicResult dispatch(const RailwayInstance& instance, Dispatch rule);
inline HeuristicResult fcfs(const RailwayInstance& instance) { return dispatch(instance, Dispatch::FCFS); }
inline HeuristicResult flfs(const RailwayInstance& instance) { return dispatch(instance, Dispatch::FLFS); }
inline HeuristicResult amcc(const RailwayInstance& instance) { return dispatch(instance, Dispatch::AMCC); }

// ------------------------------------------------------------------ reports

struct SolverReport {
  std::string method;
  std::vector<std::pair<std::string, std::string>> params;
  bool feasible = false;
  std::optional<Bits> config;
  std::optional<EnergyParts> energy;  // when a QUBO configuration exists
  std::optional<Schedule> schedule;
  double objective = 0.0;
  Minutes max_secondary = 0;
  Minutes delay_sum = 0;
  OrderSignature signature;
  std::vector<std::string> violations;  // condition and capacity failures
  std::optional<Spectrum> spectrum;
  std::vector<std::string> notes;
};

/// Fills schedule metrics, violations and the feasibility flag. The encoded
/// energy is filled in too when `qubo` is given and the schedule fits its domains.
void complete_report(const RailwayInstance& instance, const QuboInstance* qubo,
                     SolverReport& report);

struct CrossValidation {
  bool match = false;
  double ground_energy = 0.0;
  std::uint64_t ground_degeneracy = 0;
  double ground_objective = 0.0;
  double order_objective = 0.0;
  double order_energy = 0.0;
  OrderSignature order_signature;
  std::vector<OrderSignature> ground_signatures;
  std::vector<std::string> mismatches;
};

/// Runs the exact order solver and the restricted enumeration and compares
/// energies, objectives and train orders.
CrossValidation cross_validate(const RailwayInstance& instance, const Penalties& penalties);

}  // namespace railqubo
