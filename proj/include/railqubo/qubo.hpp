#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "railqubo/constraints.hpp"
#include "railqubo/model.hpp"
#include "railqubo/schedule.hpp"

namespace railqubo {

using Bits = std::vector<std::uint8_t>;

/// Effective QUBO f'(x) = x^T Q x with Q symmetric. Linear terms live on the
/// diagonal. `offset_L` = p_sum * (number of one-hot groups) is the constant
/// dropped when expanding the squared one-hot penalties, so a feasible x has
/// f'(x) = f(x) - L.
class QuboInstance {
 public:
  QuboInstance() = default;
  explicit QuboInstance(std::size_t n) : n_(n), q_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return q_[i * n_ + j]; }
  /// Adds v to Q_ij and Q_ji (once on the diagonal).
  void add_symmetric(std::size_t i, std::size_t j, double v);
  const std::vector<double>& dense() const { return q_; }

  double p_sum = 0.0;
  double p_pair = 0.0;
  double offset_L = 0.0;
  std::vector<double> objective;                     // c, one entry per variable
  std::vector<std::vector<std::size_t>> groups;      // one-hot groups
  std::vector<ForbiddenPair> pairs;                  // forbidden pairs
  VariableIndex index;                               // empty for imported matrices
  std::vector<std::string> warnings;

 private:
  std::size_t n_ = 0;
  std::vector<double> q_;
};

/// c_i = w_j (d - d_U(j, s*)) / d_max(j) on the penultimate station s*, else 0.
std::vector<double> build_objective(const RailwayInstance& instance, const VariableIndex& index);

/// Builds Q from the constraint structure, the objective and the penalty
/// constants. Throws Error on nonpositive penalties; records a warning when a
/// penalty does not exceed the largest objective weight.
QuboInstance assemble(const ConstraintSet& constraints, const std::vector<double>& c, double p_sum,
                      double p_pair);

/// Index, constraints, objective and assembly in one step.
QuboInstance compile(const RailwayInstance& instance, const Penalties& penalties,
                     GenerationOptions options = {});

double energy(const QuboInstance& qubo, const Bits& x);

struct EnergyParts {
  double objective = 0.0;  // f(x)
  double pair = 0.0;       // P_pair(x)
  double sum = 0.0;        // P_sum(x), without the dropped constant
  double hard = 0.0;       // f''(x) = P_pair + P_sum + L; zero iff feasible
  double total() const { return objective + pair + sum; }
};

EnergyParts decompose(const QuboInstance& qubo, const Bits& x);

/// Ising form: E(s) = sum_i h_i s_i + sum_{i != j} J_ij s_i s_j, with
/// E(2x - 1) + offset = x^T Q x.
struct IsingInstance {
  std::size_t n = 0;
  std::vector<double> J;  // dense symmetric, zero diagonal
  std::vector<double> h;
  double offset = 0.0;

  double coupling(std::size_t i, std::size_t j) const { return J[i * n + j]; }
};

IsingInstance to_ising(const QuboInstance& qubo);
double ising_energy(const IsingInstance& ising, const std::vector<int>& spins);
std::vector<int> to_spins(const Bits& x);

/// One-hot groups with zero or several bits set.
class BrokenOneHot : public Error {
 public:
  explicit BrokenOneHot(std::vector<std::size_t> groups);
  const std::vector<std::size_t>& groups() const { return groups_; }

 private:
  std::vector<std::size_t> groups_;
};

std::vector<std::size_t> broken_groups(const QuboInstance& qubo, const Bits& x);
Schedule decode(const QuboInstance& qubo, const Bits& x);

/// Trains in departure order at every station where any train departs, ordered
/// along the line. Ties go to the earlier timetable time, then the train id.
struct StationOrder {
  BlockId station = 0;
  std::vector<TrainIndex> trains;
  bool operator==(const StationOrder&) const = default;
};
using OrderSignature = std::vector<StationOrder>;

OrderSignature equivalence_signature(const RailwayInstance& instance, const Schedule& schedule);
bool is_ground_equivalent(const RailwayInstance& instance, const Schedule& a, const Schedule& b);
std::string format_signature(const RailwayInstance& instance, const OrderSignature& signature);

/// Coordinate text export: `i j value` per nonzero upper-triangle entry, with
/// off-diagonal values doubled so that the energy is the plain sum of terms.
void write_qubo(std::ostream& out, const QuboInstance& qubo);
void write_ising(std::ostream& out, const IsingInstance& ising);
/// Reads a file written by write_qubo. Only the matrix and header constants
/// are restored.
QuboInstance read_qubo(std::istream& in);

std::string format_number(double v);

}  // namespace railqubo
