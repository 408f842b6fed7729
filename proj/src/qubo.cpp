#include "railqubo/qubo.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

namespace railqubo {

void QuboInstance::add_symmetric(std::size_t i, std::size_t j, double v) {
  q_[i * n_ + j] += v;
  if (i != j) q_[j * n_ + i] += v;
}

std::vector<double> build_objective(const RailwayInstance& instance, const VariableIndex& index) {
  std::vector<double> c(index.size(), 0.0);
  const auto& du = index.unavoidable();
  for (std::size_t i = 0; i < index.size(); ++i) {
    const auto& k = index.key(i);
    if (k.station != instance.scored_station(k.train)) continue;
    const int dmax = instance.d_max[k.train];
    if (dmax == 0) continue;  // the domain is the single value d_U
    c[i] = instance.trains[k.train].weight * (k.delay - du.at(k.train, k.station)) / dmax;
  }
  return c;
}

QuboInstance assemble(const ConstraintSet& constraints, const std::vector<double>& c, double p_sum,
                      double p_pair) {
  if (!(p_sum > 0.0) || !(p_pair > 0.0)) throw Error("penalty constants must be positive");
  QuboInstance q(c.size());
  q.p_sum = p_sum;
  q.p_pair = p_pair;
  q.objective = c;
  q.groups = constraints.one_hot_groups;
  q.pairs = constraints.forbidden_pairs;
  q.offset_L = p_sum * static_cast<double>(constraints.one_hot_groups.size());

  for (const auto& g : constraints.one_hot_groups) {
    for (std::size_t a = 0; a < g.size(); ++a) {
      q.add_symmetric(g[a], g[a], -p_sum);
      for (std::size_t b = a + 1; b < g.size(); ++b) q.add_symmetric(g[a], g[b], p_sum);
    }
  }
  for (const auto& p : constraints.forbidden_pairs) q.add_symmetric(p.i, p.j, p_pair);
  for (std::size_t i = 0; i < c.size(); ++i) q.add_symmetric(i, i, c[i]);

  const double w = c.empty() ? 0.0 : *std::max_element(c.begin(), c.end());
  if (p_sum <= w)
    q.warnings.push_back("p_sum " + format_number(p_sum) + " does not exceed the largest weight " +
                         format_number(w) + "; the minimum may be infeasible");
  if (p_pair <= w)
    q.warnings.push_back("p_pair " + format_number(p_pair) + " does not exceed the largest weight " +
                         format_number(w) + "; the minimum may be infeasible");
  return q;
}

QuboInstance compile(const RailwayInstance& instance, const Penalties& penalties,
                     GenerationOptions options) {
  VariableIndex index(instance);
  const auto constraints = build_constraints(instance, index, options);
  auto q = assemble(constraints, build_objective(instance, index), penalties.p_sum, penalties.p_pair);
  q.index = std::move(index);
  return q;
}

namespace {

void check_dimension(const QuboInstance& qubo, const Bits& x) {
  if (x.size() != qubo.size())
    throw Error("configuration has " + std::to_string(x.size()) + " bits, QUBO has " +
                std::to_string(qubo.size()));
}

}  // namespace

double energy(const QuboInstance& qubo, const Bits& x) {
  check_dimension(qubo, x);
  const auto n = qubo.size();
  double e = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!x[i]) continue;
    e += qubo(i, i);
    for (std::size_t j = i + 1; j < n; ++j)
      if (x[j]) e += 2.0 * qubo(i, j);
  }
  return e;
}

EnergyParts decompose(const QuboInstance& qubo, const Bits& x) {
  check_dimension(qubo, x);
  EnergyParts parts;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i]) parts.objective += qubo.objective[i];
  for (const auto& p : qubo.pairs)
    if (x[p.i] && x[p.j]) parts.pair += 2.0 * qubo.p_pair;
  for (const auto& g : qubo.groups) {
    double set = 0.0;
    for (const auto i : g) set += x[i];
    // sum_{i != j} x_i x_j - sum_i x_i^2 = k(k-1) - k for k bits set
    parts.sum += qubo.p_sum * (set * (set - 1.0) - set);
  }
  parts.hard = parts.pair + parts.sum + qubo.offset_L;
  return parts;
}

IsingInstance to_ising(const QuboInstance& qubo) {
  const auto n = qubo.size();
  IsingInstance is;
  is.n = n;
  is.J.assign(n * n, 0.0);
  is.h.assign(n, 0.0);
  // x = (1 + s) / 2
  for (std::size_t i = 0; i < n; ++i) {
    is.h[i] += qubo(i, i) / 2.0;
    is.offset += qubo(i, i) / 2.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double q = qubo(i, j);
      if (q == 0.0) continue;
      is.J[i * n + j] = is.J[j * n + i] = q / 4.0;
      is.h[i] += q / 2.0;
      is.h[j] += q / 2.0;
      is.offset += q / 2.0;
    }
  }
  return is;
}

double ising_energy(const IsingInstance& ising, const std::vector<int>& spins) {
  if (spins.size() != ising.n) throw Error("spin vector has the wrong length");
  double e = 0.0;
  for (std::size_t i = 0; i < ising.n; ++i) {
    e += ising.h[i] * spins[i];
    for (std::size_t j = i + 1; j < ising.n; ++j)
      e += 2.0 * ising.coupling(i, j) * spins[i] * spins[j];
  }
  return e;
}

std::vector<int> to_spins(const Bits& x) {
  std::vector<int> s(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) s[i] = x[i] ? 1 : -1;
  return s;
}

namespace {

std::string broken_message(const std::vector<std::size_t>& groups) {
  std::string msg = "one-hot constraint broken in group(s)";
  for (const auto g : groups) msg += " " + std::to_string(g);
  return msg;
}

}  // namespace

BrokenOneHot::BrokenOneHot(std::vector<std::size_t> groups)
    : Error(broken_message(groups)), groups_(std::move(groups)) {}

std::vector<std::size_t> broken_groups(const QuboInstance& qubo, const Bits& x) {
  check_dimension(qubo, x);
  std::vector<std::size_t> out;
  for (std::size_t g = 0; g < qubo.groups.size(); ++g) {
    int set = 0;
    for (const auto i : qubo.groups[g]) set += x[i];
    if (set != 1) out.push_back(g);
  }
  return out;
}

Schedule decode(const QuboInstance& qubo, const Bits& x) {
  if (auto broken = broken_groups(qubo, x); !broken.empty()) throw BrokenOneHot(std::move(broken));
  if (qubo.index.size() != qubo.size()) throw Error("QUBO carries no variable index");
  Schedule s;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!x[i]) continue;
    const auto& k = qubo.index.key(i);
    s.set(k.train, k.station, k.delay);
  }
  return s;
}

OrderSignature equivalence_signature(const RailwayInstance& instance, const Schedule& schedule) {
  check_shape(instance, schedule);
  OrderSignature sig;
  for (const auto& b : instance.blocks) {
    if (b.kind != BlockKind::Station) continue;
    struct Departure {
      Minutes actual;
      Minutes planned;
      const std::string* id;
      TrainIndex train;
    };
    std::vector<Departure> deps;
    for (TrainIndex j = 0; j < instance.trains.size(); ++j) {
      if (!instance.next_station(j, b.id)) continue;
      const auto planned = instance.scheduled_departure(j, b.id);
      deps.push_back({planned + schedule.delay(j, b.id), planned, &instance.trains[j].id, j});
    }
    if (deps.empty()) continue;
    std::sort(deps.begin(), deps.end(), [](const Departure& l, const Departure& r) {
      if (l.actual != r.actual) return l.actual < r.actual;
      if (l.planned != r.planned) return l.planned < r.planned;
      return *l.id < *r.id;
    });
    StationOrder order{b.id, {}};
    for (const auto& d : deps) order.trains.push_back(d.train);
    sig.push_back(std::move(order));
  }
  return sig;
}

bool is_ground_equivalent(const RailwayInstance& instance, const Schedule& a, const Schedule& b) {
  return equivalence_signature(instance, a) == equivalence_signature(instance, b);
}

std::string format_signature(const RailwayInstance& instance, const OrderSignature& signature) {
  std::string out;
  for (const auto& so : signature) {
    if (!out.empty()) out += "; ";
    out += std::to_string(so.station) + ":";
    for (std::size_t k = 0; k < so.trains.size(); ++k)
      out += (k ? "," : "") + instance.trains[so.trains[k]].id;
  }
  return out;
}

std::string format_number(double v) {
  if (v == 0.0) v = 0.0;  // drop the sign of negative zero
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

void write_qubo(std::ostream& out, const QuboInstance& qubo) {
  const auto n = qubo.size();
  out << "# railqubo-qubo 1\n"
      << "# n " << n << "\n"
      << "# p_sum " << format_number(qubo.p_sum) << "\n"
      << "# p_pair " << format_number(qubo.p_pair) << "\n"
      << "# L " << format_number(qubo.offset_L) << "\n"
      << "# entries: i j value, 0-based upper triangle, off-diagonal value is 2*Q_ij\n";
  for (std::size_t i = 0; i < n; ++i) {
    out << i << ' ' << i << ' ' << format_number(qubo(i, i)) << '\n';
    for (std::size_t j = i + 1; j < n; ++j)
      if (qubo(i, j) != 0.0) out << i << ' ' << j << ' ' << format_number(2.0 * qubo(i, j)) << '\n';
  }
}

void write_ising(std::ostream& out, const IsingInstance& ising) {
  out << "# railqubo-ising 1\n"
      << "# n " << ising.n << "\n"
      << "# offset " << format_number(ising.offset) << "\n"
      << "# entries: h i value; J i j value with i < j, J value is 2*J_ij\n";
  for (std::size_t i = 0; i < ising.n; ++i) out << "h " << i << ' ' << format_number(ising.h[i]) << '\n';
  for (std::size_t i = 0; i < ising.n; ++i)
    for (std::size_t j = i + 1; j < ising.n; ++j)
      if (ising.coupling(i, j) != 0.0)
        out << "J " << i << ' ' << j << ' ' << format_number(2.0 * ising.coupling(i, j)) << '\n';
}

QuboInstance read_qubo(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t n = 0;
  bool have_n = false;
  double p_sum = 0.0, p_pair = 0.0, L = 0.0;
  QuboInstance q;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    if (line[0] == '#') {
      std::string hash, key;
      fields >> hash >> key;
      if (key == "n") {
        fields >> n;
        have_n = true;
        q = QuboInstance(n);
      } else if (key == "p_sum") {
        fields >> p_sum;
      } else if (key == "p_pair") {
        fields >> p_pair;
      } else if (key == "L") {
        fields >> L;
      }
      continue;
    }
    if (!have_n) throw Error("line " + std::to_string(line_no) + ": entry before '# n' header");
    std::size_t i = 0, j = 0;
    double v = 0.0;
    if (!(fields >> i >> j >> v) || i > j || j >= n)
      throw Error("line " + std::to_string(line_no) + ": malformed entry '" + line + "'");
    q.add_symmetric(i, j, i == j ? v : v / 2.0);
  }
  if (!have_n) throw Error("missing '# n' header");
  q.p_sum = p_sum;
  q.p_pair = p_pair;
  q.offset_L = L;
  return q;
}

}  // namespace railqubo
