#include "railqubo/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <random>
#include <thread>

namespace railqubo {

unsigned solver_threads() {
  if (const char* env = std::getenv("RAILQUBO_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

// Runs body(worker) for worker in [0, workers) and joins.
void parallel_for(unsigned workers, const std::function<void(unsigned)>& body) {
  if (workers <= 1) {
    body(0);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body, w);
  for (auto& t : pool) t.join();
}

unsigned resolve_threads(unsigned requested) { return requested ? requested : solver_threads(); }

}  // namespace

// ---------------------------------------------------------------- spectrum

const SpectrumLevel* Spectrum::lowest_feasible() const {
  for (const auto& l : levels)
    if (l.feasible()) return &l;
  return nullptr;
}

std::optional<std::uint64_t> restricted_space_size(const QuboInstance& qubo) {
  std::uint64_t total = 1;
  for (const auto& g : qubo.groups) {
    if (g.empty()) return 0;
    if (total > std::numeric_limits<std::uint64_t>::max() / g.size()) return std::nullopt;
    total *= g.size();
  }
  return total;
}

bool is_feasible(const QuboInstance& qubo, const Bits& x) {
  if (!broken_groups(qubo, x).empty()) return false;
  return std::none_of(qubo.pairs.begin(), qubo.pairs.end(),
                      [&](const ForbiddenPair& p) { return x[p.i] && x[p.j]; });
}

namespace {

// Lowest `limit` levels seen so far, each with its smallest configurations.
class LevelTable {
 public:
  LevelTable(std::size_t limit, std::size_t reps, double tol) : limit_(limit), reps_(reps), tol_(tol) {}

  template <typename MakeBits>
  void add(double e, bool feasible, MakeBits&& make_bits) {
    auto* l = slot(e);
    if (!l) return;
    ++l->degeneracy;
    if (feasible) ++l->feasible_count;
    if (reps_ == 0) return;
    auto& reps = l->representatives;
    if (reps.size() < reps_) {
      reps.push_back(make_bits());
    } else {
      Bits x = make_bits();
      if (!(x < reps.back())) return;
      reps.back() = std::move(x);
    }
    std::sort(reps.begin(), reps.end());
  }

  void merge(const LevelTable& other) {
    for (const auto& o : other.levels_) {
      auto* l = slot(o.energy);
      if (!l) continue;
      l->degeneracy += o.degeneracy;
      l->feasible_count += o.feasible_count;
      auto& reps = l->representatives;
      reps.insert(reps.end(), o.representatives.begin(), o.representatives.end());
      std::sort(reps.begin(), reps.end());
      if (reps.size() > reps_) reps.resize(reps_);
    }
  }

  std::vector<SpectrumLevel> take() && { return std::move(levels_); }

 private:
  // Level holding energy e, created if it ranks among the lowest; else null.
  SpectrumLevel* slot(double e) {
    if (levels_.size() >= limit_ && e > levels_.back().energy + tol_) return nullptr;
    auto it = std::lower_bound(levels_.begin(), levels_.end(), e - tol_,
                               [](const SpectrumLevel& l, double v) { return l.energy < v; });
    if (it == levels_.end() || it->energy > e + tol_) {
      SpectrumLevel fresh;
      fresh.energy = e;
      it = levels_.insert(it, std::move(fresh));
      if (levels_.size() > limit_) levels_.pop_back();
    }
    return &*it;
  }

  std::size_t limit_;
  std::size_t reps_;
  double tol_;
  std::vector<SpectrumLevel> levels_;
};

// Pair lookup used for feasibility tests during enumeration.
class PairMatrix {
 public:
  explicit PairMatrix(const QuboInstance& q) : n_(q.size()), m_(n_ * n_, 0) {
    for (const auto& p : q.pairs) m_[p.i * n_ + p.j] = m_[p.j * n_ + p.i] = 1;
  }
  bool operator()(std::size_t i, std::size_t j) const { return m_[i * n_ + j]; }

 private:
  std::size_t n_;
  std::vector<std::uint8_t> m_;
};

Bits bits_from(std::size_t n, const std::vector<std::size_t>& on) {
  Bits x(n, 0);
  for (const auto i : on) x[i] = 1;
  return x;
}

double energy_of(const QuboInstance& q, const std::vector<std::size_t>& on) {
  double e = 0.0;
  for (std::size_t a = 0; a < on.size(); ++a) {
    e += q(on[a], on[a]);
    for (std::size_t b = a + 1; b < on.size(); ++b) e += 2.0 * q(on[a], on[b]);
  }
  return e;
}

bool pairs_clear(const PairMatrix& pm, const std::vector<std::size_t>& on) {
  for (std::size_t a = 0; a < on.size(); ++a)
    for (std::size_t b = a + 1; b < on.size(); ++b)
      if (pm(on[a], on[b])) return false;
  return true;
}

void scan_full(const QuboInstance& q, std::uint64_t begin, std::uint64_t end, LevelTable& table) {
  const auto n = q.size();
  const PairMatrix pm(q);
  std::vector<std::size_t> group_of(n, q.groups.size());
  for (std::size_t g = 0; g < q.groups.size(); ++g)
    for (const auto i : q.groups[g]) group_of[i] = g;

  Bits x(n, 0);
  std::vector<double> field(n, 0.0);  // sum_{k != i} Q_ik x_k
  std::vector<int> group_count(q.groups.size(), 0);
  long bad_groups = static_cast<long>(q.groups.size());
  long bad_pairs = 0;
  double e = 0.0;

  const auto flip = [&](std::size_t i) {
    const int sign = x[i] ? -1 : 1;
    e += sign * (q(i, i) + 2.0 * field[i]);
    for (std::size_t k = 0; k < n; ++k)
      if (k != i) {
        field[k] += sign * q(k, i);
        if (x[k] && pm(i, k)) bad_pairs += sign;
      }
    if (const auto g = group_of[i]; g < q.groups.size()) {
      const bool was_ok = group_count[g] == 1;
      group_count[g] += sign;
      const bool ok = group_count[g] == 1;
      bad_groups += (was_ok && !ok) - (!was_ok && ok);
    }
    x[i] ^= 1;
  };

  const std::uint64_t g0 = begin ^ (begin >> 1);
  for (std::size_t i = 0; i < n; ++i)
    if ((g0 >> i) & 1) flip(i);
  e = energy(q, x);  // start each chunk from an exact value

  for (std::uint64_t k = begin;;) {
    table.add(e, bad_groups == 0 && bad_pairs == 0, [&] { return x; });
    if (++k == end) break;
    flip(static_cast<std::size_t>(__builtin_ctzll(k)));
  }
}

// Mixed-radix walk over one choice per group, indices [begin, end).
void scan_restricted(const QuboInstance& q, std::uint64_t begin, std::uint64_t end, bool perturb,
                     LevelTable& table) {
  const auto n = q.size();
  const auto& groups = q.groups;
  const PairMatrix pm(q);
  std::vector<std::size_t> choice(groups.size(), 0);
  {
    auto rem = begin;
    for (std::size_t g = groups.size(); g-- > 0;) {
      choice[g] = rem % groups[g].size();
      rem /= groups[g].size();
    }
  }
  std::vector<std::size_t> on(groups.size());
  std::vector<std::size_t> scratch;
  for (std::uint64_t k = begin; k < end; ++k) {
    for (std::size_t g = 0; g < groups.size(); ++g) on[g] = groups[g][choice[g]];
    const double e = energy_of(q, on);
    table.add(e, pairs_clear(pm, on), [&] { return bits_from(n, on); });

    if (perturb) {
      for (std::size_t g = 0; g < groups.size(); ++g) {
        // group emptied: counted once, from the config choosing its first member
        if (choice[g] == 0) {
          scratch = on;
          scratch.erase(scratch.begin() + static_cast<long>(g));
          table.add(energy_of(q, scratch), false, [&] { return bits_from(n, scratch); });
        }
        // second bit set: counted from the config holding the smaller index
        for (std::size_t c = choice[g] + 1; c < groups[g].size(); ++c) {
          scratch = on;
          scratch.push_back(groups[g][c]);
          table.add(energy_of(q, scratch), false, [&] { return bits_from(n, scratch); });
        }
      }
    }

    for (std::size_t g = groups.size(); g-- > 0;) {
      if (++choice[g] < groups[g].size()) break;
      choice[g] = 0;
    }
  }
}

}  // namespace

Spectrum enumerate_spectrum(const QuboInstance& qubo, const SpectrumOptions& options) {
  if (options.levels == 0) throw Error("spectrum needs at least one level");
  Spectrum sp;
  sp.mode = options.mode;
  std::uint64_t total = 0;
  if (options.mode == SpectrumMode::Full) {
    if (qubo.size() > options.max_full_bits || qubo.size() >= 64)
      throw Error("full enumeration limited to " + std::to_string(options.max_full_bits) +
                  " bits, QUBO has " + std::to_string(qubo.size()));
    total = std::uint64_t{1} << qubo.size();
  } else {
    const auto size = restricted_space_size(qubo);
    if (!size || *size > options.max_configs)
      throw Error("restricted space exceeds the cap of " + std::to_string(options.max_configs) +
                  " configurations");
    std::size_t grouped = 0;
    for (const auto& g : qubo.groups) grouped += g.size();
    if (grouped != qubo.size()) throw Error("restricted enumeration needs every variable in a group");
    total = *size;
  }

  const unsigned workers =
      static_cast<unsigned>(std::min<std::uint64_t>(resolve_threads(options.threads),
                                                    std::max<std::uint64_t>(1, total / 4096)));
  std::vector<LevelTable> tables(workers, LevelTable(options.levels, options.representatives,
                                                     options.tolerance));
  parallel_for(workers, [&](unsigned w) {
    const auto begin = total * w / workers;
    const auto end = total * (w + 1) / workers;
    if (begin == end) return;
    if (options.mode == SpectrumMode::Full)
      scan_full(qubo, begin, end, tables[w]);
    else
      scan_restricted(qubo, begin, end, options.mode == SpectrumMode::OneHotPlusSingleViolations,
                      tables[w]);
  });
  for (unsigned w = 1; w < workers; ++w) tables[0].merge(tables[w]);

  sp.configs_scanned = total;
  if (options.mode == SpectrumMode::OneHotPlusSingleViolations)
    // per group: the emptied group plus every way to set a second member
    for (const auto& g : qubo.groups)
      sp.configs_scanned += total / g.size() * (1 + g.size() * (g.size() - 1) / 2);
  sp.levels = std::move(tables[0]).take();
  for (auto& l : sp.levels)
    if (!l.representatives.empty()) l.energy = energy(qubo, l.representatives.front());
  return sp;
}

// ------------------------------------------------------- simulated annealing

namespace {

struct RestartOutcome {
  Bits best;
  double energy = std::numeric_limits<double>::infinity();
};

RestartOutcome anneal_once(const QuboInstance& q, const AnnealParams& p, std::size_t restart) {
  const auto n = q.size();
  std::seed_seq seq{static_cast<std::uint32_t>(p.seed), static_cast<std::uint32_t>(p.seed >> 32),
                    static_cast<std::uint32_t>(restart), static_cast<std::uint32_t>(restart >> 32)};
  std::mt19937_64 rng(seq);
  // 53 high bits, so runs repeat across standard libraries
  const auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  Bits x(n);
  for (auto& b : x) b = static_cast<std::uint8_t>(rng() & 1);
  std::vector<double> field(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      if (k != i && x[k]) field[i] += q(i, k);
  double e = energy(q, x);
  RestartOutcome out{x, e};

  const double ratio = p.sweeps > 1 ? std::pow(p.beta_end / p.beta_start, 1.0 / (p.sweeps - 1)) : 1.0;
  double beta = p.sweeps > 1 ? p.beta_start : p.beta_end;
  for (std::size_t sweep = 0; sweep < p.sweeps; ++sweep, beta *= ratio) {
    for (std::size_t i = 0; i < n; ++i) {
      const double sign = x[i] ? -1.0 : 1.0;
      const double delta = sign * (q(i, i) + 2.0 * field[i]);
      if (delta > 0.0 && unit() >= std::exp(-beta * delta)) continue;
      x[i] ^= 1;
      e += delta;
      for (std::size_t k = 0; k < n; ++k)
        if (k != i) field[k] += sign * q(k, i);
      if (e < out.energy - 1e-12) {
        out.energy = e;
        out.best = x;
      }
    }
  }
  out.energy = energy(q, out.best);
  return out;
}

}  // namespace

AnnealResult simulated_annealing(const QuboInstance& qubo, const AnnealParams& params) {
  if (params.sweeps == 0 || params.restarts == 0 || !(params.beta_start > 0.0) ||
      !(params.beta_end > 0.0))
    throw Error("annealing parameters must be positive");
  std::vector<RestartOutcome> outcomes(params.restarts);
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(resolve_threads(params.threads), params.restarts));
  parallel_for(workers, [&](unsigned w) {
    for (std::size_t r = w; r < params.restarts; r += workers) outcomes[r] = anneal_once(qubo, params, r);
  });

  AnnealResult res;
  for (const auto& o : outcomes) {
    res.restart_energies.push_back(o.energy);
    if (res.best.empty() || o.energy < res.energy - 1e-12 ||
        (std::abs(o.energy - res.energy) <= 1e-12 && o.best < res.best)) {
      res.energy = o.energy;
      res.best = o.best;
    }
  }
  return res;
}

// ------------------------------------------------------ precedence solvers

DelayNetwork::DelayNetwork(const RailwayInstance& instance) : instance_(&instance), du_(instance) {
  for (TrainIndex j = 0; j < instance.trains.size(); ++j) {
    for (const auto s : instance.decision_stations(j)) {
      node_of_[{j, s}] = keys_.size();
      keys_.emplace_back(j, s);
      const auto range = delay_domain(instance, du_, j, s);
      lo_.push_back(range.lo);
      hi_.push_back(range.hi);
    }
    const auto dec = instance.decision_stations(j);
    for (std::size_t p = 0; p + 1 < dec.size(); ++p)
      edges_.push_back({node(j, dec[p]), node(j, dec[p + 1]), -time_reserve(instance, j, dec[p])});
  }
  for (const auto& tr : instance.turnovers) {
    const auto from = node(tr.from, instance.scored_station(tr.from));
    const auto to = node(tr.to, instance.trains[tr.to].station_route.front());
    edges_.push_back({from, to, 1 - turnover_slack(instance, tr)});
  }
}

std::size_t DelayNetwork::node(TrainIndex j, BlockId station) const {
  const auto it = node_of_.find({j, station});
  if (it == node_of_.end()) throw Error("no decision delay for train #" + std::to_string(j) +
                                        " at station " + std::to_string(station));
  return it->second;
}

DelayEdge DelayNetwork::precedence(const Resource& r, bool a_first) const {
  const auto a = node(r.a, r.a_station), b = node(r.b, r.b_station);
  return a_first ? DelayEdge{a, b, r.lag_a_first()} : DelayEdge{b, a, r.lag_b_first()};
}

std::optional<std::vector<Minutes>> DelayNetwork::least(const std::vector<DelayEdge>& extra,
                                                        bool bounded) const {
  std::vector<Minutes> d = lo_;
  const auto n = d.size();
  for (std::size_t round = 0;; ++round) {
    bool changed = false;
    for (const auto* list : {&edges_, &extra}) {
      for (const auto& e : *list) {
        if (d[e.from] + e.weight > d[e.to]) {
          d[e.to] = d[e.from] + e.weight;
          if (bounded && d[e.to] > hi_[e.to]) return std::nullopt;
          changed = true;
        }
      }
    }
    if (!changed) return d;
    if (round > n) return std::nullopt;  // positive cycle
  }
}

Schedule DelayNetwork::to_schedule(const std::vector<Minutes>& d) const {
  Schedule s;
  for (std::size_t v = 0; v < keys_.size(); ++v) s.set(keys_[v].first, keys_[v].second, d[v]);
  return s;
}

bool DelayNetwork::within_bounds(const std::vector<Minutes>& d) const {
  for (std::size_t v = 0; v < d.size(); ++v)
    if (d[v] < lo_[v] || d[v] > hi_[v]) return false;
  return true;
}

OrderAssignment order_assignment(const RailwayInstance& instance, const Schedule& schedule) {
  OrderAssignment out;
  for (const auto& r : contested_resources(instance)) {
    const Minutes diff = schedule.delay(r.b, r.b_station) - schedule.delay(r.a, r.a_station);
    // outside a conflict exactly one side holds; inside, the earlier departure leads
    bool a_first = diff >= r.lag_a_first();
    if (!a_first && !(diff <= r.offset - r.gap_b)) a_first = diff >= r.offset;
    out.push_back({r, a_first});
  }
  return out;
}

namespace {

double order_objective(const DelayNetwork& net, const RailwayInstance& instance,
                       const std::vector<Minutes>& d, OrderObjective kind) {
  if (kind == OrderObjective::MaxSecondaryDelay) {
    Minutes worst = 0;
    for (std::size_t v = 0; v < d.size(); ++v) worst = std::max(worst, d[v] - net.lower(v));
    return worst;
  }
  double f = 0.0;
  for (TrainIndex j = 0; j < instance.trains.size(); ++j) {
    if (instance.d_max[j] == 0) continue;
    const auto v = net.node(j, instance.scored_station(j));
    f += instance.trains[j].weight * (d[v] - net.lower(v)) / instance.d_max[j];
  }
  return f;
}

std::vector<Resource> live_resources(const RailwayInstance& instance, const DelayNetwork& net,
                                     bool drop_never_conflicting) {
  std::vector<Resource> out;
  for (const auto& r : contested_resources(instance)) {
    if (drop_never_conflicting) {
      const auto a = net.node(r.a, r.a_station), b = net.node(r.b, r.b_station);
      if (never_conflicting(r, {net.lower(a), net.upper(a)}, {net.lower(b), net.upper(b)})) continue;
    }
    out.push_back(r);
  }
  return out;
}

bool conflicts(const DelayNetwork& net, const Resource& r, const std::vector<Minutes>& d) {
  return r.in_conflict(d[net.node(r.a, r.a_station)], d[net.node(r.b, r.b_station)]);
}

}  // namespace

OrderSolution exact_order_solver(const RailwayInstance& instance, OrderObjective objective) {
  const DelayNetwork net(instance);
  const auto resources = live_resources(instance, net, true);

  OrderSolution best;
  double best_value = std::numeric_limits<double>::infinity();
  std::optional<std::vector<Minutes>> best_d;
  std::vector<DelayEdge> fixed;

  const std::function<void(const std::vector<Minutes>&)> search = [&](const std::vector<Minutes>& d) {
    ++best.nodes_explored;
    const double bound = order_objective(net, instance, d, objective);
    if (bound >= best_value - 1e-12) return;
    const auto open = std::find_if(resources.begin(), resources.end(),
                                   [&](const Resource& r) { return conflicts(net, r, d); });
    if (open == resources.end()) {
      best_value = bound;
      best_d = d;
      return;
    }
    struct Child {
      std::vector<Minutes> d;
      DelayEdge edge;
      double bound;
    };
    std::vector<Child> children;
    for (const bool a_first : {true, false}) {
      const auto edge = net.precedence(*open, a_first);
      fixed.push_back(edge);
      if (auto next = net.least(fixed, true))
        children.push_back({*next, edge, order_objective(net, instance, *next, objective)});
      fixed.pop_back();
    }
    std::stable_sort(children.begin(), children.end(),
                     [](const Child& l, const Child& r) { return l.bound < r.bound; });
    for (const auto& c : children) {
      fixed.push_back(c.edge);
      search(c.d);
      fixed.pop_back();
    }
  };

  const auto root = net.least({}, true);
  if (root) search(*root);
  if (!best_d)
    throw Infeasible("no train order keeps every delay within d_max; increase d_max");
  best.schedule = net.to_schedule(*best_d);
  best.objective = order_objective(net, instance, *best_d, objective);
  best.assignment = order_assignment(instance, best.schedule);
  return best;
}

const char* dispatch_name(Dispatch rule) {
  switch (rule) {
    case Dispatch::FCFS: return "fcfs";
    case Dispatch::FLFS: return "flfs";
    case Dispatch::AMCC: return "amcc";
  }
  return "?";
}

HeuristicResult dispatch(const RailwayInstance& instance, Dispatch rule) {
  const DelayNetwork net(instance);
  const auto resources = live_resources(instance, net, false);
  std::vector<bool> decided(resources.size(), false);
  std::vector<DelayEdge> fixed;
  HeuristicResult res;

  const auto name = [&](const Resource& r) {
    return instance.trains[r.a].id + "/" + instance.trains[r.b].id + " " +
           std::to_string(r.a_station) + "-" + std::to_string(r.kind == Resource::Kind::Opposite
                                                                 ? r.b_station
                                                                 : *instance.next_station(r.a, r.a_station));
  };
  const auto first_name = [&](const Resource& r, bool a_first) {
    return instance.trains[a_first ? r.a : r.b].id;
  };
  const auto settle = [&](std::size_t k, bool a_first, const char* why) {
    decided[k] = true;
    fixed.push_back(net.precedence(resources[k], a_first));
    res.log.push_back(std::string(why) + ": " + name(resources[k]) + " -> " +
                      first_name(resources[k], a_first) + " first");
  };
  const auto secondary_max = [&](const std::vector<Minutes>& d) {
    Minutes worst = 0;
    for (std::size_t v = 0; v < d.size(); ++v) worst = std::max(worst, d[v] - net.lower(v));
    return worst;
  };
  const auto with = [&](std::size_t k, bool a_first) {
    auto extra = fixed;
    extra.push_back(net.precedence(resources[k], a_first));
    return net.least(extra, false);
  };

  for (;;) {
    const auto d = net.least(fixed, false);
    if (!d) throw Infeasible(std::string(dispatch_name(rule)) + ": fixed orders form a cycle");

    std::vector<std::size_t> open;
    for (std::size_t k = 0; k < resources.size(); ++k)
      if (!decided[k] && conflicts(net, resources[k], *d)) open.push_back(k);
    if (open.empty()) {
      res.schedule = net.to_schedule(*d);
      res.within_bounds = net.within_bounds(*d);
      break;
    }

    // implied selections: an order that closes a positive cycle forces the other
    bool implied = false;
    for (const auto k : open) {
      const bool a_ok = with(k, true).has_value(), b_ok = with(k, false).has_value();
      if (!a_ok && !b_ok)
        throw Infeasible(std::string(dispatch_name(rule)) + ": no order is possible on " +
                         name(resources[k]));
      if (a_ok != b_ok) {
        settle(k, a_ok, "implied");
        implied = true;
        break;
      }
    }
    if (implied) continue;

    // entry and exit times of each train at a resource
    const auto entry = [&](TrainIndex j, BlockId s) {
      return instance.scheduled_departure(j, s) + (*d)[net.node(j, s)];
    };
    const auto leave = [&](TrainIndex j, BlockId s) { return entry(j, s) + compute_tau2(instance, j, s); };
    const auto time_of = [&](TrainIndex j, BlockId s) {
      return rule == Dispatch::FLFS ? leave(j, s) : entry(j, s);
    };
    // a goes first when it comes (or leaves) first; ties by timetable, then id
    const auto a_leads = [&](const Resource& r) {
      const auto ta = time_of(r.a, r.a_station), tb = time_of(r.b, r.b_station);
      if (ta != tb) return ta < tb;
      const auto pa = instance.scheduled_departure(r.a, r.a_station);
      const auto pb = instance.scheduled_departure(r.b, r.b_station);
      if (pa != pb) return pa < pb;
      return instance.trains[r.a].id < instance.trains[r.b].id;
    };
    const auto urgency = [&](const Resource& r) {
      return std::min(time_of(r.a, r.a_station), time_of(r.b, r.b_station));
    };
    // earliest resource first, by position in the resource list on ties
    const auto by_urgency = [&](std::size_t l, std::size_t r) {
      const auto ul = urgency(resources[l]), ur = urgency(resources[r]);
      return ul != ur ? ul < ur : l < r;
    };
    std::sort(open.begin(), open.end(), by_urgency);

    if (rule != Dispatch::AMCC) {
      const auto k = open.front();
      settle(k, a_leads(resources[k]), dispatch_name(rule));
      continue;
    }

    // AMCC: find the choice that would produce the worst maximum secondary
    // delay and take the opposite one
    std::size_t worst_k = open.front();
    bool worst_alt = true;
    Minutes worst_cost = -1;
    for (const auto k : open) {
      for (const bool a_first : {true, false}) {
        const auto next = with(k, a_first);
        const Minutes cost = next ? secondary_max(*next) : std::numeric_limits<Minutes>::max();
        if (cost > worst_cost) {
          worst_cost = cost;
          worst_k = k;
          worst_alt = a_first;
        }
      }
    }
    settle(worst_k, !worst_alt, "amcc");
  }

  res.assignment = order_assignment(instance, res.schedule);
  return res;
}

// ------------------------------------------------------------------ reports

void complete_report(const RailwayInstance& instance, const QuboInstance* qubo,
                     SolverReport& report) {
  if (!report.schedule) {
    report.feasible = false;
    return;
  }
  const auto& s = *report.schedule;
  const UnavoidableDelays du(instance);
  report.violations = check_conditions(instance, du, s);
  for (const auto& v : check_capacity(instance, s)) {
    std::string line = "capacity: station " + std::to_string(v.station) + " at " +
                       format_hhmm(v.time) + " holds";
    for (const auto j : v.trains) line += " " + instance.trains[j].id;
    report.violations.push_back(line);
  }
  report.objective = schedule_objective(instance, du, s);
  report.max_secondary = max_secondary_delay(instance, du, s);
  report.delay_sum = scored_delay_sum(instance, du, s);
  report.signature = equivalence_signature(instance, s);
  if (qubo && !report.config && qubo->index.size() == qubo->size()) {
    try {
      report.config = qubo->index.encode(s);
    } catch (const Error&) {
      // delays outside the QUBO domains have no encoding
    }
  }
  if (qubo && report.config && !report.energy) report.energy = decompose(*qubo, *report.config);
  report.feasible = report.violations.empty() &&
                    (!report.energy || std::abs(report.energy->hard) <= 1e-9);
}

CrossValidation cross_validate(const RailwayInstance& instance, const Penalties& penalties) {
  CrossValidation cv;
  const auto qubo = compile(instance, penalties);
  SpectrumOptions opt;
  opt.levels = 1;
  opt.representatives = 256;
  const auto sp = enumerate_spectrum(qubo, opt);
  const auto& ground = sp.levels.front();
  cv.ground_energy = ground.energy;
  cv.ground_degeneracy = ground.degeneracy;
  if (ground.feasible_count != ground.degeneracy)
    cv.mismatches.push_back("ground level contains infeasible configurations; raise the penalties");
  cv.ground_objective = decompose(qubo, ground.representatives.front()).objective;
  for (const auto& x : ground.representatives)
    if (is_feasible(qubo, x))
      cv.ground_signatures.push_back(equivalence_signature(instance, decode(qubo, x)));

  const auto sol = exact_order_solver(instance);
  cv.order_objective = sol.objective;
  cv.order_signature = equivalence_signature(instance, sol.schedule);
  cv.order_energy = energy(qubo, qubo.index.encode(sol.schedule));

  if (std::abs(cv.order_energy - cv.ground_energy) > 1e-9)
    cv.mismatches.push_back("order solver energy " + format_number(cv.order_energy) +
                            " differs from ground energy " + format_number(cv.ground_energy));
  if (std::abs(cv.order_objective - cv.ground_objective) > 1e-9)
    cv.mismatches.push_back("order solver objective " + format_number(cv.order_objective) +
                            " differs from ground objective " + format_number(cv.ground_objective));
  // With more ground configurations than stored representatives, the energy
  // match above is what places the order solver's configuration in the ground level.
  const bool complete = ground.representatives.size() == ground.degeneracy;
  if (complete && std::find(cv.ground_signatures.begin(), cv.ground_signatures.end(),
                            cv.order_signature) == cv.ground_signatures.end()) {
    std::string msg = "order solver signature " + format_signature(instance, cv.order_signature) +
                      " matches no ground configuration:";
    for (const auto& g : cv.ground_signatures) msg += " [" + format_signature(instance, g) + "]";
    cv.mismatches.push_back(msg);
  }
  cv.match = cv.mismatches.empty();
  return cv;
}

}  // namespace railqubo
