#include <random>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "railqubo/qubo.hpp"
#include "support/oracles.hpp"

using namespace railqubo;

namespace {

Bits random_bits(std::size_t n, std::mt19937_64& rng) {
  Bits x(n);
  for (auto& b : x) b = static_cast<std::uint8_t>(rng() & 1);
  return x;
}

std::size_t edges(const QuboInstance& q) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < q.size(); ++i)
    for (std::size_t j = i + 1; j < q.size(); ++j) count += q(i, j) != 0.0;
  return count;
}

}  // namespace

TEST_CASE("meet-pass matrix") {
  const auto q = compile(load_instance("meet-pass"), {1.75, 1.75});
  const double expect[4][4] = {
      {-1.75, 1.75, 1.75, 0}, {1.75, -1.25, 0, 1.75}, {1.75, 0, -1.75, 1.75}, {0, 1.75, 1.75, -0.75}};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK(q(i, j) == expect[i][j]);
  CHECK(q.offset_L == 3.5);
  CHECK(energy(q, {0, 1, 1, 0}) == -3.0);
  CHECK(energy(q, {1, 0, 0, 1}) == -2.5);
  CHECK(energy(q, {1, 0, 1, 0}) == 0.0);

  const auto parts = decompose(q, {1, 0, 1, 0});
  CHECK(parts.hard == doctest::Approx(3.5));
  CHECK(decompose(q, {0, 1, 1, 0}).hard == doctest::Approx(0.0));
}

TEST_CASE("line 216 graph density") {
  const auto q = compile(load_instance("line216"), {1.75, 1.75});
  CHECK(q.size() == 48);
  CHECK(edges(q) == 395);
  CHECK(q.warnings.empty());
}

TEST_CASE("penalties are checked") {
  const auto inst = load_instance("meet-pass");
  CHECK_THROWS_AS(compile(inst, {0.0, 1.0}), Error);
  CHECK_FALSE(compile(inst, {0.5, 0.5}).warnings.empty());
}

TEST_CASE("objective coefficients") {
  const auto inst = load_instance("meet-pass");
  const VariableIndex idx(inst);
  const auto c = build_objective(inst, idx);
  REQUIRE(c.size() == 4);
  CHECK(c[0] == 0.0);
  CHECK(c[1] == 0.5);
  CHECK(c[2] == 0.0);
  CHECK(c[3] == 1.0);
}

TEST_CASE("ising form reproduces every energy") {
  const auto q = compile(load_instance("meet-pass"), {1.75, 1.75});
  const auto is = to_ising(q);
  for (unsigned m = 0; m < 16; ++m) {
    Bits x(4);
    for (unsigned i = 0; i < 4; ++i) x[i] = (m >> i) & 1;
    CHECK(ising_energy(is, to_spins(x)) + is.offset == doctest::Approx(energy(q, x)).epsilon(1e-12));
  }
  std::mt19937_64 rng(3);
  const auto big = compile(load_instance("line216"), {1.75, 1.75});
  const auto r = oracle::ising_matches(big, rng, 500);
  CHECK_MESSAGE(r.ok, r.detail);
}

TEST_CASE("export round trip") {
  const auto q = compile(load_instance("line216"), {2.2, 2.7});
  std::ostringstream a, b;
  write_qubo(a, q);
  write_qubo(b, q);
  CHECK(a.str() == b.str());

  std::istringstream in(a.str());
  const auto back = read_qubo(in);
  REQUIRE(back.size() == q.size());
  CHECK(back.p_sum == 2.2);
  CHECK(back.p_pair == 2.7);
  CHECK(back.offset_L == q.offset_L);
  std::mt19937_64 rng(5);
  for (int k = 0; k < 100; ++k) {
    const auto x = random_bits(q.size(), rng);
    CHECK(energy(back, x) == doctest::Approx(energy(q, x)).epsilon(1e-12));
  }
}

TEST_CASE("instance without couplings exports the diagonal only") {
  // d_max 0 leaves one variable per group, so nothing couples
  const auto q = compile(lone_train(0), {1.75, 1.75});
  REQUIRE(q.size() == 1);
  CHECK(q.pairs.empty());
  std::ostringstream out;
  write_qubo(out, q);
  std::istringstream lines(out.str());
  std::string line;
  int entries = 0;
  while (std::getline(lines, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::size_t i = 0, j = 0;
    row >> i >> j;
    CHECK(i == j);
    ++entries;
  }
  CHECK(entries == 1);
}

TEST_CASE("malformed export is rejected") {
  std::istringstream in("# railqubo-qubo 1\n# n 2\n0 x 1\n");
  CHECK_THROWS_AS(read_qubo(in), Error);
}

TEST_CASE("decode and encode") {
  const auto inst = load_instance("line216");
  const auto q = compile(inst, inst.penalties);
  Bits x(q.size(), 0);
  CHECK_THROWS_AS(decode(q, x), BrokenOneHot);
  CHECK(broken_groups(q, x).size() == 6);

  const auto s = Schedule::unavoidable(inst, q.index.unavoidable());
  CHECK(decode(q, q.index.encode(s)) == s);
  std::mt19937_64 rng(9);
  const auto r = oracle::decode_encode_identity(inst, rng, 200);
  CHECK_MESSAGE(r.ok, r.detail);
}

TEST_CASE("signature of the meet-pass optimum") {
  const auto inst = load_instance("meet-pass");
  const auto q = compile(inst, inst.penalties);
  const auto sig = equivalence_signature(inst, decode(q, {0, 1, 1, 0}));
  CHECK(format_signature(inst, sig) == "1:T1; 2:T2");
}

TEST_CASE("number formatting") {
  CHECK(format_number(-3.0) == "-3");
  CHECK(format_number(1.75) == "1.75");
}
