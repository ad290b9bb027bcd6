#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "evsvm/belief.hpp"
#include "test_util.hpp"

using namespace evsvm;
using testutil::make_frame;
using testutil::oracle_conjunctive;
using testutil::random_mass;

namespace {
const FocalSet A = FocalSet::singleton(0);
const FocalSet B = FocalSet::singleton(1);
const FocalSet C = FocalSet::singleton(2);
const FocalSet AB{0b011};
const FocalSet AC{0b101};
const FocalSet BC{0b110};
const FocalSet ABC{0b111};
}  // namespace

TEST_CASE("frame construction and subset encoding") {
  Frame f = make_frame(3);
  CHECK(f.size() == 3);
  CHECK(f.subset_count() == 8);
  CHECK(f.full_set() == ABC);
  CHECK(f.index_of("b").value() == 1);
  CHECK_FALSE(f.index_of("z").has_value());
  CHECK(f.complement(A) == BC);
  CHECK(f.set_to_string(AB) == "{a,b}");
  CHECK(f.set_to_string(FocalSet{}) == "{}");

  CHECK_THROWS_AS(Frame({}), std::invalid_argument);
  CHECK_THROWS_AS(Frame({"a", "a"}), std::invalid_argument);
  CHECK_THROWS_AS(Frame({"a b"}), std::invalid_argument);
  CHECK_THROWS_AS(Frame(std::vector<std::string>(17, "x")), std::invalid_argument);
}

TEST_CASE("validate_mass checks the constraints in order") {
  Frame f = make_frame(2);
  const FocalSet TH{0b11};

  SECTION("vacuous mass is valid in a closed world") {
    MassFunction m = MassFunction::vacuous(f);
    CHECK(validate_mass(m, World::closed).ok);
    CHECK(validate_mass(m, World::open).ok);
  }
  SECTION("mass on the empty set is open-world only") {
    MassFunction m(f, {{FocalSet{}, 0.2}, {TH, 0.8}});
    auto closed = validate_mass(m, World::closed);
    CHECK_FALSE(closed.ok);
    CHECK(closed.violation.find("empty set") != std::string::npos);
    CHECK(validate_mass(m, World::open).ok);
  }
  SECTION("unit-sum violation is reported") {
    MassFunction m(f, {{A, 0.5}, {B, 0.6}});
    auto report = validate_mass(m, World::closed);
    CHECK_FALSE(report.ok);
    CHECK(report.violation.find("not 1") != std::string::npos);
  }
  SECTION("negative mass is reported first") {
    MassFunction m(f, {{A, -0.5}, {B, 1.5}});
    auto report = validate_mass(m, World::closed);
    CHECK_FALSE(report.ok);
    CHECK(report.violation.find("negative") != std::string::npos);
  }
}

TEST_CASE("bel on hand fixtures") {
  Frame f3 = make_frame(3);
  SECTION("two-class fixture") {
    Frame f2 = make_frame(2);
    MassFunction m(f2, {{A, 0.6}, {FocalSet{0b11}, 0.4}});
    CHECK(bel(m, A) == Catch::Approx(0.6));
    CHECK(bel(m, FocalSet{0b11}) == Catch::Approx(1.0));
  }
  SECTION("three-class fixture") {
    MassFunction m(f3, {{A, 0.3}, {AB, 0.6}, {ABC, 0.1}});
    CHECK(bel(m, AB) == Catch::Approx(0.9));
    CHECK(bel(m, FocalSet{}) == 0.0);
  }
  SECTION("subset outside the frame is rejected") {
    MassFunction m = MassFunction::vacuous(make_frame(2));
    CHECK_THROWS_AS(bel(m, ABC), std::invalid_argument);
  }
}

TEST_CASE("pl on hand fixtures") {
  Frame f2 = make_frame(2);
  MassFunction m(f2, {{A, 0.6}, {FocalSet{0b11}, 0.4}});
  CHECK(pl(m, B) == Catch::Approx(0.4));
  CHECK(pl(m, A) == Catch::Approx(1.0));

  Frame f3 = make_frame(3);
  MassFunction open_m(f3, {{FocalSet{}, 0.1}, {A, 0.3}, {BC, 0.6}});
  CHECK(pl(open_m, B) == Catch::Approx(0.6));
  CHECK(pl(open_m, B) ==
        Catch::Approx(1.0 - open_m.conflict_mass() - bel(open_m, AC)));
}

TEST_CASE("pignistic transform") {
  Frame f3 = make_frame(3);
  SECTION("even split of a pair") {
    MassFunction m(f3, {{AB, 1.0}});
    auto p = betp(m);
    CHECK(p[0] == Catch::Approx(0.5));
    CHECK(p[1] == Catch::Approx(0.5));
    CHECK(p[2] == 0.0);
  }
  SECTION("vacuous mass splits uniformly") {
    auto p = betp(MassFunction::vacuous(f3));
    for (double v : p) CHECK(v == Catch::Approx(1.0 / 3));
  }
  SECTION("term-by-term fixture") {
    MassFunction m(f3, {{A, 0.3}, {AB, 0.6}, {ABC, 0.1}});
    auto p = betp(m);
    CHECK(p[0] == Catch::Approx(0.3 + 0.3 + 1.0 / 30).epsilon(1e-12));
    CHECK(p[1] == Catch::Approx(0.3 + 1.0 / 30).epsilon(1e-12));
    CHECK(p[2] == Catch::Approx(1.0 / 30).epsilon(1e-12));
  }
  SECTION("total conflict is degenerate") {
    std::vector<double> dense(8, 0.0);
    dense[0] = 1.0;
    MassFunction m(f3, dense);
    CHECK_THROWS_AS(betp(m), numeric_error);
  }
}

TEST_CASE("conjunctive combination on hand fixtures") {
  Frame f2 = make_frame(2);
  const FocalSet TH{0b11};

  SECTION("vacuous is the neutral element") {
    std::mt19937_64 rng(41);
    MassFunction m = random_mass(rng, f2);
    MassFunction c = conjunctive_combine(m, MassFunction::vacuous(f2));
    for (std::size_t x = 0; x < 4; ++x)
      CHECK(c.masses()[x] == Catch::Approx(m.masses()[x]).margin(1e-12));
  }
  SECTION("four focal products") {
    MassFunction m1(f2, {{A, 0.5}, {TH, 0.5}});
    MassFunction m2(f2, {{B, 0.5}, {TH, 0.5}});
    MassFunction c = conjunctive_combine(m1, m2);
    CHECK(c.conflict_mass() == Catch::Approx(0.25));
    CHECK(c.at(A) == Catch::Approx(0.25));
    CHECK(c.at(B) == Catch::Approx(0.25));
    CHECK(c.at(TH) == Catch::Approx(0.25));
  }
  SECTION("total conflict stays representable") {
    MassFunction m1(f2, {{A, 1.0}});
    MassFunction m2(f2, {{B, 1.0}});
    MassFunction c = conjunctive_combine(m1, m2);
    CHECK(c.conflict_mass() == Catch::Approx(1.0));
  }
  SECTION("frame mismatch is rejected") {
    MassFunction m1 = MassFunction::vacuous(f2);
    MassFunction m2 = MassFunction::vacuous(make_frame(3));
    CHECK_THROWS_AS(conjunctive_combine(m1, m2), std::invalid_argument);
  }
}

TEST_CASE("Dempster combination on hand fixtures") {
  Frame f2 = make_frame(2);
  const FocalSet TH{0b11};

  SECTION("normalized fixture with conflict") {
    MassFunction m1(f2, {{A, 0.5}, {TH, 0.5}});
    MassFunction m2(f2, {{B, 0.5}, {TH, 0.5}});
    auto [mass, conflict] = dempster_combine(m1, m2);
    CHECK(conflict == Catch::Approx(0.25));
    CHECK(mass.at(A) == Catch::Approx(1.0 / 3));
    CHECK(mass.at(B) == Catch::Approx(1.0 / 3));
    CHECK(mass.at(TH) == Catch::Approx(1.0 / 3));
    CHECK(mass.conflict_mass() == 0.0);
  }
  SECTION("vacuous is neutral with zero conflict") {
    std::mt19937_64 rng(17);
    MassFunction m = random_mass(rng, f2);
    auto [mass, conflict] = dempster_combine(m, MassFunction::vacuous(f2));
    CHECK(conflict == Catch::Approx(0.0).margin(1e-15));
    for (std::size_t x = 0; x < 4; ++x)
      CHECK(mass.masses()[x] == Catch::Approx(m.masses()[x]).margin(1e-12));
  }
  SECTION("total conflict is an error") {
    MassFunction m1(f2, {{A, 1.0}});
    MassFunction m2(f2, {{B, 1.0}});
    CHECK_THROWS_AS(dempster_combine(m1, m2), numeric_error);
  }
}

TEST_CASE("transform identities on random masses") {
  std::mt19937_64 rng(2024);
  for (int iter = 0; iter < 300; ++iter) {
    const std::size_t n = 2 + iter % 3;
    Frame f = make_frame(n);
    World world = (iter % 2 == 0) ? World::closed : World::open;
    MassFunction m = random_mass(rng, f, world);

    for (std::uint32_t x = 1; x < f.subset_count(); ++x) {
      const FocalSet X{x};
      const double b = bel(m, X);
      const double p = pl(m, X);
      CHECK(b <= p + 1e-12);
      CHECK(p == Catch::Approx(1.0 - m.conflict_mass() -
                               bel(m, f.complement(X)))
                     .margin(1e-12));
    }
    // monotone under set inclusion
    for (std::uint32_t x = 1; x < f.subset_count(); ++x)
      for (std::uint32_t y = x; y < f.subset_count(); ++y)
        if ((x & ~y) == 0) {
          CHECK(bel(m, FocalSet{x}) <= bel(m, FocalSet{y}) + 1e-12);
          CHECK(pl(m, FocalSet{x}) <= pl(m, FocalSet{y}) + 1e-12);
        }
    // pignistic output is a probability distribution
    auto p = betp(m);
    double sum = 0.0;
    for (double v : p) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(sum == Catch::Approx(1.0).margin(1e-9));
  }
}

TEST_CASE("combination agrees with the tuple-enumeration oracle") {
  std::mt19937_64 rng(7);
  for (int iter = 0; iter < 120; ++iter) {
    const std::size_t n = 2 + iter % 3;
    const std::size_t s = 2 + iter % 3;
    Frame f = make_frame(n);
    std::vector<MassFunction> sources;
    for (std::size_t j = 0; j < s; ++j)
      sources.push_back(random_mass(rng, f, World::open));

    auto expected = oracle_conjunctive(sources);
    MassFunction got = conjunctive_combine(sources);
    for (std::size_t x = 0; x < expected.size(); ++x)
      CHECK(got.masses()[x] == Catch::Approx(expected[x]).margin(1e-12));

    if (expected[0] < 1.0 - 1e-6) {
      auto [ds, conflict] = dempster_combine(sources);
      CHECK(conflict == Catch::Approx(expected[0]).margin(1e-12));
      for (std::size_t x = 1; x < expected.size(); ++x)
        CHECK(ds.masses()[x] ==
              Catch::Approx(expected[x] / (1.0 - expected[0])).margin(1e-12));
    }
  }
}

TEST_CASE("combination is invariant under source permutation") {
  std::mt19937_64 rng(99);
  Frame f = make_frame(3);
  std::vector<MassFunction> sources;
  for (int j = 0; j < 4; ++j) sources.push_back(random_mass(rng, f));

  MassFunction base = conjunctive_combine(sources);
  std::vector<std::size_t> order = {0, 1, 2, 3};
  for (int shuffle = 0; shuffle < 8; ++shuffle) {
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<MassFunction> permuted;
    for (auto i : order) permuted.push_back(sources[i]);
    MassFunction got = conjunctive_combine(permuted);
    for (std::size_t x = 0; x < base.masses().size(); ++x)
      CHECK(got.masses()[x] == Catch::Approx(base.masses()[x]).margin(1e-12));
  }
}

TEST_CASE("Dempster on singleton-only masses is the Bayesian special case") {
  std::mt19937_64 rng(5);
  Frame f = make_frame(3);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  for (int iter = 0; iter < 50; ++iter) {
    std::vector<MassFunction> sources;
    std::vector<std::vector<double>> probs;
    for (int j = 0; j < 3; ++j) {
      std::vector<double> p = {unit(rng), unit(rng), unit(rng)};
      double sum = p[0] + p[1] + p[2];
      for (double& v : p) v /= sum;
      sources.push_back(
          MassFunction(f, {{A, p[0]}, {B, p[1]}, {C, p[2]}}));
      probs.push_back(p);
    }
    auto [mass, conflict] = dempster_combine(sources);
    // normalized product of the per-class values
    std::vector<double> prod = {1.0, 1.0, 1.0};
    for (const auto& p : probs)
      for (int i = 0; i < 3; ++i) prod[i] *= p[i];
    const double z = prod[0] + prod[1] + prod[2];
    for (int i = 0; i < 3; ++i)
      CHECK(mass.at(FocalSet::singleton(i)) ==
            Catch::Approx(prod[i] / z).margin(1e-12));
  }
}

TEST_CASE("debug rendering lists the focal sets") {
  Frame f = make_frame(2);
  MassFunction m(f, {{A, 0.25}, {FocalSet{0b11}, 0.75}});
  const std::string s = to_debug_string(m);
  CHECK(s.find("{a}: 0.25") != std::string::npos);
  CHECK(s.find("{a,b}: 0.75") != std::string::npos);
}
