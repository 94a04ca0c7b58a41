#include <gtest/gtest.h>

#include "neck/boundary.hpp"
#include "neck/oracle.hpp"
#include "support/corpus.hpp"
#include "support/program_gen.hpp"

using namespace neck;

TEST(Oracle, Primitives) {
  oracle::Succ diamond{{1, 2}, {3}, {3}, {4}, {}};
  EXPECT_TRUE(oracle::is_articulation(diamond, 3));
  EXPECT_FALSE(oracle::is_articulation(diamond, 0));
  EXPECT_TRUE(oracle::post_dominates(diamond, 4, 3, 0));
  EXPECT_FALSE(oracle::post_dominates(diamond, 4, 1, 0));
  EXPECT_TRUE(oracle::control_dependent(diamond, 4, 1, 0, 0));
  EXPECT_FALSE(oracle::control_dependent(diamond, 4, 3, 0, 0));
  EXPECT_EQ(oracle::distances(diamond, 0)[3], 2);
  oracle::Succ loop{{1}, {1, 2}, {}};
  EXPECT_TRUE(oracle::on_cycle(loop, 1));
  EXPECT_FALSE(oracle::on_cycle(loop, 0));
}

TEST(Oracle, AgreesOnCorpus) {
  for (const auto& name : fixtures::valid_fixtures()) {
    auto p = fixtures::fixture(name);
    auto a = identify_boundary(p);
    auto b = oracle_boundary(p);
    EXPECT_TRUE(same_outcome(a, b)) << name << ": pipeline " << (a.boundary ? a.boundary->to_string() : "none")
                                    << ", oracle " << (b.boundary ? b.boundary->to_string() : "none");
  }
}

TEST(Oracle, AgreesOnGeneratedPrograms) {
  for (std::uint64_t seed = 1000; seed < 1100; ++seed) {
    auto p = testgen::ProgramGenerator(seed).generate();
    for (const auto& sources : {TaintSourceSpec{}, TaintSourceSpec{std::vector<std::string>{"argv"}, {"readcfg"}}}) {
      auto a = identify_boundary(p, sources);
      auto b = oracle_boundary(p, sources);
      EXPECT_TRUE(same_outcome(a, b)) << "seed " << seed;
    }
  }
}

TEST(Oracle, RefusesLargePrograms) {
  auto p = parse({testgen::chain_of_loops_source(20)});
  EXPECT_THROW(oracle_boundary(p), Error);
}

TEST(Oracle, SameOutcomeComparesLocation) {
  BoundaryReport a, b;
  EXPECT_TRUE(same_outcome(a, b));
  a.boundary = BlockRef{"main", "x"};
  a.verdict = Verdict::single_element_found;
  EXPECT_FALSE(same_outcome(a, b));
  b = a;
  b.boundary_start = 1;
  EXPECT_FALSE(same_outcome(a, b));
}
