#include "ksdagg/parallel.hpp"
#include "ksdagg/rng.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <set>
#include <stdexcept>
#include <vector>

using namespace ksdagg;

TEST(RngStream, SameSeedAndStreamGiveSameDraws) {
  auto a = RngStream(42, 7).engine();
  auto b = RngStream(42, 7).engine();
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(RngStream, DistinctStreamsDiffer) {
  EXPECT_NE(RngStream(42, 7).engine()(), RngStream(42, 8).engine()());
  EXPECT_NE(RngStream(42, 7).engine()(), RngStream(43, 7).engine()());
}

TEST(RngStream, ChildrenArePureAndDistinct) {
  const RngStream root(9);
  EXPECT_EQ(root.child(3), root.child(3));
  EXPECT_EQ(root.child({1, 2}), root.child({1, 2}));
  EXPECT_EQ(root.child(3).seed(), 9u);
  std::set<std::uint64_t> streams;
  for (std::uint64_t a = 0; a < 20; ++a) {
    for (std::uint64_t b = 0; b < 20; ++b) streams.insert(root.child({a, b}).stream());
  }
  EXPECT_EQ(streams.size(), 400u);
  EXPECT_NE(root.child({1}), root.child({1, 0}));
  EXPECT_NE(root.child(1), root.child(1).child(1));
}

TEST(RngStream, PinnedFirstDraw) {
  // Guards against silent changes to the stream derivation.
  EXPECT_EQ(RngStream(1).child({2, 3}).engine()(), 10440549049984635847ULL);
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
  for (std::size_t workers : {1u, 2u, 5u}) {
    std::vector<std::atomic<int>> hits(97);
    parallel_for(hits.size(), workers, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
}

TEST(ParallelFor, RethrowsLowestFailingIndex) {
  for (std::size_t workers : {1u, 4u}) {
    try {
      parallel_for(50, workers, [](std::size_t i) {
        if (i == 13 || i == 40) throw std::runtime_error("fail " + std::to_string(i));
      });
      FAIL() << "expected an exception";
    } catch (const std::runtime_error& e) {
      EXPECT_STREQ(e.what(), "fail 13");
    }
  }
}

TEST(ParallelFor, WorkerCountFromEnvironment) {
  setenv("KSDAGG_WORKERS", "3", 1);
  EXPECT_EQ(default_worker_count(), 3u);
  setenv("KSDAGG_WORKERS", "junk", 1);
  EXPECT_EQ(default_worker_count(), 1u);
  unsetenv("KSDAGG_WORKERS");
  EXPECT_GE(default_worker_count(), 1u);
}
