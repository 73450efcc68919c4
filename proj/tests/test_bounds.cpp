#include <doctest.h>

#include "fclverify/errors.hpp"
#include "fclverify/offline.hpp"

using namespace fclv::fcl;

TEST_CASE("MAX resolves to the steps remaining") {
  CHECK(resolve_bound(Bound::max(), 0, 31, BoundKind::CountN) == 30);
  CHECK(resolve_bound(Bound::max(), 30, 31, BoundKind::CountN) == 0);
  CHECK(resolve_bound(Bound::max(), 12, 31, BoundKind::WindowT) == 18);
}

TEST_CASE("BEG resolves to the steps elapsed; as a window it looks backward") {
  CHECK(resolve_bound(Bound::beg(), 0, 31, BoundKind::CountN) == 0);
  CHECK(resolve_bound(Bound::beg(), 7, 31, BoundKind::CountN) == 7);
  CHECK(resolve_bound(Bound::beg(), 5, 31, BoundKind::WindowT) == -5);
}

TEST_CASE("scaled endcounts floor against an exact integer table") {
  // floor(0.8 * MAX) computed independently as (4 * MAX) / 5 in exact integer
  // arithmetic, for every trace length the test corpus uses
  CHECK(resolve_bound(Bound::scaled(0.8, EndcountKind::Max), 0, 31, BoundKind::CountN) == 24);
  for (std::int64_t L = 2; L <= 40; ++L) {
    const std::int64_t max_v = L - 1;
    const std::int64_t expected = (4 * max_v) / 5;
    CAPTURE(L);
    CHECK(resolve_bound(Bound::scaled(0.8, EndcountKind::Max), 0, L, BoundKind::CountN) ==
          expected);
  }
  CHECK(resolve_bound(Bound::scaled(0.5, EndcountKind::Max), 0, 8, BoundKind::CountN) == 3);
  CHECK(resolve_bound(Bound::scaled(0.5, EndcountKind::Beg), 9, 31, BoundKind::CountN) == 4);
}

TEST_CASE("literal windows clamp to the trace") {
  // a window reaching past the end behaves like MAX
  CHECK(resolve_bound(Bound::lit(15), 20, 31, BoundKind::WindowT) == 10);
  CHECK(resolve_bound(Bound::lit(15), 0, 31, BoundKind::WindowT) == 15);
  // a backward window reaching before the start behaves like BEG
  CHECK(resolve_bound(Bound::lit(-10), 3, 31, BoundKind::WindowT) == -3);
  CHECK(resolve_bound(Bound::lit(-10), 25, 31, BoundKind::WindowT) == -10);
}

TEST_CASE("literal counts are not clamped") {
  CHECK(resolve_bound(Bound::lit(15), 20, 31, BoundKind::CountN) == 15);
}

TEST_CASE("INF: window acts as MAX; count requires an unbounded window") {
  CHECK(resolve_bound(Bound::inf(), 4, 31, BoundKind::WindowT) == 26);
  Bound inf_window = Bound::inf();
  Bound max_window = Bound::max();
  CHECK(resolve_bound(Bound::inf(), 4, 31, BoundKind::CountN, &inf_window) == 26);
  CHECK(resolve_bound(Bound::inf(), 4, 31, BoundKind::CountN, &max_window) == 26);
  Bound lit_window = Bound::lit(5);
  CHECK_THROWS_AS(resolve_bound(Bound::inf(), 4, 31, BoundKind::CountN, &lit_window),
                  fclv::EvalError);
}
