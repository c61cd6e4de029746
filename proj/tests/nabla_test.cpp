#include "crystaframe/nabla.hpp"
#include "doctest.h"

using namespace crystaframe;

namespace {

PDPtr envelope(i64 p, int m, int cap) {
  PDPresentation pr;
  pr.p = p;
  pr.m = m;
  pr.vars = {"x"};
  pr.generators = {{1}};
  pr.cap = cap;
  return PDAlgebra::build(pr);
}

Window mult_window(const PDPtr& d, FramePtr f) {
  const Ring& r = f->target();
  return window_from_psi(f, 1, 0, {{r.add(r.one(), d->variable(0))}});
}

}  // namespace

TEST_CASE("the square-zero frame and its two maps") {
  auto d = envelope(2, 3, 3);
  auto f = pd_frame(d);
  auto sq = square_zero_frame(d);
  auto c = validate_frame(*sq);
  CHECK(c.ok);
  CHECK(validate_frame_hom(square_zero_p0(f, sq)).ok);
  CHECK(validate_frame_hom(square_zero_p1(f, sq)).ok);
}

TEST_CASE("square-zero multiplication kills products of differentials") {
  auto d = envelope(3, 2, 3);
  SquareZeroRing r(d);
  const auto& low = r.lower();
  Elem dx = r.make(d->zero(), {low.one()});
  CHECK(r.mul(dx, dx) == r.from_int(0));
  Elem a = r.make(d->variable(0), {low.variable(0)});
  CHECK(r.part(r.mul(a, dx)) == d->zero());
  CHECK(r.differential(r.mul(a, dx), 0) == low.variable(0));
}

TEST_CASE("zero connection on a constant window is horizontal and integrable") {
  auto d = envelope(2, 3, 4);
  auto f = pd_frame(d);
  const Ring& r = f->target();
  for (int dd = 0; dd <= 1; ++dd) {
    Window w = window_from_psi(f, dd, 1 - dd, {{r.from_int(3)}});
    auto c = zero_connection(w);
    CHECK(horizontality_check(w, c).ok);
    auto ig = integrability_and_qnilpotence(w, c);
    CHECK(ig.integrable);
    CHECK(ig.quasi_nilpotent);
  }
}

TEST_CASE("zero connection fails when Psi depends on x") {
  auto d = envelope(2, 3, 4);
  Window w = mult_window(d, pd_frame(d));
  auto rep = horizontality_check(w, zero_connection(w));
  CHECK_FALSE(rep.ok);
  CHECK_FALSE(rep.witnesses.empty());
}

TEST_CASE("solved connections are horizontal, integrable and unique up to the kernel") {
  for (i64 p : {2, 3}) {
    CAPTURE(p);
    auto d = envelope(p, 3, 4);
    Window w = mult_window(d, pd_frame(d));
    auto sol = solve_connection(w);
    REQUIRE(sol.solvable);
    CHECK(horizontality_check(w, sol.particular).ok);
    auto ig = integrability_and_qnilpotence(w, sol.particular);
    CHECK(ig.integrable);
    CHECK(ig.quasi_nilpotent);
    for (const auto& h : sol.homogeneous) {
      Connection c = sol.particular;
      for (size_t i = 0; i < c.n.size(); ++i) c.n[i] = mat_add(d->lower(), c.n[i], h.n[i]);
      CHECK(horizontality_check(w, c).ok);
    }
  }
}

TEST_CASE("perturbing a unique connection breaks horizontality") {
  auto d = envelope(2, 3, 4);
  Window w = mult_window(d, pd_frame(d));
  auto sol = solve_connection(w);
  REQUIRE(sol.solvable);
  REQUIRE(sol.log_p_homogeneous == 0);
  Connection c = sol.particular;
  c.n[0][0][0] = d->lower().add(c.n[0][0][0], d->lower().one());
  CHECK_FALSE(horizontality_check(w, c).ok);
  auto s = connection_to_stratification(square_zero_frame(d), w, c);
  CHECK_FALSE(s.window_iso);
}

TEST_CASE("connection to stratification and back") {
  auto d = envelope(2, 3, 4);
  auto f = pd_frame(d);
  auto sq = square_zero_frame(d);
  const Ring& r = f->target();
  std::vector<Window> ws = {mult_window(d, f), window_from_psi(f, 0, 1, {{r.one()}}),
                            window_from_psi(f, 1, 1, {{r.one(), d->variable(0)}, {r.zero(), r.one()}})};
  int trips = 0;
  for (const auto& w : ws) {
    auto sol = solve_connection(w);
    if (!sol.solvable) continue;
    ++trips;
    auto s = connection_to_stratification(sq, w, sol.particular);
    CHECK(s.window_iso);
    CHECK(connection_equal(stratification_to_connection(w, s), sol.particular));
  }
  CHECK(trips == 3);
}
