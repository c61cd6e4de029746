#include "crystaframe/frames.hpp"
#include "doctest.h"

using namespace crystaframe;

namespace {

AlgebraPtr fp(i64 p) { return MonomialAlgebra::create(CoeffField::residue(p, 1), {}); }

PDPtr envelope(i64 p, int m, int cap, const std::string& var = "x") {
  PDPresentation pr;
  pr.p = p;
  pr.m = m;
  pr.vars = {var};
  pr.generators = {{1}};
  pr.cap = cap;
  return PDAlgebra::build(pr);
}

AlgebraPtr perfect_line() {
  // F_2[Y^(1/4)] / (Y^2)
  return MonomialAlgebra::create(CoeffField::residue(2, 1), {VariableSpec{"Y", 2, 8}});
}

void require_ok(const Certificate& c) {
  const std::string first = c.failures.empty() ? std::string() : c.failures.front();
  INFO(first);
  CHECK(c.ok);
  CHECK(c.checks > 0);
}

}  // namespace

TEST_CASE("Witt frames validate") {
  auto f4 = MonomialAlgebra::create(CoeffField::extension(2, {1, 1, 1}), {});
  auto rx = MonomialAlgebra::create(CoeffField::residue(2, 1), {VariableSpec{"x", 0, 3}});
  for (int n = 2; n <= 3; ++n) {
    require_ok(validate_frame(*witt_frame(fp(2), n)));
    require_ok(validate_frame(*witt_frame(f4, n)));
    require_ok(validate_frame(*witt_frame(rx, n)));
  }
  require_ok(validate_frame(*witt_lift_frame(f4, 3)));
}

TEST_CASE("lift frames validate") {
  require_ok(validate_frame(*lift_frame(2, 3)));
  require_ok(validate_frame(*lift_frame(3, 2)));
}

TEST_CASE("PD frames validate") {
  require_ok(validate_frame(*pd_frame(envelope(2, 3, 4))));
  require_ok(validate_frame(*pd_frame(envelope(3, 3, 4))));
}

TEST_CASE("quotient frame of a minimal sequence validates") {
  auto s = perfect_line();
  auto q = admissible_quotient_frame(minimal_sequence(s, {{4}}, 2), 2);
  CHECK(q->carrier().cardinality() == 4096);
  require_ok(validate_frame(*q));
}

TEST_CASE("unit ideal sequence is rejected") {
  auto s = perfect_line();
  CHECK_THROWS_AS(admissible_quotient_frame(AdmissibleSequence{s, {{{0}}, {{0}}}}, 2), AlgebraError);
}

TEST_CASE("frame homomorphisms") {
  auto d8 = pd_frame(envelope(2, 3, 4));
  require_ok(validate_frame_hom(identity_hom(d8)));
  auto de = pd_frame(envelope(2, 2, 2, "e"));
  require_ok(validate_frame_hom(augmentation_hom(de, lift_frame(2, 2))));
  auto s = perfect_line();
  auto w = witt_frame(s, 2);
  auto qm = admissible_quotient_frame(AdmissibleSequence{s, {{{1}}, {{1}}}}, 2);
  require_ok(validate_frame_hom(quotient_projection(w, qm)));
}

TEST_CASE("projection onto the minimal quotient misses the ideal condition") {
  auto s = perfect_line();
  auto w = witt_frame(s, 2);
  auto q = admissible_quotient_frame(minimal_sequence(s, {{4}}, 2), 2);
  auto cert = validate_frame_hom(quotient_projection(w, q));
  CHECK_FALSE(cert.ok);
  REQUIRE_FALSE(cert.failures.empty());
  CHECK(cert.failures.front().find("alpha(I) not contained in I'") != std::string::npos);
}

TEST_CASE("sigma_1 nilpotence") {
  auto de = pd_frame(envelope(2, 2, 2, "e"));
  auto d = envelope(2, 2, 2, "e");
  auto nil = sigma1_nilpotence_index(*de, {d->generator_power(0, 1)});
  CHECK(nil.nilpotent);
  CHECK(nil.index == 1);
  // sigma_1 does not preserve N = (x) at cap 4: sigma_1(x^[2]) leaves it
  auto d8 = envelope(2, 3, 4);
  auto bad = sigma1_nilpotence_index(*pd_frame(d8), {d8->generator_power(0, 1)});
  CHECK_FALSE(bad.nilpotent);
  auto lift = sigma1_nilpotence_index(*lift_frame(2, 3), {Elem{2}});
  CHECK_FALSE(lift.nilpotent);
}
