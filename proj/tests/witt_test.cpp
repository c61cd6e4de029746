#include <random>

#include "crystaframe/witt.hpp"
#include "doctest.h"

using namespace crystaframe;

namespace {

Vec random_vec(const MonomialAlgebra& a, std::mt19937_64& rng) {
  Vec v = a.zero();
  for (auto& x : v) x = static_cast<i64>(rng() % static_cast<std::uint64_t>(a.field().size()));
  return v;
}

Elem random_witt(const WittRing& w, std::mt19937_64& rng) {
  std::vector<Vec> comps;
  for (int i = 0; i < w.length(); ++i) comps.push_back(random_vec(w.base(), rng));
  return w.from_components(comps);
}

}  // namespace

TEST_CASE("ghost identities hold for the universal polynomials") {
  for (i64 p : {2, 3})
    for (int n = 1; n <= 4; ++n) {
      CAPTURE(p);
      CAPTURE(n);
      CHECK(WittPolynomialCache::get(p, n)->verify_ghost_identities());
    }
}

TEST_CASE("integers have constant ghost components") {
  for (i64 p : {2, 3, 5}) {
    auto cache = WittPolynomialCache::get(p, 3);
    for (i64 k : {0, 1, 2, 7, -1, 100}) {
      auto g = ghost_components(p, cache->integer_components(k));
      for (const auto& x : g) CHECK(x == k);
    }
  }
}

TEST_CASE("W_2(F_2) is Z/4") {
  auto f2 = MonomialAlgebra::create(CoeffField::residue(2, 1), {});
  WittRing w(f2, 2);
  CHECK(w.cardinality() == 4);
  const Elem one = w.one();
  CHECK(w.add(one, one) == w.verschiebung({{1}}));
  Elem x = w.zero();
  for (int k = 1; k <= 4; ++k) {
    x = w.add(x, one);
    CHECK((k == 4) == w.is_zero(x));
  }
  CHECK(w.mul(w.from_int(2), w.from_int(2)) == w.zero());
}

TEST_CASE("W_n(F_p) has p^n elements and characteristic p^n") {
  for (auto [p, n] : {std::pair<i64, int>{2, 3}, {3, 2}, {5, 2}}) {
    auto fp = MonomialAlgebra::create(CoeffField::residue(p, 1), {});
    WittRing w(fp, n);
    CHECK(w.cardinality() == ipow(p, n));
    CHECK(w.is_zero(w.from_int(ipow(p, n))));
    CHECK_FALSE(w.is_zero(w.from_int(ipow(p, n - 1))));
  }
}

TEST_CASE("ghost map is a ring map over Z/p^M") {
  std::mt19937_64 rng(17);
  int evaluations = 0;
  for (i64 p : {2, 3}) {
    auto base = MonomialAlgebra::create(CoeffField::residue(p, 6), {VariableSpec{"x", 0, 3}});
    for (int n = 1; n <= 3; ++n) {
      WittRing w(base, n);
      for (int t = 0; t < 35; ++t, ++evaluations) {
        Elem a = random_witt(w, rng), b = random_witt(w, rng);
        auto ga = w.ghost(a), gb = w.ghost(b), gs = w.ghost(w.add(a, b)), gm = w.ghost(w.mul(a, b));
        for (int i = 0; i < n; ++i) {
          const size_t k = static_cast<size_t>(i);
          CHECK(gs[k] == base->add(ga[k], gb[k]));
          CHECK(gm[k] == base->mul(ga[k], gb[k]));
        }
      }
    }
  }
  CHECK(evaluations >= 200);
}

TEST_CASE("ring axioms and V, F relations in characteristic p") {
  std::mt19937_64 rng(23);
  for (i64 p : {2, 3}) {
    auto base = MonomialAlgebra::create(CoeffField::residue(p, 1), {VariableSpec{"x", 0, 3}});
    const int n = 3;
    WittRing w(base, n);
    for (int t = 0; t < 20; ++t) {
      Elem a = random_witt(w, rng), b = random_witt(w, rng), c = random_witt(w, rng);
      CHECK(w.mul(a, w.mul(b, c)) == w.mul(w.mul(a, b), c));
      CHECK(w.mul(a, w.add(b, c)) == w.add(w.mul(a, b), w.mul(a, c)));
      CHECK(w.add(a, w.neg(a)) == w.zero());
      // V F = p
      CHECK(w.verschiebung(w.truncate(w.frobenius(a), n - 1)) == w.mul(w.from_int(p), a));
      // v(x) y = v(x F y)
      const auto xs = w.truncate(b, n - 1);
      const Elem vx = w.verschiebung(xs);
      WittRing shorter(base, n - 1);
      const Elem fy = shorter.from_components(w.truncate(w.frobenius(c), n - 1));
      const Elem prod = shorter.mul(shorter.from_components(xs), fy);
      CHECK(w.mul(vx, c) == w.verschiebung(shorter.components(prod)));
    }
  }
}

TEST_CASE("Teichmuller lifts are multiplicative") {
  std::mt19937_64 rng(29);
  auto base = MonomialAlgebra::create(CoeffField::extension(2, {1, 1, 1}), {VariableSpec{"x", 0, 2}});
  WittRing w(base, 3);
  for (int t = 0; t < 30; ++t) {
    Vec a = random_vec(*base, rng), b = random_vec(*base, rng);
    CHECK(w.mul(w.teichmuller(a), w.teichmuller(b)) == w.teichmuller(base->mul(a, b)));
  }
}
