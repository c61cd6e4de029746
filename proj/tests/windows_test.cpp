#include <numeric>
#include <random>

#include "crystaframe/windows.hpp"
#include "doctest.h"

using namespace crystaframe;

namespace {

PDPtr envelope(i64 p, int m, int cap, const std::string& var = "x") {
  PDPresentation pr;
  pr.p = p;
  pr.m = m;
  pr.vars = {var};
  pr.generators = {{1}};
  pr.cap = cap;
  return PDAlgebra::build(pr);
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(static_cast<size_t>(n)) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[static_cast<size_t>(x)] != x) x = parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
    return x;
  }
  void join(int a, int b) { parent[static_cast<size_t>(find(a))] = find(b); }
  int components() {
    int c = 0;
    for (int i = 0; i < static_cast<int>(parent.size()); ++i) c += find(i) == i;
    return c;
  }
};

// rank-1 windows over Z/p^m, joined whenever some unit g gives a window hom
int rank1_classes_by_brute_force(i64 p, int m) {
  auto f = lift_frame(p, m);
  const i64 q = ipow(p, m);
  std::vector<Window> ws;
  for (int d = 0; d <= 1; ++d)
    for (i64 u = 1; u < q; ++u)
      if (u % p != 0) ws.push_back(window_from_psi(f, d, 1 - d, {{Elem{u}}}));
  UnionFind uf(static_cast<int>(ws.size()));
  for (size_t i = 0; i < ws.size(); ++i)
    for (size_t j = 0; j < ws.size(); ++j)
      for (i64 g = 1; g < q; ++g) {
        if (g % p == 0) continue;
        HomMatrix h;
        h.g = {{Elem{g}}};
        if (ws[i].d == 1 && ws[j].t == 1) {
          auto wit = f->witness(Elem{g});
          if (!wit) continue;
          h.witnesses = {{*wit}};
        }
        if (is_hom(ws[i], ws[j], h, HomMode::Window)) {
          uf.join(static_cast<int>(i), static_cast<int>(j));
          break;
        }
      }
  return uf.components();
}

Window random_window(FramePtr f, int d, int t, std::mt19937_64& rng) {
  const i64 q = *f->target().cardinality();
  for (;;) {
    EMat psi;
    for (int i = 0; i < d + t; ++i) {
      psi.emplace_back();
      for (int j = 0; j < d + t; ++j) psi.back().push_back(Elem{static_cast<i64>(rng() % static_cast<std::uint64_t>(q))});
    }
    try {
      return window_from_psi(f, d, t, psi);
    } catch (const AlgebraError&) {
    }
  }
}

}  // namespace

TEST_CASE("rank-1 windows over Z/4 fall into four classes") {
  auto table = classify_windows(lift_frame(2, 2), 1);
  CHECK(table.classes.size() == 4);
  CHECK(rank1_classes_by_brute_force(2, 2) == 4);
}

TEST_CASE("rank-1 class counts agree with a brute-force orbit count") {
  for (auto [p, m] : {std::pair<i64, int>{2, 3}, {3, 2}, {5, 1}}) {
    CAPTURE(p);
    CAPTURE(m);
    auto table = classify_windows(lift_frame(p, m), 1);
    CHECK(static_cast<int>(table.classes.size()) == rank1_classes_by_brute_force(p, m));
  }
}

TEST_CASE("orbit sizes add up to the number of windows") {
  auto table = classify_windows(lift_frame(2, 2), 2);
  i64 total = 0;
  for (const auto& c : table.classes) total += c.orbit_size;
  // one window per invertible Psi and per d in {0, 1, 2}
  i64 invertible = 0;
  for (i64 a = 0; a < 4; ++a)
    for (i64 b = 0; b < 4; ++b)
      for (i64 c = 0; c < 4; ++c)
        for (i64 e = 0; e < 4; ++e) invertible += ((a * e - b * c) % 2 + 2) % 2 == 1;
  CHECK(total == 3 * invertible);
  CHECK(table.enumerated == 3 * 256);
  for (size_t i = 0; i < table.classes.size(); ++i) {
    const auto& c = table.classes[i];
    CHECK(class_index(table, window_from_psi(lift_frame(2, 2), c.d, c.t, c.psi)) == static_cast<int>(i));
  }
}

TEST_CASE("VF = FV = p on every class of rank 2 over Z/4 and Z/9") {
  for (auto [p, m] : {std::pair<i64, int>{2, 2}, {3, 2}}) {
    auto f = lift_frame(p, m);
    auto table = classify_windows(f, 2);
    for (const auto& c : table.classes) {
      auto fv = fv_operators(window_from_psi(f, c.d, c.t, c.psi));
      CHECK(fv.vf_ok);
      CHECK(fv.fv_ok);
    }
  }
}

TEST_CASE("residue hom groups match the generic solver") {
  std::mt19937_64 rng(11);
  auto f = lift_frame(2, 3);
  const CoefficientRing z8(2, 3);
  for (int trial = 0; trial < 40; ++trial) {
    const int dv = static_cast<int>(rng() % 3), dw = static_cast<int>(rng() % 3);
    Window v = random_window(f, dv, 2 - dv, rng), w = random_window(f, dw, 2 - dw, rng);
    for (HomMode mode : {HomMode::Window, HomMode::PhiModule}) {
      auto fast = residue_hom_group(z8, small_window(v), small_window(w), mode);
      auto slow = hom_space(v, w, mode);
      CHECK(fast.log_p_size == slow.log_p_size);
      for (const auto& h : slow.generators) CHECK(is_hom(v, w, h, mode));
    }
  }
}

TEST_CASE("window homs are Phi-module homs") {
  std::mt19937_64 rng(13);
  auto f = lift_frame(3, 2);
  for (int trial = 0; trial < 20; ++trial) {
    Window v = random_window(f, 1, 1, rng), w = random_window(f, 1, 1, rng);
    auto s = hom_space(v, w, HomMode::Window);
    auto phi = hom_space(v, w, HomMode::PhiModule);
    CHECK(s.log_p_size <= phi.log_p_size);
    for (const auto& h : s.generators) CHECK(hom_group_contains(v, w, phi, h.g));
  }
}

TEST_CASE("base change along the identity keeps the class") {
  auto f = lift_frame(2, 2);
  auto table = classify_windows(f, 2);
  auto id = identity_hom(f);
  for (size_t i = 0; i < table.classes.size(); ++i) {
    const auto& c = table.classes[i];
    CHECK(class_index(table, base_change(id, window_from_psi(f, c.d, c.t, c.psi))) == static_cast<int>(i));
  }
}

TEST_CASE("normal decomposition") {
  auto f = lift_frame(2, 3);
  auto nd = normal_decomposition(*f, 2, {{1, 0}, {0, 2}});
  CHECK(nd.d == 1);
  CHECK(nd.t == 1);
  auto all = normal_decomposition(*f, 2, {{2, 0}, {0, 2}});
  CHECK(all.d == 0);
  CHECK(all.t == 2);
  const CoefficientRing z8(2, 3);
  CHECK(lift_idempotent(z8, 5).first == 1);
  CHECK(lift_idempotent(z8, 4).first == 0);
}

TEST_CASE("windows over a PD frame validate") {
  auto d = envelope(2, 3, 4);
  auto f = pd_frame(d);
  const Ring& r = f->target();
  Window mult = window_from_psi(f, 1, 0, {{r.add(r.one(), d->variable(0))}});
  CHECK(validate_window(mult).ok);
  auto de = envelope(2, 2, 2, "e");
  auto fe = pd_frame(de);
  const Ring& re = fe->target();
  Window ss = window_from_psi(fe, 1, 1, {{re.zero(), re.one()}, {re.one(), de->generator_power(0, 1)}});
  CHECK(validate_window(ss).ok);
  CHECK_THROWS_AS(window_from_psi(fe, 1, 1, {{re.zero(), re.zero()}, {re.one(), re.one()}}), AlgebraError);
}
