#include "crystaframe/verify.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <sstream>
#include <random>
#include <set>
#include <stdexcept>
#include <thread>

#include "crystaframe/monomial_algebra.hpp"
#include "crystaframe/nabla.hpp"

namespace crystaframe {

// ------------------------------------------------------------------ plumbing

Budgets parse_budgets(const std::string& spec, Budgets base) {
  for (const auto& [key, value] : parse_grid(spec)) {
    if (value <= 0) throw std::invalid_argument("budget " + key + " must be positive");
    if (key == "max_carrier_size") base.max_carrier_size = value;
    else if (key == "max_enumeration") base.max_enumeration = value;
    else if (key == "max_cap") base.max_cap = static_cast<int>(value);
    else throw std::invalid_argument("unknown budget '" + key + "'");
  }
  return base;
}

Budgets default_budgets() {
  const char* env = std::getenv("CRYSTAFRAME_BUDGETS");
  if (!env || !*env) return Budgets{};
  return parse_budgets(env, Budgets{});
}

std::map<std::string, i64> parse_grid(const std::string& spec) {
  std::map<std::string, i64> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char c) { return std::isspace(c); }), item.end());
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size())
      throw std::invalid_argument("expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq), val = item.substr(eq + 1);
    size_t used = 0;
    i64 v = 0;
    try {
      v = std::stoll(val, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != val.size()) throw std::invalid_argument("not an integer: '" + val + "'");
    out[key] = v;
  }
  return out;
}

void CheckCount::record(bool pass, const std::function<std::string()>& what) {
  ++cases;
  if (pass) {
    ++passed;
  } else if (counterexamples.size() < 5) {
    counterexamples.push_back(what());
  }
}

bool VerifyResult::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckCount& c) { return c.ok(); });
}

CheckCount& VerifyResult::check(const std::string& name) {
  for (auto& c : checks)
    if (c.name == name) return c;
  CheckCount c;
  c.name = name;
  checks.push_back(std::move(c));
  return checks.back();
}

const CheckCount* VerifyResult::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

const std::vector<std::string>& verify_tags() {
  static const std::vector<std::string> tags = {"sigma1-formula", "win-phi-mod",   "deform-win",          "integrability",
                                                "pd-axioms",      "gamma-vp",      "f-nilpotent-sequence"};
  return tags;
}

namespace {

i64 grid_value(const VerifyParams& vp, const std::string& key, i64 dflt) {
  auto it = vp.grid.find(key);
  return it == vp.grid.end() ? dflt : it->second;
}

std::vector<i64> primes_or(const VerifyParams& vp, std::vector<i64> dflt) {
  for (i64 p : vp.primes)
    if (!is_prime(p)) throw std::invalid_argument("not a prime: " + std::to_string(p));
  return vp.primes.empty() ? dflt : vp.primes;
}

void check_cap(const VerifyParams& vp, i64 cap) {
  if (cap > vp.budgets.max_cap) throw BudgetExceeded("divided-degree cap " + std::to_string(cap) + " exceeds max_cap");
}

PDPtr regular_envelope(i64 p, int m, int k, int cap) {
  PDPresentation pr;
  pr.p = p;
  pr.m = m;
  const char* names[] = {"x", "y", "z", "w"};
  for (int i = 0; i < k; ++i) {
    pr.vars.push_back(names[i]);
    Monomial g(static_cast<size_t>(k), 0);
    g[static_cast<size_t>(i)] = 1;
    pr.generators.push_back(g);
  }
  pr.cap = cap;
  return PDAlgebra::build(pr);
}

std::string ptag(i64 p, int m) { return "p=" + std::to_string(p) + " m=" + std::to_string(m); }

// ------------------------------------------------------------------ sigma1-formula

VerifyResult verify_sigma1_formula(const VerifyParams& vp) {
  VerifyResult res{"sigma1-formula", {}, {}};
  const int nmax = static_cast<int>(grid_value(vp, "n", 8));
  auto& formula = res.check("sigma1(x^[n]) = c_n x^[pn]");
  auto& val = res.check("v_p(c_n) >= 1 for n >= p");
  for (i64 p : primes_or(vp, {2, 3, 5})) {
    const int m = vp.precision > 0 ? vp.precision : nmax;
    const int cap = static_cast<int>(p) * nmax + 1;
    check_cap(vp, cap);
    PDPtr d = regular_envelope(p, m, 1, cap);
    const auto& R = d->coefficients();
    for (int n = 1; n <= nmax; ++n) {
      // c_n = (np)! / (n! p) over the integers
      BigInt num = 1, den = 1;
      for (i64 i = 2; i <= n * p; ++i) num *= i;
      for (i64 i = 2; i <= n; ++i) den *= i;
      den *= p;
      const BigInt c = num / den;
      const bool exact = c * den == num;
      const i64 cm = static_cast<i64>(BigInt(c % R.modulus()));
      Elem xn = d->generator_power(0, n);
      auto yz = d->ideal_witness(xn);
      Elem lhs = d->sigma1(yz->first, yz->second);
      Elem rhs = d->scale(cm, d->generator_power(0, static_cast<int>(p) * n));
      formula.record(exact && lhs == rhs, [&] {
        return ptag(p, m) + " n=" + std::to_string(n) + ": " + d->to_string(lhs) + " vs " + d->to_string(rhs);
      });
      if (n >= p) {
        int v = 0;
        for (BigInt t = c; t % p == 0 && t != 0; t /= p) ++v;
        val.record(v >= 1, [&] { return "p=" + std::to_string(p) + " n=" + std::to_string(n) + ": v_p(c_n)=" + std::to_string(v); });
      }
    }
  }
  return res;
}

// ------------------------------------------------------------------ pd-axioms

PDPtr square_ideal_envelope(i64 p, int m, int cap) {
  PDPresentation pr;
  pr.p = p;
  pr.m = m;
  pr.vars = {"x", "y"};
  pr.generators = {{2, 0}, {1, 1}, {0, 2}};
  pr.cap = cap;
  return PDAlgebra::build(pr);
}

BigInt binomial(int n, int k) {
  BigInt r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

void check_pd_axioms(const PDAlgebra& d, const std::string& name, CheckCount& out) {
  const auto& R = d.coefficients();
  const auto& gens = d.presentation().generators;
  const int r = d.cap();
  auto red = [&](const BigInt& b) { return static_cast<i64>(BigInt(b % R.modulus())); };
  for (size_t j = 0; j < gens.size(); ++j) {
    out.record(d.generator_power(j, 1) == d.monomial(gens[j]), [&] { return name + ": g^[1] != g"; });
    out.record(d.generator_power(j, 0) == d.one(), [&] { return name + ": g^[0] != 1"; });
    for (int a = 1; a < r; ++a)
      for (int b = 1; a + b < r; ++b) {
        Elem lhs = d.mul(d.generator_power(j, a), d.generator_power(j, b));
        Elem rhs = d.scale(red(binomial(a + b, a)), d.generator_power(j, a + b));
        out.record(lhs == rhs, [&] {
          return name + ": g" + std::to_string(j) + "^[" + std::to_string(a) + "] g^[" + std::to_string(b) + "]";
        });
      }
    // n! g^[n] = g^n
    Elem pw = d.one();
    BigInt fact = 1;
    for (int n = 1; n < r; ++n) {
      pw = d.mul(pw, d.monomial(gens[j]));
      fact *= n;
      out.record(d.scale(red(fact), d.generator_power(j, n)) == pw,
                 [&] { return name + ": n! g^[n] != g^n at n=" + std::to_string(n); });
    }
  }
  // n! sum_i g^[i] h^[n-i] = (g + h)^n
  for (size_t j = 0; j < gens.size(); ++j)
    for (size_t l = j + 1; l < gens.size(); ++l) {
      Elem s = d.add(d.monomial(gens[j]), d.monomial(gens[l]));
      Elem pw = d.one();
      BigInt fact = 1;
      for (int n = 1; n < r; ++n) {
        pw = d.mul(pw, s);
        fact *= n;
        Elem acc = d.zero();
        for (int i = 0; i <= n; ++i) acc = d.add(acc, d.mul(d.generator_power(j, i), d.generator_power(l, n - i)));
        out.record(d.scale(red(fact), acc) == pw, [&] { return name + ": sum rule at n=" + std::to_string(n); });
      }
    }
  // p^[n] = gamma_n(p): n! * gamma_n(p) = p^n on constants
  for (int n = 1; n < r; ++n) {
    BigInt fact = 1;
    for (int i = 2; i <= n; ++i) fact *= i;
    out.record(R.mul(red(fact), gamma_of_p(n, R)) == R.reduce(ipow(d.p(), n)),
               [&] { return name + ": gamma_n(p) at n=" + std::to_string(n); });
  }
}

VerifyResult verify_pd_axioms(const VerifyParams& vp) {
  VerifyResult res{"pd-axioms", {}, {}};
  const int rmax = static_cast<int>(grid_value(vp, "r", 8));
  const int mmax = static_cast<int>(grid_value(vp, "m", 4));
  check_cap(vp, rmax);
  const auto primes = primes_or(vp, {2, 3});
  auto& axioms = res.check("PD axioms within cap");
  auto& welldef = res.check("sigma, sigma_1 preserve the relation span");
  std::vector<std::pair<std::string, PDPtr>> bundled;
  for (i64 p : primes) {
    bundled.emplace_back("(Z/" + std::to_string(ipow(p, 3)) + ")[x] r=4", regular_envelope(p, 3, 1, 4));
    bundled.emplace_back("(Z/" + std::to_string(ipow(p, 2)) + ")[x,y] r=3", regular_envelope(p, 2, 2, 3));
    bundled.emplace_back("F_" + std::to_string(p) + "[x,y]/(x,y)^2 m=2 r=3", square_ideal_envelope(p, 2, 3));
  }
  for (const auto& [name, d] : bundled) {
    check_pd_axioms(*d, name, axioms);
    auto defect = d->well_definedness_defect();
    welldef.record(!defect, [&, n = name] { return n + ": " + *defect; });
  }
  auto& regular = res.check("torsion probe empty for regular presentations");
  for (i64 p : primes)
    for (int k = 1; k <= 2; ++k)
      for (int r = 2; r <= rmax; ++r)
        for (int m = 1; m <= mmax; ++m) {
          auto d = regular_envelope(p, m, k, r);
          auto rep = d->torsion_probe();
          regular.record(rep.witnesses.empty(), [&] {
            return ptag(p, m) + " k=" + std::to_string(k) + " r=" + std::to_string(r) + ": " +
                   std::to_string(rep.witnesses.size()) + " torsion elements";
          });
        }
  auto& square = res.check("(x,y)^2 torsion witnesses: p t = 0, t != 0");
  const int square_r = static_cast<int>(grid_value(vp, "square_r", 8));
  check_cap(vp, square_r);
  for (i64 p : primes)
    for (int m = 2; m <= std::min(mmax, 3); ++m)
      for (int r = 2; r <= square_r; ++r) {
        auto d = square_ideal_envelope(p, m, r);
        auto rep = d->torsion_probe();
        // independent re-reduction: relation rows in reverse order
        auto rows = d->relation_rows();
        std::reverse(rows.begin(), rows.end());
        HowellForm again(d->coefficients(), d->width(), rows);
        for (const auto& t : rep.witnesses) {
          Vec pt(t.size());
          for (size_t i = 0; i < t.size(); ++i) pt[i] = d->coefficients().mul(p, t[i]);
          square.record(is_zero(again.reduce(pt)) && !is_zero(again.reduce(t)),
                        [&] { return ptag(p, m) + " r=" + std::to_string(r) + ": " + d->to_string(t); });
        }
        res.notes.push_back("F_" + std::to_string(p) + "[x,y]/(x,y)^2 " + ptag(p, m) + " r=" + std::to_string(r) + ": " +
                            std::to_string(rep.witnesses.size()) + " torsion elements (" + rep.level + ")");
      }
  return res;
}

// ------------------------------------------------------------------ f-nilpotent-sequence

VerifyResult verify_fnil_sequence(const VerifyParams& vp) {
  VerifyResult res{"f-nilpotent-sequence", {}, {}};
  const int depth = static_cast<int>(grid_value(vp, "depth", 2));
  auto& base = res.check("base algebra F-nilpotent");
  auto& seq = res.check("R[a^(1/p^n)] F-nilpotent");
  for (i64 p : primes_or(vp, {2, 3})) {
    const CoeffField f = CoeffField::residue(p, 1);
    std::vector<std::pair<AlgebraPtr, std::vector<std::string>>> cases = {
        {MonomialAlgebra::create(f, {{"x", 0, 3}}), {"x"}},
        {MonomialAlgebra::create(f, {{"x", 0, 2}, {"y", 0, 2}}), {"x", "y"}},
        {MonomialAlgebra::create(f, {{"x", 0, 1}}), {"x"}},
        {MonomialAlgebra::create(f, {{"x", 0, static_cast<int>(p) + 1}, {"y", 0, 2}}), {"x"}},
    };
    for (const auto& [r, targets] : cases) {
      auto b = frobenius_kernel_nilpotency(*r);
      base.record(b.nilpotent, [&, rr = r] { return rr->describe(); });
      for (int n = 0; n <= depth; ++n) {
        auto rn = adjoin_p_roots(r, targets, n);
        auto rep = frobenius_kernel_nilpotency(*rn);
        seq.record(rep.nilpotent, [&] { return rn->describe(); });
        res.notes.push_back(rn->describe() + ": index " + std::to_string(rep.index));
      }
    }
  }
  return res;
}

// ------------------------------------------------------------------ win-phi-mod

struct PairTally {
  i64 cases = 0, well = 0, inj = 0, coker = 0, nonzero_coker = 0;
  std::vector<std::pair<i64, std::string>> bad;
};

VerifyResult verify_win_phi_mod(const VerifyParams& vp) {
  VerifyResult res{"win-phi-mod", {}, {}};
  const int rank = static_cast<int>(grid_value(vp, "rank", 2));
  if (rank < 0 || rank > 2) throw std::invalid_argument("win-phi-mod: rank must be 0, 1 or 2");
  auto& well = res.check("window homs are Phi-module homs");
  auto& inj = res.check("window hom -> Phi-module hom injective");
  auto& coker = res.check("p kills the cokernel");
  for (i64 p : primes_or(vp, {2, 3})) {
    const int m = vp.precision > 0 ? vp.precision : 3;
    FramePtr f = lift_frame(p, m);
    if (ipow(p, m) > vp.budgets.max_carrier_size) throw BudgetExceeded("win-phi-mod: carrier exceeds max_carrier_size");
    const auto& R = dynamic_cast<const ResidueRing&>(f->carrier()).coefficients();
    std::vector<SmallWindow> ws;
    for (int r = 0; r <= rank; ++r)
      for (const auto& c : classify_windows(f, r, vp.budgets.max_enumeration).classes)
        ws.push_back(small_window(window_from_psi(f, c.d, c.t, c.psi)));
    const i64 n = static_cast<i64>(ws.size());
    if (n * n > vp.budgets.max_enumeration) throw BudgetExceeded("win-phi-mod: pair count exceeds max_enumeration");
    auto work = [&](i64 begin, i64 end, PairTally& t) {
      for (i64 a = begin; a < end; ++a)
        for (i64 b = 0; b < n; ++b) {
          const auto& v = ws[static_cast<size_t>(a)];
          const auto& w = ws[static_cast<size_t>(b)];
          const i64 pair = a * n + b;
          auto fail = [&](const std::string& what) {
            if (t.bad.size() < 15) t.bad.emplace_back(pair, what + " at pair (" + std::to_string(a) + "," + std::to_string(b) + ")");
          };
          ++t.cases;
          const SmallHomGroup wh = residue_hom_group(R, v, w, HomMode::Window);
          const SmallHomGroup ph = residue_hom_group(R, v, w, HomMode::PhiModule);
          bool ok = true;
          for (const auto& h : wh.generators) ok = ok && residue_is_hom(R, v, w, h, HomMode::PhiModule);
          if (ok) ++t.well; else fail("well-defined");
          if (wh.log_p_data_size == wh.log_p_size) ++t.inj; else fail("injective");
          ok = true;
          const int r = v.rank(), r2 = w.rank();
          for (const auto& h : ph.generators) {
            SmallHom ph2;
            for (int i = 0; i < r2; ++i)
              for (int j = 0; j < r; ++j) {
                const size_t u = static_cast<size_t>(i * r + j);
                ph2.g[u] = R.mul(p, h.g[u]);
                if (i >= w.d && j < v.d) ph2.witness[u] = h.g[u];
              }
            ok = ok && residue_is_hom(R, v, w, ph2, HomMode::Window);
          }
          if (ok) ++t.coker; else fail("p coker");
          if (ph.log_p_size > wh.log_p_size) ++t.nonzero_coker;
        }
    };
    const int threads = std::max(1, std::min<int>(vp.threads, 64));
    std::vector<PairTally> tallies(static_cast<size_t>(threads));
    {
      std::vector<std::thread> pool;
      for (int k = 0; k < threads; ++k)
        pool.emplace_back(work, n * k / threads, n * (k + 1) / threads, std::ref(tallies[static_cast<size_t>(k)]));
      for (auto& th : pool) th.join();
    }
    PairTally total;
    for (auto& t : tallies) {
      total.cases += t.cases;
      total.well += t.well;
      total.inj += t.inj;
      total.coker += t.coker;
      total.nonzero_coker += t.nonzero_coker;
      total.bad.insert(total.bad.end(), t.bad.begin(), t.bad.end());
    }
    std::sort(total.bad.begin(), total.bad.end());
    for (auto* c : {&well, &inj, &coker}) c->cases += total.cases;
    well.passed += total.well;
    inj.passed += total.inj;
    coker.passed += total.coker;
    for (const auto& [pair, what] : total.bad) {
      CheckCount& c = what.rfind("well", 0) == 0 ? well : what.rfind("inj", 0) == 0 ? inj : coker;
      if (c.counterexamples.size() < 5) c.counterexamples.push_back(ptag(p, m) + ": " + what);
    }
    res.notes.push_back(ptag(p, m) + ": " + std::to_string(n) + " windows of rank <= " + std::to_string(rank) + ", " +
                        std::to_string(total.cases) + " ordered pairs, " + std::to_string(total.nonzero_coker) +
                        " with nonzero cokernel");
  }
  return res;
}

// ------------------------------------------------------------------ deform-win

HomMatrix hom_add(const Frame& f, const HomMatrix& a, const HomMatrix& b) {
  HomMatrix c;
  c.g = mat_add(f.carrier(), a.g, b.g);
  c.witnesses = a.witnesses;
  for (size_t i = 0; i < c.witnesses.size(); ++i)
    for (size_t j = 0; j < c.witnesses[i].size(); ++j) c.witnesses[i][j] = f.witness_add(a.witnesses[i][j], b.witnesses[i][j]);
  return c;
}

/// All elements of the group generated by s (compared on g).
std::vector<HomMatrix> hom_group(const Window& v, const Window& w, const HomSpace& s, i64 budget) {
  const Frame& f = *v.frame;
  HomMatrix zero;
  zero.g = mat_zero(f.carrier(), static_cast<size_t>(w.rank()), static_cast<size_t>(v.rank()));
  zero.witnesses.assign(static_cast<size_t>(w.t), std::vector<Elem>(static_cast<size_t>(v.d), f.normalize_witness(Vec(f.witness_width(), 0))));
  std::vector<HomMatrix> out{zero};
  std::set<EMat> seen{zero.g};
  for (size_t head = 0; head < out.size(); ++head)
    for (const auto& g : s.generators) {
      HomMatrix h = hom_add(f, out[head], g);
      if (seen.insert(h.g).second) {
        if (static_cast<i64>(out.size()) >= budget) throw BudgetExceeded("deform-win: hom group exceeds budget");
        out.push_back(std::move(h));
      }
    }
  return out;
}

VerifyResult verify_deform_win(const VerifyParams& vp) {
  VerifyResult res{"deform-win", {}, {}};
  const int rank = static_cast<int>(grid_value(vp, "rank", 2));
  auto& frame_ok = res.check("frame hom D -> Z/p^m valid");
  auto& nil = res.check("kernel sigma_1-nilpotent");
  auto& bij = res.check("base change bijective on classes");
  auto& lifts = res.check("homs lift uniquely");
  for (i64 p : primes_or(vp, {2})) {
    const int m = vp.precision > 0 ? vp.precision : 2;
    PDPresentation pr;
    pr.p = p;
    pr.m = m;
    pr.vars = {"e"};
    pr.generators = {{1}};
    pr.cap = 2;
    PDPtr d = PDAlgebra::build(pr);
    FramePtr src = pd_frame(d), tgt = lift_frame(p, m);
    FrameHom h = augmentation_hom(src, tgt);
    const std::string tag = ptag(p, m);
    auto cert = validate_frame_hom(h);
    frame_ok.record(cert.ok, [&] { return tag + ": " + (cert.failures.empty() ? "" : cert.failures[0]); });
    std::vector<Elem> kernel_gens;
    for (int n = 1; n < d->cap(); ++n) kernel_gens.push_back(d->generator_power(0, n));
    auto nr = sigma1_nilpotence_index(*src, kernel_gens);
    nil.record(nr.nilpotent, [&] { return tag + ": " + nr.note; });
    res.notes.push_back(tag + ": sigma_1 nilpotence index " + std::to_string(nr.index) + " on the kernel");
    auto section = [&](const Elem& a) { return d->from_int(a[0]); };
    for (int r = 0; r <= rank; ++r) {
      ClassTable ts = classify_windows(src, r, vp.budgets.max_enumeration);
      ClassTable tt = classify_windows(tgt, r, vp.budgets.max_enumeration);
      std::vector<int> preimages(tt.classes.size(), 0);
      std::vector<Window> sw;
      for (const auto& c : ts.classes) {
        sw.push_back(window_from_psi(src, c.d, c.t, c.psi));
        ++preimages[static_cast<size_t>(class_index(tt, base_change(h, sw.back())))];
      }
      for (size_t i = 0; i < preimages.size(); ++i)
        bij.record(preimages[i] == 1, [&] {
          return tag + " rank " + std::to_string(r) + ": target class " + std::to_string(i) + " has " +
                 std::to_string(preimages[i]) + " preimages";
        });
      res.notes.push_back(tag + " rank " + std::to_string(r) + ": " + std::to_string(ts.classes.size()) + " source classes, " +
                          std::to_string(tt.classes.size()) + " target classes");
      for (const auto& v : sw)
        for (const auto& w : sw) {
          Window v2 = base_change(h, v), w2 = base_change(h, w);
          for (const auto& g : hom_group(v2, w2, hom_space(v2, w2, HomMode::Window), vp.budgets.max_enumeration)) {
            bool ok = false;
            std::string why;
            try {
              auto lifted = lift_hom(h, v, w, g, section);
              ok = lifted.unique;
              if (!ok) why = "not unique";
            } catch (const AlgebraError& e) {
              why = e.what();
            }
            lifts.record(ok, [&] { return tag + " rank " + std::to_string(r) + ": " + why; });
          }
        }
    }
  }
  return res;
}

// ------------------------------------------------------------------ integrability

struct EnvelopeRun {
  i64 p;
  int m, k, cap, windows;
};

Elem random_entry(const PDAlgebra& d, std::mt19937_64& rng) {
  Elem e = d.zero();
  const int terms = static_cast<int>(rng() % 3);
  for (int t = 0; t < terms; ++t)
    e = d.add(e, d.scale(static_cast<i64>(rng() % static_cast<std::uint64_t>(d.coefficients().modulus())),
                         d.basis_element(rng() % d.width())));
  return e;
}

void perturb(const PDAlgebra& lower, Connection& c, std::mt19937_64& rng) {
  auto& m = c.n[rng() % c.n.size()];
  auto& e = m[rng() % m.size()][rng() % m.size()];
  e = lower.add(e, lower.basis_element(rng() % lower.width()));
}

VerifyResult verify_integrability(const VerifyParams& vp) {
  VerifyResult res{"integrability", {}, {}};
  const i64 scale = grid_value(vp, "windows", 60);
  const i64 need = grid_value(vp, "min_solutions", 50);
  auto& horiz = res.check("solutions horizontal");
  auto& integ = res.check("curvature G = 0");
  auto& qnil = res.check("quasi-nilpotent");
  auto& round = res.check("nabla -> epsilon -> nabla identity");
  auto& round2 = res.check("epsilon -> nabla -> epsilon identity");
  auto& iso = res.check("epsilon iso iff nabla horizontal");
  auto& enough = res.check("enough solved windows");
  std::vector<EnvelopeRun> runs = {{2, 3, 1, 4, 1}, {3, 2, 1, 3, 1}, {2, 2, 2, 3, 0}};
  std::vector<i64> primes = primes_or(vp, {2, 3});
  i64 solved = 0;
  std::mt19937_64 rng(static_cast<std::uint64_t>(grid_value(vp, "seed", 7)));
  for (const auto& run : runs) {
    if (std::find(primes.begin(), primes.end(), run.p) == primes.end()) continue;
    const int m = vp.precision > 0 ? vp.precision : run.m;
    check_cap(vp, run.cap);
    PDPtr d = regular_envelope(run.p, m, run.k, run.cap);
    FramePtr f = pd_frame(d), sq = square_zero_frame(d);
    const std::string tag = d->describe();
    const i64 count = run.windows ? scale : std::max<i64>(1, scale / 2);
    i64 local = 0;
    for (i64 tried = 0; tried < count;) {
      const int r = 1 + static_cast<int>(rng() % 2), dd = static_cast<int>(rng() % static_cast<std::uint64_t>(r + 1));
      EMat psi(static_cast<size_t>(r), std::vector<Elem>(static_cast<size_t>(r)));
      for (auto& row : psi)
        for (auto& e : row) e = random_entry(*d, rng);
      if (!mat_inverse(*d, psi)) continue;
      ++tried;
      Window w = window_from_psi(f, dd, r - dd, psi);
      const std::string wtag = tag + " d=" + std::to_string(dd) + " Psi=" + mat_to_string(*d, psi);
      Connection cand = zero_connection(w);
      for (auto& mm : cand.n)
        for (auto& row : mm)
          for (auto& e : row)
            if (rng() % 2) e = d->lower().basis_element(rng() % d->lower().width());
      std::vector<Connection> probes = {zero_connection(w), cand};
      ConnectionSolution sol = solve_connection(w);
      if (sol.solvable) {
        ++local;
        const Connection& c = sol.particular;
        horiz.record(horizontality_check(w, c).ok, [&] { return wtag; });
        auto ig = integrability_and_qnilpotence(w, c);
        integ.record(ig.integrable, [&] { return wtag + ": " + ig.note; });
        qnil.record(ig.quasi_nilpotent, [&] { return wtag + ": " + ig.note; });
        Stratification st = connection_to_stratification(sq, w, c);
        Connection back = stratification_to_connection(w, st);
        round.record(connection_equal(back, c), [&] { return wtag; });
        Stratification st2 = connection_to_stratification(sq, w, back);
        round2.record(st2.epsilon.g == st.epsilon.g, [&] { return wtag; });
        Connection bent = c;
        perturb(d->lower(), bent, rng);
        probes.push_back(bent);
        probes.push_back(c);
      }
      for (const auto& c : probes) {
        const bool h = horizontality_check(w, c).ok;
        const bool e = connection_to_stratification(sq, w, c).window_iso;
        iso.record(h == e, [&] { return wtag + ": horizontal=" + std::to_string(h) + " iso=" + std::to_string(e); });
      }
    }
    solved += local;
    res.notes.push_back(tag + ": " + std::to_string(local) + " of " + std::to_string(count) + " windows solved");
  }
  enough.record(solved >= need, [&] { return std::to_string(solved) + " solutions, need " + std::to_string(need); });
  return res;
}

// ------------------------------------------------------------------ gamma-vp

VerifyResult verify_gamma_vp(const VerifyParams& vp) {
  VerifyResult res{"gamma-vp", {}, {}};
  const int nmax = static_cast<int>(grid_value(vp, "n", 3));
  const int c = static_cast<int>(grid_value(vp, "cap", 4));
  const i64 samples = grid_value(vp, "samples", 12);
  auto& vpow = res.check("v(a)^p = p^(p-1) v(a^p)");
  auto& divisible = res.check("ghost components divisible");
  auto& gamma = res.check("gamma_p(v(a)) = (p^(p-1)/p!) v(a^p)");
  std::mt19937_64 rng(11);
  for (i64 p : primes_or(vp, {2, 3})) {
    const int m = vp.precision > 0 ? vp.precision : 8;
    if (m < nmax + 1) throw std::invalid_argument("gamma-vp: precision must exceed n");
    const i64 q1 = ipow(p, m - 1);
    AlgebraPtr b = MonomialAlgebra::create(CoeffField::residue(p, m), {VariableSpec{"x", 0, c}});
    AlgebraPtr b1 = MonomialAlgebra::create(CoeffField::residue(p, m - 1), {VariableSpec{"x", 0, c}});
    const CoefficientRing ring(p, m), ring1(p, m - 1);
    const i64 k = p_power_over_factorial(static_cast<int>(p - 1), p, ring);
    i64 fact = 1;  // p! = p (p-1)!
    for (i64 i = 2; i < p; ++i) fact *= i;
    const i64 unit_inv = ring1.inverse(ring1.reduce(fact));
    for (int n = 1; n <= nmax; ++n) {
      WittRing w(b, n);
      const std::string tag = ptag(p, m) + " n=" + std::to_string(n);
      for (i64 s = 0; s < samples; ++s) {
        Vec a = b->zero();
        for (auto& x : a) x = static_cast<i64>(rng() % static_cast<std::uint64_t>(ring.modulus()));
        std::vector<Vec> va(static_cast<size_t>(n - 1), b->zero()), vap = va;
        if (n > 1) {
          va[0] = a;
          vap[0] = b->pow(a, p);
        }
        const Elem v = w.verschiebung(va);
        Elem l = w.one();
        for (i64 i = 0; i < p; ++i) l = w.mul(l, v);
        const Elem expect_pow = w.mul(w.from_int(ipow(p, static_cast<int>(p - 1))), w.verschiebung(vap));
        vpow.record(l == expect_pow, [&] { return tag + " a=" + b->to_string(a); });
        const Elem expect = w.mul(w.from_int(k), w.verschiebung(vap));
        const auto ghosts = w.ghost(l);
        const auto comps = w.components(expect);
        std::vector<Vec> y;
        bool div_ok = true, eq_ok = true;
        for (int i = 0; i < n && div_ok; ++i) {
          Vec h = b1->zero();
          for (size_t j = 0; j < h.size(); ++j) {
            const i64 g = ghosts[static_cast<size_t>(i)][j];
            if (g % p != 0) div_ok = false;
            h[j] = ring1.mul(ring1.reduce(g / p), unit_inv);
          }
          for (int j = 0; j < i; ++j)
            h = b1->sub(h, b1->scale(ipow(p, j), b1->pow(y[static_cast<size_t>(j)], ipow(p, i - j))));
          const i64 pi = ipow(p, i);
          Vec yi = b1->zero();
          for (size_t j = 0; j < h.size(); ++j) {
            if (h[j] % pi != 0) div_ok = false;
            yi[j] = h[j] / pi;
          }
          const i64 valid = q1 / pi;
          for (size_t j = 0; j < yi.size(); ++j)
            if ((yi[j] - comps[static_cast<size_t>(i)][j]) % valid != 0) eq_ok = false;
          y.push_back(yi);
        }
        divisible.record(div_ok, [&] { return tag + " a=" + b->to_string(a); });
        gamma.record(div_ok && eq_ok, [&] { return tag + " a=" + b->to_string(a); });
      }
    }
    res.notes.push_back(ptag(p, m) + ": component i certified modulo p^" + std::to_string(m - 1) + "-i, n <= " +
                        std::to_string(nmax));
  }
  return res;
}

}  // namespace

VerifyResult run_verify(const std::string& tag, const VerifyParams& params) {
  if (params.threads < 1) throw std::invalid_argument("threads must be positive");
  if (tag == "sigma1-formula") return verify_sigma1_formula(params);
  if (tag == "win-phi-mod") return verify_win_phi_mod(params);
  if (tag == "deform-win") return verify_deform_win(params);
  if (tag == "integrability") return verify_integrability(params);
  if (tag == "pd-axioms") return verify_pd_axioms(params);
  if (tag == "gamma-vp") return verify_gamma_vp(params);
  if (tag == "f-nilpotent-sequence") return verify_fnil_sequence(params);
  throw std::invalid_argument("unknown verify tag: " + tag);
}

}  // namespace crystaframe
