#include "crystaframe/frames.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <sstream>

namespace crystaframe {

std::string to_string(FrameKind k) {
  switch (k) {
    case FrameKind::Witt: return "witt";
    case FrameKind::Lift: return "lift";
    case FrameKind::PD: return "pd";
    case FrameKind::Quotient: return "quotient";
    case FrameKind::SquareZero: return "square-zero";
  }
  return "?";
}

namespace {
constexpr i64 kEnumerationLimit = i64{1} << 16;

std::vector<Elem> all_elements(const Ring& r, const char* what) {
  auto card = r.cardinality();
  if (!card || *card > kEnumerationLimit) throw BudgetExceeded(std::string(what) + ": carrier too large to enumerate");
  std::vector<Elem> out;
  out.reserve(static_cast<size_t>(*card));
  for (i64 i = 0; i < *card; ++i) out.push_back(r.element(i));
  return out;
}

Vec unit_vector(size_t n, size_t i) {
  Vec v(n, 0);
  v[i] = 1;
  return v;
}
}  // namespace

// ------------------------------------------------------------------ Frame

std::vector<Elem> Frame::witness_generators() const {
  std::vector<Elem> out;
  if (linear()) {
    for (size_t i = 0; i < witness_width(); ++i) {
      Elem w = normalize_witness(unit_vector(witness_width(), i));
      if (!is_zero(w)) out.push_back(std::move(w));
    }
    return out;
  }
  auto n = witness_count();
  if (!n || *n > kEnumerationLimit) throw BudgetExceeded("witness space too large to enumerate");
  for (i64 i = 0; i < *n; ++i) out.push_back(witness_element(i));
  return out;
}

std::vector<Elem> Frame::carrier_generators() const {
  if (carrier().is_linear()) {
    std::vector<Elem> out;
    for (auto& e : carrier().coordinate_basis())
      if (!is_zero(e)) out.push_back(e);
    return out;
  }
  return all_elements(carrier(), "carrier_generators");
}

std::vector<Elem> Frame::witness_candidates(const Elem& a) const {
  auto n = witness_count();
  if (!n || *n > kEnumerationLimit) throw BudgetExceeded("witness_candidates: witness space too large");
  std::vector<Elem> out;
  for (i64 i = 0; i < *n; ++i) {
    Elem w = witness_element(i);
    if (iota(w) == a) out.push_back(std::move(w));
  }
  return out;
}

const std::vector<Elem>& Frame::target_p_multiples() const {
  std::call_once(pmul_once_, [this] {
    std::set<Elem> s;
    const Ring& t = target();
    for (const auto& x : all_elements(t, "p-multiples")) s.insert(t.times_int(t.p(), x));
    pmul_.assign(s.begin(), s.end());
  });
  return pmul_;
}

bool Frame::target_divisible_by_p(const Elem& a) const {
  if (target().is_linear()) return is_zero(target().mod_p(a));
  const auto& pm = target_p_multiples();
  return std::binary_search(pm.begin(), pm.end(), a);
}

Elem Frame::target_mod_p(const Elem& a) const {
  if (target().is_linear()) return target().mod_p(a);
  Elem best;
  for (const auto& q : target_p_multiples()) {
    Elem c = target().sub(a, q);
    if (best.empty() || c < best) best = std::move(c);
  }
  return best;
}

// ------------------------------------------------------------------ Witt frame

namespace {

class WittFrame : public Frame {
 public:
  WittFrame(AlgebraPtr r, int n) : a_(r, n), lower_(r, n - 1) {}

  FrameKind kind() const override { return FrameKind::Witt; }
  std::string describe() const override { return "witt frame W_" + std::to_string(a_.length()) + "(" + a_.base().describe() + ")"; }
  const Ring& carrier() const override { return a_; }
  const Ring& target() const override { return lower_; }

  size_t witness_width() const override { return lower_.width(); }
  Elem witness_add(const Elem& u, const Elem& w) const override { return lower_.add(u, w); }
  std::optional<i64> witness_count() const override { return lower_.cardinality(); }
  Elem witness_element(i64 idx) const override { return lower_.element(idx); }

  Elem reduce(const Elem& a) const override { return lower_.from_components(a_.truncate(a, a_.length() - 1)); }
  Elem lift_target(const Elem& a) const override {
    auto c = lower_.components(a);
    c.push_back(a_.base().zero());
    return a_.from_components(c);
  }
  Elem sigma(const Elem& a) const override { return reduce(a_.frobenius(a)); }
  Elem sigma_target(const Elem& a) const override { return lower_.frobenius(a); }
  Elem iota(const Elem& w) const override { return a_.verschiebung(lower_.components(w)); }
  Elem sigma1(const Elem& w) const override { return w; }
  Elem witness_scale(const Elem& w, const Elem& a) const override { return lower_.mul(w, sigma(a)); }
  std::optional<Elem> witness(const Elem& a) const override {
    auto c = a_.components(a);
    if (!a_.base().is_zero(c[0])) return std::nullopt;
    c.erase(c.begin());
    return lower_.from_components(c);
  }
  Elem residue_key(const Elem& a) const override { return a_.component(a, 0); }
  bool target_divisible_by_p(const Elem& a) const override {
    // p W_{n-1}(R) = { (0, b_0^p, ..., b_{n-3}^p) }
    auto c = lower_.components(a);
    if (!a_.base().is_zero(c[0])) return false;
    for (size_t i = 1; i < c.size(); ++i)
      if (!frobenius_image().count(c[i])) return false;
    return true;
  }

 private:
  const std::set<Vec>& frobenius_image() const {
    std::call_once(img_once_, [this] {
      AlgebraRing r(a_.base_ptr());
      for (const auto& x : all_elements(r, "frobenius image")) img_.insert(a_.base().frobenius(x));
    });
    return img_;
  }

  WittRing a_, lower_;
  mutable std::once_flag img_once_;
  mutable std::set<Vec> img_;
};

// ------------------------------------------------------------------ lift frames

class ResidueLiftFrame : public Frame {
 public:
  ResidueLiftFrame(i64 p, int m) : a_(p, m) {}

  FrameKind kind() const override { return FrameKind::Lift; }
  std::string describe() const override { return "lift frame " + a_.describe(); }
  const Ring& carrier() const override { return a_; }
  const Ring& target() const override { return a_; }

  size_t witness_width() const override { return 1; }
  Elem witness_add(const Elem& u, const Elem& w) const override { return a_.add(u, w); }
  std::optional<i64> witness_count() const override { return a_.cardinality(); }
  Elem witness_element(i64 idx) const override { return a_.element(idx); }
  bool linear() const override { return true; }

  Elem reduce(const Elem& a) const override { return a; }
  Elem lift_target(const Elem& a) const override { return a; }
  Elem sigma(const Elem& a) const override { return a; }
  Elem sigma_target(const Elem& a) const override { return a; }
  Elem iota(const Elem& w) const override { return a_.times_int(a_.p(), w); }
  Elem sigma1(const Elem& w) const override { return w; }
  Elem witness_scale(const Elem& w, const Elem& a) const override { return a_.mul(w, a); }
  std::optional<Elem> witness(const Elem& a) const override {
    if (a[0] % a_.p() != 0) return std::nullopt;
    return Elem{a[0] / a_.p()};
  }
  Elem residue_key(const Elem& a) const override { return a_.mod_p(a); }

 private:
  ResidueRing a_;
};

class WittLiftFrame : public Frame {
 public:
  WittLiftFrame(AlgebraPtr k, int n) : a_(k, n) {
    if (k->rank() != 1 || k->field().m() != 1) throw AlgebraError("witt_lift_frame: base must be a finite field");
  }

  FrameKind kind() const override { return FrameKind::Lift; }
  std::string describe() const override { return "lift frame W_" + std::to_string(a_.length()) + "(" + a_.base().describe() + ")"; }
  const Ring& carrier() const override { return a_; }
  const Ring& target() const override { return a_; }

  size_t witness_width() const override { return a_.width(); }
  Elem witness_add(const Elem& u, const Elem& w) const override { return a_.add(u, w); }
  std::optional<i64> witness_count() const override { return a_.cardinality(); }
  Elem witness_element(i64 idx) const override { return a_.element(idx); }

  Elem reduce(const Elem& a) const override { return a; }
  Elem lift_target(const Elem& a) const override { return a; }
  Elem sigma(const Elem& a) const override { return a_.frobenius(a); }
  Elem sigma_target(const Elem& a) const override { return a_.frobenius(a); }
  Elem iota(const Elem& w) const override { return a_.times_int(a_.p(), w); }
  Elem sigma1(const Elem& w) const override { return a_.frobenius(w); }
  Elem witness_scale(const Elem& w, const Elem& a) const override { return a_.mul(w, a); }
  std::optional<Elem> witness(const Elem& a) const override {
    // p (w_0, w_1, ...) = (0, w_0^p, w_1^p, ...)
    const CoeffField& k = a_.base().field();
    auto c = a_.components(a);
    if (c[0][0] != 0) return std::nullopt;
    std::vector<Vec> w;
    for (size_t i = 1; i < c.size(); ++i) w.push_back(Vec{k.pow(c[i][0], k.size() / k.p())});
    w.push_back(Vec{0});
    return a_.from_components(w);
  }
  Elem residue_key(const Elem& a) const override { return a_.component(a, 0); }

 private:
  WittRing a_;
};

}  // namespace

FramePtr witt_frame(AlgebraPtr r, int n) {
  if (n < 2) throw AlgebraError("witt_frame: length must be >= 2");
  if (r->field().m() != 1) throw AlgebraError("witt_frame: base must have characteristic p");
  return std::make_shared<WittFrame>(std::move(r), n);
}

FramePtr lift_frame(i64 p, int m) {
  if (m < 1) throw AlgebraError("lift_frame: precision must be >= 1");
  return std::make_shared<ResidueLiftFrame>(p, m);
}

FramePtr witt_lift_frame(AlgebraPtr k, int n) {
  if (n < 1) throw AlgebraError("witt_lift_frame: length must be >= 1");
  return std::make_shared<WittLiftFrame>(std::move(k), n);
}

// ------------------------------------------------------------------ PD frame

namespace {

class PDFrame : public Frame {
 public:
  explicit PDFrame(PDPtr d) : d_(std::move(d)), n_(d_->width()), radix_(n_, d_->coefficients().modulus()) {
    const auto& rel = d_->relations();
    for (size_t k = 0; k < rel.rows().size(); ++k) radix_[rel.pivots()[k]] = rel.rows()[k][rel.pivots()[k]];
  }

  const PDAlgebra& algebra() const { return *d_; }

  FrameKind kind() const override { return FrameKind::PD; }
  std::string describe() const override { return "pd frame " + d_->describe(); }
  const Ring& carrier() const override { return *d_; }
  const Ring& target() const override { return *d_; }

  size_t witness_width() const override { return 2 * n_; }
  bool linear() const override { return true; }
  Elem normalize_witness(const Vec& w) const override {
    Vec y(w.begin(), w.begin() + static_cast<long>(n_)), z(w.begin() + static_cast<long>(n_), w.end());
    for (size_t i = 0; i < n_; ++i)
      if (!d_->positive(i)) z[i] = 0;
    y = d_->normalize(y);
    z = d_->normalize(z);
    Elem out = y;
    out.insert(out.end(), z.begin(), z.end());
    return out;
  }
  Elem witness_add(const Elem& u, const Elem& w) const override {
    const auto& R = d_->coefficients();
    Vec s(u.size());
    for (size_t i = 0; i < s.size(); ++i) s[i] = R.add(u[i], w[i]);
    return normalize_witness(s);
  }
  std::optional<i64> witness_count() const override {
    auto c = d_->cardinality();
    if (!c) return std::nullopt;
    i64 total = *c;
    for (size_t i = 0; i < n_; ++i) {
      if (!d_->positive(i)) continue;
      if (total > (i64{1} << 40) / radix_[i]) return std::nullopt;
      total *= radix_[i];
    }
    return total;
  }
  Elem witness_element(i64 idx) const override {
    const i64 c = *d_->cardinality();
    Elem y = d_->element(idx % c);
    idx /= c;
    Vec z(n_, 0);
    for (size_t i = 0; i < n_; ++i) {
      if (!d_->positive(i)) continue;
      z[i] = idx % radix_[i];
      idx /= radix_[i];
    }
    y.insert(y.end(), z.begin(), z.end());
    return y;
  }

  Elem reduce(const Elem& a) const override { return a; }
  Elem lift_target(const Elem& a) const override { return a; }
  Elem sigma(const Elem& a) const override { return d_->sigma(a); }
  Elem sigma_target(const Elem& a) const override { return d_->sigma(a); }
  Elem iota(const Elem& w) const override {
    const auto& R = d_->coefficients();
    Vec a(n_);
    for (size_t i = 0; i < n_; ++i) a[i] = R.add(R.mul(d_->p(), w[i]), w[n_ + i]);
    return d_->normalize(a);
  }
  Elem sigma1(const Elem& w) const override {
    Elem y(w.begin(), w.begin() + static_cast<long>(n_));
    Vec z(w.begin() + static_cast<long>(n_), w.end());
    return d_->sigma1(y, z);
  }
  Elem witness_scale(const Elem& w, const Elem& a) const override {
    Elem y(w.begin(), w.begin() + static_cast<long>(n_));
    Vec z(w.begin() + static_cast<long>(n_), w.end());
    Elem out = d_->mul(y, a);
    Vec za = d_->raw_mul(z, a);
    out.insert(out.end(), za.begin(), za.end());
    return normalize_witness(out);
  }
  std::optional<Elem> witness(const Elem& a) const override {
    auto yz = d_->ideal_witness(a);
    if (!yz) return std::nullopt;
    Elem out = yz->first;
    out.insert(out.end(), yz->second.begin(), yz->second.end());
    return normalize_witness(out);
  }
  Elem residue_key(const Elem& a) const override {
    Elem k(n_, 0);
    for (size_t i = 0; i < n_; ++i)
      if (!d_->positive(i)) k[i] = a[i] % d_->p();
    return k;
  }

 private:
  PDPtr d_;
  size_t n_;
  std::vector<i64> radix_;
};

// ------------------------------------------------------------------ quotient frame

class QuotientFrame : public Frame {
 public:
  QuotientFrame(AlgebraPtr s, int n, std::vector<std::vector<bool>> masks)
      : a_(s, n, masks), lower_(s, n - 1, std::vector<std::vector<bool>>(masks.begin(), masks.end() - 1)) {
    elements_ = all_elements(a_, "admissible_quotient_frame");
    std::set<Elem> pm;
    for (const auto& w : elements_) {
      Elem pw = iota(w);
      witness_of_.emplace(pw, w);
      pm.insert(pw);
    }
    pmul_.assign(pm.begin(), pm.end());
  }

  const WittRing& witt() const { return a_; }
  const std::vector<Elem>& elements() const { return elements_; }

  FrameKind kind() const override { return FrameKind::Quotient; }
  std::string describe() const override { return "quotient frame A(K_*) over W_" + std::to_string(a_.length()) + "(" + a_.base().describe() + ")"; }
  const Ring& carrier() const override { return a_; }
  const Ring& target() const override { return lower_; }

  size_t witness_width() const override { return a_.width(); }
  Elem witness_add(const Elem& u, const Elem& w) const override { return a_.add(u, w); }
  std::optional<i64> witness_count() const override { return a_.cardinality(); }
  Elem witness_element(i64 idx) const override { return a_.element(idx); }

  Elem reduce(const Elem& a) const override { return lower_.from_components(a_.truncate(a, a_.length() - 1)); }
  Elem lift_target(const Elem& a) const override {
    auto c = lower_.components(a);
    c.push_back(a_.base().zero());
    return a_.from_components(c);
  }
  Elem sigma(const Elem& a) const override { return reduce(a_.frobenius(a)); }
  Elem sigma_target(const Elem& a) const override { return lower_.frobenius(a); }
  Elem iota(const Elem& w) const override { return a_.times_int(a_.p(), w); }
  Elem sigma1(const Elem& w) const override { return sigma(w); }
  Elem witness_scale(const Elem& w, const Elem& a) const override { return a_.mul(w, a); }
  std::optional<Elem> witness(const Elem& a) const override {
    auto it = witness_of_.find(a);
    if (it == witness_of_.end()) return std::nullopt;
    return it->second;
  }
  Elem residue_key(const Elem& a) const override {
    Elem best;
    for (const auto& q : pmul_) {
      Elem c = a_.sub(a, q);
      if (best.empty() || c < best) best = std::move(c);
    }
    return best;
  }

 private:
  WittRing a_, lower_;
  std::vector<Elem> elements_;
  std::map<Elem, Elem> witness_of_;
  std::vector<Elem> pmul_;
};

Monomial add_monomials(const Monomial& a, const Monomial& b) {
  Monomial c(a.size());
  for (size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
  return c;
}

}  // namespace

FramePtr pd_frame(PDPtr d) {
  if (auto defect = d->well_definedness_defect()) throw AlgebraError("pd_frame: " + *defect);
  return std::make_shared<PDFrame>(std::move(d));
}

std::vector<std::vector<bool>> sequence_masks(const AdmissibleSequence& seq) {
  std::vector<std::vector<bool>> masks;
  for (const auto& gens : seq.ideals) masks.push_back(seq.carrier->ideal_mask(gens));
  return masks;
}

AdmissibleSequence minimal_sequence(AlgebraPtr s, const std::vector<Monomial>& j, int n) {
  AdmissibleSequence seq{s, {}};
  std::set<Monomial> cur(j.begin(), j.end());
  int exponent = 1;
  const int p = static_cast<int>(s->field().p());
  for (int i = 0; i < n; ++i) {
    while (exponent < static_cast<int>(ipow(p, i))) {
      std::set<Monomial> next;
      for (const auto& a : cur)
        for (const auto& b : j) {
          Monomial c = add_monomials(a, b);
          if (s->admissible(c)) next.insert(c);
        }
      cur = std::move(next);
      ++exponent;
    }
    seq.ideals.emplace_back(cur.begin(), cur.end());
  }
  return seq;
}

FramePtr admissible_quotient_frame(const AdmissibleSequence& seq, int n) {
  const MonomialAlgebra& s = *seq.carrier;
  if (n < 2) throw AlgebraError("admissible_quotient_frame: length must be >= 2");
  if (static_cast<int>(seq.ideals.size()) != n) throw AlgebraError("admissible_quotient_frame: sequence length does not match n");
  if (s.field().m() != 1) throw AlgebraError("admissible_quotient_frame: carrier must have characteristic p");
  auto masks = sequence_masks(seq);
  if (masks[0][0]) throw AlgebraError("admissible_quotient_frame: K_0 is the unit ideal, the quotient is the zero ring");
  const int p = static_cast<int>(s.field().p());
  for (int i = 0; i + 1 < n; ++i) {
    const auto& ki = masks[static_cast<size_t>(i)];
    const auto& kn = masks[static_cast<size_t>(i + 1)];
    for (size_t k = 0; k < s.rank(); ++k)
      if (kn[k] && !ki[k]) throw AlgebraError("admissible_quotient_frame: K_" + std::to_string(i + 1) + " is not contained in K_" + std::to_string(i));
    std::vector<size_t> mem;
    for (size_t k = 0; k < s.rank(); ++k)
      if (ki[k]) mem.push_back(k);
    std::set<size_t> prod(mem.begin(), mem.end());
    for (int e = 1; e < p; ++e) {
      std::set<size_t> next;
      for (size_t a : prod)
        for (size_t b : mem) {
          Monomial c = add_monomials(s.basis()[a], s.basis()[b]);
          if (auto idx = s.index_of(c)) next.insert(*idx);
        }
      prod = std::move(next);
    }
    for (size_t k : prod)
      if (!kn[k])
        throw AlgebraError("admissible_quotient_frame: K_" + std::to_string(i) + "^p is not contained in K_" + std::to_string(i + 1) +
                           " (monomial " + s.to_string(s.monomial(s.basis()[k])) + ")");
  }
  auto f = std::make_shared<QuotientFrame>(seq.carrier, n, masks);
  for (const auto& w : f->elements()) {
    if (!is_zero(f->iota(w))) continue;
    if (!is_zero(f->sigma1(w)))
      throw AlgebraError("admissible_quotient_frame: sigma_1 is not well defined: p*w = 0 but sigma(w) = " + f->target().to_string(f->sigma1(w)));
  }
  return f;
}

// ------------------------------------------------------------------ validation

namespace {

class Sampler {
 public:
  Sampler(unsigned long long seed) : rng_(seed) {}

  Elem carrier(const Ring& r) {
    if (auto c = r.cardinality()) return r.element(static_cast<i64>(rng_() % static_cast<unsigned long long>(*c)));
    const CoefficientRing* s = r.scalars();
    Vec v(r.width());
    for (auto& x : v) x = static_cast<i64>(rng_() % static_cast<unsigned long long>(s->modulus()));
    return r.normalize(v);
  }
  Elem witness(const Frame& f) {
    if (auto c = f.witness_count()) return f.witness_element(static_cast<i64>(rng_() % static_cast<unsigned long long>(*c)));
    const CoefficientRing* s = f.carrier().scalars();
    Vec v(f.witness_width());
    for (auto& x : v) x = static_cast<i64>(rng_() % static_cast<unsigned long long>(s->modulus()));
    return f.normalize_witness(v);
  }
  size_t index(size_t n) { return static_cast<size_t>(rng_() % n); }

 private:
  std::mt19937_64 rng_;
};

std::vector<Elem> carrier_sample(const Frame& f, Sampler& s, int samples, i64 limit) {
  auto card = f.carrier().cardinality();
  if (card && *card <= limit) return all_elements(f.carrier(), "validate");
  std::vector<Elem> out = f.carrier_generators();
  for (int i = 0; i < samples; ++i) out.push_back(s.carrier(f.carrier()));
  return out;
}

std::vector<Elem> witness_sample(const Frame& f, Sampler& s, int samples, i64 limit) {
  auto card = f.witness_count();
  std::vector<Elem> out;
  if (card && *card <= limit) {
    for (i64 i = 0; i < *card; ++i) out.push_back(f.witness_element(i));
    return out;
  }
  out = f.witness_generators();
  for (int i = 0; i < samples; ++i) out.push_back(s.witness(f));
  return out;
}

std::string show(const Ring& r, const Elem& a) { return r.to_string(a); }

}  // namespace

Certificate validate_frame(const Frame& f, int samples, unsigned long long seed, i64 exhaustive_limit) {
  Certificate c;
  Sampler s(seed);
  const Ring& A = f.carrier();
  const Ring& T = f.target();
  const i64 p = f.p();
  auto as = carrier_sample(f, s, samples, exhaustive_limit);
  auto ws = witness_sample(f, s, samples, exhaustive_limit);

  for (const auto& w : ws) {
    ++c.checks;
    Elem lhs = T.times_int(p, f.sigma1(w)), rhs = f.sigma(f.iota(w));
    if (lhs != rhs) c.fail("p*sigma_1 != sigma at iota(w) = " + show(A, f.iota(w)) + ": " + show(T, lhs) + " vs " + show(T, rhs));
  }
  for (const auto& a : as) {
    ++c.checks;
    Elem d = T.sub(f.sigma(a), T.pow(f.reduce(a), p));
    if (!f.target_divisible_by_p(d)) c.fail("sigma is not Frobenius mod p at " + show(A, a));
  }
  ++c.checks;
  if (f.sigma(A.one()) != T.one()) c.fail("sigma(1) != 1");
  const size_t pairs = static_cast<size_t>(std::max(samples, 1));
  for (size_t k = 0; k < pairs; ++k) {
    const Elem& a = as[s.index(as.size())];
    const Elem& b = as[s.index(as.size())];
    c.checks += 3;
    if (f.sigma(A.add(a, b)) != T.add(f.sigma(a), f.sigma(b))) c.fail("sigma not additive at " + show(A, a) + ", " + show(A, b));
    if (f.sigma(A.mul(a, b)) != T.mul(f.sigma(a), f.sigma(b))) c.fail("sigma not multiplicative at " + show(A, a) + ", " + show(A, b));
    if (f.reduce(A.mul(a, b)) != T.mul(f.reduce(a), f.reduce(b))) c.fail("reduction not multiplicative");

    const Elem& w = ws[s.index(ws.size())];
    const Elem& w2 = ws[s.index(ws.size())];
    Elem aw = f.witness_scale(w, a);
    c.checks += 4;
    if (f.iota(aw) != A.mul(a, f.iota(w))) c.fail("witness_scale inconsistent with iota");
    if (f.sigma1(aw) != T.mul(f.sigma(a), f.sigma1(w)))
      c.fail("sigma_1 not sigma-linear: a = " + show(A, a) + ", i = " + show(A, f.iota(w)));
    Elem ws2 = f.witness_add(w, w2);
    if (f.iota(ws2) != A.add(f.iota(w), f.iota(w2))) c.fail("iota not additive");
    if (f.sigma1(ws2) != T.add(f.sigma1(w), f.sigma1(w2))) c.fail("sigma_1 not additive");
  }
  return c;
}

FrameHom identity_hom(FramePtr f) {
  FrameHom h;
  h.source = f;
  h.target = f;
  h.alpha = [](const Elem& a) { return a; };
  h.alpha_minus = [](const Elem& a) { return a; };
  h.alpha_witness = [](const Elem& w) { return w; };
  h.name = "id";
  return h;
}

FrameHom quotient_projection(FramePtr witt, FramePtr quotient) {
  if (witt->kind() != FrameKind::Witt || quotient->kind() != FrameKind::Quotient)
    throw AlgebraError("quotient_projection: expects a Witt frame and a quotient frame");
  const auto* qa = dynamic_cast<const WittRing*>(&quotient->carrier());
  const auto* qt = dynamic_cast<const WittRing*>(&quotient->target());
  FrameHom h;
  h.source = witt;
  h.target = quotient;
  h.alpha = [qa](const Elem& a) { return qa->canonical(a); };
  h.alpha_minus = [qt](const Elem& a) { return qt->canonical(a); };
  h.name = "projection";
  return h;
}

FrameHom augmentation_hom(FramePtr pd, FramePtr lift) {
  if (pd->kind() != FrameKind::PD || lift->kind() != FrameKind::Lift || lift->carrier().width() != 1)
    throw AlgebraError("augmentation_hom: expects a PD frame and a residue lift frame");
  if (pd->carrier().scalars()->modulus() != lift->carrier().scalars()->modulus())
    throw AlgebraError("augmentation_hom: precision mismatch");
  FrameHom h;
  h.source = pd;
  h.target = lift;
  // index 0 is the basis element 1
  h.alpha = [](const Elem& a) { return Elem{a[0]}; };
  h.alpha_minus = h.alpha;
  h.alpha_witness = [](const Elem& w) { return Elem{w[0]}; };
  h.name = "augmentation";
  return h;
}

Certificate validate_frame_hom(const FrameHom& h, int samples, unsigned long long seed, i64 exhaustive_limit) {
  Certificate c;
  Sampler s(seed);
  const Frame& F = *h.source;
  const Frame& G = *h.target;
  const Ring& A = F.carrier();
  const Ring& B = G.carrier();
  auto as = carrier_sample(F, s, samples, exhaustive_limit);
  auto ws = witness_sample(F, s, samples, exhaustive_limit);

  ++c.checks;
  if (h.alpha(A.one()) != B.one()) c.fail("alpha(1) != 1");
  for (const auto& a : as) {
    c.checks += 2;
    if (h.alpha_minus(F.reduce(a)) != G.reduce(h.alpha(a))) c.fail("alpha does not commute with reduction at " + show(A, a));
    Elem l = h.alpha_minus(F.sigma(a)), r = G.sigma(h.alpha(a));
    if (l != r) c.fail("alpha o sigma != sigma o alpha at " + show(A, a) + ": " + show(G.target(), l) + " vs " + show(G.target(), r));
  }
  const size_t pairs = static_cast<size_t>(std::max(samples, 1));
  for (size_t k = 0; k < pairs; ++k) {
    const Elem& a = as[s.index(as.size())];
    const Elem& b = as[s.index(as.size())];
    c.checks += 2;
    if (h.alpha(A.add(a, b)) != B.add(h.alpha(a), h.alpha(b))) c.fail("alpha not additive at " + show(A, a) + ", " + show(A, b));
    if (h.alpha(A.mul(a, b)) != B.mul(h.alpha(a), h.alpha(b))) c.fail("alpha not multiplicative at " + show(A, a) + ", " + show(A, b));
  }
  for (const auto& w : ws) {
    ++c.checks;
    Elem img = h.alpha(F.iota(w));
    Elem expect = h.alpha_minus(F.sigma1(w));
    if (h.alpha_witness) {
      Elem w2 = h.alpha_witness(w);
      if (G.iota(w2) != img) {
        c.fail("witness map inconsistent at " + show(A, F.iota(w)));
        continue;
      }
      if (G.sigma1(w2) != expect) c.fail("alpha o sigma_1 != sigma_1 o alpha at " + show(A, F.iota(w)));
      continue;
    }
    if (!G.in_ideal(img)) {
      c.fail("alpha(I) not contained in I': " + show(A, F.iota(w)) + " maps to " + show(B, img));
      continue;
    }
    bool match = false;
    for (const auto& w2 : G.witness_candidates(img))
      if (G.sigma1(w2) == expect) {
        match = true;
        break;
      }
    if (!match) c.fail("alpha o sigma_1 != sigma_1 o alpha at " + show(A, F.iota(w)));
  }
  return c;
}

// ------------------------------------------------------------------ nilpotence

namespace {

// Membership in an additive subgroup of the carrier.
class Subgroup {
 public:
  Subgroup(const Ring& r, const std::vector<Elem>& gens) : r_(r) {
    if (const CoefficientRing* s = r.scalars()) {
      Mat rows = gens;
      for (auto& rr : r.relation_rows()) rows.push_back(rr);
      howell_ = std::make_unique<HowellForm>(*s, r.width(), rows);
      return;
    }
    std::set<Elem> seen{r.zero()};
    std::vector<Elem> frontier{r.zero()};
    while (!frontier.empty()) {
      std::vector<Elem> next;
      for (const auto& x : frontier)
        for (const auto& g : gens) {
          Elem y = r.add(x, g);
          if (seen.insert(y).second) next.push_back(std::move(y));
        }
      if (seen.size() > static_cast<size_t>(kEnumerationLimit)) throw BudgetExceeded("subgroup enumeration");
      frontier = std::move(next);
    }
    set_ = std::move(seen);
  }
  bool contains(const Elem& a) const { return howell_ ? howell_->contains(a) : set_.count(a) > 0; }

 private:
  const Ring& r_;
  std::unique_ptr<HowellForm> howell_;
  std::set<Elem> set_;
};

}  // namespace

NilpotenceResult sigma1_nilpotence_index(const Frame& f, const std::vector<Elem>& gens, int bound) {
  const Ring& A = f.carrier();
  NilpotenceResult res;
  if (bound <= 0) {
    int logsize = static_cast<int>(A.width());
    if (const CoefficientRing* s = A.scalars()) logsize *= s->m();
    bound = logsize + 1;
  }
  res.bound = bound;
  std::vector<Elem> span;
  for (const auto& g : gens) {
    if (!f.in_ideal(g)) throw AlgebraError("sigma1_nilpotence_index: generator " + A.to_string(g) + " is not in the ideal");
    for (const auto& b : f.carrier_generators()) {
      Elem x = A.mul(g, b);
      if (!is_zero(x)) span.push_back(std::move(x));
    }
  }
  std::sort(span.begin(), span.end());
  span.erase(std::unique(span.begin(), span.end()), span.end());
  if (span.empty()) {
    res.nilpotent = true;
    return res;
  }
  std::vector<Elem> pspan;
  for (const auto& x : span) pspan.push_back(A.times_int(f.p(), x));
  Subgroup n(A, span), pn(A, pspan);

  int index = 0;
  for (const auto& x0 : span) {
    Elem x = x0;
    int k = 0;
    while (!pn.contains(x)) {
      if (k >= bound) {
        res.note = "no vanishing after " + std::to_string(bound) + " iterations from " + A.to_string(x0);
        return res;
      }
      if (!n.contains(x)) {
        res.note = "sigma_1 leaves N at " + A.to_string(x);
        return res;
      }
      auto w = f.witness(x);
      x = f.lift_target(f.sigma1(*w));
      ++k;
    }
    index = std::max(index, k);
  }
  res.nilpotent = true;
  res.index = index;
  return res;
}

}  // namespace crystaframe
