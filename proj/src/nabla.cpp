#include "crystaframe/nabla.hpp"

#include <sstream>

namespace crystaframe {

// ------------------------------------------------------------------ D + Omega

SquareZeroRing::SquareZeroRing(PDPtr d)
    : d_(std::move(d)), n_(d_->width()), nl_(d_->lower().width()), k_(d_->presentation().vars.size()) {}

Elem SquareZeroRing::make(const Elem& a, const std::vector<Elem>& omega) const {
  Elem x = a;
  for (const auto& w : omega) x.insert(x.end(), w.begin(), w.end());
  return x;
}

Elem SquareZeroRing::part(const Elem& x) const { return Elem(x.begin(), x.begin() + static_cast<long>(n_)); }

Elem SquareZeroRing::differential(const Elem& x, size_t i) const {
  auto b = x.begin() + static_cast<long>(n_ + i * nl_);
  return Elem(b, b + static_cast<long>(nl_));
}

std::vector<Elem> SquareZeroRing::differentials(const Elem& x) const {
  std::vector<Elem> out;
  for (size_t i = 0; i < k_; ++i) out.push_back(differential(x, i));
  return out;
}

std::string SquareZeroRing::describe() const { return d_->describe() + " + Omega"; }

Elem SquareZeroRing::one() const { return make(d_->one(), std::vector<Elem>(k_, lower().zero())); }

Elem SquareZeroRing::from_int(i64 n) const { return make(d_->from_int(n), std::vector<Elem>(k_, lower().zero())); }

Elem SquareZeroRing::add(const Elem& a, const Elem& b) const {
  std::vector<Elem> w;
  for (size_t i = 0; i < k_; ++i) w.push_back(lower().add(differential(a, i), differential(b, i)));
  return make(d_->add(part(a), part(b)), w);
}

Elem SquareZeroRing::neg(const Elem& a) const {
  std::vector<Elem> w;
  for (size_t i = 0; i < k_; ++i) w.push_back(lower().neg(differential(a, i)));
  return make(d_->neg(part(a)), w);
}

Elem SquareZeroRing::mul(const Elem& a, const Elem& b) const {
  const PDAlgebra& lo = lower();
  Elem pa = d_->project_lower(part(a)), pb = d_->project_lower(part(b));
  std::vector<Elem> w;
  for (size_t i = 0; i < k_; ++i) w.push_back(lo.add(lo.mul(pa, differential(b, i)), lo.mul(pb, differential(a, i))));
  return make(d_->mul(part(a), part(b)), w);
}

bool SquareZeroRing::is_unit(const Elem& a) const { return d_->is_unit(part(a)); }

Elem SquareZeroRing::inverse(const Elem& a) const {
  const PDAlgebra& lo = lower();
  Elem inv = d_->inverse(part(a));
  Elem pi = d_->project_lower(inv);
  Elem s = lo.neg(lo.mul(pi, pi));
  std::vector<Elem> w;
  for (size_t i = 0; i < k_; ++i) w.push_back(lo.mul(s, differential(a, i)));
  return make(inv, w);
}

std::optional<i64> SquareZeroRing::cardinality() const {
  auto c = d_->cardinality();
  auto cl = lower().cardinality();
  if (!c || !cl) return std::nullopt;
  i64 total = *c;
  for (size_t i = 0; i < k_; ++i) {
    if (total > (i64{1} << 50) / *cl) return std::nullopt;
    total *= *cl;
  }
  return total;
}

Elem SquareZeroRing::element(i64 idx) const {
  const i64 c = *d_->cardinality(), cl = *lower().cardinality();
  Elem a = d_->element(idx % c);
  idx /= c;
  std::vector<Elem> w;
  for (size_t i = 0; i < k_; ++i) {
    w.push_back(lower().element(idx % cl));
    idx /= cl;
  }
  return make(a, w);
}

i64 SquareZeroRing::index_of(const Elem& a) const {
  const i64 c = *d_->cardinality(), cl = *lower().cardinality();
  i64 idx = 0;
  for (size_t i = k_; i-- > 0;) idx = idx * cl + lower().index_of(differential(a, i));
  return idx * c + d_->index_of(part(a));
}

Elem SquareZeroRing::normalize(const Vec& coords) const {
  std::vector<Elem> w;
  for (size_t i = 0; i < k_; ++i) w.push_back(lower().normalize(differential(coords, i)));
  return make(d_->normalize(part(coords)), w);
}

std::vector<Vec> SquareZeroRing::relation_rows() const {
  std::vector<Vec> out;
  for (const auto& r : d_->relation_rows()) {
    Vec v(width(), 0);
    std::copy(r.begin(), r.end(), v.begin());
    out.push_back(std::move(v));
  }
  for (size_t i = 0; i < k_; ++i)
    for (const auto& r : lower().relation_rows()) {
      Vec v(width(), 0);
      std::copy(r.begin(), r.end(), v.begin() + static_cast<long>(n_ + i * nl_));
      out.push_back(std::move(v));
    }
  return out;
}

Elem SquareZeroRing::mod_p(const Elem& a) const {
  std::vector<Elem> w;
  for (size_t i = 0; i < k_; ++i) w.push_back(lower().mod_p(differential(a, i)));
  return make(d_->mod_p(part(a)), w);
}

std::string SquareZeroRing::to_string(const Elem& a) const {
  std::ostringstream os;
  os << "(" << d_->to_string(part(a));
  for (size_t i = 0; i < k_; ++i) {
    Elem w = differential(a, i);
    if (!is_zero(w)) os << " + (" << lower().to_string(w) << ") d" << d_->presentation().vars[i];
  }
  os << ")";
  return os.str();
}

}  // namespace crystaframe

// ------------------------------------------------------------------ D(1)_2

namespace crystaframe {

namespace {

class SquareZeroFrame : public Frame {
 public:
  explicit SquareZeroFrame(PDPtr d) : d_(d), pd_(pd_frame(d)), ring_(d), k_(ring_.variables()) {
    for (size_t i = 0; i < k_; ++i) c_.push_back(d_->dsigma1_dx(i));
  }

  FrameKind kind() const override { return FrameKind::SquareZero; }
  std::string describe() const override { return "square-zero frame D(1)_2 over " + d_->describe(); }
  const Ring& carrier() const override { return ring_; }
  const Ring& target() const override { return ring_; }

  size_t witness_width() const override { return pd_->witness_width() + k_ * lower().width(); }
  bool linear() const override { return true; }
  Elem normalize_witness(const Vec& w) const override {
    Elem out = pd_->normalize_witness(head(w));
    for (const auto& x : tail(w)) {
      Elem y = lower().normalize(x);
      out.insert(out.end(), y.begin(), y.end());
    }
    return out;
  }
  Elem witness_add(const Elem& u, const Elem& w) const override {
    Elem out = pd_->witness_add(head(u), head(w));
    auto a = tail(u), b = tail(w);
    for (size_t i = 0; i < k_; ++i) {
      Elem y = lower().add(a[i], b[i]);
      out.insert(out.end(), y.begin(), y.end());
    }
    return out;
  }
  std::optional<i64> witness_count() const override {
    auto c = pd_->witness_count();
    auto cl = lower().cardinality();
    if (!c || !cl) return std::nullopt;
    i64 total = *c;
    for (size_t i = 0; i < k_; ++i) {
      if (total > (i64{1} << 50) / *cl) return std::nullopt;
      total *= *cl;
    }
    return total;
  }
  Elem witness_element(i64 idx) const override {
    const i64 c = *pd_->witness_count(), cl = *lower().cardinality();
    Elem out = pd_->witness_element(idx % c);
    idx /= c;
    for (size_t i = 0; i < k_; ++i) {
      Elem y = lower().element(idx % cl);
      idx /= cl;
      out.insert(out.end(), y.begin(), y.end());
    }
    return out;
  }

  Elem reduce(const Elem& a) const override { return a; }
  Elem lift_target(const Elem& a) const override { return a; }
  Elem sigma(const Elem& a) const override {
    std::vector<Elem> w = dsigma1(ring_.differentials(a));
    for (auto& x : w) x = lower().times_int(d_->p(), x);
    return ring_.make(d_->sigma(ring_.part(a)), w);
  }
  Elem sigma_target(const Elem& a) const override { return sigma(a); }
  Elem iota(const Elem& w) const override { return ring_.make(pd_->iota(head(w)), tail(w)); }
  Elem sigma1(const Elem& w) const override { return ring_.make(pd_->sigma1(head(w)), dsigma1(tail(w))); }
  Elem witness_scale(const Elem& w, const Elem& x) const override {
    const PDAlgebra& lo = lower();
    Elem a = ring_.part(x);
    Elem ws = pd_->witness_scale(head(w), a);
    Elem pa = d_->project_lower(a), pi = d_->project_lower(pd_->iota(head(w)));
    auto om = tail(w);
    for (size_t i = 0; i < k_; ++i) {
      Elem y = lo.add(lo.mul(pa, om[i]), lo.mul(pi, ring_.differential(x, i)));
      ws.insert(ws.end(), y.begin(), y.end());
    }
    return ws;
  }
  std::optional<Elem> witness(const Elem& x) const override {
    auto w = pd_->witness(ring_.part(x));
    if (!w) return std::nullopt;
    Elem out = *w;
    for (size_t i = 0; i < k_; ++i) {
      Elem y = ring_.differential(x, i);
      out.insert(out.end(), y.begin(), y.end());
    }
    return out;
  }
  Elem residue_key(const Elem& x) const override { return pd_->residue_key(ring_.part(x)); }

  /// (dsigma)_1(sum_i f_i dx_i) = sum_i sigma(f_i) (dsigma)_1(dx_i).
  std::vector<Elem> dsigma1(const std::vector<Elem>& omega) const {
    const PDAlgebra& lo = lower();
    std::vector<Elem> out(k_, lo.zero());
    for (size_t i = 0; i < k_; ++i) {
      if (is_zero(omega[i])) continue;
      Elem s = lo.sigma(omega[i]);
      for (size_t j = 0; j < k_; ++j) out[j] = lo.add(out[j], lo.mul(s, c_[i][j]));
    }
    return out;
  }

 private:
  const PDAlgebra& lower() const { return d_->lower(); }
  Elem head(const Elem& w) const { return Elem(w.begin(), w.begin() + static_cast<long>(pd_->witness_width())); }
  std::vector<Elem> tail(const Elem& w) const {
    std::vector<Elem> out;
    const size_t nl = lower().width();
    auto b = w.begin() + static_cast<long>(pd_->witness_width());
    for (size_t i = 0; i < k_; ++i) out.emplace_back(b + static_cast<long>(i * nl), b + static_cast<long>((i + 1) * nl));
    return out;
  }

  PDPtr d_;
  FramePtr pd_;
  SquareZeroRing ring_;
  size_t k_;
  std::vector<std::vector<Elem>> c_;  // (dsigma)_1(dx_i) = sum_j c_[i][j] dx_j
};

const PDAlgebra& pd_algebra(const Frame& f) {
  const auto* d = dynamic_cast<const PDAlgebra*>(&f.carrier());
  if (!d || f.kind() != FrameKind::PD) throw AlgebraError("expected a window over a pd frame");
  return *d;
}

std::vector<Elem> differentials_of(const PDAlgebra& d, const Elem& a) {
  std::vector<Elem> out;
  for (size_t i = 0; i < d.presentation().vars.size(); ++i) out.push_back(d.partial(a, i));
  return out;
}

}  // namespace

FramePtr square_zero_frame(PDPtr d) {
  if (d->cap() < 2) throw AlgebraError("square_zero_frame: cap must be at least 2");
  return std::make_shared<SquareZeroFrame>(std::move(d));
}

FrameHom square_zero_p0(FramePtr pd, FramePtr sq) {
  const PDAlgebra& d = pd_algebra(*pd);
  const auto& ring = dynamic_cast<const SquareZeroRing&>(sq->carrier());
  FrameHom h;
  h.source = pd;
  h.target = sq;
  h.name = "p0";
  h.alpha = [&d, &ring](const Elem& a) { return ring.make(a, differentials_of(d, a)); };
  h.alpha_minus = h.alpha;
  h.alpha_witness = [&d, pd](const Elem& w) {
    Elem out = w;
    for (const auto& x : differentials_of(d, pd->iota(w))) out.insert(out.end(), x.begin(), x.end());
    return out;
  };
  return h;
}

FrameHom square_zero_p1(FramePtr pd, FramePtr sq) {
  const auto& ring = dynamic_cast<const SquareZeroRing&>(sq->carrier());
  const size_t k = ring.variables();
  FrameHom h;
  h.source = pd;
  h.target = sq;
  h.name = "p1";
  h.alpha = [&ring, k](const Elem& a) { return ring.make(a, std::vector<Elem>(k, ring.lower().zero())); };
  h.alpha_minus = h.alpha;
  h.alpha_witness = [&ring, k](const Elem& w) {
    Elem out = w;
    for (size_t i = 0; i < k; ++i) {
      Elem z = ring.lower().zero();
      out.insert(out.end(), z.begin(), z.end());
    }
    return out;
  };
  return h;
}

}  // namespace crystaframe

// ------------------------------------------------------------------ connections

namespace crystaframe {

namespace {

struct Context {
  const PDAlgebra& d;
  const PDAlgebra& lo;
  size_t k, r, dd;
  EMat psi_l;        // Psi over D_{r-1}
  EMat psip_l;       // Psi P over D_{r-1}
  std::vector<EMat> dpsi, dpsip;  // d_i Psi, d_i (Psi P)
  std::vector<std::vector<Elem>> c;  // (dsigma)_1(dx_j) = sum_i c[j][i] dx_i
  std::vector<Elem> ideal_gens;

  explicit Context(const Window& w)
      : d(pd_algebra(*w.frame)), lo(d.lower()), k(d.presentation().vars.size()), r(static_cast<size_t>(w.rank())),
        dd(static_cast<size_t>(w.d)) {
    EMat psip = w.psi;
    for (size_t i = 0; i < r; ++i)
      for (size_t j = 0; j < dd; ++j) psip[i][j] = d.times_int(d.p(), psip[i][j]);
    auto proj = [&](const Elem& a) { return d.project_lower(a); };
    psi_l = mat_map(w.psi, proj);
    psip_l = mat_map(psip, proj);
    for (size_t i = 0; i < k; ++i) {
      auto part = [&, i](const Elem& a) { return d.partial(a, i); };
      dpsi.push_back(mat_map(w.psi, part));
      dpsip.push_back(mat_map(psip, part));
      c.push_back(d.dsigma1_dx(i));
    }
    ideal_gens.push_back(d.from_int(d.p()));
    for (size_t j = 0; j < d.presentation().generators.size(); ++j)
      for (int n = 1; n <= d.cap(); ++n) {
        Elem g = d.generator_power(j, n);
        if (!is_zero(g)) ideal_gens.push_back(std::move(g));
      }
  }

  EMat sigma_l(const EMat& m) const {
    return mat_map(m, [&](const Elem& a) { return lo.sigma(a); });
  }
  /// sum_j sigma(N_j) c[j][i]
  EMat twisted(const Connection& cn, size_t i) const {
    EMat acc = mat_zero(lo, r, r);
    for (size_t j = 0; j < k; ++j) {
      if (is_zero(c[j][i])) continue;
      EMat s = sigma_l(cn.n[j]);
      acc = mat_add(lo, acc, mat_map(s, [&](const Elem& a) { return lo.mul(a, c[j][i]); }));
    }
    return acc;
  }
};

struct Defect {
  std::string label;
  Elem value;  // over D_{r-1}
};

std::vector<Defect> defects(const Context& cx, const Connection& cn) {
  const PDAlgebra& lo = cx.lo;
  const PDAlgebra& d = cx.d;
  std::vector<Defect> out;
  for (size_t i = 0; i < cx.k; ++i) {
    const EMat tw = mat_mul(lo, cx.psip_l, cx.twisted(cn, i));  // Psi P sum_j sigma(N_j) c_ji
    // Phi: N_i Psi P + d_i(Psi P) = p Psi P sum_j sigma(N_j) c_ji
    EMat e1 = mat_sub(lo, mat_add(lo, mat_mul(lo, cn.n[i], cx.psip_l), cx.dpsip[i]), mat_scale(lo, d.p(), tw));
    for (size_t b = 0; b < cx.r; ++b)
      for (size_t a = 0; a < cx.r; ++a)
        out.push_back({"phi d" + std::to_string(i) + " [" + std::to_string(b) + "," + std::to_string(a) + "]", e1[b][a]});
    // Phi_1 on L: N_i Psi_a + d_i Psi_a = Psi P sum_j sigma(N_j)_a c_ji
    EMat npsi = mat_add(lo, mat_mul(lo, cn.n[i], cx.psi_l), cx.dpsi[i]);
    for (size_t a = 0; a < cx.dd; ++a)
      for (size_t b = 0; b < cx.r; ++b)
        out.push_back({"phi1 L d" + std::to_string(i) + " [" + std::to_string(b) + "," + std::to_string(a) + "]",
                       lo.sub(npsi[b][a], tw[b][a])});
    // Phi_1 on g e_a, a in T, g in I (times p)
    for (size_t a = cx.dd; a < cx.r; ++a)
      for (size_t gi = 0; gi < cx.ideal_gens.size(); ++gi) {
        const Elem& g = cx.ideal_gens[gi];
        auto yz = d.ideal_witness(g);
        Elem s1 = d.sigma1(yz->first, yz->second);
        Elem s1l = d.project_lower(s1), ds1 = d.partial(s1, i);
        // sum_j sigma(g N_j,a + d_j(g) e_a) c_ji
        std::vector<Elem> inner(cx.r, lo.zero());
        for (size_t j = 0; j < cx.k; ++j) {
          if (is_zero(cx.c[j][i])) continue;
          const Elem gl = d.project_lower(g);
          for (size_t b = 0; b < cx.r; ++b) {
            Elem v = lo.mul(gl, cn.n[j][b][a]);
            if (b == a) v = lo.add(v, d.partial(g, j));
            inner[b] = lo.add(inner[b], lo.mul(lo.sigma(v), cx.c[j][i]));
          }
        }
        for (size_t b = 0; b < cx.r; ++b) {
          Elem lhs = lo.add(lo.mul(s1l, npsi[b][a]), lo.mul(cx.psi_l[b][a], ds1));
          Elem rhs = lo.zero();
          for (size_t e = 0; e < cx.r; ++e) rhs = lo.add(rhs, lo.mul(cx.psip_l[b][e], inner[e]));
          out.push_back({"phi1 T d" + std::to_string(i) + " g" + std::to_string(gi) + " [" + std::to_string(b) + "," +
                             std::to_string(a) + "]",
                         lo.times_int(d.p(), lo.sub(lhs, rhs))});
        }
      }
  }
  return out;
}

}  // namespace

Connection zero_connection(const Window& w) {
  const PDAlgebra& d = pd_algebra(*w.frame);
  const size_t r = static_cast<size_t>(w.rank());
  Connection c;
  c.n.assign(d.presentation().vars.size(), mat_zero(d.lower(), r, r));
  return c;
}

bool connection_equal(const Connection& a, const Connection& b) { return a.n == b.n; }

std::string connection_to_string(const Window& w, const Connection& c) {
  const PDAlgebra& d = pd_algebra(*w.frame);
  std::ostringstream os;
  for (size_t i = 0; i < c.n.size(); ++i) {
    if (i) os << "; ";
    os << "N_" << d.presentation().vars[i] << " = " << mat_to_string(d.lower(), c.n[i]);
  }
  return os.str();
}

std::vector<std::vector<Elem>> apply_connection(const Window& w, const Connection& c, const std::vector<Elem>& x) {
  const PDAlgebra& d = pd_algebra(*w.frame);
  const PDAlgebra& lo = d.lower();
  std::vector<std::vector<Elem>> out;
  for (size_t i = 0; i < c.n.size(); ++i) {
    std::vector<Elem> v;
    for (size_t b = 0; b < x.size(); ++b) {
      Elem s = d.partial(x[b], i);
      for (size_t a = 0; a < x.size(); ++a) s = lo.add(s, lo.mul(c.n[i][b][a], d.project_lower(x[a])));
      v.push_back(std::move(s));
    }
    out.push_back(std::move(v));
  }
  return out;
}

HorizontalityReport horizontality_check(const Window& w, const Connection& c) {
  Context cx(w);
  HorizontalityReport rep;
  for (const auto& df : defects(cx, c)) {
    ++rep.equations;
    if (is_zero(df.value)) continue;
    rep.ok = false;
    if (rep.witnesses.size() < 8) rep.witnesses.push_back(df.label + ": " + cx.lo.to_string(df.value));
  }
  return rep;
}

}  // namespace crystaframe

namespace crystaframe {

namespace {

Connection connection_from(const Context& cx, const Vec& u) {
  const size_t nl = cx.lo.width();
  Connection c;
  size_t pos = 0;
  for (size_t i = 0; i < cx.k; ++i) {
    EMat m(cx.r, std::vector<Elem>(cx.r));
    for (size_t b = 0; b < cx.r; ++b)
      for (size_t a = 0; a < cx.r; ++a, pos += nl)
        m[b][a] = cx.lo.normalize(Vec(u.begin() + static_cast<long>(pos), u.begin() + static_cast<long>(pos + nl)));
    c.n.push_back(std::move(m));
  }
  return c;
}

Vec flatten_defects(const std::vector<Defect>& ds) {
  Vec v;
  for (const auto& d : ds) v.insert(v.end(), d.value.begin(), d.value.end());
  return v;
}

Mat block_rows(const PDAlgebra& lo, size_t blocks) {
  const size_t nl = lo.width();
  Mat out;
  for (size_t b = 0; b < blocks; ++b)
    for (const auto& row : lo.relation_rows()) {
      Vec v(blocks * nl, 0);
      std::copy(row.begin(), row.end(), v.begin() + static_cast<long>(b * nl));
      out.push_back(std::move(v));
    }
  return out;
}

}  // namespace

ConnectionSolution solve_connection(const Window& w) {
  Context cx(w);
  const auto& R = cx.d.coefficients();
  const size_t nl = cx.lo.width();
  const size_t nunk = cx.k * cx.r * cx.r * nl;
  ConnectionSolution out;
  out.unknowns = static_cast<int>(nunk);
  // the defects are affine in the coordinates of the N_i
  const auto base_defects = defects(cx, connection_from(cx, Vec(nunk, 0)));
  const Vec b = flatten_defects(base_defects);
  Mat rows;
  for (size_t u = 0; u < nunk; ++u) {
    Vec e(nunk, 0);
    e[u] = 1;
    Vec row = flatten_defects(defects(cx, connection_from(cx, e)));
    for (size_t t = 0; t < row.size(); ++t) row[t] = R.sub(row[t], b[t]);
    rows.push_back(std::move(row));
  }
  Vec rhs(b.size());
  for (size_t t = 0; t < b.size(); ++t) rhs[t] = R.neg(b[t]);
  AffineSolution sol = solve_left(R, rows, b.size(), rhs, block_rows(cx.lo, base_defects.size()));
  if (!sol.solvable) return out;
  out.solvable = true;
  out.particular = connection_from(cx, sol.particular);
  const Mat unk_rel = block_rows(cx.lo, cx.k * cx.r * cx.r);
  HowellForm base(R, nunk, unk_rel);
  Mat all = unk_rel;
  for (const auto& h : sol.homogeneous) {
    Connection c = connection_from(cx, h);
    bool zero = true;
    for (const auto& m : c.n) zero = zero && mat_is_zero(m);
    if (zero) continue;
    all.push_back(h);
    out.homogeneous.push_back(std::move(c));
  }
  out.log_p_homogeneous = HowellForm(R, nunk, all).log_p_size() - base.log_p_size();
  return out;
}

IntegrabilityReport integrability_and_qnilpotence(const Window& w, const Connection& c) {
  Context cx(w);
  const PDAlgebra& lo = cx.lo;
  IntegrabilityReport rep;
  if (cx.k < 2) {
    rep.integrable = true;
    rep.note = "one variable: Lambda^2 Omega = 0";
  } else {
    // G_ij = d_i N_j - d_j N_i + N_i N_j - N_j N_i over the cap r-2 envelope
    const PDAlgebra& l2 = lo.lower();
    auto proj = [&](const EMat& m) { return mat_map(m, [&](const Elem& a) { return lo.project_lower(a); }); };
    rep.integrable = true;
    for (size_t i = 0; i < cx.k; ++i)
      for (size_t j = i + 1; j < cx.k; ++j) {
        EMat di = mat_map(c.n[j], [&](const Elem& a) { return lo.partial(a, i); });
        EMat dj = mat_map(c.n[i], [&](const Elem& a) { return lo.partial(a, j); });
        EMat ni = proj(c.n[i]), nj = proj(c.n[j]);
        EMat g = mat_add(l2, mat_sub(l2, di, dj), mat_sub(l2, mat_mul(l2, ni, nj), mat_mul(l2, nj, ni)));
        if (!mat_is_zero(g)) {
          rep.integrable = false;
          rep.note = "curvature nonzero at (" + std::to_string(i) + "," + std::to_string(j) + ")";
        }
      }
  }
  auto inv = mat_inverse(cx.d, w.psi);
  if (!inv) throw AlgebraError("integrability_and_qnilpotence: Psi is not invertible");
  const EMat inv_l = mat_map(*inv, [&](const Elem& a) { return cx.d.project_lower(a); });
  const int bound = static_cast<int>(cx.r * (lo.width() + 1));
  rep.quasi_nilpotent = true;
  for (size_t i = 0; i < cx.k; ++i) {
    EMat gauged = mat_mul(lo, inv_l, mat_add(lo, mat_mul(lo, c.n[i], cx.psi_l), cx.dpsi[i]));
    auto zero_mod_p = [&](const EMat& m) {
      for (const auto& row : m)
        for (const auto& a : row)
          if (!is_zero(lo.mod_p(a))) return false;
      return true;
    };
    EMat pw = mat_identity(lo, cx.r);
    int idx = 0;
    while (!zero_mod_p(pw) && idx <= bound) {
      pw = mat_mul(lo, pw, gauged);
      ++idx;
    }
    if (idx > bound) {
      rep.quasi_nilpotent = false;
      idx = -1;
    }
    rep.indices.push_back(idx);
  }
  return rep;
}

Stratification connection_to_stratification(FramePtr sq, const Window& w, const Connection& c) {
  const auto& ring = dynamic_cast<const SquareZeroRing&>(sq->carrier());
  const PDAlgebra& d = pd_algebra(*w.frame);
  const size_t r = static_cast<size_t>(w.rank()), dd = static_cast<size_t>(w.d);
  Stratification s{base_change(square_zero_p0(w.frame, sq), w), base_change(square_zero_p1(w.frame, sq), w), {}, false};
  s.epsilon.g.assign(r, std::vector<Elem>(r));
  s.epsilon.witnesses.assign(r - dd, std::vector<Elem>(dd));
  const FramePtr pd = w.frame;
  for (size_t b = 0; b < r; ++b)
    for (size_t a = 0; a < r; ++a) {
      std::vector<Elem> om;
      for (const auto& m : c.n) om.push_back(m[b][a]);
      s.epsilon.g[b][a] = ring.make(b == a ? d.one() : d.zero(), om);
      if (b >= dd && a < dd) {
        Elem wit = pd->normalize_witness(Vec(pd->witness_width(), 0));
        for (const auto& x : om) wit.insert(wit.end(), x.begin(), x.end());
        s.epsilon.witnesses[b - dd][a] = std::move(wit);
      }
    }
  s.window_iso = is_hom(s.source, s.target, s.epsilon, HomMode::Window);
  return s;
}

Connection stratification_to_connection(const Window& w, const Stratification& s) {
  const auto& ring = dynamic_cast<const SquareZeroRing&>(s.target.frame->carrier());
  const PDAlgebra& d = pd_algebra(*w.frame);
  const size_t r = static_cast<size_t>(w.rank());
  Connection c = zero_connection(w);
  for (size_t b = 0; b < r; ++b)
    for (size_t a = 0; a < r; ++a) {
      const Elem& e = s.epsilon.g[b][a];
      if (ring.part(e) != (b == a ? d.one() : d.zero()))
        throw AlgebraError("stratification_to_connection: epsilon does not reduce to the identity");
      for (size_t i = 0; i < c.n.size(); ++i) c.n[i][b][a] = ring.differential(e, i);
    }
  return c;
}

}  // namespace crystaframe
