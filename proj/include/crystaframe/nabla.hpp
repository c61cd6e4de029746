#pragma once

// Connections on windows over PD frames, and the square-zero frame
// D(1)_2 = D + Omega_D through which they become stratifications.
//
// Omega_D is free on dx_1..dx_k. Since d lowers the divided degree, the
// coefficients of differentials (and of the matrices N_i) live in the
// envelope of cap r-1.

#include <string>
#include <vector>

#include "crystaframe/windows.hpp"

namespace crystaframe {

/// D + Omega_D with (a, w)(a', w') = (aa', a w' + a' w). Elements are
/// [a | w_1 | ... | w_k].
class SquareZeroRing : public Ring {
 public:
  explicit SquareZeroRing(PDPtr d);

  const PDAlgebra& base() const { return *d_; }
  const PDAlgebra& lower() const { return d_->lower(); }
  size_t variables() const { return k_; }
  Elem make(const Elem& a, const std::vector<Elem>& omega) const;
  Elem part(const Elem& x) const;                    // a
  Elem differential(const Elem& x, size_t i) const;  // coefficient of dx_i
  std::vector<Elem> differentials(const Elem& x) const;

  std::string describe() const override;
  i64 p() const override { return d_->p(); }
  size_t width() const override { return n_ + k_ * nl_; }
  Elem one() const override;
  Elem from_int(i64 n) const override;
  Elem add(const Elem& a, const Elem& b) const override;
  Elem neg(const Elem& a) const override;
  Elem mul(const Elem& a, const Elem& b) const override;
  bool is_unit(const Elem& a) const override;
  Elem inverse(const Elem& a) const override;
  std::optional<i64> cardinality() const override;
  Elem element(i64 idx) const override;
  i64 index_of(const Elem& a) const override;
  const CoefficientRing* scalars() const override { return &d_->coefficients(); }
  Elem normalize(const Vec& coords) const override;
  std::vector<Vec> relation_rows() const override;
  Elem mod_p(const Elem& a) const override;
  std::string to_string(const Elem& a) const override;

 private:
  PDPtr d_;
  size_t n_, nl_, k_;
};

/// The frame D(1)_2: ideal I + K, sigma(a, w) = (sigma a, p (dsigma)_1 w),
/// sigma_1 on K equal to (dsigma)_1.
FramePtr square_zero_frame(PDPtr d);
/// p0(a) = (a, da) and p1(a) = (a, 0), from pd_frame(d) to square_zero_frame(d).
FrameHom square_zero_p0(FramePtr pd, FramePtr sq);
FrameHom square_zero_p1(FramePtr pd, FramePtr sq);

/// nabla(e_a) = sum_i sum_b e_b (N_i)_{ba} dx_i, extended by Leibniz.
struct Connection {
  std::vector<EMat> n;  // one r x r matrix per variable, over D at cap r-1
};

Connection zero_connection(const Window& w);
bool connection_equal(const Connection& a, const Connection& b);
std::string connection_to_string(const Window& w, const Connection& c);

/// Coefficients of nabla(x) on dx_1..dx_k, x in M = D^r.
std::vector<std::vector<Elem>> apply_connection(const Window& w, const Connection& c, const std::vector<Elem>& x);

struct HorizontalityReport {
  bool ok = true;
  std::vector<std::string> witnesses;  // failing equations
  int equations = 0;
};

/// nabla Phi = (Phi x dsigma) nabla on the basis, nabla Phi_1 = (Phi x
/// (dsigma)_1) nabla on M_1 generators. The latter on I T is compared after
/// multiplying by p, since sigma_1 on I certifies one digit less.
HorizontalityReport horizontality_check(const Window& w, const Connection& c);

struct ConnectionSolution {
  bool solvable = false;
  Connection particular;
  std::vector<Connection> homogeneous;
  int log_p_homogeneous = 0;  // log_p of the number of solutions
  int unknowns = 0;
};
ConnectionSolution solve_connection(const Window& w);

struct IntegrabilityReport {
  bool integrable = false;
  bool quasi_nilpotent = false;
  std::vector<int> indices;  // nilpotence index of each gauged N_i mod p
  std::string note;
};

/// G = nabla o nabla = 0 and, in the basis Psi e_a, each
/// N'_i = Psi^{-1}(N_i Psi + d_i Psi) nilpotent modulo p.
IntegrabilityReport integrability_and_qnilpotence(const Window& w, const Connection& c);

struct Stratification {
  Window source;  // p0^* w
  Window target;  // p1^* w
  HomMatrix epsilon;
  bool window_iso = false;
};

/// epsilon'(x) = x + nabla(x) as a matrix over D(1)_2, checked against the
/// window hom equation.
Stratification connection_to_stratification(FramePtr sq, const Window& w, const Connection& c);
/// Reads nabla off the K-component; throws AlgebraError unless epsilon
/// reduces to the identity over D.
Connection stratification_to_connection(const Window& w, const Stratification& s);

}  // namespace crystaframe
