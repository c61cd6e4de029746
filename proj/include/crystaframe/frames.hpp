#pragma once

// Frames (A, I, R, sigma, sigma_1) over the finite carriers, their
// homomorphisms and sigma_1-nilpotence.
//
// The ideal I is addressed through a witness space W with a surjection
// iota: W -> I; sigma_1 is evaluated on witnesses. A^- is the ring where sigma
// and sigma_1 land (a one-step truncation of A for Witt-type carriers).

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "crystaframe/pdenv.hpp"
#include "crystaframe/witt.hpp"

namespace crystaframe {

enum class FrameKind { Witt, Lift, PD, Quotient, SquareZero };

std::string to_string(FrameKind k);

class Frame {
 public:
  virtual ~Frame() = default;
  virtual FrameKind kind() const = 0;
  virtual std::string describe() const = 0;
  i64 p() const { return carrier().p(); }

  virtual const Ring& carrier() const = 0;  // A
  virtual const Ring& target() const = 0;   // A^-

  // witness space
  virtual size_t witness_width() const = 0;
  virtual Elem witness_add(const Elem& u, const Elem& w) const = 0;
  virtual std::optional<i64> witness_count() const = 0;
  virtual Elem witness_element(i64 idx) const = 0;
  /// Witness coordinates are Z/p^m-linear (together with carrier and target).
  virtual bool linear() const { return false; }
  virtual Elem normalize_witness(const Vec& w) const { return w; }
  /// Finite generating set of W as an abelian group.
  virtual std::vector<Elem> witness_generators() const;

  virtual Elem reduce(const Elem& a) const = 0;        // A -> A^-
  virtual Elem lift_target(const Elem& a) const = 0;   // a section of reduce
  virtual Elem sigma(const Elem& a) const = 0;         // A -> A^-
  virtual Elem sigma_target(const Elem& a) const = 0;  // A^- -> A^-
  virtual Elem iota(const Elem& w) const = 0;          // W -> I
  virtual Elem sigma1(const Elem& w) const = 0;        // W -> A^-
  /// A witness of a * iota(w).
  virtual Elem witness_scale(const Elem& w, const Elem& a) const = 0;
  /// Some witness of a, or nullopt if a is not in I.
  virtual std::optional<Elem> witness(const Elem& a) const = 0;
  bool in_ideal(const Elem& a) const { return witness(a).has_value(); }
  /// All witnesses of a (finite witness spaces only).
  std::vector<Elem> witness_candidates(const Elem& a) const;
  /// Canonical key of the class of a in R = A/I.
  virtual Elem residue_key(const Elem& a) const = 0;
  /// a in p A^-.
  virtual bool target_divisible_by_p(const Elem& a) const;
  /// Key of a in A^-/p A^- (used for nilpotence tests).
  virtual Elem target_mod_p(const Elem& a) const;

  /// Spanning set of A as an abelian group.
  std::vector<Elem> carrier_generators() const;

 protected:
  const std::vector<Elem>& target_p_multiples() const;

 private:
  mutable std::once_flag pmul_once_;
  mutable std::vector<Elem> pmul_;  // sorted
};

using FramePtr = std::shared_ptr<const Frame>;

/// Witt frame of a characteristic-p algebra: A = W_n(R), I = v W_{n-1}(R),
/// sigma = F, sigma_1(v x) = x.
FramePtr witt_frame(AlgebraPtr r, int n);
/// Lift frame Z/p^m with sigma = id; I = pA, sigma_1(p a) = a.
FramePtr lift_frame(i64 p, int m);
/// Lift frame W_n(k) of a finite field with sigma = F.
FramePtr witt_lift_frame(AlgebraPtr k, int n);
/// PD frame on a truncated PD envelope.
FramePtr pd_frame(PDPtr d);

struct AdmissibleSequence {
  AlgebraPtr carrier;                         // truncated perfect S
  std::vector<std::vector<Monomial>> ideals;  // generators of K_0, ..., K_{n-1}
};

/// J_i = J^{p^i}.
AdmissibleSequence minimal_sequence(AlgebraPtr s, const std::vector<Monomial>& j, int n);
/// Throws AlgebraError on admissibility or well-definedness failure.
FramePtr admissible_quotient_frame(const AdmissibleSequence& seq, int n);
/// Masks (one per component) of an admissible sequence.
std::vector<std::vector<bool>> sequence_masks(const AdmissibleSequence& seq);

// ---------------------------------------------------------------- validation

struct Certificate {
  bool ok = true;
  std::vector<std::string> failures;
  int checks = 0;
  void fail(std::string msg) {
    ok = false;
    if (failures.size() < 8) failures.push_back(std::move(msg));
  }
};

/// p sigma_1 = sigma on I, sigma = Frobenius mod p, sigma a ring map,
/// sigma_1 sigma-linear; exhaustive up to `exhaustive_limit` elements, then
/// spanning sets plus `samples` random elements.
Certificate validate_frame(const Frame& f, int samples = 64, unsigned long long seed = 1,
                           i64 exhaustive_limit = 4096);

struct FrameHom {
  FramePtr source, target;
  std::function<Elem(const Elem&)> alpha;        // A -> A'
  std::function<Elem(const Elem&)> alpha_minus;  // A^- -> A'^-
  std::function<Elem(const Elem&)> alpha_witness;  // W -> W', optional
  std::string name;
};

FrameHom identity_hom(FramePtr f);
/// W_n(S) -> A(K_*) by componentwise reduction.
FrameHom quotient_projection(FramePtr witt, FramePtr quotient);
/// D -> Z/p^m sending every variable to 0.
FrameHom augmentation_hom(FramePtr pd, FramePtr lift);

Certificate validate_frame_hom(const FrameHom& h, int samples = 64, unsigned long long seed = 1,
                               i64 exhaustive_limit = 4096);

struct NilpotenceResult {
  bool nilpotent = false;
  int index = 0;  // smallest r with sigma_1^r = 0 on N/p, when nilpotent
  int bound = 0;
  std::string note;
};

/// Iterates sigma_1 on a spanning set of N/p, N the A-module generated by gens.
NilpotenceResult sigma1_nilpotence_index(const Frame& f, const std::vector<Elem>& gens, int bound = 0);

}  // namespace crystaframe
