#pragma once

// Windows over frames, stored through a normal decomposition (d, t, Psi).
// Psi lives over A^-; Phi = Psi diag(p 1_L, 1_T) and Phi_1 = Psi on L.

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "crystaframe/frames.hpp"

namespace crystaframe {

using EMat = std::vector<std::vector<Elem>>;  // row-major

// matrix helpers over a Ring
EMat mat_identity(const Ring& r, size_t n);
EMat mat_zero(const Ring& r, size_t rows, size_t cols);
EMat mat_mul(const Ring& r, const EMat& a, const EMat& b);
EMat mat_add(const Ring& r, const EMat& a, const EMat& b);
EMat mat_sub(const Ring& r, const EMat& a, const EMat& b);
EMat mat_scale(const Ring& r, i64 c, const EMat& a);
EMat mat_map(const EMat& a, const std::function<Elem(const Elem&)>& f);
bool mat_is_zero(const EMat& a);
/// Inverse over a local ring (unit pivots); nullopt if singular.
std::optional<EMat> mat_inverse(const Ring& r, const EMat& a);
EMat mat_from_ints(const Ring& r, const std::vector<std::vector<i64>>& a);
std::string mat_to_string(const Ring& r, const EMat& a);

struct Window {
  FramePtr frame;
  int d = 0;  // rank of L
  int t = 0;  // rank of T
  EMat psi;   // r x r over A^-
  int rank() const { return d + t; }
};

/// Throws AlgebraError unless Psi is square of size d + t and invertible.
Window window_from_psi(FramePtr frame, int d, int t, EMat psi);

/// Phi as a matrix over A^-: Phi(x) = phi_matrix * sigma(x).
EMat phi_matrix(const Window& w);
/// Phi(x) for x in M = A^r.
std::vector<Elem> phi(const Window& w, const std::vector<Elem>& x);

/// An element of M_1 = L + I T: A-coordinates on L, witnesses on T.
struct M1Element {
  std::vector<Elem> l;
  std::vector<Elem> t_witness;
};
std::vector<Elem> m1_coordinates(const Window& w, const M1Element& x);
std::vector<Elem> phi1(const Window& w, const M1Element& x);

/// p Phi_1 = Phi on M_1, Phi_1(a x) = sigma_1(a) Phi(x), invertibility.
Certificate validate_window(const Window& w, int samples = 32, unsigned long long seed = 1);

struct FVOperators {
  EMat f, v;
  bool vf_ok = false, fv_ok = false;
};
FVOperators fv_operators(const Window& w);

Window base_change(const FrameHom& h, const Window& w);

// ---------------------------------------------------------------- homs

enum class HomMode { Window, PhiModule };

/// A candidate hom g: M -> M' with witnesses for the T' x L block (window
/// mode). Entries of g live over A.
struct HomMatrix {
  EMat g;
  std::vector<std::vector<Elem>> witnesses;  // [t'][d], window mode only
};

/// reduce(g) Psi - Psi' Phi_g (window mode) or reduce(g) Psi P - Psi' P' sigma(g).
EMat hom_defect(const Window& v, const Window& w, const HomMatrix& h, HomMode mode);
bool is_hom(const Window& v, const Window& w, const HomMatrix& h, HomMode mode);

struct HomSpace {
  std::vector<HomMatrix> generators;  // generate the group (linear frames) or list it (brute force)
  int log_p_size = 0;                 // log_p of the group order
  bool exhaustive = false;
};

HomSpace hom_space(const Window& v, const Window& w, HomMode mode, i64 budget = 1'000'000);
/// Membership of a matrix over A in the group generated by the given homs
/// (compared on g only).
bool hom_group_contains(const Window& v, const Window& w, const HomSpace& s, const EMat& g);

/// Windows over a residue lift frame Z/p^m as raw integer data (rank <= 2),
/// for bulk hom computations.
struct SmallWindow {
  int d = 0, t = 0;
  std::array<i64, 4> psi{};  // row-major r x r
  int rank() const { return d + t; }
};
struct SmallHom {
  std::array<i64, 4> g{};        // row-major r' x r
  std::array<i64, 4> witness{};  // witness of g_ij in the T' x L block (g_ij = p * witness)
};
struct SmallHomGroup {
  std::vector<SmallHom> generators;
  int log_p_size = 0;       // on g
  int log_p_data_size = 0;  // on (g, witnesses); equal to log_p_size iff g determines the witnesses
};
SmallWindow small_window(const Window& w);
SmallHomGroup residue_hom_group(const CoefficientRing& ring, const SmallWindow& v, const SmallWindow& w, HomMode mode);
bool residue_is_hom(const CoefficientRing& ring, const SmallWindow& v, const SmallWindow& w, const SmallHom& h, HomMode mode);

struct FNilpotence {
  bool nilpotent = false;
  int index = 0;
  int bound = 0;
};
FNilpotence f_nilpotence(const Window& w, int bound = 0);

// ---------------------------------------------------------------- normal decomposition

struct NormalDecomposition {
  int d = 0, t = 0;
  EMat basis;       // columns: basis of L, then basis of T (over A = Z/p^m)
  EMat idempotent;  // projection onto L along T
  int iterations = 0;
};
/// M = (Z/p^m)^r, M_1 spanned by the given columns; requires p M in M_1.
NormalDecomposition normal_decomposition(const Frame& f, int r, const std::vector<std::vector<i64>>& m1_gens);
/// e <- 3e^2 - 2e^3 on a single residue, until fixed.
std::pair<i64, int> lift_idempotent(const CoefficientRing& ring, i64 seed);

// ---------------------------------------------------------------- deformation

/// Any lift of Psi along alpha^- (entrywise preimage).
Window lift_window(const FrameHom& h, const Window& target_window,
                   const std::function<Elem(const Elem&)>& section_minus);

struct LiftedHom {
  HomMatrix hom;
  int iterations = 0;
  bool unique = false;
};
/// Lift a window hom alpha^*v -> alpha^*w to v -> w by successive
/// approximation; `section` lifts carrier elements along alpha. Uniqueness is
/// certified by comparing the orders of both hom groups.
LiftedHom lift_hom(const FrameHom& h, const Window& v, const Window& w, const HomMatrix& target_hom,
                   const std::function<Elem(const Elem&)>& section, int max_iterations = 64);

// ---------------------------------------------------------------- classification

struct WindowClass {
  int d = 0, t = 0;
  EMat psi;
  i64 orbit_size = 0;
};

struct ClassTable {
  std::string frame;
  int rank = 0;
  std::vector<WindowClass> classes;  // sorted by (d, canonical index)
  i64 enumerated = 0;
  std::vector<std::vector<int>> class_of_key;  // [d][mixed-radix index of Psi over A^-]
};

/// Iso classes of windows of rank r (all d), r <= 2.
ClassTable classify_windows(FramePtr frame, int r, i64 enumeration_budget = 50'000'000);
/// Index into table.classes of the class of w (same frame and rank).
int class_index(const ClassTable& table, const Window& w);

}  // namespace crystaframe
