#pragma once

#include <optional>
#include <string>
#include <vector>

#include "superloc/calculus.hpp"
#include "superloc/expr_format.hpp"
#include "superloc/parse.hpp"
#include "superloc/quadrature.hpp"
#include "superloc/super_matrix.hpp"

namespace superloc {

/// Infinitesimal rotation weight * (-u_b d/du_a + u_a d/du_b) in the plane of two
/// coordinates of the same parity.
struct RotationPlane {
  bool odd = false;
  int a = 0;
  int b = 0;
  Number weight = Number(1);
};

struct Tolerances {
  double localization = 1e-6;  // relative, direct vs localization RHS
  double constancy = 1e-5;     // relative, Z(lambda) vs Z(0)
  double identity = 1e-10;     // absolute, floating identity residuals
  double cutoff = 1e-6;        // relative, integral with and without the cutoff
};

struct Scenario {
  std::string id;
  int m = 0;
  int n = 0;
  CoordinateNames names;
  SuperVectorField q;
  Density mu;
  std::vector<RotationPlane> rotation;
  std::optional<CoordinateSubmanifold> locus;
  std::optional<SuperFunction> sigma;
  /// Phase for the stationary-phase and normal-form modes; Q sigma when absent.
  std::optional<SuperFunction> phase;
  /// Radii (r, R) of the invariant cutoff check.
  std::optional<std::pair<Rational, Rational>> cutoff;
  std::vector<double> lambda_grid = {0.0, 1.0, 10.0, 100.0};
  QuadratureConfig quadrature;
  Tolerances tol;
};

/// sum over planes of the rotation fields.
SuperVectorField rotation_generator(int m, int n, const std::vector<RotationPlane>& planes);

/// Checks Q odd, Q^2 equal to the declared rotation generator, and L_Q mu = 0.
/// Throws ParseError naming the offending key.
void validate_scenario(const Scenario& sc);

/// Projection of f onto the kernel of the rotation field (the torus average), found from
/// the minimal polynomial of the field on the cyclic subspace of f.
SuperFunction torus_average(const SuperFunction& f, const SuperVectorField& rotation, int max_dimension = 64);

/// sigma = average of sum_alpha Q(theta^alpha) theta^alpha; the override is returned after
/// re-checking Q^2 sigma = 0.
SuperFunction build_sigma(const Scenario& sc);

/// g0 = chi(s0) - sigma sum_k (-1)^k psi^k chi'(s0) s0^{-k-1} Q(s0), with Q sigma = s0 + psi
/// and chi the smooth step from 1 (s0 <= r^2) to 0 (s0 >= R^2).
SuperFunction build_invariant_cutoff(const Scenario& sc, const SuperFunction& sigma, const Rational& r,
                                     const Rational& big_r);

/// integral of mu exp(i lambda Q sigma).
Complex z_lambda(const Scenario& sc, const SuperFunction& sigma, double lambda);

/// <element, mu> as a density on N: element coefficient times f with the normal
/// coordinates set to zero, times the orientation sign and the sign of moving the
/// normal odd generators past the tangential ones.
Density contract_density(const BerLineElement& element, int orientation, const Density& mu,
                         const CoordinateSubmanifold& sub, const CoordinateNames* names = nullptr);

/// Quadrature settings for N: the ambient box restricted to tangential axes.
QuadratureConfig restrict_config(const QuadratureConfig& config, const CoordinateSubmanifold& sub);

struct StationaryPhaseTerm {
  Complex value;
  Complex prefactor;
  Complex integral_over_n;
  Complex critical_value;
  int k = 0;
  int l = 0;
  int signature = 0;
  int or01 = 1;
};

/// Leading term e^{i lambda S(N)} e^{i pi sgn/4} (2 pi/lambda)^{k/2} (-i lambda)^l
/// int_N <sqrt(Ber^{-1} H) (x) or01(H), mu>.
StationaryPhaseTerm stationary_phase_rhs(const Density& mu, const SuperFunction& s, const CoordinateSubmanifold& sub,
                                         double lambda, const QuadratureConfig& config);

struct IdentityCheck {
  std::string key;
  bool holds = false;
  double residual = 0.0;
};

struct LocalizationResult {
  Complex value;
  Complex integral_over_n;
  int l = 0;
  SuperFunction ber_l;  // Ber(L I')
  int o = 1;
  int or01 = 1;
  int signature = 0;
  std::vector<IdentityCheck> identities;
};

/// (-2 pi)^l int_N <sqrt(Ber L) (x) o, mu> together with the identity suite of the proof,
/// evaluated on S = Q sigma. With `integrate` false only the identities are computed.
LocalizationResult localization_rhs(const Scenario& sc, const SuperFunction& sigma, bool integrate = true);

/// N from the scenario, or the discovered coordinate locus of Q; throws domain_error
/// when the locus is not a nondegenerate coordinate subsupermanifold.
CoordinateSubmanifold resolve_locus(const Scenario& sc);

struct LambdaSample {
  double lambda = 0.0;
  Complex z;
  std::optional<Complex> leading;
};

struct LocalizationReport {
  std::string id;
  std::optional<Complex> direct;
  SuperFunction sigma;
  SuperFunction q_sigma;
  std::vector<LambdaSample> samples;
  std::optional<LocalizationResult> localization;
  std::optional<Complex> cutoff_integral;
  std::vector<IdentityCheck> identities;
  std::vector<std::string> errors;
  bool pass = false;
};

struct VerifyOptions {
  bool exact_only = false;  // skip every quadrature
  bool with_samples = true;
};

LocalizationReport verify_scenario(const Scenario& sc, const VerifyOptions& options = {});

}  // namespace superloc
