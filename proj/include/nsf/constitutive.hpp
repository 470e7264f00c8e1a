#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "nsf/sym_tensor.hpp"

namespace nsf {

/// A positive, bounded scalar function of temperature with declared bounds.
///
/// Used both for the viscosity profile nu(theta) and the conductivity kappa(theta).
/// Built-in shapes:
///   - constant:  f(theta) = value
///   - rational:  f(theta) = lo + (hi - lo) * theta / (1 + theta)
/// A custom callable may be supplied; its output is checked against [lo, hi] on
/// every evaluation.
class BoundedProfile {
 public:
  enum class Kind { Constant, Rational, Custom };

  static BoundedProfile constant(double value);
  static BoundedProfile rational(double lo, double hi);
  static BoundedProfile custom(std::function<double(double)> fn, double lo, double hi,
                               std::string name = "custom");

  Kind kind() const { return kind_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  const std::string& name() const { return name_; }

  /// Throws std::invalid_argument for theta <= 0 or non-finite theta.
  double operator()(double theta) const;
  /// d f / d theta; analytic for built-ins, central difference for custom.
  double derivative(double theta) const;

 private:
  BoundedProfile() = default;

  Kind kind_ = Kind::Constant;
  double lo_ = 1.0;
  double hi_ = 1.0;
  std::function<double(double)> fn_;
  std::string name_;
};

/// Power-law viscous stress S*(theta, D) = nu(theta) (eps_d^2 + |D|^2)^{(p-2)/2} D.
class StressLaw {
 public:
  StressLaw(double p, BoundedProfile viscosity, double eps_d = 0.0);

  double p() const { return p_; }
  double eps_d() const { return eps_d_; }
  const BoundedProfile& viscosity() const { return viscosity_; }

  /// Scalar factor multiplying D, given theta and |D|. Zero when |D| = 0.
  double effective_viscosity(double theta, double d_norm) const;

  /// Constants of the structural bounds this law satisfies by construction:
  ///   S:D >= coercivity_constant |D|^p - coercivity_offset
  ///   |S| <= growth_constant (1 + |D|)^{p-1}
  double coercivity_constant() const;
  double coercivity_offset() const;
  double growth_constant() const;

 private:
  double p_;
  BoundedProfile viscosity_;
  double eps_d_;
};

/// Heat conductivity kappa(theta) with lo <= kappa <= hi for all theta > 0.
class ConductivityLaw {
 public:
  explicit ConductivityLaw(BoundedProfile profile);

  static ConductivityLaw constant(double kappa0) {
    return ConductivityLaw(BoundedProfile::constant(kappa0));
  }
  static ConductivityLaw rational(double lo, double hi) {
    return ConductivityLaw(BoundedProfile::rational(lo, hi));
  }

  const BoundedProfile& profile() const { return profile_; }
  double lo() const { return profile_.lo(); }
  double hi() const { return profile_.hi(); }
  double operator()(double theta) const { return profile_(theta); }
  double derivative(double theta) const { return profile_.derivative(theta); }

 private:
  BoundedProfile profile_;
};

SymTensor stress(const StressLaw& law, double theta, const SymTensor& d);
double stress_power(const StressLaw& law, double theta, const SymTensor& d);
double conductivity(const ConductivityLaw& law, double theta);

// ---------------------------------------------------------------------------
// Sampling verifiers for the structural assumptions on the stress.

/// Any stress map, possibly not a StressLaw (used to inject broken laws).
struct StressModel {
  std::string name;
  std::function<SymTensor(double, const SymTensor&)> eval;
  double p = 2.0;
  double scale = 1.0;  // magnitude of nu, sets tolerances
};

StressModel as_model(const StressLaw& law);
/// S = -D. Violates monotonicity and coercivity on every nonzero sample.
StressModel negated_identity_model();

struct SamplingOptions {
  int sample_count = 10000;
  double theta_lo = 0.1;
  double theta_hi = 10.0;
  double d_scale = 5.0;
  std::uint64_t seed = 12345;
};

struct ViolationReport {
  int samples = 0;
  int violations = 0;
  /// Most negative (S1-S2):(D1-D2) divided by (|D1|+|D2|)^p.
  double worst_normalized = 0.0;
  bool passed() const { return violations == 0; }
};

/// Samples (theta, D1, D2) and counts (S1-S2):(D1-D2) < -1e-12 scale (|D1|+|D2|)^p.
ViolationReport check_monotonicity(const StressModel& model, const SamplingOptions& opts);

struct EnvelopeReport {
  int samples = 0;
  double nu_lower = 0.0;           // inferred coercivity constant
  double coercivity_offset = 0.0;  // inferred additive constant in the coercivity bound
  double growth_constant = 0.0;    // inferred constant in the growth bound
  bool passed = false;             // a finite envelope with nu_lower > 0 fits
};

/// Infers (nu_lower, nu_upper) such that S:D >= nu_lower |D|^p - offset and
/// |S| <= growth (1+|D|)^{p-1} on every sample. Fails if nu_lower <= 0.
EnvelopeReport check_coercivity_growth(const StressModel& model, const SamplingOptions& opts);

/// Largest sampled |S(theta+h, D) - S(theta, D)| / h for a small relative h.
double theta_continuity_modulus(const StressModel& model, const SamplingOptions& opts);

}  // namespace nsf
