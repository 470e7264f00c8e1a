#include "nsf/constitutive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

namespace nsf {

namespace {

void require_positive_theta(double theta) {
  if (!std::isfinite(theta)) throw std::invalid_argument("temperature must be finite");
  if (theta <= 0.0) throw std::invalid_argument("temperature must be positive");
}

}  // namespace

BoundedProfile BoundedProfile::constant(double value) {
  if (!(value > 0.0) || !std::isfinite(value))
    throw std::invalid_argument("constant profile value must be positive and finite");
  BoundedProfile p;
  p.kind_ = Kind::Constant;
  p.lo_ = p.hi_ = value;
  p.name_ = "constant";
  return p;
}

BoundedProfile BoundedProfile::rational(double lo, double hi) {
  if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi))
    throw std::invalid_argument("rational profile needs 0 < lo <= hi < inf");
  BoundedProfile p;
  p.kind_ = Kind::Rational;
  p.lo_ = lo;
  p.hi_ = hi;
  p.name_ = "rational";
  return p;
}

BoundedProfile BoundedProfile::custom(std::function<double(double)> fn, double lo, double hi,
                                      std::string name) {
  if (!fn) throw std::invalid_argument("custom profile needs a callable");
  if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi))
    throw std::invalid_argument("custom profile needs 0 < lo <= hi < inf");
  BoundedProfile p;
  p.kind_ = Kind::Custom;
  p.lo_ = lo;
  p.hi_ = hi;
  p.fn_ = std::move(fn);
  p.name_ = std::move(name);
  return p;
}

double BoundedProfile::operator()(double theta) const {
  require_positive_theta(theta);
  switch (kind_) {
    case Kind::Constant:
      return lo_;
    case Kind::Rational:
      return lo_ + (hi_ - lo_) * (theta / (1.0 + theta));
    case Kind::Custom: {
      const double v = fn_(theta);
      if (!(v >= lo_ && v <= hi_))
        throw std::domain_error("profile '" + name_ + "' left its declared bounds at theta=" +
                                std::to_string(theta));
      return v;
    }
  }
  return lo_;
}

double BoundedProfile::derivative(double theta) const {
  require_positive_theta(theta);
  switch (kind_) {
    case Kind::Constant:
      return 0.0;
    case Kind::Rational:
      return (hi_ - lo_) / ((1.0 + theta) * (1.0 + theta));
    case Kind::Custom: {
      const double h = 1e-6 * std::max(1.0, theta);
      const double lo = std::max(theta - h, 0.5 * theta);
      return ((*this)(theta + h) - (*this)(lo)) / (theta + h - lo);
    }
  }
  return 0.0;
}

StressLaw::StressLaw(double p, BoundedProfile viscosity, double eps_d)
    : p_(p), viscosity_(std::move(viscosity)), eps_d_(eps_d) {
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("stress exponent p must be > 1");
  if (!(eps_d >= 0.0) || !std::isfinite(eps_d))
    throw std::invalid_argument("regularization eps_d must be >= 0");
}

double StressLaw::effective_viscosity(double theta, double d_norm) const {
  const double nu = viscosity_(theta);
  if (d_norm == 0.0) return 0.0;
  if (p_ == 2.0) return nu;
  const double r2 = eps_d_ * eps_d_ + d_norm * d_norm;
  return nu * std::pow(r2, 0.5 * (p_ - 2.0));
}

double StressLaw::coercivity_constant() const {
  const double lo = viscosity_.lo();
  return p_ >= 2.0 ? lo : lo * std::pow(2.0, p_ - 2.0);
}

double StressLaw::coercivity_offset() const {
  if (p_ >= 2.0) return 0.0;
  return viscosity_.lo() * std::pow(2.0, p_ - 2.0) * std::pow(eps_d_, p_);
}

double StressLaw::growth_constant() const {
  const double hi = viscosity_.hi();
  if (p_ >= 2.0) return hi * std::pow(std::max(1.0, eps_d_), p_ - 2.0);
  return hi;
}

ConductivityLaw::ConductivityLaw(BoundedProfile profile) : profile_(std::move(profile)) {}

SymTensor stress(const StressLaw& law, double theta, const SymTensor& d) {
  require_positive_theta(theta);
  if (!d.is_finite()) throw std::invalid_argument("stress: non-finite rate of strain");
  if (d.is_zero()) return {};
  return law.effective_viscosity(theta, d.norm()) * d;
}

double stress_power(const StressLaw& law, double theta, const SymTensor& d) {
  return double_dot(stress(law, theta, d), d);
}

double conductivity(const ConductivityLaw& law, double theta) { return law(theta); }

StressModel as_model(const StressLaw& law) {
  StressModel m;
  m.name = "power-law(p=" + std::to_string(law.p()) + ", nu=" + law.viscosity().name() + ")";
  m.eval = [law](double theta, const SymTensor& d) { return stress(law, theta, d); };
  m.p = law.p();
  m.scale = law.viscosity().hi();
  return m;
}

StressModel negated_identity_model() {
  StressModel m;
  m.name = "broken(S=-D)";
  m.eval = [](double, const SymTensor& d) { return -1.0 * d; };
  m.p = 2.0;
  m.scale = 1.0;
  return m;
}

namespace {

struct Sampler {
  explicit Sampler(const SamplingOptions& o)
      : rng(o.seed), theta(o.theta_lo, o.theta_hi), entry(-o.d_scale, o.d_scale) {}

  SymTensor tensor() { return {entry(rng), entry(rng), entry(rng)}; }

  std::mt19937_64 rng;
  std::uniform_real_distribution<double> theta;
  std::uniform_real_distribution<double> entry;
};

void validate(const SamplingOptions& o) {
  if (o.sample_count < 1) throw std::invalid_argument("sample_count must be >= 1");
  if (!(o.theta_lo > 0.0) || !(o.theta_hi >= o.theta_lo))
    throw std::invalid_argument("theta range must satisfy 0 < lo <= hi");
  if (!(o.d_scale > 0.0)) throw std::invalid_argument("d_scale must be positive");
}

}  // namespace

ViolationReport check_monotonicity(const StressModel& model, const SamplingOptions& opts) {
  validate(opts);
  Sampler s(opts);
  ViolationReport rep;
  for (int i = 0; i < opts.sample_count; ++i) {
    const double th = s.theta(s.rng);
    const SymTensor d1 = s.tensor();
    const SymTensor d2 = s.tensor();
    const double prod = double_dot(model.eval(th, d1) - model.eval(th, d2), d1 - d2);
    const double size = std::pow(d1.norm() + d2.norm(), model.p);
    const double tol = 1e-12 * model.scale * size;
    ++rep.samples;
    if (prod < -tol) ++rep.violations;
    if (size > 0.0) rep.worst_normalized = std::min(rep.worst_normalized, prod / size);
  }
  return rep;
}

EnvelopeReport check_coercivity_growth(const StressModel& model, const SamplingOptions& opts) {
  validate(opts);
  struct Sample {
    double d_norm, power, s_norm;
  };
  std::vector<Sample> samples;
  samples.reserve(static_cast<std::size_t>(opts.sample_count));
  Sampler s(opts);
  for (int i = 0; i < opts.sample_count; ++i) {
    const double th = s.theta(s.rng);
    // Mix of magnitudes so both the small-|D| and large-|D| regimes are probed.
    const double mag = std::pow(10.0, -3.0 + 4.0 * (i % 97) / 96.0);
    const SymTensor d = mag * s.tensor();
    const SymTensor st = model.eval(th, d);
    samples.push_back({d.norm(), double_dot(st, d), st.norm()});
  }

  EnvelopeReport rep;
  rep.samples = static_cast<int>(samples.size());
  // Coercivity constant from the large-|D| regime; small |D| is absorbed into the offset.
  double nu_lower = std::numeric_limits<double>::infinity();
  for (const auto& x : samples)
    if (x.d_norm >= 1.0) nu_lower = std::min(nu_lower, x.power / std::pow(x.d_norm, model.p));
  if (!std::isfinite(nu_lower))
    for (const auto& x : samples)
      if (x.d_norm > 0.0) nu_lower = std::min(nu_lower, x.power / std::pow(x.d_norm, model.p));
  rep.nu_lower = nu_lower;

  double offset = 0.0;
  double growth = 0.0;
  for (const auto& x : samples) {
    offset = std::max(offset, nu_lower * std::pow(x.d_norm, model.p) - x.power);
    growth = std::max(growth, x.s_norm / std::pow(1.0 + x.d_norm, model.p - 1.0));
  }
  rep.coercivity_offset = offset;
  rep.growth_constant = growth;
  rep.passed = std::isfinite(nu_lower) && nu_lower > 0.0 && std::isfinite(offset) &&
               std::isfinite(growth);
  return rep;
}

double theta_continuity_modulus(const StressModel& model, const SamplingOptions& opts) {
  validate(opts);
  Sampler s(opts);
  double worst = 0.0;
  for (int i = 0; i < opts.sample_count; ++i) {
    const double th = s.theta(s.rng);
    const SymTensor d = s.tensor();
    const double h = 1e-6 * th;
    const double diff = (model.eval(th + h, d) - model.eval(th, d)).norm() / h;
    worst = std::max(worst, diff / std::pow(1.0 + d.norm(), model.p - 1.0));
  }
  return worst;
}

}  // namespace nsf
