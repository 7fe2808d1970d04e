#pragma once

// Least-squares fitting of circuit models to impedance spectra.
//
// The fitter works in log-parameter space (every fitted quantity is
// positive), uses a central-difference Jacobian and a Levenberg-Marquardt
// damped Gauss-Newton step, and restarts from jittered initial points.
// Results are reduced by lowest residual, ties to the lowest start index.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mswres/circuits.hpp"
#include "mswres/error.hpp"
#include "mswres/extraction.hpp"
#include "mswres/spectra.hpp"

namespace mswres {

struct ParamSpec {
  std::string name;
  double initial;
  double lower;
  double upper;
  bool frozen = false;
};

struct FitOptions {
  std::uint64_t seed = 0;
  unsigned n_starts = 8;
  double gradient_tol = 1e-10;
  double step_tol = 1e-12;
  int max_iterations = 400;
  double fd_step = 1e-6;      // log-space, i.e. relative
  double jitter = 0.5;        // starts drawn from initial * [1 - jitter, 1 + jitter]
  double weight_floor = 1.0;  // ohms
};

enum class Termination { GradientTolerance, StepTolerance, MaxIterations, Diverged, NoResonance };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::GradientTolerance: return "gradient_tolerance";
    case Termination::StepTolerance: return "step_tolerance";
    case Termination::MaxIterations: return "max_iterations";
    case Termination::Diverged: return "diverged";
    case Termination::NoResonance: return "no_resonance";
  }
  return "?";
}

struct FitResult {
  CircuitModel model;
  double residual_rms;  // RMS of the weighted stacked residual vector
  double rms_ohms;      // RMS of |Z_model - Z_data|
  int iterations;
  bool converged;
  Termination termination;
  std::vector<std::pair<std::string, double>> parameters;
  std::size_t start_index = 0;
  std::vector<double> cost_history;  // accepted costs of the winning start
};

/// Stacked [Re, Im] of (Z_model - Z_data) / max(|Z_data|, floor).
inline std::vector<double> residuals(const CircuitModel& model, const ComplexSpectrum& data,
                                     double weight_floor = 1.0) {
  if (data.kind() != SpectrumKind::Impedance)
    throw DomainError("residuals expect impedance data");
  const std::size_t n = data.size();
  std::vector<double> r(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const Complex d = data[i];
    const Complex diff = z_model_at(model, data.frequency(i)) - d;
    const double w = 1.0 / std::max(std::abs(d), weight_floor);
    r[i] = diff.real() * w;
    r[n + i] = diff.imag() * w;
  }
  return r;
}

/// Residual vector on an explicit grid; throws when the grids differ.
inline std::vector<double> residuals(const CircuitModel& model, const FrequencyGrid& model_grid,
                                     const ComplexSpectrum& data, double weight_floor = 1.0) {
  if (!(model_grid == data.grid())) throw DomainError("model and data grids differ");
  return residuals(model, data, weight_floor);
}

/// All parameters free with three decades of room each way; zero-valued ones frozen.
inline std::vector<ParamSpec> default_specs(const CircuitModel& m) {
  const auto names = parameter_names(m);
  const auto values = parameter_values(m);
  std::vector<ParamSpec> specs;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double v = values[i];
    if (v > 0.0) specs.push_back({names[i], v, v * 1e-3, v * 1e3, false});
    else specs.push_back({names[i], v, v, v, true});
  }
  return specs;
}

/// Evaluates the fit objective over the free parameters in log space.
class FitProblem {
 public:
  FitProblem(CircuitModel model0, std::vector<ParamSpec> specs, const ComplexSpectrum& data,
             double weight_floor)
      : model0_(std::move(model0)), specs_(std::move(specs)), data_(data), floor_(weight_floor) {
    const auto names = parameter_names(model0_);
    if (specs_.size() != names.size())
      throw InvariantError("expected " + std::to_string(names.size()) + " parameter specs");
    if (data_.kind() != SpectrumKind::Impedance) throw DomainError("fits run on impedance data");
    base_.resize(specs_.size());
    for (std::size_t i = 0; i < specs_.size(); ++i) {
      const auto& s = specs_[i];
      if (s.name != names[i])
        throw InvariantError("parameter spec " + std::to_string(i) + " is '" + s.name +
                             "', expected '" + names[i] + "'");
      if (!(s.lower <= s.initial && s.initial <= s.upper))
        throw InvariantError("parameter '" + s.name + "' needs lower <= initial <= upper");
      base_[i] = s.initial;
      if (s.frozen) continue;
      if (!(s.lower > 0.0))
        throw InvariantError("free parameter '" + s.name + "' must have a positive lower bound");
      free_.push_back(i);
      lo_.push_back(std::log(s.lower));
      hi_.push_back(std::log(s.upper));
      theta0_.push_back(std::log(s.initial));
    }
    if (free_.empty()) throw InvariantError("fit needs at least one unfrozen parameter");
    scratch_.resize(data_.size());
  }

  std::size_t n_free() const { return free_.size(); }
  std::size_t n_residuals() const { return 2 * data_.size(); }
  const std::vector<double>& theta0() const { return theta0_; }
  const std::vector<ParamSpec>& specs() const { return specs_; }
  const ComplexSpectrum& data() const { return data_; }

  double clamp(std::size_t k, double t) const { return std::clamp(t, lo_[k], hi_[k]); }

  CircuitModel model_at(std::span<const double> theta) const {
    std::vector<double> v = base_;
    for (std::size_t k = 0; k < free_.size(); ++k) v[free_[k]] = std::exp(theta[k]);
    return with_parameter_values(model0_, v);
  }

  void residuals_into(std::span<const double> theta, Eigen::VectorXd& r) const {
    const std::size_t n = data_.size();
    r.resize(static_cast<Eigen::Index>(2 * n));
    const CircuitModel m = model_at(theta);
    z_model_into(m, data_.grid().points(), scratch_);
    for (std::size_t i = 0; i < n; ++i) {
      const Complex d = data_[i];
      const Complex diff = scratch_[i] - d;
      const double w = 1.0 / std::max(std::abs(d), floor_);
      r[static_cast<Eigen::Index>(i)] = diff.real() * w;
      r[static_cast<Eigen::Index>(n + i)] = diff.imag() * w;
    }
  }

  /// Central differences with step h in log space.
  Eigen::MatrixXd jacobian(std::span<const double> theta, double h) const {
    const auto m = static_cast<Eigen::Index>(n_residuals());
    Eigen::MatrixXd J(m, static_cast<Eigen::Index>(free_.size()));
    std::vector<double> t(theta.begin(), theta.end());
    Eigen::VectorXd rp, rm;
    for (std::size_t k = 0; k < free_.size(); ++k) {
      const double keep = t[k];
      t[k] = keep + h;
      residuals_into(t, rp);
      t[k] = keep - h;
      residuals_into(t, rm);
      t[k] = keep;
      J.col(static_cast<Eigen::Index>(k)) = (rp - rm) / (2.0 * h);
    }
    return J;
  }

 private:
  CircuitModel model0_;
  std::vector<ParamSpec> specs_;
  const ComplexSpectrum& data_;
  double floor_;
  std::vector<double> base_;
  std::vector<std::size_t> free_;
  std::vector<double> lo_, hi_, theta0_;
  mutable std::vector<Complex> scratch_;
};

namespace detail {

struct StartOutcome {
  std::vector<double> theta;
  double cost = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  Termination termination = Termination::Diverged;
  std::vector<double> history;
};

inline StartOutcome levenberg_marquardt(const FitProblem& prob, std::vector<double> theta,
                                        const FitOptions& opt) {
  StartOutcome out;
  Eigen::VectorXd r, r_new;
  prob.residuals_into(theta, r);
  double cost = 0.5 * r.squaredNorm();
  if (!std::isfinite(cost)) {
    out.theta = std::move(theta);
    return out;
  }
  out.history.push_back(cost);

  const auto p = static_cast<Eigen::Index>(prob.n_free());
  double mu = 1e-3;
  std::vector<double> trial(theta.size());
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    const Eigen::MatrixXd J = prob.jacobian(theta, opt.fd_step);
    const Eigen::VectorXd g = J.transpose() * r;
    if (g.lpNorm<Eigen::Infinity>() < opt.gradient_tol) {
      out.converged = true;
      out.termination = Termination::GradientTolerance;
      break;
    }
    const Eigen::MatrixXd A = J.transpose() * J;
    Eigen::VectorXd diag = A.diagonal().cwiseMax(1e-300);

    bool accepted = false;
    bool step_small = false;
    while (!accepted) {
      Eigen::MatrixXd M = A;
      M.diagonal() += mu * diag;
      const Eigen::VectorXd delta = M.ldlt().solve(-g);
      double step2 = 0.0, norm2 = 0.0;
      for (Eigen::Index k = 0; k < p; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        trial[ku] = prob.clamp(ku, theta[ku] + (std::isfinite(delta[k]) ? delta[k] : 0.0));
        step2 += (trial[ku] - theta[ku]) * (trial[ku] - theta[ku]);
        norm2 += theta[ku] * theta[ku];
      }
      if (std::sqrt(step2) <= opt.step_tol * (1.0 + std::sqrt(norm2))) {
        step_small = true;
        break;
      }
      prob.residuals_into(trial, r_new);
      const double c_new = 0.5 * r_new.squaredNorm();
      if (std::isfinite(c_new) && c_new < cost) {
        theta = trial;
        r.swap(r_new);
        cost = c_new;
        out.history.push_back(cost);
        mu = std::max(mu / 3.0, 1e-12);
        accepted = true;
      } else {
        mu *= 4.0;
        if (mu > 1e20) {
          step_small = true;
          break;
        }
      }
    }
    if (step_small) {
      out.converged = true;
      out.termination = Termination::StepTolerance;
      break;
    }
  }
  if (it >= opt.max_iterations) out.termination = Termination::MaxIterations;
  out.theta = std::move(theta);
  out.cost = cost;
  out.iterations = it;
  return out;
}

}  // namespace detail

/// Multi-start damped least squares over the unfrozen parameters.
inline FitResult fit(const CircuitModel& model0, const std::vector<ParamSpec>& specs,
                     const ComplexSpectrum& data, const FitOptions& opt = {}) {
  const FitProblem prob(model0, specs, data, opt.weight_floor);
  {
    Eigen::VectorXd r0;
    prob.residuals_into(prob.theta0(), r0);
    if (!std::isfinite(r0.squaredNorm()))
      throw Error("fit: residual is not finite at the initial parameters");
  }

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> jitter(std::log1p(-opt.jitter), std::log1p(opt.jitter));
  const unsigned n_starts = std::max(1u, opt.n_starts);

  std::optional<detail::StartOutcome> best;
  std::size_t best_index = 0;
  for (unsigned s = 0; s < n_starts; ++s) {
    std::vector<double> theta = prob.theta0();
    if (s > 0)
      for (std::size_t k = 0; k < theta.size(); ++k)
        theta[k] = prob.clamp(k, theta[k] + jitter(rng));
    auto outcome = detail::levenberg_marquardt(prob, std::move(theta), opt);
    if (!best || outcome.cost < best->cost) {
      best = std::move(outcome);
      best_index = s;
    }
  }

  const CircuitModel fitted = prob.model_at(best->theta);
  const auto names = parameter_names(fitted);
  const auto values = parameter_values(fitted);
  std::vector<std::pair<std::string, double>> params;
  for (std::size_t i = 0; i < names.size(); ++i) params.emplace_back(names[i], values[i]);

  double sq = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i)
    sq += std::norm(z_model_at(fitted, data.frequency(i)) - data[i]);
  const double rms_ohms = std::sqrt(sq / static_cast<double>(data.size()));
  const bool finite = std::isfinite(best->cost);
  return FitResult{fitted,
                   finite ? std::sqrt(2.0 * best->cost / static_cast<double>(prob.n_residuals()))
                          : std::numeric_limits<double>::infinity(),
                   rms_ohms,
                   best->iterations,
                   finite && best->converged,
                   finite ? best->termination : Termination::Diverged,
                   std::move(params),
                   best_index,
                   std::move(best->history)};
}

// ---------------------------------------------------------------------------
// Two-stage protocol: baseline transducer on zero-bias data, then MSW
// branches per bias with the baseline frozen.

struct TwoStageOptions {
  FitOptions fit;
  std::optional<CircuitModel> baseline_initial;  // seeded from data when absent
  std::size_t n_branches = 1;
  double prominence = 0.05;
};

struct BiasFit {
  double bias_t;
  FitResult result;
  bool no_resonance = false;
};

struct TwoStageResult {
  FitResult baseline;
  std::vector<BiasFit> per_bias;
};

inline ComplexSpectrum as_impedance(const ComplexSpectrum& s) {
  return s.kind() == SpectrumKind::Impedance ? s : s_to_z(s);
}

/// Initial series-LCR guess: |Z| minimum sets f0 and R, reactance slope sets L.
inline SeriesLCR seed_series_lcr(const ComplexSpectrum& z) {
  std::size_t imin = 0;
  for (std::size_t i = 1; i < z.size(); ++i)
    if (std::abs(z[i]) < std::abs(z[imin])) imin = i;
  const double w0 = kTwoPi * z.frequency(imin);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double w = kTwoPi * z.frequency(i);
    const double u = w - w0 * w0 / w;
    num += z[i].imag() * u;
    den += u * u;
  }
  double l0 = den > 0.0 ? num / den : 0.0;
  if (!(l0 > 0.0)) l0 = 1e-9;
  const double r0 = std::max(z[imin].real(), 1e-3);
  return {r0, l0, 1.0 / (w0 * w0 * l0)};
}

/// Initial shorted-line guess from a delay scan over the lossless tan() shape.
inline TLineSection seed_tline(const ComplexSpectrum& z, double f_ref = 10e9) {
  const double fmax = z.grid().back();
  double best_score = std::numeric_limits<double>::infinity();
  double best_tau = 1.0 / (8.0 * fmax), best_zc = 50.0;
  for (int k = 0; k <= 400; ++k) {
    // Quarter-wave frequency swept from 0.05x to 20x the top of the band.
    const double f_q = fmax * std::pow(10.0, -1.3 + 2.6 * k / 400.0);
    const double tau = 1.0 / (4.0 * f_q);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double t = std::tan(kTwoPi * z.frequency(i) * tau);
      const double w = 1.0 / std::max(std::abs(z[i]), 1.0);
      num += z[i].imag() * t * w * w;
      den += t * t * w * w;
    }
    if (!(den > 0.0)) continue;
    const double zc = num / den;
    if (!(zc > 0.0)) continue;
    double score = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double t = std::tan(kTwoPi * z.frequency(i) * tau);
      const double e = (z[i].imag() - zc * t) / std::max(std::abs(z[i]), 1.0);
      score += e * e;
    }
    if (score < best_score) {
      best_score = score;
      best_tau = tau;
      best_zc = zc;
    }
  }
  std::vector<double> a;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double t = std::tan(kTwoPi * z.frequency(i) * best_tau);
    if (std::abs(t) > 3.0) continue;
    a.push_back(z[i].real() / (best_zc * (1.0 + t * t)) / std::sqrt(z.frequency(i) / f_ref));
  }
  double alpha = 1e-3;
  if (!a.empty()) {
    std::nth_element(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(a.size() / 2), a.end());
    alpha = std::max(a[a.size() / 2], 1e-5);
  }
  return {best_zc, alpha, best_tau, f_ref};
}

inline CircuitModel seed_baseline(const ComplexSpectrum& zero_bias, Topology topology) {
  const auto z = as_impedance(zero_bias);
  if (topology == Topology::RhygSeries) return CircuitModel::rhyg(seed_series_lcr(z));
  return CircuitModel::hyg(seed_tline(z));
}

/// Branch seed from the |Z| peak: f0 at the peak, Q from its 3 dB width and
/// r_m from the peak height above the baseline.
inline ParallelRLC seed_branch(const ComplexSpectrum& z, const CircuitModel& baseline,
                               const Extremum& peak) {
  const double f0 = peak.frequency;
  double q = 100.0;
  try {
    q = q_3db(z, f0);
  } catch (const Error&) {
  }
  const double r = std::max(std::abs(peak.z - z_model_at(baseline, f0)), 1.0);
  const double w0 = kTwoPi * f0;
  return {r, r / (q * w0), q / (r * w0)};
}

inline TwoStageResult two_stage_fit(const ComplexSpectrum& zero_bias, const BiasSweep& biased,
                                    Topology topology, const TwoStageOptions& opt = {}) {
  const auto z0 = as_impedance(zero_bias);
  for (const auto& e : biased.entries())
    if (!(e.spectrum.grid() == z0.grid()))
      throw DomainError("zero-bias and biased spectra must share one grid");

  CircuitModel init = opt.baseline_initial ? opt.baseline_initial->without_branches()
                                           : seed_baseline(z0, topology);
  if (init.topology() != topology) throw InvariantError("baseline model topology mismatch");

  FitResult stage1 = fit(init, default_specs(init), z0, opt.fit);
  if (!stage1.converged)
    throw Error(std::string("stage-1 baseline fit did not converge (") +
                to_string(stage1.termination) + ", rms " + format_double(stage1.residual_rms) +
                ")");
  const CircuitModel baseline = stage1.model;
  const auto base_values = parameter_values(baseline);
  const auto base_names = parameter_names(baseline);

  TwoStageResult out{stage1, {}};
  for (const auto& entry : biased.entries()) {
    const auto z = as_impedance(entry.spectrum);
    const auto res = find_resonances(z, opt.prominence);
    std::vector<Extremum> peaks;
    for (const auto& e : res.extrema)
      if (e.is_maximum) peaks.push_back(e);
    std::stable_sort(peaks.begin(), peaks.end(),
                     [](const Extremum& a, const Extremum& b) { return a.magnitude > b.magnitude; });
    if (peaks.size() > opt.n_branches) peaks.resize(opt.n_branches);
    std::sort(peaks.begin(), peaks.end(),
              [](const Extremum& a, const Extremum& b) { return a.frequency < b.frequency; });

    if (peaks.empty()) {
      const auto r = residuals(baseline, z, opt.fit.weight_floor);
      double sq = 0.0, sq_ohm = 0.0;
      for (double v : r) sq += v * v;
      for (std::size_t i = 0; i < z.size(); ++i)
        sq_ohm += std::norm(z_model_at(baseline, z.frequency(i)) - z[i]);
      std::vector<std::pair<std::string, double>> params;
      for (std::size_t i = 0; i < base_names.size(); ++i)
        params.emplace_back(base_names[i], base_values[i]);
      out.per_bias.push_back(
          {entry.bias_t,
           FitResult{baseline, std::sqrt(sq / static_cast<double>(r.size())),
                     std::sqrt(sq_ohm / static_cast<double>(z.size())), 0, true,
                     Termination::NoResonance, std::move(params), 0, {}},
           true});
      continue;
    }

    std::vector<ParallelRLC> branches;
    for (const auto& p : peaks) branches.push_back(seed_branch(z, baseline, p));
    const CircuitModel model0 = baseline.with_branches(branches);
    auto specs = default_specs(model0);
    for (std::size_t i = 0; i < base_values.size(); ++i) {
      specs[i].initial = specs[i].lower = specs[i].upper = base_values[i];
      specs[i].frozen = true;
    }
    out.per_bias.push_back({entry.bias_t, fit(model0, specs, z, opt.fit), false});
  }
  return out;
}

}  // namespace mswres
