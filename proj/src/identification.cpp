// SPDX-FileCopyrightText: 2026 The chainfield developers
// SPDX-License-Identifier: Apache-2.0

#include "chainfield/identification.hpp"

#include <cmath>
#include <limits>

#include "chainfield/errors.hpp"
#include "chainfield/point_driver.hpp"

namespace chainfield {

namespace {

// Positive quantities are searched in log space. Q and λ_M only make sense
// above 1, so their offsets from 1 are.
double offset(const FreeParameter& f) {
  return f.kind == ParameterKind::Q || f.kind == ParameterKind::lambda_M ? 1.0 : 0.0;
}
double to_search(const FreeParameter& f, double v) { return std::log(v - offset(f)); }
double from_search(const FreeParameter& f, double s) { return std::exp(s) + offset(f); }

}  // namespace

std::string FreeParameter::name() const {
  switch (kind) {
    case ParameterKind::c10: return "c10";
    case ParameterKind::branch_modulus: return "c10_" + std::to_string(branch + 1);
    case ParameterKind::Q: return "Q";
    case ParameterKind::lambda_M: return "lambda_M";
    case ParameterKind::D: return "D";
  }
  return "?";
}

void FitProblem::validate(const MaterialParams& params) const {
  if (data.size() < free.size())
    throw ValidationError("fit: " + std::to_string(data.size()) + " samples for " + std::to_string(free.size()) +
                          " free parameters");
  double prev = 1.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!(data[i].stretch > prev)) throw ValidationError("fit: stretches must increase strictly from above 1 (sample " + std::to_string(i) + ")");
    if (!(data[i].weight > 0.0)) throw ValidationError("fit: weight of sample " + std::to_string(i) + " must be > 0");
    if (!std::isfinite(data[i].stress)) throw ValidationError("fit: stress of sample " + std::to_string(i) + " not finite");
    prev = data[i].stretch;
  }
  for (const auto& f : free) {
    if (f.kind == ParameterKind::branch_modulus &&
        (f.branch < 0 || f.branch >= static_cast<int>(params.branches.size())))
      throw ValidationError("fit: branch index " + std::to_string(f.branch) + " out of range");
    if (!(f.lower > offset(f)) || !(f.upper > f.lower))
      throw ValidationError("fit: bounds of " + f.name() + " must satisfy " + (offset(f) > 0 ? "1" : "0") +
                            " < lower < upper");
  }
}

double get_parameter(const MaterialParams& p, const FreeParameter& f) {
  switch (f.kind) {
    case ParameterKind::c10: return p.c10;
    case ParameterKind::branch_modulus: return p.branches.at(f.branch).modulus;
    case ParameterKind::Q: return p.survival_iso.params().Q;
    case ParameterKind::lambda_M: return p.survival_iso.params().lambda_M;
    case ParameterKind::D: return p.D;
  }
  return 0.0;
}

void set_parameter(MaterialParams& p, const FreeParameter& f, double value) {
  switch (f.kind) {
    case ParameterKind::c10: p.c10 = value; return;
    case ParameterKind::branch_modulus: p.branches.at(f.branch).modulus = value; return;
    case ParameterKind::D: p.D = value; return;
    case ParameterKind::Q:
    case ParameterKind::lambda_M: {
      if (!p.survival_iso.enabled()) throw ValidationError("fit: " + f.name() + " is free but survival is disabled");
      const auto& w = p.survival_iso.params();
      const auto nw = f.kind == ParameterKind::Q ? WesslauParams::derive(value, w.lambda_M)
                                                 : WesslauParams::derive(w.Q, value);
      p.survival_iso = ChainSurvival(nw);
      if (p.survival_vol.enabled()) p.survival_vol = ChainSurvival(nw);
      return;
    }
  }
}

std::vector<double> ramp_response(const MaterialParams& params, const std::vector<double>& stretches, double rate,
                                  double stretch_step) {
  if (!(rate > 0.0) || !(stretch_step > 0.0)) throw ValidationError("ramp: rate and stretch step must be positive");
  std::vector<HistoryPoint> h{{0.0, 1.0}};
  std::vector<std::size_t> at;
  double prev = 1.0;
  for (double s : stretches) {
    const int n = std::max(1, static_cast<int>(std::ceil((s - prev) / stretch_step - 1e-9)));
    for (int k = 1; k <= n; ++k) {
      const double l = prev + (s - prev) * k / n;
      h.push_back({(l - 1.0) / rate, l});
    }
    at.push_back(h.size() - 1);
    prev = s;
  }
  const auto out = point_driver(h, LoadMode::uniaxial_stress, params);
  std::vector<double> sigma;
  sigma.reserve(at.size());
  for (auto i : at) sigma.push_back(out[i].stress);
  return sigma;
}

namespace {

double weighted_sse(const FitProblem& pb, const std::vector<double>& model) {
  double s = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    const double r = model[i] - pb.data[i].stress;
    s += pb.data[i].weight * r * r;
  }
  return s;
}

std::vector<double> stretches_of(const FitProblem& pb) {
  std::vector<double> s;
  for (const auto& d : pb.data) s.push_back(d.stretch);
  return s;
}

}  // namespace

double fit_objective(const FitProblem& problem, const MaterialParams& params, double rate, const FitOptions& options) {
  return weighted_sse(problem, ramp_response(params, stretches_of(problem), rate, options.stretch_step));
}

FitResult fit(const FitProblem& problem, const MaterialParams& params0, double rate, const FitOptions& options) {
  params0.validate();
  problem.validate(params0);
  const auto lambdas = stretches_of(problem);
  const auto n = static_cast<Eigen::Index>(problem.free.size());

  auto unpack = [&](const Eigen::VectorXd& s) {
    MaterialParams p = params0;
    for (Eigen::Index i = 0; i < n; ++i) set_parameter(p, problem.free[i], from_search(problem.free[i], s[i]));
    return p;
  };

  NelderMeadOptions nm = options.optimizer;
  Eigen::VectorXd x0(n);
  nm.lower.resize(n);
  nm.upper.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& f = problem.free[i];
    const double v = get_parameter(params0, f);
    if (v < f.lower || v > f.upper) throw ValidationError("fit: start value of " + f.name() + " outside its bounds");
    x0[i] = to_search(f, v);
    nm.lower[i] = to_search(f, f.lower);
    nm.upper[i] = to_search(f, f.upper);
  }

  auto objective = [&](const Eigen::VectorXd& s) {
    try {
      return weighted_sse(problem, ramp_response(unpack(s), lambdas, rate, options.stretch_step));
    } catch (const std::exception&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  FitResult r;
  r.initial_objective = fit_objective(problem, params0, rate, options);
  const auto nmr = NelderMead(nm).minimize(objective, x0);
  r.params = unpack(nmr.x);
  r.params.canonicalize();
  r.model_stress = ramp_response(r.params, lambdas, rate, options.stretch_step);
  r.objective = weighted_sse(problem, r.model_stress);
  for (std::size_t i = 0; i < lambdas.size(); ++i) r.residuals.push_back(r.model_stress[i] - problem.data[i].stress);
  r.evaluations = nmr.evaluations;
  r.converged = nmr.converged;
  r.message = nmr.message;
  r.trace = nmr.trace;
  return r;
}

std::vector<FitSample> synthesize(const MaterialParams& params, double rate, double max_stretch, int samples,
                                  double stretch_step) {
  if (samples < 1 || !(max_stretch > 1.0)) throw ValidationError("synthesize: need samples >= 1 and max stretch > 1");
  std::vector<double> l;
  for (int i = 1; i <= samples; ++i) l.push_back(1.0 + (max_stretch - 1.0) * i / samples);
  const auto s = ramp_response(params, l, rate, stretch_step);
  std::vector<FitSample> out;
  for (std::size_t i = 0; i < l.size(); ++i) out.push_back({l[i], s[i], 1.0});
  return out;
}

}  // namespace chainfield
