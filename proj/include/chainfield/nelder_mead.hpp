// SPDX-FileCopyrightText: 2026 The chainfield developers
// SPDX-License-Identifier: Apache-2.0

// Box-constrained downhill simplex. Points are projected onto the box before
// every evaluation, so the objective never sees an out-of-bounds argument.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "chainfield/errors.hpp"

namespace chainfield {

struct NelderMeadOptions {
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  double tolerance = 1e-8;  // simplex diameter (max vertex distance to best)
  double f_tolerance = 0.0; // optional spread of f over the simplex, 0 = off
  int max_evaluations = 2000;
  double initial_step = 0.1;  // absolute; zero components get this, others x0·(1+step)
  Eigen::VectorXd lower;      // empty = unbounded
  Eigen::VectorXd upper;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double f = std::numeric_limits<double>::infinity();
  int evaluations = 0;
  std::vector<double> trace;  // best f after every iteration
  bool converged = false;
  std::string message;
};

class NelderMead {
 public:
  using Objective = std::function<double(const Eigen::VectorXd&)>;

  explicit NelderMead(NelderMeadOptions opt = {}) : opt_(std::move(opt)) {}

  NelderMeadResult minimize(const Objective& f, const Eigen::VectorXd& x0) const {
    const Eigen::Index n = x0.size();
    check_options(n);
    bad_run_ = 0;
    NelderMeadResult res;
    if (n == 0) {
      res.x = x0;
      res.f = eval(f, x0, res);
      res.converged = true;
      res.message = "no free parameters";
      return res;
    }

    std::vector<Eigen::VectorXd> v(n + 1, project(x0));
    std::vector<double> fv(n + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      double step = x0[i] != 0.0 ? opt_.initial_step * x0[i] : opt_.initial_step;
      v[i + 1][i] += step;
      v[i + 1] = project(v[i + 1]);
      // projection can collapse the vertex onto x0; step the other way
      if ((v[i + 1] - v[0]).norm() == 0.0) {
        v[i + 1][i] -= 2.0 * step;
        v[i + 1] = project(v[i + 1]);
      }
    }
    for (std::size_t i = 0; i < v.size(); ++i) fv[i] = eval(f, v[i], res);
    if (!std::isfinite(fv[0])) throw ConvergenceError("nelder-mead: objective not finite at x0");

    std::vector<std::size_t> order(n + 1);
    auto sort = [&] {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
    };

    for (;;) {
      sort();
      const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
      res.trace.push_back(fv[best]);

      double diam = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) diam = std::max(diam, (v[i] - v[best]).lpNorm<Eigen::Infinity>());
      const double spread = fv[worst] - fv[best];
      if (diam < opt_.tolerance || (opt_.f_tolerance > 0.0 && spread < opt_.f_tolerance)) {
        res.converged = true;
        res.message = "simplex diameter below tolerance";
        break;
      }
      if (res.evaluations >= opt_.max_evaluations) {
        res.message = "evaluation limit reached";
        break;
      }

      Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
      for (std::size_t i : order)
        if (i != worst) c += v[i];
      c /= static_cast<double>(n);

      const Eigen::VectorXd xr = project(c + opt_.reflection * (c - v[worst]));
      const double fr = eval(f, xr, res);
      if (fr < fv[best]) {
        const Eigen::VectorXd xe = project(c + opt_.expansion * (xr - c));
        const double fe = eval(f, xe, res);
        if (fe < fr) {
          v[worst] = xe, fv[worst] = fe;
        } else {
          v[worst] = xr, fv[worst] = fr;
        }
        continue;
      }
      if (fr < fv[second]) {
        v[worst] = xr, fv[worst] = fr;
        continue;
      }
      // contraction, outside if the reflected point beats the worst
      const bool outside = fr < fv[worst];
      const Eigen::VectorXd xc = outside ? project(c + opt_.contraction * (xr - c))
                                         : project(c + opt_.contraction * (v[worst] - c));
      const double fc = eval(f, xc, res);
      if (fc < (outside ? fr : fv[worst])) {
        v[worst] = xc, fv[worst] = fc;
        continue;
      }
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i == best) continue;
        v[i] = project(v[best] + opt_.shrink * (v[i] - v[best]));
        fv[i] = eval(f, v[i], res);
      }
    }
    const std::size_t best = order.front();
    res.x = v[best];
    res.f = fv[best];
    return res;
  }

  Eigen::VectorXd project(Eigen::VectorXd x) const {
    if (opt_.lower.size()) x = x.cwiseMax(opt_.lower);
    if (opt_.upper.size()) x = x.cwiseMin(opt_.upper);
    return x;
  }

 private:
  void check_options(Eigen::Index n) const {
    if (opt_.lower.size() && opt_.lower.size() != n) throw ValidationError("nelder-mead: lower bound size");
    if (opt_.upper.size() && opt_.upper.size() != n) throw ValidationError("nelder-mead: upper bound size");
    if (opt_.lower.size() && opt_.upper.size() && (opt_.lower.array() >= opt_.upper.array()).any())
      throw ValidationError("nelder-mead: lower bound must be below upper bound");
    if (!(opt_.tolerance > 0.0) || opt_.max_evaluations < 1)
      throw ValidationError("nelder-mead: tolerance and max_evaluations must be positive");
  }

  // Non-finite values rank as +inf. A run of more of them than the simplex has
  // vertices means the search is stuck on a plateau of invalid points.
  double eval(const Objective& f, const Eigen::VectorXd& x, NelderMeadResult& res) const {
    ++res.evaluations;
    const double y = f(x);
    if (std::isfinite(y)) {
      bad_run_ = 0;
      return y;
    }
    if (++bad_run_ > x.size() + 1)
      throw ConvergenceError("nelder-mead: objective non-finite at " + std::to_string(bad_run_) +
                             " consecutive points (last evaluation " + std::to_string(res.evaluations) + ")");
    return std::numeric_limits<double>::infinity();
  }

  NelderMeadOptions opt_;
  mutable Eigen::Index bad_run_ = 0;
};

}  // namespace chainfield
