/*
 * Copyright (c) 2026 The ringforest Authors. All Rights Reserved
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef RINGFOREST_STATS_HPP
#define RINGFOREST_STATS_HPP

#include <vector>

namespace ringforest::stats
{

struct Fit
{
  std::vector<double> coef;
  std::vector<double> stderr_;
  double r2 = 0.0;
  double sse = 0.0;
  int dof = 0;

  // Two-sided confidence interval for coefficient j.
  std::pair<double, double> ci(std::size_t j, double level = 0.95) const;
};

// Least squares y ~ X. Each row of X holds the regressors; add a column of
// ones yourself if you want an intercept. R^2 is centered when
// `intercept` is true and uncentered otherwise.
Fit ols(const std::vector<std::vector<double>> &X, const std::vector<double> &y, bool intercept);

// y ~ a + b x
Fit linear(const std::vector<double> &x, const std::vector<double> &y);
// y ~ a + b x + c x^2
Fit quadratic(const std::vector<double> &x, const std::vector<double> &y);

double mean(const std::vector<double> &v);
double variance(const std::vector<double> &v);
double median(std::vector<double> v);

// Solves A x = b in place with partial pivoting; returns false if singular.
bool solve(std::vector<std::vector<double>> A, std::vector<double> b, std::vector<double> &x);

} // namespace ringforest::stats

#endif
