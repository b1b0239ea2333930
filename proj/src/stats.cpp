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

#include "ringforest/stats.hpp"
#include "ringforest/error.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>

namespace ringforest::stats
{

namespace
{

bool invert(std::vector<std::vector<double>> A, std::vector<std::vector<double>> &inv)
{
  const std::size_t n = A.size();
  inv.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    inv[i][i] = 1.0;
  for (std::size_t c = 0; c < n; ++c)
  {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::fabs(A[r][c]) > std::fabs(A[p][c]))
        p = r;
    if (std::fabs(A[p][c]) < 1e-300)
      return false;
    std::swap(A[p], A[c]);
    std::swap(inv[p], inv[c]);
    const double d = A[c][c];
    for (std::size_t k = 0; k < n; ++k)
    {
      A[c][k] /= d;
      inv[c][k] /= d;
    }
    for (std::size_t r = 0; r < n; ++r)
    {
      if (r == c || A[r][c] == 0.0)
        continue;
      const double f = A[r][c];
      for (std::size_t k = 0; k < n; ++k)
      {
        A[r][k] -= f * A[c][k];
        inv[r][k] -= f * inv[c][k];
      }
    }
  }
  return true;
}

} // namespace

bool solve(std::vector<std::vector<double>> A, std::vector<double> b, std::vector<double> &x)
{
  std::vector<std::vector<double>> inv;
  if (!invert(std::move(A), inv))
    return false;
  x.assign(b.size(), 0.0);
  for (std::size_t i = 0; i < b.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      x[i] += inv[i][j] * b[j];
  return true;
}

std::pair<double, double> Fit::ci(std::size_t j, double level) const
{
  if (dof <= 0)
    fail(Errc::Schema, "confidence interval needs positive degrees of freedom");
  boost::math::students_t t(dof);
  const double q = boost::math::quantile(boost::math::complement(t, (1.0 - level) / 2.0));
  return {coef.at(j) - q * stderr_.at(j), coef.at(j) + q * stderr_.at(j)};
}

Fit ols(const std::vector<std::vector<double>> &X, const std::vector<double> &y, bool intercept)
{
  if (X.size() != y.size() || X.empty())
    fail(Errc::Schema, "regression needs matching non-empty X and y");
  const std::size_t k = X[0].size();
  std::vector<std::vector<double>> xtx(k, std::vector<double>(k, 0.0));
  std::vector<double> xty(k, 0.0);
  for (std::size_t i = 0; i < X.size(); ++i)
  {
    if (X[i].size() != k)
      fail(Errc::Schema, "ragged regressor matrix");
    for (std::size_t a = 0; a < k; ++a)
    {
      xty[a] += X[i][a] * y[i];
      for (std::size_t b = 0; b < k; ++b)
        xtx[a][b] += X[i][a] * X[i][b];
    }
  }
  std::vector<std::vector<double>> inv;
  if (!invert(xtx, inv))
    fail(Errc::Conditioning, "singular regression design");
  Fit f;
  f.coef.assign(k, 0.0);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b)
      f.coef[a] += inv[a][b] * xty[b];
  const double ybar = intercept ? mean(y) : 0.0;
  double sst = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i)
  {
    double yhat = 0.0;
    for (std::size_t a = 0; a < k; ++a)
      yhat += f.coef[a] * X[i][a];
    f.sse += (y[i] - yhat) * (y[i] - yhat);
    sst += (y[i] - ybar) * (y[i] - ybar);
  }
  f.r2 = sst > 0.0 ? 1.0 - f.sse / sst : 1.0;
  f.dof = static_cast<int>(X.size()) - static_cast<int>(k);
  const double s2 = f.dof > 0 ? f.sse / f.dof : 0.0;
  f.stderr_.assign(k, 0.0);
  for (std::size_t a = 0; a < k; ++a)
    f.stderr_[a] = std::sqrt(std::max(0.0, s2 * inv[a][a]));
  return f;
}

Fit linear(const std::vector<double> &x, const std::vector<double> &y)
{
  std::vector<std::vector<double>> X;
  for (double v : x)
    X.push_back({1.0, v});
  return ols(X, y, true);
}

Fit quadratic(const std::vector<double> &x, const std::vector<double> &y)
{
  std::vector<std::vector<double>> X;
  for (double v : x)
    X.push_back({1.0, v, v * v});
  return ols(X, y, true);
}

double mean(const std::vector<double> &v)
{
  if (v.empty())
    return 0.0;
  double s = 0.0;
  for (double x : v)
    s += x;
  return s / static_cast<double>(v.size());
}

double variance(const std::vector<double> &v)
{
  if (v.size() < 2)
    return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v)
    s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double median(std::vector<double> v)
{
  if (v.empty())
    return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace ringforest::stats
