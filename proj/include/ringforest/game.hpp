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

#ifndef RINGFOREST_GAME_HPP
#define RINGFOREST_GAME_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace ringforest
{

using Vec = std::vector<double>;
using Policy = std::vector<double>;
using CandidateSet = std::vector<Policy>;

constexpr double kPolicyFloor = 1e-3;

class Matrix
{
public:
  explicit Matrix(std::size_t n = 0) : n_(n), a_(n * n, 0.0) {}
  std::size_t size() const { return n_; }
  double &operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

private:
  std::size_t n_;
  std::vector<double> a_;
};

// Gaussian elimination with partial pivoting. A pivot below 1e-12 in
// magnitude raises a conditioning error.
double determinant(const Matrix &m);
Matrix inverse(const Matrix &m);

void validate_policy(const Policy &p, double tol = 1e-9);
void validate_candidates(const CandidateSet &c, double floor = kPolicyFloor);

Policy uniform_policy(std::size_t d);
// (1 - d*floor) x + floor; keeps the simplex and lifts every entry to >= floor.
Policy floor_policy(const Policy &x, double floor);
// All points of the 1/g simplex grid over d coordinates, floored, plus the
// uniform policy when it is not already on the grid.
CandidateSet simplex_grid(std::size_t d, int g, double floor = kPolicyFloor);

// M(lambda) = sum_p lambda(p) psi(p) psi(p)^T with one-hot psi.
Matrix correlation_matrix(const Policy &lambda);

enum class DesignRule
{
  MinDet,
  MaxDet,
};

struct GameConfig
{
  double alpha = 0.5;
  double beta = 0.5;
  int tau = 10;
  double epsilon = 0.01;
  DesignRule design = DesignRule::MinDet;
  bool general_matrix = false;
  double floor = kPolicyFloor;

  void validate() const;
  // (1 - alpha) = 1/(N K), beta = 1/(N sqrt K), tau = K^2.
  static GameConfig theory(int nodes, int episodes);
};

struct RewardSample
{
  std::size_t hop = 0;
  double reward = 0.0;
  long t = 0;
  long episode = 0;
};

Vec candidate_determinants(const CandidateSet &c, bool general = false);
std::size_t exploratory_index(const CandidateSet &c, DesignRule rule = DesignRule::MinDet,
                              bool general = false);
const Policy &exploratory_policy(const CandidateSet &c, DesignRule rule = DesignRule::MinDet,
                                 bool general = false);

Vec estimate_gradient(const Policy &pi, const std::vector<RewardSample> &samples,
                      bool general = false, double floor = kPolicyFloor);

Vec inner_products(const Vec &grad, const CandidateSet &c);
std::size_t best_candidate_index(const Vec &grad, const CandidateSet &c);
const Policy &best_candidate_policy(const Vec &grad, const CandidateSet &c);

Policy update_policy(const Policy &pi, const Policy &tilde, const Policy &rho, double alpha,
                     double beta);

std::size_t select_hop(const Policy &pi, std::mt19937_64 &rng);

struct EpisodeResult
{
  Policy next;
  std::size_t rho = 0;
  std::size_t tilde = 0;
  Vec dets;
  Vec grad;
  Vec inner;
  double mean_reward = 0.0;
  std::size_t samples = 0;
  bool partial = false;
};

// Lines 5-8 of the per-episode loop given the tau observed samples.
EpisodeResult episode_update(const Policy &pi, const CandidateSet &cands, const GameConfig &cfg,
                             const std::vector<RewardSample> &samples);

class Environment
{
public:
  virtual ~Environment() = default;
  // Reward for using `hop` on packet t, or nothing if the node cannot send.
  virtual std::optional<double> reward(std::size_t hop, long t) = 0;
};

struct Learner
{
  Policy pi;
  CandidateSet cands;
  long episode = 0;
  long packet = 0;
};

// Full episode: tau draws from pi, then episode_update. A short episode
// keeps the policy.
EpisodeResult run_episode(Learner &node, const GameConfig &cfg, Environment &env,
                          std::mt19937_64 &rng);

struct BanditState
{
  explicit BanditState(std::size_t hops = 0, double eps = 0.05)
      : sum(hops, 0.0), count(hops, 0), epsilon(eps)
  {
  }
  Vec sum;
  std::vector<long> count;
  double epsilon;
  long episode = 1;
  std::size_t rr = 0;

  bool warming() const;
  double eps_now() const;
  std::size_t greedy() const;
  Policy policy() const;
};

std::size_t bandit_choose(BanditState &s, std::mt19937_64 &rng);
void bandit_observe(BanditState &s, std::size_t hop, double reward);
// Folds an episode of samples and returns the greedy hop for the next one.
std::size_t bandit_baseline_step(BanditState &s, const std::vector<RewardSample> &samples);

// Non-empty subsets of up to 5 hops, one coordinate per subset.
struct MulticastSpace
{
  std::size_t hops = 0;
  std::vector<std::uint32_t> masks;
};

MulticastSpace multicast_space(std::size_t hops, std::size_t max_subset = 0);
// Embeds per-hop candidate policies as singleton-only policies on the space.
CandidateSet lift_to_multicast(const CandidateSet &hop_cands, const MulticastSpace &space);
// Normalizes a [0, F] subset reward into [0, 1].
double normalize_multicast_reward(double r, std::size_t max_subset);

} // namespace ringforest

#endif
