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

#ifndef RINGFOREST_REGRET_HPP
#define RINGFOREST_REGRET_HPP

#include "ringforest/game.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace ringforest
{

// Mean reward r^p(k) seen by `node` when k users (itself included) share
// relay p.
class RewardModel
{
public:
  virtual ~RewardModel() = default;
  virtual double mean(std::size_t node, int relay, int k) const = 0;
  virtual std::string name() const = 0;
};

class InverseLoadModel : public RewardModel
{
public:
  explicit InverseLoadModel(std::vector<double> theta) : theta(std::move(theta)) {}
  double mean(std::size_t node, int relay, int k) const override;
  std::string name() const override { return "inverse_load"; }
  std::vector<double> theta;
};

// theta_p * min(1, B_p / (k * rate_max))
class CongestionModel : public RewardModel
{
public:
  CongestionModel(std::vector<double> theta, std::vector<double> bandwidth, double rate_max)
      : theta(std::move(theta)), bandwidth(std::move(bandwidth)), rate_max(rate_max)
  {
  }
  double mean(std::size_t node, int relay, int k) const override;
  std::string name() const override { return "congestion"; }
  std::vector<double> theta;
  std::vector<double> bandwidth;
  double rate_max;
};

// theta_p * clip(1 - (prop(node, p) + bits * k / B_p) / l_max)
class LatencyModel : public RewardModel
{
public:
  LatencyModel(std::vector<double> theta, std::vector<double> bandwidth, double payload_bits,
               double l_max_ms)
      : theta(std::move(theta)), bandwidth(std::move(bandwidth)), payload_bits(payload_bits),
        l_max_ms(l_max_ms)
  {
  }
  double mean(std::size_t node, int relay, int k) const override;
  std::string name() const override { return "latency"; }
  std::vector<double> theta;
  std::vector<double> bandwidth;
  double payload_bits;
  double l_max_ms;
  std::map<std::pair<std::size_t, int>, double> prop_ms;
};

struct ActionSpace
{
  std::vector<int> relays;
  std::vector<std::uint32_t> masks;

  std::size_t size() const { return masks.size(); }
  static ActionSpace unicast(std::vector<int> relays);
  static ActionSpace multicast(std::vector<int> relays, std::size_t max_subset = 0);
};

struct JointGame
{
  std::vector<ActionSpace> spaces;
  std::shared_ptr<const RewardModel> model;
  // Rewards of subset actions are divided by this.
  double scale = 1.0;
};

using JointPolicy = std::vector<Policy>;

// Probability that the node's action includes each of its relays.
Vec inclusion_probabilities(const ActionSpace &space, const Policy &pi);

// Exact q_n(a) = E[reward of action a | others play pi_{-n}] for every node.
std::vector<Vec> action_values(const JointGame &g, const JointPolicy &pi);
Vec action_values(const JointGame &g, const JointPolicy &pi, std::size_t node);

struct McEstimate
{
  Vec mean;
  Vec stderr_;
};
McEstimate mc_action_values(const JointGame &g, const JointPolicy &pi, std::size_t node,
                            long draws, std::mt19937_64 &rng);

struct GapReport
{
  double gap = 0.0;
  std::size_t node = 0;
  Vec gains;
  Vec values;
  // Index into the candidate set, or -1 when keeping the current policy is best.
  std::vector<long> best_response;
};

// max_n max_{lambda in cands_n U {pi_n}} V_n(lambda, pi_{-n}) - V_n(pi)
GapReport nash_gap(const JointGame &g, const JointPolicy &pi,
                   const std::vector<CandidateSet> &cands);

struct HistoryStep
{
  JointPolicy joint;
  std::shared_ptr<const JointGame> game;
  long packets = 1;
};

// Cumulative regret after each step; a step of `packets` draws at a fixed
// joint policy contributes packets * gap.
std::vector<double> nash_regret(const std::vector<HistoryStep> &history,
                                const std::vector<CandidateSet> &cands);

double welfare(const JointGame &g, const std::vector<std::size_t> &assignment);
// Centralized assignment: greedy marginal welfare in node order, replaced by
// exhaustive search when the joint action count is at most 10^4.
std::vector<std::size_t> opt_assignment(const JointGame &g, bool *exhaustive = nullptr);
std::vector<std::size_t> opt_greedy(const JointGame &g);
std::vector<std::size_t> opt_exhaustive(const JointGame &g);
JointPolicy deterministic_joint(const JointGame &g, const std::vector<std::size_t> &assignment);

} // namespace ringforest

#endif
