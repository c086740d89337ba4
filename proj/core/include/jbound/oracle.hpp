#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "jbound/bounds.hpp"

namespace jbound::oracle {

// Deterministic campaign configuration: identical config => identical
// trial sequence and verdicts, independent of scheduling.
struct FuzzConfig {
  std::uint64_t seed = 0;
  int trials = 1000;
  int n_min = 2;
  int n_max = 10;
  std::vector<TheoremId> theorems;      // empty = every theorem id
  std::vector<FunctionClass> classes;   // empty = every catalog class
  Tolerances tol;
};

// A shrunk instance violating a claimed inequality. Re-evaluating the
// stored instance reproduces the violation exactly.
struct Counterexample {
  Instance instance;
  TheoremId theorem = TheoremId::Thm3;
  double violation = 0.0;
  int shrink_steps = 0;
};

// Result of the two-path check: the bounds-module report, the independent
// plain-summation recomputation, and a counterexample only when both
// evaluation paths agree on a violation beyond tolerance.
struct CheckOutcome {
  BoundReport report;
  BoundReport plain;
  double path_delta = 0.0;
  bool paths_agree = true;
  std::optional<Counterexample> counterexample;
};

// Draws an instance satisfying the hypotheses of `id`. Fully determined
// by (config, id, trial_index).
Instance generate(const FuzzConfig& config, TheoremId id,
                  std::uint64_t trial_index);

CheckOutcome check(const Instance& inst, TheoremId id,
                   const Tolerances& tol = {});

// Independent recomputation of a theorem chain with plain reverse-order
// summation (the second route the two-path invariant compares).
BoundReport plain_evaluate(const Instance& inst, TheoremId id,
                           const Tolerances& tol = {});

// Greedily drops points (largest-first search order), then rounds values
// to short decimals; every accepted step keeps the hypotheses valid and
// the violation confirmed. Dropping steps never decrease the violation.
Counterexample shrink(const Counterexample& cex, const Tolerances& tol = {});

// Evaluates a lambda theorem with the constant tuple lambda_i = t over a
// uniform grid of [0, 1]. Throws on non-lambda theorem ids.
std::vector<std::pair<double, BoundReport>> sweep_lambda(
    const Instance& inst, TheoremId id, int grid_density,
    const Tolerances& tol = {});

// Explicit evaluator bundle for the D-function probe; lets callers probe
// (f, Phi) pairings that are not catalog specs.
struct DModel {
  std::function<double(double)> f;
  std::function<double(double)> fprime;
  std::function<double(double)> phi;
  std::function<double(double)> phiprime;
  Interval domain;
};

struct ProbeReport {
  bool pass = false;
  double min_d = 0.0;
  // Worst monotonicity defects: rise left of z, drop right of z.
  double worst_left_rise = 0.0;
  double worst_right_drop = 0.0;
  std::size_t samples = 0;
};

// Samples D(y) = f(y) - f(z) - f'(z)(y-z) - Phi(|y-z|) on both sides of z
// and asserts D >= 0, nonincreasing left of z, nondecreasing right of z.
// Certifies first that f' is Phi'-superadditive (HypothesisViolated if not).
ProbeReport monotonicity_probe(const DModel& model, double z,
                               int grid_density, double tol = 1e-12);
ProbeReport monotonicity_probe(const FunctionSpec& spec, double z,
                               int grid_density, double tol = 1e-12);

struct TheoremCampaign {
  TheoremId theorem = TheoremId::Thm3;
  int trials = 0;
  int confirmed = 0;
  double min_slack = 0.0;
  double max_path_delta = 0.0;
  std::vector<Counterexample> counterexamples; // shrunk; capped at 10 stored
  std::string note;
};

struct FuzzSummary {
  FuzzConfig config;
  std::vector<TheoremCampaign> campaigns;
  int total_confirmed = 0;
};

FuzzSummary run_campaign(const FuzzConfig& config);

} // namespace jbound::oracle
