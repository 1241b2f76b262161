// Named residual checks mirroring the verification protocol: each check
// reports a residual and the threshold it must stay under. Thresholds are
// pinned here, in code. Checks that assert a quantity must EXCEED a bound
// report the deficit max(0, bound - observed) against threshold 0, so the
// "pass iff residual <= threshold" rule holds uniformly.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ictx {

struct CheckResult {
  std::string name;
  double residual = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::string note;
};

CheckResult make_check(std::string name, double residual, double threshold,
                       std::string note = "");

namespace checks {

// protocol checks, one group per criterion of the acceptance suite
CheckResult unmasked_discrete_equivalence(std::uint64_t seed, int stack_count);
CheckResult masked_discrete_equivalence(std::uint64_t seed, int stack_count);
CheckResult permutation_equivariance(std::uint64_t seed, int fixture_count);
std::vector<CheckResult> causality_identifiability(std::uint64_t seed);
CheckResult elementary_identity(std::uint64_t seed, int fixture_count);
CheckResult vector_lift_identity(std::uint64_t seed, int fixture_count);
CheckResult laplace_recursion(std::uint64_t seed, int measure_count);
std::vector<CheckResult> separation_witness(std::uint64_t seed);
std::vector<CheckResult> product_mlp_realize(std::uint64_t seed);
CheckResult size_contract_structural(std::uint64_t seed);
std::vector<CheckResult> universality_demonstration(std::uint64_t seed);
std::vector<CheckResult> masked_continuity(std::uint64_t seed);
std::vector<CheckResult> masked_convergence(std::uint64_t seed);
CheckResult wasserstein_oracle_agreement(std::uint64_t seed, int pair_count);

// supporting invariants
std::vector<CheckResult> measure_invariants(std::uint64_t seed);
std::vector<CheckResult> metric_invariants(std::uint64_t seed);
std::vector<CheckResult> attention_invariants(std::uint64_t seed);

}  // namespace checks

/// The full deterministic suite (everything above, spec-scale parameters).
std::vector<CheckResult> run_verify_suite(std::uint64_t seed);

}  // namespace ictx
