// Acceptance suite: every criterion runs at its stated tolerance and
// prints one pass/fail line. The whole suite is deterministic for the
// pinned seed and finishes in well under five minutes.

#include <doctest.h>

#include <cstdio>

#include "ictx/verify.hpp"

using namespace ictx;

namespace {

constexpr std::uint64_t kSeed = 1;

void report(int criterion, const CheckResult& c) {
  std::printf("[criterion %2d] %s  %-42s residual %.6g  threshold %.6g\n",
              criterion, c.pass ? "PASS" : "FAIL", c.name.c_str(), c.residual,
              c.threshold);
  CHECK_MESSAGE(c.pass, c.name, ": residual ", c.residual, " > threshold ",
                c.threshold, " (", c.note, ")");
}

void report_all(int criterion, const std::vector<CheckResult>& batch) {
  for (const CheckResult& c : batch) report(criterion, c);
}

}  // namespace

TEST_CASE("criterion 1: unmasked discrete/measure equivalence") {
  report(1, checks::unmasked_discrete_equivalence(kSeed, 100));
}

TEST_CASE("criterion 2: masked discrete equivalence") {
  report(2, checks::masked_discrete_equivalence(kSeed + 1, 100));
}

TEST_CASE("criterion 3: permutation equivariance, bitwise") {
  report(3, checks::permutation_equivariance(kSeed + 2, 50));
}

TEST_CASE("criterion 4: causality and identifiability") {
  report_all(4, checks::causality_identifiability(kSeed + 3));
}

TEST_CASE("criterion 5: elementary-map identity") {
  report(5, checks::elementary_identity(kSeed + 4, 200));
}

TEST_CASE("criterion 6: vector-lift identity") {
  report(6, checks::vector_lift_identity(kSeed + 5, 100));
}

TEST_CASE("criterion 7: laplace derivative recursion") {
  report(7, checks::laplace_recursion(kSeed + 6, 20));
}

TEST_CASE("criterion 8: separation witness") {
  report_all(8, checks::separation_witness(kSeed + 7));
}

TEST_CASE("criterion 9: product-MLP certificate and realization") {
  report_all(9, checks::product_mlp_realize(kSeed + 8));
}

TEST_CASE("criterion 10: theorem size contract") {
  report(10, checks::size_contract_structural(kSeed + 9));
}

TEST_CASE("criterion 11: universality demonstration") {
  report_all(11, checks::universality_demonstration(kSeed + 10));
}

TEST_CASE("criterion 12: masked continuity at zero") {
  report_all(12, checks::masked_continuity(kSeed + 11));
}

TEST_CASE("criterion 13: convergence of masked measures") {
  report_all(13, checks::masked_convergence(kSeed + 12));
}

TEST_CASE("criterion 14: wasserstein oracle agreement") {
  report(14, checks::wasserstein_oracle_agreement(kSeed + 13, 50));
}
