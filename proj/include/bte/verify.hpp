#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

namespace bte {

struct VerifyOptions {
  bool quick = false;  // small grids and sample counts; runtime targets are not judged
  std::uint64_t seed = 1;
  double tol_ker = 1e-3;  // relative kernel residual allowed for the linearized operators
  int workers = 1;
  std::set<int> only;  // empty runs every criterion
  // Criteria listed here are known to fail; they still print FAIL but do not change the exit status.
  std::set<int> expected_failures;
  std::function<void(const std::string&)> log;  // progress lines
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  double runtime_target = 0.0;  // seconds, 0 = none
};

// The numbered acceptance checks: conservation, oracle equivalence, kernels and adjointness, coercivity,
// the Gamma-L identity, transport anchors, regime table, fluid solver, kinetic conservation, the
// hydrodynamic limit and the energy bookkeeping.
std::vector<CriterionResult> run_acceptance(const VerifyOptions& opt);

std::string format_result(const CriterionResult& r);
// True when every criterion passed or is listed as an expected failure.
bool acceptance_ok(const std::vector<CriterionResult>& results, const std::set<int>& expected_failures);

}  // namespace bte
