#pragma once

#include <string>
#include <vector>

namespace hartree {

/// Physical and discretization parameters of an m-component Hartree system
/// with power kernel W(x) = |x|^{-alpha}.
struct SystemParams {
  int space_dim = 1;
  int component_count = 1;
  double power = 2.0;
  double kernel_exponent = 0.5;
  std::vector<double> masses{1.0};
  double box_length = 40.0;
  int points_per_dim = 256;
};

/// Exponents that appear in the boundedness and scaling estimates.
struct DerivedExponents {
  double weak_lr_index = 0.0;   // r = N / alpha
  double hls_dual_index = 0.0;  // t = 2r / (2r - 1)
  double gn_exponent = 0.0;     // mu = (N r p - 2 N r + N) / (2 r p)
  double growth_exponent = 0.0; // Gamma = alpha
  double interp_index = 0.0;    // 2 p r / (2r - 1)
};

struct ClauseResult {
  std::string name;  // "h0:lr-index", "h0:p-lower", ...
  std::string description;
  bool pass = false;
  double margin = 0.0;  // rhs - lhs; zero fails a strict clause
};

struct ValidationReport {
  std::vector<ClauseResult> clauses;
  bool pass = false;

  /// First failing clause, or nullptr.
  const ClauseResult* first_failure() const;
};

/// Checks that the fields are finite and in range. Throws InvalidParameter.
void check_well_formed(const SystemParams& params);

/// Evaluates each of the standing assumptions on (N, p, alpha).
/// Throws InvalidParameter for malformed input; clause failures are
/// reported, not thrown.
ValidationReport validate_assumptions(const SystemParams& params);

/// Throws InvalidParameter when validation does not pass.
DerivedExponents derive_exponents(const SystemParams& params);

/// Copy of `params` restricted to the strictly positive masses; used for the
/// reduced problems of the subadditivity scan.
SystemParams reduced_params(const SystemParams& params, const std::vector<double>& masses);

}  // namespace hartree
