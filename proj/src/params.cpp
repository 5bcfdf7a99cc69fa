#include "hartree/params.hpp"

#include <cmath>
#include <sstream>

#include "hartree/errors.hpp"

namespace hartree {

const ClauseResult* ValidationReport::first_failure() const {
  for (const auto& c : clauses)
    if (!c.pass) return &c;
  return nullptr;
}

void check_well_formed(const SystemParams& params) {
  auto fail = [](const std::string& what) { throw InvalidParameter(what); };
  if (params.space_dim < 1) fail("space_dim must be a positive integer");
  if (params.component_count < 1 || params.component_count > 3)
    fail("component_count must be 1, 2 or 3");
  if (!std::isfinite(params.power)) fail("power must be finite");
  if (!std::isfinite(params.kernel_exponent)) fail("kernel_exponent must be finite");
  if (params.kernel_exponent <= 0.0) fail("kernel_exponent must be > 0");
  if (static_cast<int>(params.masses.size()) != params.component_count)
    fail("masses must have component_count entries");
  for (double m : params.masses)
    if (!std::isfinite(m) || m <= 0.0) fail("masses must be finite and > 0");
  if (!std::isfinite(params.box_length) || params.box_length <= 0.0)
    fail("box_length must be finite and > 0");
  if (params.points_per_dim < 8 || params.points_per_dim % 2 != 0)
    fail("points_per_dim must be even and >= 8");
}

ValidationReport validate_assumptions(const SystemParams& params) {
  check_well_formed(params);
  const double N = params.space_dim;
  const double p = params.power;
  const double alpha = params.kernel_exponent;
  const double r = N / alpha;

  ValidationReport report;
  auto add = [&](std::string name, std::string desc, double margin, bool strict) {
    bool ok = strict ? margin > 0.0 : margin >= 0.0;
    report.clauses.push_back({std::move(name), std::move(desc), ok, margin});
  };

  add("h0:lr-index", "1/r < 2/N", 2.0 / N - 1.0 / r, true);
  add("h0:p-lower", "p >= 2", p - 2.0, false);
  add("h0:p-upper", "p < (2r-1)/r + 2/N", (2.0 * r - 1.0) / r + 2.0 / N - p, true);
  add("h2:growth", "Gamma = alpha < 2 + 2N - pN", 2.0 + 2.0 * N - p * N - alpha, true);
  // W = |x|^{-alpha} is radial, nonnegative and decays for every alpha > 0.
  add("h1:radial-decay", "W >= 0, radial, W(r) -> 0", alpha, true);

  report.pass = report.first_failure() == nullptr;
  return report;
}

DerivedExponents derive_exponents(const SystemParams& params) {
  const auto report = validate_assumptions(params);
  if (!report.pass) {
    const auto* f = report.first_failure();
    std::ostringstream os;
    os << "assumption " << f->name << " (" << f->description << ") fails with margin " << f->margin;
    throw InvalidParameter(os.str());
  }
  const double N = params.space_dim;
  const double p = params.power;
  const double r = N / params.kernel_exponent;

  DerivedExponents e;
  e.weak_lr_index = r;
  e.hls_dual_index = 2.0 * r / (2.0 * r - 1.0);
  e.gn_exponent = (N * r * p - 2.0 * N * r + N) / (2.0 * r * p);
  e.growth_exponent = params.kernel_exponent;
  e.interp_index = 2.0 * p * r / (2.0 * r - 1.0);
  return e;
}

SystemParams reduced_params(const SystemParams& params, const std::vector<double>& masses) {
  SystemParams out = params;
  out.masses.clear();
  for (double m : masses)
    if (m > 0.0) out.masses.push_back(m);
  if (out.masses.empty()) throw InvalidParameter("mass vector has no positive entry");
  out.component_count = static_cast<int>(out.masses.size());
  return out;
}

}  // namespace hartree
