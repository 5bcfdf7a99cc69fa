#include "hartree/functional.hpp"

#include <cmath>
#include <vector>

#include "hartree/errors.hpp"

namespace hartree {

namespace {

// |f|^{p-2} f, zero at zeros of f when p > 2.
ComplexArray nonlinear_factor(const Field& f, double p) {
  if (p == 2.0) return f.data;
  const RealArray mod = f.data.abs();
  RealArray w = (mod > 0.0).select(((p - 2.0) * mod.max(1e-300).log()).exp(), 0.0);
  return f.data * w;
}

RealArray summed_density(const MultiField& mf, double p) {
  RealArray rho = RealArray::Zero(mf.grid().size());
  for (const Field& f : mf) rho += density_power(f, p);
  return rho;
}

}  // namespace

double origin_cell_average(int dim, double alpha, double h) {
  if (alpha >= dim) throw SingularKernel("|x|^-alpha is not integrable at the origin for alpha >= N");
  // Average over [-1,1]^N equals N/(N - alpha) * int_{[0,1]^{N-1}} (1 + |t|^2)^{-alpha/2} dt
  // (split the cube into pyramids on the largest coordinate).
  double smooth = 1.0;
  if (dim > 1) {
    // Composite 4-point Gauss-Legendre on [0, 1] per axis; the integrand is
    // smooth, so this is at roundoff.
    constexpr int kPanels = 100;
    constexpr double kNode[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
    constexpr double kWeight[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
    std::vector<double> t1, w1;
    for (int panel = 0; panel < kPanels; ++panel)
      for (int q = 0; q < 4; ++q) {
        t1.push_back((panel + 0.5 + 0.5 * kNode[q]) / kPanels);
        w1.push_back(0.5 * kWeight[q] / kPanels);
      }
    const long pts = static_cast<long>(t1.size());
    const int inner = dim - 1;
    long total = 1;
    for (int d = 0; d < inner; ++d) total *= pts;
    double acc = 0.0;
    for (long idx = 0; idx < total; ++idx) {
      long rest = idx;
      double t2 = 0.0, w = 1.0;
      for (int d = 0; d < inner; ++d) {
        t2 += t1[rest % pts] * t1[rest % pts];
        w *= w1[rest % pts];
        rest /= pts;
      }
      acc += w * std::pow(1.0 + t2, -0.5 * alpha);
    }
    smooth = acc;
  }
  const double unit_average = dim / (dim - alpha) * smooth;
  return std::pow(0.5 * h, -alpha) * unit_average;
}

Kernel build_kernel(const Grid& grid, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidParameter("kernel exponent must be > 0");
  const double origin = origin_cell_average(grid.dim(), alpha, grid.spacing());
  const double half = 0.5 * grid.box_length();

  Kernel k;
  k.grid = grid;
  k.exponent = alpha;
  k.real_samples.resize(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const auto x = grid.position(i);
    double r2 = 0.0;
    for (double c : x) r2 += c * c;
    const double r = std::sqrt(r2);
    if (r == 0.0)
      k.real_samples[i] = origin;
    else if (r <= half)
      k.real_samples[i] = std::pow(r, -alpha);
    else
      k.real_samples[i] = 0.0;
  }

  // Reorder by displacement (origin at index 0) before transforming.
  const std::vector<int> half_shift(grid.dim(), grid.points_per_dim() / 2);
  const Field displaced = shift(Field(grid, k.real_samples.cast<Complex>()), half_shift);
  k.multiplier = transform(displaced).real() * grid.cell_volume();
  return k;
}

Kernel zero_kernel(const Grid& grid) {
  Kernel k;
  k.grid = grid;
  k.exponent = 0.0;
  k.real_samples = RealArray::Zero(grid.size());
  k.multiplier = RealArray::Zero(grid.size());
  return k;
}

RealArray density_power(const Field& f, double p) {
  if (p == 2.0) return f.data.abs2();
  const RealArray mod = f.data.abs();
  return (mod > 0.0).select((p * mod.max(1e-300).log()).exp(), 0.0);
}

RealArray convolve_density(const Kernel& kernel, const RealArray& density) {
  if (density.size() != kernel.grid.size()) throw GridMismatch("density does not match kernel grid");
  ComplexArray spec = transform(kernel.grid, density.cast<Complex>());
  spec *= kernel.multiplier;
  return inverse_transform(kernel.grid, spec).real();
}

double pair_interaction(double q, const Field& f, const Field& g, const Kernel& kernel, double p) {
  if (!(q > 0.0)) throw InvalidParameter("pair_interaction needs q > 0");
  require_same_grid(f.grid, g.grid);
  require_same_grid(f.grid, kernel.grid);
  const RealArray pot = convolve_density(kernel, density_power(g, p));
  return kernel.grid.cell_volume() * (pot * density_power(f, p)).sum() / q;
}

std::vector<RealArray> effective_potentials(const MultiField& mf, const Kernel& kernel, double p) {
  require_same_grid(mf.grid(), kernel.grid);
  const RealArray pot = convolve_density(kernel, summed_density(mf, p));
  std::vector<RealArray> out;
  out.reserve(mf.size());
  for (const Field& f : mf) {
    if (p == 2.0) {
      out.push_back(pot);
    } else {
      const RealArray mod = f.data.abs();
      out.push_back(pot * (mod > 0.0).select(((p - 2.0) * mod.max(1e-300).log()).exp(), 0.0));
    }
  }
  return out;
}

EnergyAndGradient energy_and_gradient(const MultiField& mf, const Kernel& kernel, double p) {
  require_same_grid(mf.grid(), kernel.grid);
  const Grid& g = mf.grid();
  const RealArray rho = summed_density(mf, p);
  const RealArray pot = convolve_density(kernel, rho);

  EnergyAndGradient out{{}, MultiField(g, mf.size()), std::vector<double>(mf.size())};
  const double norm = g.cell_volume() / static_cast<double>(g.size());
  for (int j = 0; j < mf.size(); ++j) {
    ComplexArray spec = transform(mf[j]);
    out.grad_norms_sq[j] = norm * (g.k_squared() * spec.abs2()).sum();
    out.energy.kinetic += 0.5 * out.grad_norms_sq[j];
    spec *= g.k_squared();
    out.gradient[j].data = inverse_transform(g, spec) - pot * nonlinear_factor(mf[j], p);
  }
  out.energy.interaction = g.cell_volume() * (pot * rho).sum() / (2.0 * p);
  out.energy.total = out.energy.kinetic - out.energy.interaction;
  return out;
}

EnergyBreakdown total_energy(const MultiField& mf, const Kernel& kernel, double p) {
  require_same_grid(mf.grid(), kernel.grid);
  const Grid& g = mf.grid();
  const RealArray rho = summed_density(mf, p);
  EnergyBreakdown e;
  for (const Field& f : mf) e.kinetic += 0.5 * grad_norm_sq(f);
  e.interaction = g.cell_volume() * (convolve_density(kernel, rho) * rho).sum() / (2.0 * p);
  e.total = e.kinetic - e.interaction;
  return e;
}

double single_energy(const Field& h, const Kernel& kernel, double p) {
  return 0.5 * grad_norm_sq(h) - pair_interaction(2.0 * p, h, h, kernel, p);
}

double energy_difference(const MultiField& from, const MultiField& to, const Kernel& kernel, double p) {
  require_same_grid(from.grid(), to.grid());
  require_same_grid(from.grid(), kernel.grid);
  if (from.size() != to.size()) throw InvalidParameter("component counts differ");
  const Grid& g = from.grid();
  const double norm = g.cell_volume() / static_cast<double>(g.size());

  double kinetic = 0.0;
  RealArray drho = RealArray::Zero(g.size());
  RealArray rho_sum = RealArray::Zero(g.size());
  for (int j = 0; j < from.size(); ++j) {
    const ComplexArray d = to[j].data - from[j].data;
    const ComplexArray s = to[j].data + from[j].data;
    // |to|^2 - |from|^2 = Re(conj(d) s)
    const ComplexArray d_hat = transform(g, d);
    const ComplexArray s_hat = transform(g, s);
    kinetic += 0.5 * norm * (g.k_squared() * (d_hat.conjugate() * s_hat).real()).sum();

    const RealArray dmod2 = (d.conjugate() * s).real();
    const RealArray rho_from = density_power(from[j], p);
    if (p == 2.0) {
      drho += dmod2;
    } else {
      const RealArray mod2 = from[j].data.abs2();
      for (Eigen::Index i = 0; i < g.size(); ++i)
        drho[i] += mod2[i] > 0.0 ? rho_from[i] * std::expm1(0.5 * p * std::log1p(dmod2[i] / mod2[i]))
                                 : std::pow(std::abs(to[j].data[i]), p);
    }
    rho_sum += rho_from + density_power(to[j], p);
  }
  // int (W*rho_t) rho_t - int (W*rho_f) rho_f = int (W*(rho_t - rho_f)) (rho_t + rho_f), W even.
  const double interaction = g.cell_volume() * (convolve_density(kernel, drho) * rho_sum).sum() / (2.0 * p);
  return kinetic - interaction;
}

MultiField energy_gradient(const MultiField& mf, const Kernel& kernel, double p) {
  return energy_and_gradient(mf, kernel, p).gradient;
}

std::vector<double> el_residual(const MultiField& mf, std::span<const double> lambda,
                                const Kernel& kernel, double p) {
  if (static_cast<int>(lambda.size()) != mf.size())
    throw InvalidParameter("one multiplier per component required");
  const MultiField grad = energy_gradient(mf, kernel, p);
  std::vector<double> res(mf.size());
  for (int j = 0; j < mf.size(); ++j) {
    if (!std::isfinite(lambda[j])) throw InvalidParameter("multiplier must be finite");
    res[j] = std::sqrt(mass(Field(mf.grid(), grad[j].data + lambda[j] * mf[j].data)));
  }
  return res;
}

}  // namespace hartree
