#include "hartree/grid.hpp"

#include <cmath>
#include <numbers>
#include <unsupported/Eigen/FFT>

#include "hartree/errors.hpp"

namespace hartree {

namespace {

Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> engine = [] {
    Eigen::FFT<double> e;
    e.SetFlag(Eigen::FFT<double>::Unscaled);
    return e;
  }();
  return engine;
}

// Applies the 1-D transform along every axis in turn.
void fft_all_axes(const Grid& g, ComplexArray& values, bool inverse) {
  const int n = g.points_per_dim();
  auto& engine = fft_engine();
  thread_local std::vector<Complex> line_in, line_out;
  line_in.resize(n);
  line_out.resize(n);

  if (g.dim() == 1) {
    std::copy(values.data(), values.data() + n, line_in.begin());
    if (inverse)
      engine.inv(values.data(), line_in.data(), n);
    else
      engine.fwd(values.data(), line_in.data(), n);
    return;
  }

  const Eigen::Index total = g.size();
  Eigen::Index stride = total;
  for (int axis = 0; axis < g.dim(); ++axis) {
    stride /= n;
    // Lines along `axis`: start indices have digit `axis` equal to zero.
    const Eigen::Index block = stride * n;
    for (Eigen::Index outer = 0; outer < total; outer += block) {
      for (Eigen::Index inner = 0; inner < stride; ++inner) {
        const Eigen::Index base = outer + inner;
        for (int i = 0; i < n; ++i) line_in[i] = values[base + i * stride];
        if (inverse)
          engine.inv(line_out.data(), line_in.data(), n);
        else
          engine.fwd(line_out.data(), line_in.data(), n);
        for (int i = 0; i < n; ++i) values[base + i * stride] = line_out[i];
      }
    }
  }
}

// Applies an n x n matrix to every line along every axis.
ComplexArray apply_per_axis(const Grid& g, const ComplexArray& values,
                            const Eigen::MatrixXcd& op) {
  const int n = g.points_per_dim();
  ComplexArray out = values;
  Eigen::VectorXcd line(n);
  Eigen::Index stride = g.size();
  for (int axis = 0; axis < g.dim(); ++axis) {
    stride /= n;
    const Eigen::Index block = stride * n;
    for (Eigen::Index outer = 0; outer < g.size(); outer += block) {
      for (Eigen::Index inner = 0; inner < stride; ++inner) {
        const Eigen::Index base = outer + inner;
        for (int i = 0; i < n; ++i) line[i] = out[base + i * stride];
        Eigen::VectorXcd mapped = op * line;
        for (int i = 0; i < n; ++i) out[base + i * stride] = mapped[i];
      }
    }
  }
  return out;
}

void require_finite(const ComplexArray& a, const char* what) {
  if (!a.isFinite().all()) throw NumericalError(std::string("non-finite samples in ") + what);
}

}  // namespace

Grid::Grid(int dim, int points_per_dim, double box_length)
    : dim_(dim), n_(points_per_dim), length_(box_length) {
  if (dim < 1) throw InvalidParameter("grid dimension must be >= 1");
  if (points_per_dim < 2 || points_per_dim % 2 != 0)
    throw InvalidParameter("points per dimension must be even");
  if (!(box_length > 0.0) || !std::isfinite(box_length))
    throw InvalidParameter("box length must be finite and > 0");
  size_ = 1;
  for (int d = 0; d < dim; ++d) size_ *= n_;

  RealArray k2(size_);
  for (Eigen::Index flat = 0; flat < size_; ++flat) {
    double s = 0.0;
    Eigen::Index rest = flat;
    for (int d = 0; d < dim_; ++d) {
      const double k = wavenumber(static_cast<int>(rest % n_));
      s += k * k;
      rest /= n_;
    }
    k2[flat] = s;
  }
  k2_ = std::make_shared<const RealArray>(std::move(k2));
}

double Grid::cell_volume() const { return std::pow(spacing(), dim_); }

double Grid::wavenumber(int i) const {
  const int q = i < n_ / 2 ? i : i - n_;
  return 2.0 * std::numbers::pi * q / length_;
}

std::vector<int> Grid::unflatten(Eigen::Index flat) const {
  std::vector<int> idx(dim_);
  for (int d = dim_ - 1; d >= 0; --d) {
    idx[d] = static_cast<int>(flat % n_);
    flat /= n_;
  }
  return idx;
}

Eigen::Index Grid::flatten(std::span<const int> idx) const {
  Eigen::Index flat = 0;
  for (int d = 0; d < dim_; ++d) flat = flat * n_ + ((idx[d] % n_) + n_) % n_;
  return flat;
}

std::vector<double> Grid::position(Eigen::Index flat) const {
  auto idx = unflatten(flat);
  std::vector<double> x(dim_);
  for (int d = 0; d < dim_; ++d) x[d] = coordinate(idx[d]);
  return x;
}

Field::Field(const Grid& g, ComplexArray values) : grid(g), data(std::move(values)) {
  if (data.size() != g.size()) throw GridMismatch("field length does not match grid");
}

MultiField::MultiField(std::vector<Field> components) : components_(std::move(components)) {
  if (components_.empty()) throw InvalidParameter("multifield needs at least one component");
  for (const auto& c : components_) require_same_grid(c.grid, components_.front().grid);
}

MultiField::MultiField(const Grid& g, int m) : components_(m, Field(g)) {
  if (m < 1) throw InvalidParameter("multifield needs at least one component");
}

void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw GridMismatch("objects live on different grids");
}

ComplexArray transform(const Grid& g, const ComplexArray& values) {
  if (values.size() != g.size()) throw GridMismatch("transform input does not match grid");
  ComplexArray out = values;
  fft_all_axes(g, out, false);
  return out;
}

ComplexArray inverse_transform(const Grid& g, const ComplexArray& spectrum) {
  if (spectrum.size() != g.size()) throw GridMismatch("spectrum does not match grid");
  ComplexArray out = spectrum;
  fft_all_axes(g, out, true);
  out /= static_cast<double>(g.size());
  return out;
}

double spectral_mass(const Grid& g, const ComplexArray& spectrum) {
  return g.cell_volume() / static_cast<double>(g.size()) * spectrum.abs2().sum();
}

double mass(const Field& f) {
  require_finite(f.data, "mass");
  return f.grid.cell_volume() * f.data.abs2().sum();
}

double grad_norm_sq(const Field& f) {
  require_finite(f.data, "grad_norm_sq");
  const ComplexArray spec = transform(f);
  return f.grid.cell_volume() / static_cast<double>(f.grid.size()) *
         (f.grid.k_squared() * spec.abs2()).sum();
}

double h1_norm_sq(const Field& f) { return mass(f) + grad_norm_sq(f); }

double lp_norm(const Field& f, double s) {
  if (!(s >= 1.0)) throw InvalidParameter("lp_norm needs s >= 1");
  require_finite(f.data, "lp_norm");
  return std::pow(f.grid.cell_volume() * f.data.abs().pow(s).sum(), 1.0 / s);
}

Complex inner(const Field& a, const Field& b) {
  require_same_grid(a.grid, b.grid);
  return a.grid.cell_volume() * (a.data.conjugate() * b.data).sum();
}

Field neg_laplacian(const Field& f) {
  ComplexArray spec = transform(f);
  spec *= f.grid.k_squared();
  return Field(f.grid, inverse_transform(f.grid, spec));
}

Field dilate(const Field& f, double theta) {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw InvalidParameter("dilation factor must be > 0");
  const Grid& g = f.grid;
  const int n = g.points_per_dim();
  const double L = g.box_length();

  // Interpolation matrix: samples at theta*x_i from samples at x_j. The
  // Nyquist mode is taken as a cosine so real data stays real.
  Eigen::MatrixXcd eval(n, n), dft(n, n);
  for (int i = 0; i < n; ++i) {
    const double y = theta * g.coordinate(i) + 0.5 * L;
    for (int q = 0; q < n; ++q) {
      const double k = g.wavenumber(q);
      eval(i, q) = (q == n / 2) ? Complex(std::cos(k * y), 0.0) : std::polar(1.0, k * y);
    }
  }
  for (int q = 0; q < n; ++q)
    for (int j = 0; j < n; ++j) dft(q, j) = std::polar(1.0, -2.0 * std::numbers::pi * q * j / n);
  const Eigen::MatrixXcd op = eval * dft / static_cast<double>(n);

  ComplexArray out = apply_per_axis(g, f.data, op);
  out *= std::pow(theta, 0.5 * g.dim());
  return Field(g, std::move(out));
}

Field shift(const Field& f, std::span<const int> cells) {
  const Grid& g = f.grid;
  if (static_cast<int>(cells.size()) != g.dim()) throw InvalidParameter("shift needs one offset per axis");
  Field out(g);
  std::vector<int> idx(g.dim());
  for (Eigen::Index flat = 0; flat < g.size(); ++flat) {
    auto src = g.unflatten(flat);
    for (int d = 0; d < g.dim(); ++d) idx[d] = src[d] + cells[d];
    out.data[g.flatten(idx)] = f.data[flat];
  }
  return out;
}

Field translate(const Field& f, std::span<const double> displacement) {
  const Grid& g = f.grid;
  const int n = g.points_per_dim();
  if (static_cast<int>(displacement.size()) != g.dim())
    throw InvalidParameter("translate needs one displacement per axis");

  std::vector<std::vector<Complex>> factors(g.dim(), std::vector<Complex>(n));
  for (int d = 0; d < g.dim(); ++d)
    for (int q = 0; q < n; ++q) {
      const double phase = -g.wavenumber(q) * displacement[d];
      factors[d][q] = (q == n / 2) ? Complex(std::cos(phase), 0.0) : std::polar(1.0, phase);
    }

  ComplexArray spec = transform(f);
  for (Eigen::Index flat = 0; flat < g.size(); ++flat) {
    Eigen::Index rest = flat;
    Complex factor = 1.0;
    for (int d = g.dim() - 1; d >= 0; --d) {
      factor *= factors[d][rest % n];
      rest /= n;
    }
    spec[flat] *= factor;
  }
  return Field(g, inverse_transform(g, spec));
}

}  // namespace hartree
