#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace hartree {

using Complex = std::complex<double>;
using RealArray = Eigen::ArrayXd;
using ComplexArray = Eigen::ArrayXcd;

/// Uniform periodic grid on the box [-L/2, L/2)^N with n points per axis.
///
/// Samples are stored axis-major: the flat index of (i_0, ..., i_{N-1}) is
/// sum_d i_d n^{N-1-d}, so the last axis varies fastest. Point i on an axis
/// sits at x = -L/2 + i h, h = L/n; the origin is index n/2.
class Grid {
 public:
  Grid() = default;
  Grid(int dim, int points_per_dim, double box_length);

  int dim() const { return dim_; }
  int points_per_dim() const { return n_; }
  double box_length() const { return length_; }
  Eigen::Index size() const { return size_; }
  double spacing() const { return length_ / n_; }
  double cell_volume() const;

  double coordinate(int i) const { return -0.5 * length_ + i * spacing(); }
  /// Angular wavenumber of DFT bin i (negative frequencies above n/2).
  double wavenumber(int i) const;

  /// |k|^2 per flat spectral index.
  const RealArray& k_squared() const { return *k2_; }

  std::vector<int> unflatten(Eigen::Index flat) const;
  Eigen::Index flatten(std::span<const int> idx) const;

  /// Position of the flat index in the box.
  std::vector<double> position(Eigen::Index flat) const;

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.dim_ == b.dim_ && a.n_ == b.n_ && a.length_ == b.length_;
  }

 private:
  int dim_ = 0;
  int n_ = 0;
  double length_ = 0.0;
  Eigen::Index size_ = 0;
  std::shared_ptr<const RealArray> k2_;
};

/// Complex samples of one function on a grid.
struct Field {
  Grid grid;
  ComplexArray data;

  Field() = default;
  explicit Field(const Grid& g) : grid(g), data(ComplexArray::Zero(g.size())) {}
  Field(const Grid& g, ComplexArray values);
};

/// m fields sharing one grid.
class MultiField {
 public:
  MultiField() = default;
  explicit MultiField(std::vector<Field> components);
  MultiField(const Grid& g, int m);

  int size() const { return static_cast<int>(components_.size()); }
  const Grid& grid() const { return components_.front().grid; }

  Field& operator[](int j) { return components_[j]; }
  const Field& operator[](int j) const { return components_[j]; }

  auto begin() { return components_.begin(); }
  auto end() { return components_.end(); }
  auto begin() const { return components_.begin(); }
  auto end() const { return components_.end(); }

 private:
  std::vector<Field> components_;
};

/// Samples fn(position) at every grid point.
template <typename Fn>
Field sample(const Grid& g, Fn&& fn) {
  Field f(g);
  for (Eigen::Index i = 0; i < g.size(); ++i) f.data[i] = fn(g.position(i));
  return f;
}

void require_same_grid(const Grid& a, const Grid& b);

// -- spectral transforms ----------------------------------------------------
//
// Forward transform is the unnormalized DFT over all axes; the inverse
// carries the 1/n^N. Each thread owns its own FFT plans.

ComplexArray transform(const Grid& g, const ComplexArray& values);
ComplexArray inverse_transform(const Grid& g, const ComplexArray& spectrum);
inline ComplexArray transform(const Field& f) { return transform(f.grid, f.data); }

/// cell_volume / n^N * sum |F_k|^2, equal to mass() by Parseval.
double spectral_mass(const Grid& g, const ComplexArray& spectrum);

// -- norms and inner products -----------------------------------------------

double mass(const Field& f);
/// ||grad f||^2, evaluated spectrally.
double grad_norm_sq(const Field& f);
double h1_norm_sq(const Field& f);
double lp_norm(const Field& f, double s);

/// cell_volume * sum conj(a) b.
Complex inner(const Field& a, const Field& b);

/// -Laplacian of f.
Field neg_laplacian(const Field& f);

// -- geometric operations ---------------------------------------------------

/// u(x) -> theta^{N/2} u(theta x), by trigonometric interpolation along each
/// axis. Throws InvalidParameter for theta <= 0.
Field dilate(const Field& f, double theta);

/// Exact circular shift by whole cells: result(x) = f(x - cells*h).
Field shift(const Field& f, std::span<const int> cells);

/// Spectral translation by an arbitrary displacement: result(x) = f(x - s).
Field translate(const Field& f, std::span<const double> displacement);

}  // namespace hartree
