#ifndef MEDIANFORGE_PROFILE_HPP
#define MEDIANFORGE_PROFILE_HPP

#include "medianforge/core.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

namespace medianforge {

/// A multiset of preferred vectors, stored as distinct columns with integer
/// multiplicities so that e.g. 2000 copies of four atoms stay four columns.
class VoterProfile {
 public:
  explicit VoterProfile(Matrix points)
      : VoterProfile(points, std::vector<std::int64_t>(static_cast<std::size_t>(points.cols()), 1)) {}

  VoterProfile(Matrix points, std::vector<std::int64_t> multiplicity)
      : points_(std::move(points)), multiplicity_(std::move(multiplicity)) {
    if (points_.cols() == 0) throw Error(Errc::invalid_argument, "profile has no voters");
    if (points_.rows() == 0) throw Error(Errc::invalid_argument, "profile has dimension 0");
    if (static_cast<Index>(multiplicity_.size()) != points_.cols()) {
      throw Error(Errc::dimension_mismatch, "multiplicity count differs from voter count");
    }
    if (!points_.allFinite()) throw Error(Errc::invalid_argument, "profile has non-finite entries");
    for (auto m : multiplicity_) {
      if (m <= 0) throw Error(Errc::invalid_argument, "multiplicities must be positive");
    }
  }

  static VoterProfile from_points(const std::vector<Point>& pts) {
    if (pts.empty()) throw Error(Errc::invalid_argument, "profile has no voters");
    Matrix m(pts.front().size(), static_cast<Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) {
      require_same_dim(pts[i].size(), m.rows(), "VoterProfile::from_points");
      m.col(static_cast<Index>(i)) = pts[i];
    }
    return VoterProfile(std::move(m));
  }

  Index dim() const noexcept { return points_.rows(); }
  /// Number of distinct stored columns.
  Index size() const noexcept { return points_.cols(); }
  /// Number of voters counted with multiplicity.
  std::int64_t voter_count() const {
    return std::accumulate(multiplicity_.begin(), multiplicity_.end(), std::int64_t{0});
  }

  const Matrix& points() const noexcept { return points_; }
  Point point(Index i) const { return points_.col(i); }
  std::int64_t multiplicity(Index i) const { return multiplicity_[static_cast<std::size_t>(i)]; }
  const std::vector<std::int64_t>& multiplicities() const noexcept { return multiplicity_; }

  /// This profile with `count` extra copies of `p` appended.
  VoterProfile with(const Point& p, std::int64_t count = 1) const {
    require_same_dim(p.size(), dim(), "VoterProfile::with");
    Matrix m(dim(), size() + 1);
    m.leftCols(size()) = points_;
    m.col(size()) = p;
    auto mult = multiplicity_;
    mult.push_back(count);
    return VoterProfile(std::move(m), std::move(mult));
  }

  /// Applies z -> a z + b to every voter.
  VoterProfile affine_image(const Matrix& a, const Vector& b) const {
    require_same_dim(a.cols(), dim(), "VoterProfile::affine_image");
    require_same_dim(b.size(), a.rows(), "VoterProfile::affine_image");
    Matrix m = a * points_;
    m.colwise() += b;
    return VoterProfile(std::move(m), multiplicity_);
  }

 private:
  Matrix points_;
  std::vector<std::int64_t> multiplicity_;
};

/// Voters with positive weights. `raw_weights` keeps the caller's scale
/// (e.g. integer counts) for exact order statistics; `weights` sums to 1.
class WeightedProfile {
 public:
  WeightedProfile(Matrix points, Vector raw_weights)
      : points_(std::move(points)), raw_(std::move(raw_weights)) {
    if (points_.cols() == 0) throw Error(Errc::invalid_argument, "profile has no voters");
    if (points_.rows() == 0) throw Error(Errc::invalid_argument, "profile has dimension 0");
    require_same_dim(raw_.size(), points_.cols(), "WeightedProfile weights");
    if (!points_.allFinite()) throw Error(Errc::invalid_argument, "profile has non-finite entries");
    for (Index i = 0; i < raw_.size(); ++i) {
      if (!(raw_(i) > 0.0) || !std::isfinite(raw_(i))) {
        throw Error(Errc::invalid_argument, "weights must be finite and strictly positive");
      }
    }
    total_ = raw_.sum();
    weights_ = raw_ / total_;
  }

  explicit WeightedProfile(const VoterProfile& p)
      : WeightedProfile(p.points(), counts_of(p)) {}

  /// Equal weights.
  explicit WeightedProfile(const Matrix& points)
      : WeightedProfile(points, Vector::Ones(points.cols())) {}

  Index dim() const noexcept { return points_.rows(); }
  Index size() const noexcept { return points_.cols(); }
  const Matrix& points() const noexcept { return points_; }
  Point point(Index i) const { return points_.col(i); }
  const Vector& weights() const noexcept { return weights_; }
  const Vector& raw_weights() const noexcept { return raw_; }
  double total_raw_weight() const noexcept { return total_; }

  WeightedProfile affine_image(const Matrix& a, const Vector& b) const {
    require_same_dim(a.cols(), dim(), "WeightedProfile::affine_image");
    Matrix m = a * points_;
    m.colwise() += b;
    return WeightedProfile(std::move(m), raw_);
  }

  /// Columns sorted lexicographically by (coordinates, weight). Aggregates
  /// sum in this order so results do not depend on voter labels.
  WeightedProfile canonical() const {
    std::vector<Index> order(static_cast<std::size_t>(size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [this](Index a, Index b) {
      for (Index r = 0; r < dim(); ++r) {
        if (points_(r, a) != points_(r, b)) return points_(r, a) < points_(r, b);
      }
      return raw_(a) < raw_(b);
    });
    return permuted(order);
  }

  WeightedProfile permuted(const std::vector<Index>& order) const {
    Matrix m(dim(), size());
    Vector w(size());
    for (Index i = 0; i < size(); ++i) {
      m.col(i) = points_.col(order[static_cast<std::size_t>(i)]);
      w(i) = raw_(order[static_cast<std::size_t>(i)]);
    }
    return WeightedProfile(std::move(m), std::move(w));
  }

 private:
  static Vector counts_of(const VoterProfile& p) {
    Vector w(p.size());
    for (Index i = 0; i < p.size(); ++i) w(i) = static_cast<double>(p.multiplicity(i));
    return w;
  }

  Matrix points_;
  Vector raw_;
  Vector weights_;
  double total_ = 0.0;
};

/// Dimension of the affine hull of the profile (numerical rank of the
/// centered point cloud).
inline Index affine_dimension(const Matrix& points) {
  if (points.cols() <= 1) return 0;
  const Vector center = points.rowwise().mean();
  const Matrix centered = points.colwise() - center;
  const double scale = centered.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0;
  Eigen::ColPivHouseholderQR<Matrix> qr(centered.transpose() / scale);
  qr.setThreshold(1e-9);
  return qr.rank();
}

}  // namespace medianforge

#endif  // MEDIANFORGE_PROFILE_HPP
