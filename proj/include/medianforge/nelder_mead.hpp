#ifndef MEDIANFORGE_NELDER_MEAD_HPP
#define MEDIANFORGE_NELDER_MEAD_HPP

#include "medianforge/core.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <vector>

namespace medianforge {

struct NelderMeadOptions {
  int max_evaluations = 2000;
  /// Stop when the simplex diameter falls below this.
  double x_tol = 1e-12;
  /// Stop when best and worst values differ by less than this.
  double f_tol = 0.0;
};

struct NelderMeadResult {
  Vector x;
  double value = kInf;
  int evaluations = 0;
};

/// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2) from an explicit initial simplex of d + 1 vertices.
inline NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& f,
                                    std::vector<Vector> simplex, const NelderMeadOptions& opt) {
  const std::size_t n = simplex.size();
  if (n < 2) throw Error(Errc::invalid_argument, "nelder_mead needs at least two vertices");
  NelderMeadResult res;
  std::vector<double> val(n);
  auto eval = [&](const Vector& x) {
    ++res.evaluations;
    return f(x);
  };
  for (std::size_t i = 0; i < n; ++i) val[i] = eval(simplex[i]);

  std::vector<std::size_t> order(n);
  while (res.evaluations < opt.max_evaluations) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return val[a] < val[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[n - 2];

    double diameter = 0.0;
    for (std::size_t i = 0; i < n; ++i) diameter = std::max(diameter, (simplex[i] - simplex[best]).norm());
    if (diameter <= opt.x_tol) break;
    if (val[worst] - val[best] <= opt.f_tol && opt.f_tol > 0.0) break;

    Vector centroid = Vector::Zero(simplex[0].size());
    for (std::size_t i = 0; i < n; ++i) {
      if (i != worst) centroid += simplex[i];
    }
    centroid /= static_cast<double>(n - 1);

    const Vector xr = centroid + (centroid - simplex[worst]);
    const double fr = eval(xr);
    if (fr < val[best]) {
      const Vector xe = centroid + 2.0 * (centroid - simplex[worst]);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[worst] = xe;
        val[worst] = fe;
      } else {
        simplex[worst] = xr;
        val[worst] = fr;
      }
      continue;
    }
    if (fr < val[second]) {
      simplex[worst] = xr;
      val[worst] = fr;
      continue;
    }
    const bool outside = fr < val[worst];
    const Vector xc = outside ? Vector(centroid + 0.5 * (xr - centroid))
                              : Vector(centroid + 0.5 * (simplex[worst] - centroid));
    const double fc = eval(xc);
    if (fc < (outside ? fr : val[worst])) {
      simplex[worst] = xc;
      val[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == best) continue;
      simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
      val[i] = eval(simplex[i]);
    }
  }
  const auto it = std::min_element(val.begin(), val.end());
  res.value = *it;
  res.x = simplex[static_cast<std::size_t>(it - val.begin())];
  return res;
}

}  // namespace medianforge

#endif  // MEDIANFORGE_NELDER_MEAD_HPP
