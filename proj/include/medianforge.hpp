#ifndef MEDIANFORGE_HPP
#define MEDIANFORGE_HPP

#include "medianforge/core.hpp"
#include "medianforge/hull.hpp"
#include "medianforge/median_solvers.hpp"
#include "medianforge/nelder_mead.hpp"
#include "medianforge/profile.hpp"
#include "medianforge/simulation.hpp"
#include "medianforge/skewness.hpp"
#include "medianforge/strategy_analysis.hpp"
#include "medianforge/vector_core.hpp"

#endif  // MEDIANFORGE_HPP
