#pragma once

#include <cstdint>
#include <random>

#include "kneadlab/map.hpp"
#include "kneadlab/numeric.hpp"

namespace kneadlab {

inline constexpr std::size_t kBurnIn = 1000;

/// Orbit of a seeded uniformly random start point, used wherever a
/// Birkhoff-typical point stands in for the critical point.
///
/// Floating-point orbits of chaotic maps can collapse onto a repelling fixed
/// point (e.g. q_2 sends |x| < 1e-8 to 1 and then to -1 forever), or land on the
/// critical point. Either event triggers a fresh seeded start with a new burn-in.
/// Restarts are capped so that genuinely attracting behaviour is left alone.
template <class Real>
class BasicTypicalOrbit {
 public:
  static constexpr std::size_t kMaxRestarts = 64;

  BasicTypicalOrbit(const BasicUnimodalMap<Real>& map, std::uint64_t seed,
                    std::size_t burn_in = kBurnIn)
      : map_(map), engine_(seed), burn_in_(burn_in) {
    restart(false);
  }

  Real current() const { return x_; }
  std::size_t restarts() const { return restarts_; }

  /// Returns the current point and advances by one step.
  Real next() {
    const Real out = x_;
    step();
    return out;
  }

 private:
  void restart(bool counted) {
    if (counted) ++restarts_;
    const auto& d = map_.domain();
    x_ = d.lo + Real(uniform01(engine_)) * (d.hi - d.lo);
    for (std::size_t i = 0; i < burn_in_; ++i) step();
  }

  void step() {
    const Real y = map_.evaluate(x_);
    if (restarts_ < kMaxRestarts && collapsed(y)) {
      restart(true);
      return;
    }
    x_ = y;
  }

  bool collapsed(Real y) const {
    if (map_.symbol(y) == Symbol::crit) return true;
    return y == x_ && std::abs(map_.derivative(y)) > 1;
  }

  BasicUnimodalMap<Real> map_;
  std::mt19937_64 engine_;
  std::size_t burn_in_;
  Real x_{0};
  std::size_t restarts_{0};
};

using TypicalOrbit = BasicTypicalOrbit<double>;

}  // namespace kneadlab
