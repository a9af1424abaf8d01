#include "pwb/quadrature.hpp"

#include <map>
#include <mutex>

#include "pwb/errors.hpp"

namespace pwb {

namespace {

// Legendre P_n(x) and derivative by the three-term recurrence.
void legendre(unsigned n, const Real& x, Real& p, Real& dp) {
  Real p0{1}, p1 = x;
  if (n == 0) {
    p = p0;
    dp = 0;
    return;
  }
  for (unsigned k = 2; k <= n; ++k) {
    Real pk = ((2 * static_cast<int>(k) - 1) * x * p1 - (static_cast<int>(k) - 1) * p0) / static_cast<int>(k);
    p0 = p1;
    p1 = pk;
  }
  p = p1;
  dp = static_cast<int>(n) * (x * p1 - p0) / (x * x - 1);
}

GaussRule make_rule(unsigned n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  Real pi_v = pi();
  Real tol = ten_pow(-static_cast<long>(current_precision()) + 2);
  for (unsigned i = 0; i < (n + 1) / 2; ++i) {
    // Chebyshev-like initial guess, then Newton to full precision.
    Real x = cos(pi_v * (Real(4 * static_cast<int>(i) + 3) / Real(4 * static_cast<int>(n) + 2)));
    Real p, dp;
    for (int it = 0; it < 200; ++it) {
      legendre(n, x, p, dp);
      Real step = p / dp;
      x -= step;
      if (abs(step) < tol) break;
    }
    legendre(n, x, p, dp);
    Real w = 2 / ((1 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.weights[i] = w;
    rule.nodes[n - 1 - i] = x;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) {
    Real p, dp;
    legendre(n, Real(0), p, dp);
    rule.nodes[n / 2] = 0;
    rule.weights[n / 2] = 2 / (dp * dp);
  }
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre(unsigned npoints) {
  static std::mutex mtx;
  static std::map<std::pair<unsigned, unsigned>, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto key = std::make_pair(npoints, current_precision());
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, make_rule(npoints)).first;
  return it->second;
}

Real integrate_panels(const RealFn& f, const Real& a, const Real& b, unsigned panels,
                      unsigned npoints) {
  const GaussRule& rule = gauss_legendre(npoints);
  Real total{0};
  Real h = (b - a) / static_cast<int>(panels);
  for (unsigned p = 0; p < panels; ++p) {
    Real lo = a + h * static_cast<int>(p);
    Real mid = lo + h / 2;
    Real half = h / 2;
    Real acc{0};
    for (size_t i = 0; i < rule.nodes.size(); ++i) acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
    total += acc * half;
  }
  return total;
}

Real integrate_adaptive(const RealFn& f, const Real& a, const Real& b, const Real& tol,
                        unsigned npoints, unsigned max_doublings) {
  unsigned panels = 1;
  Real prev = integrate_panels(f, a, b, panels, npoints);
  for (unsigned d = 0; d < max_doublings; ++d) {
    panels *= 2;
    Real cur = integrate_panels(f, a, b, panels, npoints);
    if (abs(cur - prev) <= tol * (1 + abs(cur))) return cur;
    prev = cur;
  }
  fail(Errc::QuadratureFailure, "no convergence to tolerance " + dec(tol, 3));
}

}  // namespace pwb
