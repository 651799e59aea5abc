#include "resdiv/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <thread>

#include <boost/math/special_functions/legendre.hpp>

namespace resdiv {

namespace {

constexpr std::size_t kChunk = 4096;
constexpr double kPi = std::numbers::pi;

double factorial(int k) {
  double f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

double radical_inverse(std::size_t i, int base) {
  double inv = 1.0 / base, f = inv, r = 0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

}  // namespace

double Region::measure() const {
  switch (kind) {
    case RegionKind::ball: return std::pow(kPi, n) * std::pow(rho1, 2 * n) / factorial(n);
    case RegionKind::annulus:
      return std::pow(kPi, n) * (std::pow(rho1, 2 * n) - std::pow(rho0, 2 * n)) / factorial(n);
    case RegionKind::sphere: return 2 * std::pow(kPi, n) / factorial(n - 1);
  }
  return 0;
}

const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int order) {
  static std::mutex mu;
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  if (order < 1) throw ContractViolation("gauss_legendre: order must be positive");
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;
  std::vector<double> x, w;
  // boost returns the nonnegative zeros in increasing order
  const auto zeros = boost::math::legendre_p_zeros<double>(order);
  for (double r : zeros) {
    const double dp = boost::math::legendre_p_prime<double>(order, r);
    const double wr = 2.0 / ((1.0 - r * r) * dp * dp);
    if (r == 0.0) {
      x.push_back(0.0);
      w.push_back(wr);
    } else {
      x.push_back(r);
      w.push_back(wr);
      x.push_back(-r);
      w.push_back(wr);
    }
  }
  std::vector<std::size_t> idx(x.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::pair<std::vector<double>, std::vector<double>> out;
  for (auto i : idx) {
    out.first.push_back(x[i]);
    out.second.push_back(w[i]);
  }
  return cache.emplace(order, std::move(out)).first->second;
}

QuadratureRule::QuadratureRule(Region region, QuadOrders orders) : region_(region), orders_(orders) {
  const int n = region.n;
  if (n < 1 || n > kMaxDim) throw ContractViolation("make_rule: unsupported dimension");
  if (orders.radial < 1 || orders.angular < 1 || orders.latitude < 0 || orders.grading < 0)
    throw ContractViolation("make_rule: orders must be positive");
  if (orders_.latitude == 0) orders_.latitude = orders.radial;
  if (region.kind != RegionKind::sphere && !(region.rho1 > region.rho0 && region.rho0 >= 0))
    throw ContractViolation("make_rule: invalid radii");

  // radial variable
  if (region.kind == RegionKind::sphere) {
    s_ = {1.0};
    ws_ = {std::pow(2.0, 1 - n)};
  } else {
    const double lo = region.kind == RegionKind::annulus ? region.rho0 * region.rho0 : 0.0;
    const double hi = region.rho1 * region.rho1;
    std::vector<double> b{lo, hi};
    const double br = orders.break_radius * orders.break_radius;
    if (br > lo && br < hi) b.push_back(br);
    if (region.kind == RegionKind::ball && orders.grading > 0) {
      double base = hi;
      for (double x : b)
        if (x > 0) base = std::min(base, x);
      for (int g = 1; g <= orders.grading; ++g) b.push_back(base * std::pow(0.25, g));
    }
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    breaks_ = b;
    const auto& [x, w] = gauss_legendre(orders.radial);
    for (std::size_t p = 0; p + 1 < b.size(); ++p) {
      const double a = b[p], c = b[p + 1], half = 0.5 * (c - a);
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double s = a + half * (x[i] + 1.0);
        s_.push_back(s);
        ws_.push_back(half * w[i] * std::pow(2.0, -n) * std::pow(s, n - 1));
      }
    }
  }

  // simplex
  const auto& [u, wu] = gauss_legendre(orders_.latitude);
  if (n == 1) {
    t_ = {{1.0}};
    wt_ = {1.0};
  } else if (n == 2) {
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double a = 0.5 * (u[i] + 1.0);
      t_.push_back({a, 1.0 - a});
      wt_.push_back(0.5 * wu[i]);
    }
  } else {
    for (std::size_t i = 0; i < u.size(); ++i)
      for (std::size_t j = 0; j < u.size(); ++j) {
        const double a = 0.5 * (u[i] + 1.0), v = 0.5 * (u[j] + 1.0);
        t_.push_back({a, (1.0 - a) * v, (1.0 - a) * (1.0 - v)});
        wt_.push_back(0.25 * wu[i] * wu[j] * (1.0 - a));
      }
  }

  for (int k = 0; k < orders.angular; ++k) alpha_.push_back(2 * kPi * k / orders.angular);
}

QuadratureRule QuadratureRule::halton(Region region, std::size_t count) {
  if (region.kind == RegionKind::sphere) throw ContractViolation("halton: solid regions only");
  if (count == 0) throw ContractViolation("halton: empty rule");
  QuadratureRule q;
  q.region_ = region;
  q.halton_ = count;
  return q;
}

std::size_t QuadratureRule::size() const {
  if (halton_) return halton_;
  std::size_t a = 1;
  for (int j = 0; j < region_.n; ++j) a *= alpha_.size();
  return s_.size() * t_.size() * a;
}

void QuadratureRule::node(std::size_t i, CPoint& zeta, double& w) const {
  const int n = region_.n;
  zeta.resize(n);
  if (halton_) {
    static const int primes[] = {2, 3, 5, 7, 11, 13, 17};
    const std::size_t idx = i + 1;
    const double u = radical_inverse(idx, primes[0]);
    const double lo = region_.kind == RegionKind::annulus ? std::pow(region_.rho0, 2 * n) : 0.0;
    const double s = std::pow(lo + u * (std::pow(region_.rho1, 2 * n) - lo), 1.0 / n);
    std::vector<double> t(n, 1.0);
    if (n == 2) {
      const double a = radical_inverse(idx, primes[1]);
      t = {a, 1.0 - a};
    } else if (n == 3) {
      double a = radical_inverse(idx, primes[1]), b = radical_inverse(idx, primes[2]);
      if (a > b) std::swap(a, b);
      t = {a, b - a, 1.0 - b};
    }
    for (int j = 0; j < n; ++j) {
      const double al = 2 * kPi * radical_inverse(idx, primes[3 + j]);
      zeta[j] = std::polar(std::sqrt(s * t[j]), al);
    }
    w = region_.measure() / static_cast<double>(halton_);
    return;
  }
  const std::size_t A = alpha_.size();
  std::size_t rest = i;
  std::size_t ia[kMaxDim];
  for (int j = n - 1; j >= 0; --j) {
    ia[j] = rest % A;
    rest /= A;
  }
  const std::size_t it = rest % t_.size();
  const std::size_t ir = rest / t_.size();
  const double s = s_[ir];
  double aw = 1.0;
  for (int j = 0; j < n; ++j) {
    zeta[j] = std::polar(std::sqrt(std::max(0.0, s * t_[it][j])), alpha_[ia[j]]);
    aw *= 2 * kPi / static_cast<double>(A);
  }
  w = ws_[ir] * wt_[it] * aw;
}

double QuadratureRule::total_weight() const {
  const auto r = integrate_batch(*this, 1, [](const CPoint&, double w, cplx* acc) { acc[0] += w; });
  return r[0].real();
}

std::vector<cplx> integrate_batch(const QuadratureRule& rule, std::size_t K, const NodeKernel& fn, int threads) {
  const std::size_t N = rule.size();
  const std::size_t chunks = (N + kChunk - 1) / kChunk;
  std::vector<std::vector<cplx>> part(chunks, std::vector<cplx>(K));
  auto work = [&](std::size_t first, std::size_t stride) {
    CPoint zeta;
    for (std::size_t c = first; c < chunks; c += stride) {
      cplx* acc = part[c].data();
      const std::size_t hi = std::min(N, (c + 1) * kChunk);
      for (std::size_t i = c * kChunk; i < hi; ++i) {
        double w;
        rule.node(i, zeta, w);
        fn(zeta, w, acc);
      }
    }
  };
  const std::size_t T = std::max(1, threads);
  if (T == 1 || chunks < 2) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < T; ++t) pool.emplace_back(work, t, T);
    for (auto& th : pool) th.join();
  }
  // pairwise combination in fixed order
  for (std::size_t width = 1; width < chunks; width *= 2)
    for (std::size_t c = 0; c + width < chunks; c += 2 * width)
      for (std::size_t k = 0; k < K; ++k) part[c][k] += part[c + width][k];
  return chunks ? part[0] : std::vector<cplx>(K);
}

ExtElem radial_differential(const Layout& L, const CPoint& zeta) {
  double r2 = 0;
  for (auto c : zeta) r2 += std::norm(c);
  const double r = std::sqrt(r2);
  ExtElem dr(L);
  for (int j = 0; j < L.n; ++j) {
    dr.push(key::make(L.holo_bit(j), 0), std::conj(zeta[j]) / (2 * r));
    dr.push(key::make(L.anti_bit(j), 0), zeta[j] / (2 * r));
  }
  dr.normalize();
  return dr;
}

cplx form_density(const ExtElem& x, const CPoint& zeta, RegionKind kind) {
  const Layout& L = x.layout();
  const cplx conv = lebesgue_factor(L.n) * static_cast<double>(interleave_sign(L.n));
  if (kind == RegionKind::sphere) return wedge(radial_differential(L, zeta), x).coeff(key::make(L.form_mask(), 0)) * conv;
  return x.coeff(key::make(L.form_mask(), 0)) * conv;
}

namespace {

void check_meta(const FormField& field, const QuadratureRule& rule) {
  const int n = rule.region().n;
  if (field.layout.n != n) throw ContractViolation("integrate: field dimension differs from the rule");
  if (field.meta.max_holo > n || field.meta.max_anti > n)
    throw ContractViolation("integrate: field meta exceeds the top degree");
}

}  // namespace

cplx integrate(const FormField& field, const CPoint& z, double eps, const QuadratureRule& rule, int threads) {
  check_meta(field, rule);
  const RegionKind kind = rule.region().kind;
  auto r = integrate_batch(
      rule, 1, [&](const CPoint& zeta, double w, cplx* acc) { acc[0] += w * form_density(field(zeta, z, eps), zeta, kind); },
      threads);
  return r[0];
}

std::vector<cplx> integrate_frames(const FormField& field, const CPoint& z, double eps, const QuadratureRule& rule,
                                   const std::vector<MonoKey>& keys, int threads) {
  check_meta(field, rule);
  const RegionKind kind = rule.region().kind;
  const Layout& L = field.layout;
  std::vector<MonoKey> sorted = keys;
  std::sort(sorted.begin(), sorted.end());
  auto r = integrate_batch(
      rule, keys.size(),
      [&](const CPoint& zeta, double w, cplx* acc) {
        ExtElem x = field(zeta, z, eps);
        if (kind == RegionKind::sphere) x = wedge(radial_differential(L, zeta), x);
        for (const auto& [k, d] : top_densities(x)) {
          auto it = std::lower_bound(sorted.begin(), sorted.end(), k);
          if (it != sorted.end() && *it == k) acc[it - sorted.begin()] += w * d;
        }
      },
      threads);
  std::vector<cplx> out(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i)
    out[i] = r[std::lower_bound(sorted.begin(), sorted.end(), keys[i]) - sorted.begin()];
  return out;
}

}  // namespace resdiv
