// Builtin statistical manifolds, each in one global working chart.
//
//   euclidean(n)            flat, g = I, nabla = nabla* = 0
//   sphere(2, r)            round metric in (theta, phi), Levi-Civita for both
//   categorical(n)          natural parameters theta, psi = ln(1 + sum e^theta)
//   gaussian1d              natural parameters (mu/s^2, -1/(2 s^2))
//   alpha_categorical(n, a) mixture coordinates, Fisher metric, +-a connections
//
// For the exponential families the primal connection is the one that is flat
// in the natural chart, so Gamma = 0 and Gamma*_ijk = d_i d_j d_k psi.

#include "builtin_models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dualgeo::detail {
namespace {

constexpr double kProbFloor = 1e-3;

// Uniform point of the simplex with every entry >= floor.
std::vector<double> sample_probabilities(Rng& rng, int n_outcomes, double floor) {
  std::vector<double> w(static_cast<std::size_t>(n_outcomes));
  double total = 0.0;
  for (auto& x : w) {
    x = -std::log1p(-rng.uniform());
    total += x;
  }
  const double scale = 1.0 - floor * n_outcomes;
  for (auto& x : w) x = floor + scale * x / total;
  return w;
}

std::vector<double> full_probabilities(std::span<const double> probs, int n) {
  std::vector<double> full;
  if (static_cast<int>(probs.size()) == n + 1) {
    full.assign(probs.begin(), probs.end());
  } else if (static_cast<int>(probs.size()) == n) {
    double rest = 1.0;
    for (double p : probs) rest -= p;
    full.push_back(rest);
    full.insert(full.end(), probs.begin(), probs.end());
  } else {
    throw InvalidModelSpec("expected " + std::to_string(n) + " or " + std::to_string(n + 1) +
                           " probabilities");
  }
  double total = 0.0;
  for (double p : full) {
    if (!(p > 0.0)) throw PointOutOfDomain("probabilities must be positive");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw PointOutOfDomain("probabilities must sum to 1");
  return full;
}

// ---------------------------------------------------------------------------

class Euclidean final : public ModelFamily {
 public:
  explicit Euclidean(int n) : n_(n) {}

  bool contains(const Vec& x) const override { return x.allFinite(); }
  Mat metric(const Vec&) const override { return Mat::Identity(n_, n_); }
  void christoffel(const Vec&, ConnectionKind, Christoffel& out) const override {
    out.reset(n_);
  }

  bool has_oracle() const override { return true; }
  double oracle(const Vec& p, const Vec& q) const override { return 0.5 * (q - p).squaredNorm(); }

  Vec sample(Rng& rng) const override {
    Vec x(n_);
    for (int i = 0; i < n_; ++i) x[i] = rng.uniform(-2.0, 2.0);
    return x;
  }
  Vec reference_point() const override { return Vec::Zero(n_); }

 private:
  int n_;
};

// ---------------------------------------------------------------------------

class Sphere final : public ModelFamily {
 public:
  explicit Sphere(double r) : r2_(r * r) {}

  bool contains(const Vec& x) const override {
    return x.allFinite() && x[0] > kPolarCap && x[0] < std::numbers::pi - kPolarCap;
  }
  Mat metric(const Vec& x) const override {
    const double s = std::sin(x[0]);
    Mat g = Mat::Zero(2, 2);
    g(0, 0) = r2_;
    g(1, 1) = r2_ * s * s;
    return g;
  }
  // Only d_theta g_phiphi = r^2 sin(2 theta) is nonzero.
  void christoffel(const Vec& x, ConnectionKind, Christoffel& out) const override {
    out.reset(2);
    const double h = 0.5 * r2_ * std::sin(2.0 * x[0]);
    out(0, 1, 1) = h;
    out(1, 0, 1) = h;
    out(1, 1, 0) = -h;
  }

  Vec sample(Rng& rng) const override {
    Vec x(2);
    x[0] = rng.uniform(0.6, std::numbers::pi - 0.6);
    x[1] = rng.uniform(-1.0, 1.0);
    return x;
  }
  Vec reference_point() const override {
    Vec x(2);
    x << std::numbers::pi / 2, 0.0;
    return x;
  }

  static constexpr double kPolarCap = 0.1;

 private:
  double r2_;
};

// ---------------------------------------------------------------------------

// Outcome probabilities (p_1..p_n) of natural parameters theta; p_0 returned
// separately.
Vec softmax_tail(const Vec& theta, double& p0) {
  const double m = std::max(0.0, theta.maxCoeff());
  Vec e = (theta.array() - m).exp().matrix();
  const double e0 = std::exp(-m);
  const double z = e0 + e.sum();
  p0 = e0 / z;
  return e / z;
}

class Categorical final : public ModelFamily {
 public:
  explicit Categorical(int n) : n_(n) {}

  bool contains(const Vec& x) const override {
    if (!x.allFinite()) return false;
    double p0 = 0.0;
    const Vec p = softmax_tail(x, p0);
    return p0 >= kProbFloor && p.minCoeff() >= kProbFloor;
  }

  Mat metric(const Vec& x) const override {
    double p0 = 0.0;
    const Vec p = softmax_tail(x, p0);
    Mat g = -p * p.transpose();
    g.diagonal() += p;
    return g;
  }

  void christoffel(const Vec& x, ConnectionKind kind, Christoffel& out) const override {
    out.reset(n_);
    if (kind == ConnectionKind::Primal) return;
    double p0 = 0.0;
    const Vec p = softmax_tail(x, p0);
    // Third cumulant of the one-hot sufficient statistic.
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        for (int k = 0; k < n_; ++k) {
          double t = 2.0 * p[i] * p[j] * p[k];
          if (i == j) t -= p[i] * p[k];
          if (i == k) t -= p[i] * p[j];
          if (j == k) t -= p[i] * p[j];
          if (i == j && j == k) t += p[i];
          out(i, j, k) = t;
        }
  }

  bool has_oracle() const override { return true; }
  // sum_i q_i ln(q_i / p_i), over all n+1 outcomes.
  double oracle(const Vec& p, const Vec& q) const override {
    double p0 = 0.0;
    double q0 = 0.0;
    const Vec pp = softmax_tail(p, p0);
    const Vec qq = softmax_tail(q, q0);
    double kl = q0 * std::log(q0 / p0);
    for (int i = 0; i < n_; ++i) kl += qq[i] * std::log(qq[i] / pp[i]);
    return kl;
  }

  Vec sample(Rng& rng) const override {
    return from_mixture(sample_probabilities(rng, n_ + 1, kSafeFloor));
  }
  Vec reference_point() const override { return Vec::Zero(n_); }

  Vec from_mixture(std::span<const double> probs) const override {
    const auto full = full_probabilities(probs, n_);
    Vec theta(n_);
    for (int i = 0; i < n_; ++i)
      theta[i] = std::log(full[static_cast<std::size_t>(i) + 1]) - std::log(full[0]);
    return theta;
  }

  static constexpr double kSafeFloor = 0.05;

 private:
  int n_;
};

// ---------------------------------------------------------------------------

// psi(theta) = -theta1^2 / (4 theta2) - ln(-2 theta2) / 2.
class Gaussian1d final : public ModelFamily {
 public:
  bool contains(const Vec& x) const override { return x.allFinite() && x[1] < 0.0; }

  Mat metric(const Vec& x) const override {
    const double a = x[0];
    const double b = x[1];
    Mat g(2, 2);
    g(0, 0) = -1.0 / (2.0 * b);
    g(0, 1) = g(1, 0) = a / (2.0 * b * b);
    g(1, 1) = -a * a / (2.0 * b * b * b) + 1.0 / (2.0 * b * b);
    return g;
  }

  void christoffel(const Vec& x, ConnectionKind kind, Christoffel& out) const override {
    out.reset(2);
    if (kind == ConnectionKind::Primal) return;
    const double a = x[0];
    const double b = x[1];
    const double b2 = b * b;
    const double d112 = 1.0 / (2.0 * b2);
    const double d122 = -a / (b2 * b);
    const double d222 = 3.0 * a * a / (2.0 * b2 * b2) - 1.0 / (b2 * b);
    out(0, 0, 1) = out(0, 1, 0) = out(1, 0, 0) = d112;
    out(0, 1, 1) = out(1, 0, 1) = out(1, 1, 0) = d122;
    out(1, 1, 1) = d222;
  }

  bool has_oracle() const override { return true; }
  // KL(N_q || N_p).
  double oracle(const Vec& p, const Vec& q) const override {
    const auto [mp, vp] = moments(p);
    const auto [mq, vq] = moments(q);
    return 0.5 * std::log(vp / vq) + (vq + (mq - mp) * (mq - mp)) / (2.0 * vp) - 0.5;
  }

  Vec sample(Rng& rng) const override {
    const double mu = rng.uniform(-1.0, 1.0);
    const double sigma = std::sqrt(rng.uniform(0.5, 2.0));
    return natural(mu, sigma);
  }
  Vec reference_point() const override { return natural(0.0, 1.0); }

  static Vec natural(double mu, double sigma) {
    Vec x(2);
    x << mu / (sigma * sigma), -1.0 / (2.0 * sigma * sigma);
    return x;
  }
  static std::pair<double, double> moments(const Vec& x) {
    const double var = -1.0 / (2.0 * x[1]);
    return {x[0] * var, var};
  }
};

// ---------------------------------------------------------------------------

// Mixture coordinates eta_i = p_i (i = 1..n), p_0 = 1 - sum eta.
// Amari-Chentsov tensor T_ijk = delta_ijk / p_i^2 - 1 / p_0^2, and
// Gamma^(a) = Gamma^LC - (a/2) T with Gamma^LC = -T/2 in this chart.
class AlphaCategorical final : public ModelFamily {
 public:
  AlphaCategorical(int n, double alpha) : n_(n), alpha_(alpha) {}

  bool contains(const Vec& x) const override {
    if (!x.allFinite()) return false;
    return x.minCoeff() >= kProbFloor && 1.0 - x.sum() >= kProbFloor;
  }

  Mat metric(const Vec& x) const override {
    const double p0 = 1.0 - x.sum();
    Mat g = Mat::Constant(n_, n_, 1.0 / p0);
    g.diagonal() += x.cwiseInverse();
    return g;
  }

  void christoffel(const Vec& x, ConnectionKind kind, Christoffel& out) const override {
    out.reset(n_);
    const double a = kind == ConnectionKind::Primal ? alpha_ : -alpha_;
    const double scale = -0.5 * (1.0 + a);
    const double p0 = 1.0 - x.sum();
    const double off = -scale / (p0 * p0);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        for (int k = 0; k < n_; ++k) out(i, j, k) = off;
    for (int i = 0; i < n_; ++i) out(i, i, i) += scale / (x[i] * x[i]);
  }

  Vec sample(Rng& rng) const override {
    return from_mixture(sample_probabilities(rng, n_ + 1, kSafeFloor));
  }
  Vec reference_point() const override { return Vec::Constant(n_, 1.0 / (n_ + 1)); }

  Vec from_mixture(std::span<const double> probs) const override {
    const auto full = full_probabilities(probs, n_);
    Vec eta(n_);
    for (int i = 0; i < n_; ++i) eta[i] = full[static_cast<std::size_t>(i) + 1];
    return eta;
  }

  static constexpr double kSafeFloor = 0.1;

 private:
  int n_;
  double alpha_;
};

int integral_param(double v, std::string_view what) {
  if (!(v >= 1.0) || v != std::floor(v) || v > kMaxDim)
    throw InvalidModelSpec(std::string(what) + " must be an integer in [1, " +
                           std::to_string(kMaxDim) + "]");
  return static_cast<int>(v);
}

}  // namespace

ManifoldModel build_model(std::string_view name, std::span<const double> params) {
  const std::vector<double> stored(params.begin(), params.end());
  auto expect_count = [&](std::size_t lo, std::size_t hi) {
    if (params.size() < lo || params.size() > hi)
      throw InvalidModelSpec("wrong number of parameters for " + std::string(name));
  };

  if (name == "euclidean") {
    expect_count(1, 1);
    const int n = integral_param(params[0], "dimension");
    return {"euclidean", stored, n, StructureClass::SelfDual, std::make_shared<Euclidean>(n)};
  }
  if (name == "sphere") {
    expect_count(0, 2);
    if (!params.empty() && params[0] != 2.0)
      throw InvalidModelSpec("sphere is only available in dimension 2");
    const double r = params.size() == 2 ? params[1] : 1.0;
    if (!(r > 0.0) || !std::isfinite(r)) throw InvalidModelSpec("sphere radius must be positive");
    return {"sphere", {2.0, r}, 2, StructureClass::SelfDual, std::make_shared<Sphere>(r)};
  }
  if (name == "categorical") {
    expect_count(1, 1);
    const int n = integral_param(params[0], "dimension");
    return {"categorical", stored, n, StructureClass::DuallyFlat,
            std::make_shared<Categorical>(n)};
  }
  if (name == "gaussian1d") {
    expect_count(0, 1);
    if (!params.empty() && params[0] != 2.0)
      throw InvalidModelSpec("gaussian1d has dimension 2");
    return {"gaussian1d", {2.0}, 2, StructureClass::DuallyFlat, std::make_shared<Gaussian1d>()};
  }
  if (name == "alpha_categorical") {
    expect_count(2, 2);
    const int n = integral_param(params[0], "dimension");
    const double alpha = params[1];
    if (!(alpha > -1.0 && alpha < 1.0)) throw InvalidModelSpec("alpha must lie in (-1, 1)");
    const auto cls = alpha == 0.0 ? StructureClass::SelfDual : StructureClass::General;
    return {"alpha_categorical", stored, n, cls, std::make_shared<AlphaCategorical>(n, alpha)};
  }
  throw InvalidModelSpec("unknown model '" + std::string(name) + "'");
}

const std::vector<CatalogEntry>& catalog_entries() {
  static const std::vector<CatalogEntry> entries = {
      {"euclidean", "dim:int>=1", "Cartesian coordinates", "all of R^dim",
       "self-dual, flat", "euclidean:3"},
      {"sphere", "2[:radius>0 (default 1)]", "spherical angles (theta, phi)",
       "0.1 < theta < pi - 0.1 (polar caps excluded)", "self-dual, curved", "sphere:2:1"},
      {"categorical", "dim:int>=1", "natural parameters theta_i = ln(p_i / p_0)",
       "every outcome probability >= 1e-3", "dually flat (primal flat in chart)",
       "categorical:2"},
      {"gaussian1d", "[2]", "natural parameters (mu / s^2, -1 / (2 s^2))", "theta_2 < 0",
       "dually flat (primal flat in chart)", "gaussian1d"},
      {"alpha_categorical", "dim:int>=1:alpha in (-1,1)", "mixture coordinates eta_i = p_i",
       "every outcome probability >= 1e-3", "general (curved, not self-dual unless alpha = 0)",
       "alpha_categorical:2:0.5"},
  };
  return entries;
}

}  // namespace dualgeo::detail
