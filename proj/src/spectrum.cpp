#include "cocylab/spectrum.hpp"

#include <cmath>
#include <limits>

#include <Eigen/QR>

namespace cocylab {

std::pair<double, double> periodic_exponents(const CocycleSystem& cs,
                                             const PeriodicOrbit& p) {
  const long n = return_steps(cs, p);
  const auto mods = eigen_moduli(product_along_cyclic_word(cs, p));
  return {std::log(mods.front()) / static_cast<double>(n),
          std::log(mods.back()) / static_cast<double>(n)};
}

// ---------------------------------------------------------------------------
// MarkovSampler
// ---------------------------------------------------------------------------

namespace {

// Perron eigenvector of a nonnegative primitive matrix by power iteration.
std::vector<double> perron_vector(const std::vector<std::vector<double>>& m) {
  const int k = static_cast<int>(m.size());
  std::vector<double> v(k, 1.0 / k), w(k, 0.0);
  for (int it = 0; it < 20000; ++it) {
    double norm = 0.0;
    for (int i = 0; i < k; ++i) {
      w[i] = 0.0;
      for (int j = 0; j < k; ++j) w[i] += m[i][j] * v[j];
      norm += w[i];
    }
    double delta = 0.0;
    for (int i = 0; i < k; ++i) {
      w[i] /= norm;
      delta = std::max(delta, std::abs(w[i] - v[i]));
    }
    v = w;
    if (delta < 1e-15) break;
  }
  return v;
}

double perron_value(const std::vector<std::vector<double>>& m,
                    const std::vector<double>& v) {
  const int k = static_cast<int>(m.size());
  double num = 0.0, den = 0.0;
  for (int i = 0; i < k; ++i) {
    double mi = 0.0;
    for (int j = 0; j < k; ++j) mi += m[i][j] * v[j];
    num += mi;
    den += v[i];
  }
  return num / den;
}

}  // namespace

MarkovSampler::MarkovSampler(const TransitionStructure& ts,
                             std::vector<std::vector<double>> weights,
                             std::uint64_t seed)
    : ts_(&ts), rng_(seed) {
  const int k = ts.k;
  if (weights.empty()) {
    // Parry measure: P_ab = Q_ab r_b / (lambda r_a) with Q r = lambda r
    std::vector<std::vector<double>> q(k, std::vector<double>(k, 0.0));
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) q[a][b] = ts.allowed[a][b] ? 1.0 : 0.0;
    const auto r = perron_vector(q);
    const double lambda = perron_value(q, r);
    p_.assign(k, std::vector<double>(k, 0.0));
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b)
        if (ts.allowed[a][b]) p_[a][b] = r[b] / (lambda * r[a]);
    // stationary pi_a = l_a r_a with l the left Perron vector
    std::vector<std::vector<double>> qt(k, std::vector<double>(k, 0.0));
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) qt[a][b] = q[b][a];
    const auto l = perron_vector(qt);
    stationary_.assign(k, 0.0);
    double total = 0.0;
    for (int a = 0; a < k; ++a) {
      stationary_[a] = l[a] * r[a];
      total += stationary_[a];
    }
    for (double& s : stationary_) s /= total;
  } else {
    if (static_cast<int>(weights.size()) != k)
      fail(Errc::BadWeights, "weight matrix must be k x k");
    p_.assign(k, std::vector<double>(k, 0.0));
    for (int a = 0; a < k; ++a) {
      if (static_cast<int>(weights[a].size()) != k)
        fail(Errc::BadWeights, "weight matrix must be k x k");
      double row = 0.0;
      for (int b = 0; b < k; ++b) {
        const double w = weights[a][b];
        if (w < 0) fail(Errc::BadWeights, "negative weight");
        if ((w > 0) != ts.allowed[a][b])
          fail(Errc::BadWeights,
               "weights must be positive exactly on allowed transitions");
        row += w;
      }
      if (row <= 0) fail(Errc::BadWeights, "empty weight row");
      for (int b = 0; b < k; ++b) p_[a][b] = weights[a][b] / row;
    }
    // stationary vector of the chain
    std::vector<std::vector<double>> pt(k, std::vector<double>(k, 0.0));
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) pt[b][a] = p_[a][b];
    stationary_ = perron_vector(pt);
  }
}

MarkovSampler MarkovSampler::parry(const TransitionStructure& ts,
                                   std::uint64_t seed) {
  return MarkovSampler(ts, {}, seed);
}

Word MarkovSampler::sample_word(int length) {
  Word w;
  w.reserve(static_cast<std::size_t>(length));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto draw = [&](const std::vector<double>& probs) {
    double r = u(rng_);
    for (int s = 0; s < static_cast<int>(probs.size()); ++s) {
      r -= probs[s];
      if (r <= 0) return s;
    }
    return static_cast<int>(probs.size()) - 1;
  };
  int cur = draw(stationary_);
  w.push_back(symbol_char(cur));
  for (int i = 1; i < length; ++i) {
    cur = draw(p_[cur]);
    w.push_back(symbol_char(cur));
  }
  return w;
}

// ---------------------------------------------------------------------------
// exponents along sampled paths
// ---------------------------------------------------------------------------

namespace {

// one path: extreme exponents of the product read from a sampled word
std::pair<double, double> path_exponents(const CocycleSystem& cs,
                                         const Word& w, long n_steps) {
  const int d = cs.dim();
  const int m = cs.gen->window_radius();
  auto factor = [&](long j) {
    return cs.gen->at_word(w.substr(static_cast<std::size_t>(j * cs.step),
                                    static_cast<std::size_t>(2 * m + 1)));
  };
  if (d <= 2) {
    // scaled norm tracking of the product and of the inverse product
    Mat p = Mat::Identity(d, d), pinv = Mat::Identity(d, d);
    double logp = 0.0, logpinv = 0.0;
    for (long j = 0; j < n_steps; ++j) {
      const Mat& f = factor(j);
      p = f * p;
      pinv = pinv * inverse(f);
      const double np = opnorm(p), ni = opnorm(pinv);
      if (np > 1e100 || np < 1e-100) {
        p /= np;
        logp += std::log(np);
      }
      if (ni > 1e100 || ni < 1e-100) {
        pinv /= ni;
        logpinv += std::log(ni);
      }
    }
    const double lp = (std::log(opnorm(p)) + logp) / static_cast<double>(n_steps);
    const double lm =
        -(std::log(opnorm(pinv)) + logpinv) / static_cast<double>(n_steps);
    return {lp, lm};
  }
  // QR re-orthogonalization: diagonal of R accumulates all exponents
  Mat q = Mat::Identity(d, d);
  Vec acc = Vec::Zero(d);
  for (long j = 0; j < n_steps; ++j) {
    Mat z = factor(j) * q;
    Eigen::HouseholderQR<Mat> qr(z);
    q = qr.householderQ() * Mat::Identity(d, d);
    const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < d; ++i) {
      const double rii = std::abs(r(i, i));
      acc(i) += std::log(std::max(rii, 1e-300));
      if (r(i, i) < 0) q.col(i) = -q.col(i);
    }
  }
  acc /= static_cast<double>(n_steps);
  return {acc.maxCoeff(), acc.minCoeff()};
}

}  // namespace

MeasureEstimate measure_exponents(const CocycleSystem& cs,
                                  MarkovSampler& sampler, long n_steps,
                                  int n_samples) {
  if (n_steps < 100) fail(Errc::ConfigInvalid, "n_steps must be >= 100");
  if (n_samples < 1) fail(Errc::ConfigInvalid, "n_samples must be >= 1");
  const int m = cs.gen->window_radius();
  const int len = static_cast<int>((n_steps - 1) * cs.step + 2 * m + 1);
  std::vector<double> lp(static_cast<std::size_t>(n_samples));
  std::vector<double> lm(static_cast<std::size_t>(n_samples));
  for (int s = 0; s < n_samples; ++s) {
    const Word w = sampler.sample_word(len);
    std::tie(lp[static_cast<std::size_t>(s)], lm[static_cast<std::size_t>(s)]) =
        path_exponents(cs, w, n_steps);
  }
  auto mean_se = [&](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var = v.size() > 1 ? var / static_cast<double>(v.size() - 1) : 0.0;
    return std::make_pair(mean, std::sqrt(var / static_cast<double>(v.size())));
  };
  MeasureEstimate est;
  std::tie(est.lambda_plus, est.std_error_plus) = mean_se(lp);
  std::tie(est.lambda_minus, est.std_error_minus) = mean_se(lm);
  est.n_steps = n_steps;
  est.n_samples = n_samples;
  return est;
}

ApproximationGapReport approximation_gap(const CocycleSystem& cs,
                                         int max_period, MarkovSampler& sampler,
                                         long n_steps, int n_samples) {
  ApproximationGapReport rep;
  rep.measure = measure_exponents(cs, sampler, n_steps, n_samples);
  const auto orbits = enumerate_periodic_orbits(cs.ts(), max_period);
  for (const auto& p : orbits) {
    const auto [lp, lm] = periodic_exponents(cs, p);
    rep.periodic.push_back({p, lp, lm});
  }
  if (rep.periodic.empty()) return rep;
  for (int period = 1; period <= max_period; ++period) {
    GapRow best{period, std::numeric_limits<double>::infinity(),
                rep.periodic.front().orbit};
    for (const auto& row : rep.periodic) {
      if (row.orbit.period() > period) continue;
      const double gap = std::abs(rep.measure.lambda_plus - row.lambda_plus) +
                         std::abs(rep.measure.lambda_minus - row.lambda_minus);
      if (gap < best.gap) {
        best.gap = gap;
        best.best_orbit = row.orbit;
      }
    }
    rep.gaps.push_back(std::move(best));
  }
  return rep;
}

}  // namespace cocylab
