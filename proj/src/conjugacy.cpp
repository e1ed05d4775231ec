#include "cocylab/conjugacy.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <random>

namespace cocylab {

namespace {

// homoclinic points of an arbitrary globally periodic base point, cores
// anchored at [0, len-1], phase-locked tails
std::vector<SftPoint> homoclinics_of_base(const SftPoint& base, int window) {
  const auto& ts = base.ts();
  if (!base.globally_periodic())
    fail(Errc::ConfigInvalid, "base point must be periodic");
  if (base.left_word().size() == 1)
    return homoclinic_points(ts, base.at(0), window);
  std::vector<SftPoint> out;
  out.push_back(base);
  const long q = static_cast<long>(base.left_word().size());
  for (int len = 1; len <= window; ++len) {
    std::vector<Word> stack{""};
    while (!stack.empty()) {
      Word w = stack.back();
      stack.pop_back();
      if (static_cast<int>(w.size()) == len) {
        if (ts.edge(base.at(-1), char_symbol(w[0])) &&
            ts.edge(char_symbol(w.back()), base.at(len))) {
          const Word left = base.window(-q, -1);
          const Word right = base.window(len, len + q - 1);
          out.emplace_back(ts, left, w, right, 0);
        }
        continue;
      }
      for (int s = ts.k - 1; s >= 0; --s) {
        if (!w.empty() && !ts.edge(char_symbol(w.back()), s)) continue;
        stack.push_back(w + symbol_char(s));
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void require_compatible(const CocycleSystem& a, const CocycleSystem& b) {
  if (a.dim() != b.dim())
    fail(Errc::DimensionMismatch, "systems have different fiber dimensions");
  if (a.step != b.step)
    fail(Errc::ConfigInvalid, "systems live over different powers of the shift");
  if (a.ts().k != b.ts().k)
    fail(Errc::ConfigInvalid, "systems live over different shifts");
}

void require_base_point(const CocycleSystem& cs, const SftPoint& p0) {
  if (!p0.globally_periodic())
    fail(Errc::ConfigInvalid, "base point must be periodic");
  if (!(p0.shifted(cs.step) == p0))
    fail(Errc::ConfigInvalid,
         "base point is not fixed under the system's shift power");
}

}  // namespace

PcfValue pcf(const CocycleSystem& cs, const SftPoint& p0, const SftPoint& x) {
  require_base_point(cs, p0);
  const HolonomyMap hs = stable_holonomy(cs, x, p0);
  const HolonomyMap hu = unstable_holonomy(cs, p0, x);
  return PcfValue{x, hs.matrix * hu.matrix, cs.label};
}

double tol_scale(const CocycleSystem& a, const CocycleSystem& b, long depth) {
  const double m = std::max({a.gen->max_opnorm(), b.gen->max_opnorm(),
                             a.gen->max_inv_opnorm(), b.gen->max_inv_opnorm(),
                             1.0});
  const double lg = std::min(700.0, static_cast<double>(depth) * std::log(m));
  return std::exp(std::max(0.0, lg));
}

// ---------------------------------------------------------------------------
// periodic data
// ---------------------------------------------------------------------------

TransferSolution solve_transfer(const Mat& P, const Mat& Q) {
  TransferSolution out;
  const auto mp = eigen_moduli(P);
  const auto mq = eigen_moduli(Q);
  double mism = 0.0;
  for (std::size_t i = 0; i < mp.size(); ++i)
    mism = std::max(mism, std::abs(mp[i] - mq[i]));
  const double scale = std::max({mp.front(), mq.front(), 1.0});
  out.spectra_match = mism <= 1e-7 * scale;

  const Subspace sol = solve_commutant(P, Q);
  out.solution_dim = sol.rank();
  if (sol.rank() == 0) return out;

  const int d = static_cast<int>(P.rows());
  const Vec vec_id = mat_to_vec(Mat::Identity(d, d));
  Vec proj = Vec::Zero(d * d);
  for (int i = 0; i < sol.rank(); ++i)
    proj += sol.basis.col(i).dot(vec_id) * sol.basis.col(i);
  Mat cand = vec_to_mat(proj, d);

  auto invertible = [](const Mat& M) {
    const double top = opnorm(M);
    return top > 0 && sigma_min(M) > 1e-6 * top;
  };

  if (!invertible(cand)) {
    std::mt19937_64 rng(0x5eedc0cf12345678ULL);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 64 && !invertible(cand); ++trial) {
      Vec v = Vec::Zero(d * d);
      for (int i = 0; i < sol.rank(); ++i) v += g(rng) * sol.basis.col(i);
      cand = vec_to_mat(v, d);
    }
    if (!invertible(cand)) return out;  // no invertible solution found
  }
  out.c_p = cand;
  out.residual = opnorm(P - cand * Q * inverse(cand));
  return out;
}

MatchReport match_periodic_data(const CocycleSystem& a, const CocycleSystem& b,
                                const std::vector<PeriodicOrbit>& orbits,
                                MatchMode mode) {
  require_compatible(a, b);
  MatchReport rep;
  rep.mode = mode;
  rep.pass = true;
  for (const auto& p : orbits) {
    MatchRow row{p, 0.0, false, std::nullopt};
    const Mat pa = product_along_cyclic_word(a, p);
    const Mat pb = product_along_cyclic_word(b, p);
    const long depth = return_steps(a, p);
    if (mode == MatchMode::Equal) {
      row.residual = opnorm(pa - pb);
      row.pass = row.residual <= kTolEq * tol_scale(a, b, depth);
    } else {
      TransferSolution sol = solve_transfer(pa, pb);
      row.residual = sol.c_p ? sol.residual
                             : std::numeric_limits<double>::infinity();
      row.pass = sol.spectra_match && sol.c_p &&
                 sol.residual <= kTolConj * tol_scale(a, b, depth);
      row.transfer = std::move(sol);
    }
    rep.worst_residual = std::max(rep.worst_residual, row.residual);
    rep.pass = rep.pass && row.pass;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// condition (b)
// ---------------------------------------------------------------------------

CondBReport check_condition_b(const CocycleSystem& a, const CocycleSystem& b,
                              const SftPoint& p0, const Mat& c_p, int window,
                              double tolerance_scale) {
  require_compatible(a, b);
  require_base_point(a, p0);
  CondBReport rep;
  const Mat cpi = inverse(c_p);
  rep.condition_a_residual =
      opnorm(evaluate(a, p0, 1) - c_p * evaluate(b, p0, 1) * cpi);
  const double tol_a = tolerance_scale * kTolConj * tol_scale(a, b, 1);
  if (rep.condition_a_residual > tol_a)
    fail(Errc::ConditionAFailed,
         "A_p = C_p B_p C_p^{-1} fails with residual " +
             std::to_string(rep.condition_a_residual));

  const int m = std::max(a.gen->window_radius(), b.gen->window_radius());
  rep.tolerance = tolerance_scale * kTolPcf * tol_scale(a, b, 2 * (window + m + 1));
  for (const auto& x : homoclinics_of_base(p0, window)) {
    const Mat fa = pcf(a, p0, x).matrix;
    const Mat fb = pcf(b, p0, x).matrix;
    const double r = opnorm(fa - c_p * fb * cpi);
    rep.rows.push_back({x, r});
    if (r > rep.max_residual) {
      rep.max_residual = r;
      rep.argmax = x;
    }
  }
  rep.pass = rep.max_residual < rep.tolerance;
  return rep;
}

// ---------------------------------------------------------------------------
// ConjugacyField
// ---------------------------------------------------------------------------

ConjugacyField ConjugacyField::built(CocycleSystem a, CocycleSystem b,
                                     SftPoint p0, Mat c_p, int window,
                                     double holder_estimate,
                                     bool holder_suspect,
                                     std::map<SftPoint, Mat> cache) {
  ConjugacyField f;
  f.kind_ = Kind::Built;
  f.a_ = std::move(a);
  f.b_ = std::move(b);
  f.p0_ = std::move(p0);
  f.c_p_ = std::move(c_p);
  f.window_ = window;
  f.holder_est_ = holder_estimate;
  f.holder_suspect_ = holder_suspect;
  f.cache_ = std::move(cache);
  return f;
}

ConjugacyField ConjugacyField::quotient(const ConjugacyField& c1,
                                        const ConjugacyField& c2) {
  if (!(c1.base_point() == c2.base_point()))
    fail(Errc::CacheMismatch, "quotient fields need a common base point");
  ConjugacyField f;
  f.kind_ = Kind::Quotient;
  f.a_ = c1.a_;
  f.b_ = c1.a_;  // a quotient of conjugacies transfers A to itself
  f.p0_ = c1.p0_;
  f.c_p_ = c1.c_p_ * inverse(c2.c_p_);
  f.window_ = std::min(c1.window_, c2.window_);
  f.lhs_ = std::make_shared<ConjugacyField>(c1);
  f.rhs_ = std::make_shared<ConjugacyField>(c2);
  for (const auto& [pt, m1] : c1.cache_) {
    auto it = c2.cache_.find(pt);
    if (it != c2.cache_.end()) f.cache_[pt] = m1 * inverse(it->second);
  }
  if (f.cache_.empty())
    fail(Errc::CacheMismatch, "quotient fields share no cached points");
  // matdist(D(x), D(y)) <= sum of the parents' Hoelder increments scaled by
  // the cached norms; keep the empirical quotient instead
  double est = 0.0;
  std::vector<std::pair<SftPoint, Mat>> pts(f.cache_.begin(), f.cache_.end());
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double dd = d_alpha(pts[i].first, pts[j].first, c1.system_a().metric);
      if (dd <= 0) continue;
      est = std::max(est, matdist(pts[i].second, pts[j].second) /
                              std::pow(dd, c1.system_a().metric.beta));
    }
  f.holder_est_ = est;
  return f;
}

Mat ConjugacyField::value_at(const SftPoint& h) const {
  auto it = cache_.find(h);
  if (it != cache_.end()) return it->second;
  if (kind_ == Kind::Quotient)
    return lhs_->value_at(h) * inverse(rhs_->value_at(h));
  const HolonomyMap ha = stable_holonomy(*a_, *p0_, h);
  const HolonomyMap hb = stable_holonomy(*b_, h, *p0_);
  return ha.matrix * c_p_ * hb.matrix;
}

std::pair<Mat, double> ConjugacyField::evaluate(const SftPoint& x,
                                                long n) const {
  if (n < 1) fail(Errc::ConfigInvalid, "evaluation window must be >= 1");
  const SftPoint h = route_to_homoclinic(*p0_, x, n);
  const double radius =
      holder_est_ * std::pow(a_->metric.alpha,
                             a_->metric.beta * static_cast<double>(n));
  return {value_at(h), radius};
}

ConjugacyField ConjugacyField::scaled(double s) const {
  if (kind_ != Kind::Built)
    fail(Errc::ConfigInvalid, "only built fields support scaling");
  if (s == 0.0) fail(Errc::Singular, "zero scale");
  ConjugacyField f(*this);
  f.c_p_ = s * c_p_;
  for (auto& [pt, m] : f.cache_) m = s * m;
  f.holder_est_ = std::max(std::abs(s), 1.0 / std::abs(s)) * holder_est_;
  return f;
}

// ---------------------------------------------------------------------------
// routing
// ---------------------------------------------------------------------------

SftPoint route_to_homoclinic(const SftPoint& base, const SftPoint& x, long n) {
  return extend_word_to_homoclinic(base, x.window(-n, n), -n);
}

SftPoint extend_word_to_homoclinic(const SftPoint& base, const Word& w,
                                   long lo) {
  const auto& ts = base.ts();
  if (!base.globally_periodic())
    fail(Errc::ConfigInvalid, "routing base must be periodic");
  if (w.empty() || !ts.word_admissible(w))
    fail(Errc::BadContext, "window word not admissible: " + w);
  const long hi = lo + static_cast<long>(w.size()) - 1;
  const long q = static_cast<long>(base.left_word().size());
  auto base_at = [&](long i) { return base.at(i); };

  // forward: shortest admissible word c with w_hi -> c -> base tail at the
  // right phase; BFS over (symbol, index mod q), ascending successors give
  // the lexicographically least choice
  auto forward_connector = [&]() -> Word {
    const int start_sym = char_symbol(w.back());
    const long start_phase = ((hi % q) + q) % q;
    if (ts.edge(start_sym, base_at(start_phase + 1))) return "";
    struct Node { int sym; long phase; };
    std::vector<int> parent(static_cast<std::size_t>(ts.k) * q, -2);
    auto id = [&](int s, long t) { return static_cast<std::size_t>(s) * q + t; };
    std::deque<Node> queue;
    for (int s2 : ts.successors(start_sym)) {
      parent[id(s2, (start_phase + 1) % q)] = -1;
      queue.push_back({s2, (start_phase + 1) % q});
    }
    while (!queue.empty()) {
      Node nd = queue.front();
      queue.pop_front();
      if (ts.edge(nd.sym, base_at(nd.phase + 1))) {
        Word w;
        int s = nd.sym;
        long t = nd.phase;
        while (true) {
          w.push_back(symbol_char(s));
          const int par = parent[id(s, t)];
          if (par == -1) break;
          s = par;
          t = (t - 1 + q) % q;
        }
        std::reverse(w.begin(), w.end());
        return w;
      }
      for (int s2 : ts.successors(nd.sym)) {
        const long t2 = (nd.phase + 1) % q;
        if (parent[id(s2, t2)] == -2) {
          parent[id(s2, t2)] = nd.sym;
          queue.push_back({s2, t2});
        }
      }
    }
    fail(Errc::NotMixing, "no forward connector to the base orbit");
  };

  // backward mirror on reversed edges
  auto backward_connector = [&]() -> Word {
    const int start_sym = char_symbol(w.front());
    const long start_phase = ((lo % q) + q) % q;
    if (ts.edge(base_at(start_phase - 1 + q), start_sym)) return "";
    struct Node { int sym; long phase; };
    std::vector<int> parent(static_cast<std::size_t>(ts.k) * q, -2);
    auto id = [&](int s, long t) { return static_cast<std::size_t>(s) * q + t; };
    std::deque<Node> queue;
    for (int s2 = 0; s2 < ts.k; ++s2) {
      if (!ts.edge(s2, start_sym)) continue;
      parent[id(s2, (start_phase - 1 + q) % q)] = -1;
      queue.push_back({s2, (start_phase - 1 + q) % q});
    }
    while (!queue.empty()) {
      Node nd = queue.front();
      queue.pop_front();
      if (ts.edge(base_at(nd.phase - 1 + q), nd.sym)) {
        Word w;
        int s = nd.sym;
        long t = nd.phase;
        while (true) {
          w.push_back(symbol_char(s));
          const int par = parent[id(s, t)];
          if (par == -1) break;
          s = par;
          t = (t + 1) % q;
        }
        return w;  // built outward from x, already left-to-right
      }
      for (int s2 = 0; s2 < ts.k; ++s2) {
        if (!ts.edge(s2, nd.sym)) continue;
        const long t2 = (nd.phase - 1 + q) % q;
        if (parent[id(s2, t2)] == -2) {
          parent[id(s2, t2)] = nd.sym;
          queue.push_back({s2, t2});
        }
      }
    }
    fail(Errc::NotMixing, "no backward connector to the base orbit");
  };

  const Word cr = forward_connector();
  const Word cl = backward_connector();
  const long lo2 = lo - static_cast<long>(cl.size());
  const long hi2 = hi + static_cast<long>(cr.size());
  Word core;
  for (long i = lo2; i <= hi2; ++i) {
    if (i < lo)
      core.push_back(cl[static_cast<std::size_t>(i - lo2)]);
    else if (i <= hi)
      core.push_back(w[static_cast<std::size_t>(i - lo)]);
    else
      core.push_back(cr[static_cast<std::size_t>(i - hi - 1)]);
  }
  const Word left = base.window(lo2 - q, lo2 - 1);
  const Word right = base.window(hi2 + 1, hi2 + q);
  return SftPoint(ts, left, core, right, lo2);
}

// ---------------------------------------------------------------------------
// build
// ---------------------------------------------------------------------------

namespace {

// Hoelder quotient of a set of cached values; inverses precomputed
double holder_quotient(const std::vector<std::pair<SftPoint, Mat>>& pts,
                       const Metric& metric) {
  std::vector<Mat> invs(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) invs[i] = inverse(pts[i].second);
  double est = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double dd = d_alpha(pts[i].first, pts[j].first, metric);
      if (dd <= 0) continue;
      const double dist = opnorm(pts[i].second - pts[j].second) +
                          opnorm(invs[i] - invs[j]);
      est = std::max(est, dist / std::pow(dd, metric.beta));
    }
  return est;
}

}  // namespace

ConjugacyField build_conjugacy(const CocycleSystem& a, const CocycleSystem& b,
                               const SftPoint& p0, const Mat& c_p, int window,
                               const BuildOptions& opts) {
  require_compatible(a, b);
  require_base_point(a, p0);

  if (!opts.force) {
    const auto bunched = [](const BunchingCertificate* c) {
      return c && c->verdict == BunchVerdict::Bunched;
    };
    if (!bunched(opts.cert_a) || !bunched(opts.cert_b))
      fail(Errc::UnbunchedInput,
           "build_conjugacy needs BUNCHED certificates for both systems");
    const CondBReport cb = check_condition_b(a, b, p0, c_p, window);
    if (!cb.pass)
      fail(Errc::ConditionBFailed,
           "PCF obstruction: residual " + std::to_string(cb.max_residual) +
               " at window " + std::to_string(window));
  }

  const int m = std::max(a.gen->window_radius(), b.gen->window_radius());
  const double cross_tol = kTolPcf * tol_scale(a, b, 2 * (window + m + 1));
  std::map<SftPoint, Mat> cache;
  double cross_route = 0.0;
  for (const auto& x : homoclinics_of_base(p0, window)) {
    const Mat cs_val = stable_holonomy(a, p0, x).matrix * c_p *
                       stable_holonomy(b, x, p0).matrix;
    const Mat cu_val = unstable_holonomy(a, p0, x).matrix * c_p *
                       unstable_holonomy(b, x, p0).matrix;
    cross_route = std::max(cross_route, opnorm(cs_val - cu_val));
    cache[x] = cs_val;
  }
  if (!opts.force && cross_route > cross_tol)
    fail(Errc::ConditionBFailed,
         "stable and unstable extensions disagree: " + std::to_string(cross_route));

  std::vector<std::pair<SftPoint, Mat>> pts(cache.begin(), cache.end());
  const double est = holder_quotient(pts, a.metric);
  // stabilization check: the quotient over the window-2 sub-cache must be
  // within 5%, otherwise flag the field as a Hoelder suspect
  bool suspect = false;
  if (window >= 3 && est > 0) {
    std::vector<std::pair<SftPoint, Mat>> small;
    for (const auto& pr : pts) {
      const long len = pr.first.core_word().empty()
                           ? 0
                           : pr.first.core_end() - pr.first.core_begin() + 1;
      if (len <= window - 2) small.push_back(pr);
    }
    const double est_small = holder_quotient(small, a.metric);
    suspect = std::abs(est - est_small) > 0.05 * est;
  }
  return ConjugacyField::built(a, b, p0, c_p, window, est, suspect,
                               std::move(cache));
}

// ---------------------------------------------------------------------------
// verification
// ---------------------------------------------------------------------------

CohomologyReport verify_cohomology(const CocycleSystem& a,
                                   const CocycleSystem& b,
                                   const ConjugacyField& cf,
                                   const std::vector<SftPoint>& samples,
                                   long depth, long eval_window, double tol) {
  require_compatible(a, b);
  CohomologyReport rep;
  const double base_tol = tol * tol_scale(a, b, depth);
  bool ok = true;
  for (const auto& x : samples) {
    const auto [c0, r0] = cf.evaluate(x, eval_window);
    const Mat c0i = inverse(c0);
    for (long j = 1; j <= depth; ++j) {
      const auto [cj, rj] = cf.evaluate(x.shifted(j * a.step), eval_window);
      const Mat bj = evaluate(b, x, j);
      const double resid = opnorm(evaluate(a, x, j) - cj * bj * c0i);
      // first-order allowance for the evaluation radii; matdist bounds both
      // the value and the inverse perturbation by r
      const double allow = rj * opnorm(bj * c0i) + opnorm(cj * bj) * r0;
      rep.rows.push_back({x, j, resid, allow});
      rep.max_residual = std::max(rep.max_residual, resid);
      rep.max_excess = std::max(rep.max_excess, resid - allow);
      ok = ok && (resid <= base_tol + allow);
    }
  }
  rep.pass = ok;
  return rep;
}

ClosingReport verify_pcf_closing_convergence(const CocycleSystem& a,
                                             const CocycleSystem& b,
                                             const Mat& c_p, const SftPoint& x,
                                             int n_lo, int n_hi,
                                             double rate_budget,
                                             bool strict_orbit_data) {
  require_compatible(a, b);
  if (n_lo < 1 || n_hi < n_lo) fail(Errc::ConfigInvalid, "bad n range");
  const CocycleSystem bt = conjugate_system(b, c_p, b.label + "~cp");
  const int d = a.dim();

  // base fixed point of the normalized pair (for the distance column)
  SftPoint p0 = x;  // placeholder, replaced below
  {
    bool found = false;
    for (int s = 0; s < a.ts().k && !found; ++s) {
      if (x.homoclinic_to_symbol(s)) {
        p0 = SftPoint::fixed(a.ts(), s);
        found = true;
      }
    }
    if (!found)
      fail(Errc::ConfigInvalid,
           "closing convergence needs a point homoclinic to a fixed point");
  }

  ClosingReport rep;
  std::vector<double> xs, ys;
  for (int n = n_lo; n <= n_hi; ++n) {
    const SftPoint xb = x.shifted(-static_cast<long>(n) * a.step);
    const Mat quad = evaluate(bt, xb, n) * inverse(evaluate(a, xb, n)) *
                     inverse(evaluate(a, x, n)) * evaluate(bt, x, n);
    ClosingRow row{n, opnorm(quad - Mat::Identity(d, d)), std::nullopt,
                   std::nullopt};

    try {
      const ClosingOrbit q = closing_orbit(x, n);
      const Mat pa = evaluate(a, q.point, return_steps(a, q.orbit));
      const Mat pb = evaluate(b, q.point, return_steps(b, q.orbit));
      const TransferSolution sol = solve_transfer(pa, pb);
      if (sol.c_p) {
        const double dist = d_alpha(q.point, p0, a.metric);
        if (dist > 0)
          row.holder_ratio = matdist(*sol.c_p, c_p) /
                             std::pow(dist, a.metric.beta);
        row.orbit_period = q.orbit.period();
      } else if (strict_orbit_data) {
        fail(Errc::MissingOrbitData,
             "no invertible transfer at the closing orbit for n=" +
                 std::to_string(n));
      }
    } catch (const Error& e) {
      if (e.code() != Errc::WindowTooSmall) throw;
      if (strict_orbit_data)
        fail(Errc::MissingOrbitData,
             "closing orbit unavailable at n=" + std::to_string(n));
      // window too small for the closing word: row stays without orbit data
    }

    xs.push_back(static_cast<double>(n));
    ys.push_back(std::log(std::max(row.residual_norm, 1e-16)));
    rep.rows.push_back(std::move(row));
  }

  // least-squares slope of log||R^n|| vs n
  const double nn = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / nn;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / nn;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  rep.fitted_log_rate = sxx > 0 ? sxy / sxx : 0.0;
  rep.plateau_level = rep.rows.back().residual_norm;
  rep.geometric = rep.fitted_log_rate <= std::log(rate_budget);
  return rep;
}

SubgroupReport subgroup_residuals(const ConjugacyField& cf) {
  SubgroupReport rep;
  for (const auto& [pt, m] : cf.cache()) {
    const int d = static_cast<int>(m.rows());
    rep.orthogonal_residual =
        std::max(rep.orthogonal_residual,
                 opnorm(m.transpose() * m - Mat::Identity(d, d)));
    rep.special_linear_residual =
        std::max(rep.special_linear_residual,
                 std::abs(std::abs(m.determinant()) - 1.0));
  }
  return rep;
}

CombineReport combine_relprime(const ConjugacyField& c1,
                               const ConjugacyField& c2,
                               const CocycleSystem& a, const CocycleSystem& b,
                               const std::vector<SftPoint>& samples,
                               long eval_window, double tol) {
  require_compatible(a, b);
  const long n1 = c1.system_a().step / a.step;
  const long n2 = c2.system_a().step / a.step;
  if (n1 * a.step != c1.system_a().step || n2 * a.step != c2.system_a().step)
    fail(Errc::ConfigInvalid, "fields do not live over powers of the given system");
  if (std::gcd(n1, n2) != 1)
    fail(Errc::NotCoprime, "powers " + std::to_string(n1) + " and " +
                               std::to_string(n2) + " are not coprime");

  // extended Euclid: r*n1 + s*n2 = 1
  long r0 = n1, r1 = n2, s0 = 1, s1 = 0, t0 = 0, t1 = 1;
  while (r1 != 0) {
    const long quo = r0 / r1;
    std::tie(r0, r1) = std::make_pair(r1, r0 - quo * r1);
    std::tie(s0, s1) = std::make_pair(s1, s0 - quo * s1);
    std::tie(t0, t1) = std::make_pair(t1, t0 - quo * t1);
  }
  CombineReport rep;
  rep.bezout_r = s0;
  rep.bezout_s = t0;

  // does C2 already satisfy the one-step equation for (A, B)?
  double worst_raw = 0.0, worst_excess = 0.0;
  for (const auto& x : samples) {
    const auto [c0, rad0] = c2.evaluate(x, eval_window);
    const auto [cy, rady] = c2.evaluate(x.shifted(a.step), eval_window);
    const double resid =
        opnorm(evaluate(a, x, 1) - cy * evaluate(b, x, 1) * inverse(c0));
    worst_raw = std::max(worst_raw, resid);
    worst_excess =
        std::max(worst_excess, resid - (rad0 + rady) * (1.0 + opnorm(c0)));
  }
  rep.step1_residual = worst_raw;

  // C1 C2^{-1} must centralize the N1*N2 power system
  const CocycleSystem an = power_system(a, static_cast<int>(n1 * n2));
  const ConjugacyField d = ConjugacyField::quotient(c1, c2);
  const CohomologyReport coh =
      verify_cohomology(an, an, d, samples, 1, eval_window, tol);
  rep.membership_residual = coh.max_excess;

  const double scale = tol * tol_scale(a, b, n1 * n2);
  rep.pass = worst_excess <= scale && coh.pass;
  return rep;
}

}  // namespace cocylab
