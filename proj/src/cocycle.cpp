#include "cocylab/cocycle.hpp"

#include <cmath>
#include <functional>
#include <numeric>

namespace cocylab {

// ---------------------------------------------------------------------------
// LocalMap
// ---------------------------------------------------------------------------

LocalMap::LocalMap(const TransitionStructure& ts, int d, int window_radius,
                   std::map<Word, Mat> table)
    : ts_(ts), d_(d), m_(window_radius), table_(std::move(table)) {
  if (d < 1 || d > 16) fail(Errc::ConfigInvalid, "fiber dimension must be in [1,16]");
  if (m_ < 0) fail(Errc::ConfigInvalid, "window radius must be >= 0");
  const auto words = admissible_words(ts, 2 * m_ + 1);
  for (const auto& w : words) {
    auto it = table_.find(w);
    if (it == table_.end())
      fail(Errc::ConfigInvalid, "generator table missing word " + w);
    const Mat& M = it->second;
    if (M.rows() != d || M.cols() != d)
      fail(Errc::DimensionMismatch, "entry for word " + w + " is not d x d");
    if (!M.allFinite())
      fail(Errc::ConfigInvalid, "entry for word " + w + " has non-finite values");
    const double smin = sigma_min(M);
    if (smin <= NumTol::sing_rel * std::max(opnorm(M), 1.0))
      fail(Errc::Singular, "entry for word " + w + " is numerically singular");
  }
  // drop spurious entries so equality of maps is equality of tables
  for (auto it = table_.begin(); it != table_.end();) {
    if (static_cast<int>(it->first.size()) != 2 * m_ + 1 ||
        !ts.word_admissible(it->first))
      it = table_.erase(it);
    else
      ++it;
  }
}

LocalMap LocalMap::constant(const TransitionStructure& ts, const Mat& value) {
  std::map<Word, Mat> t;
  for (int s = 0; s < ts.k; ++s) t[Word(1, symbol_char(s))] = value;
  return LocalMap(ts, static_cast<int>(value.rows()), 0, std::move(t));
}

const Mat& LocalMap::at_word(const Word& w) const {
  auto it = table_.find(w);
  if (it == table_.end())
    fail(Errc::BadContext, "no table entry for word '" + w + "'");
  return it->second;
}

const Mat& LocalMap::at_point(const SftPoint& x, long i) const {
  return at_word(x.window(i - m_, i + m_));
}

double LocalMap::max_opnorm() const {
  double v = 0.0;
  for (const auto& [w, M] : table_) v = std::max(v, opnorm(M));
  return v;
}

double LocalMap::max_inv_opnorm() const {
  double v = 0.0;
  for (const auto& [w, M] : table_) v = std::max(v, opnorm_inv(M));
  return v;
}

double LocalMap::max_pairwise_matdist() const {
  double v = 0.0;
  for (auto it = table_.begin(); it != table_.end(); ++it)
    for (auto jt = std::next(it); jt != table_.end(); ++jt)
      v = std::max(v, matdist(it->second, jt->second));
  return v;
}

double LocalMap::max_log_distortion() const {
  double v = 0.0;
  for (const auto& [w, M] : table_)
    v = std::max(v, std::log(opnorm(M) * opnorm_inv(M)));
  return v;
}

LocalMap LocalMap::inverse_map() const {
  std::map<Word, Mat> t;
  for (const auto& [w, M] : table_) t[w] = inverse(M);
  return LocalMap(ts_, d_, m_, std::move(t));
}

std::vector<Word> admissible_words(const TransitionStructure& ts, int length) {
  std::vector<Word> out;
  Word w;
  std::function<void()> dfs = [&]() {
    if (static_cast<int>(w.size()) == length) {
      out.push_back(w);
      return;
    }
    for (int s = 0; s < ts.k; ++s) {
      if (!w.empty() && !ts.edge(char_symbol(w.back()), s)) continue;
      w.push_back(symbol_char(s));
      dfs();
      w.pop_back();
    }
  };
  if (length > 0) dfs();
  return out;
}

// ---------------------------------------------------------------------------
// CocycleSystem
// ---------------------------------------------------------------------------

CocycleSystem::CocycleSystem(std::shared_ptr<const Generator> g, Metric m,
                             std::string lab, int power_step)
    : gen(std::move(g)), metric(m), step(power_step), label(std::move(lab)) {
  if (step < 1) fail(Errc::ConfigInvalid, "cocycle step must be >= 1");
}

CocycleSystem make_system(const TransitionStructure& ts, Metric m,
                          const Generator& gen, std::string label) {
  (void)ts;
  return CocycleSystem(std::make_shared<Generator>(gen), m, std::move(label));
}

Mat evaluate(const CocycleSystem& cs, const SftPoint& x, long n) {
  const int d = cs.dim();
  if (n == 0) return Mat::Identity(d, d);
  if (n < 0) {
    const SftPoint y = x.shifted(n * cs.step);
    return inverse(evaluate(cs, y, -n));
  }
  Mat p = Mat::Identity(d, d);
  for (long j = 0; j < n; ++j) p = cs.gen->at_point(x, j * cs.step) * p;
  return p;
}

ScaledMat evaluate_scaled(const CocycleSystem& cs, const SftPoint& x, long n) {
  const int d = cs.dim();
  ScaledMat out{Mat::Identity(d, d), 0.0};
  if (n == 0) return out;
  if (n < 0) {
    const SftPoint y = x.shifted(n * cs.step);
    ScaledMat fwd = evaluate_scaled(cs, y, -n);
    out.m = inverse(fwd.m);
    out.log_scale = -fwd.log_scale;
    return out;
  }
  for (long j = 0; j < n; ++j) {
    out.m = cs.gen->at_point(x, j * cs.step) * out.m;
    const double norm = out.m.cwiseAbs().maxCoeff();
    if (norm > 1e150 || (norm > 0 && norm < 1e-150)) {
      out.m /= norm;
      out.log_scale += std::log(norm);
    }
  }
  return out;
}

long return_steps(const CocycleSystem& cs, const PeriodicOrbit& p) {
  const long k = p.period();
  const long g = std::gcd<long>(k, cs.step);
  return k / g;
}

Mat product_along_cyclic_word(const CocycleSystem& cs, const PeriodicOrbit& p) {
  const SftPoint x = p.point(cs.ts());
  return evaluate(cs, x, return_steps(cs, p));
}

Mat product_along_word(const CocycleSystem& cs, const Word& w, long n) {
  const int m = cs.gen->window_radius();
  const long need = (n - 1) * cs.step + 2 * m + 1;
  if (n < 1 || static_cast<long>(w.size()) != need)
    fail(Errc::BadContext, "context word must have length " +
                               std::to_string(need) + ", got " +
                               std::to_string(w.size()));
  if (!cs.ts().word_admissible(w))
    fail(Errc::BadContext, "context word not admissible: " + w);
  Mat p = Mat::Identity(cs.dim(), cs.dim());
  for (long j = 0; j < n; ++j)
    p = cs.gen->at_word(w.substr(static_cast<std::size_t>(j * cs.step),
                                 static_cast<std::size_t>(2 * m + 1))) *
        p;
  return p;
}

CocycleSystem conjugate_system(const CocycleSystem& cs, const LocalMap& c,
                               std::string label) {
  if (c.dim() != cs.dim())
    fail(Errc::DimensionMismatch, "conjugator dimension mismatch");
  const int m = cs.gen->window_radius();
  const int mc = c.window_radius();
  const int mr = std::max(m, mc + cs.step);
  std::map<Word, Mat> t;
  for (const auto& w : admissible_words(cs.ts(), 2 * mr + 1)) {
    // positions are word indices of the centre window [-mr, mr]
    const Mat& b = cs.gen->at_word(
        w.substr(static_cast<std::size_t>(mr - m), static_cast<std::size_t>(2 * m + 1)));
    const Mat& c0 = c.at_word(w.substr(static_cast<std::size_t>(mr - mc),
                                       static_cast<std::size_t>(2 * mc + 1)));
    const Mat& c1 = c.at_word(w.substr(static_cast<std::size_t>(mr - mc + cs.step),
                                       static_cast<std::size_t>(2 * mc + 1)));
    t[w] = c1 * b * inverse(c0);
  }
  Generator g(cs.ts(), cs.dim(), mr, std::move(t));
  return CocycleSystem(std::make_shared<Generator>(std::move(g)), cs.metric,
                       label.empty() ? cs.label + "~conj" : std::move(label),
                       cs.step);
}

CocycleSystem conjugate_system(const CocycleSystem& cs, const Mat& c,
                               std::string label) {
  return conjugate_system(cs, LocalMap::constant(cs.ts(), c), std::move(label));
}

double holder_constant(const CocycleSystem& cs) {
  const int m = cs.gen->window_radius();
  const double spread = cs.gen->max_pairwise_matdist();
  return spread / std::pow(cs.metric.alpha,
                           static_cast<double>(m) * cs.metric.beta);
}

CocycleSystem power_system(const CocycleSystem& cs, int n_power) {
  if (n_power < 1) fail(Errc::ConfigInvalid, "power must be >= 1");
  if (n_power == 1) return cs;
  const int m = cs.gen->window_radius();
  const int mr = m + (n_power - 1) * cs.step;
  std::map<Word, Mat> t;
  for (const auto& w : admissible_words(cs.ts(), 2 * mr + 1)) {
    Mat p = Mat::Identity(cs.dim(), cs.dim());
    for (int j = 0; j < n_power; ++j)
      p = cs.gen->at_word(w.substr(static_cast<std::size_t>(mr - m + j * cs.step),
                                   static_cast<std::size_t>(2 * m + 1))) *
          p;
    t[w] = p;
  }
  Generator g(cs.ts(), cs.dim(), mr, std::move(t));
  return CocycleSystem(std::make_shared<Generator>(std::move(g)), cs.metric,
                       cs.label + "^" + std::to_string(n_power),
                       cs.step * n_power);
}

}  // namespace cocylab
