#include "cocylab/sft.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <numeric>
#include <sstream>

namespace cocylab {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::NotMixing: return "NOT_MIXING";
    case Errc::BracketUndefined: return "BRACKET_UNDEFINED";
    case Errc::NoFixedPoint: return "NO_FIXED_POINT";
    case Errc::WindowTooSmall: return "WINDOW_TOO_SMALL";
    case Errc::NotPeriodic: return "NOT_PERIODIC";
    case Errc::Singular: return "SINGULAR";
    case Errc::RankAmbiguous: return "RANK_AMBIGUOUS";
    case Errc::RankMismatch: return "RANK_MISMATCH";
    case Errc::BadContext: return "BAD_CONTEXT";
    case Errc::CombinatorialBlowup: return "COMBINATORIAL_BLOWUP";
    case Errc::NotStableRelated: return "NOT_STABLE_RELATED";
    case Errc::NotUnstableRelated: return "NOT_UNSTABLE_RELATED";
    case Errc::DimensionMismatch: return "DIMENSION_MISMATCH";
    case Errc::ConditionAFailed: return "CONDITION_A_FAILED";
    case Errc::ConditionBFailed: return "CONDITION_B_FAILED";
    case Errc::UnbunchedInput: return "UNBUNCHED_INPUT";
    case Errc::MissingOrbitData: return "MISSING_ORBIT_DATA";
    case Errc::NotCoprime: return "NOT_COPRIME";
    case Errc::ResidualFail: return "RESIDUAL_FAIL";
    case Errc::CacheMismatch: return "CACHE_MISMATCH";
    case Errc::NoGap: return "NO_GAP";
    case Errc::NotConverged: return "NOT_CONVERGED";
    case Errc::BlockMissing: return "BLOCK_MISSING";
    case Errc::BadWeights: return "BAD_WEIGHTS";
    case Errc::ConfigInvalid: return "CONFIG_INVALID";
    case Errc::ExperimentFailed: return "EXPERIMENT_FAILED";
    case Errc::UnknownTemplate: return "UNKNOWN_TEMPLATE";
  }
  return "UNKNOWN";
}

char symbol_char(int s) {
  if (s < 0 || s >= 16) fail(Errc::ConfigInvalid, "symbol out of range");
  return s < 10 ? static_cast<char>('0' + s) : static_cast<char>('a' + s - 10);
}

int char_symbol(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  fail(Errc::ConfigInvalid, std::string("bad symbol character '") + c + "'");
}

namespace {

long mod_index(long i, long n) {
  long r = i % n;
  return r < 0 ? r + n : r;
}

Word rotate_left(const Word& w) { return w.substr(1) + w[0]; }
Word rotate_right(const Word& w) {
  return w.back() + w.substr(0, w.size() - 1);
}

// Smallest period of w as a word: w is prim^j for the returned prim.
Word primitive_root(const Word& w) {
  const auto n = w.size();
  for (std::size_t p = 1; p <= n / 2; ++p) {
    if (n % p != 0) continue;
    bool ok = true;
    for (std::size_t i = p; i < n && ok; ++i) ok = (w[i] == w[i - p]);
    if (ok) return w.substr(0, p);
  }
  return w;
}

Word min_rotation(const Word& w) {
  Word best = w;
  Word cur = w;
  for (std::size_t i = 1; i < w.size(); ++i) {
    cur = rotate_left(cur);
    if (cur < best) best = cur;
  }
  return best;
}

std::uint64_t lcm_u64(std::uint64_t a, std::uint64_t b) {
  return a / std::gcd(a, b) * b;
}

}  // namespace

// ---------------------------------------------------------------------------
// TransitionStructure
// ---------------------------------------------------------------------------

TransitionStructure::TransitionStructure(int alphabet,
                                         std::vector<std::vector<bool>> q)
    : k(alphabet), allowed(std::move(q)) {
  if (k < 1 || k > 16) fail(Errc::ConfigInvalid, "alphabet size must be in [1,16]");
  if (static_cast<int>(allowed.size()) != k)
    fail(Errc::ConfigInvalid, "transition matrix row count != k");
  for (const auto& row : allowed)
    if (static_cast<int>(row.size()) != k)
      fail(Errc::ConfigInvalid, "transition matrix row length != k");
  for (int a = 0; a < k; ++a) {
    bool row = false, col = false;
    for (int b = 0; b < k; ++b) {
      row = row || allowed[a][b];
      col = col || allowed[b][a];
    }
    if (!row || !col)
      fail(Errc::ConfigInvalid,
           "transition matrix has an empty row or column at symbol " +
               std::string(1, symbol_char(a)));
  }
}

bool TransitionStructure::word_admissible(const Word& w) const {
  for (std::size_t i = 0; i + 1 < w.size(); ++i)
    if (!edge(char_symbol(w[i]), char_symbol(w[i + 1]))) return false;
  for (char c : w)
    if (char_symbol(c) >= k) return false;
  return true;
}

bool TransitionStructure::cyclic_admissible(const Word& w) const {
  if (w.empty()) return false;
  return word_admissible(w) && edge(char_symbol(w.back()), char_symbol(w[0]));
}

TransitionStructure TransitionStructure::full_shift(int k) {
  return TransitionStructure(
      k, std::vector<std::vector<bool>>(k, std::vector<bool>(k, true)));
}

std::uint64_t TransitionStructure::trace_power(int n) const {
  // integer matrix power; desk-scale k and n keep this well inside uint64
  std::vector<std::vector<std::uint64_t>> p(k, std::vector<std::uint64_t>(k, 0));
  std::vector<std::vector<std::uint64_t>> q(k, std::vector<std::uint64_t>(k, 0));
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) q[a][b] = allowed[a][b] ? 1 : 0;
  for (int a = 0; a < k; ++a) p[a][a] = 1;
  for (int step = 0; step < n; ++step) {
    std::vector<std::vector<std::uint64_t>> r(k,
                                              std::vector<std::uint64_t>(k, 0));
    for (int a = 0; a < k; ++a)
      for (int c = 0; c < k; ++c)
        if (p[a][c])
          for (int b = 0; b < k; ++b) r[a][b] += p[a][c] * q[c][b];
    p = std::move(r);
  }
  std::uint64_t t = 0;
  for (int a = 0; a < k; ++a) t += p[a][a];
  return t;
}

std::vector<int> TransitionStructure::successors(int a) const {
  std::vector<int> out;
  for (int b = 0; b < k; ++b)
    if (allowed[a][b]) out.push_back(b);
  return out;
}

Word TransitionStructure::connector(int from, int to) const {
  if (edge(from, to)) return "";
  // BFS over symbols, expanding successors in ascending order; parents give
  // the lexicographically least shortest path.
  std::vector<int> parent(k, -2);
  std::deque<int> queue;
  for (int b : successors(from)) {
    if (parent[b] == -2) {
      parent[b] = -1;
      queue.push_back(b);
    }
  }
  while (!queue.empty()) {
    int c = queue.front();
    queue.pop_front();
    if (edge(c, to)) {
      Word w;
      for (int s = c; s != -1; s = parent[s]) w.push_back(symbol_char(s));
      std::reverse(w.begin(), w.end());
      return w;
    }
    for (int b : successors(c)) {
      if (parent[b] == -2) {
        parent[b] = c;
        queue.push_back(b);
      }
    }
  }
  fail(Errc::NotMixing, "no admissible connector between symbols");
}

int validate_mixing(const TransitionStructure& ts, int max_power) {
  if (max_power < 1) fail(Errc::ConfigInvalid, "max_power must be >= 1");
  const int k = ts.k;
  std::vector<std::vector<bool>> p = ts.allowed;
  for (int n = 1; n <= max_power; ++n) {
    bool all = true;
    for (int a = 0; a < k && all; ++a)
      for (int b = 0; b < k && all; ++b) all = p[a][b];
    if (all) return n;
    // boolean product p * Q
    std::vector<std::vector<bool>> r(k, std::vector<bool>(k, false));
    for (int a = 0; a < k; ++a)
      for (int c = 0; c < k; ++c)
        if (p[a][c])
          for (int b = 0; b < k; ++b)
            if (ts.allowed[c][b]) r[a][b] = true;
    p = std::move(r);
  }

  // diagnose: strong connectivity, then spectral period
  std::vector<std::vector<bool>> reach = ts.allowed;
  for (int c = 0; c < k; ++c)
    for (int a = 0; a < k; ++a)
      if (reach[a][c])
        for (int b = 0; b < k; ++b)
          if (reach[c][b]) reach[a][b] = true;
  bool connected = true;
  for (int a = 0; a < k && connected; ++a)
    for (int b = 0; b < k && connected; ++b) connected = reach[a][b];
  if (!connected)
    fail(Errc::NotMixing, "transition matrix is reducible (not strongly connected)");

  // gcd of closed-walk lengths through symbol 0, via BFS levels
  std::vector<long> level(k, -1);
  level[0] = 0;
  std::deque<int> queue{0};
  long g = 0;
  while (!queue.empty()) {
    int a = queue.front();
    queue.pop_front();
    for (int b : ts.successors(a)) {
      if (level[b] < 0) {
        level[b] = level[a] + 1;
        queue.push_back(b);
      } else {
        g = std::gcd(g, level[a] + 1 - level[b]);
      }
    }
  }
  g = std::abs(g);
  if (g > 1)
    fail(Errc::NotMixing,
         "transition matrix is periodic with period " + std::to_string(g));
  fail(Errc::NotMixing,
       "no positive power found up to max_power=" + std::to_string(max_power));
}

// ---------------------------------------------------------------------------
// Metric
// ---------------------------------------------------------------------------

Metric::Metric(double a, double b) : alpha(a), beta(b) {
  if (!(a > 0.0 && a < 1.0)) fail(Errc::ConfigInvalid, "alpha must be in (0,1)");
  if (!(b > 0.0 && b <= 1.0)) fail(Errc::ConfigInvalid, "beta must be in (0,1]");
}

// ---------------------------------------------------------------------------
// SftPoint
// ---------------------------------------------------------------------------

SftPoint::SftPoint(const TransitionStructure& ts, Word left, Word core,
                   Word right, long core_start)
    : ts_(ts),
      left_(std::move(left)),
      core_(std::move(core)),
      right_(std::move(right)),
      begin_(core_start) {
  if (left_.empty() || right_.empty())
    fail(Errc::ConfigInvalid, "periodic tails must be nonempty");
  normalize();
  check_admissible();
}

SftPoint SftPoint::periodic(const TransitionStructure& ts, const Word& w) {
  if (w.empty()) fail(Errc::ConfigInvalid, "periodic word must be nonempty");
  if (!ts.cyclic_admissible(w))
    fail(Errc::ConfigInvalid, "periodic word not cyclically admissible: " + w);
  return SftPoint(ts, w, "", w, 0);
}

SftPoint SftPoint::fixed(const TransitionStructure& ts, int symbol) {
  if (!ts.edge(symbol, symbol))
    fail(Errc::NoFixedPoint,
         std::string("symbol ") + symbol_char(symbol) + " has no self-loop");
  return periodic(ts, Word(1, symbol_char(symbol)));
}

int SftPoint::at(long i) const { return char_symbol(at_char(i)); }

char SftPoint::at_char(long i) const {
  const long b = core_end();
  if (i >= begin_ && i <= b) return core_[static_cast<std::size_t>(i - begin_)];
  if (i < begin_)
    return left_[static_cast<std::size_t>(
        mod_index(i - begin_, static_cast<long>(left_.size())))];
  return right_[static_cast<std::size_t>(
      mod_index(i - b - 1, static_cast<long>(right_.size())))];
}

Word SftPoint::window(long lo, long hi) const {
  Word w;
  w.reserve(static_cast<std::size_t>(hi - lo + 1));
  for (long i = lo; i <= hi; ++i) w.push_back(at_char(i));
  return w;
}

SftPoint SftPoint::shifted(long n) const {
  SftPoint y(*this);
  y.begin_ -= n;
  y.normalize();
  return y;
}

bool SftPoint::globally_periodic() const { return core_.empty() && left_ == right_; }

bool SftPoint::homoclinic_to_symbol(int symbol) const {
  const Word w(1, symbol_char(symbol));
  return left_ == w && right_ == w;
}

bool SftPoint::operator==(const SftPoint& o) const {
  return begin_ == o.begin_ && core_ == o.core_ && left_ == o.left_ &&
         right_ == o.right_;
}

bool SftPoint::operator<(const SftPoint& o) const {
  auto key = [](const SftPoint& p) {
    return std::tie(p.begin_, p.core_, p.left_, p.right_);
  };
  return key(*this) < key(o);
}

std::string SftPoint::repr() const {
  std::ostringstream os;
  os << "(" << left_ << ")^inf." << (core_.empty() ? "" : core_) << "@"
     << begin_ << ".(" << right_ << ")^inf";
  return os.str();
}

std::size_t SftPoint::hash() const {
  std::size_t h = std::hash<long>{}(begin_);
  auto mix = [&h](const Word& w) {
    h ^= std::hash<Word>{}(w) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  };
  mix(left_);
  mix(core_);
  mix(right_);
  return h;
}

void SftPoint::normalize() {
  left_ = primitive_root(left_);
  right_ = primitive_root(right_);

  // absorb core symbols that the periodic tails already produce
  while (!core_.empty() && core_.front() == left_.front()) {
    core_.erase(core_.begin());
    ++begin_;
    left_ = rotate_left(left_);
  }
  while (!core_.empty() && core_.back() == right_.back()) {
    core_.pop_back();
    right_ = rotate_right(right_);
  }

  if (!core_.empty()) return;

  if (left_ == right_) {
    // globally periodic: re-anchor at 0
    const long n = static_cast<long>(left_.size());
    const long r = mod_index(-begin_, n);
    Word w = left_;
    std::rotate(w.begin(), w.begin() + static_cast<long>(r), w.end());
    // w[j] = old extension at absolute index begin_+r+j = j (mod n)
    left_ = right_ = w;
    begin_ = 0;
    return;
  }

  // coreless seam: slide the boundary maximally left (terminates by
  // Fine-Wilf since left_ != right_ as primitive words)
  std::size_t guard = left_.size() * right_.size() + 2;
  while (left_.back() == right_.back() && guard-- > 0) {
    left_ = rotate_right(left_);
    right_ = rotate_right(right_);
    --begin_;
  }
}

void SftPoint::check_admissible() const {
  const auto& ts = ts_;
  auto need = [&](char a, char b) {
    if (!ts.edge(char_symbol(a), char_symbol(b)))
      fail(Errc::ConfigInvalid, "inadmissible pair " + std::string{a, b} +
                                    " in point " + repr());
  };
  for (std::size_t i = 0; i + 1 < left_.size(); ++i) need(left_[i], left_[i + 1]);
  need(left_.back(), left_.front());
  for (std::size_t i = 0; i + 1 < right_.size(); ++i)
    need(right_[i], right_[i + 1]);
  need(right_.back(), right_.front());
  for (std::size_t i = 0; i + 1 < core_.size(); ++i) need(core_[i], core_[i + 1]);
  // seams
  need(at_char(begin_ - 1), at_char(begin_));
  const long b = core_end();
  need(at_char(b), at_char(b + 1));
}

// ---------------------------------------------------------------------------
// metric / relations
// ---------------------------------------------------------------------------

namespace {

// beyond this window two eventually periodic points agreeing everywhere
// inside must be equal
long comparison_bound(const SftPoint& x, const SftPoint& y) {
  const long ext = std::max({std::labs(x.core_begin()), std::labs(x.core_end()),
                             std::labs(y.core_begin()), std::labs(y.core_end()),
                             1L});
  const auto l = lcm_u64(x.left_word().size(), y.left_word().size());
  const auto r = lcm_u64(x.right_word().size(), y.right_word().size());
  return ext + static_cast<long>(std::max(l, r)) + 2;
}

}  // namespace

double d_alpha(const SftPoint& x, const SftPoint& y, const Metric& m) {
  if (x == y) return 0.0;
  const long bound = comparison_bound(x, y);
  for (long n = 0; n <= bound; ++n) {
    if (x.at_char(n) != y.at_char(n) || x.at_char(-n) != y.at_char(-n))
      return std::pow(m.alpha, static_cast<double>(n));
  }
  fail(Errc::ConfigInvalid, "distinct points agree beyond comparison bound");
}

std::optional<long> stable_agreement(const SftPoint& x, const SftPoint& y) {
  const long start = std::max({x.core_end(), y.core_end(), 0L}) + 1;
  const auto l = static_cast<long>(
      lcm_u64(x.right_word().size(), y.right_word().size()));
  for (long i = start; i < start + l; ++i)
    if (x.at_char(i) != y.at_char(i)) return std::nullopt;
  long r = start;
  while (r > 0 && x.at_char(r - 1) == y.at_char(r - 1)) --r;
  return r;
}

std::optional<long> unstable_agreement(const SftPoint& x, const SftPoint& y) {
  const long start = std::min({x.core_begin(), y.core_begin(), 0L}) - 1;
  const auto l = static_cast<long>(
      lcm_u64(x.left_word().size(), y.left_word().size()));
  for (long i = start; i > start - l; --i)
    if (x.at_char(i) != y.at_char(i)) return std::nullopt;
  long r = -start;
  while (r > 0 && x.at_char(-(r - 1)) == y.at_char(-(r - 1))) --r;
  return r;
}

SftPoint bracket(const SftPoint& x, const SftPoint& y) {
  if (x.at(0) != y.at(0))
    fail(Errc::BracketUndefined, "bracket requires x_0 = y_0");
  const long a = std::min(y.core_begin(), 0L);
  const long b = std::max(x.core_end(), 0L);
  Word core;
  for (long i = a; i <= b; ++i) core.push_back(i <= 0 ? y.at_char(i) : x.at_char(i));
  const long lu = static_cast<long>(y.left_word().size());
  const long lv = static_cast<long>(x.right_word().size());
  const Word left = y.window(a - lu, a - 1);
  const Word right = x.window(b + 1, b + lv);
  return SftPoint(x.ts(), left, core, right, a);
}

// ---------------------------------------------------------------------------
// periodic orbits
// ---------------------------------------------------------------------------

PeriodicOrbit::PeriodicOrbit(Word w) : word(std::move(w)) {
  if (word.empty()) fail(Errc::NotPeriodic, "empty orbit word");
  if (primitive_root(word) != word)
    fail(Errc::NotPeriodic, "orbit word not primitive: " + word);
  word = min_rotation(word);
}

bool PeriodicOrbit::operator<(const PeriodicOrbit& o) const {
  return std::make_pair(word.size(), word) <
         std::make_pair(o.word.size(), o.word);
}

SftPoint PeriodicOrbit::point(const TransitionStructure& ts) const {
  return SftPoint::periodic(ts, word);
}

std::vector<PeriodicOrbit> enumerate_periodic_orbits(
    const TransitionStructure& ts, int max_period) {
  if (max_period < 1) fail(Errc::ConfigInvalid, "max_period must be >= 1");
  std::vector<PeriodicOrbit> out;
  Word w;
  std::function<void(int)> dfs = [&](int n) {
    if (static_cast<int>(w.size()) == n) {
      if (ts.edge(char_symbol(w.back()), char_symbol(w[0])) &&
          primitive_root(w) == w && min_rotation(w) == w)
        out.emplace_back(w);
      return;
    }
    for (int s = 0; s < ts.k; ++s) {
      if (!w.empty() && !ts.edge(char_symbol(w.back()), s)) continue;
      w.push_back(symbol_char(s));
      dfs(n);
      w.pop_back();
    }
  };
  for (int n = 1; n <= max_period; ++n) dfs(n);
  std::sort(out.begin(), out.end());
  return out;
}

PeriodicOrbit shortest_periodic_orbit(const TransitionStructure& ts) {
  for (int n = 1; n <= ts.k; ++n) {
    auto orbits = enumerate_periodic_orbits(ts, n);
    for (const auto& p : orbits)
      if (p.period() == n) return p;
  }
  fail(Errc::NotPeriodic, "no periodic orbit up to length k");
}

std::vector<SftPoint> homoclinic_points(const TransitionStructure& ts,
                                        int fixed_symbol, int window) {
  if (!ts.edge(fixed_symbol, fixed_symbol))
    fail(Errc::NoFixedPoint, std::string("symbol ") +
                                 symbol_char(fixed_symbol) +
                                 " has no self-loop");
  const char a = symbol_char(fixed_symbol);
  std::vector<SftPoint> out;
  out.push_back(SftPoint::fixed(ts, fixed_symbol));
  Word w;
  std::function<void()> dfs = [&]() {
    if (!w.empty() && ts.edge(char_symbol(w.back()), fixed_symbol))
      out.emplace_back(ts, Word(1, a), w, Word(1, a), 0);
    if (static_cast<int>(w.size()) == window) return;
    for (int s = 0; s < ts.k; ++s) {
      const int prev = w.empty() ? fixed_symbol : char_symbol(w.back());
      if (!ts.edge(prev, s)) continue;
      w.push_back(symbol_char(s));
      dfs();
      w.pop_back();
    }
  };
  if (window > 0) dfs();
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<SftPoint> homoclinic_points_periodic(const TransitionStructure& ts,
                                                 const PeriodicOrbit& p,
                                                 int window) {
  const SftPoint base = p.point(ts);
  std::vector<SftPoint> out;
  out.push_back(base);
  for (int len = 1; len <= window; ++len) {
    Word w;
    std::function<void()> dfs = [&]() {
      if (static_cast<int>(w.size()) == len) {
        if (ts.edge(base.at(-1), char_symbol(w[0])) &&
            ts.edge(char_symbol(w.back()), base.at(len))) {
          const Word left = base.window(-static_cast<long>(p.period()), -1);
          const Word right =
              base.window(len, len + static_cast<long>(p.period()) - 1);
          out.emplace_back(ts, left, w, right, 0);
        }
        return;
      }
      for (int s = 0; s < ts.k; ++s) {
        if (!w.empty() && !ts.edge(char_symbol(w.back()), s)) continue;
        w.push_back(symbol_char(s));
        dfs();
        w.pop_back();
      }
    };
    dfs();
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

ClosingOrbit closing_orbit(const SftPoint& x, int n) {
  bool hom = false;
  for (int s = 0; s < x.ts().k && !hom; ++s)
    hom = x.homoclinic_to_symbol(s) && x.ts().edge(s, s);
  if (!hom)
    fail(Errc::ConfigInvalid, "closing_orbit needs a point homoclinic to a fixed point");
  if (x.core_begin() < -static_cast<long>(n) ||
      x.core_end() > static_cast<long>(n) - 1)
    fail(Errc::WindowTooSmall,
         "core " + x.repr() + " exceeds [-n, n-1] for n=" + std::to_string(n));
  const Word w = x.window(-n, n - 1);
  if (!x.ts().cyclic_admissible(w))
    fail(Errc::WindowTooSmall,
         "closing seam inadmissible at n=" + std::to_string(n) +
         "; increase n so the core sits strictly inside [-n, n-1]");
  SftPoint q = SftPoint::periodic(x.ts(), w).shifted(n);
  return ClosingOrbit{PeriodicOrbit(min_rotation(primitive_root(w))), q, n};
}

}  // namespace cocylab
