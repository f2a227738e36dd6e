#include "gosp/model.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace gosp {

namespace mp = boost::multiprecision;

namespace {

std::string offset_str(const Offset& x) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
  os << ')';
  return os.str();
}

Rational to_small(const mp::cpp_rational& q) {
  auto n = mp::numerator(q), d = mp::denominator(q);
  const mp::cpp_int lim = std::numeric_limits<std::int64_t>::max();
  if (mp::abs(n) > lim || d > lim) throw std::overflow_error("certificate entry does not fit in 64 bits");
  return Rational(n.convert_to<std::int64_t>(), d.convert_to<std::int64_t>());
}

mp::cpp_rational floor_q(const mp::cpp_rational& q) {
  mp::cpp_int n = mp::numerator(q), d = mp::denominator(q);
  mp::cpp_int f = n / d;
  if (n % d != 0 && n < 0) f -= 1;
  return mp::cpp_rational(f);
}

mp::cpp_rational ceil_q(const mp::cpp_rational& q) { return -floor_q(-q); }

// A linear constraint  sum_k a[k] * u[k] >= b.
struct Constraint {
  std::vector<mp::cpp_rational> a;
  mp::cpp_rational b;
};

}  // namespace

const char* to_string(ModelErrorKind kind) {
  switch (kind) {
    case ModelErrorKind::BadDimension: return "BadDimension";
    case ModelErrorKind::TooFewOffsets: return "TooFewOffsets";
    case ModelErrorKind::ZeroOffset: return "ZeroOffset";
    case ModelErrorKind::DuplicateOffset: return "DuplicateOffset";
    case ModelErrorKind::NonPositiveTimeComponent: return "NonPositiveTimeComponent";
    case ModelErrorKind::ProperSublattice: return "ProperSublattice";
  }
  return "?";
}

ModelError::ModelError(ModelErrorKind kind, std::string message, Offset offending,
                       std::uint64_t index)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind),
      offending_(std::move(offending)),
      index_(index) {}

NeighborhoodSpec make_spec(int d, std::vector<Offset> offsets) {
  NeighborhoodSpec s;
  s.d = d;
  s.offsets = std::move(offsets);
  return s;
}

std::optional<std::vector<Rational>> orientation_certificate(const NeighborhoodSpec& spec) {
  // Fourier-Motzkin elimination on <x,u> >= 1 (scale-invariant version of <x,u> > 0).
  const int d = spec.d;
  std::vector<Constraint> cs;
  for (const auto& x : spec.offsets) {
    Constraint c;
    c.a.resize(d);
    for (int k = 0; k < d; ++k) c.a[k] = x.at(k);
    c.b = 1;
    cs.push_back(std::move(c));
  }
  // stages[k] holds the system after eliminating variables d-1 .. k+1; it involves u[0..k].
  std::vector<std::vector<Constraint>> stages(d);
  stages[d - 1] = cs;
  for (int k = d - 1; k >= 1; --k) {
    std::vector<Constraint> pos, neg, next;
    for (const auto& c : stages[k]) {
      if (c.a[k] > 0) pos.push_back(c);
      else if (c.a[k] < 0) neg.push_back(c);
      else next.push_back(c);
    }
    for (const auto& cp : pos) {
      for (const auto& cn : neg) {
        // cp/a_p + cn/|a_n| eliminates u[k].
        Constraint c;
        c.a.resize(d);
        mp::cpp_rational sp = 1 / cp.a[k], sn = 1 / -cn.a[k];
        for (int i = 0; i < d; ++i) c.a[i] = cp.a[i] * sp + cn.a[i] * sn;
        c.a[k] = 0;
        c.b = cp.b * sp + cn.b * sn;
        next.push_back(std::move(c));
      }
    }
    // Drop trivially satisfied rows and deduplicate to keep the system small.
    std::vector<Constraint> kept;
    for (auto& c : next) {
      bool zero = std::all_of(c.a.begin(), c.a.end(), [](const auto& v) { return v == 0; });
      if (zero) {
        if (c.b > 0) return std::nullopt;
        continue;
      }
      kept.push_back(std::move(c));
    }
    stages[k - 1] = std::move(kept);
  }
  // Back substitution: each variable gets an interval given earlier choices.
  std::vector<mp::cpp_rational> u(d, 0);
  for (int k = 0; k < d; ++k) {
    std::optional<mp::cpp_rational> lo, hi;
    for (const auto& c : stages[k]) {
      mp::cpp_rational rest = c.b;
      for (int i = 0; i < k; ++i) rest -= c.a[i] * u[i];
      if (c.a[k] == 0) {
        if (rest > 0) return std::nullopt;
        continue;
      }
      mp::cpp_rational bound = rest / c.a[k];
      if (c.a[k] > 0) {
        if (!lo || bound > *lo) lo = bound;
      } else {
        if (!hi || bound < *hi) hi = bound;
      }
    }
    if (lo && hi && *lo > *hi) return std::nullopt;
    // Prefer the integer closest to zero inside the interval.
    mp::cpp_rational choice = 0;
    if (lo && *lo > 0) choice = ceil_q(*lo);
    else if (hi && *hi < 0) choice = floor_q(*hi);
    if ((lo && choice < *lo) || (hi && choice > *hi)) choice = (*lo + *hi) / 2;
    u[k] = choice;
  }
  for (const auto& x : spec.offsets) {
    mp::cpp_rational s = 0;
    for (int k = 0; k < d; ++k) s += u[k] * x[k];
    if (s <= 0) return std::nullopt;
  }
  std::vector<Rational> out;
  for (const auto& q : u) out.push_back(to_small(q));
  return out;
}

std::optional<std::uint64_t> lattice_index(const NeighborhoodSpec& spec) {
  const int d = spec.d;
  std::vector<std::vector<mp::cpp_int>> m;
  for (const auto& x : spec.offsets) {
    std::vector<mp::cpp_int> row(d);
    for (int k = 0; k < d; ++k) row[k] = x.at(k);
    m.push_back(std::move(row));
  }
  // Integer row echelon form by Euclidean row reduction (unimodular operations).
  std::size_t top = 0;
  mp::cpp_int det = 1;
  for (int col = 0; col < d && top < m.size(); ++col) {
    while (true) {
      std::size_t piv = m.size();
      for (std::size_t r = top; r < m.size(); ++r) {
        if (m[r][col] != 0 && (piv == m.size() || mp::abs(m[r][col]) < mp::abs(m[piv][col]))) piv = r;
      }
      if (piv == m.size()) break;
      std::swap(m[top], m[piv]);
      bool done = true;
      for (std::size_t r = top + 1; r < m.size(); ++r) {
        if (m[r][col] == 0) continue;
        mp::cpp_int q = m[r][col] / m[top][col];
        for (int k = col; k < d; ++k) m[r][k] -= q * m[top][k];
        if (m[r][col] != 0) done = false;
      }
      if (done) break;
    }
    if (m[top][col] == 0) return std::nullopt;
    det *= mp::abs(m[top][col]);
    ++top;
  }
  if (top < static_cast<std::size_t>(d)) return std::nullopt;
  return det.convert_to<std::uint64_t>();
}

NormalizedModel validate(const NeighborhoodSpec& spec) {
  if (spec.d < 2) throw ModelError(ModelErrorKind::BadDimension, "dimension must be at least 2");
  if (spec.offsets.size() < 2)
    throw ModelError(ModelErrorKind::TooFewOffsets, "need at least two offsets");
  std::set<Offset> seen;
  for (const auto& x : spec.offsets) {
    if (static_cast<int>(x.size()) != spec.d)
      throw ModelError(ModelErrorKind::BadDimension, "offset " + offset_str(x) + " has wrong length", x);
    if (std::all_of(x.begin(), x.end(), [](Coord c) { return c == 0; }))
      throw ModelError(ModelErrorKind::ZeroOffset, "the origin is not a valid offset", x);
    if (!seen.insert(x).second)
      throw ModelError(ModelErrorKind::DuplicateOffset, "offset " + offset_str(x) + " repeated", x);
  }
  for (const auto& x : spec.offsets) {
    if (x.back() <= 0)
      throw ModelError(ModelErrorKind::NonPositiveTimeComponent,
                       "offset " + offset_str(x) + " has time component <= 0", x);
  }
  auto idx = lattice_index(spec);
  if (!idx || *idx != 1) {
    std::uint64_t k = idx ? *idx : 0;
    throw ModelError(ModelErrorKind::ProperSublattice,
                     idx ? "offsets generate a sublattice of index " + std::to_string(k)
                         : "offsets generate a rank-deficient lattice",
                     {}, k);
  }

  NormalizedModel m;
  m.spec.d = spec.d;
  m.spec.offsets.assign(seen.begin(), seen.end());
  m.reach.assign(spec.d - 1, 0);
  m.gamma = 0;
  m.R = 0;
  for (const auto& x : m.spec.offsets) {
    SplitOffset so;
    so.y.assign(x.begin(), x.end() - 1);
    so.u = static_cast<int>(x.back());
    Coord norm = 0;
    for (int i = 0; i < spec.d - 1; ++i) {
      norm = std::max(norm, std::abs(so.y[i]));
      m.reach[i] = std::max(m.reach[i], std::abs(so.y[i]));
    }
    m.gamma = std::max(m.gamma, Rational(norm, so.u));
    m.R = std::max(m.R, so.u);
    m.split_offsets.push_back(std::move(so));
  }
  return m;
}

NeighborhoodSpec spec_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("d") || !j.contains("X"))
    throw std::invalid_argument("model must be an object with keys \"d\" and \"X\"");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() != "d" && it.key() != "X")
      throw std::invalid_argument("unknown model key \"" + it.key() + "\"");
  }
  NeighborhoodSpec s;
  s.d = j.at("d").get<int>();
  for (const auto& x : j.at("X")) s.offsets.push_back(x.get<Offset>());
  return s;
}

nlohmann::json to_json(const NeighborhoodSpec& spec) {
  return nlohmann::json{{"d", spec.d}, {"X", spec.offsets}};
}

NeighborhoodSpec load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file " + path);
  return spec_from_json(nlohmann::json::parse(in));
}

}  // namespace gosp
