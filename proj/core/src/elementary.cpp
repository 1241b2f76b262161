#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "ictx/measure_io.hpp"
#include "ictx/universality.hpp"

namespace ictx {

void AlgebraElement::validate() const {
  if (d < 1 || dprime < 1 || terms < 1 || factors < 1)
    throw std::invalid_argument("algebra element: bad dimensions");
  if (params.size() != static_cast<std::size_t>(dprime * terms * factors))
    throw std::invalid_argument("algebra element: grid size mismatch");
  for (const ElementaryParams& p : params) {
    if (p.a.size() != d) throw std::invalid_argument("algebra element: bad a dim");
    if (!p.a.allFinite() || !std::isfinite(p.b) || !std::isfinite(p.c) ||
        !std::isfinite(p.v))
      throw std::invalid_argument("algebra element: non-finite parameter");
  }
}

double gamma_elementary(const ElementaryParams& lambda, const ParticleMeasure& mu,
                        const Vec& x) {
  if (x.size() != lambda.a.size())
    throw std::invalid_argument("gamma_elementary: dimension mismatch");
  const double u = lambda.a.dot(x) + lambda.b;
  const double cu = lambda.c * u;
  double m = -std::numeric_limits<double>::infinity();
  std::vector<double> scores(mu.size()), vals(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    vals[i] = lambda.a.dot(mu.point(i)) + lambda.b;
    scores[i] = cu * vals[i];
    m = std::max(m, scores[i]);
  }
  double denom = 0.0, num = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double e = mu.weight(i) * std::exp(scores[i] - m);
    denom += e;
    num += e * vals[i];
  }
  return u + lambda.v * num / denom;
}

LayerStack elementary_as_stack(const ElementaryParams& lambda) {
  // Affine F(x) = <a,x>+b followed by a 1-D single-head attention with
  // q*k = c and value v (the declared key dimension is 1).
  Mat A(1, lambda.a.size());
  A.row(0) = lambda.a.transpose();
  Vec b(1);
  b(0) = lambda.b;

  MultiHeadParams att;
  att.d_in = 1;
  att.d_head = 1;
  att.k = 1;
  MultiHeadParams::Head head;
  head.W = Mat::Ones(1, 1);
  head.params.K = Mat::Ones(1, 1);
  head.params.Q = Mat::Constant(1, 1, lambda.c);
  head.params.V = Mat::Constant(1, 1, lambda.v);
  att.heads.push_back(std::move(head));

  LayerStack stack;
  stack.layers.emplace_back(MlpParams::affine(std::move(A), std::move(b)));
  stack.layers.emplace_back(AttentionLayer{std::move(att), false});
  return stack;
}

MatchReport equals_attention_form(
    const ElementaryParams& lambda,
    const std::vector<std::pair<ParticleMeasure, Vec>>& fixtures) {
  const LayerStack stack = elementary_as_stack(lambda);
  MatchReport report;
  for (const auto& [mu, x] : fixtures) {
    const double direct = gamma_elementary(lambda, mu, x);
    const Vec via_attention = compose_unmasked(stack, mu, x);
    report.max_deviation =
        std::max(report.max_deviation, std::abs(direct - via_attention(0)));
    ++report.fixture_count;
  }
  return report;
}

Vec eval_algebra(const AlgebraElement& A, const ParticleMeasure& mu, const Vec& x) {
  A.validate();
  Vec out(A.dprime);
  for (int h = 0; h < A.dprime; ++h) {
    double sum = 0.0;
    for (int n = 0; n < A.terms; ++n) {
      double prod = 1.0;
      for (int t = 0; t < A.factors; ++t)
        prod *= gamma_elementary(A.at(h, n, t), mu, x);
      sum += prod;
    }
    out(h) = sum;
  }
  return out;
}

namespace {

ElementaryParams unit_factor(int d) {
  // a=0, b=1, v=0 gives the constant function 1.
  return ElementaryParams{Vec::Zero(d), 1.0, 0.0, 0.0};
}

AlgebraElement pad_factors(const AlgebraElement& A, int factors) {
  if (A.factors == factors) return A;
  AlgebraElement out;
  out.d = A.d;
  out.dprime = A.dprime;
  out.terms = A.terms;
  out.factors = factors;
  out.params.resize(static_cast<std::size_t>(out.dprime * out.terms * factors),
                    unit_factor(A.d));
  for (int h = 0; h < A.dprime; ++h)
    for (int n = 0; n < A.terms; ++n)
      for (int t = 0; t < A.factors; ++t) out.at(h, n, t) = A.at(h, n, t);
  return out;
}

}  // namespace

AlgebraElement algebra_sum(const AlgebraElement& A, const AlgebraElement& B) {
  if (A.d != B.d || A.dprime != B.dprime)
    throw std::invalid_argument("algebra_sum: dimension mismatch");
  const int factors = std::max(A.factors, B.factors);
  const AlgebraElement a = pad_factors(A, factors);
  const AlgebraElement b = pad_factors(B, factors);
  AlgebraElement out;
  out.d = a.d;
  out.dprime = a.dprime;
  out.terms = a.terms + b.terms;
  out.factors = factors;
  out.params.resize(static_cast<std::size_t>(out.dprime * out.terms * factors),
                    unit_factor(a.d));
  for (int h = 0; h < out.dprime; ++h) {
    for (int n = 0; n < a.terms; ++n)
      for (int t = 0; t < factors; ++t) out.at(h, n, t) = a.at(h, n, t);
    for (int n = 0; n < b.terms; ++n)
      for (int t = 0; t < factors; ++t) out.at(h, a.terms + n, t) = b.at(h, n, t);
  }
  return out;
}

AlgebraElement algebra_product(const AlgebraElement& A, const AlgebraElement& B) {
  if (A.d != B.d || A.dprime != B.dprime)
    throw std::invalid_argument("algebra_product: dimension mismatch");
  AlgebraElement out;
  out.d = A.d;
  out.dprime = A.dprime;
  out.terms = A.terms * B.terms;
  out.factors = A.factors + B.factors;
  out.params.resize(
      static_cast<std::size_t>(out.dprime * out.terms * out.factors),
      unit_factor(A.d));
  for (int h = 0; h < out.dprime; ++h)
    for (int na = 0; na < A.terms; ++na)
      for (int nb = 0; nb < B.terms; ++nb) {
        const int n = na * B.terms + nb;
        for (int t = 0; t < A.factors; ++t) out.at(h, n, t) = A.at(h, na, t);
        for (int t = 0; t < B.factors; ++t)
          out.at(h, n, A.factors + t) = B.at(h, nb, t);
      }
  return out;
}

double laplace(const ParticleMeasure& mu, const Vec& a, double c) {
  if (a.size() != mu.dim()) throw std::invalid_argument("laplace: dimension mismatch");
  double m = -std::numeric_limits<double>::infinity();
  std::vector<double> scores(mu.size()), vals(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    vals[i] = a.dot(mu.point(i));
    scores[i] = c * vals[i];
    m = std::max(m, scores[i]);
  }
  double denom = 0.0, num = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double e = mu.weight(i) * std::exp(scores[i] - m);
    denom += e;
    num += e * vals[i];
  }
  return num / denom;
}

double laplace_k(const ParticleMeasure& mu, double c, int k) {
  if (mu.dim() != 1) throw std::invalid_argument("laplace_k: 1-D measures only");
  if (k < 1) throw std::invalid_argument("laplace_k: k must be >= 1");
  double m = -std::numeric_limits<double>::infinity();
  std::vector<double> scores(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    scores[i] = c * mu.point(i)(0);
    m = std::max(m, scores[i]);
  }
  double denom = 0.0, num = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double e = mu.weight(i) * std::exp(scores[i] - m);
    denom += e;
    num += e * std::pow(mu.point(i)(0), k);
  }
  return num / denom;
}

double separation_probe(const ParticleMeasure& mu, const ParticleMeasure& nu,
                        int samples, std::uint64_t seed) {
  if (mu.dim() != nu.dim())
    throw std::invalid_argument("separation_probe: dimension mismatch");
  const Eigen::Index d = mu.dim();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> cdist(-3.0, 3.0);
  const double norms[] = {0.5, 1.0, 2.0};

  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    Vec a;
    double c;
    if (s < 2 * d) {
      // axis probes first, at c = 0 (moment gaps) and c = 1
      a = Vec::Zero(d);
      a(s / 2) = (s % 2 == 0) ? 1.0 : -1.0;
      c = (s % 4 < 2) ? 0.0 : 1.0;
    } else {
      a = Vec::NullaryExpr(d, [&](Eigen::Index) { return gauss(rng); });
      const double len = a.norm();
      if (len < 1e-12) continue;
      a *= norms[static_cast<std::size_t>(s) % 3] / len;
      c = cdist(rng);
    }
    worst = std::max(worst, std::abs(laplace(mu, a, c) - laplace(nu, a, c)));
  }
  return worst;
}

std::vector<LiftedFactor> lift_to_vector(const AlgebraElement& A) {
  A.validate();
  const int dp = A.dprime;
  std::vector<LiftedFactor> out;
  out.reserve(static_cast<std::size_t>(A.terms * A.factors));
  for (int n = 0; n < A.terms; ++n)
    for (int t = 0; t < A.factors; ++t) {
      MultiHeadParams att;
      att.d_in = dp;
      att.d_head = 1;
      att.k = 1;
      Mat Aff = Mat::Zero(dp, A.d);
      Vec bff = Vec::Zero(dp);
      for (int h = 0; h < dp; ++h) {
        const ElementaryParams& lam = A.at(h, n, t);
        MultiHeadParams::Head head;
        head.W = Mat::Zero(dp, 1);
        head.W(h, 0) = 1.0;  // one-hot combination e_h
        head.params.K = Mat::Zero(1, dp);
        head.params.K(0, h) = 1.0;
        head.params.Q = Mat::Zero(1, dp);
        head.params.Q(0, h) = lam.c;
        head.params.V = Mat::Zero(1, dp);
        head.params.V(0, h) = lam.v;
        att.heads.push_back(std::move(head));
        Aff.row(h) = lam.a.transpose();
        bff(h) = lam.b;
      }
      out.push_back({std::move(att), MlpParams::affine(std::move(Aff), std::move(bff)),
                     n, t});
    }
  return out;
}

Vec lifted_factor_value(const LiftedFactor& f, const ParticleMeasure& mu,
                        const Vec& x) {
  LayerStack stack;
  stack.layers.emplace_back(f.affine);
  stack.layers.emplace_back(AttentionLayer{f.attention, false});
  return compose_unmasked(stack, mu, x);
}

void write_algebra(std::ostream& os, const AlgebraElement& A) {
  os << "algebra d=" << A.d << " dprime=" << A.dprime << " terms=" << A.terms
     << " factors=" << A.factors << "\n";
  for (int h = 0; h < A.dprime; ++h)
    for (int n = 0; n < A.terms; ++n)
      for (int t = 0; t < A.factors; ++t) {
        const ElementaryParams& p = A.at(h, n, t);
        os << "lambda t=" << t << " n=" << n << " h=" << h << " b="
           << format_double(p.b) << " c=" << format_double(p.c) << " v="
           << format_double(p.v) << " a=";
        for (Eigen::Index i = 0; i < p.a.size(); ++i) {
          if (i) os << ' ';
          os << format_double(p.a(i));
        }
        os << "\n";
      }
}

AlgebraElement read_algebra(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("algebra file: empty");
  AlgebraElement A;
  {
    std::istringstream hs(line);
    std::string word;
    hs >> word;
    if (word != "algebra") throw std::runtime_error("algebra file: bad magic");
    std::string tok;
    while (hs >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) throw std::runtime_error("algebra file: bad header");
      const std::string key = tok.substr(0, eq);
      const int val = std::stoi(tok.substr(eq + 1));
      if (key == "d") A.d = val;
      else if (key == "dprime") A.dprime = val;
      else if (key == "terms") A.terms = val;
      else if (key == "factors") A.factors = val;
      else throw std::runtime_error("algebra file: unknown header key " + key);
    }
  }
  A.params.resize(static_cast<std::size_t>(A.dprime * A.terms * A.factors),
                  ElementaryParams{Vec::Zero(A.d), 0.0, 0.0, 0.0});
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word != "lambda") throw std::runtime_error("algebra file: expected lambda");
    int t = -1, n = -1, h = -1;
    ElementaryParams p{Vec::Zero(A.d), 0.0, 0.0, 0.0};
    std::string tok;
    while (ls >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) throw std::runtime_error("algebra file: bad token");
      const std::string key = tok.substr(0, eq);
      const std::string val = tok.substr(eq + 1);
      if (key == "t") t = std::stoi(val);
      else if (key == "n") n = std::stoi(val);
      else if (key == "h") h = std::stoi(val);
      else if (key == "b") p.b = std::stod(val);
      else if (key == "c") p.c = std::stod(val);
      else if (key == "v") p.v = std::stod(val);
      else if (key == "a") {
        p.a(0) = std::stod(val);
        for (Eigen::Index i = 1; i < A.d; ++i)
          if (!(ls >> p.a(i))) throw std::runtime_error("algebra file: short a");
      } else {
        throw std::runtime_error("algebra file: unknown key " + key);
      }
    }
    if (t < 0 || n < 0 || h < 0 || t >= A.factors || n >= A.terms || h >= A.dprime)
      throw std::runtime_error("algebra file: index out of range");
    A.at(h, n, t) = std::move(p);
  }
  A.validate();
  return A;
}

void save_algebra(const std::string& path, const AlgebraElement& A) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_algebra(os, A);
}

AlgebraElement load_algebra(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path);
  return read_algebra(is);
}

}  // namespace ictx
