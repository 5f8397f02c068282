#include "parablab/finsler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "parablab/errors.hpp"
#include "parablab/optimize.hpp"

namespace parablab {

double Tensor3::contract(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c) const {
  double s = 0.0;
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j < m_; ++j)
      for (int k = 0; k < m_; ++k) s += (*this)(i, j, k) * a[i] * b[j] * c[k];
  return s;
}

Eigen::MatrixXd Tensor3::slice(const Eigen::VectorXd& a) const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m_, m_);
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j < m_; ++j)
      for (int k = 0; k < m_; ++k) out(j, k) += a[i] * (*this)(i, j, k);
  return out;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Jet {
  double v = 0.0;
  Eigen::VectorXd g;
  Eigen::MatrixXd h;
  Tensor3 t;
};

// Derivatives of |w|^{2m} up to `order`.
Jet radial_power(const Eigen::VectorXd& w, double m, int order) {
  const int d = static_cast<int>(w.size());
  const double rho = w.squaredNorm();
  Jet j;
  j.v = std::pow(rho, m);
  if (order < 1) return j;
  j.g = 2.0 * m * std::pow(rho, m - 1.0) * w;
  if (order < 2) return j;
  const double c2 = 4.0 * m * (m - 1.0) * std::pow(rho, m - 2.0);
  j.h = c2 * w * w.transpose() + 2.0 * m * std::pow(rho, m - 1.0) * Eigen::MatrixXd::Identity(d, d);
  if (order < 3) return j;
  const double c3 = 8.0 * m * (m - 1.0) * (m - 2.0) * std::pow(rho, m - 3.0);
  j.t = Tensor3(d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c) {
        double v = c3 * w[a] * w[b] * w[c];
        if (a == b) v += c2 * w[c];
        if (a == c) v += c2 * w[b];
        if (b == c) v += c2 * w[a];
        j.t(a, b, c) = v;
      }
  return j;
}

// r + delta * S4 * r^{-3} with S4 = sum w_i^4.
Jet quartic_jet(const Eigen::VectorXd& w, double delta, int order) {
  const int d = static_cast<int>(w.size());
  const Jet r = radial_power(w, 0.5, order);
  const Jet q = radial_power(w, -1.5, order);
  const double s4 = w.array().pow(4).sum();
  Jet j;
  j.v = r.v + delta * s4 * q.v;
  if (order < 1) return j;
  const Eigen::VectorXd s4g = 4.0 * w.array().cube().matrix();
  j.g = r.g + delta * (q.v * s4g + s4 * q.g);
  if (order < 2) return j;
  const Eigen::MatrixXd s4h = (12.0 * w.array().square()).matrix().asDiagonal();
  j.h = r.h + delta * (q.v * s4h + s4g * q.g.transpose() + q.g * s4g.transpose() + s4 * q.h);
  if (order < 3) return j;
  j.t = Tensor3(d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c) {
        double v = s4 * q.t(a, b, c);
        if (a == b && b == c) v += q.v * 24.0 * w[a];
        v += s4h(a, b) * q.g[c] + s4h(a, c) * q.g[b] + s4h(b, c) * q.g[a];
        v += s4g[a] * q.h(b, c) + s4g[b] * q.h(a, c) + s4g[c] * q.h(a, b);
        j.t(a, b, c) = r.t(a, b, c) + delta * v;
      }
  return j;
}

Eigen::MatrixXd tangent_basis(const Eigen::VectorXd& g) {
  const Eigen::Index m = g.size();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  const Eigen::MatrixXd Q = qr.householderQ();
  return Q.rightCols(m - 1);
}

std::vector<Eigen::VectorXd> unit_covectors(int m, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<Eigen::VectorXd> out;
  for (int i = 0; i < m; ++i) out.push_back(Eigen::VectorXd::Unit(m, i));
  out.push_back(Eigen::VectorXd::Ones(m).normalized());
  while (static_cast<int>(out.size()) < count) {
    Eigen::VectorXd v(m);
    for (int i = 0; i < m; ++i) v[i] = nd(rng);
    if (v.norm() > 1e-8) out.push_back(v.normalized());
  }
  return out;
}

// Spatial directions scaled onto the unit ball of the norm.
std::vector<Eigen::VectorXd> unit_ball_directions(const FinslerNorm& nf, int count) {
  const Eigen::MatrixXd d = sphere_directions(nf.n, count);
  std::vector<Eigen::VectorXd> out;
  for (Eigen::Index k = 0; k < d.cols(); ++k) {
    const Eigen::VectorXd p = d.col(k);
    out.push_back(p / nf.value(spatial(p)));
  }
  return out;
}

std::vector<double> scales_with_zero(const FinslerSampling& s) {
  std::vector<double> v{0.0};
  for (double x : logspace(s.s_min, s.s_max, s.scales)) v.push_back(x);
  return v;
}

}  // namespace

FinslerNorm elliptic_norm(const Eigen::MatrixXd& M, std::string id) {
  if (M.rows() != M.cols() || M.rows() < 2) throw DomainError("elliptic_norm: M must be square of size n + 1 >= 2");
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-14 * M.cwiseAbs().maxCoeff())
    throw DomainError("elliptic_norm: M must be symmetric");
  if (Eigen::LLT<Eigen::MatrixXd>(M).info() != Eigen::Success)
    throw DomainError("elliptic_norm: M must be positive definite");
  FinslerNorm f;
  f.n = static_cast<int>(M.rows()) - 1;
  f.id = id.empty() ? "elliptic" : std::move(id);
  f.symmetric_flag = M.row(0).tail(f.n).cwiseAbs().maxCoeff() == 0.0;
  f.value = [M](const Eigen::VectorXd& w) { return std::sqrt(w.dot(M * w)); };
  f.grad = [M](const Eigen::VectorXd& w) -> Eigen::VectorXd { return M * w / std::sqrt(w.dot(M * w)); };
  f.hess = [M](const Eigen::VectorXd& w) -> Eigen::MatrixXd {
    const double F = std::sqrt(w.dot(M * w));
    const Eigen::VectorXd g = M * w / F;
    return (M - g * g.transpose()) / F;
  };
  f.third = [M](const Eigen::VectorXd& w) {
    const double F = std::sqrt(w.dot(M * w));
    const Eigen::VectorXd g = M * w / F;
    const Eigen::MatrixXd H = (M - g * g.transpose()) / F;
    const int d = static_cast<int>(w.size());
    Tensor3 t(d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c) t(a, b, c) = -(H(a, b) * g[c] + H(a, c) * g[b] + H(b, c) * g[a]) / F;
    return t;
  };
  return f;
}

FinslerNorm euclid_norm(int n) {
  if (n < 1) throw DomainError("euclid_norm: n must be >= 1");
  FinslerNorm f = elliptic_norm(Eigen::MatrixXd::Identity(n + 1, n + 1), "euclid");
  return f;
}

FinslerNorm quartic_norm(int n, double delta) {
  if (n < 1) throw DomainError("quartic_norm: n must be >= 1");
  if (!std::isfinite(delta)) throw DomainError("quartic_norm: delta must be finite");
  std::ostringstream id;
  id << "quartic:" << delta;
  FinslerNorm f;
  f.id = id.str();
  f.n = n;
  f.symmetric_flag = true;
  f.value = [delta](const Eigen::VectorXd& w) { return quartic_jet(w, delta, 0).v; };
  f.grad = [delta](const Eigen::VectorXd& w) { return quartic_jet(w, delta, 1).g; };
  f.hess = [delta](const Eigen::VectorXd& w) { return quartic_jet(w, delta, 2).h; };
  f.third = [delta](const Eigen::VectorXd& w) { return quartic_jet(w, delta, 3).t; };
  const double curv = min_tangent_curvature(f);
  if (!(curv > 1e-6)) {
    std::ostringstream os;
    os << "quartic_norm: delta = " << delta << " fails the convexity probe (min tangent curvature " << curv << ")";
    throw DomainError(os.str());
  }
  return f;
}

double min_tangent_curvature(const FinslerNorm& nf, int samples, std::uint64_t seed) {
  double worst = kInf;
  for (const auto& w : unit_covectors(nf.n + 1, samples, seed)) {
    if (!(nf.value(w) > 0.0)) return -kInf;
    const Eigen::MatrixXd B = tangent_basis(nf.grad(w));
    const Eigen::MatrixXd Ht = B.transpose() * nf.hess(w) * B;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Ht, Eigen::EigenvaluesOnly);
    worst = std::min(worst, es.eigenvalues().minCoeff());
  }
  return worst;
}

FinslerNorm norm_from_id(const std::string& id, int n) {
  if (id == "euclid") return euclid_norm(n);
  const auto colon = id.find(':');
  const std::string family = id.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : id.substr(colon + 1);
  if (family == "quartic") {
    if (arg.empty()) throw DomainError("norm id '" + id + "': missing delta");
    std::size_t used = 0;
    const double delta = std::stod(arg, &used);
    if (used != arg.size()) throw DomainError("norm id '" + id + "': bad delta");
    FinslerNorm f = quartic_norm(n, delta);
    f.id = id;
    return f;
  }
  if (family == "elliptic") {
    std::vector<std::vector<double>> rows;
    std::stringstream rs(arg);
    std::string row;
    while (std::getline(rs, row, ';')) {
      std::vector<double> r;
      std::stringstream es(row);
      std::string e;
      while (std::getline(es, e, ',')) {
        std::size_t used = 0;
        r.push_back(std::stod(e, &used));
        if (used != e.size()) throw DomainError("norm id '" + id + "': bad matrix entry '" + e + "'");
      }
      rows.push_back(std::move(r));
    }
    const int m = n + 1;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
    if (rows.size() == 1 && static_cast<int>(rows[0].size()) == m) {
      for (int i = 0; i < m; ++i) M(i, i) = rows[0][i];
    } else if (static_cast<int>(rows.size()) == m) {
      for (int i = 0; i < m; ++i) {
        if (static_cast<int>(rows[i].size()) != m) throw DomainError("norm id '" + id + "': ragged matrix");
        for (int j = 0; j < m; ++j) M(i, j) = rows[i][j];
      }
    } else {
      throw DomainError("norm id '" + id + "': matrix must have size n + 1");
    }
    return elliptic_norm(M, id);
  }
  throw DomainError("unknown norm id '" + id + "'");
}

std::vector<FinslerNorm> builtin_norms(int n) {
  if (n < 1) throw DomainError("builtin_norms: n must be >= 1");
  std::ostringstream diag;
  diag << "elliptic:1";
  for (int i = 1; i <= n; ++i) diag << "," << 1.0 + 0.5 * i;
  return {euclid_norm(n), norm_from_id(diag.str(), n), norm_from_id("quartic:0.05", n)};
}

Eigen::VectorXd lift(const Eigen::VectorXd& p) {
  Eigen::VectorXd z(p.size() + 1);
  z << -1.0, p;
  return z;
}

Eigen::VectorXd spatial(const Eigen::VectorXd& q) {
  Eigen::VectorXd z(q.size() + 1);
  z << 0.0, q;
  return z;
}

Eigen::VectorXd hat(const FinslerNorm& nf, const Eigen::VectorXd& z, const Eigen::VectorXd& x) {
  return x - nf.grad(z).dot(x) / nf.value(z) * z;
}

Eigen::MatrixXd flow_coefficients(const FinslerNorm& nf, const Eigen::VectorXd& p) {
  if (p.size() != nf.n) throw DomainError("flow_coefficients: p has the wrong dimension");
  const Eigen::VectorXd z = lift(p);
  return nf.value(z) * nf.hess(z).bottomRightCorner(nf.n, nf.n);
}

GraphFlowND aniso_flow(const FinslerNorm& nf) {
  double lam = 0.0;
  for (const auto& w : unit_covectors(nf.n + 1, 2000, 3)) {
    const Eigen::MatrixXd G = nf.value(w) * nf.hess(w).bottomRightCorner(nf.n, nf.n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
    lam = std::max(lam, es.eigenvalues().maxCoeff());
  }
  lam *= 1.05;
  GraphFlowND f;
  f.id = "aniso:" + nf.id;
  f.n = nf.n;
  f.coeff = [nf](const Eigen::VectorXd& p) { return flow_coefficients(nf, p); };
  f.Lambda_of_K = [lam](double) { return lam; };
  return f;
}

nlohmann::json FinslerSampling::to_json() const {
  return {{"directions", directions}, {"scales", scales},       {"s_min", s_min},
          {"s_max", s_max},           {"covectors", covectors}, {"tangent_dirs", tangent_dirs},
          {"seed", seed}};
}

APEstimate estimate_A_P(const FinslerNorm& nf, double P, const FinslerSampling& s) {
  if (!(P > 0.0) || !(s.s_max > P)) throw DomainError("estimate_A_P: need 0 < P < s_max");
  APEstimate r;
  r.P = P;
  r.A = kInf;
  r.limit = kInf;
  const Eigen::VectorXd e0 = Eigen::VectorXd::Unit(nf.n + 1, 0);
  for (const auto& ph : unit_ball_directions(nf, s.directions)) {
    double b_last = 0.0;
    for (double sc : logspace(P, s.s_max, s.scales)) {
      const Eigen::VectorXd p = sc * ph;
      const Eigen::VectorXd z = lift(p);
      const Eigen::VectorXd sp = spatial(p);
      b_last = nf.value(z) * sp.dot(nf.hess(z) * sp);
      r.A = std::min(r.A, b_last);
    }
    const Eigen::VectorXd w = spatial(ph);
    const double lim = nf.value(w) * e0.dot(nf.hess(w) * e0);
    r.limit = std::min(r.limit, lim);
    r.plateau_gap = std::max(r.plateau_gap, std::abs(b_last - lim));
  }
  r.plateau_reached = r.plateau_gap <= 1e-3 * std::max(1.0, r.limit);
  return r;
}

double cartan_Q(const FinslerNorm& nf, const Eigen::VectorXd& z, const Eigen::VectorXd& p,
                const Eigen::VectorXd& q, const Eigen::VectorXd& r) {
  if (!(z.norm() > 0.0)) throw DomainError("cartan_Q: z must be nonzero");
  const double F = nf.value(z);
  return F * F * nf.third(z).contract(hat(nf, z, p), hat(nf, z, q), hat(nf, z, r));
}

SmallnessResult check_smallness(const FinslerNorm& nf, const FinslerSampling& s) {
  SmallnessResult res;
  const int n = nf.n;
  const Eigen::MatrixXd dirs = sphere_directions(n, s.tangent_dirs);
  for (const auto& z : unit_covectors(n + 1, s.covectors, s.seed)) {
    const double F = nf.value(z);
    const Eigen::MatrixXd B = tangent_basis(nf.grad(z));
    const Eigen::MatrixXd Ht = B.transpose() * nf.hess(z) * B;
    Eigen::LLT<Eigen::MatrixXd> llt(Ht);
    if (llt.info() != Eigen::Success) throw DomainError("check_smallness: degenerate tangent Hessian");
    // columns of C are H-orthonormal tangent covectors
    const Eigen::MatrixXd C = B * llt.matrixL().transpose().solve(Eigen::MatrixXd::Identity(n, n));
    const Tensor3 T = nf.third(z);
    auto ratio = [&](const Eigen::VectorXd& a) {
      const Eigen::VectorXd v = C * a.normalized();
      return std::abs(F * F * T.contract(v, v, v)) / std::pow(F, 1.5);
    };
    double best = 0.0;
    Eigen::VectorXd arg = dirs.col(0);
    for (Eigen::Index k = 0; k < dirs.cols(); ++k) {
      const double v = ratio(dirs.col(k));
      if (v > best) {
        best = v;
        arg = dirs.col(k);
      }
    }
    if (n > 1 && best > 0.0) {
      NelderMeadOptions o;
      o.initial_step = 0.02;
      const Minimum m = nelder_mead([&](const Eigen::VectorXd& a) { return -ratio(a); }, arg, o);
      best = std::max(best, -m.value);
    }
    if (best >= res.C1) {
      res.C1 = best;
      res.witness = z;
    }
  }
  const double c2 = res.C1 * res.C1, rn = std::sqrt(static_cast<double>(n));
  res.periodic_ok = c2 < 4.0 / rn;
  res.interior_ok = c2 < 2.0 / rn;
  return res;
}

VerificationReport check_symmetry(const FinslerNorm& nf, const FinslerSampling& s, double tol) {
  const int m = nf.n + 1;
  const Eigen::VectorXd e0 = Eigen::VectorXd::Unit(m, 0);
  double defect = 0.0;
  Witness wit;
  std::string worst_probe = "none";
  auto record = [&](double d, const Eigen::VectorXd& p, const char* probe) {
    if (d > defect) {
      defect = d;
      wit = Witness{std::vector<double>(p.data(), p.data() + p.size()), 0.0, {d}};
      worst_probe = probe;
    }
  };
  for (const auto& ph : unit_ball_directions(nf, s.directions)) {
    for (double sc : logspace(s.s_min, s.s_max, s.scales)) {
      const Eigen::VectorXd w = spatial(sc * ph);
      record(std::abs(nf.value(w + e0) - nf.value(w - e0)), sc * ph, "reflection");
    }
    const Eigen::VectorXd w = spatial(ph);
    const double F = nf.value(w);
    record(std::abs(nf.grad(w).dot(e0)), ph, "first");
    const Eigen::MatrixXd H = nf.hess(w);
    record(F * H.row(0).tail(nf.n).cwiseAbs().maxCoeff(), ph, "second");
    const Eigen::MatrixXd T0 = nf.third(w).slice(e0);
    record(F * F * T0.bottomRightCorner(nf.n, nf.n).cwiseAbs().maxCoeff(), ph, "third");
    record(F * F * std::abs(T0(0, 0)), ph, "third-vertical");
  }
  return VerificationReport::make("symmetry:" + nf.id, defect, tol, wit,
                                  {{"norm", nf.id},
                                   {"symmetric_flag", nf.symmetric_flag},
                                   {"worst_probe", worst_probe},
                                   {"sampling", s.to_json()}});
}

double trace_lower_bound(const FinslerNorm& nf, const FinslerSampling& s) {
  if (nf.n < 2) throw DomainError("trace_lower_bound: needs n > 1");
  double k = kInf;
  for (const auto& ph : unit_ball_directions(nf, s.directions)) {
    for (double sc : scales_with_zero(s)) {
      k = std::min(k, flow_coefficients(nf, sc * ph).trace());
    }
  }
  return k;
}

double cross_term_bound(const FinslerNorm& nf, const FinslerSampling& s) {
  if (!nf.symmetric_flag) throw DomainError("cross_term_bound: norm does not claim the symmetry condition");
  const auto dirs = unit_ball_directions(nf, s.directions);
  double c2 = -kInf;
  for (const auto& ph : dirs) {
    for (double sc : scales_with_zero(s)) {
      const Eigen::VectorXd z = lift(sc * ph);
      const double F = nf.value(z);
      const Eigen::VectorXd Hp = nf.hess(z) * spatial(sc * ph);
      for (const auto& q : dirs) c2 = std::max(c2, F * F * Hp.dot(spatial(q)));
    }
  }
  return c2;
}

std::map<double, double> s_eps_table(const FinslerNorm& nf, const std::vector<double>& eps,
                                     const FinslerSampling& s) {
  const auto dirs = unit_ball_directions(nf, s.directions);
  const std::vector<double> scales = logspace(s.s_min, s.s_max, s.scales);
  std::vector<double> worst(scales.size(), 0.0);
  for (std::size_t k = 0; k < scales.size(); ++k) {
    for (const auto& ph : dirs) {
      const Eigen::VectorXd p = spatial(scales[k] * ph);
      const Eigen::VectorXd z = lift(scales[k] * ph);
      const double F = nf.value(z);
      const Eigen::VectorXd g = nf.grad(z);
      const Eigen::MatrixXd H = nf.hess(z);
      const Tensor3 T = nf.third(z);
      const double Gpp = F * p.dot(H * p);
      // D(F D^2F)(p, ., .) = DF(p) D^2F + F D^3F(p, ., .)
      const Eigen::MatrixXd DG = g.dot(p) * H + F * T.slice(p);
      for (const auto& q : dirs) {
        const Eigen::VectorXd qh = hat(nf, z, spatial(q));
        const double Gqq = F * qh.dot(H * qh);
        const double num = std::abs(F * qh.dot(DG * qh));
        const double den = std::sqrt(Gpp) * Gqq;
        if (den > 0.0) worst[k] = std::max(worst[k], num / den);
      }
    }
  }
  std::map<double, double> out;
  for (double e : eps) {
    double S = kInf;
    for (std::size_t k = scales.size(); k-- > 0;) {
      if (worst[k] > e) break;
      S = scales[k];
    }
    out[e] = S;
  }
  return out;
}

AnisoConstants certify(const FinslerNorm& nf, double P, const FinslerSampling& s) {
  AnisoConstants c;
  c.norm_id = nf.id;
  c.n = nf.n;
  c.sampling = s;
  const APEstimate ap = estimate_A_P(nf, P, s);
  c.A = ap.A;
  c.P = ap.P;
  c.k = nf.n > 1 ? trace_lower_bound(nf, s) : kNaN;
  c.C1 = check_smallness(nf, s).C1;
  if (nf.symmetric_flag) {
    c.C2 = cross_term_bound(nf, s);
    c.S_eps = s_eps_table(nf, {0.5, 0.1, 0.01}, s);
  } else {
    c.C2 = kNaN;
  }
  return c;
}

nlohmann::json AnisoConstants::to_json() const {
  auto num = [](double v) -> nlohmann::json {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
  };
  nlohmann::json seps = nlohmann::json::object();
  for (const auto& [e, S] : S_eps) {
    std::ostringstream key;
    key << e;
    seps[key.str()] = num(S);
  }
  return {{"norm", norm_id}, {"n", n},       {"A", num(A)},     {"P", num(P)},
          {"k", num(k)},     {"C1", num(C1)}, {"C2", num(C2)},  {"S_eps", seps},
          {"sampling", sampling.to_json()}};
}

}  // namespace parablab
