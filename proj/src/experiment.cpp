#include "parablab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "parablab/barriers.hpp"
#include "parablab/errors.hpp"
#include "parablab/finsler.hpp"

namespace fs = std::filesystem;

namespace parablab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string join(const std::vector<std::string>& v, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
  return out;
}

void require_known(const Config& cfg, const std::string& section, const std::set<std::string>& allowed,
                   bool allow_other = false) {
  for (const auto& k : cfg.keys(section)) {
    if (allowed.count(k)) continue;
    if (allow_other && k.rfind("other.", 0) == 0) continue;
    throw ValidationError(section + "." + k, "unknown key");
  }
}

// Lengths accept a multiple of the grid spacing, e.g. "4h".
double length_or(const Config& cfg, const std::string& path, double h, double fallback) {
  const auto v = cfg.find(path);
  if (!v) return fallback;
  if (!v->empty() && v->back() == 'h') {
    const std::string head = v->substr(0, v->size() - 1);
    return (head.empty() ? 1.0 : parse_number(head, path)) * h;
  }
  return parse_number(*v, path);
}

std::vector<double> broadcast(const Config& cfg, const std::string& path, int n, double fallback) {
  if (!cfg.has(path)) return std::vector<double>(n, fallback);
  auto v = cfg.numbers(path);
  if (v.size() == 1) v.assign(n, v[0]);
  if (static_cast<int>(v.size()) != n) throw ValidationError(path, "expected " + std::to_string(n) + " entries");
  return v;
}

std::vector<double> parse_times(const std::string& text, const std::string& path) {
  for (const char* fn : {"linspace", "logspace"}) {
    const std::string name(fn);
    if (text.rfind(name + "(", 0) != 0) continue;
    if (text.back() != ')') throw ValidationError(path, "unterminated " + name);
    const auto args = split_trim(text.substr(name.size() + 1, text.size() - name.size() - 2), ',');
    if (args.size() != 3) throw ValidationError(path, name + " takes (lo, hi, count)");
    const double lo = parse_number(args[0], path), hi = parse_number(args[1], path);
    const double n = parse_number(args[2], path);
    if (!(n >= 1) || n != std::floor(n)) throw ValidationError(path, "count must be a positive integer");
    if (name == "logspace" && !(lo > 0.0)) throw ValidationError(path, "logspace needs lo > 0");
    return name == "linspace" ? linspace(lo, hi, static_cast<int>(n)) : logspace(lo, hi, static_cast<int>(n));
  }
  std::vector<double> out;
  for (const auto& p : split_trim(text, ',')) out.push_back(parse_number(p, path));
  return out;
}

std::function<double(double)> lambda_of(const Flow& flow) {
  return std::visit([](const auto& f) { return f.Lambda_of_K; }, flow);
}

std::string time_label(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", t);
  return buf;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
}

// ---------------------------------------------------------------------------
// checks

struct CheckContext {
  const Config& cfg;
  std::string sec;  // "check.<name>"
  const Flow& flow;
  const GridND& grid;
  const BoundaryCondition& bc;
  const TimeStepPlan& plan;
  const std::vector<double>& times;
  const Trajectory& traj;
  const InitialData& u0;
  std::uint64_t seed;

  std::string path(const std::string& k) const { return sec + "." + k; }
  double num(const std::string& k, double fallback) const { return cfg.number_or(path(k), fallback); }
  double req(const std::string& k) const { return cfg.number(path(k)); }
  std::string str(const std::string& k, const std::string& fallback) const { return cfg.get_or(path(k), fallback); }
  double h() const { return grid.axis(0).spacing(); }
  TimeWindow window() const { return {num("t_min", 0.0), num("t_max", kInf)}; }
  void need_line(const std::string& what) const {
    if (grid.dim() != 1) throw ValidationError(path("type"), what + " needs a one-dimensional grid");
  }
  const Quasilinear1D& quasilinear(const std::string& what) const {
    if (const auto* q = std::get_if<Quasilinear1D>(&flow)) return *q;
    throw ValidationError("flow.id", what + " needs a one-dimensional quasilinear flow");
  }
};

const std::map<std::string, std::set<std::string>> kCheckKeys = {
    {"comparison", {"shift", "noise", "rel_tol"}},
    {"double-coordinate", {"M", "c", "region", "t_min", "t_max", "gamma", "beta"}},
    {"gradient-bound", {"C1", "C2", "t_min", "t_max", "tol"}},
    {"displacement", {"kind", "L", "alpha", "at", "c", "s", "tol"}},
    {"exponent", {"x", "expected", "rel_tol", "t_min", "t_max", "measure"}},
    {"intersections", {"eps_tie"}},
    {"heat-zero-counting", {"M", "c", "t_min", "t_max", "rel_tol"}},
    {"barrier-family", {"M", "height_factor", "window_c", "t_min", "t_max", "refine", "rel_tol", "abs_tol"}},
    {"eh", {"kind", "M", "c", "q", "R", "center", "t_min", "t_max", "tol"}},
    {"initial-data", {"modulus", "L", "alpha", "tol"}},
};

VerificationReport check_exponent(const CheckContext& cx) {
  const double x0 = cx.num("x", 0.0), expected = cx.req("expected");
  if (!(expected > 0.0)) throw ValidationError(cx.path("expected"), "must be positive");
  const std::string measure = cx.str("measure", "point");
  if (measure != "point" && measure != "sup") throw ValidationError(cx.path("measure"), "expected point or sup");
  if (measure == "point") cx.need_line("point exponent");
  const TimeWindow w = cx.window();
  const Field& f0 = cx.traj.front();
  std::vector<double> ts, ys;
  for (const Field& s : cx.traj.snapshots) {
    if (!(s.time() > 0.0) || !w.contains(s.time())) continue;
    ts.push_back(s.time() - f0.time());
    ys.push_back(measure == "point" ? std::abs(interpolate(s, x0) - interpolate(f0, x0))
                                    : (s.values() - f0.values()).cwiseAbs().maxCoeff());
  }
  const double fit = fit_power_law(ts, ys);
  const double rel_tol = cx.num("rel_tol", 0.1);
  return VerificationReport::make("exponent", std::abs(fit - expected) / expected, rel_tol,
                                  Witness{{x0}, ts.empty() ? 0.0 : ts.back(), {fit}},
                                  {{"measure", measure},
                                   {"expected", expected},
                                   {"fitted_exponent", fit},
                                   {"times", ts},
                                   {"displacement", ys}});
}

VerificationReport run_check(const CheckContext& cx, const std::string& type) {
  if (type == "comparison") {
    const double shift = cx.num("shift", 0.05), noise = cx.num("noise", 0.05);
    if (!(shift >= 0.0) || !(noise >= 0.0)) throw ValidationError(cx.path("shift"), "shift and noise must be >= 0");
    std::mt19937_64 rng(cx.seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const Field& lo = cx.traj.front();
    Eigen::VectorXd hi = lo.values();
    for (Eigen::Index i = 0; i < hi.size(); ++i) hi[i] += shift + noise * U(rng);
    BoundaryCondition bc_hi = cx.bc;
    if (cx.bc.kind == BoundaryKind::dirichlet) {
      const auto g = cx.bc.value;
      bc_hi.value = [g, shift](const Eigen::VectorXd& x, double t) { return g(x, t) + shift; };
    }
    const auto pair = evolve_pair(cx.flow, lo, lo.with_values(hi), cx.bc, bc_hi, cx.plan, cx.times);
    return check_comparison(pair, cx.num("rel_tol", 1e-12));
  }
  if (type == "double-coordinate") {
    cx.need_line("double-coordinate");
    const double M = cx.req("M"), c = cx.req("c");
    DoubleCoordinateOptions o;
    const std::string region = cx.str("region", "full");
    if (region != "full" && region != "G") throw ValidationError(cx.path("region"), "expected full or G");
    o.restrict_to_G = region == "G";
    o.window.t_min = cx.num("t_min", 0.0);
    o.window.t_max = cx.str("t_max", "auto") == "auto" ? 2.0 * c * M * M / 3.0 : cx.req("t_max");
    o.gamma = cx.num("gamma", 0.0);
    o.beta = cx.num("beta", 0.0);
    return double_coordinate_defect(cx.traj, ScaledPsi(M, c), o);
  }
  if (type == "gradient-bound") {
    return gradient_bound_check(cx.traj, periodic_gradient_bound(cx.req("C1"), cx.req("C2")), cx.window(),
                                cx.num("tol", 0.0));
  }
  if (type == "displacement") {
    cx.need_line("displacement");
    const std::string kind = cx.str("kind", "lipschitz");
    displacement::Kind k;
    if (kind == "lipschitz") {
      k = displacement::Lipschitz{cx.req("L"), cx.num("at", 0.0)};
    } else if (kind == "holder") {
      k = displacement::Holder{cx.req("L"), cx.req("alpha"), cx.num("at", 0.0)};
    } else if (kind == "step") {
      k = displacement::Step{cx.req("c"), cx.num("s", 0.0)};
    } else {
      throw ValidationError(cx.path("kind"), "expected lipschitz, holder or step");
    }
    return displacement_check(cx.traj, k, lambda_of(cx.flow), cx.num("tol", -1.0));
  }
  if (type == "exponent") return check_exponent(cx);
  if (type == "intersections") {
    cx.need_line("intersections");
    const InitialData other = make_initial(cx.cfg, cx.path("other"), cx.grid);
    const Field f = sample(cx.grid, other);
    const auto tr = evolve(cx.flow, f, make_bc(cx.cfg, other), cx.plan, cx.times);
    return intersection_monotonicity(cx.traj, tr, cx.num("eps_tie", 1e-9));
  }
  if (type == "heat-zero-counting") {
    cx.need_line("heat-zero-counting");
    return heat_zero_counting_gradient(cx.traj, cx.req("M"), cx.num("c", cx.cfg.number_or("flow.c", 0.25)),
                                       cx.window(), cx.num("rel_tol", 0.02));
  }
  if (type == "barrier-family") {
    cx.need_line("barrier-family");
    BarrierFamilyOptions o;
    o.height_factor = cx.num("height_factor", o.height_factor);
    o.window_c = cx.num("window_c", o.window_c);
    o.window = cx.window();
    o.refine = static_cast<int>(cx.num("refine", 1));
    o.rel_tol = cx.num("rel_tol", 0.0);
    o.abs_tol = cx.num("abs_tol", -1.0);
    return barrier_family_gradient(cx.traj, cx.quasilinear("barrier-family"), cx.req("M"), o);
  }
  if (type == "eh") {
    const std::string kind = cx.str("kind", "periodic");
    eh::Kind k;
    if (kind == "periodic") {
      k = eh::Periodic{cx.req("c")};
    } else if (kind == "interior") {
      Eigen::VectorXd center = Eigen::VectorXd::Zero(cx.grid.dim());
      const auto cv = broadcast(cx.cfg, cx.path("center"), cx.grid.dim(), 0.0);
      for (int a = 0; a < cx.grid.dim(); ++a) center[a] = cv[a];
      k = eh::Interior{cx.req("R"), cx.num("q", 2.0), cx.req("c"), center};
    } else {
      throw ValidationError(cx.path("kind"), "expected periodic or interior");
    }
    return eh_bound_check(cx.traj, cx.req("M"), k, cx.window(), cx.num("tol", -1.0));
  }
  if (type == "initial-data") {
    const std::string mod = cx.str("modulus", "lipschitz");
    ModulusOfContinuity omega;
    if (mod == "lipschitz") {
      omega = ModulusOfContinuity::lipschitz(cx.req("L"));
    } else if (mod == "holder") {
      omega = ModulusOfContinuity::holder(cx.req("L"), cx.req("alpha"));
    } else {
      throw ValidationError(cx.path("modulus"), "expected lipschitz or holder");
    }
    auto r = convergence_to_initial_data(cx.traj, omega, cx.num("tol", -1.0));
    const auto ts = r.metadata.at("times").get<std::vector<double>>();
    const auto ds = r.metadata.at("displacement").get<std::vector<double>>();
    int positive = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) positive += ts[i] > 0.0 && ds[i] > 0.0;
    if (positive >= 2) r.metadata["fitted_exponent"] = fit_power_law(ts, ds);
    return r;
  }
  throw ValidationError(cx.path("type"), "unknown check type '" + type + "'");
}

std::vector<std::string> check_sections(const Config& cfg) {
  std::vector<std::string> out;
  for (const auto& s : cfg.sections())
    if (s.rfind("check.", 0) == 0) out.push_back(s);
  return out;
}

void validate_sections(const Config& cfg) {
  require_known(cfg, "", {"name", "seed"});
  for (const auto& s : cfg.sections()) {
    if (s == "flow" || s == "grid" || s == "initial" || s == "bc" || s == "plan") continue;
    if (s.rfind("check.", 0) == 0 && s.size() > 6 && s.find('.', 6) == std::string::npos) continue;
    throw ValidationError(s, "unknown section");
  }
  require_known(cfg, "flow", {"id", "c", "q", "eps"});
  require_known(cfg, "grid", {"lo", "hi", "cells", "topology"});
  require_known(cfg, "initial",
                {"kind", "value", "amplitude", "k", "phase", "offset", "alpha", "center", "L", "at", "points", "M",
                 "s", "eps", "R"});
  require_known(cfg, "bc", {"kind"});
  require_known(cfg, "plan", {"t_end", "cfl_safety", "max_grad_clip", "blowup_factor", "dt_floor", "outputs"});
  for (const auto& sec : check_sections(cfg)) {
    const std::string type = cfg.get(sec + ".type");
    const auto it = kCheckKeys.find(type);
    if (it == kCheckKeys.end())
      throw ValidationError(sec + ".type", "unknown check type '" + type + "'");
    std::set<std::string> allowed = it->second;
    allowed.insert({"type", "assert"});
    require_known(cfg, sec, allowed, type == "intersections");
    cfg.flag_or(sec + ".assert", true);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// catalogs

GridND make_grid(const Config& cfg) {
  const auto lo = cfg.numbers("grid.lo");
  const int d = static_cast<int>(lo.size());
  if (d < 1 || d > 3) throw ValidationError("grid.lo", "grids have 1 to 3 axes");
  const auto hi = broadcast(cfg, "grid.hi", d, 0.0);
  if (!cfg.has("grid.hi")) throw ValidationError("grid.hi", "required field is missing");
  const auto cells = broadcast(cfg, "grid.cells", d, 0.0);
  if (!cfg.has("grid.cells")) throw ValidationError("grid.cells", "required field is missing");
  std::vector<std::string> topo = split_trim(cfg.get_or("grid.topology", "periodic"), ',');
  if (topo.size() == 1) topo.assign(d, topo[0]);
  if (static_cast<int>(topo.size()) != d) throw ValidationError("grid.topology", "one entry per axis");
  std::vector<Grid1D> axes;
  for (int a = 0; a < d; ++a) {
    if (!(hi[a] > lo[a])) throw ValidationError("grid.hi", "must exceed grid.lo");
    if (!(cells[a] >= 2) || cells[a] != std::floor(cells[a])) throw ValidationError("grid.cells", "integer >= 2");
    Topology t;
    if (topo[a] == "periodic") t = Topology::periodic;
    else if (topo[a] == "bounded") t = Topology::bounded;
    else throw ValidationError("grid.topology", "expected periodic or bounded, got '" + topo[a] + "'");
    axes.emplace_back(lo[a], hi[a], static_cast<int>(cells[a]), t);
  }
  return GridND(axes);
}

Flow make_flow(const Config& cfg, int dim) {
  const std::string id = cfg.get("flow.id");
  auto need = [&](int n) {
    if (dim != n)
      throw ValidationError("grid.lo", "flow '" + id + "' needs a " + std::to_string(n) + "-dimensional grid");
  };
  if (id == "heat") {
    need(1);
    const double c = cfg.number_or("flow.c", 0.25);
    if (!(c > 0.0)) throw ValidationError("flow.c", "must be positive");
    return heat_1d(c);
  }
  if (id == "csf") {
    need(1);
    return csf();
  }
  if (id == "mcf") return mcf_graph(dim);
  if (id == "mcf1d" || id == "mcf2d" || id == "mcf3d") {
    need(id[3] - '0');
    return mcf_graph(dim);
  }
  if (id == "plaplace-reg") {
    need(1);
    const double eps = cfg.number_or("flow.eps", 0.1);
    if (!(eps > 0.0)) throw ValidationError("flow.eps", "must be positive");
    return plaplace_reg(cfg.number_or("flow.q", 1.0), eps);
  }
  if (id == "fn-sine") {
    need(1);
    return sine_fully_nonlinear();
  }
  if (id.rfind("aniso:", 0) == 0) {
    try {
      return aniso_flow(norm_from_id(id.substr(6), dim));
    } catch (const DomainError& e) {
      throw ValidationError("flow.id", e.what());
    }
  }
  throw ValidationError("flow.id", "unknown flow '" + id + "' (run `parablab list`)");
}

InitialData make_initial(const Config& cfg, const std::string& prefix, const GridND& grid) {
  const std::string kind = cfg.get(prefix + ".kind");
  const int d = grid.dim();
  const double h = grid.axis(0).spacing();
  auto p = [&](const char* k) { return prefix + "." + k; };
  auto num = [&](const char* k, double fb) { return cfg.number_or(p(k), fb); };

  if (kind == "constant") {
    const double v = cfg.number(p("value"));
    return [v](const Eigen::VectorXd&) { return v; };
  }
  if (kind == "sin" || kind == "cos") {
    const double A = num("amplitude", 1.0), k = num("k", 1.0), ph = num("phase", 0.0), off = num("offset", 0.0);
    const bool s = kind == "sin";
    return [=](const Eigen::VectorXd& x) {
      double v = A;
      for (Eigen::Index a = 0; a < x.size(); ++a) v *= s ? std::sin(k * x[a] + ph) : std::cos(k * x[a] + ph);
      return off + v;
    };
  }
  if (kind == "abs-power" || kind == "cone") {
    const bool cone = kind == "cone";
    const double A = cone ? cfg.number(p("L")) : num("amplitude", 1.0);
    const double alpha = cone ? 1.0 : cfg.number(p("alpha"));
    if (!(alpha > 0.0)) throw ValidationError(p("alpha"), "must be positive");
    const auto cv = broadcast(cfg, p(cone ? "at" : "center"), d, 0.0);
    const Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(cv.data(), d);
    return [=](const Eigen::VectorXd& x) { return A * std::pow((x - c).norm(), alpha); };
  }
  if (kind == "pwl") {
    if (d != 1) throw ValidationError(p("kind"), "pwl data are one-dimensional");
    std::vector<std::pair<double, double>> pts;
    for (const auto& item : split_trim(cfg.get(p("points")), ',')) {
      const auto xy = split_trim(item, ':');
      if (xy.size() != 2) throw ValidationError(p("points"), "entries are x:y");
      pts.emplace_back(parse_number(xy[0], p("points")), parse_number(xy[1], p("points")));
    }
    if (pts.size() < 2) throw ValidationError(p("points"), "need at least two points");
    for (std::size_t i = 1; i < pts.size(); ++i)
      if (!(pts[i].first > pts[i - 1].first)) throw ValidationError(p("points"), "x must increase");
    return [pts](const Eigen::VectorXd& x) {
      const double y = x[0];
      if (y <= pts.front().first) return pts.front().second;
      if (y >= pts.back().first) return pts.back().second;
      const auto it = std::upper_bound(pts.begin(), pts.end(), y, [](double v, const auto& q) { return v < q.first; });
      const auto& [x1, y1] = *it;
      const auto& [x0, y0] = *(it - 1);
      return y0 + (y1 - y0) * (y - x0) / (x1 - x0);
    };
  }
  if (kind == "step" || kind == "crenel") {
    StepData sd{cfg.number(p("M")), num("s", 0.0), kind == "step" ? StepMode::single : StepMode::crenellated,
                num("R", 1.0), length_or(cfg, p("eps"), h, 0.0)};
    if (!(sd.eps >= 0.0)) throw ValidationError(p("eps"), "must be >= 0");
    if (sd.mode == StepMode::crenellated && !(sd.eps < 0.5 * sd.R))
      throw ValidationError(p("eps"), "must be below R/2");
    return [sd](const Eigen::VectorXd& x) { return step_eval(sd, x[0]); };
  }
  throw ValidationError(p("kind"), "unknown initial data '" + kind +
                                       "' (constant, sin, cos, abs-power, cone, pwl, step, crenel)");
}

BoundaryCondition make_bc(const Config& cfg, const InitialData& u0) {
  const std::string kind = cfg.get_or("bc.kind", "periodic");
  if (kind == "periodic") return BoundaryCondition::periodic();
  if (kind == "neumann") return BoundaryCondition::neumann_zero();
  if (kind == "dirichlet") return BoundaryCondition::dirichlet([u0](const Eigen::VectorXd& x, double) { return u0(x); });
  throw ValidationError("bc.kind", "expected periodic, neumann or dirichlet, got '" + kind + "'");
}

TimeStepPlan make_plan(const Config& cfg) {
  TimeStepPlan p;
  p.t_end = cfg.number("plan.t_end");
  if (!(p.t_end > 0.0)) throw ValidationError("plan.t_end", "must be positive");
  p.cfl_safety = cfg.number_or("plan.cfl_safety", p.cfl_safety);
  if (!(p.cfl_safety > 0.0 && p.cfl_safety < 1.0)) throw ValidationError("plan.cfl_safety", "must lie in (0, 1)");
  p.max_grad_clip = cfg.number_or("plan.max_grad_clip", p.max_grad_clip);
  p.blowup_factor = cfg.number_or("plan.blowup_factor", p.blowup_factor);
  p.dt_floor = cfg.number_or("plan.dt_floor", p.dt_floor);
  if (!(p.max_grad_clip > 0.0)) throw ValidationError("plan.max_grad_clip", "must be positive");
  return p;
}

std::vector<double> make_output_times(const Config& cfg) {
  const double t_end = cfg.number("plan.t_end");
  if (!cfg.has("plan.outputs")) return {t_end};
  auto ts = parse_times(cfg.get("plan.outputs"), "plan.outputs");
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (!(ts[i] > 0.0) || ts[i] > t_end * (1.0 + 1e-12))
      throw ValidationError("plan.outputs", "times must lie in (0, t_end]");
    if (i > 0 && !(ts[i] > ts[i - 1])) throw ValidationError("plan.outputs", "times must increase");
  }
  ts.back() = std::min(ts.back(), t_end);
  return ts;
}

// ---------------------------------------------------------------------------
// runs

int RunResult::exit_code() const {
  for (const auto& c : checks)
    if (c.asserted && !c.report.passed) return 1;
  return 0;
}

void validate_config(const Config& cfg) {
  validate_sections(cfg);
  const GridND grid = make_grid(cfg);
  const Flow flow = make_flow(cfg, grid.dim());
  const InitialData u0 = make_initial(cfg, "initial", grid);
  make_bc(cfg, u0);
  make_plan(cfg);
  make_output_times(cfg);
  for (const auto& sec : check_sections(cfg))
    if (cfg.get(sec + ".type") == "intersections") make_initial(cfg, sec + ".other", grid);
  if (cfg.has("seed")) parse_number(cfg.get("seed"), "seed");
}

RunResult run_experiment(const Config& cfg, const RunOptions& opt) {
  validate_config(cfg);
  const GridND grid = make_grid(cfg);
  const Flow flow = make_flow(cfg, grid.dim());
  const InitialData u0 = make_initial(cfg, "initial", grid);
  const BoundaryCondition bc = make_bc(cfg, u0);
  const TimeStepPlan plan = make_plan(cfg);
  const std::vector<double> times = make_output_times(cfg);
  const std::uint64_t seed = opt.seed ? *opt.seed : static_cast<std::uint64_t>(cfg.number_or("seed", 1.0));

  RunResult res;
  res.name = cfg.get_or("name", "run");
  res.trajectory = evolve(flow, sample(grid, u0), bc, plan, times);

  nlohmann::json checks = nlohmann::json::array();
  for (const auto& sec : check_sections(cfg)) {
    CheckOutcome out;
    out.name = sec.substr(6);
    out.type = cfg.get(sec + ".type");
    out.asserted = opt.assert_checks && cfg.flag_or(sec + ".assert", true);
    const CheckContext cx{cfg, sec, flow, grid, bc, plan, times, res.trajectory, u0, seed};
    out.report = run_check(cx, out.type);
    checks.push_back({{"name", out.name}, {"type", out.type}, {"asserted", out.asserted}, {"passed", out.report.passed}});
    res.checks.push_back(std::move(out));
  }

  std::vector<std::string> field_files;
  for (const Field& f : res.trajectory.snapshots) field_files.push_back("fields/t=" + time_label(f.time()) + ".csv");
  res.manifest = {{"name", res.name},
                  {"seed", seed},
                  {"config", split_trim(cfg.to_string(), '\n')},
                  {"solver", manifest(flow, bc, res.trajectory)},
                  {"checks", checks},
                  {"fields", opt.write_fields ? nlohmann::json(field_files) : nlohmann::json::array()}};

  if (!opt.out_dir.empty()) {
    const fs::path root(opt.out_dir);
    fs::create_directories(root / "reports");
    if (opt.write_fields) {
      fs::create_directories(root / "fields");
      for (std::size_t i = 0; i < field_files.size(); ++i) {
        std::ofstream out(root / field_files[i], std::ios::binary);
        write_csv(res.trajectory.snapshots[i], out);
      }
    }
    for (const auto& c : res.checks) write_text(root / "reports" / (c.name + ".json"), to_json(c.report).dump(2) + "\n");
    write_text(root / "manifest.json", res.manifest.dump(2) + "\n");
    std::ostringstream sum;
    std::vector<VerificationReport> reps;
    for (const auto& c : res.checks) reps.push_back(c.report);
    write_summary(reps, sum);
    int failed = 0;
    for (const auto& c : res.checks) failed += c.asserted && !c.report.passed;
    sum << res.checks.size() << " checks, " << failed << " asserted failures\n";
    write_text(root / "summary.txt", sum.str());
  }
  return res;
}

std::vector<SweepAxis> parse_sweep_grid(const std::string& spec) {
  std::vector<SweepAxis> axes;
  for (const auto& part : split_trim(spec, ';')) {
    if (part.empty()) continue;
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw ValidationError("--grid", "expected path=v1,v2,... in '" + part + "'");
    SweepAxis a{split_trim(part.substr(0, eq), ',').front(), split_trim(part.substr(eq + 1), ',')};
    if (a.path.empty() || a.values.empty() || a.values.front().empty())
      throw ValidationError("--grid", "empty path or value list in '" + part + "'");
    axes.push_back(std::move(a));
  }
  if (axes.empty()) throw ValidationError("--grid", "no sweep axes");
  return axes;
}

int run_sweep(const Config& cfg, const std::vector<SweepAxis>& axes, const RunOptions& opt, int threads,
              std::ostream& csv) {
  std::size_t total = 1;
  for (const auto& a : axes) total *= a.values.size();
  std::vector<std::vector<std::string>> picks(total);
  for (std::size_t k = 0; k < total; ++k) {
    std::size_t rest = k;
    for (auto a = axes.rbegin(); a != axes.rend(); ++a) {
      picks[k].insert(picks[k].begin(), a->values[rest % a->values.size()]);
      rest /= a->values.size();
    }
  }
  // validate every point up front so a bad grid fails before any work
  std::vector<Config> cfgs;
  for (std::size_t k = 0; k < total; ++k) {
    Config c = cfg;
    for (std::size_t a = 0; a < axes.size(); ++a) c.set(axes[a].path, picks[k][a]);
    validate_config(c);
    cfgs.push_back(std::move(c));
  }

  std::vector<RunResult> results(total);
  std::vector<std::string> errors(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next++) < total;) {
      RunOptions o = opt;
      if (!opt.out_dir.empty()) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "run-%03zu", k);
        o.out_dir = (fs::path(opt.out_dir) / buf).string();
      }
      try {
        results[k] = run_experiment(cfgs[k], o);
      } catch (const Error& e) {
        errors[k] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int i = 0; i < std::max(1, threads); ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  // one row per run; every run shares the check list of the base config
  std::vector<std::string> names;
  for (const auto& sec : check_sections(cfg)) names.push_back(sec.substr(6));
  csv << "run";
  for (const auto& a : axes) csv << ',' << a.path;
  csv << ",status";
  for (const auto& n : names) csv << ',' << n << ".max_defect," << n << ".tolerance," << n << ".passed," << n << ".metric";
  csv << '\n';
  int code = 0;
  for (std::size_t k = 0; k < total; ++k) {
    csv << k;
    for (const auto& v : picks[k]) csv << ',' << v;
    if (!errors[k].empty()) {
      std::string msg = errors[k];
      std::replace(msg.begin(), msg.end(), ',', ';');
      csv << ",error: " << msg << std::string(4 * names.size(), ',') << '\n';
      code = std::max(code, 3);
      continue;
    }
    code = std::max(code, results[k].exit_code());
    csv << ',' << (results[k].exit_code() == 0 ? "ok" : "failed");
    for (const auto& c : results[k].checks) {
      const auto& m = c.report.metadata;
      std::string metric;
      if (m.contains("fitted_exponent")) metric = fmt(m.at("fitted_exponent").get<double>());
      else if (m.contains("max_Z")) metric = fmt(m.at("max_Z").get<double>());
      csv << ',' << fmt(c.report.max_defect) << ',' << fmt(c.report.tolerance) << ','
          << (c.report.passed ? "true" : "false") << ',' << metric;
    }
    csv << '\n';
  }
  return code;
}

// ---------------------------------------------------------------------------
// certificates

Trajectory crenellated_reference(const Quasilinear1D& flow, int cells, double eps_cells, double R, double t_end,
                                 int snapshots) {
  const Grid1D g(0.0, 2.0 * R, cells, Topology::periodic);
  const StepData sd{1.0, 0.0, StepMode::crenellated, R, eps_cells * g.spacing()};
  const Field u0 = sample1d(g, [&sd](double x) { return step_eval(sd, x); });
  TimeStepPlan plan;
  plan.t_end = t_end;
  return evolve(flow, u0, BoundaryCondition::periodic(), plan, logspace(std::min(1e-4, 0.5 * t_end), t_end, snapshots));
}

DoubleCoordinateCalibration calibrate_double_coordinate(const Trajectory& traj, double M, double c_lo, double c_hi) {
  auto report_at = [&](double c) {
    DoubleCoordinateOptions o;
    o.window.t_max = 2.0 * c * M * M / 3.0;
    return double_coordinate_defect(traj, ScaledPsi(M, c), o);
  };
  DoubleCoordinateCalibration cal;
  cal.M = M;
  cal.c = calibrate([&](double c) { return report_at(c).passed; }, c_lo, c_hi);
  cal.T_prime = 2.0 * cal.c * M * M / 3.0;
  cal.report = report_at(std::isnan(cal.c) ? c_hi : cal.c);
  return cal;
}

nlohmann::json certify_id(const std::string& id, int dim, std::uint64_t seed) {
  if (id == "heat" || id == "csf") {
    const Quasilinear1D flow = id == "heat" ? heat_1d(0.25) : csf();
    const double M = 2.0, c_hi = 1.0, R = 2.0, eps_cells = 4.0;
    const int cells = 512;
    const Trajectory traj = crenellated_reference(flow, cells, eps_cells, R, 2.0 * c_hi * M * M / 3.0);
    const auto cal = calibrate_double_coordinate(traj, M, 1.0 / 64, c_hi);
    auto num = [](double v) -> nlohmann::json { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); };
    return {{"kind", "flow"},
            {"id", id},
            {"c", num(cal.c)},
            {"T_prime", num(cal.T_prime)},
            {"M", M},
            {"reference", {{"data", "crenel"}, {"height", 1.0}, {"R", R}, {"cells", cells}, {"eps_cells", eps_cells}}},
            {"report", to_json(cal.report)}};
  }
  FinslerNorm nf;
  try {
    nf = norm_from_id(id, dim);
  } catch (const DomainError& e) {
    throw ValidationError("id", "unknown norm or flow id '" + id + "': " + e.what());
  }
  FinslerSampling s;
  s.seed = seed;
  const AnisoConstants k = certify(nf, 1.0, s);
  const double bound = 4.0 / std::sqrt(static_cast<double>(dim));
  return {{"kind", "norm"},
          {"id", id},
          {"constants", k.to_json()},
          {"smallness", {{"periodic_ok", k.C1 * k.C1 < bound}, {"interior_ok", k.C1 * k.C1 < 0.5 * bound}}},
          {"symmetric", nf.symmetric_flag}};
}

std::string catalog_listing() {
  std::ostringstream os;
  os << "flows:\n"
        "  heat           u_t = u_xx / (4c)               [flow.c, default 0.25]\n"
        "  csf            u_t = u_xx / (1 + u_x^2)\n"
        "  mcf, mcf1d..3d graph mean curvature flow\n"
        "  aniso:<norm>   anisotropic flow of a norm id\n"
        "  plaplace-reg   (eps^2 + u_x^2)^((q-2)/2) u_xx [flow.q, flow.eps]\n"
        "  fn-sine        fully nonlinear (r + sin r / 2) / (1 + p^2)\n"
        "norms:\n"
        "  euclid, elliptic:<rows>, quartic:<delta>\n"
        "initial data:\n"
        "  constant, sin, cos, abs-power, cone, pwl, step, crenel\n"
        "boundary conditions:\n"
        "  periodic, neumann, dirichlet\n"
        "checks:\n";
  for (const auto& [type, keys] : kCheckKeys)
    os << "  " << type << " (" << join(std::vector<std::string>(keys.begin(), keys.end()), ", ") << ")\n";
  os << "certify ids:\n"
        "  any norm id, heat, csf\n";
  return os.str();
}

}  // namespace parablab
