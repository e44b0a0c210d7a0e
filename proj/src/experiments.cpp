#include "cauchy/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <memory>
#include <numbers>
#include <ostream>
#include <sstream>

#include "cauchy/assembly.hpp"
#include "cauchy/error.hpp"

namespace cauchy {

namespace {

constexpr double kPi = std::numbers::pi;

Variant variant_of(Method m) {
  switch (m) {
    case Method::InfSup: return Variant::InfSup;
    case Method::WellBalanced: return Variant::WellBalanced;
    case Method::WellBalancedNoDual: return Variant::WellBalancedNoDual;
    case Method::Reduced:
    case Method::Defect: return Variant::Reduced;
  }
  return Variant::InfSup;
}

std::string format(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

}  // namespace

std::string to_string(CaseKind c) {
  switch (c) {
    case CaseKind::Hadamard1: return "hadamard1";
    case CaseKind::Hadamard2: return "hadamard2";
    case CaseKind::WellPosed: return "wellposed";
  }
  return "?";
}

std::string to_string(Method m) {
  switch (m) {
    case Method::InfSup: return "infsup";
    case Method::WellBalanced: return "wellbalanced";
    case Method::WellBalancedNoDual: return "wellbalanced-nodual";
    case Method::Reduced: return "reduced";
    case Method::Defect: return "defect";
  }
  return "?";
}

CaseKind parse_case(const std::string& name) {
  for (CaseKind c : {CaseKind::Hadamard1, CaseKind::Hadamard2, CaseKind::WellPosed}) {
    if (to_string(c) == name) return c;
  }
  throw ConfigError("unknown case '" + name + "'");
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::InfSup, Method::WellBalanced, Method::WellBalancedNoDual, Method::Reduced, Method::Defect}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown variant '" + name + "'");
}

Ladder default_ladder() { return {{12, 4}, {24, 8}, {48, 16}, {96, 32}, {192, 64}}; }

Ladder parse_ladder(const std::string& spec) {
  int nx = 0, ny = 0, rungs = 0;
  char x = 0, colon = 0;
  std::istringstream in(spec);
  if (!(in >> nx >> x >> ny >> colon >> rungs) || x != 'x' || colon != ':' || !in.eof() || nx < 1 || ny < 1 ||
      rungs < 1) {
    throw ConfigError("ladder must look like NXxNY:R, got '" + spec + "'");
  }
  Ladder ladder;
  for (int r = 0; r < rungs; ++r) ladder.emplace_back(nx << r, ny << r);
  return ladder;
}

void RunConfig::validate() const {
  if (n < 1) throw ConfigError("mode number n must be at least 1");
  if (ladder.empty()) throw ConfigError("mesh ladder is empty");
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (ladder[i].first < 1 || ladder[i].second < 1) throw ConfigError("mesh ladder entries must be positive");
    if (i > 0 && (ladder[i].first <= ladder[i - 1].first || ladder[i].second <= ladder[i - 1].second)) {
      throw ConfigError("mesh ladder must refine strictly");
    }
  }
  if (!(delta >= 0.0)) throw ConfigError("delta must be non-negative");
  if (!(sigma > 0.0 && sigma <= 1.0)) throw ConfigError("sigma must lie in (0, 1]");
  space_config().validate();
}

SpaceConfig RunConfig::space_config() const {
  const bool reduced = method == Method::Reduced || method == Method::Defect;
  if (l && !reduced) throw ConfigError("the flux order can only be chosen for the reduced and defect methods");
  return SpaceConfig::make(variant_of(method), k, gamma_T, gamma_star, l, make_case(*this).problem.mu);
}

HadamardFields hadamard_exact(int n) {
  if (n < 1) throw ConfigError("mode number n must be at least 1");
  const double dn = n;
  HadamardFields h;
  h.u = [dn](const Point& p) { return std::sin(dn * p.x()) * std::sinh(dn * p.y()) / dn; };
  h.grad_u = [dn](const Point& p) {
    return Eigen::Vector2d(std::cos(dn * p.x()) * std::sinh(dn * p.y()), std::sin(dn * p.x()) * std::cosh(dn * p.y()));
  };
  h.psi = [dn](const Point& p) { return -std::sin(dn * p.x()); };
  return h;
}

CaseSetup make_case(const RunConfig& config) {
  CaseSetup c;
  c.box.lo = Point(0.0, 0.0);
  c.box.hi = Point(kPi, 1.0);
  const PointPredicate bottom = on_line_y(c.box, 0.0);
  const PointPredicate left = on_line_x(c.box, 0.0);
  const PointPredicate right = on_line_x(c.box, kPi);
  c.problem.perturbation.amplitude = config.delta;
  c.problem.perturbation.seed = config.seed;

  switch (config.kind) {
    case CaseKind::Hadamard1:
    case CaseKind::Hadamard2: {
      const HadamardFields h = hadamard_exact(config.n);
      c.sigma = bottom;
      if (config.kind == CaseKind::Hadamard1) {
        c.dirichlet = [=](const Point& p) { return bottom(p) || left(p) || right(p); };
      } else {
        c.dirichlet = bottom;
      }
      c.problem.psi = h.psi;
      c.exact = {h.u, h.grad_u};
      break;
    }
    case CaseKind::WellPosed: {
      // u = sin x sin(pi y) vanishes on the boundary; f = div grad u.
      const ScalarField u = [](const Point& p) { return std::sin(p.x()) * std::sin(kPi * p.y()); };
      const VectorField grad = [](const Point& p) {
        return Eigen::Vector2d(std::cos(p.x()) * std::sin(kPi * p.y()), kPi * std::sin(p.x()) * std::cos(kPi * p.y()));
      };
      // Dirichlet data everywhere, no flux constraint: with psi imposed on the whole boundary
      // the constant multiplier mode would be undetermined for mu = 0.
      c.sigma = [](const Point&) { return false; };
      c.dirichlet = [](const Point&) { return true; };
      c.problem.f = [u](const Point& p) { return -(1.0 + kPi * kPi) * u(p); };
      c.exact = {u, grad};
      break;
    }
  }
  return c;
}

RunRow run_rung(const RunConfig& config, int nx, int ny) {
  const CaseSetup setup = make_case(config);
  auto domain = std::make_shared<const Domain>(make_domain(generate_union_jack(nx, ny, setup.box), setup.sigma,
                                                           setup.dirichlet));
  const Discretization disc(domain, config.space_config());

  DiscreteSolution sol;
  RunRow row;
  switch (config.method) {
    case Method::InfSup:
    case Method::WellBalanced:
    case Method::WellBalancedNoDual:
      sol = solve_full(disc, assemble_full(disc, setup.problem), config.solver);
      break;
    case Method::Reduced:
      sol = solve_reduced(disc, assemble_reduced(disc, setup.problem), config.solver);
      break;
    case Method::Defect: {
      sol = defect_correction(disc, assemble_reduced(disc, setup.problem), config.solver);
      const auto& [u0, p0] = *sol.first_iterate;
      row.reduced_max_conservation = conservation_residual(disc, u0, p0, setup.problem).cwiseAbs().maxCoeff();
      break;
    }
  }

  row.nx = nx;
  row.ny = ny;
  row.h = domain->h;
  row.l = disc.config.l;
  row.m = disc.config.m;
  row.dof_V = disc.V.dofs().size;
  row.dof_D = disc.D.dofs().size;
  row.dof_W = disc.W.dofs().size;
  row.errors = error_norms(disc.V, sol.u, setup.exact, config.sigma);
  row.residual = residual_report(disc, setup.problem, setup.exact, sol);
  row.outer_iterations = sol.outer_iterations;
  row.history = sol.history;
  return row;
}

RunRecord run_case(const RunConfig& config, std::ostream* csv) {
  config.validate();
  RunRecord record;
  record.config = config;
  if (csv) *csv << csv_header() << '\n' << std::flush;
  for (const auto& [nx, ny] : config.ladder) {
    RunRow row = run_rung(config, nx, ny);
    if (csv) *csv << csv_row(config, row) << '\n' << std::flush;
    record.table.add_row(row.h, {{"rel_l2_global", row.errors.l2_global},
                                 {"rel_l2_local", row.errors.l2_local},
                                 {"rel_h1s_global", row.errors.h1s_global},
                                 {"rel_h1s_local", row.errors.h1s_local},
                                 {"tnorm_residual", row.residual.total}});
    record.rows.push_back(std::move(row));
  }
  return record;
}

RunRecord run_wellposed(RunConfig config, std::ostream* csv) {
  config.kind = CaseKind::WellPosed;
  return run_case(config, csv);
}

GammaSweep sweep_gamma(RunConfig config, const std::vector<double>& gammas, int nx, int ny) {
  if (gammas.empty()) throw ConfigError("gamma sweep needs at least one value");
  config.delta = 0.0;
  config.ladder = {{nx, ny}};
  config.validate();
  GammaSweep sweep;
  for (double g : gammas) {
    if (!(g >= 0.0)) throw ConfigError("gamma_T must be non-negative");
    config.gamma_T = g;
    const RunRow row = run_rung(config, nx, ny);
    sweep.gammas.push_back(g);
    sweep.rel_l2.push_back(row.errors.l2_global);
    if (sweep.first_increase < 0 && row.errors.l2_global > 1.05 * sweep.rel_l2.front()) {
      sweep.first_increase = static_cast<int>(sweep.gammas.size()) - 1;
    }
  }
  return sweep;
}

std::string csv_header() {
  return "case,variant,k,l,m,n,gamma_T,delta,seed,nx,ny,h,dof_V,dof_D,dof_W,rel_l2_global,rel_l2_local,"
         "rel_h1s_global,rel_h1s_local,tnorm_residual,z_1h,max_cons_residual,flux_l2_sigma,outer_iters";
}

std::string csv_row(const RunConfig& config, const RunRow& row) {
  const char* e = "%.10e";
  std::ostringstream out;
  out << to_string(config.kind) << ',' << to_string(config.method) << ',' << config.k << ',' << row.l << ','
      << row.m << ',' << (config.kind == CaseKind::WellPosed ? 0 : config.n) << ',' << format("%g", config.gamma_T)
      << ',' << format("%g", config.delta) << ',' << config.seed << ',' << row.nx << ',' << row.ny << ','
      << format(e, row.h) << ',' << row.dof_V << ',' << row.dof_D << ',' << row.dof_W << ','
      << format(e, row.errors.l2_global) << ',' << format(e, row.errors.l2_local) << ','
      << format(e, row.errors.h1s_global) << ',' << format(e, row.errors.h1s_local) << ','
      << format(e, row.residual.total) << ',' << format(e, row.residual.z_norm_1h) << ','
      << format(e, row.residual.max_conservation) << ',' << format(e, row.residual.flux_sigma) << ','
      << row.outer_iterations;
  return out.str();
}

RateTable read_rates_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty CSV");
  const std::vector<std::string> header = split(line, ',');
  if (line != csv_header()) throw ConfigError("CSV header does not match the expected schema");
  auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw ConfigError("CSV lacks column " + name);
  };
  const std::vector<std::string> metrics = {"rel_l2_global", "rel_l2_local", "rel_h1s_global", "rel_h1s_local",
                                            "tnorm_residual"};
  RateTable table;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line, ',');
    if (cells.size() != header.size()) throw ConfigError("CSV row has " + std::to_string(cells.size()) + " cells");
    std::map<std::string, double> values;
    try {
      for (const auto& m : metrics) values[m] = std::stod(cells[column(m)]);
      table.add_row(std::stod(cells[column("h")]), values);
    } catch (const std::invalid_argument&) {
      throw ConfigError("CSV row holds a non-numeric value: " + line);
    }
  }
  return table;
}

}  // namespace cauchy
