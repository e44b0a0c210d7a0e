#include "cauchy/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <vector>

#include "cauchy/error.hpp"
#include "cauchy/quadrature.hpp"

namespace cauchy {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

enum Need : unsigned {
  kPrimal = 1u << 0,
  kConstraint = 1u << 1,
  kDual = 1u << 2,
  kDivDiv = 1u << 3,
  kLoads = 1u << 4,
};

struct Forms {
  PrimalForm s;
  ConstraintForm b;
  SparseMatrix sstar;
  PrimalForm divdiv;
  Eigen::VectorXd load_w;  // (f~, w)
  Eigen::VectorXd load_u;  // (f~, mu v)
  Eigen::VectorXd load_p;  // (f~, div q)
};

bool least_squares_tikhonov(Variant v) { return v == Variant::Reduced; }

void scatter(Triplets& out, const LocalMatrix& local, std::span<const int> rows, std::span<const int> cols) {
  for (int i = 0; i < local.rows(); ++i) {
    for (int j = 0; j < local.cols(); ++j) {
      if (local(i, j) != 0.0) out.emplace_back(rows[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)], local(i, j));
    }
  }
}

SparseMatrix build(int rows, int cols, const Triplets& triplets) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

LocalMatrix symmetrized(const LocalMatrix& m) { return 0.5 * (m + m.transpose()); }

Forms assemble_forms(const Discretization& disc, const ProblemSpec& problem, unsigned need) {
  problem.validate();
  const Domain& domain = *disc.domain;
  const SpaceConfig& cfg = disc.config;
  const Mesh& mesh = domain.mesh;
  const double mu = problem.mu;
  const Eigen::Matrix2d& A = problem.A;
  const double h = domain.h;
  const bool ls_tikhonov = least_squares_tikhonov(cfg.variant);
  const double grad_weight = (ls_tikhonov ? 0.5 : 1.0) * cfg.gamma_T * std::pow(h, 2 * cfg.k);
  const bool mass_tikhonov = !ls_tikhonov && mu != 0.0;
  const double mass_weight = 0.5 * mu * mu * h * h;

  const int nv = disc.V.dofs().size, nd = disc.D.dofs().size, nw = disc.W.dofs().size;
  Triplets suu, sup, spp, bu, bp, ss, ruu, rup, rpp;
  Forms forms;
  if (need & kLoads) {
    forms.load_w.setZero(nw);
    forms.load_u.setZero(nv);
    forms.load_p.setZero(nd);
  }

  const TriangleRule& rule = triangle_rule(2 * std::max(cfg.k, cfg.l + 1) + 2);
  LocalVector phi, dpsi, wv, proj;
  LocalGradients gphi, psi, gw, gproj;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementGeometry geo = ElementGeometry::of(mesh, t);
    const int lv = disc.V.dofs().local_size, ld = disc.D.dofs().local_size, lw = disc.W.dofs().local_size;
    LocalMatrix Luu = LocalMatrix::Zero(lv, lv), Lup = LocalMatrix::Zero(lv, ld), Lpp = LocalMatrix::Zero(ld, ld);
    LocalMatrix Mvv = LocalMatrix::Zero(lv, lv), Cwv = LocalMatrix::Zero(lw, lv);
    LocalMatrix Lbu = LocalMatrix::Zero(lw, lv), Lbp = LocalMatrix::Zero(lw, ld), Lss = LocalMatrix::Zero(lw, lw);
    LocalMatrix Ruu = LocalMatrix::Zero(lv, lv), Rup = LocalMatrix::Zero(lv, ld), Rpp = LocalMatrix::Zero(ld, ld);
    // Projection of grad y onto [P_{l-1}]^2 for the well-balanced dual stabilizer.
    const bool wb_dual = (need & kDual) && cfg.variant == Variant::WellBalanced;
    const OrthonormalBasis low = wb_dual ? OrthonormalBasis(geo, cfg.l - 1) : OrthonormalBasis();
    LocalMatrix Px = LocalMatrix::Zero(low.size(), lw), Py = LocalMatrix::Zero(low.size(), lw);

    for (int q = 0; q < rule.size(); ++q) {
      const Point x = geo.map(rule.points[q]);
      const double w = rule.weights[q] * 2.0 * geo.area;
      disc.V.eval(geo, x, phi, gphi);
      disc.D.eval(t, geo, x, psi, dpsi);
      disc.W.eval(t, geo, x, wv, gw);

      if (need & kPrimal) {
        const LocalGradients agrad = gphi * A;
        Luu.noalias() += (0.5 * w) * agrad * agrad.transpose();
        if (grad_weight != 0.0) Luu.noalias() += (w * grad_weight) * gphi * gphi.transpose();
        Lup.noalias() -= (0.5 * w) * agrad * psi.transpose();
        Lpp.noalias() += (0.5 * w) * psi * psi.transpose();
        if (mass_tikhonov) {
          Mvv.noalias() += w * phi * phi.transpose();
          Cwv.noalias() += w * wv * phi.transpose();
        }
      }
      if (need & kConstraint) {
        if (mu != 0.0) Lbu.noalias() += (w * mu) * wv * phi.transpose();
        Lbp.noalias() += w * wv * dpsi.transpose();
      }
      if (need & kDual) {
        if (wb_dual) {
          Lss.noalias() += w * gw * gw.transpose();
          if (low.size() > 0) {
            low.eval(geo, x, proj, gproj);
            Px.noalias() += w * proj * gw.col(0).transpose();
            Py.noalias() += w * proj * gw.col(1).transpose();
          }
        } else if (cfg.variant == Variant::Reduced) {
          Lss.noalias() += w * wv * wv.transpose();
        }
      }
      if (need & kDivDiv) {
        if (mu != 0.0) {
          Ruu.noalias() += (w * mu * mu) * phi * phi.transpose();
          Rup.noalias() += (w * mu) * phi * dpsi.transpose();
        }
        Rpp.noalias() += w * dpsi * dpsi.transpose();
      }
      if (need & kLoads) {
        const double fw = w * problem.source(x);
        const auto vd = disc.V.dofs().element(t);
        const auto dd = disc.D.dofs().element(t);
        const auto wd = disc.W.dofs().element(t);
        for (int i = 0; i < lw; ++i) forms.load_w(wd[static_cast<std::size_t>(i)]) += fw * wv(i);
        if (mu != 0.0) {
          for (int i = 0; i < lv; ++i) forms.load_u(vd[static_cast<std::size_t>(i)]) += fw * mu * phi(i);
        }
        for (int i = 0; i < ld; ++i) forms.load_p(dd[static_cast<std::size_t>(i)]) += fw * dpsi(i);
      }
    }

    const auto vd = disc.V.dofs().element(t);
    const auto dd = disc.D.dofs().element(t);
    const auto wd = disc.W.dofs().element(t);
    if (need & kPrimal) {
      if (mass_tikhonov) Luu += mass_weight * (Mvv - Cwv.transpose() * Cwv);
      scatter(suu, symmetrized(Luu), vd, vd);
      scatter(sup, Lup, vd, dd);
      scatter(spp, symmetrized(Lpp), dd, dd);
    }
    if (need & kConstraint) {
      scatter(bu, Lbu, wd, vd);
      scatter(bp, Lbp, wd, dd);
    }
    if (need & kDual) {
      if (wb_dual) Lss = 0.5 * cfg.gamma_star * (Lss - Px.transpose() * Px - Py.transpose() * Py);
      scatter(ss, symmetrized(Lss), wd, wd);
    }
    if (need & kDivDiv) {
      scatter(ruu, symmetrized(Ruu), vd, vd);
      scatter(rup, Rup, vd, dd);
      scatter(rpp, symmetrized(Rpp), dd, dd);
    }
  }

  if (need & kPrimal) forms.s = {build(nv, nv, suu), build(nv, nd, sup), build(nd, nd, spp)};
  if (need & kConstraint) forms.b = {build(nw, nv, bu), build(nw, nd, bp)};
  if (need & kDual) forms.sstar = build(nw, nw, ss);
  if (need & kDivDiv) forms.divdiv = {build(nv, nv, ruu), build(nv, nd, rup), build(nd, nd, rpp)};
  return forms;
}

// Appends block(i, j) of `m` (rows/cols mapped through the free numbering
// and shifted by the offsets). With `mirror`, also appends the transpose.
void append_block(Triplets& out, const SparseMatrix& m, const std::vector<int>& row_free, int row_offset,
                  const std::vector<int>& col_free, int col_offset, double scale, bool mirror) {
  for (int j = 0; j < m.outerSize(); ++j) {
    const int c = col_free[static_cast<std::size_t>(j)];
    if (c < 0) continue;
    for (SparseMatrix::InnerIterator it(m, j); it; ++it) {
      const int r = row_free[static_cast<std::size_t>(it.row())];
      if (r < 0) continue;
      out.emplace_back(row_offset + r, col_offset + c, scale * it.value());
      if (mirror) out.emplace_back(col_offset + c, row_offset + r, scale * it.value());
    }
  }
}

std::vector<int> identity_map(int n) {
  std::vector<int> map(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) map[static_cast<std::size_t>(i)] = i;
  return map;
}

void restrict_into(Eigen::VectorXd& out, int offset, const Eigen::VectorXd& full, const DofMap& dofs) {
  for (int i = 0; i < dofs.num_free(); ++i) out(offset + i) = full(dofs.free_dofs[static_cast<std::size_t>(i)]);
}

}  // namespace

PrimalForm assemble_s(const Discretization& disc, const ProblemSpec& problem) {
  if (!(disc.config.gamma_T >= 0.0)) throw ConfigError("gamma_T must be non-negative");
  return assemble_forms(disc, problem, kPrimal).s;
}

ConstraintForm assemble_b(const Discretization& disc, double mu) {
  ProblemSpec problem;
  problem.mu = mu;
  return assemble_forms(disc, problem, kConstraint).b;
}

SparseMatrix assemble_sstar(const Discretization& disc) { return assemble_forms(disc, ProblemSpec{}, kDual).sstar; }

PrimalForm assemble_divdiv(const Discretization& disc, double mu) {
  ProblemSpec problem;
  problem.mu = mu;
  return assemble_forms(disc, problem, kDivDiv).divdiv;
}

SparseSystem assemble_full(const Discretization& disc, const ProblemSpec& problem) {
  if (disc.config.variant == Variant::Reduced) throw ConfigError("assemble_full needs a variant with a multiplier");
  const Forms forms = assemble_forms(disc, problem, kPrimal | kConstraint | kDual | kLoads);
  const DofMap& V = disc.V.dofs();
  const DofMap& D = disc.D.dofs();
  const DofMap& W = disc.W.dofs();

  SparseSystem sys;
  sys.kind = SystemKind::Full;
  sys.n_u = V.num_free();
  sys.n_p = D.num_free();
  sys.n_z = W.num_free();
  sys.lift_u = dirichlet_lifting(disc.V, problem);
  sys.lift_p = neumann_lifting(disc.D, disc.V, problem);

  const int ou = 0, op = sys.n_u, oz = sys.n_u + sys.n_p;
  const std::vector<int> wmap = identity_map(W.size);
  Triplets trip;
  append_block(trip, forms.s.uu, V.free_index, ou, V.free_index, ou, 1.0, false);
  append_block(trip, forms.s.up, V.free_index, ou, D.free_index, op, 1.0, true);
  append_block(trip, forms.s.pp, D.free_index, op, D.free_index, op, 1.0, false);
  append_block(trip, forms.b.u, wmap, oz, V.free_index, ou, 1.0, true);
  append_block(trip, forms.b.p, wmap, oz, D.free_index, op, 1.0, true);
  append_block(trip, forms.sstar, wmap, oz, wmap, oz, -1.0, false);
  const int n = sys.n_u + sys.n_p + sys.n_z;
  sys.matrix = build(n, n, trip);

  const Eigen::VectorXd& xu = sys.lift_u.coeffs;
  const Eigen::VectorXd& xp = sys.lift_p.coeffs;
  sys.rhs.setZero(n);
  restrict_into(sys.rhs, ou, -(forms.s.uu * xu + forms.s.up * xp), V);
  restrict_into(sys.rhs, op, -(forms.s.up.transpose() * xu + forms.s.pp * xp), D);
  sys.rhs.segment(oz, sys.n_z) = forms.load_w - forms.b.u * xu - forms.b.p * xp;
  return sys;
}

SparseSystem assemble_reduced(const Discretization& disc, const ProblemSpec& problem) {
  const SpaceConfig& cfg = disc.config;
  if (cfg.m < cfg.l || (problem.mu != 0.0 && cfg.m < cfg.k)) {
    throw ConfigError("reduced system needs the multiplier space to contain div D + mu V");
  }
  const Forms forms = assemble_forms(disc, problem, kPrimal | kConstraint | kDivDiv | kLoads);
  const DofMap& V = disc.V.dofs();
  const DofMap& D = disc.D.dofs();
  const DofMap& W = disc.W.dofs();

  SparseSystem sys;
  sys.kind = SystemKind::Reduced;
  sys.n_u = V.num_free();
  sys.n_p = D.num_free();
  sys.lift_u = dirichlet_lifting(disc.V, problem);
  sys.lift_p = neumann_lifting(disc.D, disc.V, problem);

  const SparseMatrix kuu = forms.s.uu + forms.divdiv.uu;
  const SparseMatrix kup = forms.s.up + forms.divdiv.up;
  const SparseMatrix kpp = forms.s.pp + forms.divdiv.pp;
  const int ou = 0, op = sys.n_u;
  Triplets trip;
  append_block(trip, kuu, V.free_index, ou, V.free_index, ou, 1.0, false);
  append_block(trip, kup, V.free_index, ou, D.free_index, op, 1.0, true);
  append_block(trip, kpp, D.free_index, op, D.free_index, op, 1.0, false);
  const int n = sys.n_u + sys.n_p;
  sys.matrix = build(n, n, trip);

  const Eigen::VectorXd& xu = sys.lift_u.coeffs;
  const Eigen::VectorXd& xp = sys.lift_p.coeffs;
  sys.rhs.setZero(n);
  restrict_into(sys.rhs, ou, forms.load_u - (kuu * xu + kup * xp), V);
  restrict_into(sys.rhs, op, forms.load_p - (kup.transpose() * xu + kpp * xp), D);

  const std::vector<int> wmap = identity_map(W.size);
  Triplets btrip;
  append_block(btrip, forms.b.u, wmap, 0, V.free_index, ou, 1.0, false);
  append_block(btrip, forms.b.p, wmap, 0, D.free_index, op, 1.0, false);
  sys.constraint = build(W.size, n, btrip);
  sys.multiplier_load = forms.load_w - forms.b.u * xu - forms.b.p * xp;
  return sys;
}

Eigen::VectorXd conservation_residual(const Discretization& disc, const FEFunction& u, const FEFunction& p,
                                      const ProblemSpec& problem) {
  check_function(disc.V.dofs(), u, "conservation_residual");
  check_function(disc.D.dofs(), p, "conservation_residual");
  const Mesh& mesh = disc.domain->mesh;
  const TriangleRule& rule = triangle_rule(2 * std::max(disc.config.k, disc.config.l + 1) + 6);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(mesh.num_triangles());
  LocalVector phi, div;
  LocalGradients gphi, psi;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementGeometry geo = ElementGeometry::of(mesh, t);
    const auto vd = disc.V.dofs().element(t);
    const auto dd = disc.D.dofs().element(t);
    for (int q = 0; q < rule.size(); ++q) {
      const Point x = geo.map(rule.points[q]);
      disc.V.eval(geo, x, phi, gphi);
      disc.D.eval(t, geo, x, psi, div);
      double uh = 0.0, divp = 0.0;
      for (int i = 0; i < phi.size(); ++i) uh += phi(i) * u.coeffs(vd[static_cast<std::size_t>(i)]);
      for (int i = 0; i < div.size(); ++i) divp += div(i) * p.coeffs(dd[static_cast<std::size_t>(i)]);
      r(t) += rule.weights[q] * 2.0 * geo.area * (divp + problem.mu * uh - problem.source(x));
    }
  }
  return r;
}

void write_coordinate(std::ostream& out, const SparseMatrix& matrix) {
  const auto old_precision = out.precision(17);
  for (int j = 0; j < matrix.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(matrix, j); it; ++it) out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
  }
  out.precision(old_precision);
}

}  // namespace cauchy
