#pragma once

// Edge-length constraint machinery: the rigidity matrix and its flex space,
// numerical flex continuation with a pinned frame, flexibility and
// rigid-evidence certificates, the congruence-lemma check, bellows drift
// checks and the phi coordinate map.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "rigidlab/assembly.hpp"
#include "rigidlab/mechanism.hpp"

namespace rigidlab {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// ---------------------------------------------------------------------------
// phi map and constraint system

inline VectorXd phi(const EmbeddedPolyhedron& p) {
  VectorXd x(3 * p.coords.size());
  for (size_t i = 0; i < p.coords.size(); ++i) {
    x(3 * i) = p.coords[i].x;
    x(3 * i + 1) = p.coords[i].y;
    x(3 * i + 2) = p.coords[i].z;
  }
  return x;
}

inline EmbeddedPolyhedron unflatten(const SimplicialSurface& s, const VectorXd& x) {
  EmbeddedPolyhedron p;
  p.surface = s;
  p.coords.resize(s.vertex_count());
  for (int i = 0; i < s.vertex_count(); ++i)
    p.coords[i] = Vec3{x(3 * i), x(3 * i + 1), x(3 * i + 2)};
  return p;
}

struct ConstraintSystem {
  std::vector<std::pair<int, int>> edges;
  VectorXd targets_sq;                 // squared edge lengths
  std::array<int, 3> pin{0, 1, 2};     // pinned triple: point / line / plane

  static ConstraintSystem from(const EmbeddedPolyhedron& p,
                               const std::array<std::string, 3>& pin_labels = {"a", "q", "b"}) {
    ConstraintSystem cs;
    cs.edges = p.surface.edges();
    cs.targets_sq.resize(cs.edges.size());
    for (size_t e = 0; e < cs.edges.size(); ++e) {
      Vec3 d = p.coords[cs.edges[e].first] - p.coords[cs.edges[e].second];
      cs.targets_sq(e) = dot(d, d);
    }
    for (int i = 0; i < 3; ++i)
      cs.pin[i] = p.surface.has_vertex(pin_labels[i]) ? p.surface.index_of(pin_labels[i]) : i;
    return cs;
  }

  VectorXd residual(const VectorXd& x) const {
    VectorXd f(edges.size());
    for (size_t e = 0; e < edges.size(); ++e) {
      auto [i, j] = edges[e];
      Eigen::Vector3d d = x.segment<3>(3 * i) - x.segment<3>(3 * j);
      f(e) = d.squaredNorm() - targets_sq(e);
    }
    return f;
  }

  double max_length_drift(const VectorXd& x) const {
    double out = 0;
    for (size_t e = 0; e < edges.size(); ++e) {
      auto [i, j] = edges[e];
      Eigen::Vector3d d = x.segment<3>(3 * i) - x.segment<3>(3 * j);
      out = std::max(out, std::abs(d.norm() - std::sqrt(targets_sq(e))));
    }
    return out;
  }
};

// Jacobian of the squared-edge-length map: the row for edge (i, j) holds
// 2 (p_i - p_j) in block i and the negative in block j.
inline MatrixXd rigidity_matrix(const VectorXd& x, const std::vector<std::pair<int, int>>& edges) {
  MatrixXd J = MatrixXd::Zero(edges.size(), x.size());
  for (size_t e = 0; e < edges.size(); ++e) {
    auto [i, j] = edges[e];
    Eigen::Vector3d d = 2.0 * (x.segment<3>(3 * i) - x.segment<3>(3 * j));
    J.block<1, 3>(e, 3 * i) = d.transpose();
    J.block<1, 3>(e, 3 * j) = -d.transpose();
  }
  return J;
}

inline MatrixXd rigidity_matrix(const EmbeddedPolyhedron& p) {
  return rigidity_matrix(phi(p), p.surface.edges());
}

// Orthonormal basis of the 6-dim rigid motion space (3 translations + 3
// linearized rotations about the centroid).
inline MatrixXd rigid_motion_basis(const VectorXd& x) {
  int nv = static_cast<int>(x.size()) / 3;
  MatrixXd R = MatrixXd::Zero(x.size(), 6);
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (int i = 0; i < nv; ++i) centroid += x.segment<3>(3 * i);
  centroid /= nv;
  for (int i = 0; i < nv; ++i) {
    for (int ax = 0; ax < 3; ++ax) R(3 * i + ax, ax) = 1.0;
    Eigen::Vector3d r = x.segment<3>(3 * i) - centroid;
    Eigen::Vector3d wx = Eigen::Vector3d::UnitX().cross(r);
    Eigen::Vector3d wy = Eigen::Vector3d::UnitY().cross(r);
    Eigen::Vector3d wz = Eigen::Vector3d::UnitZ().cross(r);
    R.block<3, 1>(3 * i, 3) = wx;
    R.block<3, 1>(3 * i, 4) = wy;
    R.block<3, 1>(3 * i, 5) = wz;
  }
  Eigen::HouseholderQR<MatrixXd> qr(R);
  return MatrixXd(qr.householderQ()) .leftCols(6);
}

// Null-space basis of the 6 pin constraints: the first pinned vertex is
// fixed, the second keeps only its motion along the line to the first, the
// third keeps its motions within the pinned triple's plane.
inline MatrixXd pin_nullspace(const VectorXd& x, const std::array<int, 3>& pin) {
  int nv = static_cast<int>(x.size()) / 3;
  Eigen::Vector3d p1 = x.segment<3>(3 * pin[0]);
  Eigen::Vector3d p2 = x.segment<3>(3 * pin[1]);
  Eigen::Vector3d p3 = x.segment<3>(3 * pin[2]);
  Eigen::Vector3d line = (p2 - p1).normalized();
  Eigen::Vector3d nrm = (p2 - p1).cross(p3 - p1).normalized();
  Eigen::Vector3d in_plane = nrm.cross(line);  // second in-plane direction at pin[2]
  MatrixXd Z = MatrixXd::Zero(x.size(), 3 * nv - 6);
  int col = 0;
  for (int i = 0; i < nv; ++i) {
    if (i == pin[0]) continue;
    if (i == pin[1]) {
      Z.block<3, 1>(3 * i, col++) = line;
    } else if (i == pin[2]) {
      Z.block<3, 1>(3 * i, col++) = line;
      Z.block<3, 1>(3 * i, col++) = in_plane;
    } else {
      for (int ax = 0; ax < 3; ++ax) Z(3 * i + ax, col++) = 1.0;
    }
  }
  if (col != 3 * nv - 6) throw Error("pin_nullspace: degenerate pin triple");
  return Z;
}

// ---------------------------------------------------------------------------
// flex space

struct FlexSpaceInfo {
  int rank = 0;        // rank of the rigidity matrix
  int dim = 0;         // nontrivial infinitesimal flexes: 3v - 6 - rank
  MatrixXd basis;      // 3v x dim, pin-compatible, orthogonal to rigid motions
  std::vector<double> singular_values;
  bool near_threshold_warning = false;
};

inline FlexSpaceInfo flex_space(const EmbeddedPolyhedron& p, const ConstraintSystem& cs,
                                double tol = 1e-8) {
  VectorXd x = phi(p);
  MatrixXd Z = pin_nullspace(x, cs.pin);
  MatrixXd JZ = rigidity_matrix(x, cs.edges) * Z;
  Eigen::JacobiSVD<MatrixXd> svd(JZ, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  FlexSpaceInfo info;
  double smax = sv.size() ? sv(0) : 0.0;
  for (int i = 0; i < sv.size(); ++i) {
    info.singular_values.push_back(sv(i));
    if (sv(i) > tol * smax) info.rank++;
    else if (sv(i) > 0.1 * tol * smax) info.near_threshold_warning = true;
  }
  info.dim = static_cast<int>(Z.cols()) - info.rank;
  info.basis = Z * svd.matrixV().rightCols(info.dim);
  return info;
}

// ---------------------------------------------------------------------------
// damped least-squares corrector

struct LmResult {
  VectorXd x;
  double f_inf = 0, f_two = 0;
  bool converged = false;
};

// Minimizes |residual|^2 over x = anchor + S xi (S orthonormal columns).
// tol_inf <= 0 runs to stall, for residual-floor measurements.
inline LmResult lm_minimize(const ConstraintSystem& cs, const VectorXd& anchor, const MatrixXd& S,
                            double tol_inf, int max_iters = 300, int patience = 25) {
  LmResult res;
  res.x = anchor;
  VectorXd F = cs.residual(res.x);
  double lam = 1e-8;
  double best = F.norm();
  int stall = 0;
  for (int it = 0; it < max_iters; ++it) {
    if (tol_inf > 0 && F.lpNorm<Eigen::Infinity>() < tol_inf) break;
    MatrixXd J = rigidity_matrix(res.x, cs.edges) * S;
    MatrixXd A = J.transpose() * J;
    VectorXd g = J.transpose() * F;
    bool improved = false;
    for (int tries = 0; tries < 30; ++tries) {
      MatrixXd Ad = A;
      for (int i = 0; i < Ad.rows(); ++i) Ad(i, i) += lam * std::max(A(i, i), 1e-12);
      VectorXd dxi = Ad.ldlt().solve(-g);
      VectorXd xn = res.x + S * dxi;
      VectorXd Fn = cs.residual(xn);
      if (Fn.norm() < F.norm()) {
        res.x = xn;
        F = Fn;
        lam = std::max(lam * 0.3, 1e-14);
        improved = true;
        break;
      }
      lam *= 10;
      if (lam > 1e13) break;
    }
    if (improved && F.norm() < best * (1 - 1e-6)) {
      best = F.norm();
      stall = 0;
    } else {
      if (++stall > patience) break;
    }
    best = std::min(best, F.norm());
  }
  res.f_inf = F.lpNorm<Eigen::Infinity>();
  res.f_two = F.norm();
  res.converged = tol_inf > 0 && res.f_inf < tol_inf;
  return res;
}

// Damped full-Newton descent of 1/2 |F|^2 over anchor + S xi. The residual
// map is exactly quadratic, so the Hessian J^T J + sum_e F_e H_e is exact;
// this resolves the flat valleys (fourth-order in the displacement) where
// plain Gauss-Newton damping stalls.
inline LmResult newton_project(const ConstraintSystem& cs, const VectorXd& anchor,
                               const MatrixXd& S, double tol_inf, int max_iters = 200) {
  LmResult res;
  res.x = anchor;
  VectorXd F = cs.residual(res.x);
  double lam = 1e-10;
  const int k = static_cast<int>(S.cols());
  for (int it = 0; it < max_iters; ++it) {
    if (tol_inf > 0 && F.lpNorm<Eigen::Infinity>() < tol_inf) break;
    MatrixXd JS = rigidity_matrix(res.x, cs.edges) * S;
    VectorXd g = JS.transpose() * F;
    MatrixXd H = JS.transpose() * JS;
    for (size_t e = 0; e < cs.edges.size(); ++e) {
      auto [i, j] = cs.edges[e];
      MatrixXd D = S.middleRows(3 * i, 3) - S.middleRows(3 * j, 3);
      H += (2.0 * F(e)) * (D.transpose() * D);
    }
    double phi = 0.5 * F.squaredNorm();
    bool improved = false;
    for (int tries = 0; tries < 40; ++tries) {
      MatrixXd Hd = H + lam * MatrixXd::Identity(k, k);
      Eigen::LDLT<MatrixXd> ldlt(Hd);
      if (ldlt.info() != Eigen::Success) {
        lam = std::max(lam * 10, 1e-12);
        continue;
      }
      VectorXd dxi = ldlt.solve(-g);
      VectorXd xn = res.x + S * dxi;
      VectorXd Fn = cs.residual(xn);
      if (0.5 * Fn.squaredNorm() < phi) {
        res.x = xn;
        F = Fn;
        lam = std::max(lam * 0.25, 1e-12);
        improved = true;
        break;
      }
      lam = std::max(lam * 10, 1e-12);
      if (lam > 1e15) break;
    }
    if (!improved) break;
    if (g.lpNorm<Eigen::Infinity>() < 1e-18) break;
  }
  res.f_inf = F.lpNorm<Eigen::Infinity>();
  res.f_two = F.norm();
  res.converged = tol_inf > 0 && res.f_inf < tol_inf;
  return res;
}

// Orthonormal basis of the columns of Z restricted to directions orthogonal
// to d (d expected inside span Z).
inline MatrixXd slice_basis(const MatrixXd& Z, const VectorXd& d) {
  VectorXd zd = Z.transpose() * d;
  int k = static_cast<int>(Z.cols());
  MatrixXd H = MatrixXd::Identity(k, k);
  // Householder reflector sending e1 to zd-hat; columns 2..k then span zd-perp
  VectorXd v = zd.normalized();
  v(0) -= 1.0;
  double vn = v.norm();
  if (vn > 1e-14) {
    v /= vn;
    H -= 2.0 * v * v.transpose();
  }
  return Z * H.rightCols(k - 1);
}

// Exact second-order term of the squared-length map along direction d (the
// map is quadratic, so one extra evaluation recovers it).
inline VectorXd quadratic_term(const ConstraintSystem& cs, const VectorXd& x, const VectorXd& d,
                               const MatrixXd& J) {
  return cs.residual(x + d) - cs.residual(x) - J * d;
}

// ---------------------------------------------------------------------------
// continuation

struct Obstruction {
  std::vector<double> h_values;
  std::vector<double> floors;      // stalled |F|_2 after row-space correction
  double fitted_exponent = 0;      // slope of log floor vs log h
  int steps_completed = 0;
};

struct ContinuationOptions {
  double h = 1e-3;
  int max_steps = 40;
  // Acceptance per corrector: |F|_inf < tol_rel * max(1, max squared target).
  // The bar sits well below the residual that P's near-flex sweep can hold
  // over the walk budget (P is a limit of flexes, so it carries a
  // fourth-order-obstructed shadow of the nearby flexes) while genuine
  // mechanisms correct to machine depth.
  double tol_rel = 1e-13;
  int halvings = 2;                // internal retries with halved step
  double min_arc_fraction = 0.75;  // a path must cover this fraction of max_steps * h
  std::vector<double> floor_h{1e-3, 5e-4, 2.5e-4};
};

using ContinuationOutcome = std::variant<FlexPath, Obstruction>;

// Residual floors along d, corrected within the row space of the rigidity
// matrix at the base (no kernel drift): the genuine second-order obstruction.
inline Obstruction measure_floors(const ConstraintSystem& cs, const VectorXd& x0,
                                  const VectorXd& d, const std::vector<double>& hs,
                                  int steps_completed) {
  MatrixXd Z = pin_nullspace(x0, cs.pin);
  MatrixXd JZ = rigidity_matrix(x0, cs.edges) * Z;
  Eigen::JacobiSVD<MatrixXd> svd(JZ, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-8 * sv(0)) rank++;
  MatrixXd RS = Z * svd.matrixV().leftCols(rank);
  Obstruction obs;
  obs.h_values = hs;
  obs.steps_completed = steps_completed;
  for (double h : hs) {
    LmResult r = lm_minimize(cs, x0 + h * d, RS, 0.0, 400, 30);
    obs.floors.push_back(r.f_two);
  }
  // least squares slope of log(floor) against log(h)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = static_cast<int>(hs.size());
  for (int i = 0; i < n; ++i) {
    double lx = std::log(hs[i]), ly = std::log(std::max(obs.floors[i], 1e-300));
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
  }
  obs.fitted_exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return obs;
}

// Predictor-corrector continuation of the edge-length system from `start`
// along `direction`: first-order predictor steps, damped least-squares
// correction inside the slice orthogonal to the step, secant direction
// updates. A failed step is retried with a halved step before reporting an
// obstruction (with its residual floors at decreasing h). A completed walk
// that could not hold its nominal step (total arclength below
// min_arc_fraction of the budget) also counts as obstructed.
inline ContinuationOutcome continue_flex(const EmbeddedPolyhedron& start,
                                         const ConstraintSystem& cs, const VectorXd& direction,
                                         const ContinuationOptions& opt = {}) {
  VectorXd x0 = phi(start);
  MatrixXd Z = pin_nullspace(x0, cs.pin);
  double scale = std::max(1.0, cs.targets_sq.maxCoeff());
  double tol_inf = opt.tol_rel * scale;
  VectorXd d = direction.normalized();
  VectorXd x = x0;
  FlexPath path;
  path.driving = "arclength";
  path.params.push_back(0.0);
  path.configs.push_back(start);
  double arc = 0;
  int steps_done = 0;
  for (int step = 0; step < opt.max_steps; ++step) {
    bool accepted = false;
    double h_try = opt.h;
    for (int attempt = 0; attempt <= opt.halvings && !accepted; ++attempt) {
      MatrixXd S = slice_basis(Z, d);
      LmResult r = lm_minimize(cs, x + h_try * d, S, tol_inf);
      if (r.converged) {
        VectorXd dn = r.x - x;
        if (dn.norm() > 1e-14) {
          x = r.x;
          arc += dn.norm();
          d = dn.normalized();
          path.params.push_back(arc);
          path.configs.push_back(unflatten(start.surface, x));
          accepted = true;
          ++steps_done;
        }
      }
      if (!accepted) h_try *= 0.5;
    }
    if (!accepted) break;
  }
  if (steps_done == opt.max_steps && arc >= opt.min_arc_fraction * opt.max_steps * opt.h)
    return path;
  return measure_floors(cs, x0, direction.normalized(), opt.floor_h, steps_done);
}

// ---------------------------------------------------------------------------
// path validation and certificates

struct PathCheck {
  bool ok = false;
  double max_drift = 0;          // absolute edge-length drift
  double max_dihedral_change = 0;
  bool pairwise_noncongruent = false;
  std::string detail;
};

inline PathCheck validate_flex_path(const FlexPath& path, double drift_tol = 1e-9,
                                    double dihedral_min = 1e-3, double congr_tol_rel = 1e-8) {
  PathCheck out;
  if (path.configs.size() < 3) {
    out.detail = "path too short";
    return out;
  }
  out.max_drift = path.max_edge_drift();
  auto edges = path.configs.front().surface.edges();
  auto first = edge_bend_angles(path.configs.front(), edges);
  auto last = edge_bend_angles(path.configs.back(), edges);
  for (size_t k = 0; k < edges.size(); ++k) {
    double delta = std::abs(last[k] - first[k]);
    delta = std::min(delta, 2 * kPi - delta);
    out.max_dihedral_change = std::max(out.max_dihedral_change, delta);
  }
  double diam = path.configs.front().diameter();
  out.pairwise_noncongruent = true;
  // distance-matrix comparison over a thinned sample of the path
  std::vector<size_t> picks;
  size_t stride = std::max<size_t>(1, path.configs.size() / 10);
  for (size_t i = 0; i < path.configs.size(); i += stride) picks.push_back(i);
  if (picks.back() != path.configs.size() - 1) picks.push_back(path.configs.size() - 1);
  for (size_t ai = 0; ai < picks.size() && out.pairwise_noncongruent; ++ai)
    for (size_t bi = ai + 1; bi < picks.size(); ++bi)
      if (labeled_congruent(path.configs[picks[ai]].coords, path.configs[picks[bi]].coords,
                            congr_tol_rel * diam)) {
        out.pairwise_noncongruent = false;
        break;
      }
  out.ok = out.max_drift < drift_tol && out.max_dihedral_change > dihedral_min &&
           out.pairwise_noncongruent;
  if (!out.ok) {
    out.detail = out.max_drift >= drift_tol          ? "edge drift above tolerance"
                 : out.max_dihedral_change <= dihedral_min ? "no dihedral moved"
                                                           : "congruent configurations on path";
  }
  return out;
}

struct RigidityReport {
  int rank = 0;
  int flex_dim = 0;
  std::string verdict = "inconclusive";  // flexible | rigid-evidence | inconclusive
  std::string failing_item;
  SectorAngles sector;
  double sector_sum = 0;
  std::vector<double> floor_h;
  std::vector<double> floors;          // worst floor per h over directions
  double floor_exponent_min = 0;       // worst fitted exponent over directions
  double bellows_volume_drift = std::numeric_limits<double>::quiet_NaN();
  double bellows_mic_drift = std::numeric_limits<double>::quiet_NaN();
  std::optional<FlexPath> flex_path;
  double mechanism_floor_max = 0;      // driven-probe residual at the largest drive
  bool second_order_flex_exists = false;
  bool near_threshold_warning = false;
};

// Searches for a genuine flex. Evidence, in order: an externally supplied
// candidate family (the analytic B family, the transported C family), a
// generic continuation walk from some +-basis direction, or the driven
// glued-mechanism path. Whatever the source, the path must keep edge drift
// under 1e-9 while moving a dihedral by more than 1e-3 rad through
// pairwise non-congruent configurations.
inline RigidityReport certify_flexible(const EmbeddedPolyhedron& X, const ConstraintSystem& cs,
                                       const GluedMechanism* mech = nullptr,
                                       const FlexPath* candidate = nullptr,
                                       const ContinuationOptions& opt = {}) {
  RigidityReport rep;
  FlexSpaceInfo fs = flex_space(X, cs);
  rep.rank = fs.rank;
  rep.flex_dim = fs.dim;
  rep.near_threshold_warning = fs.near_threshold_warning;
  if (candidate && validate_flex_path(*candidate).ok) {
    rep.verdict = "flexible";
    rep.flex_path = *candidate;
    return rep;
  }
  if (fs.dim == 0) {
    rep.verdict = "inconclusive";
    rep.failing_item = "no nontrivial infinitesimal flex (rank full)";
    return rep;
  }
  for (int c = 0; c < fs.dim; ++c) {
    for (double sign : {1.0, -1.0}) {
      auto outcome = continue_flex(X, cs, sign * fs.basis.col(c), opt);
      if (std::holds_alternative<FlexPath>(outcome)) {
        FlexPath& p = std::get<FlexPath>(outcome);
        PathCheck chk = validate_flex_path(p);
        if (chk.ok) {
          rep.verdict = "flexible";
          rep.flex_path = std::move(p);
          return rep;
        }
      }
    }
  }
  if (mech) {
    std::vector<double> etas;
    for (int j = 1; j <= 40; ++j) etas.push_back(j * 2.5e-4);
    auto drv = mech->drive(etas);
    if (drv.is_path) {
      PathCheck chk = validate_flex_path(drv.path);
      if (chk.ok) {
        rep.verdict = "flexible";
        rep.flex_path = std::move(drv.path);
        return rep;
      }
    }
  }
  rep.verdict = "inconclusive";
  rep.failing_item = "no flex path found";
  return rep;
}

// Deterministic search for a second-order extendable direction inside the
// flex space: Gauss-Newton on the kernel sphere for the cokernel component
// of the quadratic term, seeded with single-vertex axis motions. Returns the
// smallest relative obstruction found.
inline double second_order_flex_min(const EmbeddedPolyhedron& X, const ConstraintSystem& cs) {
  VectorXd x0 = phi(X);
  MatrixXd Z = pin_nullspace(x0, cs.pin);
  MatrixXd J = rigidity_matrix(x0, cs.edges);
  MatrixXd JZ = J * Z;
  Eigen::JacobiSVD<MatrixXd> svd(JZ, Eigen::ComputeFullV | Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-8 * sv(0)) rank++;
  int kdim = static_cast<int>(Z.cols()) - rank;
  if (kdim <= 0) return 1.0;
  MatrixXd K = Z * svd.matrixV().rightCols(kdim);
  MatrixXd Uc = svd.matrixU().rightCols(svd.matrixU().cols() - rank);
  auto qbar = [&](const VectorXd& c) -> VectorXd {
    return Uc.transpose() * quadratic_term(cs, x0, K * c, J);
  };
  auto qfull = [&](const VectorXd& c) { return quadratic_term(cs, x0, K * c, J).norm(); };
  std::vector<VectorXd> seeds;
  for (int i = 0; i < X.surface.vertex_count(); ++i)
    for (int ax = 0; ax < 3; ++ax) {
      VectorXd e = VectorXd::Zero(x0.size());
      e(3 * i + ax) = 1.0;
      VectorXd c = K.transpose() * e;
      if (c.norm() > 0.2) seeds.push_back(c.normalized());
    }
  std::mt19937 rng(11);
  std::normal_distribution<double> gauss;
  for (int t = 0; t < 8; ++t) {
    VectorXd c(kdim);
    for (int i = 0; i < kdim; ++i) c(i) = gauss(rng);
    seeds.push_back(c.normalized());
  }
  double best = std::numeric_limits<double>::infinity();
  for (auto c : seeds) {
    for (int it = 0; it < 120; ++it) {
      VectorXd q0 = qbar(c);
      if (q0.norm() < 1e-16) break;
      MatrixXd Jc(q0.size(), kdim);
      const double eps = 1e-7;
      for (int i = 0; i < kdim; ++i) {
        VectorXd cp = c;
        cp(i) += eps;
        Jc.col(i) = (qbar(cp) - q0) / eps;
      }
      MatrixXd Pr = MatrixXd::Identity(kdim, kdim) - c * c.transpose();
      VectorXd dc = Pr * (Jc * Pr).completeOrthogonalDecomposition().solve(-q0);
      double t = 1.0;
      bool ok = false;
      for (int bt = 0; bt < 25; ++bt) {
        VectorXd cn = (c + t * dc).normalized();
        if (qbar(cn).norm() < q0.norm()) {
          c = cn;
          ok = true;
          break;
        }
        t *= 0.5;
      }
      if (!ok) break;
    }
    double rel = qbar(c).norm() / std::max(qfull(c), 1e-300);
    best = std::min(best, rel);
  }
  return best;
}

// ---------------------------------------------------------------------------
// lemma check, bellows, convergence

// Finds r* in the flex interval with |ac| of B(r*) matching |ac| of Q, then
// compares the labeled six-point distance matrices.
inline std::pair<double, bool> lemma_congruence_check(const EmbeddedPolyhedron& Q,
                                                      const BricardConfig& cfg,
                                                      const FlexInterval& iv, double tol,
                                                      double precondition_tol = 1e-6) {
  // precondition: Q satisfies the quad/apex edge targets
  auto need = [&](const char* i, const char* j, double len) {
    if (std::abs(dist(Q.at(i), Q.at(j)) - len) > precondition_tol)
      throw Error(std::string("lemma check precondition: edge ") + i + j + " off target");
  };
  need("a", "b", cfg.l_ab);
  need("b", "c", cfg.l_bc);
  need("c", "d", cfg.l_ab);
  need("d", "a", cfg.l_bc);
  const char* apex = Q.surface.has_vertex("p") ? "p" : "p_n";
  for (const char* z : {"a", "b", "c", "d"}) need(z, "q", cfg.t);
  (void)apex;

  double target = dist(Q.at("a"), Q.at("c"));
  // |ac| depends on the quad alone, so the matching radius can be found a
  // whisker past the endpoint r = s (corrector noise on Q lands there)
  auto ac_of = [&](double r) {
    PlanarQuad quad = build_planar_quad(cfg, r);
    return dist(quad.a, quad.c);
  };
  double lo = iv.s - iv.epsilon + 1e-12, hi = iv.s + 1e-6;
  double flo = ac_of(lo) - target, fhi = ac_of(hi) - target;
  if (flo * fhi > 0) {
    // |ac| may be non-monotone in principle; scan for a bracket
    bool found = false;
    double prev_r = lo, prev_f = flo;
    for (int i = 1; i <= 256; ++i) {
      double r = lo + (hi - lo) * i / 256.0;
      double f = ac_of(r) - target;
      if (prev_f * f <= 0) {
        lo = prev_r;
        hi = r;
        flo = prev_f;
        found = true;
        break;
      }
      prev_r = r;
      prev_f = f;
    }
    if (!found) throw Error("lemma check: |ac| outside the range realized on the interval");
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double fm = ac_of(mid) - target;
    if (flo * fm <= 0) hi = mid;
    else {
      lo = mid;
      flo = fm;
    }
  }
  double r_star = std::min(0.5 * (lo + hi), iv.s);
  EmbeddedPolyhedron B = build_bricard(cfg, r_star);
  std::vector<Vec3> xs, ys;
  const char* six_q[6] = {"a", "b", "c", "d", Q.surface.has_vertex("p") ? "p" : "p_n", "q"};
  const char* six_b[6] = {"a", "b", "c", "d", "p", "q"};
  for (int i = 0; i < 6; ++i) {
    xs.push_back(Q.at(six_q[i]));
    ys.push_back(B.at(six_b[i]));
  }
  if (labeled_congruent(xs, ys, tol)) return {r_star, true};
  // the p apex sits at the fold: deformations may carry it to the other
  // sheet (p below the base plane), which is the same one-parameter family
  ys[4] = Vec3{B.at("p").x, B.at("p").y, -B.at("p").z};
  return {r_star, labeled_congruent(xs, ys, tol)};
}

struct BellowsDrift {
  double volume_drift = 0;  // relative to max(|V0|, diam^3)
  double mic_drift = 0;     // relative to max(|M0|, diam)
};

// Bend angles are unwrapped edge-by-edge along the path so that folded-flat
// edges (the apex fold at r = s) stay on one analytic branch.
inline BellowsDrift bellows_check(const FlexPath& path) {
  if (path.configs.empty()) throw Error("bellows_check: empty path");
  auto edges = path.configs.front().surface.edges();
  std::vector<double> lengths0;
  for (auto [i, j] : edges)
    lengths0.push_back(dist(path.configs.front().coords[i], path.configs.front().coords[j]));
  std::vector<double> prev;
  double vmin = 0, vmax = 0, mmin = 0, mmax = 0;
  for (size_t kcfg = 0; kcfg < path.configs.size(); ++kcfg) {
    const auto& c = path.configs[kcfg];
    double vol = signed_volume(c);
    auto bends = edge_bend_angles(c, edges);
    if (!prev.empty())
      for (size_t e = 0; e < bends.size(); ++e) {
        double b = bends[e];
        while (b - prev[e] > kPi) b -= 2 * kPi;
        while (b - prev[e] < -kPi) b += 2 * kPi;
        bends[e] = b;
      }
    prev = bends;
    double mic = 0;
    for (size_t e = 0; e < edges.size(); ++e)
      mic += dist(c.coords[edges[e].first], c.coords[edges[e].second]) * bends[e] / 2.0;
    if (kcfg == 0) {
      vmin = vmax = vol;
      mmin = mmax = mic;
    } else {
      vmin = std::min(vmin, vol);
      vmax = std::max(vmax, vol);
      mmin = std::min(mmin, mic);
      mmax = std::max(mmax, mic);
    }
  }
  double diam = path.configs.front().diameter();
  BellowsDrift out;
  double vscale = std::max(std::abs(vmin + vmax) / 2, diam * diam * diam);
  double mscale = std::max(std::abs(mmin + mmax) / 2, diam);
  out.volume_drift = (vmax - vmin) / vscale;
  out.mic_drift = (mmax - mmin) / mscale;
  return out;
}

struct ConvergenceRow {
  int n = 0;
  double distance = 0;
  double expected = 0;
};

inline std::vector<ConvergenceRow> convergence_check(const std::vector<int>& ns,
                                                     const EmbeddedPolyhedron& P,
                                                     const BricardConfig& cfg) {
  std::vector<ConvergenceRow> out;
  VectorXd base = phi(P);
  for (int n : ns) {
    EmbeddedPolyhedron Pn = build_Pn(P, cfg, n);
    if (!combinatorially_equivalent(P.surface, Pn.surface))
      throw Error("convergence_check: enumeration mismatch");
    ConvergenceRow row;
    row.n = n;
    row.distance = (phi(Pn) - base).norm();
    row.expected = std::sqrt(2.0 * cfg.s / n + 1.0 / (double(n) * n));
    out.push_back(row);
  }
  return out;
}

// ---------------------------------------------------------------------------
// rigid-evidence certificate

struct RigidEvidenceInputs {
  const Construction* con = nullptr;
  const EmbeddedPolyhedron* X = nullptr;   // P or a P_n / ablation fixture
  const GluedMechanism* mech = nullptr;    // driven probe, when applicable
  double apex_len = 0;                     // |ap| of the fixture
};

// verdict "rigid-evidence" iff: no flex path is found by the full search;
// every flex-space direction obstructs with residual floors fitting
// rho ~ h^p, p >= 1.8; the sector partition holds with (ii) = (iv) =
// alpha(s) = min alpha; alpha is minimal at r = s over the reconstructed
// apex interval. Any failure names the item.
inline RigidityReport certify_rigid_evidence(const RigidEvidenceInputs& in,
                                             const ContinuationOptions& opt = {}) {
  const Construction& con = *in.con;
  const EmbeddedPolyhedron& X = *in.X;
  ConstraintSystem cs = ConstraintSystem::from(X);

  // (0) the full flexibility search (generic walks and the driven mechanism)
  // must come up empty
  RigidityReport rep = certify_flexible(X, cs, in.mech, nullptr, opt);
  if (rep.verdict == "flexible") {
    rep.failing_item = "a flex path exists";
    return rep;
  }
  rep.verdict = "inconclusive";
  FlexSpaceInfo fs = flex_space(X, cs);

  // (1) every direction obstructs. Directions whose second-order residual is
  // measurable must show floors fitting rho ~ h^p with p >= 1.8; directions
  // on the second-order-flex cone (P inherits one from the approximating
  // flexes) leave floors at solver noise, and their obstruction is witnessed
  // by the continuation dying. At least one direction must be measurable.
  constexpr double kFloorGate = 1e-12;  // on the smallest-h floor
  rep.floor_h = opt.floor_h;
  rep.floors.assign(opt.floor_h.size(), 0.0);
  rep.floor_exponent_min = std::numeric_limits<double>::infinity();
  int measurable = 0, extendable = 0;
  for (int c = 0; c < fs.dim; ++c) {
    for (double sign : {1.0, -1.0}) {
      auto outcome = continue_flex(X, cs, sign * fs.basis.col(c), opt);
      if (std::holds_alternative<FlexPath>(outcome)) {
        rep.failing_item = "a direction continued without a valid path";
        return rep;
      }
      const Obstruction& obs = std::get<Obstruction>(outcome);
      if (obs.floors.back() >= kFloorGate) {
        ++measurable;
        rep.floor_exponent_min = std::min(rep.floor_exponent_min, obs.fitted_exponent);
        for (size_t i = 0; i < obs.floors.size(); ++i)
          rep.floors[i] = std::max(rep.floors[i], obs.floors[i]);
      } else {
        ++extendable;  // second-order resolvable; obstructed at higher order
      }
    }
  }
  rep.second_order_flex_exists = extendable > 0;
  if (measurable == 0) {
    rep.failing_item = "no direction shows a measurable residual floor";
    return rep;
  }
  if (!(rep.floor_exponent_min >= 1.8)) {
    rep.failing_item = "residual floors not second-order (p < 1.8)";
    return rep;
  }

  // driven-mechanism probe: forcing the shrunken octahedron below r' = s must
  // hit a strictly positive, growing floor
  if (in.mech) {
    std::vector<double> probe_etas{5e-3, 1e-2, 2e-2};
    auto fl = in.mech->probe_floors(probe_etas);
    rep.mechanism_floor_max = fl.back();
    if (!(fl.back() > 1e-8 && fl.back() > 4.0 * fl[1] && fl[1] > 4.0 * fl[0])) {
      rep.failing_item = "driven mechanism does not obstruct";
      return rep;
    }
  }

  // (2) sector certificate
  double a_s = alpha(con.cfg, con.cfg.s);
  rep.sector = sectors(X);
  rep.sector_sum = rep.sector.sum();
  try {
    check_sector_partition(X);
  } catch (const Error& e) {
    rep.failing_item = std::string("sector partition: ") + e.what();
    return rep;
  }
  double tet_i = dihedral(X.at("m"), X.at("n"), X.at("y"), X.at("x")).angle;
  double tet_iii = dihedral(X.at("m"), X.at("n"), X.at("v"), X.at("u")).angle;
  if (std::abs(rep.sector.i - tet_i) > 1e-9 || std::abs(rep.sector.iii - tet_iii) > 1e-9) {
    rep.failing_item = "sectors (i)/(iii) do not match the blister tetrahedra";
    return rep;
  }
  if (std::abs(rep.sector.ii - a_s) > 1e-9 || std::abs(rep.sector.iv - a_s) > 1e-9) {
    rep.failing_item = "sectors (ii)/(iv) differ from alpha(s)";
    return rep;
  }
  if (std::abs(rep.sector_sum - 2 * kPi) > 1e-9) {
    rep.failing_item = "sector sum differs from 2 pi";
    return rep;
  }

  // (3) alpha minimal at r = s over each reconstructed apex interval
  for (double r : con.interval.samples)
    if (r < con.cfg.s && !(alpha(con.cfg, r) > a_s)) {
      rep.failing_item = "alpha not strictly minimal at r = s on the sampled interval";
      return rep;
    }
  double apex = in.apex_len > 0 ? in.apex_len : con.cfg.s;
  if (apex > con.cfg.s + 1e-12) {
    // the apex interval extends past s, where alpha keeps decreasing
    double r_above = std::min({apex, con.cfg.s + 0.5 * (apex - con.cfg.s), con.cfg.t - 1e-6});
    if (alpha_q_side(con.cfg, r_above) < a_s) {
      rep.failing_item = "apex interval extends past r = s (alpha not minimal there)";
      return rep;
    }
  }

  rep.verdict = "rigid-evidence";
  rep.failing_item.clear();
  return rep;
}

}  // namespace rigidlab
