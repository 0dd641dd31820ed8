#pragma once

// The glued two-mechanism system behind P and P_n, reduced along the lines of
// the congruence lemma: any edge-length-preserving configuration decomposes
// into a Bricard octahedron at some radius r carrying the blisters, plus a
// scaled Bricard octahedron at radius r' placed rigidly in space, tied by the
// eight cross edges and the four apex edges. Driving r' and solving the
// seven remaining unknowns either produces exact flex paths (P_n) or exhibits
// a growing residual floor (P).

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "rigidlab/assembly.hpp"

namespace rigidlab {

namespace mech_detail {
inline Eigen::Vector3d ev(const Vec3& v) { return {v.x, v.y, v.z}; }
inline Vec3 vv(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

inline Eigen::Matrix3d rodrigues(const Eigen::Vector3d& w) {
  double th = w.norm();
  if (th < 1e-300) return Eigen::Matrix3d::Identity();
  Eigen::Vector3d k = w / th;
  Eigen::Matrix3d K;
  K << 0, -k.z(), k.y(), k.z(), 0, -k.x(), -k.y(), k.x(), 0;
  return Eigen::Matrix3d::Identity() + std::sin(th) * K + (1 - std::cos(th)) * (K * K);
}
}  // namespace mech_detail

class GluedMechanism {
public:
  // Cross edges tying the shrunken octahedron to the carrier assembly.
  static constexpr int kCross = 8;
  static constexpr int kResiduals = kCross + 4;  // + the four apex edges

  GluedMechanism(const Construction& con, double apex_len, const SimplicialSurface& pattern)
      : cfg_(con.cfg), bf_(con.blisters), k_(con.placement.k), apex_len_(apex_len),
        pattern_(pattern) {
    using mech_detail::ev;
    const EmbeddedPolyhedron& P = con.P;
    static const std::pair<const char*, const char*> cross_edges[kCross] = {
        {"m", "a'"}, {"n", "q'"}, {"u", "a'"}, {"u", "q'"},
        {"u", "b'"}, {"x", "a'"}, {"x", "q'"}, {"x", "d'"}};
    for (int i = 0; i < kCross; ++i) {
      cross_[i] = cross_edges[i];
      cross_target_[i] = dist(P.at(cross_[i].first), P.at(cross_[i].second));
    }
    Vec3 a = con.B.at("a"), q = con.B.at("q");
    Eigen::Vector3d axis = ev(normalized(q - a));
    R0_ = mech_detail::rodrigues(kPi * axis);
    Eigen::Vector3d w0 = ev(con.aux.w);
    t0_ = w0 - k_ * (R0_ * w0);
    apex_label_ = pattern_.has_vertex("p") ? "p" : "p_n";
  }

  double apex_length() const { return apex_len_; }

  struct DriveResult {
    std::vector<double> etas;      // driven p'-heights
    std::vector<double> r_prime;   // driven radii of the shrunken mechanism
    std::vector<double> r_big;     // solved carrier radii
    std::vector<double> floors;    // Gauss-Newton residual floors (length units)
    FlexPath path;                 // filled when all floors pass path_tol
    bool is_path = false;
  };

  // Drives the shrunken mechanism's radius down via eta = height of p' above
  // its quad plane. Each step solves the 7-unknown gluing system warm-started
  // from the previous solution.
  DriveResult drive(const std::vector<double>& etas, double path_tol = 1e-11) const {
    DriveResult out;
    out.etas = etas;
    Eigen::Matrix<double, 7, 1> state;
    state.setZero();
    state(0) = cfg_.s;
    state.segment<3>(4) = t0_;
    std::vector<Eigen::Matrix<double, 7, 1>> states;
    for (double eta : etas) {
      double ratio = eta / (k_ * cfg_.s);
      if (!(ratio >= 0 && ratio < 1))
        throw Error("GluedMechanism::drive: eta outside the mechanism's range");
      double rp = cfg_.s * std::sqrt(1.0 - ratio * ratio);
      double floor = solve(state, rp);
      out.r_prime.push_back(rp);
      out.r_big.push_back(state(0));
      out.floors.push_back(floor);
      states.push_back(state);
    }
    out.is_path = true;
    for (double f : out.floors)
      if (!(f <= path_tol)) out.is_path = false;
    if (out.is_path) {
      out.path.driving = "eta";
      out.path.params.push_back(0.0);
      Eigen::Matrix<double, 7, 1> base;
      base.setZero();
      base(0) = cfg_.s;
      base.segment<3>(4) = t0_;
      out.path.configs.push_back(assemble(base, cfg_.s));
      for (size_t i = 0; i < etas.size(); ++i) {
        out.path.params.push_back(etas[i]);
        out.path.configs.push_back(assemble(states[i], out.r_prime[i]));
      }
    }
    return out;
  }

  // Residual floors when the shrunken mechanism is forced to radii r' < s,
  // each solved independently from the base state.
  std::vector<double> probe_floors(const std::vector<double>& etas) const {
    std::vector<double> out;
    for (double eta : etas) {
      Eigen::Matrix<double, 7, 1> st;
      st.setZero();
      st(0) = cfg_.s;
      st.segment<3>(4) = t0_;
      double ratio = eta / (k_ * cfg_.s);
      double rp = cfg_.s * std::sqrt(1.0 - ratio * ratio);
      out.push_back(solve(st, rp, 300));
    }
    return out;
  }

  // Full coordinate assembly at a solved state.
  EmbeddedPolyhedron assemble(const Eigen::Matrix<double, 7, 1>& state, double rp) const {
    EmbeddedPolyhedron out;
    out.surface = pattern_;
    out.coords.resize(pattern_.vertex_count());
    auto big = carrier(state(0));
    for (const char* l : {"a", "b", "c", "d", "q", "m", "n", "y", "x", "u", "v"})
      out.at(l) = big.at(l);
    out.at(apex_label_) = big.at("p");
    Eigen::Matrix3d R = mech_detail::rodrigues(state.segment<3>(1)) * R0_;
    Eigen::Vector3d t = state.segment<3>(4);
    EmbeddedPolyhedron local = shrunken(rp);
    const char* plain[6] = {"a", "b", "c", "d", "p", "q"};
    const char* primed[6] = {"a'", "b'", "c'", "d'", "p'", "q'"};
    for (int i = 0; i < 6; ++i)
      out.at(primed[i]) = mech_detail::vv(R * mech_detail::ev(local.at(plain[i]) * k_) + t);
    return out;
  }

private:
  // Carrier octahedron with the apex at its true height for |ap| = apex_len
  // (clamped to the plane when r exceeds apex_len), blisters riding.
  EmbeddedPolyhedron carrier(double r) const {
    PlanarQuad qd = build_planar_quad(cfg_, r);
    EmbeddedPolyhedron big;
    big.surface = c_pattern();
    big.coords.resize(12);
    big.at("a") = qd.a;
    big.at("b") = qd.b;
    big.at("c") = qd.c;
    big.at("d") = qd.d;
    double hp2 = apex_len_ * apex_len_ - r * r;
    big.at("p") = Vec3{0, 0, std::sqrt(std::max(hp2, 0.0))};
    big.at("q") = Vec3{0, 0, -std::sqrt(cfg_.t * cfg_.t - r * r)};
    Vec3 a = big.at("a"), q = big.at("q");
    big.at("m") = a + (q - a) * bf_.t_m;
    big.at("n") = a + (q - a) * bf_.t_n;
    Frame abq = frame_from(big.at("m"), big.at("n"), big.at("b"));
    Frame adq = frame_from(big.at("m"), big.at("n"), big.at("d"));
    big.at("x") = abq.to_world(bf_.local_x);
    big.at("y") = abq.to_world(bf_.local_y);
    big.at("u") = adq.to_world(bf_.local_u);
    big.at("v") = adq.to_world(bf_.local_v);
    return big;
  }

  EmbeddedPolyhedron shrunken(double rp) const {
    // canonical (unscaled) Bricard at radius rp with apex edge s
    BricardConfig c = cfg_;
    return build_bricard(c, rp);
  }

  Eigen::Matrix<double, kResiduals, 1> residual(const Eigen::Matrix<double, 7, 1>& state,
                                                double rp) const {
    using mech_detail::ev;
    Eigen::Matrix<double, kResiduals, 1> F;
    EmbeddedPolyhedron big = carrier(state(0));
    Eigen::Matrix3d R = mech_detail::rodrigues(state.segment<3>(1)) * R0_;
    Eigen::Vector3d t = state.segment<3>(4);
    EmbeddedPolyhedron local = shrunken(rp);
    auto primed_pos = [&](const char* plain_label) {
      return mech_detail::vv(R * ev(local.at(plain_label) * k_) + t);
    };
    const char* plain_of[6][2] = {{"a'", "a"}, {"b'", "b"}, {"c'", "c"},
                                  {"d'", "d"}, {"p'", "p"}, {"q'", "q"}};
    auto primed_by_name = [&](const std::string& name) {
      for (auto& row : plain_of)
        if (name == row[0]) return primed_pos(row[1]);
      throw Error("unknown primed label " + name);
    };
    for (int i = 0; i < kCross; ++i)
      F(i) = dist(big.at(cross_[i].first), primed_by_name(cross_[i].second)) - cross_target_[i];
    int at = kCross;
    for (const char* z : {"a", "b", "c", "d"})
      F(at++) = dist(big.at(z), big.at("p")) - apex_len_;
    return F;
  }

  // Damped Gauss-Newton on the 7 unknowns; returns the final residual norm.
  double solve(Eigen::Matrix<double, 7, 1>& state, double rp, int iters = 250) const {
    auto F = residual(state, rp);
    double lam = 1e-12;
    for (int it = 0; it < iters; ++it) {
      if (F.norm() < 3e-15) break;
      Eigen::Matrix<double, kResiduals, 7> J;
      const double eps = 1e-8;
      for (int i = 0; i < 7; ++i) {
        auto sp = state;
        sp(i) += eps;
        J.col(i) = (residual(sp, rp) - F) / eps;
      }
      Eigen::Matrix<double, 7, 7> A = J.transpose() * J;
      Eigen::Matrix<double, 7, 1> g = J.transpose() * F;
      bool improved = false;
      for (int tries = 0; tries < 30; ++tries) {
        Eigen::Matrix<double, 7, 7> Ad = A;
        for (int i = 0; i < 7; ++i) Ad(i, i) += lam * std::max(A(i, i), 1e-14);
        Eigen::Matrix<double, 7, 1> dp = Ad.ldlt().solve(-g);
        auto sn = state;
        sn += dp;
        auto Fn = residual(sn, rp);
        if (Fn.norm() < F.norm()) {
          state = sn;
          F = Fn;
          lam = std::max(lam * 0.2, 1e-15);
          improved = true;
          break;
        }
        lam *= 10;
        if (lam > 1e12) break;
      }
      if (!improved) break;
    }
    return F.norm();
  }

  BricardConfig cfg_;
  BlisterFrame bf_;
  double k_;
  double apex_len_;
  std::pair<std::string, std::string> cross_[kCross];
  double cross_target_[kCross];
  Eigen::Matrix3d R0_;
  Eigen::Vector3d t0_;
  SimplicialSurface pattern_;
  std::string apex_label_;
};

// The driven mechanism of P_n shares P's geometry except the apex length
// (and the renamed apex vertex in its pattern).
inline GluedMechanism mechanism_for(const Construction& con, int n = 0) {
  if (n <= 0) return GluedMechanism(con, con.cfg.s, con.P.surface);
  EmbeddedPolyhedron Pn = build_Pn(con.P, con.cfg, n);
  return GluedMechanism(con, con.cfg.s + 1.0 / n, Pn.surface);
}

}  // namespace rigidlab
