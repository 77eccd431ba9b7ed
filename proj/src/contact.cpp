#include "stocs/contact.hpp"

namespace stocs {

ContactKinematics contact_kinematics(const ObjectModel& obj, const EnvironmentModel& env,
                                     const Pose2& q, const Vec2& local) {
  ContactKinematics k;
  k.r = rotate(q.theta, local);
  k.world = k.r + Vec2(q.x, q.y);
  k.rho = rotate(q.theta, local - obj.com);
  k.feat = signed_distance(env, k.world);
  k.dn_dw = normal_jacobian(k.feat);
  // tangent = (n.y, -n.x), so its sensitivity reshuffles the normal's rows
  k.dt_dw.row(0) = k.dn_dw.row(1);
  k.dt_dw.row(1) = -k.dn_dw.row(0);
  return k;
}

GapValue gap_value(const ContactKinematics& k) {
  GapValue out;
  out.g = k.feat.distance;
  const Vec2& n = k.feat.normal;
  out.dq << n.x(), n.y(), n.dot(perp(k.r));
  return out;
}

TangentialVelocity tangential_velocity(const ContactKinematics& k, const Twist2& qd) {
  TangentialVelocity out;
  const Vec2 vp = Vec2(qd.vx, qd.vy) + qd.omega * perp(k.r);
  const Vec2& t = k.feat.tangent;
  out.v = vp.dot(t);
  // d(vp . t(w))/dw = t'(w)^T vp; w moves with (x, y) directly and with theta
  // through perp(r); vp itself rotates with theta at rate omega.
  const Vec2 tw = k.dt_dw.transpose() * vp;
  out.dq << tw.x(), tw.y(), tw.dot(perp(k.r)) - qd.omega * k.r.dot(t);
  out.dqd << t.x(), t.y(), perp(k.r).dot(t);
  return out;
}

std::pair<double, double> tangential_velocity_pair(const ObjectModel& obj,
                                                   const EnvironmentModel& env, const Pose2& q,
                                                   const Twist2& qd, const Vec2& local) {
  const ContactKinematics k = contact_kinematics(obj, env, q, local);
  const double v = tangential_velocity(k, qd).v;
  return {std::max(v, 0.0), std::max(-v, 0.0)};
}

double friction_residual(double mu, const ContactForce& z) { return mu * z.zn - z.zp - z.zm; }

WrenchTerm env_contact_wrench(const ContactKinematics& k, double zn, double zp, double zm) {
  WrenchTerm w;
  w.du.resize(3, 0);
  const Vec2& n = k.feat.normal;
  const Vec2& t = k.feat.tangent;
  const Vec2 F = zn * n + (zp - zm) * t;
  w.w << F.x(), F.y(), cross2(k.rho, F);

  const Eigen::Matrix2d DF = zn * k.dn_dw + (zp - zm) * k.dt_dw;
  const Vec2 dF_dth = DF * perp(k.r);
  w.dq(0, 0) = DF(0, 0);
  w.dq(0, 1) = DF(0, 1);
  w.dq(0, 2) = dF_dth.x();
  w.dq(1, 0) = DF(1, 0);
  w.dq(1, 1) = DF(1, 1);
  w.dq(1, 2) = dF_dth.y();
  w.dq(2, 0) = cross2(k.rho, Vec2(DF(0, 0), DF(1, 0)));
  w.dq(2, 1) = cross2(k.rho, Vec2(DF(0, 1), DF(1, 1)));
  w.dq(2, 2) = cross2(perp(k.rho), F) + cross2(k.rho, dF_dth);

  w.dz.col(0) << n.x(), n.y(), cross2(k.rho, n);
  w.dz.col(1) << t.x(), t.y(), cross2(k.rho, t);
  w.dz.col(2) << -t.x(), -t.y(), -cross2(k.rho, t);
  return w;
}

WrenchTerm manip_wrench(const ObjectModel& obj, const ManipulationMode& mode, const Pose2& q,
                        const double* u) {
  WrenchTerm w;
  w.du.setZero(3, mode.nu());
  if (mode.kind == ModeKind::OnePointSlide) {
    const Vec2 e = mode.face_b - mode.face_a;
    const Vec2 tf = e.normalized();
    const Vec2 nf(tf.y(), -tf.x());  // outward for a CCW boundary face
    const double p = u[0], un = u[1], ut = u[2];
    const Vec2 Rnf = rotate(q.theta, nf);
    const Vec2 Rtf = rotate(q.theta, tf);
    const Vec2 F = -un * Rnf + ut * Rtf;
    const Vec2 rho = rotate(q.theta, mode.face_a + p * e - obj.com);
    w.w << F.x(), F.y(), cross2(rho, F);
    // Arm and force rotate together, so the torque is theta-invariant.
    const Vec2 dF = perp(F);
    w.dq(0, 2) = dF.x();
    w.dq(1, 2) = dF.y();
    w.du.col(0) << 0.0, 0.0, cross2(rotate(q.theta, e), F);
    w.du.col(1) << -Rnf.x(), -Rnf.y(), -cross2(rho, Rnf);
    w.du.col(2) << Rtf.x(), Rtf.y(), cross2(rho, Rtf);
  } else {
    for (int i = 0; i < static_cast<int>(mode.points.size()); ++i) {
      const Vec2 ni = obj.boundary_normal_at(mode.points[i]);
      const Vec2 ti(ni.y(), -ni.x());
      const double un = u[2 * i], ut = u[2 * i + 1];
      const Vec2 Rni = rotate(q.theta, ni);
      const Vec2 Rti = rotate(q.theta, ti);
      const Vec2 Fi = -un * Rni + ut * Rti;
      const Vec2 rho = rotate(q.theta, mode.points[i] - obj.com);
      w.w += Eigen::Vector3d(Fi.x(), Fi.y(), cross2(rho, Fi));
      const Vec2 dF = perp(Fi);
      w.dq(0, 2) += dF.x();
      w.dq(1, 2) += dF.y();
      w.du.col(2 * i) << -Rni.x(), -Rni.y(), -cross2(rho, Rni);
      w.du.col(2 * i + 1) << Rti.x(), Rti.y(), cross2(rho, Rti);
    }
  }
  return w;
}

Eigen::Vector3d gravity_wrench(const ObjectModel& obj, double gravity) {
  return Eigen::Vector3d(0.0, -obj.mass * gravity, 0.0);
}

Eigen::Vector3d wrench_balance(const ObjectModel& obj, const EnvironmentModel& env,
                               const Pose2& q, const ManipulationMode* mode, const double* u,
                               const std::vector<std::pair<IndexPoint, ContactForce>>& contacts,
                               double gravity) {
  Eigen::Vector3d s = gravity_wrench(obj, gravity);
  if (mode && u) s += manip_wrench(obj, *mode, q, u).w;
  for (const auto& [pt, z] : contacts) {
    const ContactKinematics k = contact_kinematics(obj, env, q, pt.local);
    s += env_contact_wrench(k, z.zn, z.zp, z.zm).w;
  }
  return s;
}

}  // namespace stocs
