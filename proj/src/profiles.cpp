#include "wakefar/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wakefar/errors.hpp"

namespace wakefar {

namespace {

std::array<double, 5> values(const SimilarityState& s) {
  return {s.e_val, s.g_val, s.h_val, s.r1_val, s.r2_val};
}
std::array<double, 5> slopes(const SimilarityState& s) {
  return {s.de, s.dg, s.dh, s.dr1, s.dr2};
}
std::array<double, 5> curvatures(const SecondDerivs& d) {
  return {d.d2e, d.d2g, d.d2h, d.d2r1, d.d2r2};
}

}  // namespace

SolutionProfiles::SolutionProfiles(std::vector<SimilarityState> nodes,
                                   std::vector<SecondDerivs> second,
                                   ProfileMeta meta)
    : nodes_(std::move(nodes)), second_(std::move(second)), meta_(meta) {
  if (nodes_.size() != second_.size()) {
    throw std::invalid_argument("profile node and curvature tables differ in size");
  }
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (!(nodes_[i].tau > nodes_[i - 1].tau)) {
      throw std::invalid_argument("profile grid must be strictly increasing");
    }
  }
}

double SolutionProfiles::support() const {
  return nodes_.empty() ? 0.0 : nodes_.back().tau;
}

std::size_t SolutionProfiles::cell(double tau) const {
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), tau,
                             [](double t, const SimilarityState& s) { return t < s.tau; });
  std::size_t i = it == nodes_.begin() ? 0 : static_cast<std::size_t>(it - nodes_.begin()) - 1;
  return std::min(i, nodes_.size() - 2);
}

ProfileJets SolutionProfiles::jets(double tau) const {
  ProfileJets out{};
  if (nodes_.size() < 2 || tau < 0.0 || tau > support()) return out;
  const std::size_t i = cell(tau);
  const SimilarityState& l = nodes_[i];
  const SimilarityState& r = nodes_[i + 1];
  const double h = r.tau - l.tau;
  const double t = (tau - l.tau) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  const double d00 = (6 * t2 - 6 * t) / h, d10 = 3 * t2 - 4 * t + 1;
  const double d01 = (-6 * t2 + 6 * t) / h, d11 = 3 * t2 - 2 * t;
  const auto vl = values(l), vr = values(r), sl = slopes(l), sr = slopes(r);
  const auto cl = curvatures(second_[i]), cr = curvatures(second_[i + 1]);
  for (int c = 0; c < 5; ++c) {
    out[c].v = h00 * vl[c] + h10 * h * sl[c] + h01 * vr[c] + h11 * h * sr[c];
    out[c].d1 = d00 * vl[c] + d10 * sl[c] + d01 * vr[c] + d11 * sr[c];
    // Curvature from the Hermite interpolant of the slope.
    out[c].d2 = d00 * sl[c] + d10 * cl[c] + d01 * sr[c] + d11 * cr[c];
  }
  return out;
}

SimilarityState SolutionProfiles::at(double tau) const {
  const ProfileJets j = jets(tau);
  SimilarityState s;
  s.tau = tau;
  s.e_val = j[0].v;
  s.g_val = j[1].v;
  s.h_val = j[2].v;
  s.r1_val = j[3].v;
  s.r2_val = j[4].v;
  s.de = j[0].d1;
  s.dg = j[1].d1;
  s.dh = j[2].d1;
  s.dr1 = j[3].d1;
  s.dr2 = j[4].d1;
  return s;
}

SolutionProfiles SolutionProfiles::rescaled(double lambda) const {
  if (!(lambda > 0.0)) throw std::invalid_argument("rescale factor must be positive");
  const double l2 = lambda * lambda;
  std::vector<SimilarityState> n = nodes_;
  std::vector<SecondDerivs> d = second_;
  for (std::size_t i = 0; i < n.size(); ++i) {
    SimilarityState& s = n[i];
    s.tau *= lambda;
    s.e_val *= l2;
    s.g_val *= l2;
    s.r2_val *= l2;
    s.de *= lambda;
    s.dg *= lambda;
    s.dr2 *= lambda;
    s.dh /= lambda;
    s.dr1 /= lambda;
    d[i].d2h /= l2;
    d[i].d2r1 /= l2;
  }
  ProfileMeta m = meta_;
  m.a *= lambda;
  m.e0 *= l2;
  m.g0 *= l2;
  m.r20 *= l2;
  m.c1 *= std::pow(lambda, 2.0 - m.edge_p);
  m.tau_match *= lambda;
  m.scale *= lambda;
  SolutionProfiles out(std::move(n), std::move(d), m);
  return out;
}

FieldJet profile_jet(const ProfileJet& f, double x, double y, double z, double alpha) {
  const double xa = std::pow(x, alpha);
  const double yh = y / xa, zh = z / xa;
  const double tau = std::hypot(yh, zh);
  const double x2a = xa * xa;
  FieldJet g;
  g.value = f.v;
  const double q = tau > 1e-12 ? f.d1 / tau : f.d2;  // f'/tau, axis limit f''(0)
  g.dx = -alpha * tau * f.d1 / x;
  g.dy = q * yh / xa;
  g.dz = q * zh / xa;
  if (tau > 1e-12) {
    const double cy = yh * yh / (tau * tau), cz = zh * zh / (tau * tau);
    g.dyy = (f.d2 * cy + q * cz) / x2a;
    g.dzz = (f.d2 * cz + q * cy) / x2a;
  } else {
    g.dyy = f.d2 / x2a;
    g.dzz = f.d2 / x2a;
  }
  return g;
}

PhysicalPoint similarity_lift(const ProfileSource& profiles, double x, double y,
                              double z, const ModelConstants& k, bool strict) {
  if (!(x > 0.0)) throw std::invalid_argument("lift requires x > 0");
  const double al = k.alpha;
  const double xa = std::pow(x, al);
  const double yh = y / xa, zh = z / xa;
  const double tau = std::hypot(yh, zh);
  PhysicalPoint p;
  p.x = x;
  p.y = y;
  p.z = z;
  if (tau > profiles.support()) {
    if (strict) {
      std::ostringstream os;
      os << "tau = " << tau << " beyond the wake edge " << profiles.support();
      throw OutOfSupport(os.str());
    }
    p.in_support = false;
    return p;
  }
  const ProfileJets j = profiles.jets(tau);

  auto jet = [&](const ProfileJet& f) { return profile_jet(f, x, y, z, al); };
  auto scaled = [&](const FieldJet& f, double pw) {
    const double s = std::pow(x, pw);
    FieldJet g;
    g.value = s * f.value;
    g.dx = s * f.dx + pw * s / x * f.value;
    g.dy = s * f.dy;
    g.dz = s * f.dz;
    g.dyy = s * f.dyy;
    g.dzz = s * f.dzz;
    return g;
  };

  const FieldJet je = jet(j[0]), jg = jet(j[1]), jh = jet(j[2]);
  const FieldJet jr1 = jet(j[3]), jr2 = jet(j[4]);
  p.e = scaled(je, 2.0 * al - 2.0);
  p.eps = scaled(jg, 2.0 * al - 3.0);

  // rho1 = z H
  p.rho1.value = z * jh.value;
  p.rho1.dx = z * jh.dx;
  p.rho1.dy = z * jh.dy;
  p.rho1.dz = jh.value + z * jh.dz;
  p.rho1.dyy = z * jh.dyy;
  p.rho1.dzz = 2.0 * jh.dz + z * jh.dzz;

  // rho2 = z^2 R1 + x^{2 alpha} R2
  const FieldJet s2 = scaled(jr2, 2.0 * al);
  p.rho2.value = z * z * jr1.value + s2.value;
  p.rho2.dx = z * z * jr1.dx + s2.dx;
  p.rho2.dy = z * z * jr1.dy + s2.dy;
  p.rho2.dz = 2.0 * z * jr1.value + z * z * jr1.dz + s2.dz;
  p.rho2.dyy = z * z * jr1.dyy + s2.dyy;
  p.rho2.dzz = 2.0 * jr1.value + 4.0 * z * jr1.dz + z * z * jr1.dzz + s2.dzz;
  return p;
}

}  // namespace wakefar
