#include "wakefar/system.hpp"

namespace wakefar {

SimilarityState unpack_state(double tau, const Vec& y) {
  SimilarityState s;
  s.tau = tau;
  s.e_val = y[0];
  s.de = y[1];
  s.g_val = y[2];
  s.dg = y[3];
  if (y.size() >= kFullDim) {
    s.h_val = y[4];
    s.dh = y[5];
    s.r1_val = y[6];
    s.dr1 = y[7];
    s.r2_val = y[8];
    s.dr2 = y[9];
  }
  return s;
}

Vec pack_state(const SimilarityState& s, int dim) {
  Vec y(dim);
  y[0] = s.e_val;
  y[1] = s.de;
  y[2] = s.g_val;
  y[3] = s.dg;
  if (dim >= kFullDim) {
    y[4] = s.h_val;
    y[5] = s.dh;
    y[6] = s.r1_val;
    y[7] = s.dr1;
    y[8] = s.r2_val;
    y[9] = s.dr2;
  }
  return y;
}

RhsFn similarity_rhs(const ModelConstants& k, int dim, SinkForm form) {
  return [k, dim, form](double tau, const Vec& y, Vec& dy) {
    const SimilarityState s = unpack_state(tau, y);
    const SecondDerivs d = ode_rhs(s, k, form);
    dy.resize(dim);
    dy[0] = s.de;
    dy[1] = d.d2e;
    dy[2] = s.dg;
    dy[3] = d.d2g;
    if (dim >= kFullDim) {
      dy[4] = s.dh;
      dy[5] = d.d2h;
      dy[6] = s.dr1;
      dy[7] = d.d2r1;
      dy[8] = s.dr2;
      dy[9] = d.d2r2;
    }
  };
}

}  // namespace wakefar
