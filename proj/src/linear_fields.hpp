#pragma once

#include "wakefar/bvp.hpp"

namespace wakefar::detail {

inline double& field(SimilarityState& s, LinearTarget t) {
  switch (t) {
    case LinearTarget::h: return s.h_val;
    case LinearTarget::r1: return s.r1_val;
    default: return s.r2_val;
  }
}
inline double& slope(SimilarityState& s, LinearTarget t) {
  switch (t) {
    case LinearTarget::h: return s.dh;
    case LinearTarget::r1: return s.dr1;
    default: return s.dr2;
  }
}
inline double curvature(const SecondDerivs& d, LinearTarget t) {
  switch (t) {
    case LinearTarget::h: return d.d2h;
    case LinearTarget::r1: return d.d2r1;
    default: return d.d2r2;
  }
}
// Coefficient c of the -c y'/tau term (axis regularity).
inline double axis_order(LinearTarget t) {
  switch (t) {
    case LinearTarget::h: return 3.0;
    case LinearTarget::r1: return 5.0;
    default: return 1.0;
  }
}

}  // namespace wakefar::detail
