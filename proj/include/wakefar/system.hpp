#pragma once

#include "wakefar/integrator.hpp"
#include "wakefar/model.hpp"

namespace wakefar {

/// First-order packing of the similarity ODEs. The (E, G) subsystem uses the
/// first four slots; the full system appends H, R1, R2 and their slopes.
///   y = [E, E', G, G', H, H', R1, R1', R2, R2']
inline constexpr int kEgDim = 4;
inline constexpr int kFullDim = 10;

SimilarityState unpack_state(double tau, const Vec& y);
Vec pack_state(const SimilarityState& s, int dim);

/// dy/dtau for the packed system (dim 4 or 10).
RhsFn similarity_rhs(const ModelConstants& k, int dim,
                     SinkForm form = SinkForm::corrected);

}  // namespace wakefar
