#pragma once

#include <vector>

#include "magicspin/dynamics.hpp"

namespace magicspin::detail {

/// Per-site field during a segment of the given kind, honouring NV gating.
std::vector<Vec3> segment_fields(const SpinNetwork& network, SegmentKind kind);

/// Per-site single-spin Hamiltonians (rad per Larmor period) for a segment kind.
std::vector<Mat2> local_hamiltonians(const SpinNetwork& network, SegmentKind kind);

/// exp(-i h t) for a traceless Hermitian 2x2 h.
Mat2 local_evolve(const Mat2& h, double t);

Matrix kron_all(const std::vector<Mat2>& factors);

void require_exact_size(const SpinNetwork& network);

}  // namespace magicspin::detail
