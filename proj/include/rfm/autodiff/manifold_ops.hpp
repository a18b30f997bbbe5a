#pragma once

// Differentiable counterparts of the manifold maps. Every operand holds one
// point (or tangent vector) per row; `c` is the effective curvature.

#include "rfm/autodiff/tape.hpp"

namespace rfm::ad {

/// Conformal factor per row, R x 1.
Var conformal_factor(Var x, double c);

Var expmap0(Var v, double c);
Var logmap0(Var y, double c);

Var mobius_add(Var x, Var y, double c);
Var gyration(Var u, Var v, Var w, double c);

Var expmap(Var x, Var v, double c);
Var logmap(Var x, Var y, double c);

/// Geodesic point Exp_x(t Log_x(y)); `t` is R x 1.
Var geodesic(Var x, Var y, Var t, double c);

/// Parallel transport of v (based at x) to y.
Var transport(Var x, Var y, Var v, double c);

/// Exp_0(Log_0(h) W^T) with W of shape out x in.
Var mobius_matvec(Var weight, Var h, double c);

}  // namespace rfm::ad
