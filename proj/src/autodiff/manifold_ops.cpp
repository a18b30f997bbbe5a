#include "rfm/autodiff/manifold_ops.hpp"

namespace rfm::ad {

namespace {

Var ones_like_rows(Var x, double fill) { return x.tape()->constant(Matrix(x.rows(), 1, fill)); }

}  // namespace

Var conformal_factor(Var x, double c) {
  if (c == 0.0) return ones_like_rows(x, 2.0);
  Var den = add_scalar(scale(row_dot(x, x), c), 1.0);
  return div(ones_like_rows(x, 2.0), den);
}

Var expmap0(Var v, double c) {
  if (c == 0.0) return v;
  return project_ball(mul(v, tan_c_over_x(l2_norm(v), c)), c);
}

Var logmap0(Var y, double c) {
  if (c == 0.0) return y;
  Var p = project_ball(y, c);
  return mul(p, artan_c_over_x(l2_norm(p), c));
}

Var mobius_add(Var x, Var y, double c) {
  if (c == 0.0) return add(x, y);
  Var x2 = row_dot(x, x);
  Var y2 = row_dot(y, y);
  Var xy = row_dot(x, y);
  Var a = add_scalar(add(scale(xy, -2.0 * c), scale(y2, -c)), 1.0);
  Var b = add_scalar(scale(x2, c), 1.0);
  Var den = add_scalar(add(scale(xy, -2.0 * c), scale(mul(x2, y2), c * c)), 1.0);
  return project_ball(div(add(mul(x, a), mul(y, b)), den), c);
}

Var gyration(Var u, Var v, Var w, double c) {
  if (c == 0.0) return w;
  Var u2 = row_dot(u, u);
  Var v2 = row_dot(v, v);
  Var uv = row_dot(u, v);
  Var uw = row_dot(u, w);
  Var vw = row_dot(v, w);
  const double c2 = c * c;
  Var a = add(add(scale(mul(uw, v2), -c2), scale(vw, -c)), scale(mul(uv, vw), 2.0 * c2));
  Var b = add(scale(mul(vw, u2), -c2), scale(uw, c));
  Var d = add_scalar(add(scale(uv, -2.0 * c), scale(mul(u2, v2), c2)), 1.0);
  Var corr = div(add(mul(u, a), mul(v, b)), d);
  return add(w, scale(corr, 2.0));
}

Var expmap(Var x, Var v, double c) {
  if (c == 0.0) return add(x, v);
  Var half_lam = scale(conformal_factor(x, c), 0.5);
  Var arg = mul(half_lam, l2_norm(v));
  Var step = project_ball(mul(v, mul(tan_c_over_x(arg, c), half_lam)), c);
  return mobius_add(x, step, c);
}

Var logmap(Var x, Var y, double c) {
  if (c == 0.0) return sub(y, x);
  Var xp = project_ball(x, c);
  Var yp = project_ball(y, c);
  Var w = mobius_add(neg(xp), yp, c);
  Var inv_half_lam = div(ones_like_rows(xp, 1.0), scale(conformal_factor(xp, c), 0.5));
  return mul(w, mul(artan_c_over_x(l2_norm(w), c), inv_half_lam));
}

Var geodesic(Var x, Var y, Var t, double c) { return expmap(x, mul(logmap(x, y, c), t), c); }

Var transport(Var x, Var y, Var v, double c) {
  if (c == 0.0) return v;
  Var g = gyration(y, neg(x), v, c);
  return mul(g, div(conformal_factor(x, c), conformal_factor(y, c)));
}

Var mobius_matvec(Var weight, Var h, double c) {
  return expmap0(matmul(logmap0(h, c), transpose(weight)), c);
}

}  // namespace rfm::ad
