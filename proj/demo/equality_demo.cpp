// Builds one forward triangle on the normal chart of the tanh-Gauss surface
// and compares it with its comparison triangle on the same surface.

#include <cstdio>

#include "ftct/ftct.hpp"

int main() {
  using namespace ftct;
  auto S = build_profile(tanh_gauss_spec(), 3.0);
  auto chart = normal_chart(S, 2.0);
  auto T = make_forward_triangle(chart, polar_to_normal(0.8, 0.2), polar_to_normal(1.1, 1.0));
  auto H = check_hypotheses(chart, T, S);
  auto r = verify_tct(chart, T, S, &H);
  std::printf("sides  d(p,x)=%.12f d(p,y)=%.12f d(x,y)=%.12f\n", r.d_px, r.d_py, r.d_xy);
  std::printf("angle at x: %.12f  model %.12f\n", r.angle_x, r.model_angle_x);
  std::printf("angle at y: %.12f  model %.12f\n", r.angle_y, r.model_angle_y);
  std::printf("status: %s\n", to_string(r.status).c_str());
  return r.status == TctStatus::Pass ? 0 : 1;
}
