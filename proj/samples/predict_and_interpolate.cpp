// Predicts c from the MN curve, then interpolates sin(x)/x on [0, 5] with
// evenly spaced nodes at the predicted c and at c = 60.

#include <iostream>

#include "mnshape/mnshape.hpp"

int main() {
  using namespace mnshape;

  ProblemParams p;
  p.delta = 0.32;
  const PredictionResult pred = predict_c(p);
  std::cout << "predicted c = " << pred.c_star << " (" << to_string(pred.branch) << " branch, flat bottom "
            << pred.flat_bottom_width << " wide)\n";

  const PrecisionContext ctx(220);
  const Simplex domain = Simplex::interval(XReal(ctx, 0), XReal(ctx, 5));
  const NodeSet test = uniform_1d(0.0, 5.0, 150, ctx);

  for (double c : {pred.c_star, 60.0}) {
    const NodeSet nodes = barycentric_grid(domain, degree_from_delta(c, p));
    std::vector<XReal> values;
    for (const auto& x : nodes.points) values.push_back(sinc_target(x));
    const auto [s, report] = solve(assemble(nodes, values, KernelSpec{p.beta, c}, ctx), ctx);
    const XReal rms = rms_error([](const Point& z) { return sinc_target(z); }, s, test);
    std::cout << "c = " << c << ": N_d = " << nodes.size() << ", RMS = " << rms.sci(3)
              << ", COND = " << report.condition_number.sci(3) << '\n';
  }
}
