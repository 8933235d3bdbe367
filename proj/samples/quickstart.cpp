// Build the n = 5 model with f(t) = cos(2 pi t) and A = diag(1, 1, -2), then look at
// its symmetry algebra, one solution of the Hill system, and the holonomy of one
// deck transformation.

#include <iostream>

#include "ppwave/ppwave.hpp"

int main() {
  using namespace ppwave;

  const FourierSeries f(1.0, 0.0, {{1.0, 0.0}});
  Mat A = Mat::Zero(3, 3);
  A.diagonal() << 1.0, 1.0, -2.0;
  const ModelSpec model = build_model(5, f, A, ModelMode::strict);

  const DimensionReport dims = isom0_dimension(model);
  std::cout << "dim s = " << dims.dim_s << ", dim isom0 = " << dims.dim_isom0 << "\n";

  const SkewBasis s = centralizer_basis(model.A());
  std::cout << "rotation generator F =\n" << s.elements.front() << "\n";

  const HillSpacePtr space = make_hill_space(model);
  const HillSolution u(space, Vec::Unit(3, 0), Vec::Zero(3));
  const auto [q, dq] = u.eval(2.5);
  std::cout << "u(2.5) = " << q.transpose() << ", u'(2.5) = " << dq.transpose() << "\n";

  Vec u0(3), w0(3);
  u0 << 0.3, -0.2, 0.1;
  w0 << 0.5, 0.0, 0.0;
  const GroupElement sigma{0, 0.7, HillSolution(space, u0, w0)};
  std::cout << "holonomy of sigma (frame S, E1, E2, E3, T):\n" << quotient_transport(sigma).matrix << "\n";

  const CurvatureBundle cb = curvature_at(model, Point{0.4, 0.0, Vec::Constant(3, 0.5)});
  std::cout << "max |W| = " << cb.weyl.max_abs() << ", scalar curvature = " << cb.scalar << "\n";
  return 0;
}
