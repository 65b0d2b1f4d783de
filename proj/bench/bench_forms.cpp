// Times the residual kernels (serial and parallel), the reference kernels and
// the hybrid solve on a periodic Taylor-Green state.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <memory>

#include <Eigen/SparseCholesky>

#include "dgflow/forms.hpp"
#include "dgflow/problems.hpp"
#include "dgflow/solver.hpp"

using namespace dgflow;

namespace {

double seconds_per_call(const std::function<void()>& f, int reps) {
  f();  // warm caches and tables
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 32;
  const int k = argc > 2 ? std::atoi(argv[2]) : 3;
  const int reps = argc > 3 ? std::atoi(argv[3]) : 20;

  SquareMeshSpec spec;
  spec.nx = spec.ny = n;
  spec.x1 = spec.y1 = 2 * M_PI;
  spec.periodic_x = spec.periodic_y = true;
  spec.jitter = 0.15;
  auto sp = std::make_shared<const Space>(generate_square(spec), k);
  ProblemData data;
  data.nu = 0.01;

  const auto t0 = std::chrono::steady_clock::now();
  const HybridSystem sys(sp, data);
  const double build = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const StateVector u = project_initial(taylor_green(0.01).initial, sys);
  const Eigen::VectorXd F = apply_mass(*sp, u.coeffs);

  std::printf("mesh %dx%d, %d elements, degree %d, %d dofs, %ld multipliers\n", n, n, sp->num_elements(), k,
              sp->num_dofs(), static_cast<long>(sys.condensed().rows()));
  std::printf("%-28s %10.3f ms\n", "hybrid build", 1e3 * build);
  std::printf("%-28s %10.3f ms\n", "convection (parallel)",
              1e3 * seconds_per_call([&] { apply_convection(u, data, 0, Exec::Parallel); }, reps));
  std::printf("%-28s %10.3f ms\n", "convection (serial)",
              1e3 * seconds_per_call([&] { apply_convection(u, data, 0, Exec::Serial); }, reps));
  std::printf("%-28s %10.3f ms\n", "convection (reference)",
              1e3 * seconds_per_call([&] { reference::apply_convection(u, data, 0); }, 1));
  std::printf("%-28s %10.3f ms\n", "viscous (parallel)",
              1e3 * seconds_per_call([&] { apply_viscous(u, data, 0, Exec::Parallel); }, reps));
  std::printf("%-28s %10.3f ms\n", "viscous (serial)",
              1e3 * seconds_per_call([&] { apply_viscous(u, data, 0, Exec::Serial); }, reps));
  std::printf("%-28s %10.3f ms\n", "viscous (reference)",
              1e3 * seconds_per_call([&] { reference::apply_viscous(u, data, 0); }, 1));
  std::printf("%-28s %10.3f ms\n", "hybrid solve", 1e3 * seconds_per_call([&] { sys.solve(F, 0, 1.0); }, reps));
  {
    // back-substitution alone, to separate it from the local elimination work
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(sys.condensed());
    const Eigen::VectorXd b = Eigen::VectorXd::Ones(sys.condensed().rows());
    std::printf("%-28s %10.3f ms  (factor nnz %ld)\n", "condensed back-substitution",
                1e3 * seconds_per_call([&] { Eigen::VectorXd x = llt.solve(b); (void)x; }, reps), static_cast<long>(llt.matrixL().nestedExpression().nonZeros()));
  }
  return 0;
}
