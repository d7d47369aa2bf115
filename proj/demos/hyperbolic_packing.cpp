// Runs the flow on a degree-7 ball from u = -3 and draws the limiting
// packing in the Poincare disk.
//
//   hyperbolic_packing [radius] [out.svg]

#include <cmath>
#include <cstdlib>
#include <iostream>

#include "crflab/crflab.hpp"

int main(int argc, char** argv) {
    using namespace crflab;
    const int radius = argc > 1 ? std::atoi(argv[1]) : 4;
    const std::string path = argc > 2 ? argv[2] : "degree7.svg";

    auto t = std::make_shared<const Triangulation>(build_constant_degree(7, radius));
    FlowProblem p;
    p.truncation = truncate(t, radius);
    p.metric0 = constant_metric(*t, Geometry::hyperbolic, -3.0);
    p.t_max = 60.0;
    p.tolerance = 1e-9;

    const Trajectory traj = solve_finite(p);
    std::cout << "flow " << to_string(traj.status) << " at t = " << traj.samples.back().t
              << ", sup |K| = " << traj.final_residual << '\n';
    for (const auto& s : traj.samples)
        if (std::fmod(s.t, 2.0) == 0.0) std::cout << "  t = " << s.t << "  u(root) = " << s.u.front() << '\n';

    const Embedding e = embed(p.truncation, metric_at(p, traj, traj.final_sample()));
    std::cout << e.vertices.size() << " circles, holonomy residual " << e.holonomy_residual << '\n';
    write_svg(e, path, {true, true, 400.0});
    std::cout << "wrote " << path << '\n';
}
