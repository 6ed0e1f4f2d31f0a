#pragma once

#include "oseen/boundary_space.hpp"
#include "oseen/fields.hpp"
#include "oseen/integral_equation.hpp"
#include "oseen/potentials.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace oseen {

/// Prescribed boundary velocity with its declared tail behaviour.
struct BoundaryData {
    std::optional<BoundaryTrace> trace;  ///< empty means b = 0
    double zeta = 1.0;                   ///< declared H-tail rate
    double delta = 0.0;                  ///< declared H-tail amplitude
};

struct ProblemSpec {
    double tau = 1.0;
    SourceField f;
    InitialField a;
    BoundaryData b;
    std::shared_ptr<const BoundaryMesh> mesh;
    double dt = 0.1;
    int slabs = 40;
    QuadOptions quad;
    VolterraOptions volterra;
    /// Largest per-sample flux of b that is accepted silently.
    double flux_tolerance = 1e-6;

    double horizon() const { return dt * slabs; }
    /// Every violated invariant, empty when the spec is usable.
    std::vector<std::string> check() const;
};

struct SolutionHandle {
    SurfaceDensity phi;
    SourceField f;
    InitialField a;
    double tau = 1.0;
    QuadOptions quad;
    DensitySolveReport report;
    double b_flux = 0.0;  ///< largest per-sample flux of the prescribed b
    std::shared_ptr<const SurfaceQuadrature> sq;
    double guard = 0.8;

    double t_max() const { return guard * phi.horizon(); }
};

/// Boundary traces of R(f) and I(a) at the collocation points of sys, slab-major.
Eigen::VectorXd potential_traces(const VolterraSystem& sys, const SourceField& f, const InitialField& a,
                                 const QuadOptions& quad, int threads = 1);

/// Form b~ = -R(f) - I(a) + b on the boundary and solve for the density. A prebuilt
/// system matching the spec may be passed to skip assembly.
SolutionHandle solve_ibvp(const ProblemSpec& spec, const VolterraSystem* prebuilt = nullptr);

/// u = R(f) + I(a) + V(phi) and its spatial derivatives. Throws for time derivatives,
/// points inside the obstacle and times past the guard band.
Vec3 eval_velocity(const SolutionHandle& h, const Point3& x, double t, const MultiIndex& d = MultiIndex::value(),
                   QuadDiagnostics* diag = nullptr);

/// density.txt + solution.json in dir.
void save_solution(const std::filesystem::path& dir, const SolutionHandle& h);
/// Rebuild a handle from a saved density and the data of spec.
SolutionHandle load_solution(const std::filesystem::path& dir, const ProblemSpec& spec);

}  // namespace oseen
