#pragma once

#include "oseen/boundary_space.hpp"
#include "oseen/fit.hpp"
#include "oseen/geometry.hpp"
#include "oseen/potentials.hpp"
#include "oseen/surface_quadrature.hpp"

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace oseen {

struct VolterraOptions {
    /// Collocation at t = (m + collocation) dt inside slab m; 1 is the slab end.
    double collocation = 1.0;
    /// Optional diagonal shift of the instantaneous block; off by default.
    double tikhonov = 0.0;
    int threads = 1;
    /// Called after each assembled lag with (lag, total lags).
    std::function<void(int, int)> progress;
};

/// Discrete single-layer operator on boundary nodes x time slabs. The operator is
/// Toeplitz in time: block(L) maps slab k to the collocation point of slab k + L.
/// Unknowns and boundary values are ordered 3 i + component.
class VolterraSystem {
public:
    static VolterraSystem assemble(std::shared_ptr<const BoundaryMesh> mesh, double dt, int slabs, double tau,
                                   const VolterraOptions& opts = {});

    std::shared_ptr<const BoundaryMesh> mesh() const { return sq_->mesh_ptr(); }
    const SurfaceQuadrature& quadrature() const { return *sq_; }
    double dt() const { return dt_; }
    int slabs() const { return slabs_; }
    double tau() const { return tau_; }
    double collocation() const { return opts_.collocation; }
    double collocation_time(int m) const { return (m + opts_.collocation) * dt_; }
    std::size_t unknowns() const { return 3 * mesh()->size(); }

    /// Lag 0 in double precision; later lags are stored in single precision.
    const Eigen::MatrixXd& instantaneous_block() const { return b0_; }
    Eigen::MatrixXd block(int lag) const;
    /// Condition estimate of the bordered instantaneous block.
    double diagonal_condition() const { return cond_; }
    bool ill_conditioned() const { return cond_ > 1e10; }

    /// Boundary values at the collocation times, slab-major (size slabs * 3N).
    Eigen::VectorXd apply(const SurfaceDensity& phi) const;

    /// Forward substitution with one flux multiplier per slab; rhs is slab-major.
    Eigen::VectorXd solve_stacked(const Eigen::VectorXd& rhs, std::vector<double>* multipliers = nullptr) const;

private:
    std::shared_ptr<const SurfaceQuadrature> sq_;
    double dt_ = 0.0, tau_ = 0.0;
    int slabs_ = 0;
    VolterraOptions opts_;
    Eigen::MatrixXd b0_;
    std::vector<Eigen::MatrixXf> blocks_;  // lag 1..slabs-1 at index lag-1
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
    double border_scale_ = 1.0;
    double cond_ = 1.0;
};

struct DensitySolveReport {
    double residual = 0.0;            ///< ||V(phi) - b|| / ||b|| at the collocation points
    double rhs_flux_removed = 0.0;    ///< largest per-slab L2 size of the removed incompatible part
    std::vector<double> flux_violation;  ///< per slab |int n . phi|
    std::vector<double> multipliers;
    double diagonal_condition = 0.0;
    std::string to_json() const;
};

/// Sample a boundary trace at the collocation times, slab-major.
Eigen::VectorXd collocation_rhs(const VolterraSystem& sys, const BoundaryTrace& b);
Eigen::VectorXd collocation_rhs(const VolterraSystem& sys, const std::function<Vec3(int node, double t)>& b);

/// Solve V(phi) = b at the collocation points. The flux-incompatible part of b is
/// projected out per slab and its size reported.
SurfaceDensity solve_density(const VolterraSystem& sys, const BoundaryTrace& b, DensitySolveReport* rep = nullptr);
SurfaceDensity solve_density(const VolterraSystem& sys, Eigen::VectorXd rhs, DensitySolveReport* rep = nullptr);

/// On-surface single-layer values at arbitrary times, slab blocks assembled one
/// time difference at a time (time-major output, size times * 3N). Used for reference
/// data on grids finer than the system being tested.
Eigen::VectorXd single_layer_trace(const SurfaceQuadrature& sq, const SurfaceDensity& phi,
                                   const std::vector<double>& times, double tau, int threads = 1);

struct TraceConsistency {
    std::vector<double> offsets;
    std::vector<double> mismatch;  ///< relative L2 mismatch at each offset
    double extrapolated_mismatch = 0.0;
    std::vector<int> nodes;
};

/// Compare V(phi)(x_i + offset n_i, t) with the on-surface value at the listed nodes
/// (all nodes when empty), extrapolating polynomially in the offset to 0.
TraceConsistency trace_consistency(const SurfaceQuadrature& sq, const SurfaceDensity& phi,
                                   const std::vector<double>& offsets, double t, double tau,
                                   const std::vector<int>& nodes = {});

/// ||phi on boundary x (T, (1 - guard) horizon)|| for each T and the log-log slope
/// against 1 + T. A zero density yields a rejected fit noted as the zero case.
DecayFit density_tail_fit(const SurfaceDensity& phi, const std::vector<double>& T_list, double zeta,
                          double guard = 0.2, double tolerance = 0.2, std::vector<double>* norms = nullptr);

/// Tabular checkpoint: header line, then "slab node phi1 phi2 phi3" per line.
void write_density(std::ostream& os, const SurfaceDensity& phi);
SurfaceDensity read_density(std::istream& is, std::shared_ptr<const BoundaryMesh> mesh);

}  // namespace oseen
