#pragma once

#include "oseen/geometry.hpp"
#include "oseen/potentials.hpp"
#include "oseen/types.hpp"

#include <Eigen/SparseCholesky>

#include <memory>
#include <string>
#include <vector>

namespace oseen {

/// Vector field sampled on mesh nodes at increasing times. dvalues (time derivative)
/// and grads (ambient gradient, grads(i,j) = d_j Psi_i) are optional.
struct BoundaryTrace {
    std::shared_ptr<const BoundaryMesh> mesh;
    std::vector<double> times;
    std::vector<std::vector<Vec3>> values;
    std::vector<std::vector<Vec3>> dvalues;
    std::vector<std::vector<Mat3>> grads;
    std::string provenance;

    static BoundaryTrace zeros(std::shared_ptr<const BoundaryMesh> mesh, std::vector<double> times);

    std::size_t nodes() const { return mesh ? mesh->size() : 0; }
    bool has_dt() const { return !dvalues.empty(); }
    bool has_grad() const { return !grads.empty(); }
    /// Throws on non-increasing times or shape mismatches.
    void validate() const;
    /// Linear interpolation in time; constant before the first sample.
    Vec3 value_at(int node, double t) const;
    std::vector<Vec3> slice(double t) const;
    std::vector<Vec3> dslice(double t) const;
    std::vector<Mat3> grad_slice(double t) const;
};

/// H'(t) for H(t) = int_0^t (t-r)^{-1/2} phi(r) dr via the split formula at T,
/// product integration with exact moments against piecewise-linear phi and phi'.
/// phi is held at its first sample before times[0].
double abel_derivative(const std::vector<double>& times, const std::vector<double>& phi,
                       const std::vector<double>& dphi, double T, double t);

/// Fractional half derivative H'(t) / Gamma(1/2) per node; needs trace.dvalues on (T, t).
std::vector<Vec3> half_derivative(const BoundaryTrace& trace, double T, double t);

/// Node-averaged P1 surface gradients, projected to the tangent plane.
std::vector<Mat3> fem_tangential_gradient(const BoundaryMesh& mesh, const std::vector<Vec3>& values);

/// (||v||^2 + ||grad_tan v||^2)^{1/2} by node quadrature. With ambient gradients the
/// normal component is removed; otherwise the P1 surface gradient is used.
double h1_boundary_norm(const BoundaryMesh& mesh, const std::vector<Vec3>& values,
                        const std::vector<Mat3>* ambient_grads = nullptr);
double h1_boundary_norm(const BoundaryMesh& mesh, const std::vector<double>& values,
                        const std::vector<Vec3>* ambient_grads = nullptr);

/// Discrete Riesz map of H1(boundary) with lumped mass M = diag(w) and the
/// cotangent stiffness S of the flat triangulation.
class RieszMap {
public:
    explicit RieszMap(std::shared_ptr<const BoundaryMesh> mesh);

    /// (M + S)^{-1} g
    Eigen::VectorXd apply(const Eigen::VectorXd& g) const;
    /// sqrt(g^T (M + S)^{-1} g); vector loads are summed over components.
    double dual_norm(const Eigen::VectorXd& g) const;
    double dual_norm(const std::vector<Vec3>& g) const;
    /// sqrt(v^T (M + S) v): the H1 norm on the discrete space.
    double discrete_h1_norm(const Eigen::VectorXd& v) const;
    /// Gershgorin estimate of cond(M + S).
    double condition_estimate() const { return cond_; }
    const Eigen::SparseMatrix<double>& matrix() const { return A_; }

    /// Shared instance per mesh, factorized once.
    static std::shared_ptr<const RieszMap> for_mesh(std::shared_ptr<const BoundaryMesh> mesh);

private:
    std::shared_ptr<const BoundaryMesh> mesh_;
    Eigen::SparseMatrix<double> A_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
    double cond_ = 1.0;
};

/// Dual norm of the functional V -> int w . V, i.e. load g_i = weight_i * w_i.
double h1_dual_norm(std::shared_ptr<const BoundaryMesh> mesh, const std::vector<Vec3>& density);
/// Dual norm of a scalar load vector given directly as node weights.
double h1_dual_norm(std::shared_ptr<const BoundaryMesh> mesh, const Eigen::VectorXd& load);

struct TailOptions {
    /// The trace is continuously differentiable for t > smooth_after.
    double smooth_after = 0.0;
    /// Fraction of the last samples used for the power-law tail fit.
    double fit_fraction = 0.3;
};

struct HTailNorm {
    double T = 0.0;
    double T_max = 0.0;
    double total = 0.0;
    double h1_part = 0.0;
    double half_derivative_part = 0.0;
    double normal_dt_dual_part = 0.0;
    double tail_fraction = 0.0;  ///< share of total^2 added by the extrapolated tail
    double fit_power = 0.0;      ///< integrand ~ t^-fit_power
    bool decaying = true;        ///< false when the integrand has no decaying power fit
};

/// Squared tail norm = int_T^inf ||Psi||_{H1}^2 + ||d4 W||_2^2 + ||n . dt Psi||_{H1'}^2 dt,
/// W = int_0^t (t-r)^{-1/2} Psi dr. Trapezoid rule on the trace times beyond T
/// plus an analytic power-law tail.
HTailNorm h_tail_norm(const BoundaryTrace& trace, double T, const TailOptions& opts = {});

/// Subtract (flux / area) n per slab; returns the L2 size of what was removed.
double project_zero_flux_inplace(SurfaceDensity& density);
SurfaceDensity project_zero_flux(const SurfaceDensity& density);
/// Same per time sample of a trace; returns the largest per-sample L2 size removed.
double project_zero_flux_inplace(BoundaryTrace& trace);
/// Flux of a nodal field.
double nodal_flux(const BoundaryMesh& mesh, const std::vector<Vec3>& values);

}  // namespace oseen
