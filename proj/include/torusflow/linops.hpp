#ifndef TORUSFLOW_LINOPS_HPP
#define TORUSFLOW_LINOPS_HPP

#include <span>
#include <vector>

#include "torusflow/grid.hpp"

namespace torusflow {

/// Which linearization to apply.
///   L: second variation of E at w*, -laplacian - u*  (full space)
///   B: second variation of J at v*, -laplacian - u* + (1/lambda)(., u*) u*,
///      restricted to the zero-mean subspace by pre/post projection
///   M: -laplacian - u*, used with the u*-orthogonality constraint
enum class OperatorKind { L, B, M };

struct LinearOperatorSpec {
    OperatorKind kind = OperatorKind::L;
    Field u_star;  // positive base density e^{w*}
    double lambda = 0.0;
};

Field apply(const LinearOperatorSpec& spec, const Field& phi);

enum class EigsMethod { automatic, dense, lanczos };

struct SpectrumOptions {
    EigsMethod method = EigsMethod::automatic;
    double residual_tol = 1e-9;  // iterative path convergence test
    int max_subspace = 400;      // Lanczos basis cap
};

struct SpectrumReport {
    std::vector<double> eigenvalues;  // ascending, k lowest
    std::vector<Field> eigenfields;   // L2-orthonormal
    int kernel_dim = 0;
    std::vector<Field> kernel_basis;  // orthonormal
    bool nondegenerate = true;
    double smallest_abs_eigenvalue = 0.0;
    double kernel_threshold = 0.0;
};

/// k lowest eigenpairs. Dense assembly up to 64x64 grids, shift-inverted
/// Lanczos with the spectral apply beyond (or on request).
SpectrumReport spectrum(const LinearOperatorSpec& spec, int k,
                        const SpectrumOptions& opts = {});

struct NondegeneracyReport {
    bool nondegenerate = true;
    int kernel_dim = 0;
    double smallest_abs_eigenvalue = 0.0;
    std::vector<Field> kernel_basis;
    /// Witnesses psi = phi - (1/lambda) int u* phi for each kernel element,
    /// solving -laplacian(psi) = u* psi with int psi u* = 0.
    std::vector<Field> witnesses;
    double max_witness_residual = 0.0;
    double max_witness_mass_orthogonality = 0.0;
};

NondegeneracyReport nondegeneracy_check(const Field& u_star, double lambda,
                                        const SpectrumOptions& opts = {});

/// Orthogonal L2 projection onto span(basis); basis must be orthonormal.
Field projector_P(std::span<const Field> basis, const Field& f);

/// Best constant in ||phi||_V <= C ||M phi||_{V*} over the u*-orthogonal
/// subspace, estimated from the eigenbasis of M plus random samples.
/// Throws DegenerateState when the estimate exceeds 1e8.
double m_coercivity_constant(const Field& u_star, double lambda,
                             int samples = 16, unsigned seed = 1234);

}  // namespace torusflow

#endif
