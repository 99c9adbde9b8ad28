#pragma once

// Eigenvalues, the sector stability test and the modal (Jordan, delta-scaled)
// form of a linear-plus-nonlinear system x' = A x + f(x).

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <optional>
#include <vector>

namespace ckstab::spectral {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Nonlinearity evaluated on complex states (real systems extend naturally).
using VectorFn = std::function<CVector(const CVector&)>;

/// Angular width of the "inconclusive" band around alpha*pi/2.
inline constexpr double kBoundaryTolerance = 1e-9;
/// Largest accepted condition number of the eigenvector matrix.
inline constexpr double kConditionCap = 1e8;

/// All eigenvalues with multiplicity (Hessenberg + shifted QR via Eigen).
/// Throws DomainError on an empty, non-square or non-finite matrix and
/// ConvergenceError if the QR iteration stalls.
std::vector<cplx> eigenvalues(const Matrix& a);

enum class Verdict { Stable, Unstable, Inconclusive };
const char* to_string(Verdict v);

struct SpectralReport {
    std::vector<cplx> eigenvalues;
    std::vector<double> args;
    double threshold = 0.0;  // alpha*pi/2
    double margin = 0.0;     // min |arg| - threshold
    bool stable = false;
    Verdict verdict = Verdict::Unstable;
};

/// Sector test |arg lambda| > alpha*pi/2 for every eigenvalue. Eigenvalues
/// within kBoundaryTolerance of the threshold make the verdict Inconclusive.
/// Throws OrderError unless 0 < alpha < 1.
SpectralReport sector_check(const Matrix& a, double alpha);

/// Exact Jordan data for matrices that are not (numerically) diagonalizable:
/// T^{-1} A T must be block diagonal with blocks lambda_i I + N of the given
/// sizes, in order.
struct JordanHint {
    CMatrix T;
    std::vector<int> block_sizes;
};

struct ModalBlock {
    cplx lambda;
    int size = 1;
    bool nilpotent = false;  // eta_i
};

/// The transformed system y' = diag(lambda_i) y + h(y) with x = T P y.
class ModalSystem {
public:
    ModalSystem(std::vector<ModalBlock> blocks, CMatrix t, Eigen::VectorXd p, double delta, VectorFn f);

    const std::vector<ModalBlock>& blocks() const { return blocks_; }
    const CMatrix& T() const { return t_; }
    const Eigen::VectorXd& P() const { return p_; }
    double delta() const { return delta_; }
    double cond_TP() const { return cond_tp_; }
    int dim() const { return static_cast<int>(p_.size()); }

    /// Diagonal entries lambda_i, repeated over each block.
    CVector diagonal() const;
    /// (TP)^{-1} (lambda_i I + N) (TP) blocks recombined: diag + delta N.
    CMatrix block_form() const;
    CMatrix TP() const;
    CMatrix TP_inverse() const { return tp_inv_; }

    /// h(y) = delta N y + (TP)^{-1} f(TP y); h(0) = 0.
    CVector h(const CVector& y) const;
    /// x = TP y and back.
    CVector to_physical(const CVector& y) const { return tp_ * y; }
    CVector to_modal(const CVector& x) const { return tp_inv_ * x; }

private:
    std::vector<ModalBlock> blocks_;
    CMatrix t_;
    Eigen::VectorXd p_;
    double delta_;
    VectorFn f_;
    CMatrix tp_;
    CMatrix tp_inv_;
    double cond_tp_ = 1.0;
};

/// Builds the modal system. Without a hint A must be diagonalizable with an
/// eigenvector matrix of condition <= kConditionCap (else
/// DefectiveMatrixError); eigenvectors are scaled to unit 2-norm with the
/// first nonzero component real positive. Throws DomainError if delta <= 0.
ModalSystem modal_transform(const Matrix& a, VectorFn f, double delta,
                            const std::optional<JordanHint>& hint = std::nullopt);

/// 2-norm condition number.
double condition_number(const CMatrix& m);

}  // namespace ckstab::spectral
