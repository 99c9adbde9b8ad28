#include "ckstab/spectral.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "ckstab/errors.hpp"
#include "ckstab/specfun.hpp"

namespace ckstab::spectral {

namespace {

constexpr double kHintTolerance = 1e-8;
constexpr double kZeroComponent = 1e-12;

void check_square(const Matrix& a) {
    if (a.rows() == 0 || a.rows() != a.cols()) {
        std::ostringstream os;
        os << "matrix must be square and non-empty, got " << a.rows() << "x" << a.cols();
        throw DomainError(os.str());
    }
    if (!a.allFinite()) throw DomainError("matrix entries must be finite");
}

// Superdiagonal ones inside each Jordan block.
CMatrix nilpotent_part(const std::vector<ModalBlock>& blocks, int d) {
    CMatrix n = CMatrix::Zero(d, d);
    int offset = 0;
    for (const auto& b : blocks) {
        for (int k = 0; k + 1 < b.size; ++k) n(offset + k, offset + k + 1) = 1.0;
        offset += b.size;
    }
    return n;
}

std::vector<ModalBlock> blocks_from_hint(const Matrix& a, const JordanHint& hint) {
    const int d = static_cast<int>(a.rows());
    if (hint.T.rows() != d || hint.T.cols() != d) throw ConfigError("jordan hint: T has the wrong shape");
    int total = 0;
    for (int s : hint.block_sizes) {
        if (s < 1) throw ConfigError("jordan hint: block sizes must be positive");
        total += s;
    }
    if (total != d) throw ConfigError("jordan hint: block sizes must add up to the dimension");
    Eigen::FullPivLU<CMatrix> lu(hint.T);
    if (!lu.isInvertible()) throw ConfigError("jordan hint: T is singular");
    const CMatrix j = lu.solve(a.cast<cplx>() * hint.T);

    std::vector<ModalBlock> blocks;
    int offset = 0;
    for (int s : hint.block_sizes) {
        cplx lambda = 0.0;
        for (int k = 0; k < s; ++k) lambda += j(offset + k, offset + k);
        lambda /= static_cast<double>(s);
        blocks.push_back({lambda, s, s > 1});
        offset += s;
    }
    CMatrix expected = nilpotent_part(blocks, d);
    offset = 0;
    for (const auto& b : blocks) {
        for (int k = 0; k < b.size; ++k) expected(offset + k, offset + k) = b.lambda;
        offset += b.size;
    }
    const double scale = std::max(1.0, a.norm());
    if ((j - expected).norm() > kHintTolerance * scale) {
        std::ostringstream os;
        os << "jordan hint: T^{-1} A T deviates from the stated Jordan form by " << (j - expected).norm();
        throw ConfigError(os.str());
    }
    return blocks;
}

}  // namespace

double condition_number(const CMatrix& m) {
    Eigen::JacobiSVD<CMatrix> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0) return 1.0;
    const double smallest = s(s.size() - 1);
    return smallest > 0.0 ? s(0) / smallest : std::numeric_limits<double>::infinity();
}

std::vector<cplx> eigenvalues(const Matrix& a) {
    check_square(a);
    Eigen::EigenSolver<Matrix> solver(a, false);
    if (solver.info() != Eigen::Success) throw ConvergenceError("eigenvalues: QR iteration did not converge", 0.0);
    const auto ev = solver.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Stable: return "stable";
        case Verdict::Unstable: return "unstable";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

SpectralReport sector_check(const Matrix& a, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        std::ostringstream os;
        os << "sector_check: alpha must lie in (0, 1), got " << alpha;
        throw OrderError(os.str());
    }
    SpectralReport report;
    report.eigenvalues = eigenvalues(a);
    report.threshold = alpha * std::numbers::pi / 2.0;
    report.margin = std::numeric_limits<double>::infinity();
    for (const cplx& l : report.eigenvalues) {
        const double arg = specfun::principal_arg(l);
        report.args.push_back(arg);
        // arg(0) is undefined; zero sits on every sector boundary.
        const double margin = std::abs(l) == 0.0 ? -report.threshold : std::fabs(arg) - report.threshold;
        report.margin = std::min(report.margin, margin);
    }
    if (std::fabs(report.margin) <= kBoundaryTolerance) {
        report.verdict = Verdict::Inconclusive;
    } else {
        report.verdict = report.margin > 0.0 ? Verdict::Stable : Verdict::Unstable;
    }
    report.stable = report.verdict == Verdict::Stable;
    return report;
}

ModalSystem::ModalSystem(std::vector<ModalBlock> blocks, CMatrix t, Eigen::VectorXd p, double delta, VectorFn f)
    : blocks_(std::move(blocks)), t_(std::move(t)), p_(std::move(p)), delta_(delta), f_(std::move(f)) {
    tp_ = t_ * p_.cast<cplx>().asDiagonal();
    tp_inv_ = tp_.inverse();
    cond_tp_ = condition_number(tp_);
}

CVector ModalSystem::diagonal() const {
    CVector d(dim());
    int offset = 0;
    for (const auto& b : blocks_) {
        for (int k = 0; k < b.size; ++k) d(offset + k) = b.lambda;
        offset += b.size;
    }
    return d;
}

CMatrix ModalSystem::block_form() const {
    CMatrix j = delta_ * nilpotent_part(blocks_, dim());
    j.diagonal() += diagonal();
    return j;
}

CMatrix ModalSystem::TP() const { return tp_; }

CVector ModalSystem::h(const CVector& y) const {
    CVector out = delta_ * (nilpotent_part(blocks_, dim()) * y);
    if (f_) out += tp_inv_ * f_(tp_ * y);
    return out;
}

ModalSystem modal_transform(const Matrix& a, VectorFn f, double delta, const std::optional<JordanHint>& hint) {
    check_square(a);
    if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("modal_transform: delta must be positive");
    const int d = static_cast<int>(a.rows());

    std::vector<ModalBlock> blocks;
    CMatrix t;
    if (hint) {
        blocks = blocks_from_hint(a, *hint);
        t = hint->T;
    } else {
        Eigen::EigenSolver<Matrix> solver(a, true);
        if (solver.info() != Eigen::Success) throw ConvergenceError("modal_transform: QR iteration did not converge", 0.0);
        t = solver.eigenvectors();
        for (int j = 0; j < d; ++j) {
            auto col = t.col(j);
            col.normalize();
            for (int i = 0; i < d; ++i) {
                if (std::abs(col(i)) > kZeroComponent) {
                    col *= std::conj(col(i)) / std::abs(col(i));
                    col(i) = std::abs(col(i));
                    break;
                }
            }
            blocks.push_back({solver.eigenvalues()(j), 1, false});
        }
        const double cond = condition_number(t);
        if (!(cond <= kConditionCap)) {
            std::ostringstream os;
            os << "modal_transform: eigenvector matrix has condition " << cond
               << " (cap " << kConditionCap << "); the matrix is defective or nearly so, supply a Jordan hint";
            throw DefectiveMatrixError(os.str());
        }
    }

    Eigen::VectorXd p(d);
    int offset = 0;
    for (const auto& b : blocks) {
        double scale = 1.0;
        for (int k = 0; k < b.size; ++k) {
            p(offset + k) = scale;
            scale *= delta;
        }
        offset += b.size;
    }
    return ModalSystem(std::move(blocks), std::move(t), std::move(p), delta, std::move(f));
}

}  // namespace ckstab::spectral
