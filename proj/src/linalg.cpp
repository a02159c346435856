#include "lcklab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace lcklab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotContraction: return "NotContraction";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::BranchAmbiguity: return "BranchAmbiguity";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::DegenerateW: return "DegenerateW";
    case ErrorCode::NotOnShell: return "NotOnShell";
    case ErrorCode::DegenerateGradient: return "DegenerateGradient";
    case ErrorCode::Inadmissible: return "Inadmissible";
    case ErrorCode::NoBracket: return "NoBracket";
    case ErrorCode::MaxIterations: return "MaxIterations";
    case ErrorCode::DegenerateCrossing: return "DegenerateCrossing";
    case ErrorCode::StepUnderflow: return "StepUnderflow";
    case ErrorCode::BracketNotPsh: return "BracketNotPsh";
    case ErrorCode::DimensionUnsupported: return "DimensionUnsupported";
    case ErrorCode::NotDiagonalizable: return "NotDiagonalizable";
    case ErrorCode::NonConstantRatio: return "NonConstantRatio";
    case ErrorCode::NoiseDominated: return "NoiseDominated";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

HermitianForm::HermitianForm(const MatC& H, double sym_tol) {
  if (H.rows() != H.cols()) throw LckError(ErrorCode::IllConditioned, "form is not square");
  const double scale = std::max(1.0, H.norm());
  const double asym = (H - H.adjoint()).norm();
  if (asym > sym_tol * scale) {
    throw LckError(ErrorCode::IllConditioned,
                   "form is not Hermitian (asymmetry " + std::to_string(asym) + ")");
  }
  H_ = 0.5 * (H + H.adjoint());
}

MatC FlowGenerator::flow(double t) const { return expm(t * L); }

double spectral_abscissa(const MatC& M) {
  Eigen::ComplexEigenSolver<MatC> es(M, false);
  return es.eigenvalues().real().maxCoeff();
}

Contraction spectral_check(const MatC& A, const ToleranceProfile& tol) {
  if (A.rows() != A.cols() || A.rows() == 0) {
    throw LckError(ErrorCode::InvalidConfig, "matrix must be square and nonempty");
  }
  if (!A.allFinite()) throw LckError(ErrorCode::InvalidConfig, "matrix has non-finite entries");

  Eigen::ComplexEigenSolver<MatC> es(A, true);
  if (es.info() != Eigen::Success) {
    throw LckError(ErrorCode::IllConditioned, "eigen decomposition did not converge");
  }

  Contraction c;
  c.A = A;
  c.eigenvalues = es.eigenvalues();
  const double scale = std::max(A.norm(), 1e-300);
  for (Eigen::Index i = 0; i < c.eigenvalues.size(); ++i) {
    const double mod = std::abs(c.eigenvalues(i));
    if (mod <= 1e-14 * scale) {
      throw LckError(ErrorCode::Singular, "eigenvalue " + std::to_string(i) + " vanishes");
    }
    if (mod >= 1.0) {
      throw LckError(ErrorCode::NotContraction,
                     "eigenvalue modulus " + std::to_string(mod) + " >= 1");
    }
  }

  MatC Q = es.eigenvectors();
  Eigen::JacobiSVD<MatC> svd(Q);
  const auto& sv = svd.singularValues();
  c.eigenbasis_condition =
      sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
  c.diagonalizable = c.eigenbasis_condition <= tol.diag_condition;

  if (c.diagonalizable) {
    const MatC Qinv = Q.inverse();
    const MatC rebuilt = Q * c.eigenvalues.asDiagonal() * Qinv;
    if ((rebuilt - A).norm() > tol.reconstruct * std::max(1.0, A.norm())) {
      c.diagonalizable = false;
    } else {
      c.eigenbasis = Q;
      VecC mods = c.eigenvalues.cwiseAbs().cast<cxd>();
      c.absolute_part = Q * mods.asDiagonal() * Qinv;
    }
  }
  return c;
}

MatC expm(const MatC& X) {
  const Eigen::Index n = X.rows();
  const double norm = X.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / 0.5))));
  const MatC Y = X / std::ldexp(1.0, squarings);

  // [6/6] Pade coefficients c_k = (12-k)! 6! / (12! k! (6-k)!)
  constexpr int q = 6;
  double coef = 1.0;
  MatC N = MatC::Identity(n, n);
  MatC D = MatC::Identity(n, n);
  MatC power = MatC::Identity(n, n);
  double sign = 1.0;
  for (int k = 1; k <= q; ++k) {
    coef *= static_cast<double>(q - k + 1) / static_cast<double>(k * (2 * q - k + 1));
    power = power * Y;
    sign = -sign;
    N += coef * power;
    D += (sign * coef) * power;
  }
  MatC E = D.partialPivLu().solve(N);
  for (int s = 0; s < squarings; ++s) E = E * E;
  return E;
}

namespace {

// Bjorck-Hammarling square root of an upper triangular matrix.
MatC sqrt_upper(const MatC& T) {
  const Eigen::Index n = T.rows();
  MatC R = MatC::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    R(j, j) = std::sqrt(T(j, j));
    for (Eigen::Index i = j - 1; i >= 0; --i) {
      cxd s = T(i, j);
      for (Eigen::Index k = i + 1; k < j; ++k) s -= R(i, k) * R(k, j);
      R(i, j) = s / (R(i, i) + R(j, j));
    }
  }
  return R;
}

// log of an upper triangular block by inverse scaling and squaring, then the
// atanh series log R = 2 sum Z^(2k+1)/(2k+1), Z = (R - I)(R + I)^-1.
MatC log_upper_block(const MatC& T) {
  const Eigen::Index n = T.rows();
  const MatC I = MatC::Identity(n, n);
  MatC R = T;
  int roots = 0;
  while ((R - I).cwiseAbs().colwise().sum().maxCoeff() > 0.25 && roots < 64) {
    R = sqrt_upper(R);
    ++roots;
  }
  const MatC Z = (R + I).triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(R - I);
  const MatC Z2 = Z * Z;
  MatC term = Z;
  MatC sum = Z;
  for (int k = 1; k < 200; ++k) {
    term = term * Z2;
    const MatC add = term / static_cast<double>(2 * k + 1);
    sum += add;
    if (add.norm() <= 1e-18 * std::max(sum.norm(), 1e-300)) break;
  }
  return std::ldexp(2.0, roots) * sum;
}

// Solves A X - X B = C for upper triangular A, B with disjoint spectra.
MatC solve_triangular_sylvester(const MatC& A, const MatC& B, const MatC& C) {
  const Eigen::Index p = A.rows();
  const Eigen::Index q = B.rows();
  MatC X = MatC::Zero(p, q);
  for (Eigen::Index c = 0; c < q; ++c) {
    VecC rhs = C.col(c);
    for (Eigen::Index r = 0; r < c; ++r) rhs += X.col(r) * B(r, c);
    MatC shifted = A - B(c, c) * MatC::Identity(p, p);
    X.col(c) = shifted.triangularView<Eigen::Upper>().solve(rhs);
  }
  return X;
}

// Contiguous diagonal blocks of T such that eigenvalues closer than delta
// share a block (no Schur reordering; interleaved clusters merge).
std::vector<std::pair<Eigen::Index, Eigen::Index>> cluster_blocks(const VecC& diag, double delta) {
  const Eigen::Index n = diag.size();
  std::vector<Eigen::Index> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](Eigen::Index i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (std::abs(diag(i) - diag(j)) <= delta) parent[find(i)] = find(j);
    }
  }
  // extend each index's reach to the last member of its cluster
  std::vector<Eigen::Index> last(n, 0);
  for (Eigen::Index i = 0; i < n; ++i) last[find(i)] = std::max(last[find(i)], i);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> blocks;
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index end = last[find(start)];
    for (Eigen::Index k = start; k <= end; ++k) end = std::max(end, last[find(k)]);
    blocks.emplace_back(start, end - start + 1);
    start = end + 1;
  }
  return blocks;
}

}  // namespace

MatC logm(const MatC& A, const ToleranceProfile& tol) {
  const Eigen::Index n = A.rows();
  Eigen::ComplexSchur<MatC> schur(A, true);
  if (schur.info() != Eigen::Success) {
    throw LckError(ErrorCode::IllConditioned, "Schur decomposition did not converge");
  }
  const MatC& T = schur.matrixT();
  const MatC& U = schur.matrixU();

  for (Eigen::Index i = 0; i < n; ++i) {
    const cxd a = T(i, i);
    if (std::abs(a) == 0.0) throw LckError(ErrorCode::Singular, "log of a singular matrix");
    if (a.real() < 0.0 && std::abs(a.imag()) <= tol.branch_cut * std::abs(a)) {
      throw LckError(ErrorCode::BranchAmbiguity,
                     "eigenvalue on the branch cut arg = pi: (" + std::to_string(a.real()) + ", " +
                         std::to_string(a.imag()) + ")");
    }
  }

  const auto blocks = cluster_blocks(T.diagonal(), 0.1);
  const std::size_t m = blocks.size();
  MatC F = MatC::Zero(n, n);

  for (const auto& [s, len] : blocks) {
    if (len == 1) {
      F(s, s) = std::log(T(s, s));
    } else {
      F.block(s, s, len, len) = log_upper_block(T.block(s, s, len, len));
    }
  }
  // block Parlett recurrence, superdiagonal by superdiagonal
  for (std::size_t d = 1; d < m; ++d) {
    for (std::size_t bi = 0; bi + d < m; ++bi) {
      const std::size_t bj = bi + d;
      const auto [si, li] = blocks[bi];
      const auto [sj, lj] = blocks[bj];
      MatC rhs = F.block(si, si, li, li) * T.block(si, sj, li, lj) -
                 T.block(si, sj, li, lj) * F.block(sj, sj, lj, lj);
      for (std::size_t bk = bi + 1; bk < bj; ++bk) {
        const auto [sk, lk] = blocks[bk];
        rhs += F.block(si, sk, li, lk) * T.block(sk, sj, lk, lj) -
               T.block(si, sk, li, lk) * F.block(sk, sj, lk, lj);
      }
      F.block(si, sj, li, lj) =
          solve_triangular_sylvester(T.block(si, si, li, li), T.block(sj, sj, lj, lj), rhs);
    }
  }
  return U * F * U.adjoint();
}

FlowGenerator principal_log(const Contraction& C, const ToleranceProfile& tol) {
  FlowGenerator g;
  g.L = logm(C.A, tol);
  const double residual = (expm(g.L) - C.A).norm();
  if (residual > tol.exp_residual * std::max(1.0, C.A.norm())) {
    throw LckError(ErrorCode::IllConditioned,
                   "exp(log A) misses A by " + std::to_string(residual));
  }
  return g;
}

HermitianForm solve_lyapunov(const FlowGenerator& flow, const ToleranceProfile& tol) {
  const MatC& L = flow.L;
  const Eigen::Index n = L.rows();
  if (spectral_abscissa(L) >= 0.0) {
    throw LckError(ErrorCode::NotContraction, "flow generator is not stable");
  }
  // column-major vec: vec(L^* P) = (I kron L^*) vec P, vec(P L) = (L^T kron I) vec P
  const Eigen::Index N = n * n;
  MatC K = MatC::Zero(N, N);
  const MatC Ladj = L.adjoint();
  for (Eigen::Index j = 0; j < n; ++j) {
    K.block(j * n, j * n, n, n) += Ladj;
    for (Eigen::Index k = 0; k < n; ++k) {
      K.block(k * n, j * n, n, n) += L(j, k) * MatC::Identity(n, n);
    }
  }
  Eigen::PartialPivLU<MatC> lu(K);
  const double rcond = lu.rcond();
  if (!(rcond > 0.0) || 1.0 / rcond > tol.lyapunov_condition) {
    throw LckError(ErrorCode::IllConditioned,
                   "Lyapunov system condition estimate " + std::to_string(1.0 / rcond));
  }
  VecC rhs = -Eigen::Map<const VecC>(MatC::Identity(n, n).eval().data(), N);
  VecC x = lu.solve(rhs);
  MatC P = Eigen::Map<MatC>(x.data(), n, n);
  HermitianForm form = HermitianForm::symmetrized(P);
  const double residual =
      (Ladj * form.matrix() + form.matrix() * L + MatC::Identity(n, n)).norm();
  if (residual > tol.lyapunov_residual) {
    throw LckError(ErrorCode::IllConditioned,
                   "Lyapunov residual " + std::to_string(residual) + " above tolerance");
  }
  return form;
}

double min_eig_hermitian(const HermitianForm& H) {
  Eigen::SelfAdjointEigenSolver<MatC> es(H.matrix(), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double max_eig_hermitian(const HermitianForm& H) {
  Eigen::SelfAdjointEigenSolver<MatC> es(H.matrix(), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

LemmaLinearInstance lemma_linear_u0(const HermitianForm& h1, const HermitianForm& h2,
                                    const MatC& W, const ToleranceProfile& tol) {
  const Eigen::Index n = h1.dim();
  if (h2.dim() != n || W.rows() != n || W.cols() != n - 1) {
    throw LckError(ErrorCode::DegenerateW, "W must be an n x (n-1) basis");
  }
  const MatC H1 = h1.matrix();
  const MatC H2 = h2.matrix();

  const MatC gram = W.adjoint() * H1 * W;
  const HermitianForm h1W = HermitianForm::symmetrized(gram);
  if (min_eig_hermitian(h1W) <= 0.0) {
    throw LckError(ErrorCode::DegenerateW, "h1 is not positive definite on W");
  }
  const double h2scale = std::max(1.0, H2.norm()) * std::max(1.0, W.squaredNorm());
  if ((W.adjoint() * H2 * W).norm() > tol.sym * h2scale) {
    throw LckError(ErrorCode::DegenerateW, "h2 does not vanish on W");
  }

  // y: unit normal of W, rescaled so that h2(y, y) = 1
  Eigen::HouseholderQR<MatC> qr(W);
  const MatC Qfull = qr.householderQ() * MatC::Identity(n, n);
  VecC y = Qfull.col(n - 1);
  const double h2yy = h2(y, y).real();
  if (h2yy <= 0.0) throw LckError(ErrorCode::DegenerateW, "h2 is not positive on V/W");
  y /= std::sqrt(h2yy);

  const VecC coeff = gram.ldlt().solve(W.adjoint() * H1 * y);
  const VecC y_prime = W * coeff;

  LemmaLinearInstance inst;
  inst.n = n;
  inst.W = W;
  inst.h1 = h1;
  inst.h2 = h2;
  inst.y = y;
  inst.y_prime = y_prime;
  inst.u0 = h1(y_prime, y_prime).real() - h1(y, y).real();
  return inst;
}

}  // namespace lcklab
