"""Galerkin assembly of the aperture operators and the two-by-two reduction.

The coupled-slit problem reduces, per parity sector, to a 2N x 2N block
system L = S + S_inf acting on the two aperture densities, plus a rank-two
coupling through the aperture means.  Solving L against the two indicator
densities yields a 2x2 matrix Q; together with the kernel constants this
forms M = eps (Q B + I), whose eigenvalues drive both the resonance
condition and the forced solve.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .basis import ApertureBasis
from .domain import GratingConfig
from .errors import IllConditionedError, SlitGrateError
from .greens import KernelSet, TruncationPlan

_BETA0_CANDIDATES = (0.0, 1.0, -2.0, -1.0, 2.0, 3.0)
QHAT_COND_GUARD = 1e8
BLOCK_COND_GUARD = 1e10


def assemble_S(basis: ApertureBasis, beta0: float) -> np.ndarray:
    """Galerkin matrix of the aperture log kernel plus beta0 times the mean projector."""
    return basis.S_mat + beta0 * basis.moment_outer()


def assemble_Spm(basis: ApertureBasis, ell: float) -> tuple[np.ndarray, np.ndarray]:
    """Galerkin matrices of the shifted log kernels ln|X-Y+ell|, ln|X-Y-ell| (both /pi)."""
    return basis.spm_matrices(ell)


def operator_norm(mat: np.ndarray, basis: ApertureBasis) -> float:
    """Spectral norm in the basis's natural (weighted) inner product."""
    g = np.full(basis.N, np.pi / 2.0)
    g[0] = np.pi
    s = 1.0 / np.sqrt(g)
    return float(np.linalg.norm(s[:, None] * mat * s[None, :], 2))


def _band_matrix(ks: KernelSet, basis: ApertureBasis, shift: float) -> np.ndarray:
    """Exact Galerkin matrix of the truncated Fourier band of the exterior kernel."""
    bm = basis.bessel_moments(ks.band_kn * ks.eps)  # (n_modes, N)
    w = ks.band_w * np.exp(1j * ks.band_kn * ks.eps * shift) / ks.d
    return bm.T @ (w[:, None] * bm.conj())


def exterior_T_matrices(ks: KernelSet, basis: ApertureBasis):
    """Galerkin matrices of the exterior kernel: same-slit and both cross-slit shifts."""
    ell = ks.cfg.ell
    te = (
        _band_matrix(ks, basis, 0.0)
        + basis.log_times_poly(ks.pl_taylor_Z())
        + basis.quad2d(ks.exterior_grid(basis.X, 0.0))
    )
    tep = _band_matrix(ks, basis, +ell) + basis.quad2d(ks.exterior_grid(basis.X, +ell))
    tem = _band_matrix(ks, basis, -ell) + basis.quad2d(ks.exterior_grid(basis.X, -ell))
    return te, tep, tem


def interior_R_matrices(ks: KernelSet, basis: ApertureBasis):
    """Galerkin matrices of the interior remainders r_i and the cross coupling."""
    mr = len(ks.rho_tilde_m)
    ct = basis.cos_table[:mr]
    ri = ct.T @ (ct * ks.rho_tilde_m[:, None])
    ri = ri - ks._c3 * basis.phi3_mat - ks._c5 * basis.phi5_mat
    mc = len(ks.cross_m)
    ctc = basis.cos_table[:mc]
    rti = ctc.T @ (ctc * ks.cross_m[:, None])
    if abs(ks.k.imag) == 0.0:
        return ri.real, rti.real
    return ri, rti


def assemble_Sinf(ks: KernelSet, basis: ApertureBasis, parity: int | None = None):
    """Galerkin matrices of the smooth remainder operators.

    Returns a dict with the same-slit remainder (r_e + r_i), the two shifted
    exterior remainders, and the exponentially small top-bottom coupling.
    When ``parity`` is +1/-1 the combined diagonal remainder is included.
    """
    te, tep, tem = exterior_T_matrices(ks, basis)
    ri, rti = interior_R_matrices(ks, basis)
    pi_mat = basis.moment_outer()
    sp, sm = basis.spm_matrices(ks.cfg.ell)
    s_inf = te - ks.beta_e * pi_mat - basis.S0 / np.pi + ri
    s_inf_p = tep - ks.beta_e * pi_mat - sp
    s_inf_m = tem - ks.beta_e * pi_mat - sm
    out = {
        "S_inf": s_inf,
        "S_inf_plus": s_inf_p,
        "S_inf_minus": s_inf_m,
        "S_tilde_inf": rti,
        "T_e": te,
        "T_e_plus": tep,
        "T_e_minus": tem,
        "norms": {
            "S_inf": operator_norm(s_inf, basis),
            "S_inf_plus": operator_norm(s_inf_p, basis),
            "S_inf_minus": operator_norm(s_inf_m, basis),
            "S_tilde_inf": operator_norm(rti, basis),
        },
    }
    if parity is not None:
        out["S_inf_diag"] = s_inf + float(parity) * rti
    return out


def _match_eigenpairs(m2: np.ndarray):
    """Eigenpairs of a 2x2 matrix ordered by overlap with [1,1] / [1,-1]."""
    lam, vec = np.linalg.eig(m2)
    v0 = vec[:, 0] / np.linalg.norm(vec[:, 0])
    v1 = vec[:, 1] / np.linalg.norm(vec[:, 1])
    r1 = np.array([1.0, 1.0]) / math.sqrt(2.0)
    r2 = np.array([1.0, -1.0]) / math.sqrt(2.0)
    s = np.array(
        [
            [abs(np.vdot(r1, v0)), abs(np.vdot(r1, v1))],
            [abs(np.vdot(r2, v0)), abs(np.vdot(r2, v1))],
        ]
    )
    if s[0, 0] + s[1, 1] >= s[0, 1] + s[1, 0]:
        order = (0, 1)
    else:
        order = (1, 0)
    lam1, lam2 = lam[order[0]], lam[order[1]]
    v1_, v2_ = vec[:, order[0]], vec[:, order[1]]
    margin = abs(s[0, order[0]] - s[0, order[1]])
    return (lam1, v1_), (lam2, v2_), float(margin)


@dataclass
class ReducedSystem:
    """Per-parity reduced data at one (kappa, k)."""

    parity: int
    kappa: float
    k: complex
    eps: float
    L: np.ndarray
    Q: np.ndarray
    B: np.ndarray
    M: np.ndarray
    lam1: complex
    lam2: complex
    v1: np.ndarray
    v2: np.ndarray
    match_margin: float
    cond_L: float
    beta0: float
    alpha: float
    alpha_tilde: float
    Qhat: np.ndarray
    _lu: tuple = field(repr=False, default=None)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return lu_solve(self._lu, rhs)

    def lam(self, j: int) -> complex:
        return self.lam1 if j == 1 else self.lam2

    def eigvec(self, j: int) -> np.ndarray:
        return self.v1 if j == 1 else self.v2


class Workspace:
    """Geometry-level discretization shared across wavenumbers.

    Holds the basis, the k- and eps-independent Galerkin matrices for a given
    slit separation factor ell, the chosen reference constant beta0, and the
    limit coupling numbers alpha, alpha_tilde.  Instances are immutable after
    construction and safe for concurrent use.
    """

    def __init__(
        self,
        ell: float = 2.0,
        n_basis: int = 16,
        n_quad: int = 128,
        beta0: float | None = None,
        tol_series: float = 1e-12,
        cutoff_guard: float = 1e-6,
        basis: ApertureBasis | None = None,
    ):
        self.ell = float(ell)
        self.basis = basis if basis is not None else ApertureBasis(n_basis, n_quad)
        self.tol_series = tol_series
        self.cutoff_guard = cutoff_guard
        self.sp, self.sm = self.basis.spm_matrices(self.ell)
        if beta0 is None:
            beta0 = choose_beta0(self.basis, self.ell)
        self.beta0 = float(beta0)
        self.alpha, self.alpha_tilde, self.Qhat = compute_alpha(
            self.basis, self.beta0, ell=self.ell
        )
        self.Shat = assemble_S(self.basis, self.beta0)
        n = self.basis.N
        ss = np.zeros((2 * n, 2 * n))
        ss[:n, :n] = self.Shat
        ss[n:, n:] = self.Shat
        ss[:n, n:] = self.sm
        ss[n:, :n] = self.sp
        self.SS = ss

    # ------------------------------------------------------------------
    def kernel_set(
        self, cfg: GratingConfig, kappa: float, k, plan: TruncationPlan | None = None
    ) -> KernelSet:
        if abs(cfg.ell - self.ell) > 1e-12:
            raise SlitGrateError("config ell does not match workspace ell")
        return KernelSet(
            cfg,
            kappa,
            k,
            beta0=self.beta0,
            tol_series=self.tol_series,
            cutoff_guard=self.cutoff_guard,
            plan=plan,
        )

    def _reduced_from_parts(self, ks: KernelSet, parts: dict, parity: int) -> ReducedSystem:
        n = self.basis.N
        diag = self.Shat + parts["S_inf"] + float(parity) * parts["S_tilde_inf"]
        off_m = self.sm + parts["S_inf_minus"]
        off_p = self.sp + parts["S_inf_plus"]
        L = np.zeros((2 * n, 2 * n), dtype=complex)
        L[:n, :n] = diag
        L[n:, n:] = diag
        L[:n, n:] = off_m
        L[n:, :n] = off_p
        cond = float(np.linalg.cond(L))
        if cond > BLOCK_COND_GUARD:
            raise IllConditionedError(f"ill-conditioned block: cond(L) = {cond:.3e}")
        lu = lu_factor(L)
        rhs = np.zeros((2 * n, 2), dtype=complex)
        rhs[0, 0] = np.pi
        rhs[n, 1] = np.pi
        sol = lu_solve(lu, rhs)
        q = np.pi * np.array(
            [[sol[0, 0], sol[0, 1]], [sol[n, 0], sol[n, 1]]], dtype=complex
        )
        bd = ks.beta + float(parity) * ks.beta_tilde
        b2 = np.array([[bd, ks.beta_e], [ks.beta_e, bd]], dtype=complex)
        m2 = ks.eps * (q @ b2 + np.eye(2))
        (lam1, v1), (lam2, v2), margin = _match_eigenpairs(m2)
        return ReducedSystem(
            parity=parity,
            kappa=ks.kappa,
            k=ks.k,
            eps=ks.eps,
            L=L,
            Q=q,
            B=b2,
            M=m2,
            lam1=lam1,
            lam2=lam2,
            v1=v1,
            v2=v2,
            match_margin=margin,
            cond_L=cond,
            beta0=self.beta0,
            alpha=self.alpha,
            alpha_tilde=self.alpha_tilde,
            Qhat=self.Qhat,
            _lu=lu,
        )

    def reduced_pair(
        self, cfg: GratingConfig, kappa: float, k, plan: TruncationPlan | None = None
    ):
        """Both parity sectors at one (kappa, k), sharing the kernel assembly."""
        ks = self.kernel_set(cfg, kappa, k, plan=plan)
        parts = assemble_Sinf(ks, self.basis)
        plus = self._reduced_from_parts(ks, parts, +1)
        minus = self._reduced_from_parts(ks, parts, -1)
        return ks, parts, plus, minus

    def reduced(
        self,
        cfg: GratingConfig,
        kappa: float,
        k,
        parity: int,
        plan: TruncationPlan | None = None,
    ) -> ReducedSystem:
        ks = self.kernel_set(cfg, kappa, k, plan=plan)
        parts = assemble_Sinf(ks, self.basis)
        return self._reduced_from_parts(ks, parts, parity)


def build_reduced(
    ks: KernelSet, basis: ApertureBasis, parity: int, *, workspace: Workspace | None = None
) -> ReducedSystem:
    """Functional wrapper: reduced system for one parity from a kernel set."""
    ws = workspace if workspace is not None else Workspace(
        ell=ks.cfg.ell, n_basis=basis.N, n_quad=basis.Nq, beta0=ks.beta0, basis=basis
    )
    parts = assemble_Sinf(ks, basis)
    return ws._reduced_from_parts(ks, parts, parity)


def compute_alpha(basis: ApertureBasis, beta0: float, ell: float = 2.0):
    """Aperture-mean couplings of the inverted limit operator.

    Independent of eps and k; they depend only on the separation factor ell
    and the reference constant beta0.
    """
    n = basis.N
    shat = assemble_S(basis, beta0)
    sp, sm = basis.spm_matrices(ell)
    ss = np.zeros((2 * n, 2 * n))
    ss[:n, :n] = shat
    ss[n:, n:] = shat
    ss[:n, n:] = sm
    ss[n:, :n] = sp
    rhs = np.zeros((2 * n, 2))
    rhs[0, 0] = np.pi
    rhs[n, 1] = np.pi
    sol = np.linalg.solve(ss, rhs)
    a11 = np.pi * sol[0, 0]
    a12 = np.pi * sol[0, 1]
    a21 = np.pi * sol[n, 0]
    a22 = np.pi * sol[n, 1]
    alpha = 0.5 * (a11 + a22)
    alpha_tilde = 0.5 * (a12 + a21)
    if abs(a11 - a22) > 1e-9 * max(1.0, abs(alpha)) or abs(a12 - a21) > 1e-9 * max(
        1.0, abs(alpha)
    ):
        raise SlitGrateError("limit coupling matrix failed its symmetry check")
    qhat = np.array([[alpha, alpha_tilde], [alpha_tilde, alpha]])
    return float(alpha), float(alpha_tilde), qhat


def choose_beta0(basis: ApertureBasis, ell: float = 2.0) -> float:
    """Deterministic scan for a reference constant giving a well-conditioned limit."""
    for beta0 in _BETA0_CANDIDATES:
        try:
            alpha, alpha_tilde, _ = compute_alpha(basis, beta0, ell=ell)
        except (np.linalg.LinAlgError, SlitGrateError):
            continue
        lo = min(abs(alpha + alpha_tilde), abs(alpha - alpha_tilde))
        hi = max(abs(alpha + alpha_tilde), abs(alpha - alpha_tilde))
        if lo > 0 and hi / lo < QHAT_COND_GUARD:
            return float(beta0)
    raise SlitGrateError("beta0 scan failed: no candidate gives invertible limit")
