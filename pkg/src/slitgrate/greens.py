"""Green's-function kernels on the rescaled aperture interval I = (-1/2, 1/2).

Exterior (half-space, quasi-periodic) kernel
--------------------------------------------
The kernel is a Fourier lattice sum over diffraction orders,

    Ge(Z) = (e^{i kappa eps Z} / d) * sum_n e^{i n b eps Z} / (i zeta_n),

whose terms decay only like 1/|n|.  It is evaluated by Kummer acceleration:
a low-order band |n| <= n_band is summed exactly, the large-n symbol

    1/(i zeta_n) ~ -(1/b) sum_p g_p sgn(n)^p / |n|^{p+1}

(the g_p follow a Legendre-type recurrence) is subtracted term by term and
resummed in closed form through the Clausen ladder, and the leftover decays
like |n|^{-(P+1)} so the band stays short at any fixed tolerance.  The
ln|Z| content of the resummation is kept symbolic, which gives the constant
part beta_e and the smooth remainder r_e(Z) without numerical cancellation:
r_e(0) = 0 holds exactly by construction.

Interior (slit waveguide) kernel
--------------------------------
The modal sum over the slit cross-section is summed in closed form in the
longitudinal direction (cot/coth for the direct kernel, 1/sin / 1/sinh for
the top-bottom coupling).  Its 1/m transverse tail resums into the two
ln|sin| factors; the remainder coefficients decay like m^{-7} after two
Taylor orders are pulled into Clausen sums, so r_i is cheap and
cancellation-free on the diagonal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .clausen import DEFAULT_LADDER, TrigLadder
from .domain import GratingConfig, branch_sqrt
from .errors import RayleighCutoffError, SeriesTruncationError, WaveguidePoleError

SYMBOL_ORDERS = 8  # asymptotic orders subtracted from the lattice sum
_TAYLOR_EXP_TERMS = 24  # Taylor length for the e^{i kappa eps Z} prefactor
_LN2 = math.log(2.0)


def _gegenbauer_coeffs(c, e2, n_orders):
    """Taylor coefficients of (1 + 2 c t + e2 t^2)^(-1/2) about t = 0."""
    g = np.zeros(n_orders, dtype=complex)
    g[0] = 1.0
    if n_orders > 1:
        g[1] = -c
    for p in range(1, n_orders - 1):
        g[p + 1] = -((2 * p + 1) * c * g[p] + p * e2 * g[p - 1]) / (p + 1)
    return g


@dataclass(frozen=True)
class TruncationPlan:
    """Frozen series lengths so an evaluation family is analytic in k."""

    n_band: int
    m_ri: int
    m_cross: int


def make_plan(
    cfg: GratingConfig, kappa: float, k, tol: float = 1e-12, k_max: float | None = None
) -> TruncationPlan:
    """Choose series truncations valid for |k| up to ``k_max`` (default |k|)."""
    b = cfg.b
    eps = cfg.eps
    kk = complex(k)
    kmag = max(abs(kk), k_max if k_max is not None else 0.0, 1.0)
    n1 = int(math.ceil((kmag + abs(kappa)) / b)) + 2
    c = kappa / b
    e2 = (kappa**2 - kmag**2) / b**2
    g = _gegenbauer_coeffs(c, e2, SYMBOL_ORDERS + 1)
    g_lead = max(abs(g[SYMBOL_ORDERS]), 1.0)
    p = SYMBOL_ORDERS
    n_tail = int(math.ceil((2.0 * g_lead / (b * p * tol)) ** (1.0 / p)))
    n_band = max(n1 + 4, n_tail)
    if n_band > 40000:
        raise SeriesTruncationError(
            "lattice band exceeds cap; parameters out of range", tail=None
        )
    ke = kmag * eps
    if ke >= math.pi * 0.9:
        raise SeriesTruncationError(
            "k*eps approaches the first slit-waveguide cutoff", tail=None
        )
    m_ri = max(8, int(math.ceil(((5.0 / 48.0) * ke**6 / (math.pi**7 * tol)) ** (1.0 / 6.0))))
    m_cross = max(2, int(math.ceil(eps * math.log(4.0 / (tol * eps)) / math.pi)) + 1)
    return TruncationPlan(n_band=n_band, m_ri=min(m_ri, 4000), m_cross=min(m_cross, 64))


class KernelSet:
    """All kernel evaluators and constants at one (kappa, k, eps).

    Immutable after construction; evaluators are pure and vectorized, so a
    single instance may be shared across threads.
    """

    def __init__(
        self,
        cfg: GratingConfig,
        kappa: float,
        k,
        *,
        beta0: float = 0.0,
        tol_series: float = 1e-12,
        cutoff_guard: float = 1e-6,
        pole_guard: float = 1e-12,
        plan: TruncationPlan | None = None,
        ladder: TrigLadder = DEFAULT_LADDER,
    ):
        self.cfg = cfg
        self.kappa = float(kappa)
        self.k = complex(k)
        self.eps = cfg.eps
        self.b = cfg.b
        self.d = cfg.d
        self.beta0 = float(beta0)
        self.tol_series = tol_series
        self.ladder = ladder
        if plan is None:
            plan = make_plan(cfg, kappa, k, tol=tol_series)
        self.plan = plan

        # --- exterior lattice band -------------------------------------
        n = np.arange(-plan.n_band, plan.n_band + 1)
        kn = self.kappa + n * self.b
        zsq = self.k**2 - kn.astype(complex) ** 2
        if np.any(zsq == 0):
            raise RayleighCutoffError("Rayleigh cutoff: zeta_n = 0 in the band")
        zeta = branch_sqrt(zsq)
        self.band_n = n
        self.band_kn = kn
        self.band_zeta = zeta
        self.band_w = 1.0 / (1j * zeta)
        self.zeta0 = complex(zeta[plan.n_band])
        self.cutoff_distance = float(np.min(np.abs(zsq)) ** 0.5)
        self.cutoff_flagged = self.cutoff_distance < cutoff_guard * max(1.0, abs(self.k))

        c = self.kappa / self.b
        e2 = (self.kappa**2 - self.k**2) / self.b**2
        self._g = _gegenbauer_coeffs(c, e2, SYMBOL_ORDERS)
        # symbol s_n on the band (s_0 = 0)
        absn = np.abs(n).astype(float)
        sgn = np.sign(n).astype(float)
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.zeros_like(n, dtype=complex)
            for p in range(SYMBOL_ORDERS):
                s = s + self._g[p] * sgn**p / np.where(absn > 0, absn ** (p + 1), 1.0)
        s *= -1.0 / self.b
        s[plan.n_band] = 0.0
        self.symbol_s = s

        # ln|u| coefficients of the resummed symbol: p_L(u) = sum pl_p u^p
        pl = np.zeros(SYMBOL_ORDERS, dtype=complex)
        for p in range(SYMBOL_ORDERS):
            unit = 1.0 if p % 2 == 0 else 1.0j
            pl[p] = -(2.0 / self.b) * self._g[p] * ladder.log_coeff(p + 1) * unit
        self._pl = pl

        # --- interior modal coefficients --------------------------------
        m = np.arange(1, plan.m_ri + 1, dtype=float)
        gam = np.sqrt((m * np.pi / self.eps) ** 2 - self.k**2 + 0j)
        e2g = np.exp(-2.0 * gam)
        coth = (1.0 + e2g) / (1.0 - e2g)
        self._m_ri = m
        rho = 2.0 / (m * np.pi) - 2.0 * coth / (self.eps * gam)
        self._c3 = self.k**2 * self.eps**2 / np.pi**3
        self._c5 = 3.0 * self.k**4 * self.eps**4 / (4.0 * np.pi**5)
        self.rho_m = rho
        self.rho_tilde_m = rho + self._c3 / m**3 + self._c5 / m**5

        mc = np.arange(1, plan.m_cross + 1, dtype=float)
        gamc = np.sqrt((mc * np.pi / self.eps) ** 2 - self.k**2 + 0j)
        self._m_cross = mc
        self.cross_m = -4.0 * np.exp(-gamc) / (self.eps * gamc * (1.0 - np.exp(-2.0 * gamc)))

        self._pole_guard = pole_guard
        sik = np.sin(self.k)
        if abs(sik) < pole_guard * max(1.0, abs(self.k)):
            raise WaveguidePoleError("waveguide pole proximity: sin k ~ 0")
        self.beta_i = complex(np.cos(self.k) / (self.eps * self.k * sik)) + 2.0 * _LN2 / np.pi
        self.beta_tilde = complex(1.0 / (self.eps * self.k * sik))

        self.beta_e = complex(self._band_kernel(0.0) + self._nonband_smooth(0.0))
        self.beta = self.beta_e + self.beta_i - self.beta0

    # ------------------------------------------------------------------
    # exterior kernel
    # ------------------------------------------------------------------
    def _band_kernel(self, Z):
        """(1/d) sum_{|n|<=N} e^{i kappa_n eps Z} / (i zeta_n)."""
        Z = np.asarray(Z, dtype=float)
        ph = np.exp(1j * self.eps * Z[..., None] * self.band_kn)
        return (ph @ self.band_w) / self.d

    def _symbol_band(self, u):
        u = np.asarray(u, dtype=float)
        ph = np.exp(1j * u[..., None] * self.band_n)
        return ph @ self.symbol_s

    def _ladder_sum(self, u, analytic: bool):
        acc = np.zeros(np.shape(u), dtype=complex)
        for p in range(SYMBOL_ORDERS):
            q = p + 1
            f = self.ladder.eval_analytic(q, u) if analytic else self.ladder.eval(q, u)
            unit = 2.0 if p % 2 == 0 else 2.0j
            acc = acc + (-(unit / self.b) * self._g[p]) * f
        return acc

    def _pl_eval(self, u):
        u = np.asarray(u, dtype=float)
        out = np.zeros(np.shape(u), dtype=complex)
        for c in self._pl[::-1]:
            out = out * u + c
        return out

    def _nonband_smooth(self, Z):
        """Smooth part of Ge minus the exact band, with ln|Z| removed."""
        Z = np.asarray(Z, dtype=float)
        u = self.b * self.eps * Z
        core = self._ladder_sum(u, analytic=True) + self._pl_eval(u) * math.log(
            self.b * self.eps
        ) - self._symbol_band(u)
        pref = np.exp(1j * self.kappa * self.eps * Z) / self.d
        return pref * core

    def _nonband_full(self, Z):
        """Everything outside the exact band, including the log content."""
        Z = np.asarray(Z, dtype=float)
        u = self.b * self.eps * Z
        core = self._ladder_sum(u, analytic=False) - self._symbol_band(u)
        pref = np.exp(1j * self.kappa * self.eps * Z) / self.d
        return pref * core

    def greens_exterior(self, Z):
        """Quasi-periodic half-space kernel at aperture separation Z = X - Y.

        Also serves the shifted slit-to-slit kernels through Z = X - Y +/- ell.
        Logarithmically singular at Z = 0.
        """
        return self._band_kernel(Z) + self._nonband_full(Z)

    def _log_coefficient(self, Z):
        """Coefficient of ln|Z| in r_e; vanishes linearly at Z = 0."""
        Z = np.asarray(Z, dtype=float)
        u = self.b * self.eps * Z
        ratio = self._pl[1:] / self._pl[0]
        rho = np.zeros(np.shape(u), dtype=complex)
        for c in ratio[::-1]:
            rho = rho * u + c
        ika = 1j * self.kappa * self.eps * Z
        return (np.expm1(ika) + np.exp(ika) * u * rho) / np.pi

    def remainder_re(self, Z):
        """Smooth exterior remainder r_e(Z) = Ge(Z) - beta_e - ln|Z|/pi.

        Near Z = 0 the resummed representation is used (no log-log
        cancellation; r_e(0) = 0 exactly).  Beyond the principal period of
        the analytic resummation, where Z is far from the singularity,
        direct subtraction is safe and is used instead.
        """
        Z = np.asarray(Z, dtype=float)
        u = np.abs(self.b * self.eps * Z)
        if np.any(u > np.pi * (1 + 1e-9)):
            far = self.greens_exterior(Z) - self.beta_e - np.log(np.abs(Z)) / np.pi
            near_mask = u <= np.pi * 0.5
            if not np.any(near_mask):
                return far
            near = self._remainder_re_near(np.where(near_mask, Z, 0.0))
            return np.where(near_mask, near, far)
        return self._remainder_re_near(Z)

    def _remainder_re_near(self, Z):
        Z = np.asarray(Z, dtype=float)
        band = self._band_kernel(Z) - self._band_kernel(0.0)
        smooth = self._nonband_smooth(Z) - self._nonband_smooth(0.0)
        with np.errstate(divide="ignore"):
            lnz = np.where(Z == 0.0, 0.0, np.log(np.abs(Z)))
        return band + smooth + self._log_coefficient(Z) * lnz

    def pl_taylor_Z(self):
        """Taylor coefficients b_j of (e^{i kappa eps Z}/d) p_L(b eps Z) in Z."""
        a = np.arange(_TAYLOR_EXP_TERMS, dtype=float)
        expc = (1j * self.kappa * self.eps) ** a / np.array(
            [math.factorial(int(x)) for x in a]
        )
        plz = self._pl * (self.b * self.eps) ** np.arange(SYMBOL_ORDERS)
        return np.convolve(expc, plz) / self.d

    def exterior_grid(self, x_nodes, shift: float):
        """Assembly helper: non-band kernel on the grid Z = x_i - x_j + shift.

        For shift = 0 the ln|Z| content is excluded (handled exactly by the
        caller); for shifted grids the full smooth kernel is returned.  The
        separable band/symbol sums run as small matrix products.
        """
        x = np.asarray(x_nodes, dtype=float)
        Z = x[:, None] - x[None, :] + shift
        u = self.b * self.eps * Z
        if shift == 0.0:
            core = self._ladder_sum(u, analytic=True) + self._pl_eval(u) * math.log(
                self.b * self.eps
            )
        else:
            core = self._ladder_sum(u, analytic=False)
        ex = np.exp(1j * (self.b * self.eps) * np.outer(x, self.band_n))
        sph = self.symbol_s * np.exp(1j * (self.b * self.eps) * shift * self.band_n)
        core = core - (ex * sph) @ ex.conj().T
        pv = np.exp(1j * self.kappa * self.eps * x)
        pref = np.outer(pv, pv.conj()) * (np.exp(1j * self.kappa * self.eps * shift) / self.d)
        return pref * core

    # ------------------------------------------------------------------
    # interior kernel
    # ------------------------------------------------------------------
    def remainder_ri(self, X, Y):
        """Smooth interior remainder r_i(X, Y); real for real k, O(eps^2).

        Broadcasts elementwise over X and Y.
        """
        X, Y = np.broadcast_arrays(
            np.asarray(X, dtype=float), np.asarray(Y, dtype=float)
        )
        u1 = np.pi * (X - Y)
        u2 = np.pi * (X + Y + 1.0)
        phi3 = 0.5 * (self.ladder.eval(3, u1) + self.ladder.eval(3, u2))
        phi5 = 0.5 * (self.ladder.eval(5, u1) + self.ladder.eval(5, u2))
        m = self._m_ri
        a = np.cos(np.multiply.outer(X + 0.5, m * np.pi))
        bb = np.cos(np.multiply.outer(Y + 0.5, m * np.pi))
        tail = np.einsum("...m,m,...m->...", a, self.rho_tilde_m, bb)
        out = -self._c3 * phi3 - self._c5 * phi5 + tail
        if abs(self.k.imag) == 0.0:
            return out.real
        return out

    def remainder_ri_cross(self, X, Y):
        """Top-to-bottom interior remainder; exponentially small in 1/eps."""
        X, Y = np.broadcast_arrays(
            np.asarray(X, dtype=float), np.asarray(Y, dtype=float)
        )
        m = self._m_cross
        a = np.cos(np.multiply.outer(X + 0.5, m * np.pi))
        bb = np.cos(np.multiply.outer(Y + 0.5, m * np.pi))
        out = np.einsum("...m,m,...m->...", a, self.cross_m, bb)
        if abs(self.k.imag) == 0.0:
            return out.real
        return out

    def greens_interior(self, X, Y):
        """Slit-waveguide kernel on one aperture (both points on the same end)."""
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        with np.errstate(divide="ignore"):
            logs = np.log(np.abs(np.sin(np.pi * (X - Y) / 2.0))) + np.log(
                np.abs(np.sin(np.pi * (X + Y + 1.0) / 2.0))
            )
        return self.beta_i + logs / np.pi + self.remainder_ri(X, Y)

    def greens_interior_cross(self, X, Y):
        """Slit-waveguide kernel connecting the top and bottom apertures."""
        return self.beta_tilde + self.remainder_ri_cross(X, Y)


# ----------------------------------------------------------------------
# free-function views of the kernel operations
# ----------------------------------------------------------------------
def _cfg_for(d: float, eps: float) -> GratingConfig:
    # the kernels themselves do not involve ell; pick any admissible value
    ell = max(1.0 + 1e-9, min(2.0, 0.5 * (d / eps - 1.0)))
    return GratingConfig(d=d, eps=eps, ell=ell)


def beta_e(kappa: float, k, eps: float, b: float, d: float, **kw) -> complex:
    """Constant term of the exterior kernel expansion."""
    if abs(b * d - 2.0 * math.pi) > 1e-9:
        raise ValueError("b must equal 2*pi/d")
    return KernelSet(_cfg_for(d, eps), kappa, k, **kw).beta_e


def greens_exterior(Z, kappa: float, k, eps: float, *, d: float, **kw):
    return KernelSet(_cfg_for(d, eps), kappa, k, **kw).greens_exterior(Z)


def remainder_re(Z, kappa: float, k, eps: float, *, d: float, **kw):
    return KernelSet(_cfg_for(d, eps), kappa, k, **kw).remainder_re(Z)


def _interior_set(k, eps: float, **kw) -> KernelSet:
    # geometry enters the interior kernel only through eps
    return _interior_cfg_set(k, eps, **kw)


def _interior_cfg_set(k, eps: float, **kw) -> KernelSet:
    return KernelSet(_cfg_for(max(1.0, 4.0 * eps), eps), 0.0, k, **kw)


def greens_interior(X, Y, k, eps: float, **kw):
    return _interior_set(k, eps, **kw).greens_interior(X, Y)


def greens_interior_cross(X, Y, k, eps: float, **kw):
    return _interior_set(k, eps, **kw).greens_interior_cross(X, Y)


def remainder_ri(X, Y, k, eps: float, **kw):
    return _interior_set(k, eps, **kw).remainder_ri(X, Y)
