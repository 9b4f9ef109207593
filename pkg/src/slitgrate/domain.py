"""Geometry, incidence, and diffraction-order bookkeeping.

Lengths are normalized so the slab thickness (slit length) is 1.  A period of
length ``d`` holds two slits of aperture ``eps`` whose centers sit at
``-ell*eps/2`` and ``+ell*eps/2``; the wall between them has thickness
``(ell - 1) * eps``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BranchCutError, RayleighCutoffError

REGION_BELOW = "BelowContinuum"
REGION_D1 = "D1"
REGION_D2 = "D2"


@dataclass(frozen=True)
class GratingConfig:
    """Grating geometry: period, slit aperture, and slit separation factor."""

    d: float
    eps: float
    ell: float = 2.0

    def __post_init__(self):
        if not self.d > 0:
            raise ValueError("period d must be positive")
        if not self.eps > 0:
            raise ValueError("aperture eps must be positive")
        if not self.ell > 1:
            raise ValueError("separation factor ell must exceed 1")
        if (self.ell + 1.0) * self.eps >= self.d:
            raise ValueError("both slits must fit inside one period: (ell+1)*eps < d")

    @property
    def b(self) -> float:
        """Reciprocal lattice constant 2*pi/d."""
        return 2.0 * math.pi / self.d


@dataclass(frozen=True)
class IncidenceSpec:
    """Incident plane wave, given either by angle or by a fixed Bloch number.

    In angle mode the Bloch wavenumber tracks the sweep, kappa = k sin(theta);
    in fixed mode it is constant.  kappa = b/2 (zone edge) is allowed but
    flagged by ``at_zone_edge``.
    """

    theta: float | None = None
    kappa: float | None = None

    def __post_init__(self):
        if (self.theta is None) == (self.kappa is None):
            raise ValueError("exactly one of theta, kappa must be given")
        if self.theta is not None and not (-math.pi / 2 < self.theta < math.pi / 2):
            raise ValueError("theta must lie in (-pi/2, pi/2)")

    @classmethod
    def from_angle(cls, theta: float) -> "IncidenceSpec":
        return cls(theta=theta)

    @classmethod
    def from_kappa(cls, kappa: float) -> "IncidenceSpec":
        return cls(kappa=kappa)

    def kappa_at(self, k: float) -> float:
        if self.theta is not None:
            return k * math.sin(self.theta)
        return self.kappa

    def at_zone_edge(self, cfg: GratingConfig, k: float, rtol: float = 1e-12) -> bool:
        return abs(abs(self.kappa_at(k)) - cfg.b / 2) <= rtol * cfg.b


def branch_sqrt(z):
    """Square root analytic on the plane cut along the negative imaginary axis.

    Branch fixed by sqrt(1) = 1; arguments are reduced to arg(z) in
    (-pi/2, 3*pi/2].  Raises BranchCutError for points on the cut.
    """
    z = np.asarray(z, dtype=complex)
    ang = np.angle(z)
    on_cut = (ang == -np.pi / 2) & (z != 0)
    if np.any(on_cut):
        raise BranchCutError("branch cut hit: argument on the ray {-i t, t >= 0}")
    ang = np.where(ang <= -np.pi / 2, ang + 2 * np.pi, ang)
    out = np.sqrt(np.abs(z)) * np.exp(0.5j * ang)
    if out.ndim == 0:
        return complex(out)
    return out


def zeta_n(kappa: float, k, n, b: float):
    """Vertical wavenumber zeta_n = sqrt(k^2 - (kappa + n b)^2) on the fixed branch.

    Real positive for propagating orders, positive imaginary for evanescent
    ones when k is real.  Raises RayleighCutoffError at an exact cutoff.
    """
    kn = kappa + np.asarray(n, dtype=float) * b
    arg = np.asarray(k, dtype=complex) ** 2 - kn**2
    if np.any(arg == 0):
        raise RayleighCutoffError("Rayleigh cutoff: zeta_n = 0")
    return branch_sqrt(arg)


@dataclass(frozen=True)
class DiffractionTable:
    """Propagating/evanescent bookkeeping at one (kappa, k) point."""

    kappa: float
    k: float
    ns: tuple
    kappa_ns: tuple
    zeta_ns: tuple
    z1: tuple
    z2: tuple
    region: str
    cutoff_distance: float
    flagged: bool

    def zeta(self, n: int) -> complex:
        return self.zeta_ns[self.ns.index(n)]


def build_table(
    cfg: GratingConfig,
    kappa: float,
    k: float,
    *,
    cutoff_guard: float = 1e-6,
    n_band: int | None = None,
) -> DiffractionTable:
    """Classify diffraction orders at real (kappa, k).

    The region tag counts propagating orders: none -> below the continuum,
    one -> first diffraction continuum, more -> higher continuum.  Points
    within ``cutoff_guard * k`` of a Rayleigh cutoff are flagged, not
    rejected.
    """
    if k <= 0:
        raise ValueError("k must be positive")
    b = cfg.b
    if n_band is None:
        n_band = int(math.ceil((k + abs(kappa)) / b)) + 4
    ns = np.arange(-n_band, n_band + 1)
    kns = kappa + ns * b
    zs = zeta_n(kappa, k, ns, b)
    prop = np.abs(kns) < k
    z1 = tuple(int(n) for n in ns[prop])
    z2 = tuple(int(n) for n in ns[~prop])
    n_open = len(z1)
    if n_open == 0:
        region = REGION_BELOW
    elif n_open == 1:
        region = REGION_D1
    else:
        region = REGION_D2
    cutoff_distance = float(np.min(np.abs(k - np.abs(kns))))
    flagged = cutoff_distance < cutoff_guard * k
    return DiffractionTable(
        kappa=float(kappa),
        k=float(k),
        ns=tuple(int(n) for n in ns),
        kappa_ns=tuple(float(x) for x in kns),
        zeta_ns=tuple(complex(z) for z in np.atleast_1d(zs)),
        z1=z1,
        z2=z2,
        region=region,
        cutoff_distance=cutoff_distance,
        flagged=flagged,
    )
