"""Spectral aperture basis and exactly integrated Galerkin building blocks.

Densities are expanded in w_p(Y) = T_p(2Y) / sqrt(1/4 - Y^2) on I = (-1/2, 1/2),
which carries the inverse-square-root edge behavior of the aperture field.
In the angular variable Y = cos(theta)/2 every pairing becomes a cosine
integral, so:

* the pure-log kernel ln|X-Y| diagonalizes analytically,
* ln|X-Y| against polynomial prefactors reduces to Jacobi-matrix sandwiches
  of that diagonal (exact),
* plane-wave and cosine moments are Bessel functions (exact),
* the corner kernels ln(X+Y+1), ln(1-X-Y) reduce to single smooth integrals
  via the Joukowski expansion of ln(z + cos phi),
* everything smooth is integrated by a midpoint cosine rule that is
  spectrally accurate for kernels analytic in the angles.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import jv

_LN2 = math.log(2.0)


def _symm_log_diag(n: int) -> np.ndarray:
    """Diagonal Galerkin matrix of the kernel ln|X - Y| (not divided by pi)."""
    d = np.zeros(n)
    d[0] = -2.0 * np.pi**2 * _LN2
    for q in range(1, n):
        d[q] = -(np.pi**2) / (2.0 * q)
    return np.diag(d)


def _mult_matrix(n: int) -> np.ndarray:
    """Matrix of multiplication by X on coefficient vectors in the w_p basis."""
    J = np.zeros((n, n))
    if n > 1:
        J[1, 0] = 0.5
    for p in range(1, n):
        if p + 1 < n:
            J[p + 1, p] = 0.25
        J[p - 1, p] = 0.25
    return J


class ApertureBasis:
    """Weighted first-kind polynomial densities with quadrature and moment tables."""

    def __init__(
        self,
        n_basis: int = 16,
        n_quad: int = 128,
        log_poly_orders: int = 31,
        n_corner_gl: int = 240,
        phi_m_max: int = 40000,
    ):
        self.N = int(n_basis)
        self.Nq = int(n_quad)
        self.log_poly_orders = int(log_poly_orders)

        i = np.arange(self.Nq)
        self.theta = (i + 0.5) * np.pi / self.Nq
        self.X = np.cos(self.theta) / 2.0
        p = np.arange(self.N)
        # weighted cosine transform: quad2d(F)[p,q] ~= <F, w_p w_q>
        self.Vw = np.cos(np.outer(p, self.theta)) * (np.pi / self.Nq)

        self.moment = np.zeros(self.N)
        self.moment[0] = np.pi
        self.flip = np.diag((-1.0) ** p)

        # --- exact pure-log algebra (extended so X-multiplication is exact)
        n_ext = self.N + self.log_poly_orders + 2
        s0_ext = _symm_log_diag(n_ext)
        jm = _mult_matrix(n_ext)
        self.S0 = s0_ext[: self.N, : self.N].copy()
        powers = [np.eye(n_ext)]
        for _ in range(self.log_poly_orders):
            powers.append(jm @ powers[-1])
        self.log_poly_mats = []
        for j in range(self.log_poly_orders + 1):
            acc = np.zeros((self.N, self.N))
            for a in range(j + 1):
                coef = math.comb(j, a) * (-1.0) ** (j - a)
                acc += coef * (powers[a].T @ s0_ext @ powers[j - a])[: self.N, : self.N]
            self.log_poly_mats.append(acc)

        # --- corner log kernels ln(X+Y+1) and ln(1-X-Y)
        gx, gw = np.polynomial.legendre.leggauss(n_corner_gl)
        th = 0.5 * np.pi * (gx + 1.0)
        wth = 0.5 * np.pi * gw
        z = 2.0 + np.cos(th)
        w_j = z + np.sqrt((z - 1.0) * (z + 1.0))
        cosm = np.cos(np.outer(p, th))
        m1 = np.zeros((self.N, self.N))
        m1[:, 0] = np.pi * (cosm * wth) @ np.log(w_j / 4.0)
        if self.N > 1:
            q = np.arange(1, self.N)
            wq = w_j[None, :] ** (-q[:, None])  # (N-1, ngl)
            vals = (cosm * wth) @ wq.T  # (N, N-1)
            m1[:, 1:] = vals * ((-1.0) ** (q + 1) * np.pi / q)[None, :]
        m1 = 0.5 * (m1 + m1.T)  # kernel is symmetric; average out quadrature skew
        self.corner_low = m1
        self.corner_high = self.flip @ m1 @ self.flip

        # --- smooth companions of the interior log split
        XX = self.X[:, None]
        YY = self.X[None, :]
        zd = XX - YY
        g1 = np.log((np.pi / 2.0) * np.abs(np.sinc(zd / 2.0)))
        v = XX + YY + 1.0
        vp = np.minimum(v, 2.0 - v)
        other = np.maximum(v, 2.0 - v)
        g2 = np.log((np.pi / 2.0) * np.abs(np.sinc(vp / 2.0))) - np.log(other)
        self.g1_mat = self.quad2d(g1)
        self.g2_mat = self.quad2d(g2)

        # Galerkin matrix of the combined aperture log kernel (the singular
        # part of the exterior + interior kernels), including the 1/pi factor
        self.S_mat = (
            2.0 * self.S0 + self.g1_mat + self.g2_mat + self.corner_low + self.corner_high
        ) / np.pi

        # --- cosine moments against interior waveguide modes
        m = np.arange(1, phi_m_max + 1)
        signs = np.zeros((phi_m_max, self.N))
        mp = m[:, None] + p[None, :]
        signs[mp % 2 == 0] = 1.0
        signs[mp % 4 == 2] = -1.0
        self.cos_table = np.pi * signs * jv(p[None, :], m[:, None] * np.pi / 2.0)
        w3 = 1.0 / m.astype(float) ** 3
        w5 = 1.0 / m.astype(float) ** 5
        self.phi3_mat = self.cos_table.T @ (self.cos_table * w3[:, None])
        self.phi5_mat = self.cos_table.T @ (self.cos_table * w5[:, None])

        self._spm_cache: dict[float, tuple[np.ndarray, np.ndarray]] = {}

    # ------------------------------------------------------------------
    def quad2d(self, F: np.ndarray) -> np.ndarray:
        """Galerkin matrix of a kernel given on the (X_i, X_j) grid.

        Spectrally accurate for kernels smooth in the angular variables;
        singular kernels must be split and handled by the exact tables.
        """
        return self.Vw @ F @ self.Vw.T

    def quad1d(self, f: np.ndarray) -> np.ndarray:
        return self.Vw @ f

    def bessel_moments(self, c) -> np.ndarray:
        """Plane-wave moments: column p holds integral e^{i c X} w_p(X) dX."""
        c = np.atleast_1d(np.asarray(c, dtype=float))
        p = np.arange(self.N)
        return np.pi * (1j**p)[None, :] * jv(p[None, :], c[:, None] / 2.0)

    def moment_outer(self) -> np.ndarray:
        return np.outer(self.moment, self.moment)

    def log_times_poly(self, coeffs) -> np.ndarray:
        """Exact Galerkin matrix of the kernel  sum_j coeffs[j] (X-Y)^j ln|X-Y|."""
        acc = np.zeros((self.N, self.N), dtype=complex)
        for j, c in enumerate(coeffs):
            if j >= len(self.log_poly_mats):
                break
            if c != 0.0:
                acc = acc + c * self.log_poly_mats[j]
        return acc

    def spm_matrices(self, ell: float) -> tuple[np.ndarray, np.ndarray]:
        """Galerkin matrices of (1/pi) ln|X-Y+ell| and (1/pi) ln|X-Y-ell|.

        Cached per ell; populate before sharing a basis across threads.
        """
        key = float(ell)
        if key not in self._spm_cache:
            Z = self.X[:, None] - self.X[None, :]
            sp = self.quad2d(np.log(np.abs(Z + ell))) / np.pi
            sm = self.quad2d(np.log(np.abs(Z - ell))) / np.pi
            self._spm_cache[key] = (sp, sm)
        return self._spm_cache[key]
