"""Clausen-type trigonometric sums used to resum lattice-series tails.

The lattice-sum acceleration repeatedly needs the 2*pi-periodic functions

    C_q(t) = sum_{m>=1} cos(m t) / m**q,    S_q(t) = sum_{m>=1} sin(m t) / m**q,

for small orders q.  Starting from the classical

    C_1(t) = -ln|2 sin(t/2)| = -ln|t| + sum_{j>=1} (zeta(2j)/j) (t/2pi)^(2j),

every higher member is obtained by integration, so each one splits into

    F_q(t) = log_c * t^(q-1) * ln|t|  +  polynomial(t)  +  t^(q-1) * Z((t/2pi)^2)

with Z a rapidly convergent power series once t is wrapped into [-pi, pi].
Only the ladder C_1, S_2, C_3, S_4, ... is generated (the members reached by
integrating C_1), which is exactly the set the kernel acceleration consumes.
"""
from __future__ import annotations

import numpy as np
from scipy.special import zeta as _zeta

TWO_PI = 2.0 * np.pi


class TrigLadder:
    """Evaluators for the integration ladder C_1, S_2, C_3, S_4, ..."""

    def __init__(self, max_order: int = 10, n_zeta: int = 48):
        self.max_order = max_order
        j = np.arange(1, n_zeta + 1)
        entries = {
            1: {
                "kind": "C",
                "log_c": -1.0,
                "poly": np.zeros(1),
                "zser": _zeta(2.0 * j) / j,
            }
        }
        for q in range(1, max_order):
            cur = entries[q]
            # integrate from 0 to t, term by term
            log_c = cur["log_c"] / q
            poly = np.zeros(max(len(cur["poly"]) + 1, q + 1))
            poly[1 : len(cur["poly"]) + 1] = cur["poly"] / (
                np.arange(len(cur["poly"])) + 1.0
            )
            poly[q] += -cur["log_c"] / q**2
            zser = cur["zser"] / (2.0 * j + q)
            if cur["kind"] == "C":
                entries[q + 1] = {"kind": "S", "log_c": log_c, "poly": poly, "zser": zser}
            else:
                # C_{q+1}(t) = zeta(q+1) - integral of S_q
                poly = -poly
                poly[0] += _zeta(float(q + 1))
                entries[q + 1] = {
                    "kind": "C",
                    "log_c": -log_c,
                    "poly": poly,
                    "zser": -zser,
                }
        self._entries = entries

    def kind(self, q: int) -> str:
        return self._entries[q]["kind"]

    def log_coeff(self, q: int) -> float:
        """Coefficient of t^(q-1) ln|t| in F_q."""
        return self._entries[q]["log_c"]

    @staticmethod
    def wrap(t):
        """Reduce to the principal period [-pi, pi]."""
        t = np.asarray(t, dtype=float)
        return t - TWO_PI * np.round(t / TWO_PI)

    def _analytic(self, q: int, t):
        e = self._entries[q]
        x = (t / TWO_PI) ** 2
        zsum = np.zeros_like(t)
        for c in e["zser"][::-1]:
            zsum = zsum * x + c
        zpart = t ** (q - 1) * x * zsum
        poly = np.zeros_like(t)
        for c in e["poly"][::-1]:
            poly = poly * t + c
        return poly + zpart

    def eval(self, q: int, t, wrap: bool = True):
        """Full value of C_q or S_q at real t (vectorized)."""
        t = np.asarray(t, dtype=float)
        tw = self.wrap(t) if wrap else t
        out = self._analytic(q, tw)
        log_c = self._entries[q]["log_c"]
        with np.errstate(divide="ignore", invalid="ignore"):
            logt = np.where(tw == 0.0, 0.0, np.log(np.abs(tw)))
        lt = log_c * tw ** (q - 1) * logt
        if q == 1:
            # genuine log singularity at t = 0
            lt = np.where(tw == 0.0, -np.inf, log_c * logt)
        return out + lt

    def eval_analytic(self, q: int, t):
        """F_q with the t^(q-1) ln|t| term removed; valid for |t| <= pi."""
        t = np.asarray(t, dtype=float)
        if np.any(np.abs(t) > np.pi * (1 + 1e-9)):
            raise ValueError("analytic ladder evaluation requires |t| <= pi")
        return self._analytic(q, t)


DEFAULT_LADDER = TrigLadder()
