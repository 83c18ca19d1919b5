"""Small-strain J2 plasticity with piecewise-linear isotropic hardening.

The radial-return update solves the scalar consistency equation
q_trial - 3 G dgamma = sigma_y(ebar + dgamma) in closed form on the
hardening segment that brackets the solution; beyond the last table point
the yield stress is constant (perfect plasticity).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import NonConvergence

_I3 = np.eye(3)
# I_dev as a 4th-order tensor: I_sym - 1/3 I x I
_ISYM = 0.5 * (
    np.einsum("ik,jl->ijkl", _I3, _I3) + np.einsum("il,jk->ijkl", _I3, _I3)
)
_IXI = np.einsum("ij,kl->ijkl", _I3, _I3)
_IDEV = _ISYM - _IXI / 3.0


@dataclass(frozen=True)
class PlasticMaterial:
    """Isotropic elastoplastic parameters (MPa, t/mm^3)."""

    E: float
    nu: float
    rho: float
    hardening: tuple  # ((sigma_y, eps_p), ...) strictly increasing

    def __post_init__(self):
        tab = tuple((float(s), float(e)) for s, e in self.hardening)
        if len(tab) < 1:
            raise ValueError("hardening table must have at least one row")
        if tab[0][1] != 0.0:
            raise ValueError("first hardening row must be at eps_p = 0")
        for (s0, e0), (s1, e1) in zip(tab, tab[1:]):
            if not (s1 > s0 and e1 > e0):
                raise ValueError("hardening table must increase strictly in both columns")
        object.__setattr__(self, "hardening", tab)

    @classmethod
    def default_aluminum(cls) -> "PlasticMaterial":
        """AA-3104-H19 style parameter set (MPa, t/mm^3)."""
        return cls(
            E=70000.0,
            nu=0.33,
            rho=2.7e-9,
            hardening=(
                (230.0, 0.0),
                (235.0, 0.0017),
                (245.0, 0.0046),
                (252.0, 0.0064),
                (258.0, 0.0163),
                (262.0, 0.0263),
                (266.0, 0.0362),
            ),
        )

    @property
    def G(self) -> float:
        return self.E / (2.0 * (1.0 + self.nu))

    @property
    def K(self) -> float:
        return self.E / (3.0 * (1.0 - 2.0 * self.nu))

    def sigma_y(self, ebar_p: float) -> float:
        """Piecewise-linear yield stress; constant beyond the last point."""
        tab = self.hardening
        if ebar_p <= 0.0:
            return tab[0][0]
        for (s0, e0), (s1, e1) in zip(tab, tab[1:]):
            if ebar_p <= e1:
                return s0 + (s1 - s0) * (ebar_p - e0) / (e1 - e0)
        return tab[-1][0]

    def hardening_slope(self, ebar_p: float) -> float:
        """d sigma_y / d ebar_p on the active segment (0 beyond the table)."""
        tab = self.hardening
        for (s0, e0), (s1, e1) in zip(tab, tab[1:]):
            if ebar_p <= e1:
                return (s1 - s0) / (e1 - e0)
        return 0.0

    def elastic_tangent(self) -> np.ndarray:
        return self.K * _IXI + 2.0 * self.G * _IDEV


@dataclass(frozen=True)
class PlasticState:
    """Internal state: plastic strain tensor and accumulated equivalent
    plastic strain. The total strain is carried alongside so increments
    can be applied without an external strain ledger."""

    eps_p: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))
    ebar_p: float = 0.0
    eps: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))

    def __post_init__(self):
        object.__setattr__(self, "eps_p", np.asarray(self.eps_p, dtype=np.float64))
        object.__setattr__(self, "eps", np.asarray(self.eps, dtype=np.float64))


def radial_return(
    m: PlasticMaterial, state: PlasticState, strain_increment: np.ndarray
) -> tuple[np.ndarray, PlasticState, np.ndarray]:
    """J2 return mapping for one strain increment.

    Returns (stress, new_state, consistent_tangent). The tangent is the
    algorithmically consistent d sigma / d eps of this update.
    """
    deps = np.asarray(strain_increment, dtype=np.float64)
    deps = 0.5 * (deps + deps.T)
    eps = state.eps + deps
    G, K = m.G, m.K

    eps_e = eps - state.eps_p
    vol = np.trace(eps)
    s_trial = 2.0 * G * (eps_e - np.trace(eps_e) / 3.0 * _I3)
    norm_s = float(np.sqrt(np.einsum("ij,ij->", s_trial, s_trial)))
    q_trial = np.sqrt(1.5) * norm_s
    f_trial = q_trial - m.sigma_y(state.ebar_p)

    if f_trial <= 0.0:
        sigma = K * vol * _I3 + s_trial
        return sigma, PlasticState(state.eps_p.copy(), state.ebar_p, eps), m.elastic_tangent()

    dgamma = _solve_consistency(m, state.ebar_p, q_trial, G)
    ebar_new = state.ebar_p + dgamma
    # flow direction: N = 3/2 s_trial / q_trial (so dgamma is the
    # equivalent plastic strain increment)
    flow = 1.5 * s_trial / q_trial
    eps_p_new = state.eps_p + dgamma * flow
    s_new = (1.0 - 3.0 * G * dgamma / q_trial) * s_trial
    sigma = K * vol * _I3 + s_new

    H = m.hardening_slope(ebar_new)
    n_unit = s_trial / norm_s
    theta = 1.0 - 3.0 * G * dgamma / q_trial
    theta_bar = 3.0 * G / (3.0 * G + H) - (1.0 - theta)
    tangent = (
        K * _IXI
        + 2.0 * G * theta * _IDEV
        - 2.0 * G * theta_bar * np.einsum("ij,kl->ijkl", n_unit, n_unit) * 1.5
    )
    return sigma, PlasticState(eps_p_new, ebar_new, eps), tangent


def _solve_consistency(m: PlasticMaterial, ebar: float, q_trial: float, G: float) -> float:
    """Closed-form dgamma on the bracketing hardening segment."""
    tab = m.hardening
    # g(dg) = q_trial - 3G dg - sigma_y(ebar + dg), strictly decreasing.
    prev_dg = 0.0
    prev_sy = m.sigma_y(ebar)
    for sy_k, ep_k in tab:
        if ep_k <= ebar:
            continue
        dg_k = ep_k - ebar
        if q_trial - 3.0 * G * dg_k - sy_k <= 0.0:
            # root inside [prev_dg, dg_k]: sigma_y linear with slope H
            H = (sy_k - prev_sy) / (dg_k - prev_dg)
            dg = prev_dg + (q_trial - 3.0 * G * prev_dg - prev_sy) / (3.0 * G + H)
            if dg < 0.0:
                raise NonConvergence("negative plastic multiplier: corrupted table")
            return dg
        prev_dg, prev_sy = dg_k, sy_k
    # beyond the table: perfect plasticity
    dg = (q_trial - tab[-1][0]) / (3.0 * G)
    if dg < prev_dg - 1e-15:
        raise NonConvergence("consistency solve left the table inconsistently")
    return dg


def von_mises(sigma: np.ndarray) -> float:
    s = sigma - np.trace(sigma) / 3.0 * _I3
    return float(np.sqrt(1.5 * np.einsum("ij,ij->", s, s)))
