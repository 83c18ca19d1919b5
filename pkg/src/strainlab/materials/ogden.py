"""Incompressible Ogden hyperelasticity.

Energy convention: W = sum_i 2 mu_i / alpha_i^2 (l1^a_i + l2^a_i + l3^a_i - 3),
the form used by the Abaqus-style parameter tables this toolkit consumes.
The ground-state shear modulus is mu_0 = sum_i mu_i. The classical
Ogden-1972 scaling differs; feeding its parameters into this form would be
wrong by the alpha_i factors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import IncompressibilityViolated, NonPositiveStretch

_INCOMP_TOL = 1e-8


@dataclass(frozen=True)
class OgdenMaterial:
    """Ogden parameter set (mu_i in MPa, alpha_i dimensionless, D_i in 1/MPa)."""

    mu: tuple
    alpha: tuple
    D: tuple
    name: str = "ogden"

    def __post_init__(self):
        if len(self.mu) != len(self.alpha) or len(self.mu) != len(self.D):
            raise ValueError("mu, alpha, D must have equal length")
        if sum(self.mu) <= 0:
            raise ValueError("ground-state shear modulus sum(mu) must be > 0")
        if any(a == 0 for a in self.alpha):
            raise ValueError("alpha values must be nonzero")
        object.__setattr__(self, "mu", tuple(float(m) for m in self.mu))
        object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
        object.__setattr__(self, "D", tuple(float(d) for d in self.D))

    @property
    def n_terms(self) -> int:
        return len(self.mu)

    @property
    def incompressible(self) -> bool:
        return all(d == 0.0 for d in self.D)

    @property
    def shear_modulus(self) -> float:
        """Ground-state shear modulus mu_0 = sum(mu_i)."""
        return float(sum(self.mu))

    @classmethod
    def default_rubber(cls) -> "OgdenMaterial":
        """Third-order incompressible rubber parameter set (MPa)."""
        return cls(
            mu=(0.0662, 5.875e-12, 0.6249),
            alpha=(2.875, 14.221, 1.0),
            D=(0.0, 0.0, 0.0),
            name="rubber-ogden-n3",
        )

    # -- scalar stretch functions used by the FEM spectral kernels --

    def w_of_stretches(self, lam: np.ndarray) -> np.ndarray:
        """Energy density from principal stretches, lam shape (..., 3)."""
        lam = np.asarray(lam, dtype=np.float64)
        acc = np.zeros(lam.shape[:-1])
        for m, a in zip(self.mu, self.alpha):
            acc = acc + (2.0 * m / a**2) * (np.sum(lam**a, axis=-1) - 3.0)
        return acc

    def dw_dlam(self, lam: np.ndarray) -> np.ndarray:
        """dW/dlambda elementwise (separable energy)."""
        lam = np.asarray(lam, dtype=np.float64)
        acc = np.zeros_like(lam)
        for m, a in zip(self.mu, self.alpha):
            acc = acc + (2.0 * m / a) * lam ** (a - 1.0)
        return acc

    def d2w_dlam2(self, lam: np.ndarray) -> np.ndarray:
        lam = np.asarray(lam, dtype=np.float64)
        acc = np.zeros_like(lam)
        for m, a in zip(self.mu, self.alpha):
            acc = acc + (2.0 * m / a) * (a - 1.0) * lam ** (a - 2.0)
        return acc


def _check_stretches(stretches) -> np.ndarray:
    lam = np.asarray(stretches, dtype=np.float64)
    if np.any(lam <= 0):
        raise NonPositiveStretch(f"stretches must be > 0, got {lam}")
    return lam


def ogden_energy(
    m: OgdenMaterial, stretches, check_incompressible: bool | None = None
) -> float:
    """Strain energy density W(l1, l2, l3) in MPa.

    For an incompressible material (all D_i = 0) the stretch triple must
    satisfy l1 l2 l3 = 1 to 1e-8 unless the check is disabled.
    """
    lam = _check_stretches(stretches)
    if lam.shape[-1] != 3:
        raise ValueError("expected three principal stretches")
    check = m.incompressible if check_incompressible is None else check_incompressible
    if check:
        J = np.prod(lam, axis=-1)
        if np.any(np.abs(J - 1.0) > _INCOMP_TOL):
            raise IncompressibilityViolated(
                f"l1*l2*l3 = {np.max(np.abs(J))!r} differs from 1 beyond {_INCOMP_TOL}"
            )
    return m.w_of_stretches(lam)


def ogden_uniaxial_nominal_stress(m: OgdenMaterial, lam) -> float:
    """Nominal (first Piola) stress P(lambda) for incompressible uniaxial
    loading with free lateral faces: P = sum 2mu/a (l^(a-1) - l^(-a/2-1))."""
    lam = _check_stretches(lam)
    acc = np.zeros_like(lam, dtype=np.float64)
    for mu, a in zip(m.mu, m.alpha):
        acc = acc + (2.0 * mu / a) * (lam ** (a - 1.0) - lam ** (-a / 2.0 - 1.0))
    return acc if acc.shape else float(acc)


def ogden_principal_kirchhoff(m: OgdenMaterial, stretches, pressure: float) -> np.ndarray:
    """Principal Kirchhoff stresses tau_i = l_i dW/dl_i - p (incompressible form)."""
    lam = _check_stretches(stretches)
    tau = lam * m.dw_dlam(lam) - pressure
    return tau


def uniaxial_pressure(m: OgdenMaterial, lam_lateral) -> float:
    """Lagrange pressure that makes the lateral Kirchhoff stress vanish."""
    lam = _check_stretches(lam_lateral)
    return lam * m.dw_dlam(lam)
