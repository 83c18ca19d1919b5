"""Exception hierarchy shared by all strainlab modules."""


class StrainlabError(Exception):
    """Base class for all toolkit errors."""


class NonPositiveJacobian(StrainlabError):
    """Deformation gradient with det F <= 0."""

    def __init__(self, det: float, context: str = ""):
        self.det = float(det)
        msg = f"non-positive Jacobian: det F = {det:.6g}"
        if context:
            msg += f" ({context})"
        super().__init__(msg)


class OutOfBounds(StrainlabError):
    """Sampling coordinate outside the interpolable image region."""

    def __init__(self, x: float, y: float):
        self.x, self.y = float(x), float(y)
        super().__init__(f"coordinate ({x:.3f}, {y:.3f}) outside sampleable region")


class DegenerateParameters(StrainlabError):
    """Parameter set that cannot produce a usable artifact."""


class GridOutsideImage(StrainlabError):
    """Correlation grid whose subsets do not fit inside the image."""


class AllPointsInvalid(StrainlabError):
    """No grid point correlated above the acceptance threshold."""


class WindowUnderdetermined(StrainlabError):
    """Too few valid displacement points for a strain window fit."""


class EmptyRoi(StrainlabError):
    """Region of interest selects no grid points."""


class NonPositiveStretch(StrainlabError):
    """Principal stretch <= 0 passed to a hyperelastic law."""


class IncompressibilityViolated(StrainlabError):
    """Stretch triple with J != 1 passed to an incompressible law."""


class NonConvergence(StrainlabError):
    """Iterative material update failed to converge."""


class PathInfeasible(StrainlabError):
    """Material-point driver could not reach a prescribed target."""

    def __init__(self, msg: str, residual: float = float("nan")):
        self.residual = residual
        super().__init__(msg)


class DegenerateDimensions(StrainlabError):
    """Mesh request with a non-positive edge length or division count."""


class NewtonDiverged(StrainlabError):
    """Equilibrium iteration failed after exhausting the halving budget."""

    def __init__(self, step: int, residual_history: list):
        self.step = step
        self.residual_history = residual_history
        super().__init__(
            f"Newton diverged at load step {step}; last residuals "
            + ", ".join(f"{r:.3e}" for r in residual_history[-5:])
        )


class ElementInverted(StrainlabError):
    """Element with a non-positive Jacobian during the solve."""

    def __init__(self, element: int, step: int):
        self.element = element
        self.step = step
        super().__init__(f"element {element} inverted at load step {step}")


class GridOutsideFace(StrainlabError):
    """Sampling grid extends beyond the tracked mesh face."""


class NoOverlap(StrainlabError):
    """Field comparison with an empty mutual valid mask."""


class DisjointRanges(StrainlabError):
    """Curve comparison with non-overlapping abscissa ranges."""


class IoFailure(StrainlabError):
    """Failed artifact read or write."""

    def __init__(self, path, reason: str):
        self.path = str(path)
        super().__init__(f"{path}: {reason}")


class ConfigInvalid(StrainlabError):
    """Pipeline or stage configuration rejected by validation."""


class StageFailed(StrainlabError):
    """A pipeline stage raised; carries the stage name and cause."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")
