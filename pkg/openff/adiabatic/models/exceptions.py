"""Exceptions raised when evaluating Hamiltonian models"""
from openff.adiabatic.utilities.exceptions import AdiabaticException


class ModelDomainError(AdiabaticException):
    """An exception raised when a model is evaluated outside of its strip of
    analyticity."""

    def __init__(self, model_type: str, imaginary_part: float, strip_halfwidth: float):
        super().__init__(
            f"The {model_type} model is only analytic for |Im z| < "
            f"{strip_halfwidth:.6g} but was evaluated at Im z = {imaginary_part:.6g}."
        )

        self.model_type = model_type
        self.imaginary_part = imaginary_part
        self.strip_halfwidth = strip_halfwidth


class NotScatteringSafeError(AdiabaticException):
    """An exception raised when a scattering quantity is requested for a model that
    does not have limits at t = +/- infinity."""

    def __init__(self, model_type: str):
        super().__init__(
            f"The {model_type} model does not approach constant limits as "
            f"t -> +/- infinity and so has no truncation time. Use the "
            f"convergence-in-T mode of the propagator instead."
        )

        self.model_type = model_type
