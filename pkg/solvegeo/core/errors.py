"""
Exceptions raised by the numerical core.
"""

from typing import Optional


class DomainError(ValueError):
    """An argument lies outside the range where the operation is defined"""


class IntegratorError(RuntimeError):
    """An ODE integration or quadrature did not complete"""

    def __init__(self, message: str, t_reached: Optional[float] = None):
        if t_reached is not None:
            message = f"{message} (reached t={t_reached:.6g})"
        super().__init__(message)
        self.t_reached = t_reached
