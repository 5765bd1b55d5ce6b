"""Dense primal-dual interior-point semidefinite programming."""

from .problem import (LinearConstraint, SdpProblem, SdpSolution, VerifyReport,
                      hermitian_basis, verify)
from .solver import solve

__all__ = ["LinearConstraint", "SdpProblem", "SdpSolution", "VerifyReport",
           "hermitian_basis", "verify", "solve"]
