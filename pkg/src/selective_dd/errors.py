"""Exception hierarchy.

Input/domain problems derive from ``ValueError``; numerical guards derive
from ``ArithmeticError`` so callers (and the CLI) can tell them apart.
"""


class DecouplingError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(DecouplingError, ValueError):
    pass


class NotHermitianError(DecouplingError, ValueError):
    def __init__(self, defect, location=None):
        self.defect = float(defect)
        self.location = location
        msg = f"matrix is not Hermitian: max |M - M^dagger| = {self.defect:.3e}"
        if location is not None:
            msg += f" at entry {tuple(location)}"
        super().__init__(msg)


class NotUnitaryError(DecouplingError, ValueError):
    def __init__(self, defect):
        self.defect = float(defect)
        super().__init__(f"matrix is not unitary: max |U^dagger U - I| = {self.defect:.3e}")


class PartitionError(DecouplingError, ValueError):
    pass


class SequenceError(DecouplingError, ValueError):
    """Invalid pulse count or interval fractions."""


class DomainError(DecouplingError, ValueError):
    """Parameter outside the region where a closed form is defined."""


class BranchInfeasibleError(DomainError):
    def __init__(self, branch, index, value):
        self.branch = branch
        self.index = index
        self.value = float(value)
        super().__init__(
            f"branch '{branch}' is infeasible: delta{index} = {self.value:.6g} not in (0, 1)"
        )


class UnsupportedOrderError(DecouplingError, ValueError):
    pass


class BranchAmbiguityError(DecouplingError, ArithmeticError):
    """An eigenphase sits too close to the logarithm branch cut at +-pi."""

    def __init__(self, max_phase, margin, max_tf=None, reason=None):
        self.max_phase = float(max_phase)
        self.margin = float(margin)
        self.max_tf = max_tf
        msg = reason or (
            f"eigenphase {self.max_phase:.6f} rad is within {self.margin} rad of the "
            "branch cut at pi; the effective Hamiltonian is ambiguous"
        )
        if max_tf is not None:
            msg += f"; reduce tf below {max_tf:.6g}"
        super().__init__(msg)


class ScalingFitError(DecouplingError, ArithmeticError):
    pass
