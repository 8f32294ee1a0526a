"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: validation problems exit 1, IO/parse
problems exit 2 and enumeration size limits exit 3.
"""


class SparseIsingError(Exception):
    """Base class for all package errors."""


class ParameterError(SparseIsingError, ValueError):
    """A numeric or structural argument is outside its allowed domain."""


class InvalidConfigurationError(SparseIsingError, ValueError):
    """A spin configuration does not cover exactly the expected labels."""


class HamiltonianError(SparseIsingError, ValueError):
    """Malformed Hamiltonian: self-loops, duplicate pairs, unknown labels."""


class EmbeddingError(SparseIsingError, ValueError):
    """An embedding failed validation; ``diagnostics`` lists every violation."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        lines = "; ".join(str(d) for d in self.diagnostics)
        super().__init__(f"invalid embedding: {lines}")


class SizeLimitError(SparseIsingError):
    """Exhaustive enumeration was requested beyond the configured limit."""

    def __init__(self, n: int, limit: int):
        self.n = n
        self.limit = limit
        super().__init__(
            f"{n} spins exceeds the enumeration limit of {limit}; "
            "use the MCMC sampler (mode='mcmc') for instances this large"
        )


class SaturationError(SparseIsingError):
    """A target probability lies above what any chain strength can reach."""

    def __init__(self, target: float, limit: float):
        self.target = target
        self.limit = limit
        super().__init__(
            f"target {target:g} is unreachable: the lambda -> infinity limit is {limit:.6g}"
        )


class StructuralError(SparseIsingError, ValueError):
    """A chain graph is not connected."""


class DegenerateVolumeError(SparseIsingError, ValueError):
    """Every vertex of a chain graph has zero weight, so conductance is undefined."""


class NumericalError(SparseIsingError, ArithmeticError):
    """An eigensolve returned a value inconsistent with the graph structure."""


class ParseError(SparseIsingError):
    """An input file could not be parsed; carries the path and line when known."""

    def __init__(self, path, message: str, line: int | None = None):
        self.path = str(path)
        self.line = line
        where = self.path if line is None else f"{self.path}:{line}"
        super().__init__(f"{where}: {message}")
