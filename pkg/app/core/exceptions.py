from typing import Optional

import numpy as np


class OgsError(Exception):
    """Base class for every error raised by the toolkit"""


class InvalidArgumentError(OgsError, ValueError):
    """A precondition on an argument was violated"""


class ImageIOError(OgsError, OSError):
    """An image file could not be read or written"""


class SpectralSystemError(OgsError):
    """The transform-domain coefficient field is not strictly positive"""


class SolverDivergenceError(OgsError):
    """Non-finite values appeared during an iterative solve"""

    def __init__(self, message: str, iteration: int):
        super().__init__(f"{message} (iteration {iteration})")
        self.iteration = iteration


class OracleConvergenceError(OgsError):
    """The brute-force oracle hit its iteration cap before the gradient tolerance"""

    def __init__(
        self,
        iterations: int,
        grad_norm: float,
        last_iterate: Optional[np.ndarray] = None,
    ):
        super().__init__(
            f"brute-force oracle stopped after {iterations} iterations "
            f"with gradient norm {grad_norm:.3e}"
        )
        self.iterations = iterations
        self.grad_norm = grad_norm
        self.last_iterate = last_iterate
