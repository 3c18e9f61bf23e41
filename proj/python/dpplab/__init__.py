"""Python bindings for the dpplab core library."""

from dpplab._core import (
    CapacityError,
    NumericError,
    ValidationError,
    __version__,
    degree_of_identifiability,
    derivative_form,
    expected_loglik,
    fit,
    gradient,
    hessian_eigenvalues,
    inclusion_prob,
    k_to_l,
    l_to_k,
    loss,
    pmf,
    pmf_table,
    random_block_kernel,
    sample,
    tridiagonal_kernel,
)

__all__ = [
    "CapacityError",
    "NumericError",
    "ValidationError",
    "__version__",
    "degree_of_identifiability",
    "derivative_form",
    "expected_loglik",
    "fit",
    "gradient",
    "hessian_eigenvalues",
    "inclusion_prob",
    "k_to_l",
    "l_to_k",
    "loss",
    "pmf",
    "pmf_table",
    "random_block_kernel",
    "sample",
    "tridiagonal_kernel",
]
