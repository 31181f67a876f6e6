"""Solver library and experiment CLI for multiuser wirelessly powered crowd
sensing: joint wireless-power allocation, sensing-data sizing, lossless
compression ratio selection and transmission scheduling."""

from ._kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
