"""Process tomography for unitary channels via interactive observables."""

__version__ = "0.1.0"
