"""Random walks, harmonic functions, and Liouville-type classification on
discrete measured groupoids."""

__version__ = "0.1.0"
