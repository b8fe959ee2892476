"""
Lévy Potential Toolkit
======================

Numerical potential theory and Monte Carlo verification for isotropic
unimodal Lévy processes.

Modules:
- config: Configuration management and run presets
- catalog: Process zoo, spec documents and radial-profile reductions
- exponent: Characteristic exponents, Pruitt function and scaling certificates
- potential: Subordinator potentials, kernels, ball potentials and capacities
- mc: Path simulation, exit records and occupation histograms
- experiments: Empirical verifications and the analytic inequality suite
- utils: File paths, logging and quadrature helpers
"""

__version__ = "1.0.0"
