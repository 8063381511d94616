"""
smoothlab core Python package.

Numerical laboratory for moduli of smoothness, Fourier summation methods and
K-functionals of periodic functions on the torus:
- spectral: band-limited surrogates, transforms, L_p norms, multipliers
- moduli: finite differences and moduli of smoothness
- summation: summation-method multipliers and their means
- kfunctional: operator symbols, K-functionals, condition reports
- wiener: transition functions, A-norm estimates, radial reduction
- banach: moduli of maps between normed spaces on sample clouds
- corpus / experiments / report: test functions, sweeps and row output
- workdir / config: run layout and experiment configuration
"""

__version__ = "0.1.0"
