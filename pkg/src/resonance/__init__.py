"""
Subwavelength resonances of nested concentric high-contrast resonators.

Modules:
- specfun: spherical Bessel and Hankel functions of complex argument
- medium: materials, layer radii and the parity material map
- dispersion: the matrix A_N(omega, delta) and its scaled determinant
- rootfind: characteristic values by grid seeding and Muller's method
- asymptotics: closed-form two-term frequencies for up to four layers
- modes: eigenmode reconstruction, normalization and sampling
"""
