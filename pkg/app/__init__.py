"""High-precision orthonormal polynomials for the weight x^nu exp(-x - t/x)."""
