"""Exact arithmetic kernels: F_p, F_q, polynomials mod p, Z[zeta_l]."""

from .cyclotomic import (
    CyclotomicInt,
    big_z,
    cyc_real_compare,
    real_part_is_zero,
    root_of_unity,
    small_zeta,
    small_zeta_exponent,
)
from .fields import ExtField, ExtFieldElem, PrimeFieldElem, is_square, legendre
from .polys import PolyModP, factor_mod_p, is_irreducible, is_prime, poly_gcd, poly_product

__all__ = [
    "CyclotomicInt",
    "ExtField",
    "ExtFieldElem",
    "PolyModP",
    "PrimeFieldElem",
    "big_z",
    "cyc_real_compare",
    "factor_mod_p",
    "is_irreducible",
    "is_prime",
    "is_square",
    "legendre",
    "poly_gcd",
    "poly_product",
    "real_part_is_zero",
    "root_of_unity",
    "small_zeta",
    "small_zeta_exponent",
]
