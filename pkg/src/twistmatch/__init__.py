"""Twisted L-series local data and prime-bijection reconstruction."""

from .characters import ConcreteQuadChar, LocalChar, prescribe_order_2, prescribe_order_l
from .curves import EllipticCurveOverK, LocalData, count_points, local_data, reduce_curve
from .errors import TwistMatchError
from .lseries import FactorAtP, dirichlet_expand, factor_at_p
from .numberfield import FieldIso, NumberField, PrimeIdeal, find_isomorphisms, split_prime
from .reconstruct import PrimeMatch, ReconConfig, reconstruct_order_l, reconstruct_quadratic

__version__ = "0.1.0"

__all__ = [
    "ConcreteQuadChar",
    "EllipticCurveOverK",
    "FactorAtP",
    "FieldIso",
    "LocalChar",
    "LocalData",
    "NumberField",
    "PrimeIdeal",
    "PrimeMatch",
    "ReconConfig",
    "TwistMatchError",
    "count_points",
    "dirichlet_expand",
    "factor_at_p",
    "find_isomorphisms",
    "local_data",
    "prescribe_order_2",
    "prescribe_order_l",
    "reconstruct_order_l",
    "reconstruct_quadratic",
    "reduce_curve",
    "split_prime",
]
