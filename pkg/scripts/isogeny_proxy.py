"""Local-factor comparison of E and E^sigma over Q(sqrt 2), with sigma and with the identity."""

import argparse

from twistmatch.curves import EllipticCurveOverK
from twistmatch.numberfield import FieldIso, NumberField, find_isomorphisms
from twistmatch.reconstruct import isogeny_proxy_report

parser = argparse.ArgumentParser()
parser.add_argument("--pmax", type=int, default=500)
parser.add_argument("--curve", default="y^2 = x^3 + (θ)x + (1)")
args = parser.parse_args()

K = NumberField.parse("x^2-2")
sigma = next(s for s in find_isomorphisms(K, K) if s.image_of_theta != K.theta)
E = EllipticCurveOverK.parse(K, args.curve)
for name, iso in [("sigma", sigma), ("identity", FieldIso.identity(K))]:
    r = isogeny_proxy_report(E, E.conjugate(sigma), iso, args.pmax)
    print(f"{name:>8}: {r['passed']}/{r['tested']} primes agree, failures at {r['failures'][:5]}")
