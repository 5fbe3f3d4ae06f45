"""Print the Q(i) counterexample: equal factors at every p, different local factors at primes over 5."""

import argparse
import json

from twistmatch.lseries import counterexample_report

parser = argparse.ArgumentParser()
parser.add_argument("--pmax", type=int, default=200)
parser.add_argument("--json", action="store_true")
args = parser.parse_args()

report = counterexample_report(args.pmax)
if args.json:
    print(json.dumps(report, indent=2, ensure_ascii=False))
else:
    print(f"E: {report['curve']}   E^sigma: {report['conjugate']}")
    print(f"factor at p equal for every accepted p <= {args.pmax}: {report['all_equal']}")
    print(f"{len(report['witnesses'])} primes where the local factors differ, first few:")
    for w in report["witnesses"][:6]:
        print(f"  {w['prime']:>12}  #E = {w['points_E']:>3}  #E^sigma = {w['points_E_sigma']:>3}  {w['factor_E']}  vs  {w['factor_E_sigma']}")
