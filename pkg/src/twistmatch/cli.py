"""Command-line front end: prime splitting, twisted factors, demos and reconstruction runs.

JSON is the machine contract.  Text output is for people and may change.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

from .characters import LocalChar
from .curves import EllipticCurveOverK
from .errors import (
    BadReduction,
    DegreeMismatch,
    ExcludedPrime,
    InconsistentOracle,
    InductionDataMissing,
    TwistMatchError,
)
from .harness import from_curves, observably_equivalent, random_order_l_instance, random_quadratic_instance
from .lseries import counterexample_report, extra_iso_demo, factor_at_p
from .numberfield import FieldIso, NumberField, find_isomorphisms, split_prime
from .reconstruct import ReconConfig, reconstruct_order_l, reconstruct_quadratic, verify_sigma

EXIT_OK, EXIT_USAGE, EXIT_EXCLUDED, EXIT_BAD_REDUCTION, EXIT_INCONSISTENT = 0, 1, 2, 3, 4
DEMOS = ("counterexample", "extra-iso", "recovery2", "recovery-l")
EXTRA_ISO_D = (1, -1, 2, -2, 3, -3, 5, -5, 6, -6)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    command: str
    demo: Optional[str] = None
    field: Optional[str] = None
    field2: Optional[str] = None
    curve: Optional[str] = None
    curve2: Optional[str] = None
    p: Optional[int] = None
    pmax: Optional[int] = None
    qmax: Optional[int] = None
    l: Optional[int] = None
    N: int = 1
    seed: int = 0
    twist: Optional[str] = None
    format: str = "json"
    out: Optional[str] = None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="twistmatch", description="Twisted L-factors and prime-bijection reconstruction.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--format", choices=("json", "text"), default="json")
        sp.add_argument("--out", help="write output to this file instead of stdout")
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("split", help="primes of a field over p")
    sp.add_argument("--field", required=True, help='minimal polynomial, e.g. "x^2+1"')
    sp.add_argument("--p", type=int, required=True)
    common(sp)

    sp = sub.add_parser("lfactor", help="twisted factor at p of a curve")
    sp.add_argument("--field", required=True)
    sp.add_argument("--curve", required=True, help='e.g. "y^2 = x^3 + (θ)x + (0)"')
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--twist", help='comma separated values per prime: 0, +1, -1 or zeta^k (write --twist=-1,0)')
    sp.add_argument("--l", type=int, default=2, help="character order for --twist")
    common(sp)

    sp = sub.add_parser("demo", help="run one of the bundled demos")
    sp.add_argument("name", choices=DEMOS)
    sp.add_argument("--field")
    sp.add_argument("--field2")
    sp.add_argument("--curve")
    sp.add_argument("--curve2")
    sp.add_argument("--p", type=int)
    sp.add_argument("--pmax", type=int)
    sp.add_argument("--qmax", type=int)
    sp.add_argument("--l", type=int)
    sp.add_argument("--N", type=int, default=1, help="number of random instances for the recovery demos")
    common(sp)
    return parser


def parse_config(argv: Sequence[str]) -> RunConfig:
    ns = build_parser().parse_args(list(argv))
    kw = {k: v for k, v in vars(ns).items() if v is not None}
    if kw.get("command") == "demo":
        kw["demo"] = kw.pop("name")
    return RunConfig(**kw)


# -- commands ------------------------------------------------------------------------
def cmd_split(cfg: RunConfig) -> dict:
    K = NumberField.parse(cfg.field)
    primes = split_prime(K, cfg.p)
    return {"field": str(K), "p": cfg.p, "primes": [{"prime": str(P), "f": P.inertia, "norm": P.norm} for P in primes]}


def cmd_lfactor(cfg: RunConfig) -> dict:
    K = NumberField.parse(cfg.field)
    E = EllipticCurveOverK.parse(K, cfg.curve)
    primes = split_prime(K, cfg.p)
    chi = None
    if cfg.twist:
        chi = LocalChar.parse_values(cfg.l or 2, primes, cfg.twist.split(","))
    F = factor_at_p(E, cfg.p, chi)
    out = F.to_json()
    out["twist"] = chi.to_json() if chi is not None else None
    out["rendered"] = F.render()
    return out


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("TWISTMATCH_THREADS", "1")))
    except ValueError:
        raise UsageError("TWISTMATCH_THREADS must be an integer")


def _curve_pair(cfg: RunConfig):
    """(E, E2, sigma) from the flags; sigma is the first isomorphism that is not the identity when K = K2."""
    if not (cfg.field and cfg.curve and cfg.curve2 and cfg.p):
        raise UsageError("curve mode needs --field, --curve, --curve2 and --p")
    K = NumberField.parse(cfg.field)
    K2 = NumberField.parse(cfg.field2) if cfg.field2 else K
    E = EllipticCurveOverK.parse(K, cfg.curve)
    E2 = EllipticCurveOverK.parse(K2, cfg.curve2)
    isos = find_isomorphisms(K, K2)
    if not isos:
        raise UsageError(f"{K} and {K2} are not isomorphic")
    sigma = next((s for s in isos if s.image_of_theta != K2.theta), isos[0]) if K == K2 else isos[0]
    return E, E2, sigma


def _recovery_run(instance, l: Optional[int], seed: int, sigma: FieldIso | None = None) -> dict:
    cfg = ReconConfig(seed=seed)
    if l is None:
        match = reconstruct_quadratic(instance.known, instance, cfg)
    else:
        match = reconstruct_order_l(instance.known, instance, l, cfg)
    exact = all(instance.phi[m.left] == m.right or m.collision for m in match.pairs)
    equivalent = observably_equivalent(instance, match, random.Random(seed))
    if not equivalent:
        raise InconsistentOracle("reconstruction is not observably equivalent to the hidden instance")
    out = {
        "instance": instance.to_json(),
        "match": match.to_json(),
        "queries": match.queries,
        "cross_level_checks": match.cross_level_checks,
        "exact_up_to_collisions": exact,
        "observably_equivalent": equivalent,
    }
    if sigma is not None:
        out["sigma"] = str(sigma)
        out["sigma_consistent"] = verify_sigma(sigma, match)
    return out


def cmd_demo(cfg: RunConfig) -> dict:
    name = cfg.demo
    if name == "counterexample":
        return counterexample_report(cfg.pmax or 200)
    if name == "extra-iso":
        return extra_iso_demo(cfg.p or 5, cfg.qmax or 1000, EXTRA_ISO_D)

    l = None if name == "recovery2" else (cfg.l or 5)
    if cfg.curve:
        E, E2, sigma = _curve_pair(cfg)
        inst = from_curves(E, E2, sigma, cfg.p, order=l or 2)
        return {"demo": name, "runs": [_recovery_run(inst, l, cfg.seed, sigma)]}

    # one generator stream per instance, all derived from --seed
    master = random.Random(cfg.seed)
    seeds = [master.randrange(2**32) for _ in range(max(cfg.N, 1))]

    def one(s: int) -> dict:
        rng = random.Random(s)
        inst = random_quadratic_instance(rng) if l is None else random_order_l_instance(rng, l=l, d=None if l > 4 else 1)
        return _recovery_run(inst, l, s)

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        runs = list(pool.map(one, seeds))
    return {"demo": name, "seed": cfg.seed, "l": l or 2, "runs": runs}


# -- rendering -----------------------------------------------------------------------------
def render_text(cfg: RunConfig, result: dict) -> str:
    if cfg.command == "split":
        return "\n".join(f"{r['prime']}  f={r['f']}  N={r['norm']}" for r in result["primes"])
    if cfg.command == "lfactor":
        lines = [f"L_{result['p']}(T) = {result['rendered']}"]
        for r in result["per_prime"]:
            lines.append(f"  {r['prime']}  f={r['f']}  coeffs={r['coeffs']}")
        return "\n".join(lines)
    if cfg.demo == "counterexample":
        lines = [f"{result['curve']} over Q[x]/({result['field']}) vs {result['conjugate']}"]
        lines.append(f"factor at p equal for all p <= {result['p_max']}: {result['all_equal']}")
        for w in result["witnesses"][:5]:
            lines.append(
                f"  p={w['p']} {w['prime']}: {w['points_E']} vs {w['points_E_sigma']} points, "
                f"{w['factor_E']} vs {w['factor_E_sigma']}"
            )
        return "\n".join(lines)
    if cfg.demo == "extra-iso":
        lines = [f"{result['curve']}, p = {result['p']}, q <= {result['q_max']}: {result['checks']} checks"]
        lines.append(f"all equal: {result['all_equal']}, a_q = 0 for q = 3 mod 4: {result['zero_trace_ok']}")
        lines += [f"  d={r['d']:>3} -> {r['psi_d']:>3}  failures={r['failures']}" for r in result["per_d"]]
        return "\n".join(lines)
    lines = []
    for run in result["runs"]:
        m = run["match"]
        lines.append(f"p = {m['p']}: {run['queries']} queries, exact={run['exact_up_to_collisions']}")
        for pr in m["pairs"]:
            flag = "  (collision)" if pr["collision"] else ""
            lines.append(f"  {pr['left']} -> {pr['right']}  f={pr['f']} coeffs={pr['coeffs']}{flag}")
        for pr in m["undetermined"]:
            lines.append(f"  {pr['left']} -> {pr['right']}  f={pr['f']} (undetermined, a = 0)")
    return "\n".join(lines)


def run(cfg: RunConfig) -> dict:
    if cfg.command == "split":
        return cmd_split(cfg)
    if cfg.command == "lfactor":
        return cmd_lfactor(cfg)
    return cmd_demo(cfg)


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
        result = run(cfg)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ExcludedPrime as e:
        print(f"excluded prime: {e}", file=sys.stderr)
        return EXIT_EXCLUDED
    except BadReduction as e:
        print(f"bad reduction: {e}", file=sys.stderr)
        return EXIT_BAD_REDUCTION
    except (InconsistentOracle, DegreeMismatch, InductionDataMissing) as e:
        print(f"internal inconsistency: {e}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except (TwistMatchError, ValueError) as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    text = json.dumps(result, indent=2, ensure_ascii=False) if cfg.format == "json" else render_text(cfg, result)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
