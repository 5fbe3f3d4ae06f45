"""Round-trip timing for both reconstructions on random hidden instances."""

import argparse
import random
import time
from collections import Counter

from twistmatch.harness import observably_equivalent, random_order_l_instance, random_quadratic_instance
from twistmatch.reconstruct import ReconConfig, reconstruct_order_l, reconstruct_quadratic

parser = argparse.ArgumentParser()
parser.add_argument("--n", type=int, default=100)
parser.add_argument("--seed", type=int, default=0)
parser.add_argument("--probes", type=int, default=100, help="transport probes per instance")
args = parser.parse_args()

rng = random.Random(args.seed)
cfg = ReconConfig(transport_probes=args.probes, seed=args.seed)

t0 = time.perf_counter()
stats = Counter()
for _ in range(args.n):
    inst = random_quadratic_instance(rng)
    m = reconstruct_quadratic(inst.known, inst, cfg)
    stats["equivalent"] += observably_equivalent(inst, m, rng)
    stats["queries"] += m.queries
    stats["collisions"] += any(x.collision for x in m.pairs)
    stats["undetermined"] += len(m.undetermined)
print(f"quadratic: {args.n} instances in {time.perf_counter() - t0:.2f}s  {dict(stats)}")

for l, d in [(5, 1), (5, 2), (7, 1), (7, 2)]:
    t0 = time.perf_counter()
    stats = Counter()
    for _ in range(args.n // 4):
        inst = random_order_l_instance(rng, l=l, d=d)
        m = reconstruct_order_l(inst.known, inst, l, cfg)
        stats["equivalent"] += observably_equivalent(inst, m, rng, trials=20)
        stats["queries"] += m.queries
        stats["cross_level_checks"] += m.cross_level_checks
    print(f"l={l} d={d}: {args.n // 4} instances in {time.perf_counter() - t0:.2f}s  {dict(stats)}")
