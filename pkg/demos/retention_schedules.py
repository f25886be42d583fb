"""
What each placement policy chooses to remember
==============================================

A surface is a fixed budget of slots; every generation writes one new
differentia and the policy decides which old one dies.  This script
draws the surviving ranks as deposits pile up, so you can see the three
retention shapes side by side without reading any formulas.
"""

from surftrack.oracle import retained_ranks, steady_gap_bound

SLOTS = 16
CHECKPOINTS = (16, 32, 64, 128, 256)


def strip(ranks, n, width=64):
    """One ASCII row: '#' where a retained rank falls, '.' elsewhere."""
    cells = ["."] * width
    for r in ranks:
        cells[r * (width - 1) // max(1, n - 1)] = "#"
    return "".join(cells)


print(f"{SLOTS}-slot surface, ranks drawn on a 0..N-1 axis\n")
for policy in ("steady", "tilted", "hybrid"):
    print(f"{policy}")
    for n in CHECKPOINTS:
        ranks = retained_ranks(policy, SLOTS, n)
        print(f"  N={n:>4} |{strip(ranks, n)}|  {len(ranks)} kept")
    print()

# steady spreads evenly: the largest gap doubles only when N doubles
print("steady gap growth (largest spacing between survivors):")
for n in CHECKPOINTS:
    ranks = retained_ranks("steady", SLOTS, n) + [n]
    worst = max(b - a for a, b in zip(ranks, ranks[1:]))
    print(f"  N={n:>4}  largest gap {worst:>3}  advertised bound {steady_gap_bound(n, SLOTS)}")

# tilted hoards the recent past instead: measure how stale the newest
# and the median survivor are at the same checkpoints
print("\ntilted staleness (how far behind N the survivors sit):")
for n in CHECKPOINTS:
    ranks = retained_ranks("tilted", SLOTS, n)
    newest = n - 1 - max(ranks)
    median = n - 1 - sorted(ranks)[len(ranks) // 2]
    print(f"  N={n:>4}  newest survivor lags {newest}, median survivor lags {median}")

print(
    "\nsteady buys bounded gaps everywhere; tilted buys a dense recent"
    "\nwindow plus the permanent rank-0 anchor; hybrid splits its slots"
    "\nand gets half of each."
)
