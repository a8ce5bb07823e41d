"""Search for depth+1 generating sets on every small non-isolated forest.

Budget-bounded evidence run: results are recorded, not asserted. Prints one
JSON line per forest (up to isomorphism) with the smallest box that worked.
"""

from __future__ import annotations

import argparse
import itertools
import json
import time

from psf.closure import SearchBudget, search_min_gens
from psf.forest import RootedForest, canonical_form


def small_forests(max_vertices: int) -> list[RootedForest]:
    seen: dict = {}
    for n in range(1, max_vertices + 1):
        for parents in itertools.product(*[[None, *range(i)] for i in range(n)]):
            f = RootedForest(list(parents))
            if not f.is_isolated:
                seen.setdefault(canonical_form(f), f)
    return list(seen.values())


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-vertices", type=int, default=4)
    ap.add_argument("--boxes", default="1,2,3")
    ap.add_argument("--cap", type=int, default=2_000_000, help="node budget per box")
    args = ap.parse_args()
    boxes = [int(b) for b in args.boxes.split(",")]
    for f in small_forests(args.max_vertices):
        t0 = time.perf_counter()
        size = f.depth + 1
        row = {"parents": list(f.parents), "size": size}
        for box in boxes:
            o = search_min_gens(f, size, SearchBudget(box=box, node_cap=args.cap))
            row.update(box=box, result=o.result)
            if o.result == "found":
                row["gens"] = [list(g) for g in o.gens.coords]
                break
            row["stats"] = o.stats
        row["seconds"] = round(time.perf_counter() - t0, 2)
        print(json.dumps(row), flush=True)


if __name__ == "__main__":
    main()
