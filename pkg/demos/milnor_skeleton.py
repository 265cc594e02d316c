"""Analyse the perturbed Milnor cubic, print its skeleton, the capture depth of
the free critical point and the connectivities that depth allows."""
from __future__ import annotations

import sys
from pathlib import Path

from fatoucon.connectivity import critical_itinerary, enumerate_attainable
from fatoucon.mapcore import MapParams
from fatoucon.orbits import radii_model
from fatoucon.plane import PlaneSettings, analyze_plane
from fatoucon.raster import Window, save_png
from fatoucon.roots import critical_set


def main(res: int = 1024, out: str = "out/demo") -> None:
    p = MapParams(2, 3, 0.9 + 0.6j, (1.0,), -1e-7)
    radii = radii_model(p)
    crit = critical_set(p)
    pa = analyze_plane(p, radii, crit, PlaneSettings(resolution=res, global_window=Window(0.3 + 0.2j, 2.6, 2.6)),
                       log=print)
    for role in ("TRAP_DOOR", "ANNULUS_A", "DISK_D", "U_NU", "A_INF"):
        r = pa.role(role)
        if r is not None:
            print(f"{role:10s} grid={r.grid:6s} kappa={r.connectivity} pixels={r.pixel_count} "
                  f"surrounds={r.surrounds_origin} resolved={r.resolved}")
    it = critical_itinerary(p, radii, crit, pa)
    print(f"capture depth k = {it.k}: {' -> '.join(it.steps)} ({it.terminal})")
    print("resolved connectivities:", sorted({r.connectivity for r in pa.records if r.resolved}))
    for w in enumerate_attainable(p, it.k, 1, 1, 2 * it.k):
        print(f"  (i,j,l)=({w.i},{w.j},{w.l})  kappa={w.kappa:4d}  {w.status}")
    Path(out).mkdir(parents=True, exist_ok=True)
    for name, g in pa.grids.items():
        save_png(g, Path(out) / f"milnor_{name}.png")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 1024)
