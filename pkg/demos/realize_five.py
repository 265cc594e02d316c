"""Search the negative real ray of z^2 (z - 1/2) + lambda/z^3 for a parameter
whose free critical point lands on the annulus in one step, then look for
Fatou components of connectivity d + 2 = 5 at high resolution.

The 4096 raster takes a couple of minutes on one core."""
from __future__ import annotations

import sys

from fatoucon.mapcore import MapParams
from fatoucon.plane import PlaneSettings
from fatoucon.search import realize_connectivity


def main(res: int = 4096) -> None:
    p0 = MapParams(2, 3, 0.5)
    rz = realize_connectivity(p0, 0, 1, 0, settings=PlaneSettings(resolution=res), log=print)
    r = rz.result
    lo, hi = r.band
    print(f"lambda = {r.lambda_found!r}  band |lambda| in [{lo:.3e}, {hi:.3e}]  k = {r.verification.k}")
    for rec in rz.matches:
        print(f"  kappa 5: grid={rec.grid} zone={rec.zone} pixels={rec.pixel_count} surrounds={rec.surrounds_origin}")
    if rz.resolution_insufficient:
        print("no resolved component of connectivity 5; raise the resolution")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 4096)
