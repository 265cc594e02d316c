"""How fast do the ring critical points and zeros approach their leading-order
positions?  Prints the normalised residual for a few decades of lambda."""
from __future__ import annotations

from fatoucon.mapcore import MapParams
from fatoucon.orbits import radii_model
from fatoucon.roots import critical_set


def main() -> None:
    p0 = MapParams(2, 3, 1.0)
    print(f"{'lambda':>8}  {'crit residual':>14}  {'zero residual':>14}  {'r_trap':>10}  {'r_inner':>10}  {'r_outer':>10}")
    for e in range(6, 14, 1):
        lam = 10.0 ** -e
        p = p0.with_lambda(lam)
        cs = critical_set(p)
        r = radii_model(p)
        print(f"{lam:8.0e}  {cs.pairing_residual(lam, 'critical'):14.3e}  "
              f"{cs.pairing_residual(lam, 'zeros'):14.3e}  {r.r_trap:10.3e}  {r.r_inner:10.3e}  {r.r_outer:10.3e}")


if __name__ == "__main__":
    main()
