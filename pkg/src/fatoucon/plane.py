"""Multi-window analysis of one dynamical plane.

The small-scale skeleton (trap door, the annulus around the pole and the
inner zone between them) is invisible at the scale of the whole filled set,
so each analysis rasterises several windows: the global one, a ring window
around the pole, a zoom on the hole of the annulus, and a zoom on the disk
around w.  Each window is also rendered at half resolution; a component is
*resolved* only if its connectivity agrees between the two.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .mapcore import MapParams, rat_eval, rat_eval_deriv
from .orbits import RadiiModel
from .raster import (
    ComponentRecord,
    LabelGrid,
    Window,
    bdd_mask,
    hole_labels,
    rasterize,
    surrounds_origin,
    tag_roles,
)
from .roots import CriticalSet

__all__ = ["PlaneSettings", "PlaneAnalysis", "analyze_plane", "auto_global_window", "ZONES"]

ZONES = ("A_INF", "T", "A", "U_NU", "U_D", "U_N", "U_NP1", "U_1", "A_OUT", "OFF_GRID")


@dataclass
class PlaneSettings:
    resolution: int = 1024
    max_iter: int = 500
    theta: float = 0.5
    min_pixels: int = 10_000      # resolved components must be at least this big
    record_pixels: int = 200      # smaller components are not recorded at all
    stability: bool = True
    ring_factor: float = 5.0
    ring_window: Optional[Window] = None
    zooms: bool = True            # inner and disk windows; scans switch them off
    global_window: Optional[Window] = None
    extra_windows: tuple = ()
    threads: Optional[int] = None


def auto_global_window(p: MapParams, radii: RadiiModel | float, res: int = 256, pad: float = 0.08) -> Window:
    """Bounding box of the points that do not escape immediately, padded."""
    K = radii.K_esc if isinstance(radii, RadiiModel) else float(radii)
    g = rasterize(p, Window.square(0j, K), res, radii, max_iter=100, theta=1.0)
    outer = np.unique(np.concatenate([g.component_id[0], g.component_id[-1],
                                      g.component_id[:, 0], g.component_id[:, -1]]))
    slow = ~np.isin(g.component_id, outer[outer > 0])
    rows = np.nonzero(slow.any(axis=1))[0]
    cols = np.nonzero(slow.any(axis=0))[0]
    if rows.size == 0:
        return Window.square(0j, K)
    zs = [g.point_of(int(rows[0]), int(cols[0])), g.point_of(int(rows[-1]), int(cols[-1]))]
    x0, x1 = min(z.real for z in zs), max(z.real for z in zs)
    y0, y1 = min(z.imag for z in zs), max(z.imag for z in zs)
    h = max(x1 - x0, y1 - y0) * (0.5 + pad)
    c = complex((x0 + x1) / 2, (y0 + y1) / 2)
    return Window.square(c, h)


@dataclass
class PlaneAnalysis:
    p: MapParams
    radii: RadiiModel
    crit: CriticalSet
    settings: PlaneSettings
    grids: dict = field(default_factory=dict)     # name -> LabelGrid (finest first)
    twins: dict = field(default_factory=dict)     # name -> half-resolution LabelGrid
    records: list = field(default_factory=list)   # merged ComponentRecord list
    roles: dict = field(default_factory=dict)     # role -> record uid
    problems: list = field(default_factory=list)
    _masks: dict = field(default_factory=dict, repr=False)

    # -- lookup ------------------------------------------------------------
    def by_uid(self, uid: Optional[int]) -> Optional[ComponentRecord]:
        if uid is None or uid < 0 or uid >= len(self.records):
            return None
        return self.records[uid]

    def role(self, name: str) -> Optional[ComponentRecord]:
        return self.by_uid(self.roles.get(name))

    def locate(self, z: complex) -> Optional[tuple[str, int]]:
        """(grid, label) of z in the finest window that contains it."""
        if not np.isfinite(z):
            return None
        for name, g in self.grids.items():
            if g.window.contains(z):
                lab = g.label_at(z)
                return (name, int(lab)) if lab else (name, 0)
        return None

    def record_at(self, z: complex) -> Optional[ComponentRecord]:
        """Record of the component at z, from the finest window holding a
        record for it (truncated views in zoom windows are not recorded)."""
        if not np.isfinite(z):
            return None
        for name, g in self.grids.items():
            if not g.window.contains(z):
                continue
            lab = g.label_at(z)
            if not lab:
                return None
            uid = self._key_index.get((name, int(lab)))
            if uid is not None:
                return self.by_uid(uid)
        return None

    # -- zones -------------------------------------------------------------
    def in_bdd_a(self, z: complex) -> bool:
        m = self._masks.get("bdd_a")
        g = self.grids.get("ring")
        if m is None or g is None:
            return False
        ij = g.pixel_of(z)
        return bool(ij is not None and m[ij])

    def _in_rec(self, z: complex, role: str) -> bool:
        r = self.role(role)
        if r is None:
            return False
        key = self.locate(z)
        if key is None:
            return False
        g = self.grids[r.grid]
        if not g.window.contains(z):
            return False
        return g.label_at(z) == r.label_id

    def zone_of(self, z: complex) -> str:
        if not np.isfinite(z):
            return "A_INF"
        if self._in_rec(z, "TRAP_DOOR"):
            return "T"
        if self._in_rec(z, "ANNULUS_A"):
            return "A"
        if self.in_bdd_a(z):
            return "U_D"
        if self._in_rec(z, "U_NU"):
            return "U_NU"
        if self._in_rec(z, "A_INF"):
            return "A_INF"
        if self.u_nu_surrounds:
            if self.grids["global"].pixel_of(z) is None:
                return "OFF_GRID"
            # holes of U_nu lie inside its window, which it does not touch
            ij = self.grids[self._masks["u_nu_grid"]].pixel_of(z)
            h = int(self._masks["u_nu_holes"][ij]) if ij is not None else 0
            if h and h == self._masks.get("hole_0"):
                return "U_N"
            if h:
                return "U_1"
            return "U_NP1"
        g = self.grids.get("global")
        if g is not None and g.pixel_of(z) is None:
            return "OFF_GRID"
        return "A_OUT"

    @property
    def u_nu_surrounds(self) -> bool:
        return bool(self._masks.get("u_nu_surrounds", False))

    @property
    def _key_index(self) -> dict:
        if "keys" not in self._masks:
            self._masks["keys"] = {(r.grid, r.label_id): r.id for r in self.records}
        return self._masks["keys"]

    def critical_keys(self) -> set:
        pts = [0j, complex(self.crit.nu_lambda)]
        pts += [complex(c) for c in self.crit.free_ring] + [complex(c) for c in self.crit.infinity_side]
        keys = set()
        for role in ("U_NU", "ANNULUS_A", "TRAP_DOOR"):
            if role in self.roles:
                keys.add(self.roles[role])
        for z in pts:
            if z == 0:
                r = self.role("TRAP_DOOR")
                if r is not None:
                    keys.add(r.id)
                continue
            r = self.record_at(z)
            if r is not None:
                keys.add(r.id)
        return keys


def _grid_order(grids: dict) -> dict:
    return dict(sorted(grids.items(), key=lambda kv: kv[1].dx))


def analyze_plane(
    p: MapParams,
    radii: RadiiModel,
    crit: CriticalSet,
    settings: Optional[PlaneSettings] = None,
    log=None,
) -> PlaneAnalysis:
    s = settings or PlaneSettings()
    say = log or (lambda msg: None)
    out = PlaneAnalysis(p, radii, crit, s)
    res = s.resolution

    def render(name, win):
        say(f"raster {name} {res}x{res} center={win.center:.6g} width={win.width:.6g}")
        g = rasterize(p, win, res, radii, s.max_iter, s.theta, s.threads, name=name)
        out.grids[name] = g
        if s.stability:
            out.twins[name] = rasterize(p, win, max(64, res // 2), radii, s.max_iter, s.theta,
                                        s.threads, name=name + "/2")
        return g

    gwin = s.global_window or auto_global_window(p, radii)
    render("global", gwin)
    ring = render("ring", s.ring_window or Window.square(0j, s.ring_factor * radii.r_outer))

    # inner zoom on the hole of the annulus, sized from the ring grid
    a_lab = _majority_label(ring, crit.free_ring) if s.zooms else 0
    if a_lab:
        holes = hole_labels(ring, a_lab)
        ys, xs = np.nonzero(holes)
        if ys.size:
            rad = max(abs(ring.point_of(int(i), int(j))) for i, j in
                      [(ys.min(), xs.min()), (ys.max(), xs.max()), (ys.min(), xs.max()), (ys.max(), xs.min())])
            render("inner", Window.square(0j, 1.1 * rad))
    # zoom on the disk around w, scaled from the trap door through S'(w)
    t_lab = ring.label_at(0j) if s.zooms else 0
    if t_lab:
        mask = ring.component_id == t_lab
        ys, xs = np.nonzero(mask)
        rt = max(abs(ring.point_of(int(i), int(j))) for i, j in zip(ys[[0, -1]], xs[[0, -1]]))
        rt = max(rt, float(np.max(np.abs(np.array([ring.point_of(int(i), int(j)) for i, j in
                                                   zip(ys[:: max(1, ys.size // 64)], xs[:: max(1, xs.size // 64)])])))))
        _, dw = rat_eval_deriv(*p.pair, complex(crit.w_lambda))
        if np.isfinite(dw) and abs(dw) > 0:
            render("disk", Window.square(complex(crit.w_lambda), 4.0 * rt / abs(dw) + 4 * ring.dx))
    for k, win in enumerate(s.extra_windows):
        render(f"extra{k}", win)

    out.grids = _grid_order(out.grids)
    _merge(out, say)
    return out


def _majority_label(g: LabelGrid, pts) -> int:
    labs = [g.label_at(complex(z)) for z in pts]
    labs = [x for x in labs if x]
    if not labs:
        return 0
    vals, cnt = np.unique(labs, return_counts=True)
    return int(vals[np.argmax(cnt)])


def _twin_kappa(out: PlaneAnalysis, rec: ComponentRecord) -> Optional[int]:
    tw = out.twins.get(rec.grid)
    if tw is None:
        return None
    lab = tw.label_at(rec.representative)
    if not lab:
        return None
    h = int(tw.euler_holes()[lab])
    return h if rec.role == "A_INF" else h + 1


def _merge(out: PlaneAnalysis, say) -> None:
    p, s = out.p, out.settings
    names = list(out.grids)
    merged: list[ComponentRecord] = []
    for gi, name in enumerate(names):
        g = out.grids[name]
        recs = tag_roles(g, p, out.radii, out.crit, min_pixels=s.record_pixels)
        finer = [out.grids[n] for n in names[:gi]]
        for r in recs:
            r.label_id = r.id
            if r.role == "A_INF" and name != "global":
                r.role = "GENERIC"
            if name != "global" and r.touches_frame:
                # truncated view; the component is recorded by a wider window
                continue
            lo, hi = g.bbox_complex(r.id)
            dup = False
            for f in finer:
                mrg = 2 * f.dx
                if f.window.contains(lo, mrg) and f.window.contains(hi, mrg):
                    dup = True
                    break
            if dup:
                continue
            merged.append(r)
    # roles: finest record wins; duplicates in coarser grids become generic
    seen = {}
    for r in merged:
        if r.role == "GENERIC":
            continue
        if r.role in seen:
            r.note = (r.note + "; " if r.note else "") + f"duplicate {r.role}"
            r.role = "GENERIC"
        else:
            seen[r.role] = r
    for uid, r in enumerate(merged):
        r.id = uid
    out.records = merged
    out.roles = {role: r.id for role, r in seen.items()}
    out._masks.pop("keys", None)

    # zone masks
    ring = out.grids.get("ring")
    a = out.role("ANNULUS_A")
    if ring is not None and a is not None and a.grid == "ring":
        out._masks["bdd_a"] = bdd_mask(ring, a.label_id)
    nu = out.role("U_NU")
    if nu is not None and out.grids[nu.grid].window.contains(0j):
        ng = out.grids[nu.grid]
        try:
            surr = surrounds_origin(ng, nu.label_id)
        except Exception:
            surr = False
        out._masks["u_nu_surrounds"] = surr
        out._masks["u_nu_grid"] = nu.grid
        h = hole_labels(ng, nu.label_id)
        out._masks["u_nu_holes"] = h
        ij = ng.pixel_of(0j)
        out._masks["hole_0"] = int(h[ij]) if ij else 0
    elif nu is None:
        out.problems.append("free critical point does not sit on a labelled component")

    # forward targets across grids, zones, stability
    num, den = p.pair
    for r in merged:
        img = complex(rat_eval(num, den, r.representative))
        if np.isfinite(img) and out.locate(img) is not None:
            tgt = out.record_at(img)
        else:
            # beyond every window means beyond the filled set
            tgt = out.role("A_INF")
        r.forward_target = tgt.id if tgt is not None else None
        r.zone = out.zone_of(r.representative)
        tk = _twin_kappa(out, r) if s.stability else r.connectivity
        r.twin_connectivity = tk
        big = r.pixel_count >= s.min_pixels
        r.resolved = bool(big and not r.touches_frame and tk == r.connectivity)
        if r.role == "A_INF":
            r.resolved = bool(tk == r.connectivity)
    say(f"merged {len(merged)} component records from {len(names)} windows")
