"""Rasterised dynamical planes and pixel topology of Fatou components.

A pixel is a *separator* (a stand-in for the Julia set) when its orbit never
leaves the disk of radius K_esc within ``max_iter`` steps, or when the
distance estimate G/|grad G| from the escape potential is below
``theta`` pixels.  Pixels that are strict local maxima of the potential are
never separators: those sit on preimages of poles, where the estimate is
meaningless.  Components are 4-connected runs of non-separator pixels;
holes are counted in the 8-connected complement.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import ndimage

from ._jit import set_threads
from .mapcore import MapParams, rat_eval
from .orbits import RadiiModel, raster_kernel

__all__ = [
    "SATURATED",
    "NONE",
    "EXTERIOR",
    "Window",
    "LabelGrid",
    "ComponentRecord",
    "ComponentTouchesFrame",
    "OriginInsideComponent",
    "RoleConflict",
    "rasterize",
    "measure_connectivity",
    "surrounds_origin",
    "bdd_mask",
    "representative",
    "representatives",
    "hole_labels",
    "to_rgb",
    "save_png",
    "tag_roles",
    "ROLES",
]

SATURATED = -1
NONE = 0
EXTERIOR = None
ROLES = ("A_INF", "TRAP_DOOR", "ANNULUS_A", "DISK_D", "U_NU", "GENERIC")
_EIGHT = np.ones((3, 3), dtype=bool)


class ComponentTouchesFrame(RuntimeError):
    pass


class OriginInsideComponent(RuntimeError):
    pass


class RoleConflict(RuntimeError):
    pass


@dataclass(frozen=True)
class Window:
    center: complex
    width: float
    height: float

    @classmethod
    def from_bounds(cls, x0: float, x1: float, y0: float, y1: float) -> "Window":
        return cls(complex((x0 + x1) / 2, (y0 + y1) / 2), x1 - x0, y1 - y0)

    @classmethod
    def square(cls, center: complex, half_width: float) -> "Window":
        return cls(complex(center), 2 * half_width, 2 * half_width)

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        c = self.center
        return (c.real - self.width / 2, c.real + self.width / 2,
                c.imag - self.height / 2, c.imag + self.height / 2)

    def contains(self, z: complex, margin: float = 0.0) -> bool:
        x0, x1, y0, y1 = self.bounds
        return x0 + margin <= z.real < x1 - margin and y0 + margin <= z.imag < y1 - margin


@dataclass
class LabelGrid:
    window: Window
    resolution: tuple[int, int]  # (px, py)
    escape_time: np.ndarray      # int32, SATURATED where the cap was hit
    component_id: np.ndarray     # int32, NONE on separators
    separator: np.ndarray        # bool
    n_components: int
    name: str = ""
    _stats: dict = field(default_factory=dict, repr=False)

    # -- geometry ----------------------------------------------------------
    @property
    def dx(self) -> float:
        return self.window.width / self.resolution[0]

    @property
    def dy(self) -> float:
        return self.window.height / self.resolution[1]

    def pixel_of(self, z: complex) -> Optional[tuple[int, int]]:
        x0, _, _, y1 = self.window.bounds
        j = math.floor((z.real - x0) / self.dx)
        i = math.floor((y1 - z.imag) / self.dy)
        if 0 <= i < self.resolution[1] and 0 <= j < self.resolution[0]:
            return i, j
        return None

    def point_of(self, i: int, j: int) -> complex:
        x0, _, _, y1 = self.window.bounds
        return complex(x0 + (j + 0.5) * self.dx, y1 - (i + 0.5) * self.dy)

    def label_at(self, z: complex) -> Optional[int]:
        ij = self.pixel_of(z)
        return None if ij is None else int(self.component_id[ij])

    # -- bulk statistics ---------------------------------------------------
    def sizes(self) -> np.ndarray:
        if "sizes" not in self._stats:
            self._stats["sizes"] = np.bincount(self.component_id.ravel(),
                                               minlength=self.n_components + 1)
        return self._stats["sizes"]

    def euler_holes(self) -> np.ndarray:
        """Holes per label from the Euler characteristic V - E + F of the
        4-connected pixel complex; one component has chi = 1 - holes."""
        if "holes" not in self._stats:
            lab = self.component_id
            m = self.n_components + 1
            V = np.bincount(lab.ravel(), minlength=m)
            h = lab[:, 1:] == lab[:, :-1]
            v = lab[1:, :] == lab[:-1, :]
            E = np.bincount(lab[:, 1:][h], minlength=m) + np.bincount(lab[1:, :][v], minlength=m)
            sq = (lab[1:, 1:] == lab[:-1, 1:]) & (lab[1:, 1:] == lab[1:, :-1]) & (lab[1:, 1:] == lab[:-1, :-1])
            F = np.bincount(lab[1:, 1:][sq], minlength=m)
            holes = 1 - (V - E + F)
            holes[0] = 0
            self._stats["holes"] = holes
        return self._stats["holes"]

    def frame_touch(self) -> np.ndarray:
        if "frame" not in self._stats:
            lab = self.component_id
            t = np.zeros(self.n_components + 1, dtype=bool)
            edge = np.concatenate([lab[0], lab[-1], lab[:, 0], lab[:, -1]])
            t[np.unique(edge)] = True
            t[0] = False
            self._stats["frame"] = t
        return self._stats["frame"]

    def slices(self):
        if "slices" not in self._stats:
            self._stats["slices"] = ndimage.find_objects(self.component_id)
        return self._stats["slices"]

    def mask_box(self, cid: int, pad: int = 1):
        """(padded boolean mask of the component, (row0, col0) of the box)."""
        sl = self.slices()[cid - 1]
        if sl is None:
            raise KeyError(cid)
        sub = self.component_id[sl] == cid
        return np.pad(sub, pad), (sl[0].start - pad, sl[1].start - pad)

    def bbox_complex(self, cid: int) -> tuple[complex, complex]:
        sl = self.slices()[cid - 1]
        a = self.point_of(sl[0].stop - 1, sl[1].start)
        b = self.point_of(sl[0].start, sl[1].stop - 1)
        return a, b


def rasterize(
    p: MapParams,
    window: Window,
    resolution,
    radii: RadiiModel | float,
    max_iter: int = 500,
    theta: float = 0.5,
    threads: Optional[int] = None,
    r_big: float = 1e10,
    name: str = "",
) -> LabelGrid:
    if isinstance(resolution, int):
        resolution = (resolution, resolution)
    px, py = int(resolution[0]), int(resolution[1])
    if px < 64 or py < 64:
        raise ValueError("resolution must be at least 64 x 64")
    K = radii.K_esc if isinstance(radii, RadiiModel) else float(radii)
    if threads is not None:
        set_threads(threads)
    x0, x1, y0, y1 = window.bounds
    dx, dy = (x1 - x0) / px, (y1 - y0) / py
    m = p.local_degree_inf
    logbn = math.log(abs(p.b_n)) if p.b_n != 0 else 0.0
    num, den = p.pair
    esc, pot, logd = raster_kernel(num, den, x0, y1, dx, dy, px, py, K, r_big,
                                   int(max_iter), m, logbn)
    sep = _separators(esc, pot, logd, math.log(theta * min(dx, dy)))
    lab, n = ndimage.label(~sep)
    return LabelGrid(window, (px, py), esc, lab.astype(np.int32), sep, int(n), name)


def _separators(esc, pot, logd, log_thresh):
    fp = np.pad(pot, 1, constant_values=-np.inf)
    ny, nx = pot.shape
    nb = np.full(pot.shape, -np.inf)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di or dj:
                np.maximum(nb, fp[1 + di:1 + di + ny, 1 + dj:1 + dj + nx], out=nb)
    peak = pot > nb
    return (esc == SATURATED) | ((logd < log_thresh) & ~peak)


def _complement_regions(mask: np.ndarray):
    """8-connected complement regions of a padded mask; returns
    (labels, count, set of labels touching the border)."""
    h, nh = ndimage.label(~mask, structure=_EIGHT)
    border = np.unique(np.concatenate([h[0], h[-1], h[:, 0], h[:, -1]]))
    return h, nh, set(int(b) for b in border if b)


def measure_connectivity(grid: LabelGrid, cid: int, strict: bool = False) -> int:
    """1 + number of bounded complement regions, by flood fill of the
    8-connected complement inside the component's padded bounding box."""
    if not (1 <= cid <= grid.n_components):
        raise KeyError(cid)
    if strict and grid.frame_touch()[cid]:
        raise ComponentTouchesFrame(f"component {cid} touches the frame; value is a lower bound")
    mask, _ = grid.mask_box(cid)
    if grid.frame_touch()[cid]:
        mask = _frame_extend(grid, cid)
    _, nh, border = _complement_regions(mask)
    return 1 + nh - len(border)


def _frame_extend(grid: LabelGrid, cid: int) -> np.ndarray:
    # complement regions that reach the window frame are not holes
    return np.pad(grid.component_id == cid, 1)


def hole_labels(grid: LabelGrid, cid: int):
    """Full-size label image of the bounded complement regions of ``cid``."""
    full = np.pad(grid.component_id == cid, 1)
    h, nh, border = _complement_regions(full)
    h = h[1:-1, 1:-1]
    keep = np.zeros(nh + 1, dtype=bool)
    keep[1:] = True
    for b in border:
        keep[b] = False
    h = np.where(keep[h], h, 0)
    return h


def surrounds_origin(grid: LabelGrid, cid: int) -> bool:
    ij = grid.pixel_of(0j)
    if ij is None:
        raise ValueError("origin is outside the window")
    if grid.component_id[ij] == cid:
        raise OriginInsideComponent(f"component {cid} contains the origin")
    mask, (r0, c0) = grid.mask_box(cid)
    i, j = ij[0] - r0, ij[1] - c0
    if not (0 <= i < mask.shape[0] and 0 <= j < mask.shape[1]):
        return False
    h, _, border = _complement_regions(mask)
    lab = int(h[i, j])
    return lab != 0 and lab not in border


def bdd_mask(grid: LabelGrid, cid: int) -> np.ndarray:
    """Pixels of the component together with everything it encloses."""
    return (grid.component_id == cid) | (hole_labels(grid, cid) > 0)


def representative(grid: LabelGrid, cid: int) -> complex:
    """Pixel of maximal city-block distance to the component's boundary."""
    mask, (r0, c0) = grid.mask_box(cid)
    dist = ndimage.distance_transform_cdt(mask, metric="taxicab")
    k = int(np.argmax(dist))
    i, j = divmod(k, mask.shape[1])
    return grid.point_of(i + r0, j + c0)


@dataclass
class ComponentRecord:
    id: int
    pixel_count: int
    connectivity: int
    surrounds_origin: bool
    role: str = "GENERIC"
    forward_target: Optional[int] = EXTERIOR
    representative: complex = 0j
    contains_origin: bool = False
    touches_frame: bool = False
    grid: str = ""
    zone: str = ""
    resolved: bool = True
    note: str = ""
    label_id: int = 0
    twin_connectivity: Optional[int] = None

    @property
    def key(self) -> tuple[str, int]:
        return (self.grid, self.id)


def _origin_label(grid: LabelGrid) -> Optional[int]:
    lab = grid.label_at(0j)
    return lab if lab else None


def _a_inf_label(grid: LabelGrid, p: MapParams, radii, guard: float) -> Optional[int]:
    """Frame component with the fastest-escaping border pixel whose orbit
    stays away from the small-scale region around the pole."""
    esc = grid.escape_time
    lab = grid.component_id
    border = np.concatenate([
        np.stack([np.zeros(esc.shape[1], int), np.arange(esc.shape[1])], 1),
        np.stack([np.full(esc.shape[1], esc.shape[0] - 1), np.arange(esc.shape[1])], 1),
        np.stack([np.arange(esc.shape[0]), np.zeros(esc.shape[0], int)], 1),
        np.stack([np.arange(esc.shape[0]), np.full(esc.shape[0], esc.shape[1] - 1)], 1),
    ])
    e = esc[border[:, 0], border[:, 1]].astype(np.int64)
    ok = (e >= 0) & (lab[border[:, 0], border[:, 1]] > 0)
    if not ok.any():
        return None
    cand = border[ok][np.argsort(e[ok], kind="stable")]
    K = radii.K_esc if isinstance(radii, RadiiModel) else float(radii)
    num, den = p.pair
    for i, j in cand[:16]:
        z = grid.point_of(int(i), int(j))
        low = abs(z)
        while abs(z) <= K:
            z = rat_eval(num, den, z)
            low = min(low, abs(z))
        if low > guard:
            return int(lab[i, j])
    return None


def tag_roles(
    grid: LabelGrid,
    p: MapParams,
    radii: RadiiModel | float,
    crit,
    min_pixels: int = 1,
    strict: bool = False,
) -> list[ComponentRecord]:
    """Records for every component of at least ``min_pixels`` pixels, with
    the structural roles that can be located on this grid."""
    sizes = grid.sizes()
    holes = grid.euler_holes()
    frame = grid.frame_touch()
    roles: dict[int, str] = {}
    conflicts: list[str] = []

    def put(cid, role):
        if not cid:
            return
        if cid in roles and roles[cid] != role:
            conflicts.append(f"{roles[cid]}/{role} on component {cid}")
            return
        roles[cid] = role

    guard = 0.0
    if isinstance(radii, RadiiModel) and p.lam != 0:
        guard = radii.r_outer
    put(_a_inf_label(grid, p, radii, guard), "A_INF")
    if p.lam != 0 and grid.window.contains(0j):
        put(_origin_label(grid), "TRAP_DOOR")
    ring = np.asarray(getattr(crit, "free_ring", []), dtype=complex)
    if ring.size:
        labs = [grid.label_at(complex(c)) for c in ring]
        labs = [x for x in labs if x]
        if labs:
            vals, cnt = np.unique(labs, return_counts=True)
            put(int(vals[np.argmax(cnt)]), "ANNULUS_A")
    if crit is not None:
        w = getattr(crit, "w_lambda", None)
        if w is not None and p.lam != 0 and grid.window.contains(complex(w)):
            put(grid.label_at(complex(w)), "DISK_D")
        nu = getattr(crit, "nu_lambda", None)
        if nu is not None and grid.window.contains(complex(nu)):
            put(grid.label_at(complex(nu)), "U_NU")
    if conflicts and strict:
        raise RoleConflict("; ".join(conflicts))

    origin_in = grid.window.contains(0j)
    o_lab = _origin_label(grid) if origin_in else None
    keep = set(np.nonzero(sizes >= min_pixels)[0].tolist()) | set(roles)
    keep.discard(0)
    ids = sorted(keep)
    reps = representatives(grid, ids)
    ray = ray_candidates(grid) if origin_in else set()
    num, den = p.pair
    out = []
    for cid, rep in zip(ids, reps):
        kappa = int(holes[cid]) + 1
        role = roles.get(cid, "GENERIC")
        if role == "A_INF":
            # a component containing infinity has one boundary curve per hole
            kappa = int(holes[cid])
        surr = cid in ray and cid != o_lab and surrounds_origin(grid, cid)
        img = complex(rat_eval(num, den, rep))
        tgt = grid.label_at(img) if np.isfinite(img) else None
        out.append(ComponentRecord(
            id=int(cid),
            pixel_count=int(sizes[cid]),
            connectivity=kappa,
            surrounds_origin=bool(surr),
            role=role,
            forward_target=tgt if tgt else EXTERIOR,
            representative=rep,
            contains_origin=(cid == o_lab),
            touches_frame=bool(frame[cid]),
            grid=grid.name,
            note="; ".join(conflicts) if conflicts and cid in roles else "",
            label_id=int(cid),
        ))
    return out


def ray_candidates(grid: LabelGrid) -> set:
    """Labels met by the horizontal ray from the origin pixel to the right
    frame edge; only these can surround the origin."""
    ij = grid.pixel_of(0j)
    if ij is None:
        return set()
    row = grid.component_id[ij[0], ij[1]:]
    return set(int(x) for x in np.unique(row) if x)


def representatives(grid: LabelGrid, ids) -> list[complex]:
    """Deepest pixel (city-block metric) of each listed component.

    Different labels are never 4-adjacent, so the distance to the nearest
    separator or frame pixel is the distance to the component's own boundary.
    """
    if "cdt" not in grid._stats:
        free = np.pad(grid.component_id > 0, 1)
        grid._stats["cdt"] = ndimage.distance_transform_cdt(free, metric="taxicab")[1:-1, 1:-1]
    dist = grid._stats["cdt"]
    if len(ids) == 0:
        return []
    pos = ndimage.maximum_position(dist, grid.component_id, list(ids))
    return [grid.point_of(int(i), int(j)) for i, j in pos]


# ---------------------------------------------------------------------------
# images

def _cyclic(t: np.ndarray) -> np.ndarray:
    ph = (t % 32) / 32.0 * 2 * np.pi
    rgb = np.stack([0.5 + 0.5 * np.cos(ph), 0.5 + 0.5 * np.cos(ph - 2.1), 0.5 + 0.5 * np.cos(ph + 2.1)], -1)
    return (40 + 215 * rgb).astype(np.uint8)


def to_rgb(grid: LabelGrid, by_component: bool = False) -> np.ndarray:
    """8-bit RGB image: cyclic escape-time colours, separators black."""
    if by_component:
        ids = grid.component_id.astype(np.uint64)
        h = (ids * np.uint64(2654435761)) % np.uint64(2 ** 24)
        img = np.stack([(h >> np.uint64(16)) & np.uint64(255), (h >> np.uint64(8)) & np.uint64(255),
                        h & np.uint64(255)], -1).astype(np.uint8)
        img = np.maximum(img, 50)
    else:
        img = _cyclic(np.maximum(grid.escape_time, 0))
    img[grid.separator] = 0
    return img


def save_png(grid: LabelGrid, path, by_component: bool = False) -> None:
    from PIL import Image

    Image.fromarray(to_rgb(grid, by_component), mode="RGB").save(path, format="PNG", optimize=False)
