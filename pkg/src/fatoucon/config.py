"""Flat ``key = value`` run configuration.

Grammar: one assignment per line, ``#`` starts a comment, blank lines are
ignored, keys are unique.  Lists are comma separated.  Keys::

    name            free-form label
    n, d            integers
    a_re, a_im      the parameter a
    q_re, q_im      coefficients b_0..b_k of Q, ascending (q_im optional)
    lambda_re, lambda_im
    window          global window as cx,cy,w,h (auto when absent)
    ring_window     auto | cx,cy,w,h
    extra_windows   semicolon-separated list of cx,cy,w,h
    resolution      pixels per side
    max_iter        iteration cap of the raster
    theta           separator threshold in pixels
    min_pixels      size needed for a component to count as resolved
    K1              trap radius constant
    out_dir         output directory
    search_t_hi, search_t_lo, search_ray_angle, search_scan_resolution
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .mapcore import InvalidParams, MapParams
from .raster import Window

__all__ = ["ConfigError", "RunConfig", "load_config", "parse_config", "parse_window"]


class ConfigError(ValueError):
    pass


def parse_window(text: str) -> Window:
    try:
        cx, cy, w, h = (float(x) for x in text.split(","))
    except ValueError as ex:
        raise ConfigError(f"window must be cx,cy,w,h: {text!r}") from ex
    if not (w > 0 and h > 0):
        raise ConfigError("window width and height must be positive")
    return Window(complex(cx, cy), w, h)


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


@dataclass
class RunConfig:
    n: int
    d: int
    a_re: float
    a_im: float = 0.0
    q_re: tuple = (1.0,)
    q_im: tuple = ()
    lambda_re: float = 0.0
    lambda_im: float = 0.0
    name: str = ""
    window: Optional[str] = None
    ring_window: str = "auto"
    extra_windows: str = ""
    resolution: int = 1024
    max_iter: int = 500
    theta: float = 0.5
    min_pixels: int = 10_000
    K1: float = 1.0
    out_dir: str = "out"
    search_t_hi: float = 1e-6
    search_t_lo: float = 1e-12
    search_ray_angle: Optional[float] = None
    search_scan_resolution: int = 512
    source: str = field(default="", compare=False)

    @property
    def a(self) -> complex:
        return complex(self.a_re, self.a_im)

    @property
    def lam(self) -> complex:
        return complex(self.lambda_re, self.lambda_im)

    @property
    def q(self) -> tuple:
        im = tuple(self.q_im) + (0.0,) * (len(self.q_re) - len(self.q_im))
        if len(im) > len(self.q_re):
            raise ConfigError("q_im is longer than q_re")
        return tuple(complex(r, i) for r, i in zip(self.q_re, im))

    def params(self) -> MapParams:
        try:
            return MapParams(self.n, self.d, self.a, self.q, self.lam)
        except InvalidParams as ex:
            raise ConfigError(str(ex)) from ex

    def global_window(self) -> Optional[Window]:
        return parse_window(self.window) if self.window else None

    def ring_window_spec(self) -> Optional[Window]:
        return None if self.ring_window == "auto" else parse_window(self.ring_window)

    def extra(self) -> tuple:
        return tuple(parse_window(w) for w in self.extra_windows.split(";") if w.strip())

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("source")
        return d


_INT = {"n", "d", "resolution", "max_iter", "min_pixels", "search_scan_resolution"}
_FLOAT = {"a_re", "a_im", "lambda_re", "lambda_im", "theta", "K1", "search_t_hi", "search_t_lo",
          "search_ray_angle"}
_LIST = {"q_re", "q_im"}
_STR = {"name", "window", "ring_window", "extra_windows", "out_dir"}
_KEYS = _INT | _FLOAT | _LIST | _STR
_REQUIRED = {"n", "d", "a_re"}


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    vals: dict = {}
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{no}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"{source}:{no}: unknown key {key!r}")
        if key in vals:
            raise ConfigError(f"{source}:{no}: duplicate key {key!r}")
        try:
            if key in _INT:
                vals[key] = int(val)
            elif key in _FLOAT:
                x = float(val)
                if not math.isfinite(x):
                    raise ValueError(val)
                vals[key] = x
            elif key in _LIST:
                vals[key] = _floats(val)
            else:
                vals[key] = val
        except ValueError as ex:
            raise ConfigError(f"{source}:{no}: bad value for {key}: {val!r}") from ex
    missing = _REQUIRED - set(vals)
    if missing:
        raise ConfigError(f"{source}: missing keys {sorted(missing)}")
    cfg = RunConfig(**vals, source=source)
    cfg.params()  # validates the map parameters
    for w in (cfg.window,):
        if w:
            parse_window(w)
    cfg.ring_window_spec()
    cfg.extra()
    if cfg.resolution < 64:
        raise ConfigError("resolution must be at least 64")
    return cfg


def load_config(path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as ex:
        raise ConfigError(f"cannot read {p}: {ex}") from ex
    return parse_config(text, str(p))
