"""Scene configuration, presets, and the end-to-end evaluation pipeline.

A scene bundles the two bulk masses, the gap, the window sizes, the smooth
step profile and the (U, V) geometry; presets encode the standard
interface geometries (straight half-planes, the three-crossing overhang,
the far-side measurement pair, the strip with perpendicular measurement,
a bounded loop, and a two-component set).

`evaluate_scene` runs geometry -> gap check -> eigendecompositions ->
conductances -> bulk-edge residuals, reusing periodic bulk eigensystems
across scenes (they depend only on (u, L)).
"""

from __future__ import annotations

import configparser
import io
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .conductance import (ConductanceReport, TraceWindow, edge_conductance,
                          edge_kernel_diagonal, geometric_bulk_conductance,
                          hall_conductance, kuv_diagonal, KernelField)
from .geometry import (DiscreteSet, Empty, HalfPlane, IntersectionReport,
                       TransversalityReport, VStrip, good_set_boundary,
                       intersection_number, parse_tail, transversality_profile)
from .lattice import (BoxWindow, EdgeGlueSpec, GapSpec, OperatorMatrix,
                      build_edge_hamiltonian, build_qwz, spectral_gap_check)
from .spectral import (EigenSystem, SmoothStep, SpectralProjector, diagonalize,
                       fermi_projector)

__all__ = [
    "SceneConfig",
    "SceneResult",
    "PRESETS",
    "preset_sets",
    "encode_membership",
    "decode_membership",
    "read_scene_config",
    "write_scene_config",
    "evaluate_scene",
    "bulk_eigensystem",
]


# -- presets ----------------------------------------------------------------

def _halfplanes(L):
    return (DiscreteSet.from_tail(L, HalfPlane(0, 1, 0)),
            DiscreteSet.from_tail(L, HalfPlane(1, 0, 0)))


def _fig1(L):
    # lower half-plane with an overhanging cap: the boundary is one path
    # crossing the measurement boundary three times (+1 - 1 - 1 = -1)
    U = DiscreteSet.from_tail(L, HalfPlane(0, -1, -1))
    U = U.with_block((4, 5), (1, 2)).with_block((-2, 5), (3, 5))
    return U, DiscreteSet.from_tail(L, HalfPlane(1, 0, 0))


def _fig2a(L):
    # half-plane interface plus a decorative bounded loop: each boundary
    # component carries its own current; V sits on the +x1 far side
    U = DiscreteSet.from_tail(L, HalfPlane(0, 1, 0)).with_block((-10, -8), (-10, -8))
    return U, DiscreteSet.from_tail(L, HalfPlane(1, 0, 0))


def _fig2b(L):
    U, _ = _fig2a(L)
    return U, DiscreteSet.from_tail(L, HalfPlane(-1, 0, 1))   # x1 <= -2


def _fig2c(L):
    # strip with perpendicular measurement set: the two interface currents
    # cross V in opposite directions
    return (DiscreteSet.from_tail(L, VStrip(-4, 4, True)),
            DiscreteSet.from_tail(L, HalfPlane(0, 1, 0)))


def _loop(L):
    return (DiscreteSet.from_tail(L, Empty()).with_block((-2, 2), (-2, 2)),
            DiscreteSet.from_tail(L, HalfPlane(1, 0, 0)))


def _two_component(L):
    U = DiscreteSet.from_tail(L, HalfPlane(0, 1, 0)).with_block((8, 10), (-10, -8))
    return U, DiscreteSet.from_tail(L, HalfPlane(1, 0, 0))


PRESETS = {
    "HALFPLANES": (_halfplanes, +1, 8),
    "FIG1": (_fig1, -1, 9),
    "FIG2A": (_fig2a, +1, 12),
    "FIG2B": (_fig2b, -1, 12),
    "FIG2C": (_fig2c, 0, 8),
    "LOOP": (_loop, 0, 6),
    "TWO_COMPONENT": (_two_component, +1, 12),
}


def preset_sets(name: str, L: int) -> tuple[DiscreteSet, DiscreteSet]:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; have {sorted(PRESETS)}")
    builder, _, min_L = PRESETS[name]
    if L < min_L:
        raise ValueError(f"preset {name} needs L >= {min_L}")
    return builder(L)


# -- configuration ----------------------------------------------------------

@dataclass(frozen=True)
class SceneConfig:
    scene_id: str = "scene"
    preset: str | None = "HALFPLANES"
    u_plus: float = 1.0
    u_minus: float = 3.0
    nu: float = 0.3
    fermi: float = 0.0
    g_minus: float = -0.5
    g_plus: float = 0.5
    half_width: int = 15
    inner_half_width: int = 7
    rho_profile: str = "exp"
    transversality_c: float = 0.2
    seed: int = 0
    u_tail: str | None = None
    u_grid: str | None = None
    v_tail: str | None = None
    v_grid: str | None = None

    def validate(self) -> "SceneConfig":
        if not 0 < self.inner_half_width < self.half_width:
            raise ValueError(
                f"field inner_half_width: need 0 < W < L, got W={self.inner_half_width}, "
                f"L={self.half_width}")
        if self.half_width - self.inner_half_width < 4:
            raise ValueError("field inner_half_width: buffer L - W must be >= 4")
        if not self.g_minus < self.fermi < self.g_plus:
            raise ValueError("field fermi: must lie inside (g_minus, g_plus)")
        if self.rho_profile not in ("exp", "quintic"):
            raise ValueError(f"field rho_profile: unknown profile {self.rho_profile}")
        if self.preset is None and (self.u_tail is None or self.v_tail is None):
            raise ValueError("field preset: no preset and no explicit geometry")
        if self.preset is not None and self.preset not in PRESETS:
            raise ValueError(f"field preset: unknown preset {self.preset!r}")
        return self

    def build_sets(self) -> tuple[DiscreteSet, DiscreteSet]:
        if self.preset is not None:
            return preset_sets(self.preset, self.half_width)
        L = self.half_width
        out = []
        for tail_text, grid_text in ((self.u_tail, self.u_grid),
                                     (self.v_tail, self.v_grid)):
            tail = parse_tail(tail_text)
            if grid_text is None:
                out.append(DiscreteSet.from_tail(L, tail))
            else:
                out.append(DiscreteSet(L, decode_membership(grid_text, L), tail))
        return out[0], out[1]


def encode_membership(grid: np.ndarray) -> str:
    """Run-length encode rows (x1 = -L..L), runs as count x value."""
    rows = []
    for row in grid.astype(int):
        runs = []
        val, count = int(row[0]), 0
        for v in row:
            if int(v) == val:
                count += 1
            else:
                runs.append(f"{count}x{val}")
                val, count = int(v), 1
        runs.append(f"{count}x{val}")
        rows.append(" ".join(runs))
    return ";".join(rows)


def decode_membership(text: str, half_width: int) -> np.ndarray:
    n = 2 * half_width + 1
    rows = text.strip().split(";")
    if len(rows) != n:
        raise ValueError(f"grid has {len(rows)} rows, window needs {n}")
    grid = np.zeros((n, n), dtype=bool)
    for i, row in enumerate(rows):
        out = []
        for run in row.split():
            count, val = run.split("x")
            out.extend([bool(int(val))] * int(count))
        if len(out) != n:
            raise ValueError(f"grid row {i} has {len(out)} sites, needs {n}")
        grid[i] = out
    return grid


_FIELD_MAP = {
    ("scene", "id"): ("scene_id", str),
    ("scene", "preset"): ("preset", str),
    ("scene", "transversality_c"): ("transversality_c", float),
    ("scene", "seed"): ("seed", int),
    ("model", "u_plus"): ("u_plus", float),
    ("model", "u_minus"): ("u_minus", float),
    ("model", "nu"): ("nu", float),
    ("gap", "fermi"): ("fermi", float),
    ("gap", "g_minus"): ("g_minus", float),
    ("gap", "g_plus"): ("g_plus", float),
    ("window", "L"): ("half_width", int),
    ("window", "W"): ("inner_half_width", int),
    ("rho", "profile"): ("rho_profile", str),
    ("geometry.U", "tail"): ("u_tail", str),
    ("geometry.U", "grid"): ("u_grid", str),
    ("geometry.V", "tail"): ("v_tail", str),
    ("geometry.V", "grid"): ("v_grid", str),
}


def read_scene_config(text: str) -> SceneConfig:
    parser = configparser.ConfigParser()
    parser.read_string(text)
    kwargs = {}
    for (section, key), (name, cast) in _FIELD_MAP.items():
        if parser.has_option(section, key):
            raw = parser.get(section, key)
            kwargs[name] = cast(raw)
    if kwargs.get("preset", "").upper() == "NONE":
        kwargs["preset"] = None
    cfg = SceneConfig(**kwargs)
    if "preset" not in kwargs and (kwargs.get("u_tail") or kwargs.get("v_tail")):
        cfg = replace(cfg, preset=None)
    return cfg.validate()


def write_scene_config(cfg: SceneConfig) -> str:
    parser = configparser.ConfigParser()
    values = {
        "scene": {"id": cfg.scene_id,
                  "preset": cfg.preset if cfg.preset else "NONE",
                  "transversality_c": repr(cfg.transversality_c),
                  "seed": str(cfg.seed)},
        "model": {"u_plus": repr(cfg.u_plus), "u_minus": repr(cfg.u_minus),
                  "nu": repr(cfg.nu)},
        "gap": {"fermi": repr(cfg.fermi), "g_minus": repr(cfg.g_minus),
                "g_plus": repr(cfg.g_plus)},
        "window": {"L": str(cfg.half_width), "W": str(cfg.inner_half_width)},
        "rho": {"profile": cfg.rho_profile},
    }
    if cfg.preset is None:
        values["geometry.U"] = {"tail": cfg.u_tail}
        if cfg.u_grid:
            values["geometry.U"]["grid"] = cfg.u_grid
        values["geometry.V"] = {"tail": cfg.v_tail}
        if cfg.v_grid:
            values["geometry.V"]["grid"] = cfg.v_grid
    parser.read_dict(values)
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


# -- pipeline ---------------------------------------------------------------

_EIG_CACHE: dict[tuple, EigenSystem] = {}


def bulk_eigensystem(u: float, half_width: int, nu: float = 0.3) -> EigenSystem:
    """Eigensystem of the torus-closed bulk model, cached across scenes."""
    key = (float(u), int(half_width), float(nu))
    if key not in _EIG_CACHE:
        H = build_qwz(u, BoxWindow(half_width, 2), periodic=True, nu=nu)
        _EIG_CACHE[key] = diagonalize(H)
    return _EIG_CACHE[key]


@dataclass(frozen=True)
class SceneResult:
    config: SceneConfig
    chi: IntersectionReport
    transversality: TransversalityReport
    gap_ok: bool
    sigma_b_plus: ConductanceReport
    sigma_b_minus: ConductanceReport
    sigma_b_uv_plus: ConductanceReport
    sigma_b_uv_minus: ConductanceReport
    sigma_e: ConductanceReport
    sigma_e_alt_profile: ConductanceReport
    residual_chi: float
    residual_equality: float
    kernel_field: KernelField
    edge_field: KernelField
    timings: dict[str, float] = field(default_factory=dict)

    def conductance_rows(self):
        for rep in (self.sigma_b_plus, self.sigma_b_minus, self.sigma_b_uv_plus,
                    self.sigma_b_uv_minus, self.sigma_e, self.sigma_e_alt_profile):
            yield rep


def evaluate_scene(cfg: SceneConfig) -> SceneResult:
    """Run the full pipeline on one scene; raises with the failing stage in
    the message."""
    cfg = cfg.validate()
    timings: dict[str, float] = {}
    t = time.perf_counter

    def mark(stage, t0):
        timings[stage] = time.perf_counter() - t0

    # geometry
    t0 = t()
    U, V = cfg.build_sets()
    chi = intersection_number(U, V)
    trans = transversality_profile(U, V, cfg.transversality_c)
    if not trans.verdict:
        raise ValueError(
            f"stage geometry: transversality diagnostic failed at "
            f"c={cfg.transversality_c} (estimate {trans.exponent_estimate:.3f})")
    mark("geometry", t0)

    # lattice + gap
    t0 = t()
    w = BoxWindow(cfg.half_width, 2)
    gap = GapSpec(cfg.fermi, cfg.g_minus, cfg.g_plus)
    H_plus = build_qwz(cfg.u_plus, w, nu=cfg.nu)
    H_minus = build_qwz(cfg.u_minus, w, nu=cfg.nu)
    if not spectral_gap_check([H_plus, H_minus], gap):
        raise ValueError("stage lattice: joint spectral gap check failed")
    He = build_edge_hamiltonian(EdgeGlueSpec(H_plus, H_minus, U))
    mark("lattice", t0)

    # spectral
    t0 = t()
    eig_p = bulk_eigensystem(cfg.u_plus, cfg.half_width, cfg.nu)
    eig_m = bulk_eigensystem(cfg.u_minus, cfg.half_width, cfg.nu)
    P_plus = fermi_projector(eig_p, cfg.fermi)
    P_minus = fermi_projector(eig_m, cfg.fermi)
    eig_e = diagonalize(He)
    step = SmoothStep(cfg.g_minus, cfg.g_plus, cfg.rho_profile)
    alt = SmoothStep(cfg.g_minus, cfg.g_plus,
                     "quintic" if cfg.rho_profile == "exp" else "exp")
    mark("spectral", t0)

    # conductances
    t0 = t()
    tw = TraceWindow.for_box(cfg.half_width, cfg.inner_half_width)
    sb_p = hall_conductance(P_plus, tw)
    sb_m = hall_conductance(P_minus, tw)
    guv_p = geometric_bulk_conductance(P_plus, U, V, tw)
    guv_m = geometric_bulk_conductance(P_minus, U, V, tw, center=guv_p.center)
    kernel_field = kuv_diagonal(P_plus, U, V)
    edge_field = edge_kernel_diagonal(He, step, V, eig_e)
    se = edge_conductance(He, step, V, tw, eig=eig_e)
    se_alt = edge_conductance(He, alt, V, tw, eig=eig_e)
    mark("conductance", t0)

    from .conductance import bec_residual
    r_chi, r_eq = bec_residual(se.value, chi.total, sb_p.value, sb_m.value,
                               guv_p.value, guv_m.value)
    return SceneResult(cfg, chi, trans, True, sb_p, sb_m, guv_p, guv_m,
                       se, se_alt, r_chi, r_eq, kernel_field, edge_field,
                       timings)
