"""Grid quantization of continuous-time nondeterministic systems.

A system is an axis-aligned box domain with a grid of pitch eta; each grid
cell carries a motion mode (nominal heading and speed with bounded
disturbance).  Atomic propositions are regions given as unions of
conjunctions of axis-aligned half-spaces.

The symbolic model has one state per grid cell.  A transition (q, o, q')
exists when q' intersects the one-step reachable box of q, labeled with
every observation map compatible with the cell classification of the APs
at the start (cell q) and at the end (cell q') of the step.
"""
from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import dataclass, field

import numpy as np

from .observations import OBS, ChoppingError, MultiChange, UndefinedSlice

__all__ = [
    "Mode", "SystemSpec", "SymbolicModel", "TauValidation",
    "TauValidationError", "OutOfDomainError",
    "gamma", "rho_Z", "rho_E", "reach_box", "build_symbolic_model",
    "validate_tau", "simulate_trajectory",
    "system_spec_to_json", "system_spec_from_json",
    "symbolic_model_to_json", "symbolic_model_from_json",
    "region_contains", "box_vs_region",
    "SINK",
]

# the out-of-domain sink state (demonic: all observations possible)
SINK = "out"


class OutOfDomainError(ValueError):
    pass


class TauValidationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Regions: unions of conjunctions of axis-aligned half-spaces.
# A conjunct is a tuple of (axis, op, threshold) with op in {"le", "ge"}.

def region_contains(region, x):
    for conj in region:
        if all((x[a] <= c if op == "le" else x[a] >= c)
               for a, op, c in conj):
            return True
    return False


def region_contains_np(region, pts):
    """Vectorized membership for an (n_points, dim) array."""
    out = np.zeros(len(pts), dtype=bool)
    for conj in region:
        m = np.ones(len(pts), dtype=bool)
        for a, op, c in conj:
            m &= (pts[:, a] <= c) if op == "le" else (pts[:, a] >= c)
        out |= m
    return out


def box_vs_region(region, box):
    """Classify a closed box against a region: '+' if contained, '-' if
    disjoint, '?' otherwise.

    Containment is certified conjunct-wise (the box lies inside a single
    conjunct); disjointness is exact.
    """
    contained = False
    disjoint = True
    for conj in region:
        inside = True
        empty = False
        for a, op, c in conj:
            lo, hi = box[a]
            if op == "le":
                if hi > c:
                    inside = False
                if lo > c:
                    empty = True
            else:
                if lo < c:
                    inside = False
                if hi < c:
                    empty = True
        if inside:
            contained = True
        if not empty:
            disjoint = False
    if contained:
        return "+"
    if disjoint:
        return "-"
    return "?"


# ---------------------------------------------------------------------------
# System specification

@dataclass(frozen=True)
class Mode:
    """Constant-velocity motion mode with bounded disturbance.

    Angular form: speed in [v-ev, v+ev], heading in [theta-etheta,
    theta+etheta] (2-D; 1-D uses the cosine only).  Vector form: nominal
    velocity ``u`` with per-axis deviation ``du``.
    """
    v: float = 0.0
    ev: float = 0.0
    theta: float = 0.0
    etheta: float = 0.0
    u: tuple = None   # vector form when not None
    du: tuple = None

    @property
    def v_max(self):
        if self.u is not None:
            du = self.du or (0.0,) * len(self.u)
            return max(abs(ui) + dui for ui, dui in zip(self.u, du))
        return self.v + self.ev


@dataclass(frozen=True)
class SystemSpec:
    dim: int
    domain: tuple           # ((lo, hi), ...) per axis
    eta: float
    tau: float
    x_in: tuple
    modes: dict             # name -> Mode; must contain "default"
    field: object           # field spec: see mode_for_cell
    ap_regions: dict        # ap name -> region

    def __post_init__(self):
        if self.eta <= 0 or self.tau <= 0:
            raise ValueError("eta and tau must be positive")
        for m in self.modes.values():
            if m.u is None and m.v - m.ev < 0:
                raise ValueError("speed deviation exceeds nominal speed")
        for a in range(self.dim):
            if not (self.domain[a][0] <= self.x_in[a] <= self.domain[a][1]):
                raise ValueError("x_in outside the domain")

    def grid_range(self, axis):
        lo, hi = self.domain[axis]
        kmin = math.ceil(lo / self.eta - 1e-9)
        kmax = math.floor(hi / self.eta + 1e-9)
        return kmin, kmax

    def cells(self):
        ranges = [range(*(lambda r: (r[0], r[1] + 1))(self.grid_range(a)))
                  for a in range(self.dim)]
        return [tuple(c) for c in itertools.product(*ranges)]

    def center(self, cell):
        return tuple(k * self.eta for k in cell)

    def cell_box(self, cell):
        h = self.eta / 2
        return [(k * self.eta - h, k * self.eta + h) for k in cell]


def mode_for_cell(spec, cell):
    """Resolve the motion mode of a cell from the field specification.

    Field forms:
      * a string naming a mode ("default", ...): uniform field;
      * {"kind": "table", "cells": {cell: mode name}, "default": name};
      * {"kind": "patrol", ...}: the built-in drone patrol field (2-D),
        parameterized by the band rows/columns (see ``patrol_theta``).
    """
    if isinstance(spec.field, str):
        return spec.modes[spec.field]
    kind = spec.field.get("kind")
    if kind == "table":
        name = spec.field["cells"].get(
            tuple(cell), spec.field.get("default", "default"))
        return spec.modes[name]
    if kind == "patrol":
        base = spec.modes["default"]
        theta = patrol_theta(cell, spec.field)
        return Mode(v=base.v, ev=base.ev, theta=theta, etheta=base.etheta)
    raise ValueError(f"mode undefined for cell {cell}: bad field spec")


def patrol_theta(cell, params):
    """Counter-clockwise patrol heading for the drone scenario.

    The drone circulates in the horizontal band above the lowest region
    boundary it must never cross mid-flight: east along rows 13-15, south
    at the right edge, west along rows 7-11, north at the left edge.
    Corridor rows use slightly tilted headings that steer drifting
    trajectories back toward the corridor center, so the band is invariant
    under the disturbance and no step can leave the domain or cross the
    forbidden boundary.
    """
    cx, cy = cell
    xleft = params.get("xleft", -11)
    xright = params.get("xright", 11)
    tilt = params.get("tilt", 0.1)
    strong = params.get("strong", 0.25)
    N, S, E, W = math.pi / 2, -math.pi / 2, 0.0, math.pi
    if cy <= 6:
        return N
    if cy >= 16:
        return S
    if cx <= xleft:
        if cy <= 10:
            return N - strong if cx <= -16 else N
        if cy <= 12:
            return E + strong
    if cx >= xright and cy >= 12:
        return S - strong if cx >= 16 else S
    if cy == 15:
        return E - strong
    if cy == 14:
        return E - tilt
    if cy == 13:
        return E + tilt
    if cy == 12:
        return E + strong
    if cy in (10, 11):
        return W + strong
    if cy == 9:
        return W + tilt
    if cy == 8:
        return W - tilt
    return W - strong


def _angle_candidates(theta, etheta):
    cands = [theta - etheta, theta + etheta]
    # axis-extremal headings inside the interval
    k_lo = math.ceil((theta - etheta) / (math.pi / 2) - 1e-12)
    k_hi = math.floor((theta + etheta) / (math.pi / 2) + 1e-12)
    for k in range(k_lo, k_hi + 1):
        cands.append(k * math.pi / 2)
    return cands


def velocity_extents(mode, dim):
    """Per-axis [min, max] of the admissible velocity set."""
    if mode.u is not None:
        du = mode.du or (0.0,) * dim
        return [(mode.u[a] - du[a], mode.u[a] + du[a]) for a in range(dim)]
    out = []
    betas = _angle_candidates(mode.theta, mode.etheta)
    speeds = (mode.v - mode.ev, mode.v + mode.ev)
    for a in range(dim):
        trig = math.cos if a == 0 else math.sin
        vals = [s * trig(b) for b in betas for s in speeds]
        out.append((min(vals), max(vals)))
    return out


# ---------------------------------------------------------------------------
# Core operations

def gamma(x, spec):
    """Nearest grid cell (infinity norm); coordinate ties round half-up.
    The result is clamped to the grid, so boundary points map to the
    nearest existing cell."""
    cell = []
    for a in range(spec.dim):
        lo, hi = spec.domain[a]
        if not (lo - 1e-9 <= x[a] <= hi + 1e-9):
            raise OutOfDomainError(f"point {tuple(x)} outside the domain")
        k = math.floor(x[a] / spec.eta + 0.5)
        kmin, kmax = spec.grid_range(a)
        cell.append(min(max(k, kmin), kmax))
    return tuple(cell)


def _rho_cell(spec, cell, ap):
    if cell == SINK:
        return "?"
    return box_vs_region(spec.ap_regions[ap], spec.cell_box(cell))


def rho_Z(spec, q, q2, p):
    """Cell classification of p at the start of the step (depends on q)."""
    return _rho_cell(spec, q, p)


def rho_E(spec, q, q2, p):
    """Cell classification of p at the end of the step (depends on q')."""
    return _rho_cell(spec, q2, p)


_P_Z = {"+": frozenset("AZ"), "-": frozenset("EN"), "?": frozenset(OBS)}
_P_E = {"+": frozenset("AE"), "-": frozenset("ZN"), "?": frozenset(OBS)}


def reach_box(spec, cell):
    """Box over-approximation of the states reachable from the cell box in
    one step of duration tau (cell box Minkowski-summed with tau times the
    velocity extent box).  Returns (box, exits_domain)."""
    mode = mode_for_cell(spec, cell)
    ext = velocity_extents(mode, spec.dim)
    box = []
    exits = False
    for a in range(spec.dim):
        lo, hi = spec.cell_box(cell)[a]
        blo = lo + spec.tau * ext[a][0]
        bhi = hi + spec.tau * ext[a][1]
        dlo, dhi = spec.domain[a]
        if blo < dlo - 1e-9 or bhi > dhi + 1e-9:
            exits = True
        box.append((blo, bhi))
    return box, exits


@dataclass(frozen=True)
class TauValidation:
    tau: float
    v_max: float
    distances: dict        # (p, p') -> boundary distance (math.inf allowed)
    tau_max: float
    passed: bool
    shared_boundaries: tuple  # ((p, p', axis, threshold), ...)


def _ap_thresholds(region):
    """Thresholds per axis appearing in a region's half-space boundaries."""
    out = {}
    for conj in region:
        for a, _, c in conj:
            out.setdefault(a, set()).add(c)
    return out


def validate_tau(spec, tracked_aps=None):
    """Check tau against the minimum AP boundary separation.

    The distance between two APs' boundaries is the smallest strictly
    positive gap between their half-space thresholds on a shared axis
    (+inf when they have none).  Coincident thresholds between distinct
    APs are reported as shared boundaries (warnings): along such a
    boundary two APs flip at the same instant, which the single-change
    assumption tolerates only where the boundary pieces do not actually
    overlap on a trajectory.
    """
    aps = sorted(tracked_aps if tracked_aps is not None else
                 spec.ap_regions.keys())
    v_max = max((mode_for_cell(spec, c).v_max for c in spec.cells()),
                default=0.0)
    thr = {p: _ap_thresholds(spec.ap_regions[p]) for p in aps}
    distances = {}
    shared = []
    for i, p in enumerate(aps):
        for p2 in aps[i + 1:]:
            best = math.inf
            for a in set(thr[p]) & set(thr[p2]):
                for c1 in thr[p][a]:
                    for c2 in thr[p2][a]:
                        gap = abs(c1 - c2)
                        if gap < 1e-12:
                            shared.append((p, p2, a, c1))
                        elif gap < best:
                            best = gap
            distances[(p, p2)] = best
    tau_max = (min(distances.values()) / v_max
               if distances and v_max > 0 else math.inf)
    return TauValidation(spec.tau, v_max, distances, tau_max,
                         spec.tau <= tau_max, tuple(sorted(set(shared))))


@dataclass(frozen=True)
class SymbolicModel:
    aps: tuple
    states: tuple             # grid cells; the sink (if any) is extra
    q_in: tuple
    transitions: dict         # state -> tuple of (label, successor)
    has_sink: bool
    eta: float = None
    tau: float = None

    @property
    def n_states(self):
        return len(self.states)

    def edges(self):
        for q, outs in self.transitions.items():
            for o, q2 in outs:
                yield q, o, q2


def _labels_for(start_sets, end_sets, aps, drop_multi_change):
    per_ap = []
    for p in aps:
        allowed = start_sets[p] & end_sets[p]
        if not allowed:
            return []
        per_ap.append(sorted(allowed))
    out = []
    for combo in itertools.product(*per_ap):
        if drop_multi_change and \
                sum(1 for o in combo if o in ("Z", "E")) > 1:
            continue
        out.append(tuple(zip(aps, combo)))
    return out


def build_symbolic_model(spec, tracked_aps=None, drop_multi_change=True,
                         force=False):
    """Quantize the system into a finite symbolic model.

    States are the grid cells; cells whose reachable box exits the domain
    additionally transition to a demonic sink with unconstrained end
    observations.  Labels with two changing APs are dropped by default
    (single-change assumption; pass drop_multi_change=False to keep them).
    Requires a passing validate_tau unless ``force``.
    """
    aps = tuple(sorted(tracked_aps if tracked_aps is not None else
                       spec.ap_regions.keys()))
    for p in aps:
        if p not in spec.ap_regions:
            raise ValueError(f"no region for tracked AP {p!r}")
    # tau soundness depends on the geometry of every AP region in the
    # spec, not only the tracked ones
    tv = validate_tau(spec)
    if not tv.passed and not force:
        raise TauValidationError(
            f"tau={spec.tau} exceeds tau_max={tv.tau_max:.6g} "
            f"(v_max={tv.v_max}); pass force=True to override")

    cells = spec.cells()
    cell_set = set(cells)
    rho = {q: {p: _rho_cell(spec, q, p) for p in aps} for q in cells}
    start_sets = {q: {p: _P_Z[rho[q][p]] for p in aps} for q in cells}
    end_sets = {q: {p: _P_E[rho[q][p]] for p in aps} for q in cells}
    sink_end = {p: _P_E["?"] for p in aps}

    transitions = {}
    any_sink = False
    for q in cells:
        box, exits = reach_box(spec, q)
        succ_ranges = []
        for a in range(spec.dim):
            blo, bhi = box[a]
            kmin, kmax = spec.grid_range(a)
            h = spec.eta / 2
            lo_k = math.ceil((blo - h) / spec.eta - 1e-9)
            hi_k = math.floor((bhi + h) / spec.eta + 1e-9)
            succ_ranges.append(range(max(lo_k, kmin), min(hi_k, kmax) + 1))
        outs = []
        for q2 in itertools.product(*succ_ranges):
            if q2 not in cell_set:
                continue
            for o in _labels_for(start_sets[q], end_sets[q2], aps,
                                 drop_multi_change):
                outs.append((o, q2))
        if exits:
            any_sink = True
            for o in _labels_for(start_sets[q], sink_end, aps,
                                 drop_multi_change):
                outs.append((o, SINK))
        transitions[q] = tuple(outs)

    if any_sink:
        sink_start = {p: _P_Z["?"] for p in aps}
        transitions[SINK] = tuple(
            (o, SINK) for o in _labels_for(sink_start, sink_end, aps,
                                           drop_multi_change))

    return SymbolicModel(aps, tuple(cells), gamma(spec.x_in, spec),
                         transitions, any_sink, spec.eta, spec.tau)


# ---------------------------------------------------------------------------
# Simulation (Theorem 1 testing)

def simulate_trajectory(spec, horizon, seed, tracked_aps=None,
                        samples_per_step=1000):
    """Integrate one disturbance realization (constant per step), classify
    each AP over each step from dense samples, and return (cells at
    multiples of tau, observation word).

    Raises a ChoppingError subclass when a step violates the chopping
    assumptions at this sampling resolution.
    """
    aps = tuple(sorted(tracked_aps if tracked_aps is not None else
                       spec.ap_regions.keys()))
    rng = random.Random(seed)
    x = np.array(spec.x_in, dtype=float)
    cells = [gamma(x, spec)]
    word = []
    ts = np.linspace(0.0, spec.tau, samples_per_step + 1)
    for step in range(horizon):
        mode = mode_for_cell(spec, cells[-1])
        if mode.u is not None:
            du = mode.du or (0.0,) * spec.dim
            u = np.array([mode.u[a] + rng.uniform(-du[a], du[a])
                          for a in range(spec.dim)])
        else:
            s = mode.v + rng.uniform(-mode.ev, mode.ev)
            b = mode.theta + rng.uniform(-mode.etheta, mode.etheta)
            if spec.dim == 1:
                u = np.array([s * math.cos(b)])
            else:
                u = np.array([s * math.cos(b), s * math.sin(b)])
        pts = x[None, :] + ts[:, None] * u[None, :]
        letter = {}
        changed = []
        for p in aps:
            vals = region_contains_np(spec.ap_regions[p], pts)
            flips = np.nonzero(np.diff(vals))[0]
            if len(flips) == 0:
                letter[p] = "A" if vals[0] else "N"
            elif len(flips) == 1:
                letter[p] = "Z" if vals[0] else "E"
                changed.append(p)
            else:
                raise UndefinedSlice(step, p)
        if len(changed) > 1:
            raise MultiChange(
                step, f"APs {sorted(changed)} both change within the step")
        word.append(tuple(sorted(letter.items())))
        x = pts[-1]
        cells.append(gamma(x, spec))
    return cells, word


def is_run_of(model, cells, word):
    """Is the simulated (cell, observation) word a run of the model?"""
    for k, o in enumerate(word):
        outs = model.transitions.get(cells[k], ())
        if (o, cells[k + 1]) not in outs:
            return False
    return True


# ---------------------------------------------------------------------------
# JSON

def _mode_to_json(m):
    if m.u is not None:
        return {"u": list(m.u), "du": list(m.du or (0.0,) * len(m.u))}
    return {"v": m.v, "ev": m.ev, "theta": m.theta, "etheta": m.etheta}


def _mode_from_json(obj):
    if "u" in obj:
        return Mode(u=tuple(obj["u"]), du=tuple(obj.get("du", ())) or None)
    return Mode(v=obj.get("v", 0.0), ev=obj.get("ev", 0.0),
                theta=obj.get("theta", 0.0), etheta=obj.get("etheta", 0.0))


def system_spec_to_json(spec):
    field = spec.field
    if isinstance(field, dict) and field.get("kind") == "table":
        field = dict(field)
        field["cells"] = {",".join(map(str, c)): n
                          for c, n in field["cells"].items()}
    modes = {name: _mode_to_json(m) for name, m in spec.modes.items()}
    modes["field"] = field
    return {
        "dim": spec.dim,
        "domain": [list(d) for d in spec.domain],
        "eta": spec.eta,
        "tau": spec.tau,
        "x_in": list(spec.x_in),
        "modes": modes,
        "aps": {p: [[{"axis": a, "op": op, "c": c} for a, op, c in conj]
                    for conj in region]
                for p, region in spec.ap_regions.items()},
    }


def system_spec_from_json(obj):
    modes_obj = dict(obj["modes"])
    field = modes_obj.pop("field", "default")
    if isinstance(field, dict) and field.get("kind") == "table":
        field = dict(field)
        field["cells"] = {tuple(int(v) for v in k.split(",")): n
                          for k, n in field["cells"].items()}
    modes = {name: _mode_from_json(m) for name, m in modes_obj.items()}
    regions = {
        p: tuple(tuple((hs["axis"], hs["op"], hs["c"]) for hs in conj)
                 for conj in region)
        for p, region in obj["aps"].items()}
    return SystemSpec(
        dim=obj["dim"],
        domain=tuple(tuple(d) for d in obj["domain"]),
        eta=obj["eta"], tau=obj["tau"], x_in=tuple(obj["x_in"]),
        modes=modes, field=field, ap_regions=regions)


def _state_str(q):
    return q if isinstance(q, str) else ",".join(map(str, q))


def _state_from_str(s):
    if s == SINK:
        return SINK
    return tuple(int(v) for v in s.split(","))


def symbolic_model_to_json(m):
    edges = []
    for q, o, q2 in m.edges():
        edges.append({"src": _state_str(q), "label": dict(o),
                      "dst": _state_str(q2)})
    edges.sort(key=lambda e: (e["src"], e["dst"], sorted(e["label"].items())))
    return {
        "aps": list(m.aps),
        "states": [_state_str(q) for q in m.states],
        "initial": _state_str(m.q_in),
        "has_sink": m.has_sink,
        "eta": m.eta, "tau": m.tau,
        "edges": edges,
    }


def symbolic_model_from_json(obj):
    transitions = {_state_from_str(s): [] for s in obj["states"]}
    if obj.get("has_sink", False):
        transitions[SINK] = []
    for e in obj["edges"]:
        q = _state_from_str(e["src"])
        transitions.setdefault(q, []).append(
            (tuple(sorted(e["label"].items())), _state_from_str(e["dst"])))
    transitions = {q: tuple(v) for q, v in transitions.items()}
    return SymbolicModel(
        tuple(sorted(obj["aps"])),
        tuple(_state_from_str(s) for s in obj["states"]),
        _state_from_str(obj["initial"]),
        transitions, obj.get("has_sink", False),
        obj.get("eta"), obj.get("tau"))
