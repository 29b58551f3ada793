"""Büchi game construction and solving.

The game is the product of a symbolic model S (Opponent resolves the
demonic nondeterminism of the system) and an AP-observation automaton B
(Player resolves the angelic nondeterminism of the automaton):

  * Opponent vertices (q, b): Opponent picks a model transition
    (q, o, q') and play moves to the Player vertex (q', o, b);
  * Player vertices (q', o, b): Player picks an automaton edge
    (b, o, b') and play moves to (q', b').

Player wins a play iff it visits accepting vertices {(q, b) | b in F}
infinitely often.  The system satisfies the formula from the initial
state whenever Player wins from (q_in, b_in); the converse need not hold
(a losing game is inconclusive).
"""
from __future__ import annotations

import hashlib
import json
import random
import time
from dataclasses import dataclass, field

from . import abstraction as _abs
from . import automata as _aut
from . import ltl as _ltl
from . import observations as _obs

__all__ = [
    "BuchiGame", "SolveResult", "Report", "PipelineError",
    "build_game", "solve_buchi", "winning_region_fixpoint",
    "check_strategy", "verify",
    "solve_result_to_json", "report_to_json", "report_from_json",
    "game_to_json",
]

WIN = ("sink", "win")
LOSE = ("sink", "lose")


class PipelineError(RuntimeError):
    """An error from a pipeline stage, tagged with the stage name."""

    def __init__(self, stage, cause):
        super().__init__(f"stage {stage!r}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class BuchiGame:
    """Vertices: ("O", q, b) Opponent-owned, ("P", q, o, b) Player-owned,
    plus the totalizing sinks WIN (accepting self-loop) and LOSE
    (non-accepting self-loop)."""
    vertices: tuple              # fixed order (determinism)
    edges: dict                  # vertex -> tuple of successors
    owner: dict                  # vertex -> 0 (Player) or 1 (Opponent)
    accepting: frozenset
    initial: object
    redirected_player: tuple     # stuck Player vertices sent to LOSE
    redirected_opponent: tuple   # stuck Opponent vertices sent to WIN

    @property
    def n_player(self):
        return sum(1 for v in self.vertices if self.owner[v] == 0)

    @property
    def n_opponent(self):
        return sum(1 for v in self.vertices if self.owner[v] == 1)


def _vertex_key(v):
    return repr(v)


def build_game(model, nba):
    """Product Büchi game of a symbolic model and an automaton, restricted
    to the part reachable from (q_in, b_in) and totalized with sinks."""
    if tuple(sorted(model.aps)) != tuple(sorted(nba.aps)):
        raise ValueError(
            f"alphabet mismatch: model tracks {model.aps}, "
            f"automaton reads {nba.aps}")
    b_succ = {}
    for b, o, b2 in nba.edges:
        b_succ.setdefault((b, o), []).append(b2)

    init = ("O", model.q_in, nba.initial)
    edges = {}
    owner = {}
    redirected_p = []
    redirected_o = []
    seen = {init}
    stack = [init]
    while stack:
        v = stack.pop()
        if v in (WIN, LOSE):
            continue
        if v[0] == "O":
            _, q, b = v
            owner[v] = 1
            outs = [("P", q2, o, b) for o, q2 in model.transitions.get(q, ())]
            if not outs:
                redirected_o.append(v)
                outs = [WIN]
        else:
            _, q2, o, b = v
            owner[v] = 0
            outs = [("O", q2, b2) for b2 in b_succ.get((b, o), ())]
            if not outs:
                redirected_p.append(v)
                outs = [LOSE]
        edges[v] = tuple(sorted(set(outs), key=_vertex_key))
        for w in edges[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    for sink in (WIN, LOSE):
        if sink in seen:
            edges[sink] = (sink,)
            owner[sink] = 0
    accepting = frozenset(
        v for v in seen
        if (v[0] == "O" and v[2] in nba.accepting) or v == WIN)
    vertices = tuple(sorted(seen, key=_vertex_key))
    return BuchiGame(vertices, edges, owner, accepting, init,
                     tuple(sorted(redirected_p, key=_vertex_key)),
                     tuple(sorted(redirected_o, key=_vertex_key)))


@dataclass(frozen=True)
class SolveResult:
    w0: frozenset
    w1: frozenset
    strategy0: dict           # Player vertices in W0 -> chosen successor
    strategy1: dict           # Opponent vertices in W1 -> chosen successor
    winning: bool
    stats: dict


def _attractor(game, target, player, universe):
    """Attractor of ``target`` for ``player`` inside ``universe``; returns
    (attractor set, strategy for player-owned attractor vertices)."""
    pred = {v: [] for v in universe}
    out_deg = {}
    for v in universe:
        succs = [w for w in game.edges[v] if w in universe]
        out_deg[v] = len(succs)
        for w in succs:
            pred[w].append(v)
    attr = set(t for t in target if t in universe)
    strategy = {}
    queue = sorted(attr, key=_vertex_key)
    i = 0
    while i < len(queue):
        w = queue[i]
        i += 1
        for v in pred[w]:
            if v in attr:
                continue
            if game.owner[v] == player:
                attr.add(v)
                strategy[v] = w
                queue.append(v)
            else:
                out_deg[v] -= 1
                if out_deg[v] == 0:
                    attr.add(v)
                    queue.append(v)
    return attr, strategy


def solve_buchi(game):
    """Zielonka's algorithm specialized to two priorities (the classical
    alternating-attractor Büchi fixpoint), with positional strategies for
    both sides.  Deterministic for a fixed vertex order."""
    universe = set(game.vertices)
    w1 = set()
    strategy1 = {}
    iterations = 0
    while True:
        iterations += 1
        f = game.accepting & universe
        reach, s_reach = _attractor(game, f, 0, universe)
        if reach == universe:
            break
        dead = universe - reach      # Player can never reach F from here
        trap, s_trap = _attractor(game, dead, 1, universe)
        for v in dead:
            if game.owner[v] == 1 and v not in s_trap:
                # stay inside the F-unreachable region
                for w in game.edges[v]:
                    if w in dead:
                        s_trap[v] = w
                        break
        strategy1.update(s_trap)
        w1 |= trap
        universe -= trap
        if not universe:
            break
    w0 = universe
    # Player strategy on W0: attract to F inside W0; on F, re-enter W0.
    strategy0 = {}
    if w0:
        f = game.accepting & w0
        _, s_reach = _attractor(game, f, 0, w0)
        strategy0.update(s_reach)
        for v in w0:
            if game.owner[v] == 0 and v not in strategy0:
                for w in game.edges[v]:
                    if w in w0:
                        strategy0[v] = w
                        break
    stats = {"iterations": iterations,
             "vertices": len(game.vertices),
             "player_vertices": game.n_player,
             "opponent_vertices": game.n_opponent,
             "redirected_player": len(game.redirected_player),
             "redirected_opponent": len(game.redirected_opponent)}
    return SolveResult(frozenset(w0), frozenset(w1), strategy0, strategy1,
                       game.initial in w0, stats)


def winning_region_fixpoint(game):
    """Independent oracle for the Player winning region: the nested
    fixpoint nu Y. mu X. (Pre0(X) | (F & Pre0(Y)))."""
    def pre0(s):
        out = set()
        for v in game.vertices:
            succs = game.edges[v]
            if game.owner[v] == 0:
                if any(w in s for w in succs):
                    out.add(v)
            elif all(w in s for w in succs):
                out.add(v)
        return out

    y = set(game.vertices)
    while True:
        x = set()
        while True:
            fy = game.accepting & pre0(y)
            x2 = pre0(x) | fy
            if x2 == x:
                break
            x = x2
        if x == y:
            return frozenset(y)
        y = x


def check_strategy(game, strategy0, trials=200, horizon=None, seed=0):
    """Falsification harness: play the Player strategy against random
    positional Opponent strategies from the initial vertex; after the
    first visit to an accepting vertex, every window of |vertices| steps
    must contain another visit.  Returns True iff all trials pass."""
    n = len(game.vertices)
    if horizon is None:
        horizon = 4 * n
    rng = random.Random(seed)
    for _ in range(trials):
        pi1 = {v: rng.choice(game.edges[v]) for v in game.vertices
               if game.owner[v] == 1}
        v = game.initial
        last_accept = None
        for step in range(horizon):
            if v in game.accepting:
                last_accept = step
            elif last_accept is not None and step - last_accept > n:
                return False
            if game.owner[v] == 0:
                if v not in strategy0:
                    raise KeyError(f"strategy undefined at {v!r}")
                v = strategy0[v]
            else:
                v = pi1[v]
        if last_accept is None or horizon - last_accept > n:
            return False
    return True


# ---------------------------------------------------------------------------
# End-to-end pipeline

@dataclass(frozen=True)
class Report:
    schema: str
    formula: str
    verdict: str              # "VERIFIED" | "INCONCLUSIVE"
    sizes: dict               # automaton, model, game_player, game_opponent
    times: dict               # automaton, model, game_build, game_solve, total
    repeat: int
    config_hash: str
    notes: dict = field(default_factory=dict)


def _config_hash(spec, formula_text, tracked):
    blob = json.dumps({"spec": _abs.system_spec_to_json(spec),
                       "formula": formula_text,
                       "tracked": list(tracked)}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except PipelineError:
        raise
    except Exception as e:  # noqa: BLE001 - wrapped with stage provenance
        raise PipelineError(name, e) from e


def verify(spec, formula, repeat=1, allow_unsound_tau=False,
           model=None, notes=None):
    """Full pipeline: parse/NNF -> automaton -> symbolic model -> game ->
    solve.  The verdict is VERIFIED when Player wins the game, otherwise
    INCONCLUSIVE (a lost game proves nothing).  Timings are wall-clock
    averages over ``repeat`` runs of each stage.

    ``formula`` may be LTL text or a Formula/Nnf object.  ``model`` can
    supply a prebuilt SymbolicModel over the formula's atoms.
    """
    repeat = max(1, repeat)
    if isinstance(formula, str):
        formula_text = formula
        f = _stage("parse", _ltl.parse_ltl, formula)
    else:
        formula_text = _ltl.formula_str(formula)
        f = formula
    nnf = _stage("nnf", _ltl.to_nnf, f)
    tracked = _ltl.atoms(nnf)

    times = {}

    def timed(name, fn, *args, **kwargs):
        t0 = time.perf_counter()
        for _ in range(repeat):
            result = _stage(name, fn, *args, **kwargs)
        times[name] = (time.perf_counter() - t0) / repeat
        return result

    nba = timed("automaton", lambda: _aut.translate(nnf)["nba"])
    if model is None:
        model = timed("model", _abs.build_symbolic_model, spec,
                      tracked_aps=tracked, force=allow_unsound_tau)
    else:
        times["model"] = 0.0
    game = timed("game_build", build_game, model, nba)
    result = timed("game_solve", solve_buchi, game)
    times["total"] = sum(times.values())

    sizes = {
        "automaton": nba.n_states,
        "model": model.n_states,
        "game_player": game.n_player,
        "game_opponent": game.n_opponent,
    }
    all_notes = {"tracked_aps": list(tracked),
                 "allow_unsound_tau": allow_unsound_tau,
                 "redirected_player": len(game.redirected_player),
                 "redirected_opponent": len(game.redirected_opponent)}
    if notes:
        all_notes.update(notes)
    report = Report(
        schema="apobs-report/1",
        formula=formula_text,
        verdict="VERIFIED" if result.winning else "INCONCLUSIVE",
        sizes=sizes,
        times={k: round(v, 6) for k, v in times.items()},
        repeat=repeat,
        config_hash=_config_hash(spec, formula_text, tracked),
        notes=all_notes,
    )
    return report, {"nnf": nnf, "nba": nba, "model": model,
                    "game": game, "solve": result}


# ---------------------------------------------------------------------------
# JSON

def _b_names(g):
    """Stable serializable names for the automaton-state components."""
    bs = set()
    for v in g.vertices:
        if v in (WIN, LOSE):
            continue
        bs.add(v[2] if v[0] == "O" else v[3])
    return {b: f"b{i}" for i, b in enumerate(sorted(bs, key=repr))}


def _vjson(v, names):
    if v in (WIN, LOSE):
        return {"kind": v[1]}
    if v[0] == "O":
        return {"kind": "O", "q": _abs._state_str(v[1]), "b": names[v[2]]}
    return {"kind": "P", "q": _abs._state_str(v[1]), "o": dict(v[2]),
            "b": names[v[3]]}


def game_to_json(g):
    names = _b_names(g)
    return {
        "initial": _vjson(g.initial, names),
        "player_vertices": g.n_player,
        "opponent_vertices": g.n_opponent,
        "accepting": sorted((_vjson(v, names) for v in g.accepting),
                            key=lambda d: json.dumps(d, sort_keys=True)),
        "edges": [{"src": _vjson(v, names), "dst": _vjson(w, names)}
                  for v in g.vertices for w in g.edges[v]],
    }


def solve_result_to_json(r):
    bs = set()
    for v in r.w0 | r.w1:
        if v not in (WIN, LOSE):
            bs.add(v[2] if v[0] == "O" else v[3])
    names = {b: f"b{i}" for i, b in enumerate(sorted(bs, key=repr))}
    return {
        "verdict": "VERIFIED" if r.winning else "INCONCLUSIVE",
        "w0_size": len(r.w0),
        "w1_size": len(r.w1),
        "strategy": [{"vertex": _vjson(v, names), "move": _vjson(w, names)}
                     for v, w in sorted(r.strategy0.items(),
                                        key=lambda kv: _vertex_key(kv[0]))],
        "stats": dict(r.stats),
    }


def report_to_json(r):
    return {"schema": r.schema, "formula": r.formula, "verdict": r.verdict,
            "sizes": dict(r.sizes), "times": dict(r.times),
            "repeat": r.repeat, "config_hash": r.config_hash,
            "notes": dict(r.notes)}


def report_from_json(obj):
    return Report(schema=obj["schema"], formula=obj["formula"],
                  verdict=obj["verdict"], sizes=dict(obj["sizes"]),
                  times=dict(obj["times"]), repeat=obj["repeat"],
                  config_hash=obj["config_hash"],
                  notes=dict(obj.get("notes", {})))
