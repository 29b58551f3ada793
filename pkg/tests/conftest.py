"""Shared generators and independent oracles for the test suite."""
from __future__ import annotations

import itertools
import random
from fractions import Fraction

from apobs.ltl import (Atom, And, FalseF, Not, Or, Release, TrueF, Until,
                       NAnd, NFalse, NOr, NRelease, NTrue, NUntil, NegAtom,
                       PosAtom, subformulas)
from apobs.observations import OBS, PiecewiseSignal, SignalWord, is_signal_word


# ---------------------------------------------------------------------------
# Random formulas

def rand_formula(rng, depth, aps):
    """Random raw formula (may contain Not at any level)."""
    if depth == 0 or rng.random() < 0.3:
        r = rng.random()
        if r < 0.1:
            return TrueF()
        if r < 0.2:
            return FalseF()
        return Atom(rng.choice(aps))
    kind = rng.choice(["not", "and", "or", "until", "release"])
    if kind == "not":
        return Not(rand_formula(rng, depth - 1, aps))
    cls = {"and": And, "or": Or, "until": Until, "release": Release}[kind]
    return cls(rand_formula(rng, depth - 1, aps),
               rand_formula(rng, depth - 1, aps))


def rand_nnf(rng, depth, aps):
    """Random NNF formula."""
    if depth == 0 or rng.random() < 0.3:
        p = rng.choice(aps)
        return PosAtom(p) if rng.random() < 0.5 else NegAtom(p)
    cls = rng.choice([NAnd, NOr, NUntil, NRelease])
    return cls(rand_nnf(rng, depth - 1, aps),
               rand_nnf(rng, depth - 1, aps))


# ---------------------------------------------------------------------------
# Random signals satisfying the single-change assumption for tau = 1

def rand_signal(rng, aps, n_prefix=None, n_loop=None):
    """Piecewise signal whose consecutive letters (including the loop seam)
    differ in at most one AP and whose pieces are all longer than 1, so
    chopping with tau = 1 never sees two changes in a slice."""
    aps = list(aps)
    if n_prefix is None:
        n_prefix = rng.randrange(0, 3)
    if n_loop is None:
        n_loop = rng.randrange(1, 3)

    def dur():
        return Fraction(rng.randrange(9, 25), 8)

    letter = frozenset(p for p in aps if rng.random() < 0.5)

    def step(cur):
        if rng.random() < 0.3:
            return cur
        p = rng.choice(aps)
        return cur ^ {p}

    prefix = []
    for _ in range(n_prefix):
        prefix.append((dur(), letter))
        letter = step(letter)
    # loop letters must return to the first loop letter in <= 1-AP steps:
    # walk out with single toggles, then undo them in reverse order
    toggles = [rng.choice(aps) for _ in range(n_loop - 1)]
    loop_letters = [letter]
    for p in toggles:
        loop_letters.append(loop_letters[-1] ^ {p})
    for p in reversed(toggles):
        loop_letters.append(loop_letters[-1] ^ {p})
    if len(loop_letters) > 1:
        loop_letters.pop()  # seam step back to the first letter is 1 toggle
    loop = [(dur(), l) for l in loop_letters]
    return PiecewiseSignal.make(prefix, loop, aps=aps)


# ---------------------------------------------------------------------------
# Independent discrete-word LTL evaluator (for NNF-preservation tests)

def eval_discrete(f, positions, p, l, j):
    """Truth of f at position j over the lasso word positions[0:p+l]
    (sets of APs), by direct recursion with a lookahead of p + 2l."""
    memo = {}

    def canon(k):
        return k if k < p else p + (k - p) % l

    def ev(g, k):
        k = canon(k)
        key = (g, k)
        if key in memo:
            return memo[key]
        memo[key] = out = _ev(g, k)
        return out

    def _ev(g, k):
        if isinstance(g, (TrueF, NTrue)):
            return True
        if isinstance(g, (FalseF, NFalse)):
            return False
        if isinstance(g, (Atom, PosAtom)):
            return g.name in positions[k]
        if isinstance(g, NegAtom):
            return g.name not in positions[k]
        if isinstance(g, Not):
            return not ev(g.child, k)
        if isinstance(g, (And, NAnd)):
            return ev(g.left, k) and ev(g.right, k)
        if isinstance(g, (Or, NOr)):
            return ev(g.left, k) or ev(g.right, k)
        if isinstance(g, (Until, NUntil)):
            for k2 in range(k, p + 2 * l):
                if ev(g.right, k2):
                    return True
                if not ev(g.left, k2):
                    return False
            return False
        if isinstance(g, (Release, NRelease)):
            for k2 in range(k, p + 2 * l):
                if not ev(g.right, k2):
                    return False
                if ev(g.left, k2):
                    return True
            return True
        raise TypeError(g)

    return ev(f, j)


# ---------------------------------------------------------------------------
# Exhaustive valid signal words

def single_change_letters(aps):
    out = []
    for combo in itertools.product(OBS, repeat=len(aps)):
        if sum(1 for o in combo if o in ("Z", "E")) > 1:
            continue
        out.append(tuple(zip(aps, combo)))
    return out


def _seam_ok(m1, m2):
    return all((o1 in ("A", "E")) == (o2 in ("A", "Z"))
               for (_, o1), (_, o2) in zip(m1, m2))


def enumerate_valid_words(aps, max_size):
    """All valid SignalWord lassos with prefix+loop size <= max_size."""
    aps = tuple(sorted(aps))
    letters = single_change_letters(aps)
    words = []
    for total in range(1, max_size + 1):
        for loop_len in range(1, total + 1):
            pre_len = total - loop_len
            for seq in itertools.product(letters, repeat=total):
                ok = all(_seam_ok(seq[i], seq[i + 1])
                         for i in range(total - 1))
                if ok and _seam_ok(seq[total - 1], seq[pre_len]):
                    w = SignalWord(aps, tuple(seq[:pre_len]),
                                   tuple(seq[pre_len:]))
                    assert is_signal_word(w)[0]
                    words.append(w)
    return words


# ---------------------------------------------------------------------------
# Raw lasso-word acceptance for automata (no signal-word validity check);
# used by oracles that must evaluate arbitrary label words.

def accepts_raw_lasso(nba, prefix, loop):
    """Does the automaton accept the word prefix . loop^omega (labels given
    as canonical sorted item tuples)?"""
    by = {}
    for s, o, d in nba.edges:
        by.setdefault((s, o), []).append(d)
    p, l = len(prefix), len(loop)

    def letter(k):
        return prefix[k] if k < p else loop[(k - p) % l]

    def canon(k):
        return k if k < p else p + (k - p) % l

    start = (0, nba.initial)
    seen = {start}
    stack = [start]
    adj = {}
    while stack:
        k, s = stack.pop()
        nxt = canon(k + 1)
        adj[(k, s)] = [(nxt, d) for d in by.get((s, letter(k)), ())]
        for u in adj[(k, s)]:
            if u not in seen:
                seen.add(u)
                stack.append(u)
    # accepting lasso: reachable cycle through an accepting product node;
    # search per SCC (iterative Tarjan is overkill at these sizes)
    index = {v: i for i, v in enumerate(sorted(seen, key=repr))}
    sccs = _sccs(adj, sorted(seen, key=repr))
    for comp in sccs:
        cs = set(comp)
        nontrivial = len(comp) > 1 or any(d in cs for d in adj[comp[0]])
        if nontrivial and any(s in nba.accepting for _, s in comp):
            return True
    return False


def accepting_run_states(gba, w):
    """For each canonical position k of the signal word w, the set of GBA
    states that position k can take in SOME accepting run matching w on
    atoms.  Exactly one state per position iff the accepting run is unique.

    Product nodes (j, s) mean: the automaton is about to read letter j in
    state s; the valuation at position k is therefore the state of node
    (canon(k+1), s)."""
    from apobs.automata import Q0

    by = {}
    for s, o, d in gba.edges:
        by.setdefault((s, o), []).append(d)
    p, l = len(w.prefix), len(w.loop)

    # unroll one extra loop so that the node entered from the prefix and
    # the node entered from the loop wrap are distinct (otherwise loop
    # valuations get misattributed to the last prefix position)
    def canon(k):
        return k if k < p + 2 * l else p + l + (k - p - l) % l

    start = (0, Q0)
    seen = {start}
    stack = [start]
    adj = {}
    while stack:
        j, s = stack.pop()
        nxt = canon(j + 1)
        adj[(j, s)] = [(nxt, d) for d in by.get((s, w._raw(j)), ())]
        for u in adj[(j, s)]:
            if u not in seen:
                seen.add(u)
                stack.append(u)

    # nodes with an accepting continuation: those reaching a nontrivial SCC
    # intersecting every accepting set
    good_seeds = set()
    for comp in _sccs(adj, sorted(seen, key=repr)):
        cs = set(comp)
        nontrivial = len(comp) > 1 or any(d in cs for d in adj[comp[0]])
        if not nontrivial:
            continue
        states = {s for _, s in comp}
        if all(states & fs for fs in gba.accepting):
            good_seeds |= cs
    good = set(good_seeds)
    changed = True
    while changed:
        changed = False
        for v in seen:
            if v not in good and any(u in good for u in adj[v]):
                good.add(v)
                changed = True

    out = {}
    for (j, s) in good:
        if s == Q0:
            continue
        k = j - 1  # s is the valuation at the position just read
        k = k if k < p else p + (k - p) % l
        out.setdefault(k, set()).add(s)
    return out


# ---------------------------------------------------------------------------
# Exact omega-language inclusion (Ramsey-style), used as the independent
# oracle for the game-vs-language cross-checks.  A "joint profile" of a
# finite word records, for the generator S and the acceptor B, which state
# pairs are connected by a path over that word (with a visited-accepting
# flag on the B side).  The profiles of all nonempty words form a finite
# semigroup generated by the letter profiles; by Ramsey's theorem, every
# infinite word factorizes with an idempotent loop profile, so inclusion
# fails iff some pair (x, e) with e idempotent and x = x*e admits an
# S-lasso but no accepting B-lasso.

def model_words_included(model, nba):
    """Is every infinite label word of the model accepted by the automaton?
    Requires every model state to have at least one outgoing transition."""
    letters = sorted({o for _, o, _ in _model_edges(model)})
    s_states = list(model.states) + ([_sink()] if model.has_sink else [])
    s_idx = {q: i for i, q in enumerate(s_states)}
    b_states = sorted(nba.states, key=repr)
    b_idx = {b: i for i, b in enumerate(b_states)}
    acc = {b_idx[b] for b in nba.accepting}

    def letter_profile(o):
        rel_s = frozenset(
            (s_idx[q], s_idx[q2]) for q, oo, q2 in _model_edges(model)
            if oo == o)
        rel_b = frozenset(
            (b_idx[b], b_idx[b2], 1 if b_idx[b2] in acc else 0)
            for b, oo, b2 in nba.edges if oo == o)
        return (rel_s, rel_b)

    def compose(p1, p2):
        rs = frozenset((a, c) for a, b in p1[0] for b2, c in p2[0] if b == b2)
        best = {}
        for a, b, f1 in p1[1]:
            for b2, c, f2 in p2[1]:
                if b != b2:
                    continue
                key = (a, c)
                best[key] = max(best.get(key, 0), max(f1, f2))
        rb = frozenset((a, c, f) for (a, c), f in best.items())
        return (rs, rb)

    gens = [letter_profile(o) for o in letters]
    closure = set(gens)
    frontier = list(gens)
    while frontier:
        nxt = []
        for p1 in frontier:
            for g in gens:
                p = compose(p1, g)
                if p not in closure:
                    closure.add(p)
                    nxt.append(p)
        frontier = nxt

    a0 = s_idx[model.q_in]
    q0 = b_idx[nba.initial]
    for e in closure:
        if compose(e, e) != e:
            continue
        for x0 in closure | {e}:
            x = compose(x0, e)
            # S-lasso: reach some t via x, then cycle on e
            if not any((a0, t) in x[0] and (t, t) in e[0]
                       for t in range(len(s_states))):
                continue
            # accepting B-lasso on the same word class
            x_targets = {c for a, c, _ in x[1] if a == q0}
            if not any(t in x_targets and (t, t, 1) in e[1]
                       for t in range(len(b_states))):
                return False
    return True


def _sink():
    from apobs.abstraction import SINK
    return SINK


def _model_edges(model):
    for q, outs in model.transitions.items():
        for o, q2 in outs:
            yield q, o, q2


# ---------------------------------------------------------------------------
# Random tiny symbolic models and automata (game-vs-language cross-checks)

def rand_model(rng, letters, max_states=4):
    """Random total symbolic model over the given labels (every state has
    at least one outgoing transition, so all runs are infinite)."""
    from apobs.abstraction import SymbolicModel
    n = rng.randrange(1, max_states + 1)
    states = [(i,) for i in range(n)]
    transitions = {}
    for q in states:
        deg = rng.randrange(1, 4)
        outs = set()
        for _ in range(deg):
            outs.add((rng.choice(letters), rng.choice(states)))
        transitions[q] = tuple(sorted(outs))
    return SymbolicModel(tuple(sorted({p for o in letters for p, _ in o})),
                         tuple(states), states[0], transitions, False)


def rand_nba(rng, letters, max_states=3):
    from apobs.automata import Nba
    n = rng.randrange(1, max_states + 1)
    states = [f"b{i}" for i in range(n)]
    edges = set()
    for b in states:
        for o in letters:
            for b2 in states:
                if rng.random() < 0.45:
                    edges.add((b, o, b2))
    accepting = frozenset(b for b in states if rng.random() < 0.5)
    aps = tuple(sorted({p for o in letters for p, _ in o}))
    return Nba(aps, frozenset(states), frozenset(edges), states[0],
               accepting)


# ---------------------------------------------------------------------------
# Random Buchi games and a brute-force positional-strategy solver

def rand_buchi_game(rng, max_vertices=12):
    from apobs.game import BuchiGame
    n = rng.randrange(3, max_vertices + 1)
    vertices = tuple(f"v{i}" for i in range(n))
    owner = {v: rng.randrange(2) for v in vertices}
    edges = {}
    for v in vertices:
        deg = rng.randrange(1, 4)
        edges[v] = tuple(sorted(rng.sample(vertices, min(deg, n))))
    accepting = frozenset(v for v in vertices if rng.random() < 0.3)
    return BuchiGame(vertices, edges, owner, accepting, vertices[0], (), ())


def brute_force_w0(game):
    """Winning region by enumerating all positional Player strategies.

    With strategy sigma fixed, Player wins from v iff the sigma-restricted
    graph has no cycle reachable from v that avoids the accepting set
    (every infinite play then visits accepting vertices infinitely often).
    """
    player_vs = [v for v in game.vertices if game.owner[v] == 0]
    w0 = set()
    for choice in itertools.product(*(game.edges[v] for v in player_vs)):
        sigma = dict(zip(player_vs, choice))
        adj = {v: ([sigma[v]] if game.owner[v] == 0 else list(game.edges[v]))
               for v in game.vertices}
        # vertices from which an accepting-set-avoiding cycle is reachable
        bad_adj = {v: [w for w in adj[v] if w not in game.accepting]
                   for v in game.vertices if v not in game.accepting}
        bad_core = set()
        for comp in _sccs(bad_adj, sorted(bad_adj)):
            cs = set(comp)
            if len(comp) > 1 or comp[0] in bad_adj.get(comp[0], ()) \
                    or any(d in cs for d in bad_adj.get(comp[0], ())):
                bad_core |= cs
        # any path (through arbitrary vertices) may lead into the bad core
        losing = set(bad_core)
        changed = True
        while changed:
            changed = False
            for v in game.vertices:
                if v not in losing and any(w in losing for w in adj[v]):
                    losing.add(v)
                    changed = True
        w0 |= set(game.vertices) - losing
    return frozenset(w0)


def _sccs(adj, nodes):
    import sys
    sys.setrecursionlimit(100000)
    index = {}
    low = {}
    on = set()
    stack = []
    out = []
    counter = itertools.count()

    def strong(v):
        work = [(v, iter(adj.get(v, ())))]
        index[v] = low[v] = next(counter)
        stack.append(v)
        on.add(v)
        while work:
            node, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = next(counter)
                    stack.append(w)
                    on.add(w)
                    work.append((w, iter(adj.get(w, ()))))
                    advanced = True
                    break
                if w in on:
                    low[node] = min(low[node], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                out.append(comp)
        return

    for v in nodes:
        if v not in index:
            strong(v)
    return out


# ---------------------------------------------------------------------------
# Shared drone scenario artifacts (built once per session)

import pytest as _pytest

from apobs import abstraction as _abstraction
from apobs import scenarios as _scenarios

_MODEL_CACHE = {}


@_pytest.fixture(scope="session")
def drone():
    return _scenarios.drone_spec()


def drone_model(tracked):
    """Session-cached symbolic model of the default drone scenario."""
    key = tuple(sorted(tracked))
    if key not in _MODEL_CACHE:
        _MODEL_CACHE[key] = _abstraction.build_symbolic_model(
            _scenarios.drone_spec(), tracked_aps=key)
    return _MODEL_CACHE[key]
