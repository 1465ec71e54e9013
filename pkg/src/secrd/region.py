"""Rate-distortion-equivocation region evaluation and boundary search.

A problem instance is a joint p(a,b,e) plus a bounded distortion matrix.
An auxiliary scheme is a pair of channels A->V->U plus a deterministic
reconstruction map on V x B. `evaluate_scheme` returns the tightest
(R, D, Delta) tuple the scheme certifies; `sweep_boundary` searches over
schemes for boundary points and reports a certified inner bound.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .probs import (
    Alphabet,
    ConditionalPmf,
    InvalidArgument,
    JointPmf,
    conditional_entropy,
    constant_channel,
    identity_channel,
    joint_from,
    mutual_information,
)


@dataclass(frozen=True)
class SecureSource:
    """Joint p(a,b,e) with a bounded distortion matrix d(a, a_hat)."""

    joint: JointPmf
    distortion: np.ndarray = field(compare=False)
    d_max: float = 1.0

    def __post_init__(self):
        if set(self.joint.names) != {"A", "B", "E"}:
            raise InvalidArgument("source joint must have exactly axes A, B, E")
        na = len(self.joint.alphabet("A"))
        d = np.asarray(self.distortion, dtype=float).reshape(na, na)
        if np.any(d < 0) or np.any(d > self.d_max):
            raise InvalidArgument("distortion entries must lie in [0, d_max]")
        d.setflags(write=False)
        object.__setattr__(self, "distortion", d)

    @property
    def a_alphabet(self) -> Alphabet:
        return self.joint.alphabet("A")

    @property
    def b_alphabet(self) -> Alphabet:
        return self.joint.alphabet("B")

    @property
    def e_alphabet(self) -> Alphabet:
        return self.joint.alphabet("E")


def cardinality_caps(source: SecureSource) -> tuple[int, int]:
    """(|U|, |V|) caps beyond which nothing more is achievable."""
    na = len(source.a_alphabet)
    return na + 2, (na + 2) * (na + 1)


@dataclass(frozen=True)
class AuxScheme:
    """Channels A->V and V->U plus a deterministic map (v, b) -> a-hat index.

    U is generated from V only and V from A only, so the Markov chain
    U - V - A - (B, E) holds by construction.
    """

    v_channel: ConditionalPmf
    u_channel: ConditionalPmf
    reconstruction: np.ndarray = field(compare=False)

    def __post_init__(self):
        if self.v_channel.output != self.u_channel.input:
            raise InvalidArgument("u_channel input must equal v_channel output")
        recon = np.asarray(self.reconstruction, dtype=int)
        if recon.ndim != 2 or recon.shape[0] != len(self.v_channel.output):
            raise InvalidArgument("reconstruction must be a |V| x |B| index map")
        recon.setflags(write=False)
        object.__setattr__(self, "reconstruction", recon)

    def check_caps(self, source: SecureSource) -> None:
        u_cap, v_cap = cardinality_caps(source)
        if len(self.u_channel.output) > u_cap or len(self.v_channel.output) > v_cap:
            raise InvalidArgument(
                f"scheme exceeds cardinality caps |U|<={u_cap}, |V|<={v_cap}"
            )


@dataclass(frozen=True)
class RDETuple:
    rate: float
    distortion: float
    equivocation: float

    def __iter__(self):
        return iter((self.rate, self.distortion, self.equivocation))


def materialize(source: SecureSource, scheme: AuxScheme) -> JointPmf:
    """Full joint p(a, b, e, v, u) under the scheme's Markov structure."""
    if scheme.v_channel.input != source.a_alphabet:
        raise InvalidArgument("v_channel input alphabet must match source A")
    return joint_from(
        source.joint,
        [("V", scheme.v_channel, "A"), ("U", scheme.u_channel, "V")],
    )


def expected_distortion(source: SecureSource, scheme: AuxScheme,
                        joint: JointPmf | None = None) -> float:
    joint = joint if joint is not None else materialize(source, scheme)
    pvba = joint.marginal(("V", "B", "A")).mass  # axes in joint order: A, B, V
    # marginal keeps source order (A, B, V); index accordingly
    p_abv = pvba
    na, nb, nv = p_abv.shape
    if scheme.reconstruction.shape != (nv, nb):
        raise InvalidArgument("reconstruction shape does not match |V| x |B|")
    d = source.distortion
    total = 0.0
    for v in range(nv):
        for b in range(nb):
            ahat = int(scheme.reconstruction[v, b])
            total += float(p_abv[:, b, v] @ d[:, ahat])
    return total


def evaluate_scheme(source: SecureSource, scheme: AuxScheme) -> RDETuple:
    """The tightest (R, D, Delta) tuple certified by the scheme.

    R = I(V;A|B), D = E[d(A, Ahat(V,B))], and
    Delta = [H(A|VB) + I(A;B|U) - I(A;E|U)]_+ with the positive part
    applied at the end only.
    """
    joint = materialize(source, scheme)
    rate = mutual_information(joint, ("V",), ("A",), ("B",))
    dist = expected_distortion(source, scheme, joint)
    delta = (
        conditional_entropy(joint, ("A",), ("V", "B"))
        + mutual_information(joint, ("A",), ("B",), ("U",))
        - mutual_information(joint, ("A",), ("E",), ("U",))
    )
    return RDETuple(rate, dist, max(0.0, delta))


def best_reconstruction(source: SecureSource, v_channel: ConditionalPmf) -> np.ndarray:
    """Distortion-optimal deterministic map (v, b) -> a-hat index.

    Ties break to the lowest symbol index; zero-probability (v, b) pairs
    map to index 0.
    """
    if v_channel.input != source.a_alphabet:
        raise InvalidArgument("v_channel input alphabet must match source A")
    joint = joint_from(source.joint, [("V", v_channel, "A")])
    p_abv = joint.marginal(("A", "B", "V")).mass
    na, nb, nv = p_abv.shape
    recon = np.zeros((nv, nb), dtype=int)
    d = source.distortion
    for v in range(nv):
        for b in range(nb):
            w = p_abv[:, b, v]
            if w.sum() <= 0.0:
                recon[v, b] = 0
                continue
            costs = w @ d  # costs[ahat] = sum_a p(a,b,v) d(a, ahat)
            recon[v, b] = int(np.argmin(costs))
    return recon


def identity_scheme(source: SecureSource,
                    u_channel: ConditionalPmf | None = None) -> AuxScheme:
    """V = A with Ahat(v, b) = v; U defaults to a copy of V."""
    a = source.a_alphabet
    v_channel = identity_channel(a)
    u_channel = u_channel or identity_channel(a)
    nb = len(source.b_alphabet)
    recon = np.tile(np.arange(len(a))[:, None], (1, nb))
    return AuxScheme(v_channel, u_channel, recon)


def lossless_region_point(source: SecureSource,
                          u_channel: ConditionalPmf) -> RDETuple:
    """Zero-distortion point: (H(A|B), 0, [I(A;B|U) - I(A;E|U)]_+)."""
    if u_channel.input != source.a_alphabet:
        raise InvalidArgument("u_channel input alphabet must match source A")
    joint = joint_from(source.joint, [("U", u_channel, "A")])
    rate = conditional_entropy(joint, ("A",), ("B",))
    delta = (
        mutual_information(joint, ("A",), ("B",), ("U",))
        - mutual_information(joint, ("A",), ("E",), ("U",))
    )
    return RDETuple(rate, 0.0, max(0.0, delta))


def less_noisy_bound(source: SecureSource, scheme: AuxScheme) -> RDETuple:
    """Specialized point with U constant (Wyner-Ziv coding, Bob less noisy)."""
    collapsed = replace(scheme, u_channel=constant_channel(scheme.v_channel.output))
    return evaluate_scheme(source, collapsed)


def eve_less_noisy_bound(source: SecureSource, scheme: AuxScheme) -> RDETuple:
    """Specialized point with U = V; equivocation reduces to H(A|VE)."""
    copied = replace(scheme, u_channel=identity_channel(scheme.v_channel.output))
    return evaluate_scheme(source, copied)


def no_side_info_point(source: SecureSource, scheme: AuxScheme) -> RDETuple:
    """Region point when Bob has no side information (|B| = 1)."""
    if len(source.b_alphabet) != 1:
        raise InvalidArgument("no_side_info_point requires a singleton B alphabet")
    return evaluate_scheme(source, scheme)


# ---------------------------------------------------------------------------
# Boundary search: coarse grid over channel parameters, then coordinate-wise
# local refinement with step halving. The result is a certified inner bound;
# every reported tuple is achievable by its stored scheme.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SearchConfig:
    v_size: int = 2
    u_size: int = 2
    grid_resolution: int = 6       # simplex subdivisions per channel row
    refine_rounds: int = 14        # step halves once per round
    rate_budget: float | None = None


@dataclass
class BoundaryCurve:
    points: list[tuple[float, RDETuple, AuxScheme]]  # (D budget, tuple, scheme)
    config: SearchConfig

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["D", "R", "Delta", "scheme_id"])
        for i, (d, tup, _) in enumerate(self.points):
            writer.writerow([f"{d:.6f}", f"{tup.rate:.6f}",
                             f"{tup.equivocation:.6f}", i])
        return buf.getvalue()


def _simplex_grid(k: int, resolution: int) -> list[tuple[float, ...]]:
    """All points of the k-simplex with coordinates multiple of 1/resolution."""
    if k == 1:
        return [(1.0,)]
    out = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            out.append(tuple(prefix + [remaining / resolution]))
            return
        for c in range(remaining + 1):
            rec(prefix + [c / resolution], remaining - c, slots - 1)

    rec([], resolution, k)
    return out


def _coarse_channels(n_in: int, alph_in: Alphabet, n_out: int,
                     resolution: int, prefix: str) -> list[ConditionalPmf]:
    out_alph = Alphabet(tuple(f"{prefix}{i}" for i in range(n_out)))
    rows = _simplex_grid(n_out, resolution)
    mats = []

    def rec(chosen):
        if len(chosen) == n_in:
            mats.append(ConditionalPmf(alph_in, out_alph, np.array(chosen)))
            return
        for r in rows:
            rec(chosen + [r])

    rec([])
    return mats


def _row_moves(rows: np.ndarray, step: float):
    """Neighbor matrices: move `step` mass between two entries of one row."""
    n_in, n_out = rows.shape
    for i in range(n_in):
        for j in range(n_out):
            for k in range(n_out):
                if j == k or rows[i, k] < step:
                    continue
                new = rows.copy()
                new[i, k] -= step
                new[i, j] += step
                yield new


def _search(source: SecureSource, objective, feasible, config: SearchConfig,
            seeds: Sequence[AuxScheme] = ()) -> tuple[AuxScheme, RDETuple] | None:
    """Maximize `objective(tuple)` over schemes subject to `feasible(tuple)`.

    Deterministic: candidates come from a fixed coarse grid plus `seeds`,
    and ties resolve by candidate order.
    """
    a = source.a_alphabet
    v_channels = _coarse_channels(len(a), a, config.v_size,
                                  config.grid_resolution, "v")
    best = None  # (score, order, scheme, tuple)
    order = 0

    def consider(v_rows, u_rows, v_alph, u_alph):
        nonlocal best, order
        v_ch = ConditionalPmf(a, v_alph, v_rows)
        u_ch = ConditionalPmf(v_alph, u_alph, u_rows)
        recon = best_reconstruction(source, v_ch)
        scheme = AuxScheme(v_ch, u_ch, recon)
        tup = evaluate_scheme(source, scheme)
        order += 1
        if not feasible(tup):
            return None
        score = objective(tup)
        if best is None or score > best[0] + 1e-15:
            best = (score, order, scheme, tup)
        return score

    u_alph = Alphabet(tuple(f"u{i}" for i in range(config.u_size)))
    u_rows_grid = _simplex_grid(config.u_size, config.grid_resolution)
    u_mats = []

    def rec(chosen):
        if len(chosen) == config.v_size:
            u_mats.append(np.array(chosen))
            return
        for r in u_rows_grid:
            rec(chosen + [r])

    rec([])

    for v_ch in v_channels:
        for u_rows in u_mats:
            consider(v_ch.rows, u_rows, v_ch.output, u_alph)
    for s in seeds:
        if (len(s.v_channel.output) == config.v_size
                and len(s.u_channel.output) == config.u_size):
            consider(np.array(s.v_channel.rows), np.array(s.u_channel.rows),
                     s.v_channel.output, s.u_channel.output)

    if best is None:
        return None

    # Coordinate-wise refinement with step halving.
    step = 1.0 / config.grid_resolution
    for _ in range(config.refine_rounds):
        while True:
            before = best[0]
            _, _, sch, _ = best
            v_rows = np.array(sch.v_channel.rows)
            u_rows = np.array(sch.u_channel.rows)
            v_alph, u_alph = sch.v_channel.output, sch.u_channel.output
            for cand in _row_moves(v_rows, step):
                consider(cand, u_rows, v_alph, u_alph)
            for cand in _row_moves(u_rows, step):
                consider(v_rows, cand, v_alph, u_alph)
            if best[0] <= before + 1e-15:
                break
        step /= 2.0
    _, _, scheme, tup = best
    return scheme, tup


def sweep_boundary(source: SecureSource, distortion_grid: Sequence[float],
                   config: SearchConfig = SearchConfig()) -> BoundaryCurve:
    """Best found (R, Delta) per distortion budget; certified inner bound.

    For each D on the grid the minimal rate is searched first; the
    equivocation is then maximized subject to E[d] <= D and, when a rate
    budget is configured, R <= budget. Schemes found at smaller budgets
    seed larger ones, which keeps Delta nondecreasing along the curve.
    """
    grid = sorted(distortion_grid)
    if not grid:
        raise InvalidArgument("distortion grid must be nonempty")
    u_cap, v_cap = cardinality_caps(source)
    if config.u_size > u_cap or config.v_size > v_cap:
        raise InvalidArgument("search config exceeds cardinality caps")
    points = []
    seeds: list[AuxScheme] = []
    for d_budget in grid:
        rate_found = _search(
            source,
            objective=lambda t: -t.rate,
            feasible=lambda t: t.distortion <= d_budget + 1e-12,
            config=config,
            seeds=seeds,
        )
        if rate_found is None:
            continue
        min_rate = rate_found[1].rate
        budget = config.rate_budget if config.rate_budget is not None else np.inf

        def feas(t, _d=d_budget, _r=budget):
            return t.distortion <= _d + 1e-12 and t.rate <= _r + 1e-9

        delta_found = _search(
            source,
            objective=lambda t: t.equivocation,
            feasible=feas,
            config=config,
            seeds=seeds + [rate_found[0]],
        )
        if delta_found is None:
            continue
        scheme, tup = delta_found
        points.append((d_budget,
                       RDETuple(min_rate, tup.distortion, tup.equivocation),
                       scheme))
        seeds = [scheme, rate_found[0]]
    return BoundaryCurve(points, config)
