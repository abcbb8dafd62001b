"""Dynamic program over (node, remaining budget t, elapsed wait r).

Utility of a state is the probability of reaching the destination within the
remaining budget. The recurrence:

  - destination: 1 for t >= 0
  - line node:    u_L(t)   = sum_theta p(theta) * u_target(t - theta)
  - arrival node: u_A(t,r) = max(u_L(t), u_S(t,r))          (board vs wait)
  - station node: u_S(t,r) = sum_i sum_theta w_i(theta|r)
                             * prod_{j != i} P(w_j > theta | r)
                             * u_A_i(t - theta, r + theta)

States sharing one station visit satisfy t + r = const ("diagonal"), and the
conditional factors are ratios of cached survival prefixes, so a whole
diagonal reduces to elementwise products plus one reverse cumulative sum.
Same-tick joint arrivals are excluded by the model (survival factors are
strict); bundle builders keep waiting supports tie-free so the exclusion
carries no probability.

Three modes:
  plain      dense bottom-up evaluation of every state (the baseline DP)
  dominance  lazy top-down with exactness-preserving pruning: an arrival
             node first consults the dominance cache (subset/superset
             closure), then a boarding bound over X at t-1, then candidate
             set reduction via improving lines, then an early-stop bound
             checked while the waiting sum accumulates
  heuristic  dominance plus three inexact board-now rules (board
             probability >= epsilon; boarding beats each single line;
             relaxation factor beta on the early-stop bound)
"""

from __future__ import annotations

import math
import sys
import time
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Iterator

import numpy as np

from .network import (
    ArrivalNode,
    DestinationNode,
    ExpandedGraph,
    LineNode,
    Node,
    StationNode,
)

_CUTOFF_CHUNK = 16  # ticks accumulated between early-stop bound checks


class SolveMode(str, Enum):
    PLAIN = "plain"
    DOMINANCE = "dominance"
    HEURISTIC = "heuristic"


@dataclass(frozen=True)
class HeuristicConfig:
    """Knobs for the inexact pruning tier (defaults follow the reference
    experiments: epsilon 0.75, beta 1.25)."""

    epsilon: float = 0.75
    beta: float = 1.25
    board_probability: bool = True  # heuristic 1
    single_line: bool = True  # heuristic 2
    relaxed_cutoff: bool = True  # heuristic 3

    def __post_init__(self) -> None:
        if not 0 < self.epsilon <= 1:
            raise ValueError("epsilon must lie in (0, 1]")
        if self.beta < 1:
            raise ValueError("beta must be >= 1")
        if self.beta > 10:
            # a huge relaxation makes the cutoff fire at the first checkpoint
            # and the policy collapses to board-whatever-arrives
            warnings.warn(f"beta={self.beta} is degenerate: boarding will almost always win")


@dataclass
class SolveStats:
    mode: str = "plain"
    station_evals: int = 0
    arrival_evals: int = 0
    line_evals: int = 0
    dom_hits: int = 0
    nondom_hits: int = 0
    prune_boarding_bound: int = 0  # proposition-1 style
    prune_candidate_subset: int = 0  # proposition-2 style
    prune_cutoff: int = 0  # proposition-3 style
    heuristic_board_probability: int = 0
    heuristic_single_line: int = 0
    heuristic_relaxed_cutoff: int = 0
    exhausted_events: int = 0
    cutoff_partial_ticks: int = 0
    wall_time_s: float = 0.0

    def to_dict(self) -> dict:
        return dict(self.__dict__)


class MissingStateError(KeyError):
    """A utility/decision was requested for a state that was never solved."""


class DominanceCache:
    """Recorded dominance facts per (station, line, t, r).

    ``dom`` keeps maximal dominated sets (a query hits if it is a subset of
    a recorded set); ``nondom`` keeps minimal non-dominated sets (a query
    hits if it is a superset). Contradictory inserts are dropped, dom wins.
    """

    def __init__(self) -> None:
        self._dom: dict[tuple, list[int]] = {}
        self._nondom: dict[tuple, list[int]] = {}

    @staticmethod
    def _covers(recorded: list[int], mask: int, superset: bool) -> bool:
        for rec in recorded:
            if superset:
                if rec & mask == mask:  # rec is a superset of mask
                    return True
            elif rec & mask == rec:  # rec is a subset of mask
                return True
        return False

    def dominated(self, key: tuple, mask: int) -> bool:
        rec = self._dom.get(key)
        return bool(rec) and self._covers(rec, mask, superset=True)

    def not_dominated(self, key: tuple, mask: int) -> bool:
        rec = self._nondom.get(key)
        return bool(rec) and self._covers(rec, mask, superset=False)

    def record_dom(self, key: tuple, mask: int) -> None:
        if self.not_dominated(key, mask):
            return
        rec = self._dom.setdefault(key, [])
        if self._covers(rec, mask, superset=True):
            return
        rec[:] = [m for m in rec if m & mask != m] + [mask]

    def record_nondom(self, key: tuple, mask: int) -> None:
        if self.dominated(key, mask):
            return
        rec = self._nondom.setdefault(key, [])
        if self._covers(rec, mask, superset=False):
            return
        rec[:] = [m for m in rec if m & mask != mask] + [mask]


def _bits(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


class Solver:
    """One solve context over an expanded graph.

    Reusable across budgets: dense tables extend stage by stage, lazy memos
    and the dominance cache persist. Stats are cumulative; use a fresh
    Solver per (mode, budget) for clean benchmark counts.
    """

    def __init__(
        self,
        graph: ExpandedGraph,
        mode: SolveMode | str = SolveMode.PLAIN,
        heuristic: HeuristicConfig | None = None,
        debug_checks: bool = False,
    ) -> None:
        self.graph = graph
        self.mode = SolveMode(mode)
        self.heuristic = heuristic or HeuristicConfig()
        self.debug_checks = debug_checks
        self.stats = SolveStats(mode=self.mode.value)
        self.T = graph.grid.budget_ticks

        self._w0: dict[str, list[np.ndarray]] = {}
        self._sv: dict[str, list[np.ndarray]] = {}
        self._exhaust: dict[str, list[int]] = {}  # first tick with survival == 0
        for y in graph.stations_with_nodes():
            masses, survs, exh = [], [], []
            for idx in range(len(graph.lines_at(y))):
                pmf = graph.waiting_pmf(y, idx)
                masses.append(pmf.mass)
                survs.append(pmf.survival)
                zeros = np.nonzero(pmf.survival == 0.0)[0]
                exh.append(int(zeros[0]) if zeros.size else self.T + 1)
            self._w0[y] = masses
            self._sv[y] = survs
            self._exhaust[y] = exh
        self._ps: dict[tuple[str, int], np.ndarray] = {}

        self._line_u: dict[tuple[str, int], np.ndarray] = {}
        self._line_wm: dict[tuple[str, int], int] = {}
        self._target_u: dict[tuple[str, int], np.ndarray] = {}
        self._target_wm: dict[tuple[str, int], int] = {}
        for y in graph.stations_with_nodes():
            for idx in range(len(graph.lines_at(y))):
                self._line_u[(y, idx)] = np.full(self.T + 1, np.nan)
                self._line_wm[(y, idx)] = -1
                self._target_u[(y, idx)] = np.full(self.T + 1, np.nan)
                self._target_wm[(y, idx)] = -1

        # per-diagonal memos: key (station, mask, c) / (station, line, mask, c)
        self._sdiag: dict[tuple[str, int, int], np.ndarray] = {}
        self._adiag: dict[tuple[str, int, int, int], np.ndarray] = {}
        self._adec: dict[tuple[str, int, int, int], np.ndarray] = {}

        self._cache = DominanceCache()
        self._dense_stage = -1

    # ------------------------------------------------------------------
    # shared pieces

    def _prod_survival(self, y: str, mask: int) -> np.ndarray:
        key = (y, mask)
        cached = self._ps.get(key)
        if cached is not None:
            return cached
        if mask == 0:
            arr = np.ones(self.T + 1)
        else:
            low = mask & -mask
            arr = self._prod_survival(y, mask & ~low) * self._sv[y][low.bit_length() - 1]
        self._ps[key] = arr
        return arr

    def _ride_target_value(self, y: str, idx: int, k: int) -> float:
        """Utility of line (y, idx)'s ride target with remaining budget k."""
        target = self.graph.ride(y, idx).target
        if isinstance(target, DestinationNode):
            return 1.0
        if isinstance(target, ArrivalNode):
            return self._arrival_value(target.station, target.line, target.mask, k, 0)
        return self._station_value(target.station, target.mask, k, 0)

    def _ensure_targets(self, y: str, idx: int, upto: int) -> None:
        wm = self._target_wm[(y, idx)]
        if wm >= upto:
            return
        arr = self._target_u[(y, idx)]
        for k in range(wm + 1, upto + 1):
            arr[k] = self._ride_target_value(y, idx, k)
        self._target_wm[(y, idx)] = upto

    def _line_value(self, y: str, idx: int, t: int) -> float:
        if t < 0:
            return 0.0
        key = (y, idx)
        wm = self._line_wm[key]
        if t <= wm:
            return float(self._line_u[key][t])
        arr = self._line_u[key]
        mass = self.graph.ride(y, idx).travel.mass
        self._ensure_targets(y, idx, t - 1)
        targets = self._target_u[key]
        for tau in range(wm + 1, t + 1):
            if tau == 0:
                arr[0] = 0.0
            else:
                arr[tau] = float(np.dot(mass[1 : tau + 1], targets[:tau][::-1]))
            self.stats.line_evals += 1
        self._line_wm[key] = t
        return float(arr[t])

    def _line_slice(self, y: str, idx: int, upto: int) -> np.ndarray:
        """u_L(0..upto) as an array (filled)."""
        self._line_value(y, idx, upto)
        return self._line_u[(y, idx)][: upto + 1]

    # ------------------------------------------------------------------
    # dense plain mode

    def _dense_extend(self, budget: int) -> None:
        graph = self.graph
        stations = graph.stations_with_nodes()
        for c in range(self._dense_stage + 1, budget + 1):
            for y in stations:
                for idx in range(len(graph.lines_at(y))):
                    self._line_value(y, idx, c)
            for y in stations:
                self._dense_station_stage(y, c)
            for y in stations:
                for idx in range(len(graph.lines_at(y))):
                    self._ensure_targets(y, idx, c)
            self._dense_stage = c

    def _dense_station_stage(self, y: str, c: int) -> None:
        m = len(self.graph.lines_at(y))
        sv = self._sv[y]
        w0 = self._w0[y]
        exhaust = self._exhaust[y]
        masks_by_size: list[list[int]] = [[] for _ in range(m + 1)]
        for mask in range(1, 1 << m):
            masks_by_size[mask.bit_count()].append(mask)

        # arrival nodes with nothing left to wait for: board is the only move
        for i in range(m):
            board = self._line_slice(y, i, c)[::-1].copy()
            self._adiag[(y, i, 0, c)] = board
            self._adec[(y, i, 0, c)] = np.ones(c + 1, dtype=np.int8)
            self.stats.arrival_evals += c + 1

        for size in range(1, m + 1):
            for mask in masks_by_size[size]:
                bits = _bits(mask)
                g = np.zeros(c + 1)
                for i in bits:
                    pend = mask & ~(1 << i)
                    avec = self._adiag[(y, i, pend, c)]
                    g[1:] += (
                        w0[i][1 : c + 1]
                        * self._prod_survival(y, pend)[1 : c + 1]
                        * avec[1:]
                    )
                tails = np.zeros(c + 1)
                if c >= 1:
                    tails[:-1] = np.cumsum(g[:0:-1])[::-1]
                sdiag = np.zeros(c + 1)
                boundaries = sorted({e for e in (exhaust[i] for i in bits) if e <= c})
                denom = self._prod_survival(y, mask)[: c + 1]
                first_end = boundaries[0] if boundaries else c + 1
                if first_end > 0:
                    sdiag[:first_end] = tails[:first_end] / denom[:first_end]
                for seg_idx, start in enumerate(boundaries):
                    end = boundaries[seg_idx + 1] if seg_idx + 1 < len(boundaries) else c + 1
                    if start >= end:
                        continue
                    live = 0
                    for i in bits:
                        if exhaust[i] > start:
                            live |= 1 << i
                    self.stats.exhausted_events += end - start
                    if live:
                        sdiag[start:end] = self._sdiag[(y, live, c)][start:end]
                self._sdiag[(y, mask, c)] = sdiag
                self.stats.station_evals += c + 1

            for i in range(m):
                board = self._line_slice(y, i, c)[::-1]
                for mask in masks_by_size[size]:
                    if mask & (1 << i):
                        continue
                    svec = self._sdiag[(y, mask, c)]
                    self._adiag[(y, i, mask, c)] = np.maximum(board, svec)
                    self._adec[(y, i, mask, c)] = (board >= svec).astype(np.int8)
                    self.stats.arrival_evals += c + 1

    # ------------------------------------------------------------------
    # lazy modes (dominance / heuristic)

    def _adiag_arr(self, y: str, i: int, mask: int, c: int) -> np.ndarray:
        key = (y, i, mask, c)
        arr = self._adiag.get(key)
        if arr is None:
            arr = np.full(c + 1, np.nan)
            self._adiag[key] = arr
            self._adec[key] = np.full(c + 1, -1, dtype=np.int8)
        return arr

    def _sdiag_arr(self, y: str, mask: int, c: int) -> np.ndarray:
        key = (y, mask, c)
        arr = self._sdiag.get(key)
        if arr is None:
            arr = np.full(c + 1, np.nan)
            self._sdiag[key] = arr
        return arr

    def _ensure_arrivals(self, y: str, i: int, mask: int, c: int, lo: int, hi: int) -> np.ndarray:
        arr = self._adiag_arr(y, i, mask, c)
        missing = np.nonzero(np.isnan(arr[lo : hi + 1]))[0]
        for off in missing:
            rho = lo + int(off)
            self._arrival_value(y, i, mask, c - rho, rho)
        return arr

    def _arrival_value(self, y: str, i: int, mask: int, t: int, r: int) -> float:
        c = t + r
        arr = self._adiag_arr(y, i, mask, c)
        if not math.isnan(arr[r]):
            return float(arr[r])
        dec = self._adec[(y, i, mask, c)]
        board = self._line_value(y, i, t)
        value, decision = board, 1
        if mask:
            value, decision = self._arrival_decide(y, i, mask, t, r, board)
        arr[r] = value
        dec[r] = decision
        self.stats.arrival_evals += 1
        return value

    def _arrival_decide(self, y: str, i: int, mask: int, t: int, r: int, board: float):
        """The board-or-wait resolution at one arrival state."""
        if self.mode is SolveMode.PLAIN:
            wait = self._station_value(y, mask, t, r)
            return max(board, wait), int(board >= wait)
        key = (y, i, t, r)
        cache = self._cache
        if cache.dominated(key, mask):
            self.stats.dom_hits += 1
            return board, 1
        if cache.not_dominated(key, mask):
            self.stats.nondom_hits += 1
            wait = self._station_value(y, mask, t, r)
            return max(board, wait), int(board >= wait)

        # boarding bound: if boarding beats every pending line's utility one
        # tick from now, waiting cannot pay off (the waiting value is a
        # sub-probability mixture of those utilities)
        zmask = 0
        if t >= 1:
            for j in _bits(mask):
                if board < self._line_value(y, j, t - 1):
                    zmask |= 1 << j
        if zmask == 0:
            self.stats.prune_boarding_bound += 1
            self._record_dom(y, i, t, r, mask, board)
            return board, 1

        if self.mode is SolveMode.HEURISTIC:
            fired = self._heuristic_board(y, i, mask, zmask, t, r, board)
            if fired:
                self._record_dom(y, i, t, r, mask, board)
                return board, 1

        pruned = zmask
        for j in _bits(mask & ~zmask):
            if any(self._improves(y, j, z, t, r) for z in _bits(zmask)):
                pruned |= 1 << j
        if pruned != mask:
            self.stats.prune_candidate_subset += 1

        wait = self._station_value_cutoff(y, pruned, t, r, board)
        if wait is None:
            self._record_dom(y, i, t, r, mask, board)
            return board, 1
        if board >= wait:
            self._record_dom(y, i, t, r, mask, board)
            return board, 1
        self._record_nondom(y, i, t, r, mask, board)
        return wait, 0

    def _record_dom(self, y: str, i: int, t: int, r: int, mask: int, board: float) -> None:
        self._cache.record_dom((y, i, t, r), mask)
        # any line whose boarding utility is at least ours dominates the same set
        for k in range(len(self.graph.lines_at(y))):
            if k == i:
                continue
            if self._line_wm[(y, k)] >= t and self._line_u[(y, k)][t] >= board:
                self._cache.record_dom((y, k, t, r), mask)

    def _record_nondom(self, y: str, i: int, t: int, r: int, mask: int, board: float) -> None:
        self._cache.record_nondom((y, i, t, r), mask)
        for k in range(len(self.graph.lines_at(y))):
            if k == i:
                continue
            if self._line_wm[(y, k)] >= t and self._line_u[(y, k)][t] <= board:
                self._cache.record_nondom((y, k, t, r), mask)

    def _heuristic_board(
        self, y: str, i: int, mask: int, zmask: int, t: int, r: int, board: float
    ) -> bool:
        cfg = self.heuristic
        sv = self._sv[y]
        w0 = self._w0[y]
        if cfg.board_probability:
            # probability that boarding now is no worse than each pending
            # line's realized alternative
            p = 1.0
            for j in _bits(zmask):
                denom = float(sv[j][r])
                if denom <= 0.0:
                    p = 0.0
                    break
                wv = w0[j][r + 1 : r + t + 1]
                indic = board >= self._line_slice(y, j, t - 1)[::-1] if t >= 1 else np.zeros(0)
                p *= float(np.dot(wv, indic.astype(np.float64))) / denom
            if p >= cfg.epsilon:
                self.stats.heuristic_board_probability += 1
                return True
        if cfg.single_line:
            ok = True
            for j in _bits(mask):
                denom = float(sv[j][r])
                if denom <= 0.0:
                    continue  # exhausted line: waiting for it alone yields 0
                wv = w0[j][r + 1 : r + t + 1]
                vals = self._line_slice(y, j, t - 1)[::-1] if t >= 1 else np.zeros(0)
                if board < float(np.dot(wv, vals)) / denom:
                    ok = False
                    break
            if ok:
                self.stats.heuristic_single_line += 1
                return True
        return False

    def _improves(self, y: str, k: int, j: int, t: int, r: int) -> bool:
        """Whether having line k available can beat waiting out line j alone
        at some reachable state on this visit's diagonal."""
        if k == j:
            return False
        sv_j = self._sv[y][j]
        w0_j = self._w0[y][j]
        self._line_value(y, k, t)
        self._line_value(y, j, t)
        line_k = self._line_u[(y, k)]
        line_j = self._line_u[(y, j)]
        for gamma in range(0, t + 1):
            tau = t - gamma
            rr = r + gamma
            lhs = float(line_k[tau])
            denom = float(sv_j[rr])
            if denom <= 0.0:
                rhs = 0.0
            elif tau == 0:
                rhs = 0.0
            else:
                rhs = float(np.dot(w0_j[rr + 1 : rr + tau + 1], line_j[:tau][::-1])) / denom
            if lhs > rhs:
                return True
        return False

    def _station_value(self, y: str, mask: int, t: int, r: int) -> float:
        """Exact waiting value (no cutoff); memoized per diagonal position."""
        c = t + r
        arr = self._sdiag_arr(y, mask, c)
        if not math.isnan(arr[r]):
            return float(arr[r])
        value = self._station_eval(y, mask, t, r, board_bound=None)
        assert value is not None
        arr[r] = value
        return value

    def _station_value_cutoff(self, y: str, mask: int, t: int, r: int, board: float):
        """Waiting value, or None if the early-stop bound fires first."""
        c = t + r
        arr = self._sdiag_arr(y, mask, c)
        if not math.isnan(arr[r]):
            return float(arr[r])
        value = self._station_eval(y, mask, t, r, board_bound=board)
        if value is not None:
            arr[r] = value
        return value

    def _station_eval(self, y: str, mask: int, t: int, r: int, board_bound):
        if mask == 0 or t <= 0:
            if mask == 0:
                self.stats.exhausted_events += 1
            return 0.0
        sv = self._sv[y]
        live = 0
        for j in _bits(mask):
            if sv[j][r] > 0.0:
                live |= 1 << j
        if live != mask:
            self.stats.exhausted_events += 1
            return self._station_value(y, live, t, r) if live else 0.0

        w0 = self._w0[y]
        bits = _bits(mask)
        denom = float(self._prod_survival(y, mask)[r])
        gvecs = []
        for i in bits:
            pend = mask & ~(1 << i)
            gvecs.append(w0[i][r + 1 : r + t + 1] * self._prod_survival(y, pend)[r + 1 : r + t + 1])

        use_cutoff = board_bound is not None and self.mode in (
            SolveMode.DOMINANCE,
            SolveMode.HEURISTIC,
        )
        beta = (
            self.heuristic.beta
            if (self.mode is SolveMode.HEURISTIC and self.heuristic.relaxed_cutoff)
            else 1.0
        )
        acc = 0.0
        prob = 0.0
        z = 0
        while z < t:
            z_next = min(t, z + _CUTOFF_CHUNK) if use_cutoff else t
            for pos, i in enumerate(bits):
                pend = mask & ~(1 << i)
                avec = self._ensure_arrivals(y, i, pend, t + r, r + z + 1, r + z_next)
                chunk_g = gvecs[pos][z:z_next]
                acc += float(np.dot(chunk_g, avec[r + z + 1 : r + z_next + 1]))
                prob += float(chunk_g.sum())
            z = z_next
            if use_cutoff and z < t:
                u_sum = acc / denom
                p_seen = prob / denom
                # sound cap on every not-yet-integrated arrival value: each is
                # max(board, wait) where both sides are sub-probability
                # mixtures of boarding utilities at budgets <= t - z - 1
                # (values along a visit diagonal are NOT monotone, so the
                # arrival utilities at z itself would not be a valid cap)
                u_max = 0.0
                if t - z - 1 >= 0:
                    for i in bits:
                        u_max = max(u_max, self._line_value(y, i, t - z - 1))
                bound = u_sum + max(0.0, 1.0 - p_seen) * u_max
                if beta * board_bound >= bound:
                    self.stats.cutoff_partial_ticks += z
                    if beta > 1.0 and board_bound < bound:
                        self.stats.heuristic_relaxed_cutoff += 1
                    else:
                        self.stats.prune_cutoff += 1
                        if self.debug_checks:
                            exact = self._station_eval(y, mask, t, r, board_bound=None)
                            assert exact <= board_bound + 1e-12, (
                                f"cutoff unsound at {(y, mask, t, r)}: "
                                f"{exact} > {board_bound}"
                            )
                    return None
        self.stats.station_evals += 1
        return acc / denom

    # ------------------------------------------------------------------
    # public surface

    def root_value(self, budget: int) -> float:
        if budget < 0:
            return 0.0
        if budget > self.T:
            raise ValueError(f"budget {budget} exceeds grid horizon {self.T}")
        if self.graph.origin is None:
            return 0.0
        start = time.perf_counter()
        origin = self.graph.origin
        sys.setrecursionlimit(max(sys.getrecursionlimit(), 20_000 + 64 * budget))
        if self.mode is SolveMode.PLAIN:
            self._dense_extend(budget)
            value = float(self._sdiag[(origin.station, origin.mask, budget)][0])
        else:
            value = self._station_value(origin.station, origin.mask, budget, 0)
        self.stats.wall_time_s += time.perf_counter() - start
        return value

    # state lookups used by the utility table / policy / advisory layers

    def value(self, node: Node, t: int, r: int = 0, compute: bool = True) -> float:
        if isinstance(node, DestinationNode):
            return 1.0 if t >= 0 else 0.0
        if t < 0:
            return 0.0
        if isinstance(node, LineNode):
            if compute:
                return self._line_value(node.station, node.line, t)
            if self._line_wm[(node.station, node.line)] >= t:
                return float(self._line_u[(node.station, node.line)][t])
            raise MissingStateError(f"line node {node} at t={t} not solved")
        c = t + r
        if c > self.T:
            raise ValueError(f"state (t={t}, r={r}) exceeds the grid horizon")
        if isinstance(node, StationNode):
            arr = self._sdiag.get((node.station, node.mask, c))
            if arr is not None and not math.isnan(arr[r]):
                return float(arr[r])
            if compute:
                return self._station_value(node.station, node.mask, t, r)
            raise MissingStateError(f"station node {node} at (t={t}, r={r}) not solved")
        assert isinstance(node, ArrivalNode)
        arr = self._adiag.get((node.station, node.line, node.mask, c))
        if arr is not None and not math.isnan(arr[r]):
            return float(arr[r])
        if compute:
            return self._arrival_value(node.station, node.line, node.mask, t, r)
        raise MissingStateError(f"arrival node {node} at (t={t}, r={r}) not solved")

    def decision(self, node: ArrivalNode, t: int, r: int = 0, compute: bool = True) -> str:
        c = t + r
        key = (node.station, node.line, node.mask, c)
        dec = self._adec.get(key)
        if dec is None or dec[r] < 0:
            if not compute:
                raise MissingStateError(f"decision at {node} (t={t}, r={r}) not solved")
            self.value(node, t, r, compute=True)
            dec = self._adec[key]
        return "board" if dec[r] == 1 else "wait"

    def board_and_wait(self, node: ArrivalNode, t: int, r: int = 0) -> tuple[float, float]:
        """Both branch utilities at an arrival state (wait branch computed
        exactly on demand, even if pruning skipped it during the solve)."""
        board = self._line_value(node.station, node.line, t)
        wait = (
            self._station_value(node.station, node.mask, t, r) if node.mask and t > 0 else 0.0
        )
        return board, wait


@dataclass(frozen=True)
class SolveResult:
    root: float
    budget: int
    table: "UtilityTable"
    stats: SolveStats


class UtilityTable:
    """Read surface over a solver's memo: utilities in [0, 1] keyed by
    (node, t, r), boarding decisions at arrival nodes, line utilities by t."""

    def __init__(self, solver: Solver) -> None:
        self._solver = solver
        self.graph = solver.graph

    def value(self, node: Node, t: int, r: int = 0, compute: bool = True) -> float:
        return self._solver.value(node, t, r, compute=compute)

    def decision(self, node: ArrivalNode, t: int, r: int = 0, compute: bool = True) -> str:
        return self._solver.decision(node, t, r, compute=compute)

    def board_and_wait(self, node: ArrivalNode, t: int, r: int = 0) -> tuple[float, float]:
        return self._solver.board_and_wait(node, t, r)

    def iter_station_entries(self) -> Iterator[tuple[StationNode, int, int, float]]:
        for (y, mask, c), arr in self._solver._sdiag.items():
            node = StationNode(y, mask)
            for r in range(arr.size):
                v = arr[r]
                if not math.isnan(v):
                    yield node, c - r, r, float(v)

    def iter_arrival_entries(self) -> Iterator[tuple[ArrivalNode, int, int, float, str]]:
        for (y, i, mask, c), arr in self._solver._adiag.items():
            node = ArrivalNode(y, i, mask)
            dec = self._solver._adec[(y, i, mask, c)]
            for r in range(arr.size):
                v = arr[r]
                if not math.isnan(v):
                    yield node, c - r, r, float(v), ("board" if dec[r] == 1 else "wait")


def solve(
    graph: ExpandedGraph,
    budget_ticks: int,
    mode: SolveMode | str = SolveMode.PLAIN,
    heuristic: HeuristicConfig | None = None,
    debug_checks: bool = False,
) -> SolveResult:
    """Solve one origin/destination instance for one budget."""
    solver = Solver(graph, mode=mode, heuristic=heuristic, debug_checks=debug_checks)
    root = solver.root_value(budget_ticks)
    return SolveResult(root=root, budget=budget_ticks, table=UtilityTable(solver), stats=solver.stats)
