"""Integer program for outage-minimal BS/surface allocation.

``build_model`` turns precomputed tables into a pure binary program whose
objective counts outage slots.  The SINR requirement of a served link is
affine once the ratio is multiplied through by its denominator, and every
row is divided by the noise power so coefficients stay in a sane range.
Coverage is applied as variable fixing rather than constraint rows, and a
dummy variable paired with each allocation bit deactivates the SINR row of
an unused link through a big-M term.

``brute_force_optimum`` is an independent oracle for tiny instances: it
enumerates assignments slot by slot, re-deriving SINR, conflict, capacity,
readiness, and outage-window feasibility straight from the channel module
rather than from the constraint rows.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .allocation import AllocationSchedule

MU_SAFETY = 1.01

__all__ = ["MilpModel", "ModelError", "build_model", "extract_schedule", "brute_force_optimum"]


class ModelError(ValueError):
    """Model construction failed (e.g. an insufficient big-M constant)."""


@dataclass
class MilpModel:
    """Binary program with named variables and linear rows.

    Senses are "<", ">", or "=".  Variable bounds equal to each other pin a
    variable.  ``mu`` holds the per-(robot, slot) big-M actually emitted.
    """

    n_bs: int
    n_ris: int
    n_robots: int
    n_slots: int
    var_names: list
    lb: np.ndarray
    ub: np.ndarray
    objective: np.ndarray
    row_names: list = field(default_factory=list)
    row_cols: list = field(default_factory=list)
    row_coefs: list = field(default_factory=list)
    row_sense: list = field(default_factory=list)
    row_rhs: list = field(default_factory=list)
    mu: np.ndarray | None = None

    # variable family bases, assigned by build_model
    base_xb: int = 0
    base_xi: int = 0
    base_zb: int = 0
    base_zi: int = 0
    base_y: int = 0
    base_c: int = 0
    base_w: int = 0
    base_o: int = 0

    @property
    def n_vars(self) -> int:
        return len(self.var_names)

    @property
    def n_rows(self) -> int:
        return len(self.row_names)

    def xb(self, b: int, r: int, n: int) -> int:
        return self.base_xb + (b * self.n_robots + r) * self.n_slots + n

    def xi(self, i: int, r: int, n: int) -> int:
        return self.base_xi + (i * self.n_robots + r) * self.n_slots + n

    def zb(self, b: int, r: int, n: int) -> int:
        return self.base_zb + (b * self.n_robots + r) * self.n_slots + n

    def zi(self, i: int, r: int, n: int) -> int:
        return self.base_zi + (i * self.n_robots + r) * self.n_slots + n

    def y(self, i: int, r: int, n: int) -> int:
        return self.base_y + (i * self.n_robots + r) * self.n_slots + n

    def c(self, i: int, n: int) -> int:
        return self.base_c + i * self.n_slots + n

    def w(self, i: int, r: int, n: int) -> int:
        return self.base_w + (i * self.n_robots + r) * self.n_slots + n

    def o(self, r: int, n: int) -> int:
        return self.base_o + r * self.n_slots + n

    def add_row(self, name: str, cols, coefs, sense: str, rhs: float) -> None:
        self.row_names.append(name)
        self.row_cols.append(np.asarray(cols, dtype=np.int32))
        self.row_coefs.append(np.asarray(coefs, dtype=float))
        self.row_sense.append(sense)
        self.row_rhs.append(float(rhs))

    def fix(self, var: int, value: int) -> None:
        self.lb[var] = value
        self.ub[var] = value


def _allocate_variables(n_bs, n_ris, n_robots, n_slots) -> MilpModel:
    names = []
    model = MilpModel(
        n_bs=n_bs, n_ris=n_ris, n_robots=n_robots, n_slots=n_slots,
        var_names=names, lb=np.zeros(0), ub=np.zeros(0), objective=np.zeros(0),
    )

    def family(base_attr, label, dims):
        setattr(model, base_attr, len(names))
        for idx in itertools.product(*map(range, dims)):
            names.append(label + "_" + "_".join(map(str, idx)))

    family("base_xb", "Xb", (n_bs, n_robots, n_slots))
    family("base_xi", "Xi", (n_ris, n_robots, n_slots))
    family("base_zb", "Zb", (n_bs, n_robots, n_slots))
    family("base_zi", "Zi", (n_ris, n_robots, n_slots))
    family("base_y", "Y", (n_ris, n_robots, n_slots))
    family("base_c", "C", (n_ris, n_slots))
    family("base_w", "W", (n_ris, n_robots, n_slots))
    family("base_o", "O", (n_robots, n_slots))

    model.lb = np.zeros(len(names))
    model.ub = np.ones(len(names))
    model.objective = np.zeros(len(names))
    return model


def build_model(tables, scenario, mu: float | None = None, strengthen: bool = True) -> MilpModel:
    """Emit the full allocation program for one scenario.

    With ``mu=None`` the big-M of each (robot, slot) is sized from the worst
    interference that robot can receive; an explicit ``mu`` is checked for
    sufficiency and rejected with the offending magnitude if too small.

    ``strengthen`` additionally emits ``X + X' <= 1`` whenever a single
    interferer alone drives a link below threshold, clamps interference
    coefficients at the level that already violates the row (exact over
    binaries because the pairwise row excludes every stronger combination),
    and rescales each SINR row by its signal coefficient.  Feasible set and
    optimum are untouched; the LP relaxation tightens and the coefficient
    range collapses from ~1e14 to ~1e2.
    """
    cfg = scenario.config
    n_b, n_i, n_r, n_n = cfg.n_bs, cfg.n_ris, cfg.n_robots, cfg.n_slots
    model = _allocate_variables(n_b, n_i, n_r, n_n)

    lt = tables.tables
    noise = lt.noise
    g2 = lt.gain_bs * lt.gain_robot
    psi = tables.psi_linear
    u = tables.u_effective
    d_reconfig = cfg.d_reconfig
    cov = tables.coverage

    # conditioned coefficients: all SINR rows are divided through by the noise
    sig_bs = lt.p_direct * g2 / noise        # (N, B, R)
    sig_ris = lt.p_ris * g2 / noise          # (N, I, R)
    xi_bs = lt.xi_bs / noise                 # (N, B, R, R)
    xi_ris = lt.xi_ris / noise               # (N, I, R, R)

    covered_bs = np.zeros((n_n, n_b, n_r), dtype=bool)
    covered_ris = np.zeros((n_n, n_i, n_r), dtype=bool)
    for n in range(n_n):
        for (b, r) in cov.bs_robot[n]:
            covered_bs[n, b, r] = True
        for (i, r) in cov.ris_robot[n]:
            covered_ris[n, i, r] = True

    # big-M per (robot, slot): must dominate the worst admissible denominator
    worst = np.zeros((n_r, n_n))
    for n in range(n_n):
        if n_r == 0:
            break
        best_src = np.zeros((n_r, n_r))  # (rp, victim)
        if n_b:
            best_src = np.maximum(best_src, xi_bs[n].max(axis=0))
        if n_i:
            best_src = np.maximum(best_src, xi_ris[n].max(axis=0))
        worst[:, n] = best_src.sum(axis=0)  # sums over rp; diagonal terms are 0
    mu_needed = psi[:, None] * (1.0 + worst) if n_r else np.zeros((0, n_n))
    if mu is None:
        mu_rn = mu_needed * MU_SAFETY + 1.0
    else:
        if n_r and float(mu) <= mu_needed.max():
            raise ModelError(
                f"big-M constant {mu:g} is insufficient: the worst conditioned "
                f"denominator reaches {mu_needed.max():g}"
            )
        mu_rn = np.full((n_r, n_n), float(mu))
    model.mu = mu_rn

    # coverage as variable fixing
    for n in range(n_n):
        for b in range(n_b):
            for r in range(n_r):
                if not covered_bs[n, b, r]:
                    model.fix(model.xb(b, r, n), 0)
                    model.fix(model.zb(b, r, n), 1)
        for i in range(n_i):
            for r in range(n_r):
                if not covered_ris[n, i, r]:
                    model.fix(model.xi(i, r, n), 0)
                    model.fix(model.zi(i, r, n), 1)

    for r in range(n_r):
        for n in range(n_n):
            model.objective[model.o(r, n)] = 1.0

    for n in range(n_n):
        # single assignment per robot
        for r in range(n_r):
            cols = [model.xb(b, r, n) for b in range(n_b)] + [model.xi(i, r, n) for i in range(n_i)]
            if cols:
                model.add_row(f"one_{r}_{n}", cols, np.ones(len(cols)), "<", 1.0)

        # angular conflicts and surface capacity
        for i in range(n_i):
            for (ra, rb) in tables.conflicts.at(i, n):
                model.add_row(
                    f"confl_{i}_{ra}_{rb}_{n}",
                    [model.xi(i, ra, n), model.xi(i, rb, n)], [1.0, 1.0], "<", 1.0)
            cols = [model.xi(i, r, n) for r in range(n_r)]
            if cols:
                model.add_row(f"cap_{i}_{n}", cols, np.ones(len(cols)), "<", float(u))

        # interference column lists shared by all SINR rows of victim r
        for r in range(n_r):
            int_cols = []
            int_coefs = []
            ris_src = []  # source surface of each xi_ris column, -1 for BS columns
            for rp in range(n_r):
                if rp == r:
                    continue
                for b in range(n_b):
                    v = xi_bs[n, b, rp, r]
                    if v > 0.0 and covered_bs[n, b, rp]:
                        int_cols.append(model.xb(b, rp, n))
                        int_coefs.append(v)
                        ris_src.append(-1)
                for i in range(n_i):
                    v = xi_ris[n, i, rp, r]
                    if v > 0.0 and covered_ris[n, i, rp]:
                        int_cols.append(model.xi(i, rp, n))
                        int_coefs.append(v)
                        ris_src.append(i)
            int_cols = np.asarray(int_cols, dtype=np.int32)
            int_coefs = np.asarray(int_coefs, dtype=float)
            ris_src = np.asarray(ris_src, dtype=np.int32)

            def emit_sinr(label, xvar, zvar, sig, terms, term_cols):
                """One served-link quality row, optionally clamped and rescaled.

                ``terms`` are the admissible interference coefficients for
                this row (noise-conditioned), ``sig`` the signal coefficient.
                """
                if strengthen and sig < psi[r]:
                    # below threshold even alone: the link is unusable
                    model.fix(xvar, 0)
                    model.fix(zvar, 1)
                    return
                if strengthen:
                    kill_level = sig / psi[r] - 1.0  # interference a live link tolerates
                    for j in np.nonzero(terms > kill_level)[0]:
                        model.add_row(f"kill{label}_{j}",
                                      [xvar, int(term_cols[j])], [1.0, 1.0], "<", 1.0)
                    terms = np.minimum(terms, kill_level + 1.0)
                    mu_row = psi[r] * (1.0 + terms.sum()) * MU_SAFETY + 1.0
                    if mu is not None:
                        mu_row = float(mu)
                    scale = 1.0 / sig
                else:
                    mu_row = mu_rn[r, n]
                    scale = 1.0
                cols = np.concatenate(([xvar, zvar], term_cols))
                coefs = np.concatenate(([sig, mu_row], -psi[r] * terms)) * scale
                model.add_row(f"snr{label}", cols, coefs, ">", float(psi[r]) * scale)
                model.add_row(f"pair{label}", [xvar, zvar], [1.0, 1.0], "=", 1.0)

            for b in range(n_b):
                if not covered_bs[n, b, r]:
                    continue
                emit_sinr(f"B_{b}_{r}_{n}", model.xb(b, r, n), model.zb(b, r, n),
                          sig_bs[n, b, r], int_coefs, int_cols)
            for i in range(n_i):
                if not covered_ris[n, i, r]:
                    continue
                keep = ris_src != i  # nulling removes same-surface interference
                emit_sinr(f"I_{i}_{r}_{n}", model.xi(i, r, n), model.zi(i, r, n),
                          sig_ris[n, i, r], int_coefs[keep], int_cols[keep])

        # usage history, readiness, and service rows
        lo = max(n - d_reconfig + 1, 0)
        for i in range(n_i):
            for r in range(n_r):
                cols = [model.xi(i, r, nn) for nn in range(lo, n + 1)] + [model.y(i, r, n)]
                coefs = [1.0] * (n + 1 - lo) + [-float(d_reconfig)]
                model.add_row(f"hist_{i}_{r}_{n}", cols, coefs, "<", 0.0)
            cols = [model.y(i, r, n) for r in range(n_r)] + [model.c(i, n)]
            coefs = [1.0] * n_r + [-float(n_r)]
            if n_r:
                model.add_row(f"busy_{i}_{n}", cols, coefs, "<", float(u))
            for r in range(n_r):
                model.add_row(f"wx_{i}_{r}_{n}",
                              [model.w(i, r, n), model.xi(i, r, n)], [1.0, -1.0], "<", 0.0)
                model.add_row(f"wc_{i}_{r}_{n}",
                              [model.w(i, r, n), model.c(i, n)], [1.0, 1.0], "<", 1.0)

        for r in range(n_r):
            cols = ([model.o(r, n)]
                    + [model.w(i, r, n) for i in range(n_i)]
                    + [model.xb(b, r, n) for b in range(n_b)])
            model.add_row(f"serve_{r}_{n}", cols, np.ones(len(cols)), ">", 1.0)

    # outage windows: strictly fewer than K_r outages per K_r-slot window
    for r in range(n_r):
        k = int(scenario.k_out[r])
        for n in range(n_n):
            lo = max(n - k + 1, 0)
            cols = [model.o(r, nn) for nn in range(lo, n + 1)]
            model.add_row(f"win_{r}_{n}", cols, np.ones(len(cols)), "<", float(k - 1))

    return model


def extract_schedule(model: MilpModel, values: np.ndarray) -> AllocationSchedule:
    """Map a 0/1 solution vector back to an allocation schedule.

    An outage slot wins over any stray allocation bit (dropping a
    transmission can only loosen every remaining constraint); a robot marked
    served without exactly one allocation bit indicates a backend bug.
    """
    values = np.asarray(values)
    sched = AllocationSchedule.all_outage(model.n_robots, model.n_slots)
    for r in range(model.n_robots):
        for n in range(model.n_slots):
            if values[model.o(r, n)] >= 0.5:
                continue
            hits = [("bs", b) for b in range(model.n_bs) if values[model.xb(b, r, n)] >= 0.5]
            hits += [("ris", i) for i in range(model.n_ris) if values[model.xi(i, r, n)] >= 0.5]
            if len(hits) != 1:
                raise RuntimeError(
                    f"inconsistent solution: robot {r} slot {n} marked served "
                    f"with {len(hits)} allocation bits")
            kind, idx = hits[0]
            if kind == "bs":
                sched.assign_bs(r, n, idx)
            else:
                sched.assign_ris(r, n, idx)
    return sched


GUARD_LIMITS = {"n_robots": 3, "n_slots": 4, "n_bs": 2, "n_ris": 2}


def brute_force_optimum(tables, scenario):
    """Exhaustive outage minimum for guarded tiny instances.

    Returns (objective, schedule); (None, None) when no schedule satisfies
    the outage windows.  Feasibility of every slot combination is evaluated
    through the channel model, independently of the constraint rows.
    """
    cfg = scenario.config
    for attr, limit in GUARD_LIMITS.items():
        if getattr(cfg, attr) > limit:
            raise ValueError(f"brute force guard exceeded: {attr} > {limit}")

    n_r, n_n, n_b, n_i = cfg.n_robots, cfg.n_slots, cfg.n_bs, cfg.n_ris
    lt = tables.tables
    g2 = lt.gain_bs * lt.gain_robot
    psi = tables.psi_linear
    u = tables.u_effective
    d_reconfig = cfg.d_reconfig
    k_out = scenario.k_out.astype(int)

    if n_r == 0:
        return 0, AllocationSchedule.all_outage(0, n_n)

    def slot_combos(n):
        options = []
        for r in range(n_r):
            opts = [None]
            opts += [("bs", b) for b in range(n_b) if (b, r) in tables.coverage.bs_robot[n]]
            opts += [("ris", i) for i in range(n_i) if (i, r) in tables.coverage.ris_robot[n]]
            options.append(opts)
        feasible = []
        for combo in itertools.product(*options):
            per_ris = {}
            for r, a in enumerate(combo):
                if a is not None and a[0] == "ris":
                    per_ris.setdefault(a[1], set()).add(r)
            if any(len(s) > u for s in per_ris.values()):
                continue
            conflicted = False
            for i, served in per_ris.items():
                for (ra, rb) in tables.conflicts.at(i, n):
                    if ra in served and rb in served:
                        conflicted = True
                        break
                if conflicted:
                    break
            if conflicted:
                continue
            ok = True
            for r, a in enumerate(combo):
                if a is None:
                    continue
                if a[0] == "bs":
                    signal = lt.p_direct[n, a[1], r]
                    own = None
                else:
                    signal = lt.p_ris[n, a[1], r]
                    own = a[1]
                interference = 0.0
                for rp, ap in enumerate(combo):
                    if rp == r or ap is None:
                        continue
                    if ap[0] == "bs":
                        interference += lt.xi_bs[n, ap[1], rp, r]
                    elif ap[1] != own:
                        interference += lt.xi_ris[n, ap[1], rp, r]
                if signal * g2 / (lt.noise + interference) < psi[r]:
                    ok = False
                    break
            if not ok:
                continue
            outages = sum(1 for a in combo if a is None)
            use = tuple(frozenset(per_ris.get(i, ())) for i in range(n_i))
            feasible.append((combo, outages, use))
        return feasible

    combos = [slot_combos(n) for n in range(n_n)]
    empty_hist = tuple(tuple(frozenset() for _ in range(n_i)) for _ in range(max(d_reconfig - 1, 0)))
    best = {"obj": None, "path": None}
    memo = {}

    def search(n, runs, hist, acc, path):
        if best["obj"] is not None and acc >= best["obj"]:
            return
        if n == n_n:
            best["obj"] = acc
            best["path"] = list(path)
            return
        key = (n, runs, hist)
        seen = memo.get(key)
        if seen is not None and seen <= acc:
            return
        memo[key] = acc
        for combo, outages, use in combos[n]:
            ok = True
            new_runs = []
            for r, a in enumerate(combo):
                if a is None:
                    run = runs[r] + 1
                    if run >= k_out[r]:
                        ok = False
                        break
                    new_runs.append(run)
                else:
                    new_runs.append(0)
            if not ok:
                continue
            # readiness: serving through a surface whose D-window saw > U robots
            for i in range(n_i):
                if not use[i]:
                    continue
                distinct = set(use[i])
                for past in hist:
                    distinct |= past[i]
                if len(distinct) > u:
                    ok = False
                    break
            if not ok:
                continue
            new_hist = (hist + (use,))[1:] if hist else ()
            path.append(combo)
            search(n + 1, tuple(new_runs), new_hist, acc + outages, path)
            path.pop()

    search(0, (0,) * n_r, empty_hist, 0, [])
    if best["obj"] is None:
        return None, None
    sched = AllocationSchedule.all_outage(n_r, n_n)
    for n, combo in enumerate(best["path"]):
        for r, a in enumerate(combo):
            if a is None:
                continue
            if a[0] == "bs":
                sched.assign_bs(r, n, a[1])
            else:
                sched.assign_ris(r, n, a[1])
    return best["obj"], sched
