"""Scenario files in, CSV/JSON verdict tables out.

A scenario is a JSON object ``{"kind": ..., "params": {...}}`` with optional
``name``, ``seed`` and ``description``.  Each run produces rows of two
classes: ``assert`` rows are proved inequalities whose failure sets exit
code 1, ``report`` rows (constant chains, regime boundaries, VC fits, Monte
Carlo coverage) are informational only.
"""
from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

import jsonschema

from . import covering, dyadic, halving, tail_exact, tail_mc
from .rational import as_fraction, format_fraction
from .space import (
    FiniteSpace,
    FunctionTable,
    loads,
    make_uniform_space,
    subset_indicator_class,
)

EXIT_OK, EXIT_ASSERT, EXIT_INPUT = 0, 1, 2

COLUMNS = (
    "section", "check", "class", "method", "lhs", "rhs", "holds", "margin_log10",
    "in_regime", "note",
)


class ScenarioError(ValueError):
    """Malformed scenario input; maps to exit code 2."""


# ---------------------------------------------------------------------------
# schema
# ---------------------------------------------------------------------------

_RATIONAL = {"type": ["integer", "number", "string"]}
_POS_INT = {"type": "integer", "minimum": 1}
_NONNEG_INT = {"type": "integer", "minimum": 0}

_INSTANCE = {
    "type": "object",
    "properties": {
        "table": {"type": "array", "minItems": 1, "items": {"type": "array", "items": _RATIONAL}},
        "weights": {"type": "array", "minItems": 1, "items": _RATIONAL},
        "singletons": _POS_INT,
        "subsets": {
            "type": "object",
            "properties": {"N": _POS_INT, "L": _POS_INT},
            "required": ["N", "L"],
            "additionalProperties": False,
        },
        "file": {"type": "string"},
        "implicit": {
            "type": "object",
            "properties": {
                "class_size": _POS_INT,
                "atoms": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "properties": {"mask": _POS_INT, "measure": _RATIONAL},
                        "required": ["mask", "measure"],
                        "additionalProperties": False,
                    },
                },
            },
            "required": ["class_size", "atoms"],
            "additionalProperties": False,
        },
    },
    "oneOf": [
        {"required": ["table"]},
        {"required": ["singletons"]},
        {"required": ["subsets"]},
        {"required": ["file"]},
        {"required": ["implicit"]},
    ],
    "additionalProperties": False,
}


def _params(properties: dict, required: list[str]) -> dict:
    return {
        "type": "object",
        "properties": properties,
        "required": required,
        "additionalProperties": False,
    }


_EPS_GRID = {"type": "array", "minItems": 1, "items": _RATIONAL}

PARAM_SCHEMAS = {
    "cover": _params(
        {
            "instance": _INSTANCE,
            "epsilon_grid": _EPS_GRID,
            "exponents": {"type": "array", "minItems": 1, "items": _POS_INT},
            "dirichlet_draws": _NONNEG_INT,
            "hill_steps": _NONNEG_INT,
        },
        ["instance", "epsilon_grid"],
    ),
    "vc": _params(
        {
            "instance": _INSTANCE,
            "sets": {"type": "array", "items": {"type": "array", "items": _NONNEG_INT}},
            "ground_size": _POS_INT,
            "B": _RATIONAL,
            "K": _POS_INT,
            "n_max": _POS_INT,
        },
        ["B", "K"],
    ),
    "tail": _params(
        {
            "instance": _INSTANCE,
            "n": _POS_INT,
            "u": _RATIONAL,
            "strict": {"type": "boolean"},
            "method": {"enum": ["exact", "mc", "both"]},
            "samples": _POS_INT,
        },
        ["instance", "n", "u"],
    ),
    "bp": _params(
        {
            "instance": _INSTANCE,
            "p": _POS_INT,
            "D": {"anyOf": [_RATIONAL, {"const": "fit"}]},
            "L": _POS_INT,
            "epsilon_grid": _EPS_GRID,
        },
        ["instance", "p"],
    ),
    "halving": _params(
        {
            "rho": _RATIONAL,
            "N0": _POS_INT,
            "k_max": _NONNEG_INT,
            "p": _NONNEG_INT,
            "D": _RATIONAL,
            "L": _POS_INT,
        },
        ["rho"],
    ),
    "dyadic": _params(
        {"instance": _INSTANCE, "n": {"type": "integer", "minimum": 2}, "u": _RATIONAL,
         "trials": _NONNEG_INT},
        ["instance", "n", "u"],
    ),
    "discretize": _params(
        {
            "instance": _INSTANCE,
            "n": _POS_INT,
            "u": _RATIONAL,
            "k": {"type": "array", "minItems": 1, "items": _NONNEG_INT},
        },
        ["instance", "n", "u"],
    ),
    "full-report": _params(
        {
            "instance": _INSTANCE,
            "n": _POS_INT,
            "u": _RATIONAL,
            "p": _POS_INT,
            "L": _POS_INT,
            "epsilon_grid": _EPS_GRID,
            "samples": _POS_INT,
        },
        ["instance", "p"],
    ),
}

SCENARIO_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"enum": sorted(PARAM_SCHEMAS)},
        "name": {"type": "string", "pattern": r"^[A-Za-z0-9_.-]+$"},
        "description": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "params": {"type": "object"},
    },
    "required": ["kind", "params"],
    "additionalProperties": False,
}


def _validate(doc: Any, schema: dict, prefix: str) -> None:
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        lines = []
        for err in errors:
            path = "/".join(str(p) for p in err.absolute_path)
            lines.append(f"{prefix}{'/' + path if path else ''}: {err.message}")
        raise ScenarioError("\n".join(lines))


@dataclass(frozen=True)
class Scenario:
    kind: str
    params: dict
    seed: int
    name: str
    base_dir: Path


def parse_scenario(text: str, name: str = "scenario", base_dir: Path | None = None) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    _validate(doc, SCENARIO_SCHEMA, "scenario")
    _validate(doc["params"], PARAM_SCHEMAS[doc["kind"]], "params")
    return Scenario(
        doc["kind"], doc["params"], doc.get("seed", 0), doc.get("name", name),
        base_dir or Path("."),
    )


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_scenario(text, path.stem, path.parent)


# ---------------------------------------------------------------------------
# instances
# ---------------------------------------------------------------------------

_POWER = re.compile(r"^\s*(\d+)\s*\^\s*(-?\d+)\s*$")


def parse_rational(value, where: str = "value") -> Fraction:
    """Integers, floats (by their shortest repr), 'p/q', decimals or 'b^e'."""
    if isinstance(value, str):
        m = _POWER.match(value)
        if m:
            return Fraction(int(m.group(1))) ** int(m.group(2))
    try:
        return as_fraction(value)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise ScenarioError(f"{where}: cannot read {value!r} as a rational") from exc


@dataclass
class Instance:
    table: FunctionTable | None = None
    space: FiniteSpace | None = None
    family: tail_exact.ImplicitFamily | None = None

    def as_family(self) -> tail_exact.ImplicitFamily:
        if self.family is None:
            self.family = tail_exact.ImplicitFamily.from_table(self.table, self.space)
        return self.family

    def cover_table(self) -> FunctionTable:
        """Explicit table for covering numbers (compressed for implicit families)."""
        if self.table is not None:
            return self.table
        return self.family.compressed_table()[0]


def build_instance(desc: dict, base_dir: Path = Path(".")) -> Instance:
    try:
        if "table" in desc:
            table = FunctionTable.from_rows(
                [[parse_rational(v, "instance/table") for v in row] for row in desc["table"]]
            )
            if "weights" in desc:
                space = FiniteSpace(
                    tuple(parse_rational(w, "instance/weights") for w in desc["weights"])
                )
            else:
                space = make_uniform_space(table.point_count)
            table.check_space(space)
            return Instance(table, space)
        if "weights" in desc:
            raise ScenarioError("instance/weights is only valid together with a table")
        if "singletons" in desc:
            N = desc["singletons"]
            return Instance(subset_indicator_class(N, 1), make_uniform_space(N))
        if "subsets" in desc:
            N, L = desc["subsets"]["N"], desc["subsets"]["L"]
            return Instance(subset_indicator_class(N, L), make_uniform_space(N))
        if "file" in desc:
            path = base_dir / desc["file"]
            try:
                space, table = loads(path.read_text())
            except OSError as exc:
                raise ScenarioError(f"instance/file: cannot read {path}") from exc
            if table is None:
                raise ScenarioError(f"instance/file: {path} holds no class")
            space = space or make_uniform_space(table.point_count)
            table.check_space(space)
            return Instance(table, space)
        imp = desc["implicit"]
        atoms = tuple(
            (a["mask"], parse_rational(a["measure"], "instance/implicit/atoms"))
            for a in imp["atoms"]
        )
        return Instance(family=tail_exact.ImplicitFamily(imp["class_size"], atoms))
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(f"instance: {exc}") from exc


def _need_table(inst: Instance, what: str) -> None:
    if inst.table is None:
        raise ScenarioError(f"{what} needs an explicit table instance, not an implicit family")


# ---------------------------------------------------------------------------
# rows
# ---------------------------------------------------------------------------

@dataclass
class Row:
    section: str
    check: str
    cls: str  # assert | report
    method: str = ""
    lhs: Any = None
    rhs: Any = None
    holds: bool | None = None
    margin_log10: float | None = None
    in_regime: bool | None = None
    note: str = ""


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return format_fraction(v)
    if isinstance(v, float):
        if math.isinf(v) or math.isnan(v):
            return str(v)
        return f"{v:.17g}"
    return str(v)


def row_record(row: Row) -> dict[str, str]:
    d = asdict(row)
    d["class"] = d.pop("cls")
    return {c: format_value(d[c]) for c in COLUMNS}


def exit_code_for(rows: list[Row]) -> int:
    return EXIT_ASSERT if any(r.cls == "assert" and r.holds is False for r in rows) else EXIT_OK


def emit_summary(rows: list[Row], out_dir: str | Path | None = None, stem: str = "report") -> str:
    """Human-readable table; writes ``stem.csv`` and ``stem.json`` when ``out_dir`` is given."""
    records = [row_record(r) for r in rows]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(records)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{stem}.csv").write_text(buf.getvalue())
        failed = sum(1 for r in rows if r.cls == "assert" and r.holds is False)
        payload = {
            "rows": records,
            "assert_failures": failed,
            "exit_code": exit_code_for(rows),
        }
        (out / f"{stem}.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    shown = ("section", "check", "class", "lhs", "rhs", "holds")
    width = {c: max([len(c)] + [min(len(r[c]), 40) for r in records]) for c in shown}
    lines = ["  ".join(c.ljust(width[c]) for c in shown)]
    for r in records:
        cells = [(r[c] if len(r[c]) <= 40 else r[c][:37] + "...").ljust(width[c]) for c in shown]
        lines.append("  ".join(cells))
    n_assert = sum(1 for r in rows if r.cls == "assert")
    failed = sum(1 for r in rows if r.cls == "assert" and r.holds is False)
    lines.append(f"{len(rows)} rows, {n_assert} assertions, {failed} failed")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# sections
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RunContext:
    seed: int = 0
    workers: int = 1


def _bound_row(section, name, lhs: Fraction, bound, bound_log10, regime, method) -> Row:
    chk = tail_exact.compare_bound(name, lhs, bound, regime, bound_log10)
    return Row(section, name, "assert" if regime else "report", method, lhs, bound,
               chk.satisfied, chk.margin_log10, regime,
               "" if regime else "hypotheses not met; comparison is informational")


def cover_rows(inst: Instance, params: dict, ctx: RunContext) -> tuple[list[Row], covering.DenseParams]:
    table = inst.cover_table()
    eps_grid = [parse_rational(e, "epsilon_grid") for e in params["epsilon_grid"]]
    fit = covering.fit_dense_params(
        table,
        eps_grid,
        exponent_candidates=params.get("exponents", (1, 2, 3, 4)),
        dirichlet_draws=params.get("dirichlet_draws", 8),
        hill_steps=params.get("hill_steps", 5),
        seed=ctx.seed,
    )
    rows = []
    for ev in fit.evidence:
        if ev.m_exact is not None:
            rows.append(Row("cover", f"min cover <= greedy cover [{ev.measure_id}, eps={format_fraction(ev.epsilon)}]",
                            "assert", "exhaustive", ev.m_exact, ev.m_greedy, ev.m_exact <= ev.m_greedy))
    space = inst.space if inst.table is not None else inst.family.compressed_table()[1]
    for eps in eps_grid:
        cert = covering.greedy_cover(table, space, eps)
        rows.append(Row("cover", f"greedy net gap < eps [uniform-or-given, eps={format_fraction(eps)}]",
                        "assert", "greedy", cert.worst_gap, eps, cert.worst_gap < eps,
                        note=f"{cert.size} centers"))
    for L, D in fit.per_exponent.items():
        rows.append(Row("cover", f"fitted D at L={L}", "report", "measure-family", D,
                        note="chosen" if L == fit.exponent_L else ""))
    return rows, fit


def _vc_sets(inst: Instance | None, params: dict) -> tuple[list[list[int]], int | None]:
    if "sets" in params:
        return params["sets"], params.get("ground_size")
    if inst is None:
        raise ScenarioError("vc needs either sets or an instance")
    _need_table(inst, "vc")
    if not inst.table.is_indicator:
        raise ScenarioError("vc needs a 0/1-valued class")
    sets = [[x for x, v in enumerate(row) if v == 1] for row in inst.table.values]
    return sets, params.get("ground_size", inst.table.point_count)


def vc_rows(inst: Instance | None, params: dict) -> list[Row]:
    sets, ground = _vc_sets(inst, params)
    try:
        dim = covering.vc_dimension(sets, ground)
        masks_ground = ground if ground is not None else max((max(s) for s in sets if s), default=-1) + 1
        n_max = min(params.get("n_max", masks_ground), masks_ground)
        fit = covering.check_vc_bound(sets, parse_rational(params["B"], "B"), params["K"],
                                      range(1, n_max + 1), ground)
    except ValueError as exc:
        raise ScenarioError(f"vc: {exc}") from exc
    rows = [Row("vc", "vc dimension", "report", "exhaustive", dim)]
    for r in fit.per_n_report:
        sauer = sum(math.comb(r.n, i) for i in range(dim + 1))
        rows.append(Row("vc", f"traces <= sum_(i<=d) C(n,i) [n={r.n}]", "assert", "exhaustive",
                        r.traces, sauer, r.traces <= sauer))
        rows.append(Row("vc", f"traces <= B n^K [n={r.n}]", "report", "exhaustive",
                        r.traces, r.bound, r.holds))
    return rows


def tail_rows(inst: Instance, params: dict, ctx: RunContext) -> list[Row]:
    _need_table(inst, "tail")
    n, u = params["n"], parse_rational(params["u"], "u")
    strict = params.get("strict", False)
    method = params.get("method", "both")
    op = ">" if strict else ">="
    rows = []
    exact = None
    if method in ("exact", "both"):
        exact = tail_exact.exact_sup_tail(inst.table, inst.space, n, u, strict).probability
        rows.append(Row("tail", f"P(sup S_n {op} u) [n={n}, u={format_fraction(u)}]", "report",
                        "exact-dp", exact))
        if inst.table.point_count**n <= 10**5:
            brute = tail_exact.enumerate_sup_tail(inst.table, inst.space, n, u, strict)
            rows.append(Row("tail", "atom DP equals enumeration", "assert", "enumeration",
                            exact, brute, exact == brute))
    if method in ("mc", "both"):
        cfg = tail_mc.McConfig(params.get("samples", 100_000), ctx.seed, ctx.workers)
        est = tail_mc.mc_sup_tail(inst.table, inst.space, n, u, strict, cfg)
        rows.append(Row("tail", f"P(sup S_n {op} u) [n={n}, u={format_fraction(u)}]", "report",
                        "monte-carlo", est.estimate,
                        note=f"hits={est.hit_count}/{est.sample_count} "
                             f"ci99=[{est.ci_low:.6g}, {est.ci_high:.6g}] seed={est.seed}"))
        if exact is not None:
            inside = Fraction(est.ci_low) <= exact <= Fraction(est.ci_high)
            rows.append(Row("tail", "exact value inside the 99% CI", "report", "monte-carlo",
                            exact, f"[{est.ci_low:.17g}, {est.ci_high:.17g}]", inside))
    return rows


def bp_rows(inst: Instance, params: dict, ctx: RunContext, D=None) -> list[Row]:
    p = params["p"]
    L = params.get("L", 1)
    family = inst.as_family()
    res = tail_exact.bp_measure(p, family=family)
    prob = res.probability
    rho = res.details["rho_hat"]
    rows = [Row("bp", f"measure of B_p [p={p}]", "report", res.method, prob,
                note=f"rho={format_fraction(rho)}")]
    rows.append(Row("bp", "max_f mu(f)^p <= mu(B_p) <= sum_f mu(f)^p", "assert", res.method,
                    prob, res.details["sum_single"],
                    res.details["max_single"] <= prob <= res.details["sum_single"]))
    if D is None:
        D = params.get("D", 1)
    if D == "fit":
        grid = params.get("epsilon_grid", ["1/2", "1/4"])
        fit = covering.fit_dense_params(
            inst.cover_table(), [parse_rational(e, "epsilon_grid") for e in grid],
            exponent_candidates=(L,), dirichlet_draws=8, hill_steps=5, seed=ctx.seed,
        )
        D = fit.parameter_D
    D = parse_rational(D, "D") if not isinstance(D, (Fraction, float)) else D
    if not 0 < rho < 1:
        rows.append(Row("bp", "2D rho^(p/4) bound", "report", note="rho outside (0, 1); no bound"))
        return rows
    hyps = tail_exact.regime_check(D, L, rho, u_or_p=p, context="thm1A")
    regime = tail_exact.in_regime(hyps)
    rows.append(_bound_row(
        "bp", "mu(B_p) <= 2D rho^(p/4)", prob, tail_exact.bound_theorem1A(D, rho, p),
        tail_exact.bound_theorem1A_log10(D, rho, p), regime, res.method,
    ))
    rows[-1].note = (rows[-1].note + f" D={format_value(D)} L={L}").strip()
    for h in hyps:
        rows.append(Row("bp", f"hypothesis: {h.name}", "report", "exact", holds=h.holds,
                        note="informational" if h.informational else ""))
    return rows


def halving_rows(params: dict) -> list[Row]:
    rho = parse_rational(params["rho"], "rho")
    if not 0 < rho < 1:
        raise ScenarioError("rho must lie in (0, 1)")
    N0 = params.get("N0") or halving.default_N0(rho)
    k_max = params.get("k_max", 3)
    p = params.get("p", 2)
    D, L = parse_rational(params.get("D", 1), "D"), params.get("L", 1)
    sched = halving.build_schedule(rho, N0, k_max)
    rows = [
        Row("halving", "N0 window lower end", "report", "exact", N0, holds=sched.window_lower_ok),
        Row("halving", "N0 window upper end", "report", "exact", N0, holds=sched.window_upper_ok),
    ]
    for lv in sched.levels:
        rows.append(Row("halving", f"rho_k >= rho/2 [k={lv.k}]", "report", "interval",
                        lv.rho_low, rho / 2, lv.rho_at_least_half,
                        note=f"rho_k in [{lv.rho_low:.17g}, {lv.rho_high:.17g}] N_k={lv.N_k}"))
        rows.append(Row("halving", f"log C_k < 2 rho [k={lv.k}]", "report", "interval",
                        lv.C_k, holds=lv.C_k_below_exp))
    for k in range(k_max):
        if p > N0 * 2**k:
            continue
        for st in halving.chain_report(rho, N0, k, p, D, L):
            cls = "assert" if st.step == "counting-factor identity" else "report"
            rows.append(Row("halving", f"{st.step} [k={k}]", cls, "interval",
                            st.lhs_log, st.rhs_log, st.holds,
                            None if cls == "assert" else (st.rhs_log - st.lhs_log) / math.log(10)))
    return rows


def dyadic_rows(inst: Instance, params: dict, ctx: RunContext) -> list[Row]:
    _need_table(inst, "dyadic")
    n, u = params["n"], parse_rational(params["u"], "u")
    table, space = inst.table, inst.space
    rows = []
    dom = dyadic.domination_check(table, space, n, params.get("trials", 200), ctx.seed)
    rows.append(Row("dyadic", "S_n(f) <= sum_j 2^(1-j) H_j + 1", "assert", "sampled-exact",
                    dom.violations, 0, dom.violations == 0,
                    note=f"trials={dom.trials} min_slack={format_fraction(dom.min_slack)}"))
    if u >= 1:
        for j in range(1, dyadic.dyadic_levels(n) + 1):
            res = dyadic.dn_measure(table, space, n, u, j)
            d = res.details
            note = f"t={d['t']}"
            if "union_overcount" in d:
                note += f" overcount={format_fraction(d['union_overcount'])}"
            rows.append(Row("dyadic", f"mu(D_n(u,j)) [j={j}]", "report", res.method,
                            res.probability, d.get("bound_log10"), note=note))
    sub = dyadic.subadditivity_check(table, space, n, u)
    rows.append(Row("dyadic", "P(sup S_n > u) <= sum_j mu(D_n(u,j))", "assert", "exact-dp",
                    sub.lhs, sub.rhs, sub.holds))
    return rows


def discretize_rows(inst: Instance, params: dict) -> list[Row]:
    _need_table(inst, "discretize")
    n, u = params["n"], parse_rational(params["u"], "u")
    table, space = inst.table, inst.space
    cells = dyadic.cell_partition(table, space, n)
    avg = dyadic.cell_average(table, space, cells)
    dev = max(
        (abs(a - b) for ra, rb in zip(table.values, avg.values) for a, b in zip(ra, rb)),
        default=Fraction(0),
    )
    rows = [Row("discretize", "max |f - f~| <= 1/n", "assert", "exact", dev, Fraction(1, n),
                dev <= Fraction(1, n), note=f"cells={cells.cell_count}")]
    integrals_ok = all(
        sum((w * v for w, v in zip(space.weights, ra)), Fraction(0))
        == sum((w * v for w, v in zip(space.weights, rb)), Fraction(0))
        for ra, rb in zip(table.values, avg.values)
    )
    rows.append(Row("discretize", "row integrals preserved", "assert", "exact", holds=integrals_ok))
    shift = dyadic.averaging_shift_check(table, space, n, u)
    rows.append(Row("discretize", "P(sup S_n(f) > u+1) <= P(sup S_n(f~) > u)", "assert",
                    "exact-dp", shift.lhs, shift.rhs, shift.holds))
    for k in params.get("k", [4, 8]):
        rm = dyadic.round_measure(cells.masses, k)
        grid = Fraction(1, 2**k)
        ok = (
            sum(rm.masses, Fraction(0)) == 1
            and all(m >= 0 and (m / grid).denominator == 1 for m in rm.masses)
            and all(abs(a - b) <= grid for a, b in zip(rm.masses, rm.original))
        )
        rows.append(Row("discretize", f"rounded masses on grid, total 1, deviation <= 2^-k [k={k}]",
                        "assert", "exact", holds=ok))
        if 2**k <= 4096:
            hc = dyadic.hat_distribution_check(table, space, n, u, k)
            rows.append(Row("discretize", f"cell tail equals hat-space tail [k={k}]", "assert",
                            "exact-dp", hc.cell_side, hc.hat_side, hc.equal))
    limit, sweep = dyadic.convergence_sweep(table, space, n, u, params.get("k", [4, 8]))
    for r in sweep:
        rows.append(Row("discretize", f"|tail_k - tail| <= n TV [k={r.k}]", "assert", "exact-dp",
                        r.error, r.tv_envelope, r.within,
                        note=f"coarse envelope {format_fraction(r.coarse_envelope)}"))
    return rows


def full_report_rows(inst: Instance, params: dict, ctx: RunContext) -> list[Row]:
    grid = params.get("epsilon_grid", ["1/2", "1/4"])
    L = params.get("L", 1)
    cover, fit = cover_rows(inst, {"epsilon_grid": grid, "exponents": [L]}, ctx)
    rows = list(cover)
    if inst.family is not None or inst.table.is_indicator:
        rows += bp_rows(inst, {"p": params["p"], "L": L}, ctx, D=fit.parameter_D)
    if inst.table is not None:
        if inst.table.is_indicator:
            rows += vc_rows(inst, {"B": 1, "K": 1, "n_max": min(inst.table.point_count, 8)})
        if "n" in params and "u" in params:
            rows += tail_rows(inst, {"n": params["n"], "u": params["u"],
                                     "samples": params.get("samples", 20_000)}, ctx)
    return rows


def run(scenario: Scenario, ctx: RunContext) -> list[Row]:
    p = scenario.params
    inst = build_instance(p["instance"], scenario.base_dir) if "instance" in p else None
    try:
        if scenario.kind == "cover":
            return cover_rows(inst, p, ctx)[0]
        if scenario.kind == "vc":
            return vc_rows(inst, p)
        if scenario.kind == "tail":
            return tail_rows(inst, p, ctx)
        if scenario.kind == "bp":
            return bp_rows(inst, p, ctx)
        if scenario.kind == "halving":
            return halving_rows(p)
        if scenario.kind == "dyadic":
            return dyadic_rows(inst, p, ctx)
        if scenario.kind == "discretize":
            return discretize_rows(inst, p)
        return full_report_rows(inst, p, ctx)
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(f"{scenario.kind}: {exc}") from exc


def run_scenario(
    path: str | Path,
    seed: int | None = None,
    workers: int = 1,
    out_dir: str | Path | None = None,
    echo: Callable[[str], None] | None = print,
) -> int:
    """Run one scenario file; returns the exit code."""
    try:
        scenario = load_scenario(path)
        ctx = RunContext(scenario.seed if seed is None else seed, workers)
        rows = run(scenario, ctx)
    except ScenarioError as exc:
        if echo:
            echo(f"error: {path}: {exc}")
        return EXIT_INPUT
    text = emit_summary(rows, out_dir, scenario.name)
    if echo:
        echo(text)
    return exit_code_for(rows)
