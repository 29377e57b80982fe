"""Command-line front end: relative-error tables, solve reports, self test.

Config files are flat ``key = value`` text; keys are the field names of
:class:`RunConfig`, lists are comma separated and complex numbers are written
``a+bi``. ``#`` starts a comment.
"""
import argparse
import csv
import io
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from typing import List, Optional, Tuple

from . import fixedpoint, olver, specfun
from .core import LargeParameter, ProblemSpec, RaySegment, validate_problem
from .exceptions import ConfigError, DomainError, ExpansionError
from .registry import lookup

log = logging.getLogger("lpexpand")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FAILED = 3

# the converged iterate must reproduce the oracle to this level before the
# tail of the expansion is trusted as the error of the order-n iterate
GATE_TOL = 1e-9


# --------------------------------------------------------------------------
# complex text format
# --------------------------------------------------------------------------


def format_complex(z) -> str:
    z = complex(z)
    return f"{z.real:.17g}{z.imag:+.17g}i"


def parse_complex(text: str) -> complex:
    t = text.strip().replace(" ", "")
    if not t:
        raise ConfigError("empty complex value")
    if t.endswith("i"):
        t = t[:-1] + "j"
    try:
        return complex(t)
    except ValueError:
        raise ConfigError(f"cannot parse complex value {text!r}") from None


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------


@dataclass
class RunConfig:
    method: str = "both"
    kind: str = "plus"
    lambdas: List[complex] = field(default_factory=list)
    z: List[complex] = field(default_factory=list)
    orders: List[int] = field(default_factory=lambda: [1, 3, 5])
    rhs: str = "unit"
    data: str = "example"
    y0: complex = 1.0
    anchor: complex = 1.0
    ybar0: Optional[complex] = None
    y1: Optional[complex] = None
    continuation: bool = False
    tol: float = 1e-30
    max_order: int = 200
    n_nodes: Optional[int] = None
    olver_offset: int = 0
    output: str = ""
    format: str = "csv"

    def validate(self) -> "RunConfig":
        if self.method not in ("fixedpoint", "olver", "both"):
            raise ConfigError(f"method must be fixedpoint, olver or both, got {self.method!r}")
        if self.kind not in ("plus", "minus"):
            raise ConfigError(f"kind must be plus or minus, got {self.kind!r}")
        if self.data not in ("example", "explicit"):
            raise ConfigError(f"data must be example or explicit, got {self.data!r}")
        if self.format not in ("csv", "markdown"):
            raise ConfigError(f"format must be csv or markdown, got {self.format!r}")
        if not self.lambdas or not self.z:
            raise ConfigError("lambdas and z must be non-empty")
        if any(n < 1 for n in self.orders) or self.olver_offset < 0:
            raise ConfigError("orders must be >= 1 and olver_offset >= 0")
        rhs = lookup(self.rhs)
        if self.data == "example" and self.rhs != "unit":
            raise ConfigError("data = example needs rhs = unit")
        if self.data == "explicit" and self.kind == "minus" and (self.ybar0 is None or self.y1 is None):
            raise ConfigError("explicit Minus data needs ybar0 and y1")
        if not rhs.linear and self.method != "fixedpoint":
            raise ConfigError(f"rhs {self.rhs!r} is nonlinear; only method = fixedpoint applies")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        for lam in self.lambdas:
            LargeParameter(lam)
        for zz in self.z:
            validate_problem(build_problem(self, lam=self.lambdas[0], z=zz, check_data=False))
        return self


_LIST_FIELDS = {"lambdas": parse_complex, "z": parse_complex, "orders": int}
_SCALAR = {
    "tol": float,
    "max_order": int,
    "n_nodes": int,
    "olver_offset": int,
    "y0": parse_complex,
    "anchor": parse_complex,
    "ybar0": parse_complex,
    "y1": parse_complex,
}


def _parse_bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"cannot parse boolean {text!r}")


def parse_config(text: str) -> RunConfig:
    names = {f.name for f in fields(RunConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in names:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            if key in _LIST_FIELDS:
                conv = _LIST_FIELDS[key]
                values[key] = [conv(v) for v in val.split(",") if v.strip()]
            elif key in _SCALAR:
                values[key] = _SCALAR[key](val) if val else None
            elif key == "continuation":
                values[key] = _parse_bool(val)
            else:
                values[key] = val
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
    return RunConfig(**values)


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from None


BUILTIN = {
    "plus_z1": """\
# relative errors for y(0) = 1, z = 1
method = both
kind = plus
rhs = unit
data = example
lambdas = 0.75, 5, 100, 500
z = 1
orders = 1, 3, 5
olver_offset = 1
""",
    "plus_zm2": """\
# relative errors for y(0) = 1, z = -2
method = both
kind = plus
rhs = unit
data = example
lambdas = 5, 50-2i, 100
z = -2
orders = 1, 3, 5
olver_offset = 1
""",
    "minus_z05": """\
# relative errors for data at z0 = 1, z = 0.5
method = both
kind = minus
rhs = unit
data = example
anchor = 1
lambdas = 0.75, 5, 25+5i, 50
z = 0.5
orders = 1, 3, 5
""",
    "minus_zc": """\
# relative errors for data at z0 = 1, z = -1+i/4 (reached along |t| = 1)
method = both
kind = minus
rhs = unit
data = example
anchor = 1
continuation = true
lambdas = 0.75, 5, 25, 50
z = -1+0.25i
orders = 1, 3, 5
""",
}


# --------------------------------------------------------------------------
# problems and references
# --------------------------------------------------------------------------


def build_problem(config: RunConfig, lam, z, check_data=True) -> ProblemSpec:
    rhs = lookup(config.rhs)
    lam = LargeParameter(lam)
    z = complex(z)
    if config.kind == "plus":
        if z == 0:
            raise DomainError("evaluation point z = 0 gives no segment")
        seg = RaySegment.through(z)
        y0 = 1.0 if config.data == "example" else config.y0
        if rhs.linear:
            return ProblemSpec.linear_plus(lam, seg, rhs.g, y0)
        return ProblemSpec.nonlinear_plus(lam, seg, rhs.f, rhs.lipschitz, y0)
    z0 = complex(config.anchor)
    seg = RaySegment.through(z0)
    if config.data == "example":
        if check_data:
            yb = specfun.example_reference_minus(lam, z0)
            y1 = specfun.example_reference_minus_derivative(lam, z0)
        else:
            yb, y1 = 1.0, 0.0
    else:
        yb, y1 = config.ybar0, config.y1
    if rhs.linear:
        return ProblemSpec.linear_minus(lam, seg, rhs.g, z0, yb, y1, target=z,
                                        continuation=config.continuation)
    return ProblemSpec.nonlinear_minus(lam, seg, rhs.f, rhs.lipschitz, z0, yb, y1,
                                       target=z, continuation=config.continuation)


def _oracle(config, lam, z):
    if config.data != "example":
        return None
    if config.kind == "plus":
        return specfun.example_reference_plus(lam, z)
    return specfun.example_reference_minus(lam, z)


# --------------------------------------------------------------------------
# tables
# --------------------------------------------------------------------------

COLUMNS = ("z", "lambda", "n", "method", "approximation", "reference", "relative_error", "status")


@dataclass(frozen=True)
class TableRow:
    z: complex
    lam: complex
    n: int
    method: str
    approximation: complex
    reference: complex
    relative_error: float
    status: str = "ok"


def _cell_group(config: RunConfig, lam, z) -> List[TableRow]:
    rows = []
    nan = complex(math.nan, math.nan)
    methods = ["fixedpoint", "olver"] if config.method == "both" else [config.method]

    def failed(method, n, exc, ref=nan):
        log.warning("cell z=%s lambda=%s n=%s %s failed: %s", z, lam, n, method, exc)
        msg = f"failed: {type(exc).__name__}: {exc}".replace(",", ";").replace("\n", " ")
        return TableRow(z, lam, n, method, nan, ref, math.nan, msg)

    try:
        problem = build_problem(config, lam, z)
        ref = _oracle(config, lam, z)
        result = fixedpoint.solve(problem, config.tol, config.max_order, config.n_nodes)
    except ExpansionError as exc:
        return [failed(m, n, exc) for m in methods for n in config.orders]
    final = result.final(z)
    gated = True
    if ref is None:
        ref = final
    elif abs(final - ref) > GATE_TOL * abs(ref):
        gated = False
    scale = abs(ref) if ref != 0 else 1.0

    for method in methods:
        for n in config.orders:
            try:
                if method == "fixedpoint":
                    if n > result.order_used:
                        raise ExpansionError(f"expansion stopped at order {result.order_used}")
                    approx = result.iterates[n](z)
                    err = abs(result.tail(n, z)) / scale
                else:
                    approximant = olver.normalize_to_problem(
                        olver.coefficients(lookup(config.rhs).poly, n + config.olver_offset + 1),
                        lam, problem, n + config.olver_offset,
                    )
                    approx = approximant(z)
                    e = olver.olver_error(problem, approximant, tol=config.tol,
                                          max_order=config.max_order)
                    resid = e.final(z)
                    if abs(approx + resid - ref) > GATE_TOL * scale:
                        gated = False
                    err = abs(resid) / scale
            except ExpansionError as exc:
                rows.append(failed(method, n, exc, ref))
                continue
            status = "ok"
            if not gated:
                status = "failed: converged expansion disagrees with the reference"
                err = abs(approx - ref) / scale
            rows.append(TableRow(z, lam, n, method, approx, ref, err, status))
    return rows


def run_table(config: RunConfig, threads: int = 1) -> List[TableRow]:
    """Relative errors for every (lambda, z, n, method) cell of the config."""
    config.validate()
    groups = [(lam, z) for z in config.z for lam in config.lambdas]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda g: _cell_group(config, *g), groups))
    else:
        parts = [_cell_group(config, *g) for g in groups]
    order = {"fixedpoint": 0, "olver": 1}
    rows = [r for part in parts for r in part]
    # group by point and parameter, then method, then order
    return sorted(
        rows,
        key=lambda r: (config.z.index(r.z), config.lambdas.index(r.lam), order[r.method], r.n),
    )


def table_to_csv(rows: List[TableRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([
            format_complex(r.z), format_complex(r.lam), r.n, r.method,
            format_complex(r.approximation), format_complex(r.reference),
            f"{r.relative_error:.17g}", r.status,
        ])
    return buf.getvalue()


def table_from_csv(text: str) -> List[TableRow]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != COLUMNS:
        raise ConfigError(f"unexpected table header {header!r}")
    rows = []
    for rec in reader:
        if not rec:
            continue
        rows.append(TableRow(
            parse_complex(rec[0]), parse_complex(rec[1]), int(rec[2]), rec[3],
            parse_complex(rec[4]), parse_complex(rec[5]), float(rec[6]), rec[7],
        ))
    return rows


def _short(z) -> str:
    z = complex(z)
    if z.imag == 0:
        return f"{z.real:g}"
    return f"{z.real:g}{z.imag:+g}i"


def table_to_markdown(rows: List[TableRow]) -> str:
    lines = ["| z | lambda | n | method | relative error | status |",
             "|---|---|---|---|---|---|"]
    for r in rows:
        lines.append(
            f"| {_short(r.z)} | {_short(r.lam)} | {r.n} | {r.method} | "
            f"{r.relative_error:.3e} | {r.status} |"
        )
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# solve reports
# --------------------------------------------------------------------------

SOLVE_COLUMNS = ("z", "lambda", "method", "order", "value", "converged",
                 "apriori_bound", "realized_error", "increments")


def run_solve(config: RunConfig) -> List[dict]:
    """Converged values, increments and bounds for every (lambda, z)."""
    config.validate()
    report = []
    for z in config.z:
        for lam in config.lambdas:
            problem = build_problem(config, lam, z)
            ref = _oracle(config, lam, z)
            if config.method in ("fixedpoint", "both"):
                res = fixedpoint.solve(problem, config.tol, config.max_order, config.n_nodes)
                value = res.final(z)
                report.append({
                    "z": z, "lambda": lam, "method": "fixedpoint", "order": res.order_used,
                    "value": value, "converged": res.converged,
                    "apriori_bound": res.apriori_bound,
                    "realized_error": math.nan if ref is None else abs(value - ref) / abs(ref),
                    "increments": res.increments,
                })
            if config.method in ("olver", "both"):
                rhs = lookup(config.rhs)
                for n in config.orders:
                    m = n + config.olver_offset
                    coeffs = olver.coefficients(rhs.poly, m + 1)
                    approx = olver.normalize_to_problem(coeffs, lam, problem, m)
                    value = approx(z)
                    branch = "plus" if problem.kind.is_plus else "minus"
                    bound = olver.olver_remainder_bound(coeffs, rhs.poly, lam, m, branch,
                                                        RaySegment.through(z))
                    report.append({
                        "z": z, "lambda": lam, "method": "olver", "order": m,
                        "value": value, "converged": True, "apriori_bound": bound,
                        "realized_error": math.nan if ref is None else abs(value - ref) / abs(ref),
                        "increments": (),
                    })
    return report


def report_to_csv(report: List[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SOLVE_COLUMNS)
    for r in report:
        w.writerow([
            format_complex(r["z"]), format_complex(r["lambda"]), r["method"], r["order"],
            format_complex(r["value"]), r["converged"], f"{r['apriori_bound']:.17g}",
            f"{r['realized_error']:.17g}", ";".join(f"{x:.3e}" for x in r["increments"]),
        ])
    return buf.getvalue()


def report_to_markdown(report: List[dict]) -> str:
    lines = ["| z | lambda | method | order | value | converged | a-priori bound | realized error |",
             "|---|---|---|---|---|---|---|---|"]
    for r in report:
        lines.append(
            f"| {_short(r['z'])} | {_short(r['lambda'])} | {r['method']} | {r['order']} | "
            f"{format_complex(r['value'])} | {r['converged']} | {r['apriori_bound']:.3e} | "
            f"{r['realized_error']:.3e} |"
        )
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# self test
# --------------------------------------------------------------------------


def selftest() -> List[Tuple[str, bool, str]]:
    checks = []

    def check(name, ok, detail):
        checks.append((name, bool(ok), detail))

    cfg = parse_config(BUILTIN["plus_z1"])
    cfg.lambdas, cfg.method = [5.0], "fixedpoint"
    row = [r for r in run_table(cfg) if r.n == 3][0]
    check("iterative error z=1 lambda=5 n=3", abs(row.relative_error / 2.22e-6 - 1) < 0.05,
          f"{row.relative_error:.3e}")
    A5 = olver.coefficients(olver.ComplexPolynomial([1]), 6)[5]
    expected = olver.ComplexPolynomial([1, 1, 0, olver.Fraction(5, 6), olver.Fraction(-5, 24),
                                        olver.Fraction(1, 120)])
    check("A_5 for g = 1", A5 == expected, repr(A5))
    k = specfun.bessel_k(0.5, 2.0)
    exact = math.sqrt(math.pi / 4) * math.exp(-2.0)
    check("K_1/2(2)", abs(k - exact) < 1e-14 * exact, f"{abs(k - exact) / exact:.1e}")
    return checks


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------


def _build_parser():
    p = argparse.ArgumentParser(prog="lpexpand", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("table", "solve"):
        sp = sub.add_parser(name)
        src = sp.add_mutually_exclusive_group(required=True)
        src.add_argument("--config", help="flat key = value config file")
        src.add_argument("--builtin", choices=sorted(BUILTIN), help="shipped table config")
        sp.add_argument("--output", help="write here instead of stdout")
        sp.add_argument("--format", choices=("csv", "markdown"))
        sp.add_argument("--threads", type=int, default=1)
    sub.add_parser("selftest")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.command == "selftest":
        checks = selftest()
        for name, ok, detail in checks:
            print(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})")
        return EXIT_OK if all(ok for _, ok, _ in checks) else EXIT_FAILED
    try:
        config = load_config(args.config) if args.config else parse_config(BUILTIN[args.builtin])
        if args.format:
            config.format = args.format
        if args.output:
            config.output = args.output
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        config.validate()
    except (ConfigError, DomainError) as exc:
        print(f"config error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "table":
            rows = run_table(config, args.threads)
            text = table_to_csv(rows) if config.format == "csv" else table_to_markdown(rows)
            failed = any(r.status != "ok" for r in rows)
        else:
            report = run_solve(config)
            text = report_to_csv(report) if config.format == "csv" else report_to_markdown(report)
            failed = False
    except ExpansionError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILED
    _emit(text, config.output)
    return EXIT_FAILED if failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
