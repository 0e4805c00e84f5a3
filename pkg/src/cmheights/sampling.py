"""Point sampling over abelian extensions and batch certification sweeps.

For each rational x in the search box the Weierstrass equation either has a
rational solution y or defines a point over Q(sqrt(core)) for the squarefree
core of the y-discriminant: a quadratic, hence abelian, extension.  Sweeps
certify every sampled point on every configured curve and emit one CSV row
per point plus a JSON certificate; ordering is deterministic (lexicographic
in (numerator, denominator), curves in configuration order), so reruns are
bit-identical.
"""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt

from .bounds import VERDICT_INCONSISTENT, certify_point
from .elliptic import CurvePoint, EllipticCurve, cm_sample_curves
from .numberfields import make_field


class ConfigError(ValueError):
    pass


def squarefree_core(q: Fraction) -> int:
    """Squarefree integer with q = core * (rational square); sign preserved."""
    if q == 0:
        raise ValueError("zero has no squarefree core")
    n = q.numerator * q.denominator
    sign = 1 if n > 0 else -1
    n = abs(n)
    core = 1
    d = 2
    while d * d <= n:
        e = 0
        while n % d == 0:
            n //= d
            e += 1
        if e % 2:
            core *= d
        d += 1
    if n > 1:
        core *= n
    return sign * core


def rational_sqrt(q: Fraction):
    if q < 0:
        return None
    rn, rd = isqrt(q.numerator), isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    return None


@dataclass(frozen=True)
class ExperimentConfig:
    curves: tuple                 # tuple of "a1;a2;a3;a4;a6" strings, or ("cm13",)
    num_bound: int = 12
    den_bound: int = 3
    extension: str = "quadratic-closure"   # "rational" | "quadratic-closure"
    tolerance: Fraction = Fraction(1, 10 ** 6)
    jobs: int = 1
    csv_path: str | None = None
    cert_dir: str | None = None
    max_points_per_curve: int | None = None

    def __post_init__(self):
        if self.num_bound <= 0 or self.den_bound <= 0:
            raise ConfigError("bounds must be positive")
        if Fraction(self.tolerance) <= 0:
            raise ConfigError("tolerance must be positive")
        if self.extension not in ("rational", "quadratic-closure"):
            raise ConfigError(f"unknown extension policy {self.extension!r}")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")

    @staticmethod
    def from_json(text: str) -> "ExperimentConfig":
        raw = json.loads(text)
        return ExperimentConfig(
            curves=tuple(raw.get("curves", ["cm13"])),
            num_bound=raw.get("num_bound", 12),
            den_bound=raw.get("den_bound", 3),
            extension=raw.get("extension", "quadratic-closure"),
            tolerance=Fraction(str(raw.get("tolerance", "1/1000000"))),
            jobs=raw.get("jobs", 1),
            csv_path=raw.get("csv_path"),
            cert_dir=raw.get("cert_dir"),
            max_points_per_curve=raw.get("max_points_per_curve"),
        )


def parse_curve(spec: str, field_desc: str = "Q") -> EllipticCurve:
    parts = [Fraction(s.strip()) for s in spec.split(";")]
    if len(parts) != 5:
        raise ConfigError(f"curve spec needs five a-invariants: {spec!r}")
    return EllipticCurve(make_field(field_desc), *parts)


def config_curves(config: ExperimentConfig) -> list[EllipticCurve]:
    if config.curves == ("cm13",):
        return cm_sample_curves()
    return [parse_curve(s) for s in config.curves]


def sample_points(E: EllipticCurve, config: ExperimentConfig) -> list[CurvePoint]:
    """Deduplicated points (x, y) for rational x in the box, over Q or the
    quadratic field forced by the y-discriminant."""
    if not E.is_over_Q():
        raise ConfigError("sampling requires a curve over Q")
    a1, a2, a3, a4, a6 = E.rational_a_invariants()
    out = []
    seen = set()
    xs = []
    for num in range(-config.num_bound, config.num_bound + 1):
        for den in range(1, config.den_bound + 1):
            if gcd(num, den) != 1:
                continue
            xs.append(Fraction(num, den))
    xs.sort(key=lambda q: (q.numerator, q.denominator))
    for x in xs:
        rhs = ((x + a2) * x + a4) * x + a6
        b = a1 * x + a3
        disc = b * b + 4 * rhs
        if disc == 0:
            key = (x, "Q")
            if key not in seen:
                seen.add(key)
                out.append(E.point(x, -b / 2))
            continue
        root = rational_sqrt(disc)
        if root is not None:
            key = (x, "Q")
            if key not in seen:
                seen.add(key)
                out.append(E.point(x, (-b + root) / 2))
            continue
        if config.extension == "rational":
            continue
        core = squarefree_core(disc)
        scale = rational_sqrt(disc / core)
        assert scale is not None
        K = make_field(f"Q(sqrt,{core})")
        key = (x, K.descriptor())
        if key in seen:
            continue
        seen.add(key)
        EK = E.base_change(K)
        y = (K.generator() * scale - K.from_rational(b)) / 2
        out.append(EK.point(K.from_rational(x), y))
        if config.max_points_per_curve and len(out) >= config.max_points_per_curve:
            break
    if config.max_points_per_curve:
        out = out[: config.max_points_per_curve]
    return out


@dataclass(frozen=True)
class SweepRow:
    curve: str
    j: str
    field: str
    x: str
    hhat_mid: str
    hhat_rad: str
    main_bound: str
    verdict: str


@dataclass(frozen=True)
class SweepResult:
    rows: tuple
    certificates: tuple
    inconsistent: int

    @property
    def exit_code(self) -> int:
        return 1 if self.inconsistent else 0


def _fmt15(x) -> str:
    import gmpy2

    return f"{gmpy2.mpfr(x):.15g}"


def _certify_one(args):
    E, P, tol = args
    cert = certify_point(E, P, tolerance=tol, include_chain=False)
    return cert


def run_sweep(config: ExperimentConfig, progress=None) -> SweepResult:
    """Certify every sampled point of every configured curve.

    Results are assembled in deterministic order regardless of `jobs`; the
    nonzero exit code is reserved for inconsistent verdicts.
    """
    curves = config_curves(config)
    tasks = []
    for E in curves:
        pts = sample_points(E, config)
        for P in pts:
            tasks.append((E, P, config.tolerance))
    if config.jobs > 1:
        import multiprocessing as mp

        with mp.Pool(config.jobs) as pool:
            certs = pool.map(_certify_one, tasks, chunksize=8)
    else:
        certs = []
        for i, t in enumerate(tasks):
            certs.append(_certify_one(t))
            if progress and i % 50 == 0:
                progress(i, len(tasks))
    rows = []
    inconsistent = 0
    for (E, P, _), cert in zip(tasks, certs):
        if cert.verdict == VERDICT_INCONSISTENT:
            inconsistent += 1
        rows.append(SweepRow(
            curve=cert.curve,
            j=str(E.j.rational_value()),
            field=cert.field,
            x=P.x.serialize(),
            hhat_mid=_fmt15(cert.hhat.value.midpoint),
            hhat_rad=_fmt15(cert.hhat.value.radius),
            main_bound=_fmt15(cert.main.midpoint),
            verdict=cert.verdict,
        ))
    result = SweepResult(tuple(rows), tuple(certs), inconsistent)
    if config.csv_path:
        write_csv(result, config.csv_path)
    if config.cert_dir:
        write_certificates(result, config.cert_dir)
    return result


CSV_COLUMNS = ("curve", "j", "field", "x", "hhat_mid", "hhat_rad",
               "main_bound", "verdict")


def csv_text(result: SweepResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in result.rows:
        writer.writerow([getattr(row, c) for c in CSV_COLUMNS])
    return buf.getvalue()


def write_csv(result: SweepResult, path: str):
    with open(path, "w", encoding="ascii") as fh:
        fh.write(csv_text(result))


def write_certificates(result: SweepResult, directory: str):
    os.makedirs(directory, exist_ok=True)
    for i, cert in enumerate(result.certificates):
        with open(os.path.join(directory, f"certificate_{i:05d}.json"), "w",
                  encoding="ascii") as fh:
            fh.write(cert.to_json())
