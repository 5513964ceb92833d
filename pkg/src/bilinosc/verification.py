"""Checks of the analytic relations obeyed by the exact eigenfunctions.

Each check takes a :class:`~bilinosc.eigensolver.Spectrum` and a level index
and returns a nonnegative residual (or a fitted quantity). The relations are:

* Fourier self-duality ``FT[phi_n] = (-i)**n phi_n``;
* power-law tails ``phi_n ~ C (1/x**p + lambda_n/x**(p+1))`` with ``p = 3``
  (even) or ``p = 4`` (odd), where ``C`` is fixed by ``phi_n(0)`` or
  ``phi_n'(0)``;
* half-line moment identities ``int_0^inf x**s (x - lambda_n) phi_n = 0``;
* the Hilbert-transform form of the eigen-equation,
  ``phi' + H[(lambda - |x|) phi] = 0``.
"""

from dataclasses import asdict, dataclass, field

import numpy as np

from .lattice import half_line, quadrature, semi_discrete_ft

SQRT_2_OVER_PI = np.sqrt(2.0 / np.pi)
SQRT_PI_OVER_2 = np.sqrt(np.pi / 2.0)
TAIL_BUFFER = 3.0
AMPLITUDE_FLOOR = 1e-13


@dataclass(frozen=True)
class Thresholds:
    """Pass/fail limits used by :meth:`VerificationReport.failures`.

    ``*_levels`` give how many of the lowest levels each limit applies to.
    """

    duality: float = 1e-3
    duality_levels: int = 4
    integral_relation: float = 2e-3
    integral_levels: int = 6
    tail_exponent: float = 0.3
    tail_coeff: float = 0.15
    tail_levels: int = 4
    fit_max_abs: float = 0.02

    @classmethod
    def from_dict(cls, data):
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown threshold keys: {sorted(unknown)}")
        return cls(**data)


def _parity_sign(n):
    # (-1)^{n/2} for even n, (-1)^{(n-1)/2} for odd n
    return -1.0 if (n // 2) % 2 else 1.0


def _check_level(spectrum, n):
    if not 0 <= n < spectrum.n_eig:
        raise IndexError(f"level {n} not in spectrum with {spectrum.n_eig} levels")


# -- Fourier self-duality -----------------------------------------------------


def default_duality_window(config):
    return min(10.0, 0.5 * config.lambda_c)


def duality_residual(config, vec, n, window_xmax=None):
    """Relative L2 mismatch between ``FT[vec]`` and ``(-i)**n vec`` on ``|x| <= window_xmax``."""
    if window_xmax is None:
        window_xmax = default_duality_window(config)
    window_xmax = abs(float(window_xmax))
    if window_xmax > config.k_max:
        raise ValueError(
            f"window_xmax={window_xmax} exceeds the Brillouin zone edge pi/a={config.k_max:.4g}"
        )
    x = config.positions
    mask = np.abs(x) <= window_xmax
    vec = np.asarray(vec, dtype=float)
    transformed = semi_discrete_ft(config, vec, x[mask])
    target = (-1j) ** (n % 4) * vec[mask]
    denom = np.linalg.norm(vec[mask])
    return float(np.linalg.norm(transformed - target) / denom)


def check_fourier_duality(spectrum, n, window_xmax=None):
    _check_level(spectrum, n)
    return duality_residual(spectrum.config, spectrum.phi(n), n, window_xmax)


# -- tails --------------------------------------------------------------------


@dataclass(frozen=True)
class TailResult:
    """Power-law tail measurement for one level.

    ``coeff_ratio`` averages ``x**p phi / (1 + lambda/x)`` over the window and
    divides by the predicted ``C``. ``coeff_ratio_extrapolated`` is the
    intercept of a fit ``r0 + r2/x**2`` to the same pointwise ratio, i.e. an
    estimate of the ``x -> inf`` limit from inside the window.
    """

    exponent: float
    coeff_ratio: float
    coeff_ratio_extrapolated: float
    predicted_coeff: float
    window: tuple


def predicted_tail_coeff(spectrum, n):
    """Leading ``1/x**3`` (even) or ``1/x**4`` (odd) coefficient implied by the origin data."""
    if n % 2 == 0:
        return _parity_sign(n) * SQRT_2_OVER_PI * spectrum.phi_at_zero(n)
    return _parity_sign(n) * 2.0 * SQRT_2_OVER_PI * spectrum.dphi_at_zero(n)


def default_tail_window(spectrum, n):
    return (spectrum.lambdas[n] + TAIL_BUFFER, 0.8 * spectrum.config.lambda_c)


def check_tail(spectrum, n, fit_window=None):
    """Fit the large-``x`` power law of ``phi_n`` on ``[x_lo, x_hi]``.

    The model is ``K x**(-p) (1 + lambda_n/x)``; the exponent comes from a
    straight-line fit of ``log|phi / (1 + lambda_n/x)|`` against ``log x``.
    """
    _check_level(spectrum, n)
    lam = float(spectrum.lambdas[n])
    lam_c = spectrum.config.lambda_c
    lo, hi = default_tail_window(spectrum, n) if fit_window is None else map(float, fit_window)
    if not (lam + TAIL_BUFFER <= lo + 1e-12 and lo < hi <= 0.9 * lam_c + 1e-12):
        raise ValueError(
            f"tail window [{lo:.4g}, {hi:.4g}] must satisfy "
            f"lambda_n + {TAIL_BUFFER} <= x_lo < x_hi <= 0.9*lambda_c (= {0.9 * lam_c:.4g})"
        )
    x = spectrum.positions
    mask = (x >= lo) & (x <= hi)
    if mask.sum() < 3:
        raise ValueError(f"tail window [{lo}, {hi}] contains fewer than 3 lattice sites")
    xs = x[mask]
    phi = spectrum.phi(n)[mask]
    if np.abs(phi).min() < AMPLITUDE_FLOOR:
        raise ValueError("tail amplitudes fall below the double-precision floor")
    correction = 1.0 + lam / xs
    slope, _ = np.polyfit(np.log(xs), np.log(np.abs(phi) / correction), 1)

    power = 3 if n % 2 == 0 else 4
    coeff = predicted_tail_coeff(spectrum, n)
    ratio = xs**power * phi / correction / coeff
    design = np.column_stack([np.ones_like(xs), xs**-2])
    intercept = np.linalg.lstsq(design, ratio, rcond=None)[0][0]
    return TailResult(
        exponent=float(slope),
        coeff_ratio=float(ratio.mean()),
        coeff_ratio_extrapolated=float(intercept),
        predicted_coeff=float(coeff),
        window=(float(lo), float(hi)),
    )


# -- half-line moment identities ----------------------------------------------


@dataclass(frozen=True)
class IntegralRelationResult:
    """Residuals of the two half-line identities for one level.

    ``moment_residual`` is ``int x**s (x - lambda) phi`` (``s`` = 0 even,
    1 odd) and ``origin_residual`` compares ``int x**(s+1) phi`` with
    ``+-sqrt(pi/2) lambda phi(0)`` (``phi'(0)`` for odd levels). ``residual``
    is the larger magnitude over ``normalizer``. The ``tail_completed_*``
    variant adds the analytic integral of the predicted tail beyond the
    lattice edge, so it estimates the half-line integral rather than the
    truncated one.
    """

    residual: float
    moment_residual: float
    origin_residual: float
    normalizer: float
    tail_completed_residual: float


def check_integral_relation(spectrum, n):
    _check_level(spectrum, n)
    cfg = spectrum.config
    lam = float(spectrum.lambdas[n])
    phi = half_line(cfg, spectrum.phi(n))
    x = half_line(cfg, cfg.positions)
    sign = _parity_sign(n)
    if n % 2 == 0:
        moment = quadrature(cfg, (x - lam) * phi)
        origin = quadrature(cfg, phi, "x") - sign * SQRT_PI_OVER_2 * lam * spectrum.phi_at_zero(n)
        normalizer = quadrature(cfg, np.abs(phi) * np.maximum(x, lam))
    else:
        moment = quadrature(cfg, x * (x - lam) * phi)
        origin = quadrature(cfg, phi, "x2") - sign * SQRT_PI_OVER_2 * lam * spectrum.dphi_at_zero(n)
        normalizer = quadrature(cfg, np.abs(phi) * x * np.maximum(x, lam))
    residual = max(abs(moment), abs(origin)) / normalizer

    # both integrands decay like C/x**2 (1 + O(1/x)) past the edge L
    edge = cfg.lambda_c
    coeff = predicted_tail_coeff(spectrum, n)
    moment_tail = coeff * (1.0 / edge - lam**2 / (3.0 * edge**3))
    origin_tail = coeff * (1.0 / edge + lam / (2.0 * edge**2))
    completed = max(abs(moment + moment_tail), abs(origin + origin_tail)) / normalizer
    return IntegralRelationResult(
        residual=float(residual),
        moment_residual=float(moment),
        origin_residual=float(origin),
        normalizer=float(normalizer),
        tail_completed_residual=float(completed),
    )


# -- principal value / Hilbert transform --------------------------------------


def pv_sum(values, rows=None):
    """Grid principal value ``sum_{j != i} values_j / (i - j)`` for each row ``i``.

    Evaluated as ``sum_{m >= 1} (values_{i-m} - values_{i+m}) / m`` with
    out-of-range entries taken as zero, so contributions at equal distance on
    either side cancel exactly.
    """
    g = np.asarray(values, dtype=float)
    n = g.shape[0]
    rows = np.arange(n) if rows is None else np.asarray(rows, dtype=int)
    padded = np.zeros(3 * n)
    padded[n : 2 * n] = g
    idx = rows + n
    out = np.zeros(rows.shape[0])
    for m in range(1, n):
        out += (padded[idx - m] - padded[idx + m]) / m
    return out


def hilbert_transform(values, rows=None):
    """``(1/pi) PV int f(x') / (x - x') dx'`` on the lattice; the spacing cancels."""
    return pv_sum(values, rows) / np.pi


def hilbert_residual(spectrum, n, extra=TAIL_BUFFER):
    """Relative L2 norm of ``phi' + H[(lambda - |x|) phi]`` on ``|x| <= lambda_n + extra``."""
    _check_level(spectrum, n)
    cfg = spectrum.config
    x = cfg.positions
    a = cfg.lattice_constant
    lam = float(spectrum.lambdas[n])
    phi = spectrum.phi(n)
    rows = np.flatnonzero(np.abs(x) <= lam + extra)
    rows = rows[(rows > 0) & (rows < cfg.n_sites - 1)]
    dphi = (phi[rows + 1] - phi[rows - 1]) / (2.0 * a)
    lhs = dphi + hilbert_transform((lam - np.abs(x)) * phi, rows)
    scale = np.linalg.norm(dphi)
    num = np.linalg.norm(lhs)
    if scale == 0.0:
        return 0.0 if num == 0.0 else float("inf")
    return float(num / scale)


def kink_diagnostic(spectrum, n):
    """Size of a non-analytic term at the origin.

    Even levels: second difference at ``x=0`` minus the mean of those at
    ``x=+-a`` (a ``|x|`` term makes this grow like ``1/a``). Odd levels: the
    second derivative extrapolated to ``x=0+`` from the right (an ``x|x|``
    term makes it nonzero).
    """
    _check_level(spectrum, n)
    cfg = spectrum.config
    c, a = cfg.center, cfg.lattice_constant
    phi = spectrum.phi(n)

    def d2(i):
        return (phi[i + 1] - 2.0 * phi[i] + phi[i - 1]) / (a * a)

    if n % 2 == 0:
        return float(d2(c) - 0.5 * (d2(c - 1) + d2(c + 1)))
    return float(2.0 * d2(c + 1) - d2(c + 2))


# -- aggregate report ---------------------------------------------------------


@dataclass
class LevelRecord:
    n: int
    parity: str
    lambda_n: float
    duality_residual: float = None
    tail_exponent: float = None
    tail_coeff_ratio: float = None
    tail_coeff_ratio_extrapolated: float = None
    tail_window: tuple = None
    integral_relation_residual: float = None
    integral_relation_residual_tail_completed: float = None
    hilbert_residual_norm: float = None
    kink: float = None


@dataclass
class VerificationReport:
    records: dict
    n_sites: int
    lambda_c: float
    duality_window: float
    hilbert_extra: float = TAIL_BUFFER
    notes: list = field(default_factory=list)

    def failures(self, thresholds=None):
        """List of human-readable threshold violations (empty when all pass)."""
        t = thresholds or Thresholds()
        out = []
        for n, rec in sorted(self.records.items()):
            if n < t.duality_levels and rec.duality_residual is not None:
                if rec.duality_residual > t.duality:
                    out.append(f"n={n}: duality residual {rec.duality_residual:.3e} > {t.duality:g}")
            if n < t.integral_levels and rec.integral_relation_residual is not None:
                if rec.integral_relation_residual > t.integral_relation:
                    out.append(
                        f"n={n}: integral relation residual "
                        f"{rec.integral_relation_residual:.3e} > {t.integral_relation:g}"
                    )
            if n < t.tail_levels and rec.tail_exponent is not None:
                target = -3.0 if n % 2 == 0 else -4.0
                if abs(rec.tail_exponent - target) > t.tail_exponent:
                    out.append(f"n={n}: tail exponent {rec.tail_exponent:.3f} not within {t.tail_exponent} of {target}")
                if abs(rec.tail_coeff_ratio - 1.0) > t.tail_coeff:
                    out.append(f"n={n}: tail coefficient ratio {rec.tail_coeff_ratio:.3f} not within {t.tail_coeff} of 1")
        return out

    def to_dict(self):
        return {
            "meta": {
                "n_sites": self.n_sites,
                "lambda_c": self.lambda_c,
                "duality_window": self.duality_window,
                "hilbert_window_extra": self.hilbert_extra,
                "notes": list(self.notes),
            },
            "levels": {str(n): asdict(rec) for n, rec in sorted(self.records.items())},
        }


def verify(spectrum, levels=None, duality_window=None):
    """Run every check on the requested levels (default: up to the lowest six)."""
    cfg = spectrum.config
    if levels is None:
        levels = range(min(spectrum.n_eig, 6))
    if duality_window is None:
        duality_window = default_duality_window(cfg)
    records, notes = {}, []
    for n in levels:
        rec = LevelRecord(n=n, parity=spectrum.parities[n], lambda_n=float(spectrum.lambdas[n]))
        rec.duality_residual = check_fourier_duality(spectrum, n, duality_window)
        try:
            tail = check_tail(spectrum, n)
        except ValueError as exc:
            notes.append(f"n={n}: tail check skipped ({exc})")
        else:
            rec.tail_exponent = tail.exponent
            rec.tail_coeff_ratio = tail.coeff_ratio
            rec.tail_coeff_ratio_extrapolated = tail.coeff_ratio_extrapolated
            rec.tail_window = tail.window
        integ = check_integral_relation(spectrum, n)
        rec.integral_relation_residual = integ.residual
        rec.integral_relation_residual_tail_completed = integ.tail_completed_residual
        rec.hilbert_residual_norm = hilbert_residual(spectrum, n)
        rec.kink = kink_diagnostic(spectrum, n)
        records[n] = rec
    return VerificationReport(
        records=records,
        n_sites=cfg.n_sites,
        lambda_c=cfg.lambda_c,
        duality_window=float(duality_window),
        notes=notes,
    )
