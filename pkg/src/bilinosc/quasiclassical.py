"""Bohr-Sommerfeld levels of ``|k| + |x|`` and their comparison with the lattice spectrum."""

from dataclasses import dataclass

import numpy as np

from ._validation import check_int


def lambda_qc(n):
    """Quasi-classical level ``sqrt(pi (n + 1/2))``.

    The orbit ``|k| + |x| = lambda`` is a square of area ``2 lambda**2``;
    setting that to ``2 pi (n + 1/2)`` gives the level.
    """
    n = check_int(n, "n", minimum=0)
    return float(np.sqrt(np.pi * (n + 0.5)))


@dataclass(frozen=True)
class QcSpectrum:
    lambdas_qc: np.ndarray

    @classmethod
    def levels(cls, n_levels):
        n_levels = check_int(n_levels, "n_levels", minimum=1)
        vals = np.sqrt(np.pi * (np.arange(n_levels) + 0.5))
        vals.setflags(write=False)
        return cls(vals)

    def __len__(self):
        return self.lambdas_qc.shape[0]


@dataclass(frozen=True)
class ComparisonRow:
    n: int
    numeric: float
    qc: float

    @property
    def delta(self):
        """Signed ``qc - numeric``."""
        return self.qc - self.numeric


@dataclass(frozen=True)
class Comparison:
    rows: tuple

    @property
    def deltas(self):
        return np.array([r.delta for r in self.rows])

    @property
    def converges(self):
        """True when the last level sits closer to its quasi-classical value than the first."""
        d = self.deltas
        return bool(abs(d[-1]) < abs(d[0]))

    def table1_rows(self):
        """Rows ``(m, lambda_2m, lambda_2m+1, qc_2m, qc_2m+1)``, pairing even/odd levels."""
        out = []
        for m in range(len(self.rows) // 2):
            lo, hi = self.rows[2 * m], self.rows[2 * m + 1]
            out.append((m, lo.numeric, hi.numeric, lo.qc, hi.qc))
        return out


def compare(numeric, qc):
    """Juxtapose numeric eigenvalues (a Spectrum or array) with quasi-classical ones."""
    lambdas = getattr(numeric, "lambdas", numeric)
    lambdas = np.asarray(lambdas, dtype=float)
    qc_vals = np.asarray(getattr(qc, "lambdas_qc", qc), dtype=float)
    if lambdas.shape != qc_vals.shape:
        raise ValueError(
            f"length mismatch: {lambdas.shape[0]} numeric vs {qc_vals.shape[0]} quasi-classical levels"
        )
    return Comparison(
        tuple(ComparisonRow(n, float(lam), float(q)) for n, (lam, q) in enumerate(zip(lambdas, qc_vals)))
    )
