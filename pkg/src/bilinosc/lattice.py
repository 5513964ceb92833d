"""Lattice discretization of the dimensionless Hamiltonian ``H = |k| + |x|``.

The kinetic term is the Fourier series of ``|ak|`` on the Brillouin zone,
which on an open chain of ``N`` sites becomes a symmetric Toeplitz matrix
with hoppings only at odd separations. The potential is diagonal.
"""

import os
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft

from ._validation import check_int, check_positive, check_vector

#: Largest lattice for which :func:`to_dense` will allocate the full matrix.
DENSE_MAX_SITES = 8001

_FT_CHUNK_ELEMENTS = 2_000_000


def n_workers():
    """Thread cap for internal transforms, from ``BILINOSC_THREADS``."""
    raw = os.environ.get("BILINOSC_THREADS")
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"BILINOSC_THREADS must be an integer, got {raw!r}") from None


@dataclass(frozen=True)
class PhysicalScale:
    """Units of ``H = v|p| + F|x|``.

    Energies scale with ``sqrt(hbar v F)`` and lengths with ``sqrt(hbar v / F)``.
    """

    v: float = 1.0
    F: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("v", "F", "hbar"):
            object.__setattr__(self, name, check_positive(getattr(self, name), name))

    @property
    def energy_scale(self):
        return float(np.sqrt(self.hbar * self.v * self.F))

    @property
    def length_scale(self):
        return float(np.sqrt(self.hbar * self.v / self.F))


@dataclass(frozen=True)
class LatticeConfig:
    """An odd number of sites spanning ``[-lambda_c, lambda_c]``.

    ``lambda_c`` is both the half-width of the box and the largest potential
    energy the lattice can represent. The low states are only resolved when
    ``lambda_c`` is well above the target eigenvalues and well below ``N``;
    configurations outside ``lambda_c >= 4`` and ``N / lambda_c >= 50`` emit a
    :class:`UserWarning`.
    """

    n_sites: int
    lambda_c: float
    _positions: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = check_int(self.n_sites, "n_sites", minimum=1)
        lam = check_positive(self.lambda_c, "lambda_c")
        if n % 2 == 0:
            raise ValueError(f"n_sites must be odd so that x=0 is a lattice site, got {n}")
        object.__setattr__(self, "n_sites", n)
        object.__setattr__(self, "lambda_c", lam)
        if lam < 4 or n / lam < 50:
            warnings.warn(
                f"lattice (n_sites={n}, lambda_c={lam}) is outside the regime "
                "lambda_c >= 4, n_sites/lambda_c >= 50; low eigenvalues may be inaccurate",
                UserWarning,
                stacklevel=3,
            )
        # site offsets are exact integers, so the positions are exactly antisymmetric
        offsets = np.arange(n, dtype=float) - (n - 1) // 2
        pos = (2.0 * lam / n) * offsets
        pos.setflags(write=False)
        object.__setattr__(self, "_positions", pos)

    @property
    def lattice_constant(self):
        return 2.0 * self.lambda_c / self.n_sites

    @property
    def positions(self):
        return self._positions

    @property
    def center(self):
        """Index of the site at ``x = 0``."""
        return (self.n_sites - 1) // 2

    @property
    def k_max(self):
        """Edge of the Brillouin zone, ``pi / a``."""
        return np.pi / self.lattice_constant


def fourier_coeff(m):
    """Coefficient ``b_m`` of the cosine series of ``|k|`` on ``[-pi, pi]``."""
    m = check_int(m, "m", minimum=0)
    if m == 0:
        return np.pi
    if m % 2 == 1:
        return -4.0 / (np.pi * m * m)
    return 0.0


@dataclass(frozen=True, eq=False)
class HamiltonianOperator:
    """``h = T + diag(V)`` with ``T`` symmetric Toeplitz.

    Only the first column of ``T`` is stored. :meth:`apply` multiplies through
    a zero-padded circulant embedding, so a product costs ``O(N log N)``.
    """

    kinetic_first_column: np.ndarray
    potential_diagonal: np.ndarray
    config: LatticeConfig

    @property
    def n_sites(self):
        return self.config.n_sites

    @cached_property
    def embedding_size(self):
        # next power of two >= 2N
        return 1 << int(2 * self.n_sites - 1).bit_length()

    @cached_property
    def _circulant_spectrum(self):
        t = self.kinetic_first_column
        n, size = t.shape[0], self.embedding_size
        c = np.zeros(size)
        c[:n] = t
        c[size - n + 1 :] = t[:0:-1]
        return scipy.fft.rfft(c)

    @cached_property
    def norm_bound(self):
        """Upper bound on the spectral norm (Gershgorin on the dense matrix)."""
        t = np.abs(self.kinetic_first_column)
        return float(t[0] + 2.0 * t[1:].sum() + self.potential_diagonal.max())

    def apply(self, vec):
        return apply(self, vec)

    def to_dense(self):
        return to_dense(self)


def build_operator(config):
    """Assemble the Toeplitz kinetic column and diagonal potential for `config`."""
    if not isinstance(config, LatticeConfig):
        raise TypeError("config must be a LatticeConfig")
    n, lam = config.n_sites, config.lambda_c
    hop_scale = n / (2.0 * lam)
    m = np.arange(n)
    column = np.zeros(n)
    column[0] = hop_scale * np.pi / 2.0
    odd = m[1::2].astype(float)
    column[1::2] = -hop_scale * (2.0 / np.pi) / (odd * odd)
    potential = np.abs(config.positions).copy()
    column.setflags(write=False)
    potential.setflags(write=False)
    return HamiltonianOperator(column, potential, config)


def to_dense(op):
    """Materialize the ``N x N`` matrix (limited to ``DENSE_MAX_SITES``)."""
    n = op.n_sites
    if n > DENSE_MAX_SITES:
        raise MemoryError(
            f"dense matrix for n_sites={n} exceeds DENSE_MAX_SITES={DENSE_MAX_SITES}; "
            "use the iterative path"
        )
    idx = np.arange(n)
    mat = op.kinetic_first_column[np.abs(idx[:, None] - idx[None, :])]
    mat[idx, idx] += op.potential_diagonal
    return mat


def apply(op, vec):
    """Return ``H @ vec`` via circulant embedding and a real FFT."""
    v = check_vector(vec, op.n_sites)
    size = op.embedding_size
    workers = n_workers()
    spec = scipy.fft.rfft(v, n=size, workers=workers)
    spec *= op._circulant_spectrum
    out = scipy.fft.irfft(spec, n=size, workers=workers)[: op.n_sites]
    out += op.potential_diagonal * v
    return out


def semi_discrete_ft(config, vec, k_points):
    """Riemann-sum approximation of the unitary Fourier transform.

    Evaluates ``(a / sqrt(2 pi)) * sum_i vec_i exp(-i k x_i)`` at each
    requested ``k`` by direct summation. All ``k`` must lie in the Brillouin
    zone ``|k| <= pi / a``. ``vec`` may also be an ``(N, B)`` array, in which
    case each column is transformed and the result has shape ``(K, B)``.
    """
    v = np.asarray(vec, dtype=complex)
    single = v.ndim == 1
    if single:
        v = v[:, None]
    if v.ndim != 2 or v.shape[0] != config.n_sites:
        raise ValueError(f"vec must have leading dimension {config.n_sites}, got shape {v.shape}")
    k = np.atleast_1d(np.asarray(k_points, dtype=float))
    if k.ndim != 1:
        raise ValueError("k_points must be 1-D")
    kmax = config.k_max
    if np.any(np.abs(k) > kmax * (1 + 1e-12)):
        raise ValueError(f"k_points must satisfy |k| <= pi/a = {kmax:.6g}")
    pref = config.lattice_constant / np.sqrt(2.0 * np.pi)
    n_cols = v.shape[1]
    # x_{c+j} = -x_{c-j}, so fold the sum onto the positive half-lattice:
    # cosine sees the even part of vec, sine the odd part.
    c = config.center
    xp = config.positions[c + 1 :]
    blocks = np.concatenate([v.real.T, v.imag.T])
    even = blocks[:, c + 1 :] + blocks[:, c - 1 :: -1]
    odd = blocks[:, c + 1 :] - blocks[:, c - 1 :: -1]
    kabs, inverse = np.unique(np.abs(k), return_inverse=True)
    cos_sum = np.empty((blocks.shape[0], kabs.shape[0]))
    sin_sum = np.empty((blocks.shape[0], kabs.shape[0]))
    chunk = max(1, _FT_CHUNK_ELEMENTS // max(1, xp.shape[0]))
    for start in range(0, kabs.shape[0], chunk):
        phase = np.outer(kabs[start : start + chunk], xp)
        cos_sum[:, start : start + chunk] = even @ np.cos(phase).T
        sin_sum[:, start : start + chunk] = odd @ np.sin(phase).T
    cos_sum += blocks[:, c : c + 1]
    cs = cos_sum[:, inverse]
    ss = sin_sum[:, inverse] * np.sign(k)
    re, im = slice(0, n_cols), slice(n_cols, 2 * n_cols)
    # sum v e^{-ikx} = C - iS for each of the real and imaginary parts of v
    out = (cs[re] - 1j * ss[re]) + 1j * (cs[im] - 1j * ss[im])
    out = pref * out.T
    return out[:, 0] if single else out


def half_line(config, vec):
    """Values of `vec` on the sites with ``x >= 0`` (starting at ``x = 0``)."""
    v = np.asarray(vec)
    return v[config.center :]


def quadrature(config, values, weight=None):
    """Integrate over ``[0, lambda_c)`` from samples on the nonnegative half-lattice.

    Plain Riemann sum with measure ``a`` and half weight on the ``x = 0``
    site. ``weight`` may be ``None``, ``"x"`` or ``"x2"``.
    """
    n_half = config.center + 1
    f = check_vector(values, n_half, name="values")
    x = config.positions[config.center :]
    if weight in (None, "none"):
        g = f
    elif weight == "x":
        g = x * f
    elif weight in ("x2", "x^2"):
        g = x * x * f
    else:
        raise ValueError(f"unknown weight {weight!r}; expected None, 'x' or 'x2'")
    return float(config.lattice_constant * (0.5 * g[0] + g[1:].sum()))


def integrate_line(config, values):
    """Full-line Riemann sum ``a * sum_i values_i``."""
    f = check_vector(values, config.n_sites, name="values")
    return float(config.lattice_constant * f.sum())
