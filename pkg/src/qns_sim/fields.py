"""Periodic collocation grids and spectral calculus on the d-torus.

Real-to-complex transforms with Hermitian symmetry carry all derivatives;
the Nyquist wavenumber is zeroed in every derivative symbol, which keeps
odd-derivative operators exactly skew-adjoint with respect to the discrete
inner product and makes composed operators (div o grad = laplacian, etc.)
identities in floating point.  Products of non-band-limited quantities
(fractional powers of the density) are formed point-wise in physical space;
the 2/3-rule mask is applied to polynomial-type nonlinearities only.

Array-level methods on PeriodicGrid (suffix _arr) accept plain ndarrays,
batch leading axes through single FFT calls, and are the hot path of the
solver.  The ScalarField / VectorField / TensorField wrappers add grid and
finiteness checks at module boundaries.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, GridMismatch, NonFiniteField

__all__ = [
    "PeriodicGrid", "ScalarField", "VectorField", "TensorField",
    "grad", "div", "laplacian", "hessian", "sym_grad", "antisym_grad",
    "dealiased_product", "integrate",
    "write_snapshot", "read_snapshot",
]

SNAPSHOT_MAGIC = b"QNS1"


class PeriodicGrid:
    """Uniform collocation grid on the d-torus with cached spectral symbols."""

    def __init__(self, dim: int, n: int, length: float = 1.0):
        if dim not in (1, 2, 3):
            raise DomainError(f"dim must be 1, 2 or 3, got {dim}")
        if n < 16 or (n & (n - 1)) != 0:
            raise DomainError(f"n must be a power of two >= 16, got {n}")
        if length <= 0:
            raise DomainError(f"length must be positive, got {length}")
        self.dim = dim
        self.n = n
        self.length = float(length)
        self.dx = self.length / n
        self.shape = (n,) * dim
        self.volume = self.length**dim
        self.npoints = n**dim
        self._axes = tuple(range(-dim, 0))
        self._build_symbols()

    def _build_symbols(self):
        n, dim, L = self.n, self.dim, self.length
        scale = 2.0 * np.pi / L
        # integer mode numbers per axis; last axis is the half spectrum
        full = np.fft.fftfreq(n, d=1.0 / n)        # 0..n/2-1, -n/2..-1
        half = np.arange(n // 2 + 1, dtype=np.float64)
        self._ik = []
        rshape = [n] * dim
        rshape[-1] = n // 2 + 1
        for ax in range(dim):
            m = half.copy() if ax == dim - 1 else full.copy()
            m[np.abs(m) == n // 2] = 0.0           # Nyquist zeroed everywhere
            shape = [1] * dim
            shape[ax] = m.size
            k = (scale * m).reshape(shape)
            self._ik.append(1j * k)
        self._mk2 = np.zeros(rshape)
        for ik in self._ik:
            self._mk2 = self._mk2 + (ik.imag) ** 2
        self._mk2 = -self._mk2
        # 2/3-rule mask: keep |m| <= n//3 on each axis
        cut = n // 3
        mask = np.ones(rshape, dtype=bool)
        for ax in range(dim):
            m = half if ax == dim - 1 else full
            shape = [1] * dim
            shape[ax] = m.size
            mask = mask & (np.abs(m).reshape(shape) <= cut)
        self._mask = mask

    # -- coordinates -------------------------------------------------------

    def axes(self) -> list[np.ndarray]:
        """Meshgrid coordinate arrays, x_j = j*dx per axis."""
        one = np.arange(self.n) * self.dx
        return list(np.meshgrid(*([one] * self.dim), indexing="ij"))

    # -- transforms (batched over leading axes) ----------------------------

    def rfft(self, a: np.ndarray) -> np.ndarray:
        return np.fft.rfftn(a, axes=self._axes)

    def irfft(self, A: np.ndarray) -> np.ndarray:
        return np.fft.irfftn(A, s=self.shape, axes=self._axes)

    def spectrum(self, a: np.ndarray) -> np.ndarray:
        """Half-complex spectrum normalized to Fourier coefficients."""
        return self.rfft(a) / self.npoints

    # -- calculus ----------------------------------------------------------

    def grad_arr(self, s: np.ndarray) -> np.ndarray:
        S = self.rfft(s)
        return self.irfft(np.stack([ik * S for ik in self._ik]))

    def div_arr(self, v: np.ndarray) -> np.ndarray:
        V = self.rfft(v)
        out = self._ik[0] * V[0]
        for ax in range(1, self.dim):
            out = out + self._ik[ax] * V[ax]
        return self.irfft(out)

    def laplacian_arr(self, s: np.ndarray) -> np.ndarray:
        return self.irfft(self._mk2 * self.rfft(s))

    def hessian_arr(self, s: np.ndarray) -> np.ndarray:
        S = self.rfft(s)
        d = self.dim
        rows = [[self._ik[i] * self._ik[j] * S for j in range(d)] for i in range(d)]
        return self.irfft(np.stack([np.stack(r) for r in rows]))

    def grad_vector_arr(self, v: np.ndarray) -> np.ndarray:
        """Full velocity-gradient tensor G[i, j] = d v_i / d x_j."""
        V = self.rfft(v)
        d = self.dim
        return self.irfft(np.stack([np.stack([self._ik[j] * V[i] for j in range(d)])
                                    for i in range(d)]))

    def div_tensor_arr(self, T: np.ndarray, dealias: bool = False) -> np.ndarray:
        """(div T)_i = d T[i, j] / d x_j, optionally 2/3-masked."""
        That = self.rfft(T)
        d = self.dim
        rows = []
        for i in range(d):
            acc = self._ik[0] * That[i, 0]
            for j in range(1, d):
                acc = acc + self._ik[j] * That[i, j]
            rows.append(acc)
        out = np.stack(rows)
        if dealias:
            out = out * self._mask
        return self.irfft(out)

    def dealias_arr(self, a: np.ndarray) -> np.ndarray:
        return self.irfft(self._mask * self.rfft(a))

    def dealiased_product_arr(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self.dealias_arr(a * b)

    def integrate_arr(self, s: np.ndarray) -> float:
        """Trapezoidal quadrature = mean * volume (exact for trig polynomials)."""
        return float(s.mean()) * self.volume

    def l2_norm_arr(self, a: np.ndarray) -> float:
        """Discrete L2 norm sqrt(integral of |a|^2), summing leading components."""
        return float(np.sqrt(np.sum(a * a) / self.npoints * self.volume))

    def __eq__(self, other):
        return (isinstance(other, PeriodicGrid)
                and self.dim == other.dim and self.n == other.n
                and self.length == other.length)

    def __hash__(self):
        return hash((self.dim, self.n, self.length))

    def __repr__(self):
        return f"PeriodicGrid(dim={self.dim}, n={self.n}, length={self.length})"


def _check_finite(values: np.ndarray, what: str):
    if not np.all(np.isfinite(values)):
        raise NonFiniteField(f"{what} contains NaN or Inf samples")


@dataclass(frozen=True)
class ScalarField:
    grid: PeriodicGrid
    values: np.ndarray

    @classmethod
    def from_values(cls, grid, values, check=True):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != grid.shape:
            raise GridMismatch(f"scalar shape {values.shape} != grid shape {grid.shape}")
        if check:
            _check_finite(values, "ScalarField")
        return cls(grid, values)

    def min(self) -> float:
        return float(self.values.min())

    def max(self) -> float:
        return float(self.values.max())


@dataclass(frozen=True)
class VectorField:
    grid: PeriodicGrid
    values: np.ndarray  # shape (dim,) + grid.shape

    @classmethod
    def from_values(cls, grid, values, check=True):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (grid.dim,) + grid.shape:
            raise GridMismatch(f"vector shape {values.shape} incompatible with {grid!r}")
        if check:
            _check_finite(values, "VectorField")
        return cls(grid, values)


@dataclass(frozen=True)
class TensorField:
    grid: PeriodicGrid
    values: np.ndarray  # shape (dim, dim) + grid.shape

    @classmethod
    def from_values(cls, grid, values, check=True):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (grid.dim, grid.dim) + grid.shape:
            raise GridMismatch(f"tensor shape {values.shape} incompatible with {grid!r}")
        if check:
            _check_finite(values, "TensorField")
        return cls(grid, values)


def _require_same_grid(*fields):
    g = fields[0].grid
    for f in fields[1:]:
        if f.grid != g:
            raise GridMismatch(f"fields live on different grids: {f.grid!r} vs {g!r}")
    return g


def grad(s: ScalarField) -> VectorField:
    _check_finite(s.values, "grad input")
    return VectorField(s.grid, s.grid.grad_arr(s.values))


def div(v: VectorField) -> ScalarField:
    _check_finite(v.values, "div input")
    return ScalarField(v.grid, v.grid.div_arr(v.values))


def laplacian(s: ScalarField) -> ScalarField:
    _check_finite(s.values, "laplacian input")
    return ScalarField(s.grid, s.grid.laplacian_arr(s.values))


def hessian(s: ScalarField) -> TensorField:
    _check_finite(s.values, "hessian input")
    return TensorField(s.grid, s.grid.hessian_arr(s.values))


def sym_grad(v: VectorField) -> TensorField:
    """Symmetric part (grad v + (grad v)^T)/2 of the velocity gradient."""
    _check_finite(v.values, "sym_grad input")
    G = v.grid.grad_vector_arr(v.values)
    return TensorField(v.grid, 0.5 * (G + np.swapaxes(G, 0, 1)))


def antisym_grad(v: VectorField) -> TensorField:
    """Antisymmetric part (grad v - (grad v)^T)/2 of the velocity gradient."""
    _check_finite(v.values, "antisym_grad input")
    G = v.grid.grad_vector_arr(v.values)
    return TensorField(v.grid, 0.5 * (G - np.swapaxes(G, 0, 1)))


def dealiased_product(a, b):
    """Point-wise product with 2/3-rule truncation of the result's spectrum."""
    g = _require_same_grid(a, b)
    out = g.dealiased_product_arr(a.values, b.values)
    return type(a)(g, out) if isinstance(a, ScalarField) else ScalarField(g, out)


def integrate(s: ScalarField) -> float:
    _check_finite(s.values, "integrate input")
    return s.grid.integrate_arr(s.values)


# -- snapshot I/O -----------------------------------------------------------
#
# Layout (bit-exact): magic "QNS1", uint32 little-endian header length, the
# header as UTF-8 JSON (dim, n, length, time, full params, field names),
# then each field as row-major little-endian float64.


def write_snapshot(path, grid: PeriodicGrid, time: float, params_dict: dict,
                   rho: np.ndarray, mom: np.ndarray) -> None:
    names = ["rho"] + [f"mom_{ax}" for ax in "xyz"[: grid.dim]]
    header = {
        "dim": grid.dim, "n": grid.n, "length": grid.length,
        "time": time, "params": params_dict, "fields": names,
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(SNAPSHOT_MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(np.ascontiguousarray(rho, dtype="<f8").tobytes())
        for c in range(grid.dim):
            fh.write(np.ascontiguousarray(mom[c], dtype="<f8").tobytes())


def read_snapshot(path):
    """Returns (grid, time, params_dict, rho, mom)."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != SNAPSHOT_MAGIC:
            raise DomainError(f"not a snapshot file (magic {magic!r})")
        (hlen,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(hlen).decode("utf-8"))
        grid = PeriodicGrid(header["dim"], header["n"], header["length"])
        count = grid.npoints
        rho = np.frombuffer(fh.read(8 * count), dtype="<f8").reshape(grid.shape).copy()
        mom = np.empty((grid.dim,) + grid.shape)
        for c in range(grid.dim):
            mom[c] = np.frombuffer(fh.read(8 * count), dtype="<f8").reshape(grid.shape)
    return grid, header["time"], header["params"], rho, mom
