# lattice.py: 1-D rooster, Hamiltoniaan, propagators, golfpakketten en de
# dichte kernels (determinant, permanent) waar de rest op draait.
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import permutations
from typing import Sequence, Tuple

import numpy as np
from scipy import linalg

from common import SizeError

HERMITIAN_TOL = 1e-10
PERMANENT_MAX_N = 20

PERIODIC = "periodic"
OPEN = "open"


@dataclass(frozen=True)
class LatticeSpec:
    sites: int
    boundary: str = PERIODIC
    hopping: float = 1.0
    potential: Tuple[float, ...] = ()
    dt: float = 0.1

    def __post_init__(self):
        if int(self.sites) != self.sites or self.sites < 2:
            raise ValueError(f"sites must be an integer >= 2, got {self.sites}")
        if self.boundary not in (PERIODIC, OPEN):
            raise ValueError(f"boundary must be '{PERIODIC}' or '{OPEN}', got {self.boundary!r}")
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        pot = tuple(float(v) for v in self.potential) or (0.0,) * self.sites
        if len(pot) != self.sites:
            raise ValueError(f"potential has length {len(pot)}, expected {self.sites}")
        object.__setattr__(self, "potential", pot)


@dataclass(frozen=True)
class SingleParticlePropagator:
    matrix: np.ndarray
    interval: Tuple[float, float] = (0.0, 0.0)

    @property
    def sites(self) -> int:
        return self.matrix.shape[0]

    def __getitem__(self, idx):
        return self.matrix[idx]

    def then(self, later: "SingleParticlePropagator") -> "SingleParticlePropagator":
        """Evolve with self first, then with `later` (matrix later @ self)."""
        if later.sites != self.sites:
            raise ValueError("propagators act on different lattices")
        return SingleParticlePropagator(later.matrix @ self.matrix, (self.interval[0], later.interval[1]))

    def unitarity_defect(self) -> float:
        u = self.matrix
        return float(np.max(np.abs(u.conj().T @ u - np.eye(self.sites))))


@dataclass(frozen=True)
class SingleParticleState:
    vector: np.ndarray = field(repr=False)

    @property
    def sites(self) -> int:
        return self.vector.shape[0]

    def density(self) -> np.ndarray:
        return np.abs(self.vector) ** 2

    def evolve(self, u: SingleParticlePropagator) -> "SingleParticleState":
        return SingleParticleState(u.matrix @ self.vector)


def as_matrix(u) -> np.ndarray:
    return u.matrix if isinstance(u, SingleParticlePropagator) else np.asarray(u)


# ---------- Hamiltoniaan / propagator ----------

def build_hamiltonian(spec: LatticeSpec) -> np.ndarray:
    n = spec.sites
    if n < 2:
        raise ValueError("a lattice needs at least 2 sites")
    h = np.diag(np.asarray(spec.potential, dtype=complex))
    bonds = n if (spec.boundary == PERIODIC and n > 2) else n - 1
    for i in range(bonds):
        j = (i + 1) % n
        h[i, j] -= spec.hopping
        h[j, i] -= spec.hopping
    return h


def hermiticity_defect(h: np.ndarray) -> float:
    return float(np.max(np.abs(h - h.conj().T))) if h.size else 0.0


def propagator(h: np.ndarray, t: float, t_from: float = 0.0) -> SingleParticlePropagator:
    """exp(-i H t) through the Hermitian eigendecomposition of H."""
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"Hamiltonian must be square, got shape {h.shape}")
    if hermiticity_defect(h) > HERMITIAN_TOL:
        raise ValueError(f"Hamiltonian is not Hermitian (defect {hermiticity_defect(h):.2e})")
    if t == 0:
        return SingleParticlePropagator(np.eye(h.shape[0], dtype=complex), (t_from, t_from))
    w, v = linalg.eigh(h)
    u = (v * np.exp(-1j * w * t)) @ v.conj().T
    return SingleParticlePropagator(u, (t_from, t_from + t))


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (a + a.conj().T) / 2


def random_unitary(sites: int, rng: np.random.Generator) -> SingleParticlePropagator:
    return propagator(random_hermitian(sites, rng), 1.0)


# ---------- Golfpakketten ----------

def gaussian_packet(spec: LatticeSpec, x0: float, p0: float = 0.0, sigma: float = 1.0) -> SingleParticleState:
    if not sigma > 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    x = np.arange(spec.sites, dtype=float)
    vec = np.exp(-((x - x0) ** 2) / (4 * sigma ** 2) + 1j * p0 * x)
    norm = np.linalg.norm(vec)
    if not np.isfinite(norm) or norm < 1e-150:
        raise ValueError(f"packet at x0={x0} has no weight on the lattice")
    return SingleParticleState(vec / norm)


@dataclass(frozen=True)
class Packet:
    x0: float
    p0: float = 0.0
    sigma: float = 1.0

    def state(self, spec: LatticeSpec) -> SingleParticleState:
        return gaussian_packet(spec, self.x0, self.p0, self.sigma)


# ---------- Kernels ----------

def permutation_sign(perm: Sequence[int]) -> int:
    """+1 for even, -1 for odd permutations (cycle decomposition)."""
    seen = [False] * len(perm)
    sign = 1
    for start in range(len(perm)):
        if seen[start]:
            continue
        j, length = start, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def permutation_expansion(m: np.ndarray, signed: bool) -> complex:
    """Brute-force n!-term sum; the reference oracle for `determinant` and `permanent`."""
    m = np.asarray(m, dtype=complex)
    n = m.shape[0]
    rows = range(n)
    total = 0j
    for cols in permutations(rows):
        term = complex(np.prod(m[rows, cols]))
        total += permutation_sign(cols) * term if signed else term
    return total


def _require_square(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


def determinant(m: np.ndarray) -> complex:
    # LAPACK getrf: LU met partial pivoting; singulier geeft gewoon 0
    m = _require_square(m)
    if m.shape[0] == 0:
        return 1 + 0j
    return complex(np.linalg.det(m))


def permanent(m: np.ndarray) -> complex:
    """
    Permanent via Ryser's formula in Gray-code order.

    perm(A) = (-1)^n * sum over column subsets S of (-1)^|S| * prod_i sum_{j in S} a_ij,
    visiting the subsets so that consecutive ones differ in one column.
    """
    m = _require_square(m)
    n = m.shape[0]
    if n > PERMANENT_MAX_N:
        raise SizeError(f"permanent of a {n}x{n} matrix exceeds the n <= {PERMANENT_MAX_N} limit")
    if n == 0:
        return 1 + 0j
    row_sums = np.zeros(n, dtype=complex)
    total = 0j
    grey = 0
    for k in range(1, 2 ** n):
        new_grey = k ^ (k >> 1)
        col = (grey ^ new_grey).bit_length() - 1
        if new_grey & (1 << col):
            row_sums += m[:, col]
        else:
            row_sums -= m[:, col]
        grey = new_grey
        # |S| wisselt elke stap van pariteit; k oneven <=> |S| oneven
        term = complex(np.prod(row_sums))
        total += -term if k % 2 else term
    return total if n % 2 == 0 else -total


def factorial_guard(n: int, limit: int) -> None:
    if n > limit:
        raise SizeError(f"{n}! permutations exceed the n <= {limit} limit ({math.factorial(n)} terms)")
