# persistence.py: het gelabelde deeltjesmodel: configuraties, amplitudes per
# permutatie, toestanden over de volledige configuratieruimte.
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from itertools import permutations
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from lattice import (
    LatticeSpec,
    SingleParticlePropagator,
    SingleParticleState,
    as_matrix,
    build_hamiltonian,
    factorial_guard,
    propagator,
)

PERMUTATION_MAX_N = 8
NORM_TOL = 1e-10

Permutation = Tuple[int, ...]


@dataclass(frozen=True)
class LabelledConfig:
    """positions[k] is the site of the particle labelled k; order matters."""
    positions: Tuple[int, ...]

    def __post_init__(self):
        pos = tuple(int(p) for p in self.positions)
        if not pos:
            raise ValueError("a configuration needs at least one particle")
        if min(pos) < 0:
            raise ValueError(f"negative site in {pos}")
        object.__setattr__(self, "positions", pos)

    @property
    def n(self) -> int:
        return len(self.positions)

    def check_sites(self, sites: int) -> None:
        if max(self.positions) >= sites:
            raise ValueError(f"configuration {self.positions} lies outside a {sites}-site lattice")


@dataclass(frozen=True)
class PermutationAmplitudes:
    n: int
    amps: Dict[Permutation, complex]

    def __post_init__(self):
        if len(self.amps) != math.factorial(self.n):
            raise ValueError(f"expected {math.factorial(self.n)} permutation amplitudes, got {len(self.amps)}")
        if not all(np.isfinite(complex(a)) for a in self.amps.values()):
            raise ValueError("permutation amplitudes must be finite")

    @property
    def identity(self) -> Permutation:
        return tuple(range(self.n))

    @property
    def direct(self) -> complex:
        return self.amps[self.identity]

    @property
    def indirect(self) -> complex:
        # alleen zinvol voor twee deeltjes: de verwisseling
        if self.n != 2:
            raise ValueError("the indirect amplitude is defined for two particles")
        return self.amps[(1, 0)]

    def masses(self) -> Dict[Permutation, float]:
        return {p: abs(a) ** 2 for p, a in self.amps.items()}

    @classmethod
    def pair(cls, a12: complex, a21: complex) -> "PermutationAmplitudes":
        return cls(2, {(0, 1): complex(a12), (1, 0): complex(a21)})


@dataclass(frozen=True)
class PersistenceState:
    """Wavefunction over labelled configurations, stored as a tensor of shape (sites,)*n."""
    psi: np.ndarray = field(repr=False)

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=complex)
        if psi.ndim < 1 or len(set(psi.shape)) != 1:
            raise ValueError(f"state tensor must have shape (sites,)*n, got {psi.shape}")
        norm = np.linalg.norm(psi)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm {norm:.12f})")
        object.__setattr__(self, "psi", psi)

    @property
    def n(self) -> int:
        return self.psi.ndim

    @property
    def sites(self) -> int:
        return self.psi.shape[0]

    @property
    def vector(self) -> np.ndarray:
        return self.psi.reshape(-1)

    @classmethod
    def normalized(cls, psi: np.ndarray) -> "PersistenceState":
        psi = np.asarray(psi, dtype=complex)
        norm = np.linalg.norm(psi)
        if not norm > 0:
            raise ValueError("cannot normalize a zero state")
        return cls(psi / norm)


def _sites_of(events) -> Tuple[int, ...]:
    # EventMultiset, LabelledConfig of gewoon een tuple
    for attr in ("events", "positions"):
        if hasattr(events, attr):
            return tuple(getattr(events, attr))
    return tuple(int(e) for e in events)


# ---------- Amplitudes ----------

def persistence_amp(u, from_config: LabelledConfig, to_config: LabelledConfig) -> complex:
    """Amplitude that every labelled particle makes its own transition."""
    src, dst = _sites_of(from_config), _sites_of(to_config)
    if len(src) != len(dst):
        raise ValueError(f"particle counts differ: {len(src)} vs {len(dst)}")
    m = as_matrix(u)
    return complex(np.prod([m[b, a] for a, b in zip(src, dst)]))


def all_permutation_amps(u, from_events, to_events) -> PermutationAmplitudes:
    """
    amps[sigma] = prod_k U[to[sigma(k)], from[k]].

    The events are taken in the order given; with sorted multisets the left-most
    initial event is particle 1 and the identity permutation is the direct path.
    """
    src, dst = _sites_of(from_events), _sites_of(to_events)
    if len(src) != len(dst):
        raise ValueError(f"event counts differ: {len(src)} vs {len(dst)}")
    n = len(src)
    factorial_guard(n, PERMUTATION_MAX_N)
    m = as_matrix(u)
    block = m[np.ix_(dst, src)]  # block[j, k] = U[to_j, from_k]
    cols = np.arange(n)
    amps = {sigma: complex(np.prod(block[list(sigma), cols])) for sigma in permutations(range(n))}
    return PermutationAmplitudes(n, amps)


# ---------- Hamiltonianen ----------

def _embed(h: np.ndarray, slot: int, n: int) -> np.ndarray:
    eye = np.eye(h.shape[0], dtype=complex)
    return reduce(np.kron, [h if k == slot else eye for k in range(n)])


def symmetric_hamiltonian(spec: LatticeSpec, n: int, interaction: float = 0.0) -> np.ndarray:
    """Kronecker sum of n copies of H plus a contact term on every coincident pair."""
    h1 = build_hamiltonian(spec)
    h = sum(_embed(h1, k, n) for k in range(n))
    if interaction and n > 1:
        grid = np.indices((spec.sites,) * n).reshape(n, -1)
        coincident = sum((grid[a] == grid[b]).astype(float) for a in range(n) for b in range(a + 1, n))
        h = h + interaction * np.diag(coincident)
    return np.asarray(h, dtype=complex)


def symmetric_two_particle_hamiltonian(spec: LatticeSpec, interaction: float = 0.0) -> np.ndarray:
    return symmetric_hamiltonian(spec, 2, interaction)


def exchange_operator(sites: int, n: int = 2, perm: Optional[Sequence[int]] = None) -> np.ndarray:
    """Matrix that relabels particles: (P psi)(x) = psi(x permuted). Default swaps labels 1 and 2."""
    if perm is None:
        perm = (1, 0) + tuple(range(2, n))
    dim = sites ** n
    idx = np.arange(dim).reshape((sites,) * n)
    src = np.transpose(idx, perm).reshape(-1)
    p = np.zeros((dim, dim))
    p[np.arange(dim), src] = 1.0
    return p


# ---------- Toestanden ----------

def product_state(*factors: SingleParticleState) -> PersistenceState:
    vecs = [f.vector for f in factors]
    return PersistenceState.normalized(reduce(np.multiply.outer, vecs))


def labelled_state(config: LabelledConfig, sites: int) -> PersistenceState:
    config.check_sites(sites)
    psi = np.zeros((sites,) * config.n, dtype=complex)
    psi[config.positions] = 1.0
    return PersistenceState(psi)


def evolve_persistence(state: PersistenceState, h: np.ndarray, t: float) -> PersistenceState:
    h = np.asarray(h)
    if h.shape != (state.psi.size, state.psi.size):
        raise ValueError(f"Hamiltonian of shape {h.shape} does not act on a state with {state.psi.size} entries")
    u = propagator(h, t)
    return PersistenceState((u.matrix @ state.vector).reshape(state.psi.shape))


def evolve_free(state: PersistenceState, u) -> PersistenceState:
    """Non-interacting evolution: the one-particle propagator acts on every label."""
    m = as_matrix(u)
    if m.shape[0] != state.sites:
        raise ValueError(f"propagator on {m.shape[0]} sites does not act on a {state.sites}-site state")
    psi = state.psi
    for k in range(state.n):
        psi = np.moveaxis(np.tensordot(m, psi, axes=(1, k)), 0, k)
    return PersistenceState(psi)


# ---------- Somregel (twee paden) ----------

def sum_rule_demo(a: complex, b: complex) -> complex:
    return complex(a) + complex(b)


@dataclass(frozen=True)
class SumRuleReport:
    a: complex
    b: complex
    c: complex
    path_sum: complex
    direct: complex

    @property
    def difference(self) -> float:
        return abs(self.path_sum - self.direct)


def two_path_demo(u: SingleParticlePropagator, v: SingleParticlePropagator,
                  source: int, target: int, via: Iterable[int]) -> SumRuleReport:
    """
    Single-particle paths source -> k -> target over two legs (U then V).

    a and b go through the two `via` sites; the path sum runs over every
    intermediate site and has to equal the composed amplitude (VU)[target, source].
    """
    k1, k2 = tuple(via)
    um, vm = as_matrix(u), as_matrix(v)
    a = complex(vm[target, k1] * um[k1, source])
    b = complex(vm[target, k2] * um[k2, source])
    path_sum = complex(np.sum(vm[target, :] * um[:, source]))
    direct = complex((vm @ um)[target, source])
    return SumRuleReport(a=a, b=b, c=sum_rule_demo(a, b), path_sum=path_sum, direct=direct)
