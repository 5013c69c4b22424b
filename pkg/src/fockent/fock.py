"""Site-spin modes, occupation-number bases and ladder operators.

A :class:`FockSpace` fixes an ordered set of modes and a particle statistics.
Basis states are all occupation patterns with per-mode counts up to the mode's
cap (1 for fermions, ``nmax`` for bosons), indexed in mixed radix with the
*first* canonical mode varying fastest. For two modes this gives the order
00, 10, 01, 11.

Fermionic sign convention: the basis state with occupied modes
``m1 < m2 < ... < mk`` (canonical order) is ``c†_{m1} c†_{m2} ... c†_{mk}|0>``,
so ``c†_j`` acting on a pattern picks up ``(-1)**(number of occupied modes
before j)``.
"""

from __future__ import annotations

import enum
import json
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Union

import numpy as np

from . import _kernels
from .errors import ModeError, NormalizationError, SystemMismatchError, ZeroNormError

PRUNE_TOL = 1e-14
NORM_TOL = 1e-10
DEFAULT_NMAX = 4


class Statistics(str, enum.Enum):
    FERMION = "fermion"
    BOSON = "boson"


class Spin(str, enum.Enum):
    UP = "up"
    DOWN = "down"
    NONE = "none"


_SPIN_RANK = {Spin.UP: 0, Spin.DOWN: 1, Spin.NONE: 2}
_SPIN_GLYPH = {Spin.UP: "↑", Spin.DOWN: "↓", Spin.NONE: ""}


@dataclass(frozen=True)
class ModeLabel:
    """A single-particle mode: site, optional arm, spin."""

    site: str
    spin: Spin = Spin.NONE
    arm: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "site", str(self.site))
        object.__setattr__(self, "spin", Spin(self.spin))
        if self.arm is not None:
            object.__setattr__(self, "arm", str(self.arm))

    @property
    def sort_key(self):
        return (self.site, self.arm or "", _SPIN_RANK[self.spin])

    @property
    def group(self) -> tuple[str, str | None]:
        """(site, arm) pair; modes sharing it differ only by spin."""
        return (self.site, self.arm)

    def __str__(self) -> str:
        s = self.site
        if self.arm:
            s += "/" + self.arm
        if self.spin is not Spin.NONE:
            s += "_" + self.spin.value
        return s

    @property
    def pretty(self) -> str:
        return f"{self.site}{self.arm or ''}{_SPIN_GLYPH[self.spin]}"


ModeLike = Union[ModeLabel, str, tuple]


def parse_mode(spec: ModeLike) -> ModeLabel:
    """Accept ``ModeLabel``, ``"A_up"``, ``"1/L_down"``, ``"A"``, ``("A", "up")`` or ``("1", "down", "L")``."""
    if isinstance(spec, ModeLabel):
        return spec
    if isinstance(spec, tuple):
        return ModeLabel(*spec)
    if isinstance(spec, Mapping):
        return ModeLabel(spec["site"], spec.get("spin", "none"), spec.get("arm"))
    if not isinstance(spec, str) or not spec:
        raise ModeError(f"cannot interpret mode {spec!r}")
    body, spin = spec, Spin.NONE
    if "_" in spec:
        body, _, tail = spec.rpartition("_")
        try:
            spin = Spin(tail)
        except ValueError as exc:
            raise ModeError(f"bad spin in mode {spec!r}") from exc
    site, _, arm = body.partition("/")
    return ModeLabel(site, spin, arm or None)


def two_site_modes(sites: Sequence[str] = ("A", "B")) -> list[ModeLabel]:
    return [ModeLabel(s, sp) for s in sites for sp in (Spin.UP, Spin.DOWN)]


class FockSpace:
    """Occupation-number basis over a fixed, canonically ordered mode list."""

    def __init__(self, modes: Iterable[ModeLike], statistics="fermion", nmax=None):
        parsed = [parse_mode(m) for m in modes]
        if not parsed:
            raise ModeError("a Fock space needs at least one mode")
        if len(set(parsed)) != len(parsed):
            raise ModeError("duplicate mode labels")
        self.statistics = Statistics(statistics)
        order = sorted(range(len(parsed)), key=lambda i: parsed[i].sort_key)
        self.modes: tuple[ModeLabel, ...] = tuple(parsed[i] for i in order)

        if self.statistics is Statistics.FERMION:
            caps = [1] * len(parsed)
        elif nmax is None or np.isscalar(nmax):
            caps = [DEFAULT_NMAX if nmax is None else int(nmax)] * len(parsed)
        else:
            given = [int(n) for n in nmax]
            if len(given) != len(parsed):
                raise ModeError("per-mode nmax must match the mode list")
            caps = [given[i] for i in order]
        if min(caps) < 1:
            raise ModeError("occupation caps must be >= 1")
        self.caps: tuple[int, ...] = tuple(caps)
        self.radix = np.array([c + 1 for c in self.caps], dtype=np.int64)
        self.strides = np.concatenate([[1], np.cumprod(self.radix)[:-1]]).astype(np.int64)
        self.dim = int(np.prod(self.radix))
        self._index = {m: i for i, m in enumerate(self.modes)}

    # -- identity -------------------------------------------------------
    def _key(self):
        return (self.modes, self.statistics, self.caps)

    def __eq__(self, other):
        return isinstance(other, FockSpace) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        names = ",".join(m.pretty for m in self.modes)
        return f"FockSpace([{names}], {self.statistics.value}, caps={self.caps})"

    @property
    def is_fermionic(self) -> bool:
        return self.statistics is Statistics.FERMION

    @property
    def nmax(self) -> int:
        return max(self.caps)

    # -- basis ------------------------------------------------------------
    @cached_property
    def patterns(self) -> np.ndarray:
        """(dim, n_modes) table of occupation counts."""
        idx = np.arange(self.dim, dtype=np.int64)
        return (idx[:, None] // self.strides[None, :]) % self.radix[None, :]

    @cached_property
    def particle_numbers(self) -> np.ndarray:
        return self.patterns.sum(axis=1)

    def mode_index(self, mode: ModeLike) -> int:
        m = parse_mode(mode)
        try:
            return self._index[m]
        except KeyError:
            raise ModeError(f"mode {m} is not part of {self!r}") from None

    def modes_of(self, selector) -> list[ModeLabel]:
        """Resolve a site name, a ``(site, arm)`` group, or an iterable of modes."""
        if isinstance(selector, str) and selector in {m.site for m in self.modes}:
            return [m for m in self.modes if m.site == selector]
        if isinstance(selector, tuple) and len(selector) == 2 and not isinstance(selector[0], ModeLabel):
            site, arm = str(selector[0]), selector[1]
            found = [m for m in self.modes if m.site == site and m.arm == arm]
            if found:
                return found
        if isinstance(selector, (str, ModeLabel)):
            selector = [selector]
        out = [self.modes[self.mode_index(m)] for m in selector]
        if len(set(out)) != len(out):
            raise ModeError("duplicate modes in selection")
        return sorted(out, key=lambda m: m.sort_key)

    def index(self, pattern: Sequence[int]) -> int:
        pat = np.asarray(pattern, dtype=np.int64)
        if pat.shape != (len(self.modes),) or np.any(pat < 0) or np.any(pat > np.array(self.caps)):
            raise ModeError(f"pattern {tuple(pattern)} not in {self!r}")
        return int(pat @ self.strides)

    def subspace(self, modes: Iterable[ModeLike]) -> FockSpace:
        chosen = [self.modes[self.mode_index(m)] for m in modes]
        caps = [self.caps[self.mode_index(m)] for m in chosen]
        return FockSpace(chosen, self.statistics, caps if not self.is_fermionic else None)

    def _parity(self, j: int) -> np.ndarray:
        cache = self.__dict__.setdefault("_parity_cache", {})
        if j not in cache:
            if self.is_fermionic:
                before = self.patterns[:, :j].sum(axis=1)
                cache[j] = np.where(before % 2 == 0, 1.0, -1.0)
            else:
                cache[j] = np.ones(self.dim)
        return cache[j]

    def pattern_label(self, pattern: Sequence[int]) -> str:
        return "".join(str(int(n)) for n in pattern)


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Dense amplitude vector over a :class:`FockSpace` basis.

    ``normalized`` is an explicit flag; arithmetic and ladder operators
    return unnormalized states. ``truncation_loss`` accumulates squared norm
    dropped at bosonic occupation caps.
    """

    space: FockSpace
    vector: np.ndarray
    normalized: bool = False
    truncation_loss: float = 0.0

    def __post_init__(self):
        vec = np.asarray(self.vector, dtype=np.complex128).copy()
        if vec.shape != (self.space.dim,):
            raise SystemMismatchError(f"vector of shape {vec.shape} does not match dim {self.space.dim}")
        vec[np.abs(vec) < PRUNE_TOL] = 0.0
        vec.flags.writeable = False
        object.__setattr__(self, "vector", vec)

    @property
    def statistics(self) -> Statistics:
        return self.space.statistics

    @property
    def modes(self) -> tuple[ModeLabel, ...]:
        return self.space.modes

    @property
    def amplitudes(self) -> dict[tuple[int, ...], complex]:
        nz = np.flatnonzero(self.vector)
        pats = self.space.patterns
        return {tuple(int(n) for n in pats[i]): complex(self.vector[i]) for i in nz}

    def amplitude(self, pattern: Sequence[int]) -> complex:
        return complex(self.vector[self.space.index(pattern)])

    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))

    def normalize(self) -> QuantumState:
        n = self.norm()
        if n < PRUNE_TOL:
            raise ZeroNormError("cannot normalize the zero state")
        return QuantumState(self.space, self.vector / n, True, self.truncation_loss)

    def is_zero(self) -> bool:
        return not np.any(self.vector)

    def _check_same(self, other: QuantumState):
        if self.space != other.space:
            raise SystemMismatchError("states live on different Fock spaces")

    def __add__(self, other: QuantumState) -> QuantumState:
        self._check_same(other)
        return QuantumState(self.space, self.vector + other.vector, False,
                            self.truncation_loss + other.truncation_loss)

    def __sub__(self, other: QuantumState) -> QuantumState:
        return self + (-1.0) * other

    def __mul__(self, c) -> QuantumState:
        return QuantumState(self.space, complex(c) * self.vector, False, self.truncation_loss)

    __rmul__ = __mul__

    def __truediv__(self, c) -> QuantumState:
        return self * (1.0 / complex(c))

    def __neg__(self):
        return (-1.0) * self

    def __repr__(self):
        terms = ", ".join(
            f"{self.space.pattern_label(p)}:{a:.4g}" for p, a in sorted(self.amplitudes.items())
        )
        return f"QuantumState({self.statistics.value}, {{{terms}}})"


def _as_space(modes_or_space, statistics, nmax) -> FockSpace:
    if isinstance(modes_or_space, FockSpace):
        return modes_or_space
    return FockSpace(modes_or_space, statistics, nmax)


def vacuum(modes_or_space, statistics="fermion", nmax=None) -> QuantumState:
    space = _as_space(modes_or_space, statistics, nmax)
    vec = np.zeros(space.dim, dtype=np.complex128)
    vec[0] = 1.0
    return QuantumState(space, vec, True)


def basis_state(space: FockSpace, pattern: Sequence[int]) -> QuantumState:
    vec = np.zeros(space.dim, dtype=np.complex128)
    vec[space.index(pattern)] = 1.0
    return QuantumState(space, vec, True)


def _ladder(state: QuantumState, mode, creation: bool) -> QuantumState:
    space = state.space
    j = space.mode_index(mode)
    counts = np.ascontiguousarray(space.patterns[:, j])
    out, lost = _kernels.ladder(
        state.vector.copy(), counts, space._parity(j), int(space.strides[j]), space.caps[j], creation
    )
    if space.is_fermionic:
        lost = 0.0  # Pauli blocking is exact, not a truncation artefact
    return QuantumState(space, out, False, state.truncation_loss + lost)


def apply_creation(state: QuantumState, mode: ModeLike) -> QuantumState:
    """``c†_mode |state>``; bosonic amplitude pushed past the cap is recorded in ``truncation_loss``."""
    return _ladder(state, mode, True)


def apply_annihilation(state: QuantumState, mode: ModeLike) -> QuantumState:
    return _ladder(state, mode, False)


def apply_orbital(state: QuantumState, orbital) -> QuantumState:
    """Apply a single creation factor: a mode, or a mapping ``{mode: coefficient}``."""
    if isinstance(orbital, Mapping):
        acc = None
        for m, c in orbital.items():
            if c == 0:
                continue
            term = complex(c) * apply_creation(state, m)
            acc = term if acc is None else acc + term
        return acc if acc is not None else 0.0 * state
    return apply_creation(state, orbital)


def build_from_ops(space: FockSpace, products, coeffs=None, normalize: bool = True) -> QuantumState:
    """Sum of creation strings applied to the vacuum.

    ``products`` is a list of strings; each string is a sequence of factors
    written left to right as in ``c†_1 c†_2 |0>`` (so the last factor acts
    first). A factor is a mode or a ``{mode: coeff}`` linear combination. A
    single string may be passed directly.

    >>> sp = FockSpace(two_site_modes())
    >>> build_from_ops(sp, ["A_up", "B_down"]).amplitudes
    {(1, 0, 0, 1): (1+0j)}
    """
    # strings are lists; a tuple is always a single mode factor
    if not products or not isinstance(products[0], list):
        products = [products]
    coeffs = [1.0] * len(products) if coeffs is None else list(coeffs)
    if len(coeffs) != len(products):
        raise ValueError("one coefficient per product string")
    vac = vacuum(space)
    total = 0.0 * vac
    for string, c in zip(products, coeffs):
        psi = vac
        for factor in reversed(list(string)):
            psi = apply_orbital(psi, factor)
        total = total + complex(c) * psi
    if not normalize:
        return total
    if total.norm() < 1e-12:
        raise ZeroNormError("operator string annihilates the vacuum (Pauli exclusion or cancellation)")
    return total.normalize()


def inner_product(a: QuantumState, b: QuantumState) -> complex:
    """<a|b>, conjugate-linear in ``a``."""
    if a.space != b.space:
        raise SystemMismatchError("inner product between different Fock spaces")
    return complex(np.vdot(a.vector, b.vector))


def number_sector_project(state: QuantumState, n: int) -> tuple[QuantumState, float]:
    """Keep only patterns with ``n`` particles; returns (projected state, retained norm)."""
    if n < 0:
        raise ValueError("particle number must be non-negative")
    mask = state.space.particle_numbers == n
    vec = np.where(mask, state.vector, 0.0)
    proj = QuantumState(state.space, vec, False, state.truncation_loss)
    return proj, proj.norm()


def number_distribution(state: QuantumState) -> dict[int, float]:
    probs = np.abs(state.vector) ** 2
    n = state.space.particle_numbers
    return {int(k): float(probs[n == k].sum()) for k in np.unique(n[probs > 0])}


def ladder_matrix(space: FockSpace, mode: ModeLike, creation: bool = True) -> np.ndarray:
    """Dense matrix of ``c†_mode`` (or ``c_mode``) on the full basis."""
    j = space.mode_index(mode)
    counts = space.patterns[:, j]
    parity = space._parity(j)
    stride = int(space.strides[j])
    mat = np.zeros((space.dim, space.dim))
    if creation:
        src = np.flatnonzero(counts < space.caps[j])
        mat[src + stride, src] = np.sqrt(counts[src] + 1.0) * parity[src]
    else:
        src = np.flatnonzero(counts > 0)
        mat[src - stride, src] = np.sqrt(counts[src]) * parity[src]
    return mat


def number_matrix(space: FockSpace, mode: ModeLike) -> np.ndarray:
    return np.diag(space.patterns[:, space.mode_index(mode)].astype(float))


def creation_string(space: FockSpace, pattern: Sequence[int]) -> list[ModeLabel]:
    """Factors (left to right) whose product on the vacuum gives ``pattern`` up to the bosonic sqrt(n!)."""
    out = []
    for m, n in zip(space.modes, pattern):
        out.extend([m] * int(n))
    return out


def transform_modes(state: QuantumState, u: np.ndarray) -> QuantumState:
    """Single-particle basis change ``c†_j -> sum_i u[i, j] c†_i`` lifted to Fock space.

    ``u`` is indexed by canonical mode position. Each basis pattern is
    rewritten as its canonical creation string and re-expanded, so the
    fermionic signs come out of the ladder algebra directly.
    """
    space = state.space
    u = np.asarray(u, dtype=np.complex128)
    m = len(space.modes)
    if u.shape != (m, m):
        raise SystemMismatchError(f"mode transform must be {m}x{m}")
    columns = [{space.modes[i]: u[i, j] for i in range(m) if abs(u[i, j]) > PRUNE_TOL} for j in range(m)]
    vac = vacuum(space)
    out = 0.0 * vac
    loss = state.truncation_loss
    pats = space.patterns
    for p in np.flatnonzero(state.vector):
        psi = vac
        for mode in reversed(creation_string(space, pats[p])):
            psi = apply_orbital(psi, columns[space.mode_index(mode)])
        norm_fix = math.prod(math.factorial(int(n)) for n in pats[p]) ** -0.5
        out = out + (state.vector[p] * norm_fix) * psi
        loss += psi.truncation_loss
    return QuantumState(space, out.vector, False, loss)


def operator_from_mode_transform(space: FockSpace, u: np.ndarray) -> np.ndarray:
    """Dense Fock-space matrix of :func:`transform_modes` (columns = images of basis states)."""
    mat = np.zeros((space.dim, space.dim), dtype=np.complex128)
    for p in range(space.dim):
        mat[:, p] = transform_modes(basis_state(space, space.patterns[p]), u).vector
    return mat


def coherent_amplitudes(alpha: complex, cutoff: int) -> np.ndarray:
    """Untruncated-normalization coefficients ``exp(-|a|^2/2) a^n / sqrt(n!)`` for n = 0..cutoff."""
    n = np.arange(cutoff + 1)
    r = abs(alpha)
    if r == 0:
        out = np.zeros(cutoff + 1, dtype=np.complex128)
        out[0] = 1.0
        return out
    from scipy.special import gammaln

    logmag = -0.5 * r * r + n * math.log(r) - 0.5 * gammaln(n + 1)
    return np.exp(logmag) * np.exp(1j * n * np.angle(alpha))


def coherent_state(space: FockSpace, mode: ModeLike, alpha: complex) -> QuantumState:
    """Truncated coherent state in one bosonic mode, vacuum elsewhere (not renormalized)."""
    if space.is_fermionic:
        raise ModeError("coherent states need a bosonic mode")
    j = space.mode_index(mode)
    amps = coherent_amplitudes(alpha, space.caps[j])
    vec = np.zeros(space.dim, dtype=np.complex128)
    vec[np.arange(space.caps[j] + 1) * space.strides[j]] = amps
    st = QuantumState(space, vec)
    return QuantumState(space, st.vector, abs(st.norm() - 1) < NORM_TOL)


# -- state files ---------------------------------------------------------------

def state_to_dict(state: QuantumState) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "statistics": state.statistics.value,
        "modes": [{"site": m.site, "spin": m.spin.value, "arm": m.arm} for m in state.modes],
    }
    if not state.space.is_fermionic:
        caps = set(state.space.caps)
        doc["nmax"] = caps.pop() if len(caps) == 1 else list(state.space.caps)
    doc["terms"] = [
        {"occupations": list(p), "re": a.real, "im": a.imag}
        for p, a in sorted(state.amplitudes.items())
    ]
    return doc


def state_from_dict(doc: Mapping[str, Any]) -> tuple[QuantumState, float]:
    """Build a normalized state from a state document; also returns the original norm."""
    try:
        stats = Statistics(doc["statistics"])
        modes = [parse_mode(m) for m in doc["modes"]]
        terms = doc["terms"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ModeError(f"malformed state document: {exc}") from exc
    nmax = doc.get("nmax") if stats is Statistics.BOSON else None
    space = FockSpace(modes, stats, nmax)
    # occupations are listed in the document's mode order
    perm = [space.mode_index(m) for m in modes]
    vec = np.zeros(space.dim, dtype=np.complex128)
    for t in terms:
        occ = list(t["occupations"])
        if len(occ) != len(modes):
            raise ModeError("occupation list length does not match modes")
        canon = [0] * len(modes)
        for k, n in zip(perm, occ):
            canon[k] = int(n)
        vec[space.index(canon)] += complex(float(t.get("re", 0.0)), float(t.get("im", 0.0)))
    if space.is_fermionic and modes != list(space.modes):
        # terms written in a non-canonical mode order: reorder the creation strings
        vec = _reorder_document_signs(space, modes, vec)
    raw = QuantumState(space, vec)
    norm = raw.norm()
    if norm < PRUNE_TOL:
        raise ZeroNormError("state document has zero norm")
    return raw.normalize(), norm


def _reorder_document_signs(space: FockSpace, doc_modes, vec):
    """Sign of sorting a creation string written in document order into canonical order."""
    rank = np.array([space.mode_index(m) for m in doc_modes])
    pats = space.patterns
    signs = np.ones(space.dim)
    for p in np.flatnonzero(vec):
        occ_doc = [rank[k] for k in range(len(doc_modes)) if pats[p][rank[k]]]
        inversions = sum(1 for a in range(len(occ_doc)) for b in range(a + 1, len(occ_doc)) if occ_doc[a] > occ_doc[b])
        signs[p] = -1.0 if inversions % 2 else 1.0
    return vec * signs


def save_state(state: QuantumState, path) -> None:
    Path(path).write_text(json.dumps(state_to_dict(state), indent=2) + "\n", encoding="utf-8")


def load_state(path) -> tuple[QuantumState, float]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModeError(f"state file {path} is not valid JSON: {exc}") from exc
    return state_from_dict(doc)
