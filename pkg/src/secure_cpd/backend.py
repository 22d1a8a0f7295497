"""Emulated CKKS-style SIMD evaluator.

Ciphertexts are plain float64 vectors here; what the emulator keeps honest is
the *shape* of the computation.  Every value an upper layer touches goes
through :func:`add`, :func:`mul` and :func:`rotate`, each of which updates the
owning :class:`EvalContext`'s operation counters, and every multiplication
consumes one unit of multiplicative depth.  A product that would exceed the
depth budget raises :class:`DepthOverflowError` instead of silently
continuing, as a leveled scheme without bootstrapping would.

Optionally, each multiplication adds i.i.d. Gaussian noise to every slot
(``noise_stddev``) to probe robustness against CKKS approximation error.
"""

from __future__ import annotations

import threading
from dataclasses import asdict, dataclass
from typing import Sequence, Union

import numpy as np

from .errors import CapacityError, ContextMismatchError, DepthOverflowError, ParameterError

DEFAULT_DEPTH_BUDGET = 65
MAX_SLOT_COUNT = 1 << 22


@dataclass
class OpCounters:
    cipher_mults: int = 0
    plain_mults: int = 0
    rotations: int = 0
    additions: int = 0

    @property
    def mults(self) -> int:
        return self.cipher_mults + self.plain_mults

    def as_dict(self) -> dict:
        d = asdict(self)
        d["mults"] = self.mults
        return d

    def __sub__(self, other: "OpCounters") -> "OpCounters":
        return OpCounters(
            self.cipher_mults - other.cipher_mults,
            self.plain_mults - other.plain_mults,
            self.rotations - other.rotations,
            self.additions - other.additions,
        )


class EvalContext:
    """Slot count, depth budget, noise model and the shared op tally."""

    def __init__(
        self,
        slot_count: int,
        depth_budget: int = DEFAULT_DEPTH_BUDGET,
        noise_stddev: float = 0.0,
        rng_seed: int = 0,
    ):
        slot_count = int(slot_count)
        if slot_count < 1 or slot_count & (slot_count - 1):
            raise ParameterError(f"slot_count must be a power of two, got {slot_count}")
        if slot_count > MAX_SLOT_COUNT:
            raise ParameterError(f"slot_count {slot_count} exceeds the maximum {MAX_SLOT_COUNT}")
        if depth_budget < 0:
            raise ParameterError("depth_budget must be non-negative")
        if noise_stddev < 0:
            raise ParameterError("noise_stddev must be non-negative")
        self.slot_count = slot_count
        self.depth_budget = int(depth_budget)
        self.noise_stddev = float(noise_stddev)
        self.rng_seed = int(rng_seed)
        self._counters = OpCounters()
        self._max_depth = 0
        self._lock = threading.Lock()
        self._rng = np.random.default_rng(self.rng_seed)

    def __repr__(self) -> str:
        return (
            f"EvalContext(slot_count={self.slot_count}, depth_budget={self.depth_budget}, "
            f"noise_stddev={self.noise_stddev}, rng_seed={self.rng_seed})"
        )

    @property
    def counters(self) -> OpCounters:
        """A snapshot copy; subtract two snapshots to cost a code region."""
        with self._lock:
            return OpCounters(**asdict(self._counters))

    @property
    def max_depth(self) -> int:
        with self._lock:
            return self._max_depth

    def _count(self, field: str, depth: int | None = None) -> None:
        with self._lock:
            setattr(self._counters, field, getattr(self._counters, field) + 1)
            if depth is not None and depth > self._max_depth:
                self._max_depth = depth

    def _noise(self) -> np.ndarray:
        with self._lock:
            return self._rng.normal(0.0, self.noise_stddev, self.slot_count)

    def plain(self, values: Union[Sequence[float], np.ndarray, float]) -> "PlainVector":
        """Encode a public vector (zero padded) or broadcast a scalar."""
        if np.isscalar(values):
            return PlainVector(np.full(self.slot_count, float(values)), self)
        return PlainVector(_pad(values, self.slot_count), self)


def _pad(values, slot_count: int) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size > slot_count:
        raise CapacityError(f"{arr.size} values do not fit in {slot_count} slots")
    out = np.zeros(slot_count)
    out[: arr.size] = arr
    return out


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


class PlainVector:
    """Public (unencrypted) slot vector, e.g. a bitmask or a coefficient row."""

    __slots__ = ("slots", "ctx")

    def __init__(self, slots: np.ndarray, ctx: EvalContext):
        slots = np.asarray(slots, dtype=np.float64)
        if slots.shape != (ctx.slot_count,):
            raise ContextMismatchError(
                f"plaintext has {slots.size} slots, context expects {ctx.slot_count}"
            )
        self.slots = _frozen(slots.copy())
        self.ctx = ctx

    def __repr__(self) -> str:
        return f"PlainVector(slot_count={self.slots.size})"


class CipherVector:
    """An emulated ciphertext.  Immutable: every operation returns a new one."""

    __slots__ = ("slots", "depth", "ctx")

    def __init__(self, slots: np.ndarray, depth: int, ctx: EvalContext):
        self.slots = _frozen(slots)
        self.depth = depth
        self.ctx = ctx

    def __repr__(self) -> str:
        return f"CipherVector(slot_count={self.slots.size}, depth={self.depth})"

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return add(negate(self), other)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return negate(self)

    def __lshift__(self, k: int):
        return rotate(self, k)

    def __rshift__(self, k: int):
        return rotate(self, -k)


Operand = Union[CipherVector, PlainVector, float, int]


def _operand(X: CipherVector, Y: Operand) -> tuple[np.ndarray, int, bool]:
    """Slots, depth and is-ciphertext flag of the right-hand operand."""
    if isinstance(Y, CipherVector):
        if Y.ctx is not X.ctx:
            raise ContextMismatchError("operands belong to different contexts")
        return Y.slots, Y.depth, True
    if isinstance(Y, PlainVector):
        if Y.ctx is not X.ctx and Y.ctx.slot_count != X.ctx.slot_count:
            raise ContextMismatchError("plaintext slot count does not match")
        return Y.slots, 0, False
    if np.isscalar(Y):
        return np.float64(Y), 0, False
    raise TypeError(f"unsupported operand type {type(Y).__name__}")


def encrypt(values, ctx: EvalContext) -> CipherVector:
    return CipherVector(_pad(values, ctx.slot_count), 0, ctx)


def decode(X: CipherVector) -> np.ndarray:
    """Read back the slot values (a copy)."""
    return np.array(X.slots)


def add(X: CipherVector, Y: Operand) -> CipherVector:
    y, depth, _ = _operand(X, Y)
    X.ctx._count("additions")
    return CipherVector(X.slots + y, max(X.depth, depth), X.ctx)


def sub(X: CipherVector, Y: Operand) -> CipherVector:
    y, depth, _ = _operand(X, Y)
    X.ctx._count("additions")
    return CipherVector(X.slots - y, max(X.depth, depth), X.ctx)


def negate(X: CipherVector) -> CipherVector:
    return CipherVector(-X.slots, X.depth, X.ctx)


def mul(X: CipherVector, Y: Operand) -> CipherVector:
    """Slot-wise product.  Plaintext and scalar factors also cost one level."""
    y, depth, is_cipher = _operand(X, Y)
    ctx = X.ctx
    new_depth = max(X.depth, depth) + 1
    if new_depth > ctx.depth_budget:
        raise DepthOverflowError(
            f"multiplication would reach depth {new_depth}, budget is {ctx.depth_budget}"
        )
    ctx._count("cipher_mults" if is_cipher else "plain_mults", new_depth)
    out = X.slots * y
    if ctx.noise_stddev > 0:
        out = out + ctx._noise()
    return CipherVector(out, new_depth, ctx)


def rotate(X: CipherVector, k: int) -> CipherVector:
    """Cyclic rotation; positive ``k`` rotates left (slot i receives slot i+k)."""
    X.ctx._count("rotations")
    return CipherVector(np.roll(X.slots, -int(k)), X.depth, X.ctx)
