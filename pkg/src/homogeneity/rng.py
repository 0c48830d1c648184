"""Seedable substream random number generators.

The default generator is a lag-8 complementary multiply-with-carry (CMWC)
generator with base ``b = 2**32 - 1`` and multiplier ``a = 4294967054``.
For these parameters ``p = a * b**8 + 1`` is prime and ``b`` is a primitive
root modulo ``p``, so the period is ``p - 1`` (about ``2**288``).  Each step is

    t = a * x[n - 8] + c[n - 1]
    c[n] = t // b
    x[n] = (b - 1) - (t mod b)

and the carry stays in ``[0, a)``.

Generators are exposed as a pair of numba functions ``(init, next_u32)``
acting on a ``uint64`` state vector of length :data:`STATE_WORDS`.  The
Monte-Carlo kernels are built from that pair, so an alternative generator
can be registered in :data:`GENERATORS` without touching the simulation code.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numba as nb
import numpy as np

__all__ = [
    "CMWC_LAG",
    "CMWC_MULTIPLIER",
    "CMWC_BASE",
    "GENERATORS",
    "STATE_WORDS",
    "RngState",
    "rng_init",
    "rng_uniform",
    "rng_uniforms",
    "rng_u32",
]

CMWC_LAG = 8
CMWC_MULTIPLIER = 4294967054
CMWC_BASE = 2**32 - 1

# state layout: [x_0 .. x_7, carry, index]
STATE_WORDS = CMWC_LAG + 2
_CARRY = CMWC_LAG
_INDEX = CMWC_LAG + 1

_A = np.uint64(CMWC_MULTIPLIER)
_B = np.uint64(CMWC_BASE)
_BM1 = np.uint64(CMWC_BASE - 1)
_LAGMASK = np.uint64(CMWC_LAG - 1)
_ONE = np.uint64(1)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S32 = np.uint64(32)
_S5 = np.uint64(5)
_S6 = np.uint64(6)
_MASK64 = (1 << 64) - 1


@nb.njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@nb.njit(cache=True)
def _cmwc_init(state, seed, stream):
    x = seed ^ _mix64(stream + _GOLDEN)
    for i in range(CMWC_LAG):
        x += _GOLDEN
        state[i] = (_mix64(x) >> _S32) % _B
    x += _GOLDEN
    state[_CARRY] = _mix64(x) % _A
    # all-zero words with zero carry is a fixed point of the recurrence
    if state[_CARRY] == 0:
        state[_CARRY] = _ONE
    state[_INDEX] = _LAGMASK


@nb.njit(cache=True, inline="always")
def _cmwc_next(state):
    i = (state[_INDEX] + _ONE) & _LAGMASK
    state[_INDEX] = i
    t = _A * state[i] + state[_CARRY]
    c = t // _B
    x = _BM1 - (t - c * _B)
    state[_CARRY] = c
    state[i] = x
    return x


@nb.njit(cache=True)
def _splitmix_init(state, seed, stream):
    state[0] = seed ^ _mix64(stream + _GOLDEN)
    for i in range(1, STATE_WORDS):
        state[i] = 0


@nb.njit(cache=True, inline="always")
def _splitmix_next(state):
    state[0] += _GOLDEN
    return _mix64(state[0]) >> _S32


GENERATORS = {
    "cmwc": (_cmwc_init, _cmwc_next),
    "splitmix": (_splitmix_init, _splitmix_next),
}


def make_uniform(next_u32):
    """Build a 53-bit uniform sampler on top of a 32-bit step function."""

    @nb.njit(cache=False, inline="always")
    def uniform(state):
        hi = next_u32(state) >> _S5
        lo = next_u32(state) >> _S6
        return (np.float64(hi) * 67108864.0 + np.float64(lo)) * (1.0 / 9007199254740992.0)

    return uniform


_UNIFORMS = {name: make_uniform(fns[1]) for name, fns in GENERATORS.items()}


def _make_fill(uniform):
    @nb.njit(cache=False)
    def fill(state, out):
        for i in range(out.shape[0]):
            out[i] = uniform(state)

    return fill


def _make_fill_u32(next_u32):
    @nb.njit(cache=False)
    def fill(state, out):
        for i in range(out.shape[0]):
            out[i] = next_u32(state)

    return fill


_FILLS = {name: _make_fill(u) for name, u in _UNIFORMS.items()}
_FILLS_U32 = {name: _make_fill_u32(fns[1]) for name, fns in GENERATORS.items()}


def _as_u64(value: int) -> np.uint64:
    return np.uint64(int(value) & _MASK64)


@dataclass
class RngState:
    """Mutable generator state for one substream.

    A state is single-owner: hand it to one thread at a time.  Parallel work
    gets one state per worker via distinct ``stream_id`` values.
    """

    seed: int
    stream_id: int
    generator: str = "cmwc"
    words: np.ndarray = field(default=None, repr=False)

    @property
    def carry(self) -> int:
        return int(self.words[_CARRY])


def rng_init(seed: int, stream_id: int = 0, generator: str = "cmwc") -> RngState:
    """Create a fully initialised state for ``(seed, stream_id)``.

    Any 64-bit integers are accepted; negative values are taken modulo 2**64.
    """
    try:
        init, _ = GENERATORS[generator]
    except KeyError:
        raise ValueError(
            f"unknown generator {generator!r}; choose from {sorted(GENERATORS)}"
        ) from None
    words = np.zeros(STATE_WORDS, dtype=np.uint64)
    init(words, _as_u64(seed), _as_u64(stream_id))
    return RngState(int(seed), int(stream_id), generator, words)


def rng_uniform(state: RngState) -> float:
    """Advance ``state`` and return one uniform double in ``[0, 1)``."""
    out = np.empty(1, dtype=np.float64)
    _FILLS[state.generator](state.words, out)
    return float(out[0])


def rng_uniforms(state: RngState, size: int) -> np.ndarray:
    """Draw ``size`` uniforms in ``[0, 1)`` with 53 bits of precision."""
    out = np.empty(int(size), dtype=np.float64)
    _FILLS[state.generator](state.words, out)
    return out


def rng_u32(state: RngState, size: int) -> np.ndarray:
    """Draw ``size`` raw 32-bit outputs."""
    out = np.empty(int(size), dtype=np.uint64)
    _FILLS_U32[state.generator](state.words, out)
    return out
