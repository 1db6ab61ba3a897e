"""
Prime-length DFT via Bluestein's chirp-z reduction, with operation counting.

Convention: the forward transform is ``X[k] = sum_n x[n] e(-k n)`` and the
inverse is ``x[n] = (1/N) sum_k X[k] e(k n)``, where ``e(t) = exp(2 pi i t / N)``.

The length-N transform is rewritten as a linear convolution with the chirp
``exp(i pi j^2 / N)`` and evaluated with power-of-two FFTs of length
``M >= 2N - 1``. The power-of-two transforms are delegated to numpy.
"""

from __future__ import annotations

from collections import defaultdict
from functools import lru_cache
import math

import numpy as np


class OpCounter:
    """Tally of complex arithmetic operations, broken down by stage.

    A radix-2 FFT of length M is charged ``(3/2) M log2 M`` operations (one
    multiply and two adds per butterfly); pointwise products and sums are
    charged one operation per element.
    """

    def __init__(self):
        self.stages: dict[str, int] = defaultdict(int)

    def add(self, n: int, stage: str = "misc") -> None:
        self.stages[stage] += int(n)

    @property
    def total(self) -> int:
        return sum(self.stages.values())

    def __repr__(self) -> str:
        return f"OpCounter(total={self.total}, stages={dict(self.stages)})"


class _NullCounter(OpCounter):
    def add(self, n: int, stage: str = "misc") -> None:
        pass


NULL_COUNTER = _NullCounter()


def fft_pow2_cost(M: int) -> int:
    return (3 * M * int(math.log2(M))) // 2


def _pad_length(N: int) -> int:
    return 1 << (2 * N - 2).bit_length() if N > 1 else 1


@lru_cache(maxsize=64)
def _bluestein_tables(N: int) -> tuple[np.ndarray, np.ndarray, int]:
    M = _pad_length(N)
    n = np.arange(N, dtype=np.int64)
    # n^2 mod 2N keeps the phase argument small; exp(-i pi n^2/N) has period 2N in n^2
    q = np.exp(-1j * np.pi * ((n * n) % (2 * N)) / N)
    b = np.zeros(M, dtype=np.complex128)
    b[:N] = np.conj(q)
    if N > 1:
        b[M - N + 1:] = np.conj(q[1:])[::-1]
    B = np.fft.fft(b)
    q.setflags(write=False)
    B.setflags(write=False)
    return q, B, M


def dft(x, inverse: bool = False, counter: OpCounter | None = None) -> np.ndarray:
    """Exact length-N DFT of ``x`` in O(N log N) operations.

    Parameters
    ----------
    x : array_like
        Complex vector of length N (any N >= 1; prime N is the intended use).
    inverse : bool
        Compute the inverse transform, including the 1/N factor.
    counter : OpCounter, optional
        Receives the operation count under the ``"dft"`` stage.
    """
    counter = counter or NULL_COUNTER
    x = np.asarray(x, dtype=np.complex128)
    N = x.shape[0]
    if inverse:
        return np.conj(dft(np.conj(x), counter=counter)) / N
    q, B, M = _bluestein_tables(N)
    a = np.zeros(M, dtype=np.complex128)
    a[:N] = x * q
    conv = np.fft.ifft(np.fft.fft(a) * B)
    counter.add(2 * fft_pow2_cost(M) + M + 2 * N, "dft")
    return conv[:N] * q


def naive_dft(x, inverse: bool = False) -> np.ndarray:
    """O(N^2) reference transform with the same convention as :func:`dft`."""
    x = np.asarray(x, dtype=np.complex128)
    N = x.shape[0]
    n = np.arange(N)
    kn = np.outer(n, n) % N
    sign = 1 if inverse else -1
    W = np.exp(sign * 2j * np.pi * kn / N)
    out = W @ x
    return out / N if inverse else out
