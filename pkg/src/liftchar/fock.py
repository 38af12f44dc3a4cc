"""Words over ``{1..d}`` and the truncated full Fock space ``Gamma_N(C^d) (x) C^m``.

Words are plain tuples of ints.  Basis vectors ``e_alpha (x) v_k`` are laid out
word-major: the coordinate of ``(alpha, k)`` is ``index(alpha) * m + k`` with words
in length-lexicographic order, so each Fock level is a contiguous block.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .exceptions import InvalidConfigurationError

Word = tuple  # tuple[int, ...], letters in 1..d

EMPTY: Word = ()


def check_word(word, d: int) -> Word:
    word = tuple(int(a) for a in word)
    for a in word:
        if not 1 <= a <= d:
            raise InvalidConfigurationError(f"letter {a} outside 1..{d}")
    return word


def word_count(d: int, N: int) -> int:
    """Number of words of length at most ``N`` over ``d`` letters."""
    _check_sizes(d, N)
    if d == 1:
        return N + 1
    return (d ** (N + 1) - 1) // (d - 1)


def enumerate_words(d: int, N: int) -> list:
    """All words with ``|alpha| <= N`` in length-lexicographic order.

    >>> enumerate_words(2, 1)
    [(), (1,), (2,)]
    """
    _check_sizes(d, N)
    out = []
    for n in range(N + 1):
        out.extend(itertools.product(range(1, d + 1), repeat=n))
    return out


def _check_sizes(d, N):
    if int(d) != d or d < 1:
        raise InvalidConfigurationError(f"alphabet size must be >= 1, got {d}")
    if int(N) != N or N < 0:
        raise InvalidConfigurationError(f"maximum word length must be >= 0, got {N}")


@dataclass(frozen=True)
class TruncatedFockIndex:
    """Index of ``Gamma_N(C^d) (x) C^m`` with length-lex word order."""

    d: int
    N: int
    m: int = 1
    _words: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        _check_sizes(self.d, self.N)
        if int(self.m) != self.m or self.m < 0:
            raise InvalidConfigurationError(f"multiplicity must be >= 0, got {self.m}")
        object.__setattr__(self, "_words", tuple(enumerate_words(self.d, self.N)))

    @property
    def words(self) -> tuple:
        return self._words

    @property
    def count(self) -> int:
        return len(self._words)

    @property
    def dim(self) -> int:
        return self.count * self.m

    @cached_property
    def _position(self) -> dict:
        return {w: i for i, w in enumerate(self._words)}

    def index(self, word) -> int:
        try:
            return self._position[tuple(word)]
        except KeyError:
            raise InvalidConfigurationError(f"word {word} not in Gamma_{self.N}(C^{self.d})") from None

    def __contains__(self, word) -> bool:
        return tuple(word) in self._position

    def block(self, word) -> slice:
        """Coordinates of ``e_word (x) C^m``."""
        i = self.index(word)
        return slice(i * self.m, (i + 1) * self.m)

    def level_start(self, n: int) -> int:
        """Word index of the first word of length ``n`` (``count`` if ``n > N``)."""
        if n > self.N:
            return self.count
        return word_count(self.d, n - 1) if n > 0 else 0

    def level_slice(self, n: int) -> slice:
        """Coordinates of level ``n`` (tensored with ``C^m``)."""
        return slice(self.level_start(n) * self.m, self.level_start(n + 1) * self.m)

    def levels_mask(self, lo: int, hi: int) -> np.ndarray:
        """Boolean mask over coordinates of levels ``lo..hi`` inclusive."""
        mask = np.zeros(self.dim, dtype=bool)
        mask[self.level_start(lo) * self.m: self.level_start(hi + 1) * self.m] = True
        return mask

    def level_projection(self, lo: int, hi: int) -> np.ndarray:
        return np.diag(self.levels_mask(lo, hi).astype(complex))


def creation_matrix(i: int, idx: TruncatedFockIndex) -> np.ndarray:
    """Matrix of ``L_i (x) 1_m`` compressed to the truncated space.

    ``e_alpha (x) v`` goes to ``e_{i alpha} (x) v`` for ``|alpha| < N`` and to zero on
    the top level, so the matrix is exactly a partial isometry from levels
    ``0..N-1`` onto the words starting with ``i``.
    """
    if not 1 <= i <= idx.d:
        raise InvalidConfigurationError(f"letter {i} outside 1..{idx.d}")
    L = np.zeros((idx.dim, idx.dim), dtype=complex)
    eye = np.eye(idx.m)
    for w in idx.words:
        if len(w) >= idx.N:
            continue
        L[idx.block((i,) + w), idx.block(w)] = eye
    return L


def creation_matrices(idx: TruncatedFockIndex) -> list:
    return [creation_matrix(i, idx) for i in range(1, idx.d + 1)]
