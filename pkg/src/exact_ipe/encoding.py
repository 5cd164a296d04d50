"""Fourier-feature vector layout shared by every encoder."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

AXES = ("x", "y", "z")


def check_octaves(L) -> int:
    if isinstance(L, bool) or int(L) != L or int(L) < 1:
        raise InvalidInputError(f"L must be a positive integer, got {L!r}")
    return int(L)


@dataclass(frozen=True)
class EncodingVector:
    """``6 * L`` sinusoid features of one region.

    ``values[3*l + k]`` is the sine feature of axis ``k`` at frequency
    ``2**l`` and ``values[3*L + 3*l + k]`` the matching cosine feature.
    """

    values: np.ndarray
    L: int

    def __post_init__(self):
        L = check_octaves(self.L)
        values = np.array(self.values)
        if values.shape != (6 * L,):
            raise InvalidInputError(f"expected {6 * L} values, got shape {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "L", L)

    @classmethod
    def from_blocks(cls, sin, cos) -> "EncodingVector":
        sin = np.asarray(sin)
        return cls(np.concatenate([sin.ravel(), np.asarray(cos).ravel()]), sin.shape[0])

    @property
    def sin(self) -> np.ndarray:
        """Sine block, shape (L, 3)."""
        return self.values[: 3 * self.L].reshape(self.L, 3)

    @property
    def cos(self) -> np.ndarray:
        """Cosine block, shape (L, 3)."""
        return self.values[3 * self.L :].reshape(self.L, 3)

    def __len__(self):
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def rows(self):
        """Yield ``(l, axis, func, value)`` in layout order."""
        for func, block in (("sin", self.sin), ("cos", self.cos)):
            for l in range(self.L):
                for k in range(3):
                    yield l, AXES[k], func, float(block[l, k])


def split_blocks(values, L: int) -> tuple[np.ndarray, np.ndarray]:
    """Views of the sine and cosine blocks of (..., 6L) arrays as (..., L, 3)."""
    values = np.asarray(values)
    head = values.shape[:-1]
    return (
        values[..., : 3 * L].reshape(head + (L, 3)),
        values[..., 3 * L :].reshape(head + (L, 3)),
    )


def join_blocks(sin, cos) -> np.ndarray:
    """Inverse of :func:`split_blocks`."""
    sin = np.asarray(sin)
    cos = np.asarray(cos)
    head = sin.shape[:-2]
    return np.concatenate([sin.reshape(head + (-1,)), cos.reshape(head + (-1,))], axis=-1)
