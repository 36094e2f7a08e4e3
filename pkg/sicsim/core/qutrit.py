"""
Linear algebra for a single qutrit: pure states, projectors, and the two
transition rotations that carry every Yu-Oh ray onto the detection axis |0>.

Everything here is a pure function over immutable values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Tuple, Union

import numpy as np

from sicsim.utils.errors import ImpossibleOutcomeError

DIM = 3
NORM_TOL = 1e-12
# Branch probabilities below this are treated as exactly zero.
ZERO_PROBABILITY = 1e-14

BRIGHT = -1
DARK = +1


class RayLike(Protocol):
    label: str

    @property
    def unit(self) -> np.ndarray: ...

    @property
    def angles(self) -> Tuple[float, float, float, float]: ...


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex)
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class QutritState:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen(self.amplitudes)
        if amps.shape != (DIM,):
            raise ValueError(f"QutritState needs 3 amplitudes, got shape {amps.shape}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"QutritState amplitudes must be normalized (norm={norm!r})")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_vector(cls, vector) -> "QutritState":
        v = np.asarray(vector, dtype=complex)
        norm = np.linalg.norm(v)
        if norm == 0:
            raise ValueError("Cannot build a state from the zero vector")
        return cls(v / norm)

    @classmethod
    def basis(cls, k: int) -> "QutritState":
        v = np.zeros(DIM, dtype=complex)
        v[k] = 1.0
        return cls(v)

    def aligned(self) -> "QutritState":
        """Global phase fixed so that the largest-magnitude amplitude is real and positive."""
        k = int(np.argmax(np.abs(self.amplitudes)))
        phase = self.amplitudes[k] / abs(self.amplitudes[k])
        return QutritState(self.amplitudes / phase)

    def max_imaginary_part(self) -> float:
        return float(np.max(np.abs(self.aligned().amplitudes.imag)))

    def overlap(self, other: "QutritState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def same_ray(self, other: "QutritState", tol: float = 1e-10) -> bool:
        return abs(abs(self.overlap(other)) - 1.0) < tol

    def __repr__(self) -> str:
        return f"QutritState({np.array2string(self.aligned().amplitudes, precision=6)})"


@dataclass(frozen=True, eq=False)
class Unitary3:
    entries: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "entries", _frozen(self.entries))

    @property
    def dagger(self) -> "Unitary3":
        return Unitary3(self.entries.conj().T)

    def __matmul__(self, other):
        if isinstance(other, Unitary3):
            return Unitary3(self.entries @ other.entries)
        if isinstance(other, QutritState):
            return QutritState.from_vector(self.entries @ other.amplitudes)
        return self.entries @ other

    def is_unitary(self, tol: float = NORM_TOL) -> bool:
        return bool(np.allclose(self.entries.conj().T @ self.entries, np.eye(DIM), atol=tol, rtol=0))


@dataclass(frozen=True, eq=False)
class Projector3:
    entries: np.ndarray
    rank: int

    def __post_init__(self):
        object.__setattr__(self, "entries", _frozen(self.entries))

    def is_valid(self, tol: float = NORM_TOL) -> bool:
        p = self.entries
        idempotent = np.allclose(p @ p, p, atol=tol, rtol=0)
        hermitian = np.allclose(p, p.conj().T, atol=tol, rtol=0)
        trace_ok = abs(np.trace(p) - self.rank) < tol
        return bool(idempotent and hermitian and trace_ok)


def _rotation(theta: float, phi: float, k: int) -> Unitary3:
    c = np.cos(theta / 2)
    s = np.sin(theta / 2)
    m = np.eye(DIM, dtype=complex)
    m[0, 0] = c
    m[k, k] = c
    m[0, k] = -1j * np.exp(-1j * phi) * s
    m[k, 0] = -1j * np.exp(1j * phi) * s
    return Unitary3(m)


def rotation_r1(theta: float, phi: float) -> Unitary3:
    """Rotation on the |0>,|1> transition; identity on |2>."""
    return _rotation(theta, phi, 1)


def rotation_r2(theta: float, phi: float) -> Unitary3:
    """Rotation on the |0>,|2> transition; identity on |1>."""
    return _rotation(theta, phi, 2)


def _resolve_ray(ray: Union[RayLike, int, str]) -> RayLike:
    if isinstance(ray, (int, np.integer, str)):
        from sicsim.core.yuoh import get_ray
        return get_ray(ray)
    return ray


def compose_uv(
    ray: Union[RayLike, int, str],
    theta_offsets: Tuple[float, float] = (0.0, 0.0),
) -> Unitary3:
    """U_v = R2 R1 for the ray's tabulated angles, carrying v onto |0> up to phase.

    `theta_offsets` perturb the two theta angles of pulses that are actually
    applied; a tabulated theta of 0 means no pulse and is never perturbed.
    """
    ray = _resolve_ray(ray)
    theta1, phi1, theta2, phi2 = ray.angles
    d1, d2 = theta_offsets
    if theta1 != 0.0:
        theta1 += d1
    if theta2 != 0.0:
        theta2 += d2
    return rotation_r2(theta2, phi2) @ rotation_r1(theta1, phi1)


def projector(ray: Union[RayLike, int, str], rank: int = 1) -> Projector3:
    ray = _resolve_ray(ray)
    v = np.asarray(ray.unit, dtype=complex)
    p = np.outer(v, v.conj())
    if rank == 1:
        return Projector3(p, 1)
    if rank == 2:
        return Projector3(np.eye(DIM) - p, 2)
    raise ValueError(f"Projector rank must be 1 or 2, got {rank}")


def observable(ray: Union[RayLike, int, str]) -> np.ndarray:
    """A_v = I - 2 P_v."""
    return np.eye(DIM) - 2 * projector(ray).entries


def born_probability(state: QutritState, ray: Union[RayLike, int, str]) -> float:
    ray = _resolve_ray(ray)
    amp = np.vdot(np.asarray(ray.unit, dtype=complex), state.amplitudes)
    return float(min(1.0, abs(amp) ** 2))


def collapse(state: QutritState, ray: Union[RayLike, int, str], outcome: int) -> QutritState:
    """Post-measurement state: the ray itself for outcome -1, the normalized
    projection onto the orthogonal plane for outcome +1."""
    ray = _resolve_ray(ray)
    p_bright = born_probability(state, ray)
    v = np.asarray(ray.unit, dtype=complex)
    if outcome == BRIGHT:
        if p_bright < ZERO_PROBABILITY:
            raise ImpossibleOutcomeError(ray.label, outcome, p_bright)
        return QutritState(v)
    if outcome == DARK:
        p_dark = 1.0 - p_bright
        if p_dark < ZERO_PROBABILITY:
            raise ImpossibleOutcomeError(ray.label, outcome, p_dark)
        rest = state.amplitudes - np.vdot(v, state.amplitudes) * v
        return QutritState.from_vector(rest)
    raise ValueError(f"Outcome must be +1 or -1, got {outcome!r}")
