"""Lower bounds on the dimension of a source of randomness.

A channel is epsilon-dephasing for a basis when its output is within
trace-norm epsilon of the pinched input for every state.  Two bounds pin
the minimal noise dimension m:

* classical mixtures of m unitaries map the maximally coherent state to a
  state of rank at most m, forcing m >= d (1 - epsilon/2);
* unitary dilations over an m-dimensional maximally mixed ancilla obey an
  entropy budget |S(output) - S(ancilla')| <= log2(m), forcing
  m >= d^{(1-eps)/2} eps^{eps/2} for small epsilon and m = sqrt(d) at
  epsilon = 0.

Both are met with equality (after integer rounding for the quantum case)
by the constructions in :mod:`dephaselab.dephaser`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dephaser import NoisyChannel, pinch
from .qcore import (
    PreconditionError,
    partial_trace,
    tensor,
    trace_norm,
    von_neumann_entropy,
)
from .sampling import random_pure_state, spawn_rngs
from .tolerances import TOL, Tolerances

#: Validity edge of the quantum bound's epsilon range.
EPSILON_MAX = 1.0 / (6.0 * math.e)


def maximally_coherent_state(d: int) -> np.ndarray:
    """|A><A| with |A> the flat superposition; its pinch is maximally mixed."""
    if d < 2:
        raise PreconditionError("need dimension >= 2")
    v = np.full(d, 1.0 / math.sqrt(d), dtype=complex)
    return np.outer(v, v.conj())


@dataclass(frozen=True)
class EpsilonDephasingReport:
    dim: int
    noise_dim: int
    kind: str                 # "classical" | "quantum"
    epsilon_measured: float   # worst case over the probe states

    def to_json_dict(self, bound: float | None = None) -> dict:
        out = {"d": self.dim, "m": self.noise_dim, "kind": self.kind,
               "epsilon_measured": self.epsilon_measured}
        if bound is not None:
            out["bound"] = bound
            out["satisfied"] = bool(self.noise_dim >= bound - 1e-9)
        return out


def default_probes(d: int, seed: int = 0, count: int = 20) -> list[np.ndarray]:
    """The maximally coherent state plus seeded Haar-random pure states."""
    probes = [maximally_coherent_state(d)]
    probes.extend(random_pure_state(d, rng) for rng in spawn_rngs(seed, count))
    return probes


def measure_epsilon(channel: NoisyChannel, basis: np.ndarray | None = None,
                    probes: list[np.ndarray] | None = None,
                    tol: Tolerances = TOL) -> EpsilonDephasingReport:
    """Worst-case trace-norm residual against the pinching over the probes."""
    if probes is None:
        probes = default_probes(channel.dim)
    eps = max(trace_norm(channel.apply(rho) - pinch(rho, basis)) for rho in probes)
    kind = "classical" if channel.kind == "classical-mixture" else "quantum"
    return EpsilonDephasingReport(dim=channel.dim, noise_dim=channel.noise_dim,
                                  kind=kind, epsilon_measured=eps)


def classical_lower_bound(d: int, epsilon: float) -> float:
    """max{2, d (1 - epsilon/2)} for 0 <= epsilon <= 2."""
    if not 0.0 <= epsilon <= 2.0:
        raise PreconditionError("epsilon must lie in [0, 2]")
    return max(2.0, d * (1.0 - epsilon / 2.0))


def quantum_lower_bound(d: int, epsilon: float) -> float:
    """max{2, d^{(1-eps)/2} eps^{eps/2}} for 0 < eps <= 1/(6e); eps = 0 is
    the limit sqrt(d).

    Evaluated in the log domain for numerical robustness.
    """
    if epsilon == 0.0:
        return max(2.0, math.sqrt(d))
    if not 0.0 < epsilon <= EPSILON_MAX:
        raise PreconditionError(
            f"epsilon must lie in (0, {EPSILON_MAX:.6f}] (or be exactly 0)")
    log_val = 0.5 * (1.0 - epsilon) * math.log(d) + 0.5 * epsilon * math.log(epsilon)
    return max(2.0, math.exp(log_val))


def operator_rank(a: np.ndarray, tol: Tolerances = TOL) -> int:
    """Singular values above ``tol.rank_rel_cutoff`` times the largest."""
    s = np.linalg.svd(np.asarray(a, dtype=complex), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol.rank_rel_cutoff * s[0]))


def rank_witness(channel: NoisyChannel, tol: Tolerances = TOL) -> tuple[int, int]:
    """(rank of the channel image of the coherent state, mixture size m).

    For a uniform mixture of m unitaries the image of a pure state is an
    average of m pure states, so its rank never exceeds m; a rank below d
    certifies that the mixture cannot dephase exactly.
    """
    if channel.kind != "classical-mixture":
        raise PreconditionError("rank witness applies to classical mixtures")
    image = channel.apply(maximally_coherent_state(channel.dim))
    return operator_rank(image, tol), channel.noise_dim


@dataclass(frozen=True)
class EntropyBudget:
    """Entropy bookkeeping for a dilation channel fed the coherent state.

    joint = S(U (|A><A| (x) I/m) U†) = log2 m exactly; the triangle
    inequality forces |output - ancilla| <= joint.  Equality of the gap
    with log2 m certifies that no smaller ancilla could have produced the
    same output entropy.
    """

    dim: int
    noise_dim: int
    joint_entropy: float
    output_entropy: float
    ancilla_entropy: float

    @property
    def gap(self) -> float:
        return abs(self.output_entropy - self.ancilla_entropy)

    def triangle_satisfied(self, slack: float = 1e-9) -> bool:
        return self.gap <= self.joint_entropy + slack

    def saturated(self, slack: float = 1e-9) -> bool:
        return abs(self.gap - self.joint_entropy) <= slack


def entropy_budget_check(channel: NoisyChannel, tol: Tolerances = TOL) -> EntropyBudget:
    """Evaluate every link of the entropy chain for a dilation channel."""
    if channel.kind != "quantum-dilation":
        raise PreconditionError("entropy budget applies to dilation channels")
    u, m = channel.dilation
    d = channel.dim
    rho = maximally_coherent_state(d)
    joint = u @ tensor(rho, np.eye(m, dtype=complex) / m) @ u.conj().T
    out_s = partial_trace(joint, (d, m), [0])
    out_r = partial_trace(joint, (d, m), [1])
    return EntropyBudget(
        dim=d,
        noise_dim=m,
        joint_entropy=von_neumann_entropy(joint, tol),
        output_entropy=von_neumann_entropy(out_s, tol),
        ancilla_entropy=von_neumann_entropy(out_r, tol),
    )
