"""Pinching and its minimal noisy implementations.

The central construction couples a d-dimensional system to a maximally mixed
ancilla of dimension ``m = ceil(sqrt(d))`` through the controlled unitary

    U = sum_i |a_i><a_i| (x) U_i ,

where ``{U_i}`` are the first d elements of a Weyl operator basis on the
ancilla.  Trace-orthonormality of the ``U_i`` makes the induced channel on
the system exactly the pinching map in the basis ``{|a_i>}``, while the
ancilla marginal is left exactly maximally mixed, so the same noise system
can be reused indefinitely.  The classical counterpart mixes the d clock
powers uniformly and needs ancilla dimension d.

Feeding the same coupling with an arbitrary ancilla state sigma gives a
"universal dephasing machine": a channel that keeps the diagonal fixed,
contracts toward the pinched state at rate ||sigma - I/m||_1, and never
decreases entropy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import weylops
from .qcore import (
    DimensionError,
    PreconditionError,
    ResourceLimitError,
    as_operator,
    check_density_matrix,
    check_orthonormal_basis,
    hermitize,
    majorizes_spectra,
    mutual_information,
    partial_trace,
    schur_horn_unitary,
    tensor,
    trace_norm,
    von_neumann_entropy,
)
from .tolerances import TOL, Tolerances


def ancilla_dim(d: int) -> int:
    """Smallest admissible quantum noise dimension, ceil(sqrt(d))."""
    return math.isqrt(d - 1) + 1 if d > 1 else 1


def pinch(rho: np.ndarray, basis: np.ndarray | None = None) -> np.ndarray:
    """Zero all off-diagonal elements of ``rho`` in the given basis.

    ``basis`` holds the basis vectors as columns; ``None`` means the
    computational basis.
    """
    rho = as_operator(rho)
    if basis is None:
        return np.diag(np.diagonal(rho)).astype(complex)
    b = check_orthonormal_basis(basis)
    if b.shape[0] != rho.shape[0]:
        raise DimensionError("basis and state dimensions differ")
    diag = np.einsum("ji,jk,ki->i", b.conj(), rho, b)
    return (b * diag) @ b.conj().T


@dataclass(frozen=True)
class NoisyChannel:
    """A channel presented as a unitary dilation over a maximally mixed
    ancilla, or as a uniform mixture of unitaries.

    Exactly one of ``dilation``/``mixture`` is set.  Both presentations are
    unital and trace preserving.
    """

    kind: str  # "quantum-dilation" | "classical-mixture"
    dim: int
    dilation: tuple[np.ndarray, int] | None = None  # (U on dim*m, m)
    mixture: tuple = field(default=None, repr=False)  # uniform unitaries

    def __post_init__(self):
        if self.kind == "quantum-dilation":
            u, m = self.dilation
            if u.shape[0] != self.dim * m:
                raise DimensionError("dilation unitary does not act on system x ancilla")
        elif self.kind == "classical-mixture":
            if not self.mixture:
                raise DimensionError("mixture channel needs at least one unitary")
            if any(u.shape[0] != self.dim for u in self.mixture):
                raise DimensionError("mixture unitaries must act on the system")
        else:
            raise ValueError(f"unknown channel kind {self.kind!r}")
        eye = np.eye(self.dim, dtype=complex) / self.dim
        if trace_norm(self.apply(eye) - eye) > TOL.dephasing_residual:
            raise PreconditionError("channel is not unital within tolerance")

    @property
    def noise_dim(self) -> int:
        """Dimension of the source of randomness consumed per use."""
        if self.kind == "quantum-dilation":
            return self.dilation[1]
        return len(self.mixture)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = as_operator(rho)
        if rho.shape[0] != self.dim:
            raise DimensionError("state dimension does not match the channel")
        if self.kind == "quantum-dilation":
            u, m = self.dilation
            joint = u @ tensor(rho, np.eye(m, dtype=complex) / m) @ u.conj().T
            return hermitize(partial_trace(joint, (self.dim, m), [0]))
        out = np.zeros_like(rho)
        for v in self.mixture:
            out += v @ rho @ v.conj().T
        return hermitize(out / len(self.mixture))


def apply_channel(channel: NoisyChannel, rho: np.ndarray) -> np.ndarray:
    return channel.apply(rho)


def controlled_basis_unitary(basis_vectors: np.ndarray,
                             ancilla_ops: list[np.ndarray]) -> np.ndarray:
    """sum_i |a_i><a_i| (x) V_i for basis columns a_i and unitaries V_i."""
    d = basis_vectors.shape[0]
    if len(ancilla_ops) != d:
        raise DimensionError("need one ancilla unitary per basis vector")
    m = ancilla_ops[0].shape[0]
    u = np.zeros((d * m, d * m), dtype=complex)
    for i in range(d):
        proj = np.outer(basis_vectors[:, i], basis_vectors[:, i].conj())
        u += tensor(proj, ancilla_ops[i])
    return u


def build_dephasing_unitary(d: int, basis: np.ndarray | None = None,
                            ancilla_ops: list[np.ndarray] | None = None,
                            tol: Tolerances = TOL) -> NoisyChannel:
    """Quantum-dilation channel that pinches exactly in ``basis``.

    Uses the first d Weyl operators on an ancilla of dimension
    ``ceil(sqrt(d))``; any user-supplied trace-orthonormal family of d
    unitaries may be passed instead through ``ancilla_ops``.
    """
    if d < 2:
        raise PreconditionError("dephasing needs system dimension >= 2")
    b = computational_or(basis, d)
    if ancilla_ops is None:
        m = ancilla_dim(d)
        ancilla_ops = list(weylops.weyl_basis(m).ops[:d])
    else:
        m = ancilla_ops[0].shape[0]
        stack = np.stack([op.ravel() for op in ancilla_ops])
        gram = (stack @ stack.conj().T) / m
        if np.max(np.abs(gram - np.eye(len(ancilla_ops)))) > tol.basis_gram:
            raise PreconditionError("ancilla unitaries must be trace-orthonormal")
    u = controlled_basis_unitary(b, ancilla_ops)
    return NoisyChannel(kind="quantum-dilation", dim=d, dilation=(u, m))


def classical_dephasing_channel(d: int) -> NoisyChannel:
    """Uniform mixture of the d clock powers; pinches the computational basis."""
    if d < 2:
        raise PreconditionError("dephasing needs system dimension >= 2")
    z = weylops.clock_z(d)
    powers = tuple(np.linalg.matrix_power(z, j + 1) for j in range(d))
    return NoisyChannel(kind="classical-mixture", dim=d, mixture=powers)


def computational_or(basis: np.ndarray | None, d: int) -> np.ndarray:
    if basis is None:
        return np.eye(d, dtype=complex)
    b = check_orthonormal_basis(basis)
    if b.shape[0] != d:
        raise DimensionError("basis dimension mismatch")
    return b


# ---------------------------------------------------------------------------
# State transitions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TransitionPlan:
    """pre-unitary, dephasing channel, post-unitary realizing rho -> rho'."""

    pre_unitary: np.ndarray
    channel: NoisyChannel
    post_unitary: np.ndarray

    def apply(self, rho: np.ndarray) -> np.ndarray:
        staged = self.pre_unitary @ as_operator(rho) @ self.pre_unitary.conj().T
        mixed = self.channel.apply(staged)
        return hermitize(self.post_unitary @ mixed @ self.post_unitary.conj().T)

    @property
    def noise_dim(self) -> int:
        return self.channel.noise_dim


def _eigh_descending(rho: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    evals, evecs = np.linalg.eigh(hermitize(rho))
    order = np.argsort(evals, kind="stable")[::-1]
    return evals[order], evecs[:, order]


def transition_channel(rho: np.ndarray, rho_prime: np.ndarray,
                       mode: str = "quantum", tol: Tolerances = TOL) -> TransitionPlan:
    """Compose rotate -> pinch -> rotate so the map sends rho to rho'.

    Requires the spectrum of rho to majorize that of rho'.  The pinching
    stage is the quantum construction (noise dimension ceil(sqrt(d))) or the
    classical clock mixture (noise dimension d).
    """
    rho = check_density_matrix(rho, tol)
    rho_prime = check_density_matrix(rho_prime, tol)
    if rho.shape != rho_prime.shape:
        raise DimensionError("states must share one dimension")
    if mode not in ("quantum", "classical"):
        raise ValueError(f"unknown mode {mode!r}")
    lam, w = _eigh_descending(rho)
    mu, w_prime = _eigh_descending(rho_prime)
    if not majorizes_spectra(lam, mu, tol):
        raise PreconditionError("transition requires the source to majorize the target")
    d = rho.shape[0]
    v = schur_horn_unitary(lam, mu, tol)
    pre = v @ w.conj().T          # rotate to eigenbasis, then spread the target diagonal
    channel = (build_dephasing_unitary(d, tol=tol) if mode == "quantum"
               else classical_dephasing_channel(d))
    post = w_prime                # diagonal -> eigenbasis of the target
    return TransitionPlan(pre_unitary=pre, channel=channel, post_unitary=post)


# ---------------------------------------------------------------------------
# Catalytic reuse across many systems
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChainReport:
    """Marginal residuals and cross correlations after a dephasing chain."""

    marginal_residuals: tuple[float, ...]   # ||marginal_i - pinch(rho_i)||_1
    catalyst_residual: float                # ||ancilla marginal - I/m||_1
    mutual_information: np.ndarray          # pairwise, bits, zeros on diagonal


def catalytic_chain(states: list[np.ndarray],
                    bases: list[np.ndarray] | None = None,
                    tol: Tolerances = TOL) -> tuple[np.ndarray, ChainReport]:
    """Dephase N uncorrelated systems with one shared noise ancilla.

    The ancilla dimension is set by the largest system.  Each local marginal
    of the joint output equals its pinched input and the ancilla marginal is
    exactly maximally mixed; the price of reuse shows up as nonzero mutual
    information between the dephased systems.
    """
    if not states:
        raise PreconditionError("chain needs at least one system")
    states = [check_density_matrix(s, tol) for s in states]
    dims = [s.shape[0] for s in states]
    if bases is None:
        bases = [None] * len(states)
    if len(bases) != len(states):
        raise DimensionError("one basis per system required")
    m = ancilla_dim(max(dims))
    joint_dim = math.prod(dims) * m
    if joint_dim > tol.dim_cap:
        raise ResourceLimitError(f"chain dimension {joint_dim} exceeds cap {tol.dim_cap}")

    weyl_ops = weylops.weyl_basis(m).ops
    joint = tensor(*states, np.eye(m, dtype=complex) / m)
    layout = tuple(dims) + (m,)
    n = len(states)
    for i, (d_i, basis) in enumerate(zip(dims, bases)):
        b = computational_or(basis, d_i)
        u_i = controlled_basis_unitary(b, list(weyl_ops[:d_i]))
        full = _embed_pair(u_i, layout, i, n)
        joint = full @ joint @ full.conj().T
    joint = hermitize(joint)

    residuals = []
    for i, (s, basis) in enumerate(zip(states, bases)):
        marg = partial_trace(joint, layout, [i])
        residuals.append(trace_norm(marg - pinch(s, basis)))
    catalyst = partial_trace(joint, layout, [n])
    cat_res = trace_norm(catalyst - np.eye(m) / m)
    mi = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            mi[i, j] = mi[j, i] = mutual_information(joint, layout, i, j, tol)
    return joint, ChainReport(tuple(residuals), cat_res, mi)


def _embed_pair(u: np.ndarray, layout: tuple[int, ...], sys_idx: int,
                ancilla_idx: int) -> np.ndarray:
    """Embed a unitary on (factor sys_idx, factor ancilla_idx) into the joint
    space, identity elsewhere."""
    n = len(layout)
    rest = [k for k in range(n) if k not in (sys_idx, ancilla_idx)]
    rest_dim = math.prod(layout[k] for k in rest) if rest else 1
    big = np.kron(u, np.eye(rest_dim, dtype=complex))
    # big acts on factor ordering (sys, ancilla, rest...); permute the tensor
    # axes back into layout order.
    src_order = [sys_idx, ancilla_idx] + rest
    perm = list(np.argsort(src_order))
    dims_src = [layout[k] for k in src_order]
    tens = big.reshape(dims_src + dims_src)
    tens = np.transpose(tens, perm + [p + n for p in perm])
    full_dim = math.prod(layout)
    return tens.reshape(full_dim, full_dim)


# ---------------------------------------------------------------------------
# Universal dephasing machine
# ---------------------------------------------------------------------------

def machine_step(rho: np.ndarray, sigma: np.ndarray,
                 tol: Tolerances = TOL) -> tuple[np.ndarray, np.ndarray]:
    """One pass of the dephasing coupling with arbitrary ancilla fuel.

    Returns the system output (diagonal preserved, moved toward its pinch)
    and the ancilla waste (moved toward maximally mixed).
    """
    rho = check_density_matrix(rho, tol)
    sigma = check_density_matrix(sigma, tol)
    d, m = rho.shape[0], sigma.shape[0]
    if m != ancilla_dim(d):
        raise DimensionError(f"ancilla must have dimension {ancilla_dim(d)} for d={d}")
    u = build_dephasing_unitary(d, tol=tol).dilation[0]
    joint = u @ tensor(rho, sigma) @ u.conj().T
    rho_out = hermitize(partial_trace(joint, (d, m), [0]))
    sigma_out = hermitize(partial_trace(joint, (d, m), [1]))
    return rho_out, sigma_out


@dataclass(frozen=True)
class MachineRow:
    n: int
    dist_system: float       # ||rho_n - pinch(rho_0)||_1
    dist_ancilla: float      # ||sigma_n - I/m||_1 under repeated mixing
    entropy: float           # S(rho_n), bits
    bound_system: float      # prod_i ||sigma_i - I/m||_1
    bound_ancilla: float     # ||rho_0 - I/d||_1 ^ n


@dataclass(frozen=True)
class MachineReport:
    dim: int
    noise_dim: int
    rows: tuple[MachineRow, ...]

    CSV_HEADER = "n,dist_system,dist_ancilla,entropy,bound"

    def csv_rows(self) -> list[str]:
        """Serialized rows; ``bound`` is the system-track product bound."""
        return [f"{r.n},{r.dist_system:.16e},{r.dist_ancilla:.16e},"
                f"{r.entropy:.16e},{r.bound_system:.16e}" for r in self.rows]


def machine_iterate(rho: np.ndarray, sigma_stream: list[np.ndarray],
                    tol: Tolerances = TOL) -> MachineReport:
    """Run the machine down a stream of fuel states and track both tracks.

    System track: rho_n = D_{sigma_n}(rho_{n-1}); its distance to the pinched
    input contracts at least geometrically with the product of the fuel
    imperfections.  Mixing track: the first fuel state is itself pushed
    through the machine with a fresh copy of ``rho`` each round, converging
    to maximally mixed whenever ||rho - I/d||_1 < 1 (the product bound for
    this track assumes a perfect-square system dimension, where the full
    operator basis twirl is exactly depolarizing).
    """
    rho = check_density_matrix(rho, tol)
    if not sigma_stream:
        raise PreconditionError("need at least one fuel state")
    d = rho.shape[0]
    m = ancilla_dim(d)
    u = build_dephasing_unitary(d, tol=tol).dilation[0]
    eye_m = np.eye(m, dtype=complex) / m
    eye_d = np.eye(d, dtype=complex) / d
    target = pinch(rho)
    rho_mix_dist = trace_norm(rho - eye_d)

    def couple(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return u @ tensor(a, b) @ u.conj().T

    rows = []
    rho_n = rho
    sigma_n = check_density_matrix(sigma_stream[0], tol)
    bound_sys = 1.0
    for n, sigma in enumerate(sigma_stream, start=1):
        sigma = check_density_matrix(sigma, tol)
        if sigma.shape[0] != m:
            raise DimensionError(f"fuel states must have dimension {m}")
        rho_n = hermitize(partial_trace(couple(rho_n, sigma), (d, m), [0]))
        sigma_n = hermitize(partial_trace(couple(rho, sigma_n), (d, m), [1]))
        bound_sys *= trace_norm(sigma - eye_m)
        rows.append(MachineRow(
            n=n,
            dist_system=trace_norm(rho_n - target),
            dist_ancilla=trace_norm(sigma_n - eye_m),
            entropy=von_neumann_entropy(rho_n, tol),
            bound_system=bound_sys,
            bound_ancilla=rho_mix_dist ** n,
        ))
    return MachineReport(dim=d, noise_dim=m, rows=tuple(rows))


# ---------------------------------------------------------------------------
# Decoherence and measurement with the smallest environment
# ---------------------------------------------------------------------------

def decoherence_unitary(d: int, basis: np.ndarray | None = None,
                        tol: Tolerances = TOL) -> np.ndarray:
    """Joint unitary on system x E1 x E2 for the purified environment picture.

    The environment starts in a maximally entangled pair across E1/E2 (each
    of dimension ceil(sqrt(d))); only E1 couples to the system.  Tracing out
    the whole environment pinches any input state exactly.
    """
    m = ancilla_dim(d)
    if d * m * m > tol.dim_cap:
        raise ResourceLimitError("purified environment exceeds the dimension cap")
    b = computational_or(basis, d)
    ops = list(weylops.weyl_basis(m).ops[:d])
    u_se1 = controlled_basis_unitary(b, ops)
    return tensor(u_se1, np.eye(m, dtype=complex))


def entangled_pair_state(m: int) -> np.ndarray:
    """Maximally entangled vector on two m-dimensional factors."""
    v = np.eye(m, dtype=complex).ravel() / math.sqrt(m)
    return v


def decohere_pure_state(psi: np.ndarray, basis: np.ndarray | None = None,
                        tol: Tolerances = TOL) -> tuple[np.ndarray, np.ndarray]:
    """Run the purified decoherence process on a state vector.

    Returns (reduced system state, reduced E1 state).
    """
    psi = np.asarray(psi, dtype=complex)
    d = psi.size
    m = ancilla_dim(d)
    u = decoherence_unitary(d, basis, tol)
    joint_vec = u @ np.kron(psi, entangled_pair_state(m))
    joint = np.outer(joint_vec, joint_vec.conj())
    layout = (d, m, m)
    system = hermitize(partial_trace(joint, layout, [0]))
    env_active = hermitize(partial_trace(joint, layout, [1]))
    return system, env_active


def measurement_process(psi: np.ndarray, tol: Tolerances = TOL) -> np.ndarray:
    """Projective measurement as a closed process on system x pointer.

    The device is a d-dimensional pointer plus a maximally entangled pair
    R1/R2 of local dimension ceil(sqrt(d)); the system-pointer output is
    sum_i p_i |i, P_i><i, P_i| with Born weights p_i = |<i|psi>|^2 and
    pointer states P_i = |i>.
    """
    psi = np.asarray(psi, dtype=complex)
    d = psi.size
    if d < 2:
        raise PreconditionError("measurement needs dimension >= 2")
    m = ancilla_dim(d)
    if d * d * m * m > tol.dim_cap:
        raise ResourceLimitError("measurement register exceeds the dimension cap")
    x = weylops.shift_x(d)
    pointer_gates = [np.linalg.matrix_power(x, i) for i in range(d)]
    ops = list(weylops.weyl_basis(m).ops[:d])
    w = np.zeros((d * d * m * m, d * d * m * m), dtype=complex)
    for i in range(d):
        proj = np.zeros((d, d), dtype=complex)
        proj[i, i] = 1.0
        w += tensor(proj, pointer_gates[i], ops[i], np.eye(m, dtype=complex))
    pointer0 = np.zeros(d, dtype=complex)
    pointer0[0] = 1.0
    vec = w @ np.kron(np.kron(psi, pointer0), entangled_pair_state(m))
    joint = np.outer(vec, vec.conj())
    return hermitize(partial_trace(joint, (d, d, m, m), [0, 1]))
