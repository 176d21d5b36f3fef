"""Stationary-state interference sums and their large-x decay.

A stationary state here is block diagonal: blocks are labeled by an index
and a frequency, and inside each block a family of plane-wave modes with
momentum labels m is mixed by an isometry U (rows are orthonormal:
U U^dagger = 1). The diagonal basis of the block carries classical-looking
weights rho_p >= 0 summing to one across the whole state.

For two sources separated by s along x, the cross (interference) term of
the position density at x is

    p_int(x) = sum_blocks sum_p 2 rho_p Re[ psi_p(x - s/2) psi_p(x + s/2)* ]
    psi_p(u) = sum_m U[p, m] exp(-i m_x u / hbar)

which is the pairwise double sum over (m, m') folded into two inner
products. Dense, smoothly weighted momentum sets drive p_int to zero as x
grows (a Riemann-Lebesgue sum); sparse sets produce almost periodic
patterns that never decay. rl_decay_scan measures which side a state is
on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericsError

_UNITARITY_ATOL = 1e-12


@dataclass
class BlockModes:
    """Momentum labels of one block: index, frequency, (n_m, 2) array."""

    index: int
    omega: float
    ms: np.ndarray

    def __post_init__(self):
        self.ms = np.atleast_2d(np.asarray(self.ms, dtype=float))
        if self.ms.ndim != 2 or self.ms.shape[1] != 2:
            raise ConfigError(
                f"block {self.index}: mode array must be (n, 2), "
                f"got {self.ms.shape}")
        uniq = {(float(a), float(b)) for a, b in self.ms}
        if len(uniq) != self.ms.shape[0]:
            raise ConfigError(
                f"block {self.index}: duplicate momentum labels")


@dataclass
class EquilibriumState:
    """Validated block-diagonal stationary state.

    blocks[i] carries (modes, isometry, weights). renormalized flags that
    the supplied weights did not sum to one and were scaled; the original
    total is kept for reporting.
    """

    blocks: list = field(default_factory=list)
    renormalized: bool = False
    original_trace: float = 1.0

    @property
    def n_modes(self) -> int:
        return sum(b[0].ms.shape[0] for b in self.blocks)


def build_equilibrium(modes, weights, unitaries) -> EquilibriumState:
    """Assemble and validate a stationary state.

    modes:     list of BlockModes
    weights:   list of 1-D nonnegative arrays, one per block (length n_p)
    unitaries: list of (n_p, n_m) complex arrays with orthonormal rows

    Weights are normalized to unit total; a total off by more than 1e-12
    sets the renormalized flag rather than failing, since an overall scale
    is harmless but worth reporting.
    """
    if not (len(modes) == len(weights) == len(unitaries)):
        raise ConfigError(
            f"block count mismatch: {len(modes)} mode sets, "
            f"{len(weights)} weight sets, {len(unitaries)} isometries")
    if not modes:
        raise ConfigError("state needs at least one block")
    keys = set()
    blocks = []
    total = 0.0
    for bm, w, U in zip(modes, weights, unitaries):
        if not isinstance(bm, BlockModes):
            bm = BlockModes(*bm)
        key = (bm.index, float(bm.omega))
        if key in keys:
            raise ConfigError(f"duplicate block key {key}")
        keys.add(key)
        U = np.atleast_2d(np.asarray(U, dtype=np.complex128))
        n_m = bm.ms.shape[0]
        if U.shape[1] != n_m:
            raise ConfigError(
                f"block {bm.index}: isometry has {U.shape[1]} columns "
                f"for {n_m} modes")
        if U.shape[0] > n_m:
            raise ConfigError(
                f"block {bm.index}: more diagonal labels ({U.shape[0]}) "
                f"than modes ({n_m})")
        gram = U @ U.conj().T
        if not np.allclose(gram, np.eye(U.shape[0]), atol=_UNITARITY_ATOL):
            off = float(np.max(np.abs(gram - np.eye(U.shape[0]))))
            raise ConfigError(
                f"block {bm.index}: rows are not orthonormal "
                f"(deviation {off:.3e})")
        w = np.asarray(w, dtype=float).ravel()
        if w.shape[0] != U.shape[0]:
            raise ConfigError(
                f"block {bm.index}: {w.shape[0]} weights for "
                f"{U.shape[0]} diagonal labels")
        if np.any(w < 0.0) or not np.all(np.isfinite(w)):
            raise ConfigError(f"block {bm.index}: weights must be >= 0")
        total += float(w.sum())
        blocks.append((bm, U, w))
    if total <= 0.0:
        raise ConfigError("weights sum to zero; the state is empty")
    renorm = abs(total - 1.0) > 1e-12
    state = EquilibriumState(renormalized=renorm, original_trace=total)
    for bm, U, w in blocks:
        state.blocks.append((bm, U, w / total))
    return state


def m_basis_matrix(state: EquilibriumState):
    """Per-block density matrices in the momentum basis.

    rho_mm' = sum_p rho_p U[p, m] conj(U[p, m']); Hermitian by
    construction, traces summing to one across blocks.
    """
    out = []
    for bm, U, w in state.blocks:
        out.append(np.einsum("p,pm,pn->mn", w, U, U.conj()))
    return out


def pint_pattern(state: EquilibriumState, xs, s: float,
                 hbar: float = 1.0) -> np.ndarray:
    """Interference term of the two-source density at abscissas xs."""
    if hbar <= 0.0:
        raise ConfigError(f"hbar must be positive, got {hbar}")
    xs = np.asarray(xs, dtype=float).ravel()
    out = np.zeros(xs.shape[0])
    u_minus = xs - 0.5 * s
    u_plus = xs + 0.5 * s
    for bm, U, w in state.blocks:
        mx = bm.ms[:, 0]
        ph_minus = np.exp(-1j * np.outer(u_minus, mx) / hbar)
        ph_plus = np.exp(-1j * np.outer(u_plus, mx) / hbar)
        amp_minus = ph_minus @ U.T            # (n_x, n_p)
        amp_plus = ph_plus @ U.T
        out += 2.0 * np.einsum(
            "p,xp->x", w, (amp_minus * amp_plus.conj()).real)
    return out


@dataclass
class RLScan:
    centers: np.ndarray
    envelope: np.ndarray
    e0: float
    decays: bool
    threshold: float


def rl_decay_scan(state: EquilibriumState, s: float, x_max: float,
                  n_points: int, hbar: float = 1.0,
                  threshold: float = 1e-3,
                  samples_per_window: int = 33) -> RLScan:
    """Envelope of |p_int| on geometrically spaced |x| windows.

    The span [x_max / 1000, x_max] is cut into n_points geometric windows;
    the envelope value of a window is the max of |p_int| over it, reported
    at the window's left edge (so a monotone decaying interference term
    reports its pointwise values). The reference e0 is the peak near
    x = 0. The state DECAYS when the last envelope value falls below
    threshold * e0, otherwise it PERSISTS.
    """
    if n_points < 10:
        raise ConfigError(f"need >= 10 scan points, got {n_points}")
    if not (x_max > 0.0) or not math.isfinite(x_max):
        raise ConfigError(f"x_max must be positive and finite, got {x_max}")
    edges = np.geomspace(x_max / 10.0 ** 3, x_max, n_points + 1)
    centers = edges[:-1]
    env = np.empty(n_points)
    for i in range(n_points):
        win = np.linspace(edges[i], edges[i + 1], samples_per_window)
        env[i] = float(np.max(np.abs(pint_pattern(state, win, s, hbar))))
    near0 = np.linspace(0.0, edges[0], 2 * samples_per_window)
    e0 = float(np.max(np.abs(pint_pattern(state, near0, s, hbar))))
    if e0 <= 0.0:
        raise NumericsError("interference term vanishes identically at x = 0")
    return RLScan(centers=centers, envelope=env, e0=e0,
                  decays=bool(env[-1] < threshold * e0), threshold=threshold)


# ---------------------------------------------------------------------------
# state generators


def two_mode_state(m0: float, hbar: float = 1.0) -> EquilibriumState:
    """Single block, modes +-m0 along x, one equal-amplitude diagonal label.

    Hand expansion of the interference sum for this state gives
    p_int(x) = 2 cos(m0 s / hbar) + 2 cos(2 m0 x / hbar).
    """
    if m0 == 0.0:
        raise ConfigError("m0 must be nonzero")
    modes = [BlockModes(index=0, omega=0.0,
                        ms=np.array([[+m0, 0.0], [-m0, 0.0]]))]
    U = [np.array([[1.0, 1.0]]) / math.sqrt(2.0)]
    return build_equilibrium(modes, [np.array([1.0])], U)


def single_mode_state(m0: float) -> EquilibriumState:
    """Degenerate one-mode state; its p_int is constant when s = 0."""
    modes = [BlockModes(index=0, omega=0.0, ms=np.array([[m0, 0.0]]))]
    return build_equilibrium(modes, [np.array([1.0])],
                             [np.array([[1.0]])])


def sparse_state(m0: float, n_modes: int = 4) -> EquilibriumState:
    """Few isolated momenta with uniform amplitudes: never decays."""
    if n_modes < 2 or n_modes % 2:
        raise ConfigError("sparse state wants an even n_modes >= 2")
    half = n_modes // 2
    mx = np.concatenate([(2 * k + 1) * m0 * np.array([1.0, -1.0])
                         for k in range(half)])
    ms = np.column_stack([mx, np.zeros_like(mx)])
    U = np.full((1, n_modes), 1.0 / math.sqrt(n_modes))
    modes = [BlockModes(index=0, omega=0.0, ms=ms)]
    return build_equilibrium(modes, [np.array([1.0])], [U])


def dense_gaussian_state(sigma_m: float, n_x: int = 100, n_y: int = 10,
                         span: float = 5.0, hbar: float = 1.0
                         ) -> EquilibriumState:
    """Dense momentum lattice with a Gaussian amplitude profile.

    n_x * n_y modes on a uniform grid covering +-span widths of the
    amplitude Gaussian (amplitude width tau = sigma_m / sqrt 2). The
    interference envelope is then exactly Gaussian:
    E(x) / E(0) = exp(-sigma_m^2 x^2 / (2 hbar^2)), up to the grid's
    aliasing image at 2 pi hbar (n_x - 1) / (2 span tau), which the
    defaults keep far beyond 50 hbar / sigma_m.
    """
    if sigma_m <= 0.0:
        raise ConfigError(f"sigma_m must be positive, got {sigma_m}")
    if n_x < 10 or n_y < 1:
        raise ConfigError("dense set needs n_x >= 10, n_y >= 1")
    tau = sigma_m / math.sqrt(2.0)
    mx = np.linspace(-span * tau, span * tau, n_x)
    my = (np.linspace(-span * tau, span * tau, n_y) if n_y > 1
          else np.array([0.0]))
    MX, MY = np.meshgrid(mx, my)
    ms = np.column_stack([MX.ravel(), MY.ravel()])
    amp = np.exp(-(ms[:, 0] ** 2 + ms[:, 1] ** 2) / (2.0 * tau * tau))
    amp /= np.linalg.norm(amp)
    modes = [BlockModes(index=0, omega=0.0, ms=ms)]
    return build_equilibrium(modes, [np.array([1.0])], [amp[None, :]])


def sampled_gaussian_state(sigma_m: float, n_modes: int, seed: int,
                           ) -> EquilibriumState:
    """Random momentum draws with equal amplitudes (qualitative tool).

    Monte Carlo sampling leaves a noise floor of order n_modes^-1/2 in the
    envelope, so this variant persists above ~0.03 of its peak even though
    the underlying distribution is smooth; use dense_gaussian_state for
    quantitative decay work.
    """
    if n_modes < 2:
        raise ConfigError("need at least 2 modes")
    rng = np.random.default_rng(seed)
    ms = rng.normal(scale=sigma_m / math.sqrt(2.0), size=(n_modes, 2))
    modes = [BlockModes(index=0, omega=0.0, ms=ms)]
    U = np.full((1, n_modes), 1.0 / math.sqrt(n_modes))
    return build_equilibrium(modes, [np.array([1.0])], [U])


def random_block_state(n_blocks: int, modes_per_block: int, seed: int,
                       weight_profile: str = "uniform",
                       sigma_omega: float = 1.0,
                       m_scale: float = 1.0) -> EquilibriumState:
    """Seeded multi-block state with square Haar isometries.

    Diagonal labels inside a block carry independent seeded weights (drawn
    uniform in [0.5, 1.5]); without that spread the momentum-basis matrix
    of a square unitary block would collapse to a multiple of the identity.
    weight_profile 'uniform' treats every block alike; 'gaussian'
    additionally damps whole blocks by exp(-omega^2 / 2 sigma_omega^2).
    """
    if n_blocks < 1 or modes_per_block < 1:
        raise ConfigError("need n_blocks >= 1 and modes_per_block >= 1")
    if weight_profile not in ("uniform", "gaussian"):
        raise ConfigError(f"unknown weight profile {weight_profile!r}")
    rng = np.random.default_rng(seed)
    modes = []
    weights = []
    unitaries = []
    for b in range(n_blocks):
        omega = float(rng.normal(scale=sigma_omega))
        ms = rng.normal(scale=m_scale, size=(modes_per_block, 2))
        z = rng.normal(size=(modes_per_block, modes_per_block)) \
            + 1j * rng.normal(size=(modes_per_block, modes_per_block))
        q, r = np.linalg.qr(z)
        q = q * (np.diag(r) / np.abs(np.diag(r)))[None, :]
        w = rng.uniform(0.5, 1.5, size=modes_per_block)
        if weight_profile == "gaussian":
            w = w * math.exp(-0.5 * (omega / sigma_omega) ** 2)
        modes.append(BlockModes(index=b, omega=omega, ms=ms))
        weights.append(w)
        unitaries.append(q.T.conj())
    total = sum(float(w.sum()) for w in weights)
    weights = [w / total for w in weights]
    return build_equilibrium(modes, weights, unitaries)
