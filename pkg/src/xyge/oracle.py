"""Brute-force reference computations on the full 2^N Hilbert space (N <= 12).

Basis convention: site 1 is the most significant bit of the basis index, and a
clear bit means spin up (Z = +1). Everything here is dense linear algebra; the
point is to be obviously correct, not fast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sparse

from .model import ChainSpec, ModelParams
from .optimize import maximize_unimodal

MAX_SITES = 12
# Closing overlaps of many-site loops are small (cos^N xi for a product state),
# but their argument stays accurate down to roughly this size.
CLOSING_OVERLAP_FLOOR = 1e-12


class DegenerateGroundState(RuntimeError):
    """The requested ground state is not separated from the next level."""


class IllConditionedLoop(RuntimeError):
    """Consecutive states on a discretised loop are (nearly) orthogonal."""


def _check_size(chain: ChainSpec):
    if chain.n_sites > MAX_SITES:
        raise ValueError(f"exact oracle supports N <= {MAX_SITES}, got N={chain.n_sites}")


def _bits(n_sites: int) -> np.ndarray:
    """Array of shape (2^N, N); column j holds the bit of site j+1 (1 = spin down)."""
    idx = np.arange(2**n_sites)
    shifts = np.arange(n_sites - 1, -1, -1)
    return (idx[:, None] >> shifts[None, :]) & 1


def magnetization(n_sites: int) -> np.ndarray:
    """Diagonal of sum_j Z_j."""
    return n_sites - 2 * _bits(n_sites).sum(axis=1)


def parity(n_sites: int) -> np.ndarray:
    """Diagonal of prod_j Z_j."""
    return 1 - 2 * (_bits(n_sites).sum(axis=1) % 2)


def _bond_terms(n_sites: int):
    """Row/column indices of the pair flips on every periodic bond, with a flag for equal spins."""
    bits = _bits(n_sites)
    idx = np.arange(2**n_sites)
    rows, cols, same = [], [], []
    for j in range(n_sites):
        k = (j + 1) % n_sites
        mask = (1 << (n_sites - 1 - j)) | (1 << (n_sites - 1 - k))
        rows.append(idx)
        cols.append(idx ^ mask)
        same.append(bits[:, j] == bits[:, k])
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(same)


def _operators(n_sites: int):
    """Sparse sum_j X_j X_{j+1}, sum_j Y_j Y_{j+1} and diagonal sum_j Z_j."""
    dim = 2**n_sites
    rows, cols, same = _bond_terms(n_sites)
    xx = sparse.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(dim, dim))
    # Y Y on |00> and |11> gives -1, on |01> and |10> gives +1
    yy = sparse.csr_matrix((np.where(same, -1.0, 1.0), (rows, cols)), shape=(dim, dim))
    z = sparse.diags(magnetization(n_sites).astype(float))
    return xx, yy, z


def build_hamiltonian(chain: ChainSpec, params: ModelParams, dense: bool = True):
    """Real symmetric matrix of the periodic XY chain in a transverse field."""
    _check_size(chain)
    xx, yy, z = _operators(chain.n_sites)
    r, h = params.r, params.h
    ham = -(0.5 * (1 + r) * xx + 0.5 * (1 - r) * yy + h * z)
    return ham.toarray() if dense else ham.tocsr()


def hamiltonian_derivatives(chain: ChainSpec, dense: bool = True):
    """(dH/dr, dH/dh); H is affine in both parameters so these are exact."""
    _check_size(chain)
    xx, yy, z = _operators(chain.n_sites)
    d_r = -0.5 * (xx - yy)
    d_h = -z
    if dense:
        return d_r.toarray(), d_h.toarray()
    return d_r.tocsr(), d_h.tocsr()


@dataclass
class SpectrumSlice:
    energies: np.ndarray
    states: np.ndarray  # columns are eigenvectors
    parities: np.ndarray
    ground_index: int  # column of the lowest even-parity state

    @property
    def ground_state(self) -> np.ndarray:
        return self.states[:, self.ground_index]

    @property
    def ground_energy(self) -> float:
        return float(self.energies[self.ground_index])

    @property
    def even_gap(self) -> float:
        """Distance from the even ground state to the nearest other level."""
        e0 = self.energies[self.ground_index]
        others = np.delete(self.energies, self.ground_index)
        return float(np.min(np.abs(others - e0))) if len(others) else math.inf

    @property
    def gap(self) -> float:
        return float(self.energies[1] - self.energies[0])


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(vec)))
    return vec * (abs(vec[k]) / vec[k])


def diagonalize(chain: ChainSpec, params: ModelParams, n_states: int | None = None) -> SpectrumSlice:
    """Full spectrum, diagonalised separately in the two parity sectors.

    The sector split makes parity labels exact and pins down the even ground
    state even when it is degenerate with the odd one (h < 1).
    """
    _check_size(chain)
    ham = build_hamiltonian(chain, params)
    par = parity(chain.n_sites)
    dim = ham.shape[0]
    energies, states, labels = [], [], []
    for sign in (1, -1):
        sel = np.flatnonzero(par == sign)
        e, v = np.linalg.eigh(ham[np.ix_(sel, sel)])
        full = np.zeros((dim, len(e)))
        full[sel, :] = v
        energies.append(e)
        states.append(full)
        labels.append(np.full(len(e), sign))
    energies = np.concatenate(energies)
    states = np.concatenate(states, axis=1)
    labels = np.concatenate(labels)
    # stable sort keeps the even member first within exact ties
    order = np.argsort(energies, kind="stable")
    energies, states, labels = energies[order], states[:, order], labels[order]
    ground = int(np.flatnonzero(labels == 1)[0])
    states = states.astype(complex)
    for col in range(states.shape[1]):
        states[:, col] = _fix_phase(states[:, col])
    if n_states is not None:
        keep = max(n_states, ground + 1)
        energies, states, labels = energies[:keep], states[:, :keep], labels[:keep]
    return SpectrumSlice(energies=energies, states=states, parities=labels, ground_index=ground)


def ground_state(chain: ChainSpec, params: ModelParams, n_states: int = 4) -> SpectrumSlice:
    """Lowest ``n_states`` eigenpairs (at least 4) with the even-parity ground state identified."""
    return diagonalize(chain, params, n_states=max(4, n_states))


def even_ground_state(chain: ChainSpec, params: ModelParams) -> np.ndarray:
    """Even-parity ground state only (cheaper than the full spectrum)."""
    _check_size(chain)
    ham = build_hamiltonian(chain, params)
    sel = np.flatnonzero(parity(chain.n_sites) == 1)
    _, v = np.linalg.eigh(ham[np.ix_(sel, sel)])
    psi = np.zeros(ham.shape[0], dtype=complex)
    psi[sel] = v[:, 0]
    return _fix_phase(psi)


def product_state(n_sites: int, xi: float) -> np.ndarray:
    """Translation-invariant product state with every spin at polar angle ``xi``."""
    site = np.array([math.cos(xi / 2), math.sin(xi / 2)], dtype=complex)
    out = site
    for _ in range(n_sites - 1):
        out = np.kron(out, site)
    return out


def overlap_with_product(state: np.ndarray, xi: float) -> complex:
    """<Phi(xi)|state>, contracting one site at a time (no 2^N x 2^N object)."""
    n_sites = int(round(math.log2(len(state))))
    site = np.array([math.cos(xi / 2), math.sin(xi / 2)])
    amp = np.asarray(state, dtype=complex)
    for _ in range(n_sites):
        amp = site @ amp.reshape(2, -1)
    return complex(amp.reshape(()))


def exact_entanglement_eigenvalue(state: np.ndarray, coarse_points: int = 33, tol: float = 1e-10):
    """(Lambda_max, xi_max) over the uniform real product states, xi in [0, pi]."""
    res = maximize_unimodal(lambda x: abs(overlap_with_product(state, x)), 0.0, math.pi,
                            coarse_points=coarse_points, tol=tol)
    return res.value, res.argmax


# --- loops and geometric phases -------------------------------------------------------------


@dataclass(frozen=True)
class LoopSpec:
    """Rotation of every spin about z, phi in [0, phi_extent], discretised into ``steps``.

    With ``richardson`` the Bargmann phase of the K-gon is combined with that of
    the K/2-gon on every other vertex to cancel the leading K^-2 error.
    """

    phi_extent: float = math.pi
    steps: int = 1024
    transport: str = "parallel"  # or "bare"
    richardson: bool = True

    def __post_init__(self):
        if self.steps < 64:
            raise ValueError(f"loop needs at least 64 steps, got {self.steps}")
        if self.transport not in ("parallel", "bare"):
            raise ValueError(f"unknown transport {self.transport!r}")
        if not self.phi_extent > 0:
            raise ValueError("loop extent must be positive")


def _rotation_generator(state: np.ndarray, transport: str) -> np.ndarray:
    """Diagonal of the generator G with U(phi) = exp(i phi G); G = sum Z / 2, minus <G> if transported."""
    n_sites = int(round(math.log2(len(state))))
    g = 0.5 * magnetization(n_sites).astype(float)
    if transport == "parallel":
        g = g - float(np.vdot(state, g * state).real)
    return g


def _bargmann_arg(states: Sequence[np.ndarray], closed: bool = True,
                  min_overlap: float = 1e-6) -> tuple[float, float]:
    """Sum of the arguments of consecutive overlaps (closing back to the first state).

    Returns (sum of args, arg of the closing overlap); the first part excludes the closure.
    """
    total = 0.0
    for a, b in zip(states[:-1], states[1:]):
        ov = np.vdot(a, b)
        if abs(ov) < min_overlap:
            raise IllConditionedLoop(f"consecutive overlap {abs(ov):.2e} below {min_overlap}")
        total += math.atan2(ov.imag, ov.real)
    closing = 0.0
    if closed:
        ov = np.vdot(states[-1], states[0])
        if abs(ov) < CLOSING_OVERLAP_FLOOR:
            raise IllConditionedLoop(f"closing overlap {abs(ov):.2e} below {min_overlap}")
        closing = math.atan2(ov.imag, ov.real)
    return total, closing


def wrap_phase(x: float) -> float:
    """Map a phase into (-pi, pi]."""
    y = math.remainder(x, 2 * math.pi)
    return math.pi if y == -math.pi else y


def bargmann_phase(states: Sequence[np.ndarray], min_overlap: float = 1e-6) -> float:
    """Geometric phase of the closed polygon of rays, -arg prod <s_k|s_{k+1}> <s_K|s_0>, in (-pi, pi]."""
    total, closing = _bargmann_arg(states, min_overlap=min_overlap)
    return wrap_phase(-(total + closing))


def loop_states(state: np.ndarray, loop: LoopSpec) -> list[np.ndarray]:
    g = _rotation_generator(state, loop.transport)
    phis = np.linspace(0.0, loop.phi_extent, loop.steps + 1)
    return [np.exp(1j * phi * g) * state for phi in phis]


def pancharatnam_phase(state: np.ndarray, loop: LoopSpec = LoopSpec()) -> float:
    """Geometric phase (mod 2 pi, in (-pi, pi]) of the rotated path closed by a geodesic.

    Sign convention: the phase accrued by the state, so a single spin at polar
    angle xi taken once around z (extent 2 pi) gives +2 pi sin^2(xi/2).
    """
    states = loop_states(state, loop)
    fine = bargmann_phase(states)
    if not loop.richardson or loop.steps % 2:
        return fine
    coarse = bargmann_phase(states[::2])
    return wrap_phase(fine + wrap_phase(fine - coarse) / 3.0)


def lifted_phase(state: np.ndarray, loop: LoopSpec = LoopSpec()) -> float:
    """Real-valued geometric phase with the 2 pi branch fixed by the all-up reference state.

    The total phase is taken as phi_extent * g_ref (the phase the fully
    polarised reference accrues under the same generator) plus the principal
    argument of the remainder; the dynamical part is the continuous sum of the
    small consecutive arguments.
    """
    n_sites = int(round(math.log2(len(state))))
    states = loop_states(state, loop)
    dyn, _ = _bargmann_arg(states, closed=False)
    if loop.richardson and loop.steps % 2 == 0:
        coarse, _ = _bargmann_arg(states[::2], closed=False)
        dyn += (dyn - coarse) / 3.0
    g_ref = 0.5 * n_sites
    if loop.transport == "parallel":
        g_ref -= 0.5 * float(np.vdot(state, magnetization(n_sites) * state).real)
    ref_total = loop.phi_extent * g_ref
    ov = np.vdot(states[0], states[-1]) * np.exp(-1j * ref_total)
    if abs(ov) < CLOSING_OVERLAP_FLOOR:
        raise IllConditionedLoop(f"end state nearly orthogonal to the start ({abs(ov):.2e})")
    total = ref_total + math.atan2(ov.imag, ov.real)
    return total - dyn


# --- interferometer ---------------------------------------------------------------------------


@dataclass
class FringeRecord:
    amplitude: complex
    overlap_sq: float
    samples: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    extracted_visibility: float = math.nan
    extracted_phase: float = math.nan


@dataclass
class Interferometer:
    """State of the two-arm experiment after the loops, before recombination."""

    psi: np.ndarray
    phi: np.ndarray
    phase_g: float
    phase_p: float

    @property
    def overlap(self) -> complex:
        return complex(np.vdot(self.phi, self.psi))

    def arm_states(self, f: float):
        """Conditional states reaching the |0> port: ground-state arm and projected arm."""
        arm0 = np.exp(1j * (self.phase_g - f)) * self.psi
        arm1 = np.exp(1j * self.phase_p) * self.phi * self.overlap
        return arm0, arm1

    def intensity(self, f: float) -> float:
        arm0, arm1 = self.arm_states(f)
        out = 0.5 * (arm0 + arm1)
        return float(np.vdot(out, out).real)

    @property
    def amplitude(self) -> complex:
        c = self.overlap
        return np.conj(c) * np.exp(-1j * self.phase_p) * c * np.exp(1j * self.phase_g)


def run_interferometer(chain: ChainSpec, params: ModelParams, xi: float,
                       loop: LoopSpec = LoopSpec(), psi: np.ndarray | None = None) -> Interferometer:
    """Simulate both arms with parallel-transporting rotations and geodesic closure."""
    if loop.transport != "parallel":
        raise ValueError("the interferometer uses parallel-transporting rotations")
    if psi is None:
        psi = even_ground_state(chain, params)
    phi = product_state(chain.n_sites, xi)
    return Interferometer(psi=psi, phi=phi,
                          phase_g=pancharatnam_phase(psi, loop),
                          phase_p=pancharatnam_phase(phi, loop))


def interference_amplitude(chain: ChainSpec, params: ModelParams, xi: float,
                           loop: LoopSpec = LoopSpec(), psi: np.ndarray | None = None) -> complex:
    """A(r, h; xi) = |<Phi|psi>|^2 exp(i (phase_g - phase_p))."""
    exp = run_interferometer(chain, params, xi, loop, psi)
    amp = exp.amplitude
    if abs(abs(amp) - abs(exp.overlap) ** 2) > 1e-10:
        raise AssertionError("interference amplitude modulus differs from |<Phi|psi>|^2")
    return complex(amp)


def fringe_intensity(f, amplitude: complex, overlap_sq: float):
    """I0(f) = (1 + |<Phi|psi>|^2) / 4 + Re(A exp(-i f)) / 2."""
    f = np.asarray(f, dtype=float)
    return 0.25 * (1 + overlap_sq) + 0.5 * np.real(amplitude * np.exp(-1j * f))


def fringe_readout(amplitude: complex, overlap_sq: float, f_grid=None) -> FringeRecord:
    """Sample I0 on ``f_grid`` and fit a + b cos(f - c); visibility 2b, phase c."""
    if abs(amplitude) > 1 + 1e-12:
        raise ValueError(f"|A| must not exceed 1, got {abs(amplitude)}")
    if f_grid is None:
        f_grid = np.linspace(0.0, 2 * math.pi, 64, endpoint=False)
    f_grid = np.asarray(f_grid, dtype=float)
    if len(f_grid) < 3 or np.ptp(np.mod(f_grid, 2 * math.pi)) == 0:
        raise ValueError("fringe fit needs at least three distinct f values")
    intensity = fringe_intensity(f_grid, amplitude, overlap_sq)
    # linear least squares in (a, p, q) with I = a + p cos f + q sin f
    design = np.column_stack([np.ones_like(f_grid), np.cos(f_grid), np.sin(f_grid)])
    (a, p, q), *_ = np.linalg.lstsq(design, intensity, rcond=None)
    b = math.hypot(p, q)
    c = math.atan2(q, p)
    return FringeRecord(amplitude=complex(amplitude), overlap_sq=float(overlap_sq),
                        samples=np.column_stack([f_grid, intensity]),
                        extracted_visibility=2 * b, extracted_phase=c)


# --- quantum geometric tensor -----------------------------------------------------------------


@dataclass
class QGTensor:
    t: np.ndarray  # 2x2 complex, coordinates ordered (r, h)
    gap: float

    @property
    def metric_part(self) -> np.ndarray:
        return self.t.real

    @property
    def curvature_part(self) -> np.ndarray:
        return -2.0 * self.t.imag


@dataclass
class ParametricFamily:
    """Hamiltonian H(lambda) on a small Hilbert space with exact derivatives dH/dlambda_mu.

    The XY chain is one instance; tests also use it with a single spin.
    """

    hamiltonian: Callable[[np.ndarray], np.ndarray]
    derivatives: Callable[[np.ndarray], Sequence[np.ndarray]]
    ground: Callable[[np.ndarray], tuple[np.ndarray, float]] | None = None
    spectrum: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]] | None = None

    def ground_state(self, lam) -> tuple[np.ndarray, float]:
        """Ground state and gap to the first excited level (within the relevant sector)."""
        lam = np.asarray(lam, dtype=float)
        if self.ground is not None:
            return self.ground(lam)
        e, v = np.linalg.eigh(self.hamiltonian(lam))
        return _fix_phase(v[:, 0].astype(complex)), float(e[1] - e[0])

    def eigensystem(self, lam) -> tuple[np.ndarray, np.ndarray]:
        lam = np.asarray(lam, dtype=float)
        if self.spectrum is not None:
            return self.spectrum(lam)
        return np.linalg.eigh(self.hamiltonian(lam))


def xy_family(chain: ChainSpec) -> ParametricFamily:
    """The chain as a family over lambda = (r, h), restricted to the even-parity sector."""
    _check_size(chain)
    xx, yy, z = _operators(chain.n_sites)
    xx, yy, z = xx.toarray(), yy.toarray(), z.toarray()
    sel = np.flatnonzero(parity(chain.n_sites) == 1)
    odd = np.flatnonzero(parity(chain.n_sites) == -1)
    d_r, d_h = -0.5 * (xx - yy), -z

    def ham(lam):
        r, h = lam
        return -(0.5 * (1 + r) * xx + 0.5 * (1 - r) * yy + h * z)

    def ground(lam):
        e, v = np.linalg.eigh(ham(lam)[np.ix_(sel, sel)])
        psi = np.zeros(len(z), dtype=complex)
        psi[sel] = v[:, 0]
        return _fix_phase(psi), float(e[1] - e[0])

    def spectrum(lam):
        # block-diagonal in parity, so eigenvectors never mix the sectors
        full = ham(lam)
        es, vs = [], []
        for sector in (sel, odd):
            e, v = np.linalg.eigh(full[np.ix_(sector, sector)])
            block = np.zeros((len(z), len(e)))
            block[sector, :] = v
            es.append(e)
            vs.append(block)
        return np.concatenate(es), np.concatenate(vs, axis=1)

    return ParametricFamily(hamiltonian=ham, derivatives=lambda lam: (d_r, d_h),
                            ground=ground, spectrum=spectrum)


def _check_gap(gap: float):
    if gap < 1e-6:
        raise DegenerateGroundState(f"ground-state gap {gap:.3e} below 1e-6")


def qgt_sum_over_states(family: ParametricFamily, lam) -> QGTensor:
    """T_mn = sum_{n != 0} <0|d_m H|n><n|d_n H|0> / (E_0 - E_n)^2 on the full spectrum."""
    lam = np.asarray(lam, dtype=float)
    psi0, _ = family.ground_state(lam)
    e, v = family.eigensystem(lam)
    # locate psi0 among the eigenvectors; exclude its whole degenerate block from the sum
    weights = np.abs(v.conj().T @ psi0) ** 2
    k0 = int(np.argmax(weights))
    e0 = e[k0]
    excited = np.abs(e - e0) > 1e-9 * max(1.0, abs(e0))
    gap = float(np.min(np.abs(e[excited] - e0)))
    dh = family.derivatives(lam)
    # <n|d_mu H|0> for every eigenvector n
    cols = np.array([v.conj().T @ (d @ psi0) for d in dh])  # shape (dim_lambda, dim)
    denom = (e - e0) ** 2
    t = np.zeros((len(dh), len(dh)), dtype=complex)
    for a in range(len(dh)):
        for b in range(len(dh)):
            t[a, b] = np.sum(np.conj(cols[a, excited]) * cols[b, excited] / denom[excited])
    return QGTensor(t=t, gap=gap)


def _aligned(ref: np.ndarray, vec: np.ndarray) -> np.ndarray:
    ov = np.vdot(ref, vec)
    return vec * (abs(ov) / ov)


def qgt_projector(family: ParametricFamily, lam, delta: float = 1e-4) -> QGTensor:
    """T_mn = <d_m psi|(1 - |psi><psi|)|d_n psi> with gauge-fixed central differences."""
    lam = np.asarray(lam, dtype=float)
    psi0, gap = family.ground_state(lam)
    derivs = []
    for mu in range(len(lam)):
        step = np.zeros_like(lam)
        step[mu] = delta
        plus = _aligned(psi0, family.ground_state(lam + step)[0])
        minus = _aligned(psi0, family.ground_state(lam - step)[0])
        derivs.append((plus - minus) / (2 * delta))
    t = np.zeros((len(lam), len(lam)), dtype=complex)
    for a, da in enumerate(derivs):
        for b, db in enumerate(derivs):
            t[a, b] = np.vdot(da, db) - np.vdot(da, psi0) * np.vdot(psi0, db)
    return QGTensor(t=t, gap=gap)


def qgt(chain: ChainSpec, params: ModelParams, method: str = "sum-over-states",
        delta: float = 1e-4) -> QGTensor:
    """Quantum geometric tensor of the even ground state over (r, h)."""
    family = xy_family(chain)
    lam = np.array([params.r, params.h])
    _, gap = family.ground_state(lam)
    _check_gap(gap)
    if method == "sum-over-states":
        return qgt_sum_over_states(family, lam)
    if method == "projector-derivative":
        return qgt_projector(family, lam, delta)
    raise ValueError(f"unknown QGT method {method!r}")


def plaquette_curvature(family: ParametricFamily, lam, delta: float, orientation: int = 1) -> float:
    """Berry phase around the square of side ``delta`` centred at ``lam``, divided by its area.

    Corners are visited counter-clockwise in the (lambda_0, lambda_1) plane for
    ``orientation=1`` and clockwise for ``orientation=-1``.
    """
    lam = np.asarray(lam, dtype=float)
    d = 0.5 * delta
    corners = [(-d, -d), (d, -d), (d, d), (-d, d)]
    if orientation == -1:
        corners = corners[::-1]
    states = []
    for c0, c1 in corners:
        psi, gap = family.ground_state(lam + np.array([c0, c1]))
        _check_gap(gap)
        states.append(psi)
    return bargmann_phase(states) / delta**2


def berry_curvature_plaquette(chain: ChainSpec, params: ModelParams, delta: float = 1e-3,
                              orientation: int = 1) -> float:
    """Berry curvature of the even ground state over (r, h), right-handed orientation."""
    return plaquette_curvature(xy_family(chain), np.array([params.r, params.h]), delta, orientation)


def fidelity(chain: ChainSpec, params: ModelParams, other: ModelParams) -> float:
    """|<psi0(params)|psi0(other)>| for the even-parity ground states."""
    family = xy_family(chain)
    a, gap_a = family.ground_state(np.array([params.r, params.h]))
    b, gap_b = family.ground_state(np.array([other.r, other.h]))
    _check_gap(min(gap_a, gap_b))
    return float(abs(np.vdot(a, b)))
