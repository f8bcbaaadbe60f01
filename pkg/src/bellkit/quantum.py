"""States, POVMs, Bell operators, visibilities, and fixed measurement families."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .expressions import GE, evaluate, expand_to_coefficients
from .scenario import Behavior, Scenario, ScenarioMismatchError

HERM_TOL = 1e-10
PSD_TOL = 1e-9
COMPLETENESS_TOL = 1e-9
RANK_EIG_TOL = 1e-8

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def _hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


@dataclass(frozen=True)
class Ket:
    local_dimensions: tuple[int, ...]
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        D = math.prod(self.local_dimensions)
        if amp.size != D:
            raise ValueError(f"amplitude length {amp.size} != {D}")
        if abs(np.linalg.norm(amp) - 1.0) > HERM_TOL:
            raise ValueError("state is not normalized")
        object.__setattr__(self, "amplitudes", amp)

    @property
    def dimension(self) -> int:
        return math.prod(self.local_dimensions)

    def as_tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.local_dimensions)

    def density_matrix(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


@dataclass(frozen=True)
class Povm:
    """K outcome operators; zero elements are allowed and count as outcomes."""

    elements: tuple[np.ndarray, ...]

    def __post_init__(self):
        elems = tuple(np.asarray(e, dtype=complex) for e in self.elements)
        d = elems[0].shape[0]
        total = np.zeros((d, d), dtype=complex)
        for e in elems:
            if e.shape != (d, d):
                raise ValueError("POVM elements must share one square shape")
            if np.abs(e - e.conj().T).max() > HERM_TOL:
                raise ValueError("POVM element is not Hermitian")
            if np.linalg.eigvalsh(e).min() < -PSD_TOL:
                raise ValueError("POVM element has a negative eigenvalue")
            total += e
        if np.abs(total - np.eye(d)).max() > COMPLETENESS_TOL:
            raise ValueError("POVM elements do not sum to the identity")
        object.__setattr__(self, "elements", elems)

    @property
    def dimension(self) -> int:
        return self.elements[0].shape[0]

    @property
    def outcomes(self) -> int:
        return len(self.elements)

    def stacked(self) -> np.ndarray:
        return np.stack(self.elements)


@dataclass(frozen=True)
class MeasurementAssemblage:
    """povms[party][input] is that setting's POVM."""

    povms: tuple[tuple[Povm, ...], ...]

    @property
    def dimensions(self) -> tuple[int, ...]:
        return tuple(p[0].dimension for p in self.povms)

    @property
    def parties(self) -> int:
        return len(self.povms)

    def permute_parties(self, perm) -> "MeasurementAssemblage":
        return MeasurementAssemblage(tuple(self.povms[p] for p in perm))


@dataclass(frozen=True)
class QuantumModel:
    """A pure state (or density matrix) together with an assemblage."""

    state: Ket | np.ndarray
    assemblage: MeasurementAssemblage

    def __post_init__(self):
        dims = self.assemblage.dimensions
        D = math.prod(dims)
        if isinstance(self.state, Ket):
            if self.state.local_dimensions != dims:
                raise ScenarioMismatchError(
                    f"state dims {self.state.local_dimensions} != assemblage {dims}"
                )
        else:
            rho = np.asarray(self.state, dtype=complex)
            if rho.shape != (D, D):
                raise ScenarioMismatchError("density matrix shape mismatch")
            object.__setattr__(self, "state", rho)

    def scenario(self) -> Scenario:
        n = self.assemblage.parties
        inputs = tuple(len(p) for p in self.assemblage.povms)
        return Scenario(n, inputs, self.assemblage.povms[0][0].outcomes)


def _out_letters(n: int) -> str:
    return "abcdefg"[:n]


def behavior_of(model: QuantumModel) -> Behavior:
    """P(outcomes|inputs) = <psi| E_1 x E_2 x ... |psi> (trace form when mixed)."""
    sc = model.scenario()
    n = sc.parties
    dims = model.assemblage.dimensions
    out = _out_letters(n)
    ij = [("ij", "kl", "mn", "op", "qr", "st", "uv")[p] for p in range(n)]
    povm_sub = [out[p] + ij[p] for p in range(n)]
    pure = isinstance(model.state, Ket)
    if pure:
        T = model.state.as_tensor()
        bra = "".join(s[0] for s in ij)
        ket = "".join(s[1] for s in ij)
        sub = ",".join(povm_sub) + "," + bra + "," + ket + "->" + out
    else:
        rho = model.state.reshape(dims + dims)
        sub = (
            ",".join(povm_sub)
            + ","
            + "".join(s[1] for s in ij)
            + "".join(s[0] for s in ij)
            + "->"
            + out
        )
    prob = np.empty(sc.behavior_shape())
    for combo in sc.input_combos():
        stacks = [model.assemblage.povms[p][combo[p]].stacked() for p in range(n)]
        if pure:
            block = np.einsum(sub, *stacks, T.conj(), T)
        else:
            block = np.einsum(sub, *stacks, rho)
        prob[combo] = block.real
    return Behavior(sc, prob)


def bell_operator(expr, assemblage: MeasurementAssemblage) -> np.ndarray:
    """Hermitian operator B with <psi|B|psi> = evaluate(expr, behavior)."""
    sc_expr = expr.scenario
    n = assemblage.parties
    if n != sc_expr.parties:
        raise ScenarioMismatchError("assemblage party count mismatch")
    dims = assemblage.dimensions
    D = math.prod(dims)
    coeffs = expand_to_coefficients(expr)
    out = _out_letters(n)
    ij = [("ij", "kl", "mn", "op", "qr", "st", "uv")[p] for p in range(n)]
    sub = (
        out
        + ","
        + ",".join(out[p] + ij[p] for p in range(n))
        + "->"
        + "".join(s[0] for s in ij)
        + "".join(s[1] for s in ij)
    )
    B = np.zeros((D, D), dtype=complex)
    for combo in Scenario(n, sc_expr.inputs_per_party, sc_expr.outputs).input_combos():
        c = coeffs[combo]
        if not c.any():
            continue
        stacks = [assemblage.povms[p][combo[p]].stacked() for p in range(n)]
        B += np.einsum(sub, c.astype(complex), *stacks).reshape(D, D)
    return _hermitize(B)


def min_eig_state(B: np.ndarray, local_dims: tuple[int, ...] | None = None):
    """Eigenpair of minimal eigenvalue of a Hermitian matrix."""
    B = np.asarray(B, dtype=complex)
    scale = max(1.0, np.abs(B).max())
    if np.abs(B - B.conj().T).max() > HERM_TOL * scale:
        raise ValueError("matrix is not Hermitian")
    vals, vecs = np.linalg.eigh(B)
    if local_dims is None:
        local_dims = (B.shape[0],)
    return float(vals[0]), Ket(tuple(local_dims), vecs[:, 0])


def max_eig_state(B: np.ndarray, local_dims: tuple[int, ...] | None = None):
    value, ket = min_eig_state(-np.asarray(B), local_dims)
    return -value, ket


def reduced_density(state: Ket | np.ndarray, dims: tuple[int, ...], party: int):
    n = len(dims)
    if isinstance(state, Ket):
        T = state.as_tensor()
        axes = [p for p in range(n) if p != party]
        return np.tensordot(T, T.conj(), axes=(axes, axes))
    rho = np.asarray(state).reshape(dims + dims)
    letters = "abcdefghijklmn"
    s_ket = "".join(letters[i] for i in range(n))
    s_bra = "".join(letters[n] if i == party else letters[i] for i in range(n))
    return np.einsum(s_ket + s_bra + "->" + letters[party] + letters[n], rho)


def reduced_ranks(
    state: Ket | np.ndarray, dims: tuple[int, ...], tol: float = RANK_EIG_TOL
) -> tuple[int, ...]:
    """Ranks of the single-party reduced density matrices at eigenvalue cutoff."""
    ranks = []
    for p in range(len(dims)):
        ev = np.linalg.eigvalsh(_hermitize(reduced_density(state, dims, p)))
        ranks.append(int((ev > tol).sum()))
    return tuple(ranks)


def _support_projector(rho_reduced: np.ndarray, tol: float = RANK_EIG_TOL):
    vals, vecs = np.linalg.eigh(_hermitize(rho_reduced))
    keep = vecs[:, vals > tol]
    return keep @ keep.conj().T, keep.shape[1]


@dataclass(frozen=True)
class VisibilityResult:
    value: float
    violating: bool
    state_value: float
    noise_value: float
    noise_dimension: int

    def __float__(self):
        return self.value


def visibility(expr, model: QuantumModel, noise: str = "support") -> VisibilityResult:
    """White-noise threshold of the model against the inequality.

    With noise="support" (default) the noise is the maximally mixed state on
    the supports of the reduced density matrices (dimension D = d1*d2*d3 with
    d_j the reduced rank); with noise="ambient" it is maximally mixed on the
    full local spaces.  Either way it is measured with the model's assemblage.
    """
    if noise not in ("support", "ambient"):
        raise ValueError("noise must be 'support' or 'ambient'")
    dims = model.assemblage.dimensions
    B = bell_operator(expr, model.assemblage)
    if isinstance(model.state, Ket):
        psi = model.state.amplitudes
        s_state = float(np.real(psi.conj() @ B @ psi))
    else:
        s_state = float(np.real(np.trace(B @ model.state)))
    if noise == "ambient":
        D = math.prod(dims)
        s_mix = float(np.real(np.trace(B))) / D
    else:
        projs, ranks = [], []
        for p in range(len(dims)):
            P, r = _support_projector(reduced_density(model.state, dims, p))
            projs.append(P)
            ranks.append(r)
        D = math.prod(ranks)
        mix = projs[0]
        for P in projs[1:]:
            mix = np.kron(mix, P)
        s_mix = float(np.real(np.trace(B @ mix))) / D
    bound = float(expr.bound)
    violates = s_state < bound - 1e-12 if expr.comparator == GE else s_state > bound + 1e-12
    if not violates:
        return VisibilityResult(1.0, False, s_state, s_mix, D)
    v = (s_mix - bound) / (s_mix - s_state)
    return VisibilityResult(max(v, 0.0), True, s_state, s_mix, D)


def ghz_value_closed_form(K: int) -> tuple[int, float]:
    """Best generalized-GHZ violation of the four-bracket family and its
    visibility: floor((K-1)/2) and (K-1)/(2(K-1)-floor((K-1)/2))."""
    value = (K - 1) // 2
    vis = Fraction(K - 1, 2 * (K - 1) - value)
    return value, float(vis)


def state_factory(name: str, K: int | None = None) -> Ket:
    """Named states: ghz2, ghz3, ghz (needs K), w, aharonov, psi3."""
    name = name.lower()
    if name in ("ghz2", "ghz3") or name == "ghz":
        if name == "ghz2":
            K = 2
        elif name == "ghz3":
            K = 3
        elif K is None:
            raise ValueError("ghz needs the outcome count K")
        amp = np.zeros((K, K, K), dtype=complex)
        for j in range(K):
            amp[j, j, j] = 1 / math.sqrt(K)
        return Ket((K, K, K), amp)
    if name == "w":
        amp = np.zeros((2, 2, 2), dtype=complex)
        amp[0, 0, 1] = amp[0, 1, 0] = amp[1, 0, 0] = 1 / math.sqrt(3)
        return Ket((2, 2, 2), amp)
    if name == "aharonov":
        amp = np.zeros((3, 3, 3), dtype=complex)
        s = 1 / math.sqrt(6)
        amp[0, 1, 2] = amp[1, 2, 0] = amp[2, 0, 1] = s
        amp[0, 2, 1] = amp[1, 0, 2] = amp[2, 1, 0] = -s
        return Ket((3, 3, 3), amp)
    if name == "psi3":
        amp = np.zeros((2, 2, 2), dtype=complex)
        amp[0, 0, 0] = 3 - 2 * math.sqrt(3)
        amp[0, 1, 1] = amp[1, 0, 1] = amp[1, 1, 0] = 1.0
        amp /= 2 * math.sqrt(6 - 3 * math.sqrt(3))
        return Ket((2, 2, 2), amp)
    raise ValueError(f"unknown state {name!r}")


def projective_povm_from_basis(vectors: np.ndarray) -> Povm:
    """Rank-1 projective POVM from the columns of a unitary matrix."""
    return Povm(
        tuple(
            np.outer(vectors[:, k], vectors[:, k].conj())
            for k in range(vectors.shape[1])
        )
    )


def fourier_assemblage(K: int, phases: np.ndarray) -> MeasurementAssemblage:
    """Rank-1 Fourier measurements with per-party per-input phases.

    Outcome k projects onto (1/sqrt(K)) sum_j omega^(j(k+phi)) |j>,
    omega = exp(2 pi i / K); phases has shape (parties, inputs).
    """
    phases = np.asarray(phases, dtype=float)
    parties, n_inputs = phases.shape
    j = np.arange(K)
    povms = []
    for p in range(parties):
        per_input = []
        for x in range(n_inputs):
            phi = phases[p, x]
            U = np.exp(2j * np.pi * np.outer(j, j + phi) / K) / math.sqrt(K)
            per_input.append(projective_povm_from_basis(U))
        povms.append(tuple(per_input))
    return MeasurementAssemblage(tuple(povms))


def _xy_projectors(theta: float) -> tuple[np.ndarray, np.ndarray]:
    m = math.cos(theta) * SIGMA_X + math.sin(theta) * SIGMA_Y
    eye = np.eye(2)
    return (eye + m) / 2, (eye - m) / 2


def mermin_assemblage() -> MeasurementAssemblage:
    """Qubit measurements achieving the K=2 minimum 0 on the GHZ state.

    Equatorial bases at angles -pi/6 (input 1) and pi/3 (input 2), identical
    for all parties; together with ghz2 this realizes the GHZ paradox.
    """
    povms = []
    for _ in range(3):
        per_input = []
        for theta in (-math.pi / 6, math.pi / 3):
            plus, minus = _xy_projectors(theta)
            per_input.append(Povm((plus, minus)))
        povms.append(tuple(per_input))
    return MeasurementAssemblage(tuple(povms))


def psi3_assemblage(dimension: int = 2) -> MeasurementAssemblage:
    """The explicit qubit measurements that pair with psi3 at K=3.

    Three-outcome POVMs on qubits built from sigma_z / sigma_x projectors
    with one zero element each.  With dimension=3 the POVMs are embedded in
    qutrits and the zero element absorbs the |2><2| complement, making each
    a genuine three-outcome projective measurement.
    """
    if dimension not in (2, 3):
        raise ValueError("dimension must be 2 or 3")
    eye = np.eye(2, dtype=complex)
    zero = np.zeros((2, 2), dtype=complex)
    pz, mz = (eye + SIGMA_Z) / 2, (eye - SIGMA_Z) / 2
    px, mx = (eye + SIGMA_X) / 2, (eye - SIGMA_X) / 2
    layout = [
        (pz, mz, zero),
        (mx, zero, px),
        (mz, pz, zero),
        (px, zero, mx),
        (mx, px, zero),
        (mz, pz, zero),
    ]
    if dimension == 3:
        def lift(e):
            out = np.zeros((3, 3), dtype=complex)
            out[:2, :2] = e
            if not e.any():
                out[2, 2] = 1.0
            return out

        layout = [tuple(lift(e) for e in elems) for elems in layout]
    povms = [Povm(elems) for elems in layout]
    return MeasurementAssemblage(
        ((povms[0], povms[1]), (povms[2], povms[3]), (povms[4], povms[5]))
    )


def embed_ket(ket: Ket, dims: tuple[int, ...]) -> Ket:
    """Pad a pure state with zero amplitudes into larger local spaces."""
    if len(dims) != len(ket.local_dimensions):
        raise ScenarioMismatchError("party count mismatch")
    if any(d < d0 for d, d0 in zip(dims, ket.local_dimensions)):
        raise ScenarioMismatchError("cannot embed into a smaller space")
    T = ket.as_tensor()
    out = np.zeros(dims, dtype=complex)
    out[tuple(slice(0, d0) for d0 in ket.local_dimensions)] = T
    return Ket(tuple(dims), out.reshape(-1))


def deterministic_assemblage(dims: tuple[int, ...], K: int, n_inputs: int = 2):
    """Every POVM is {I, 0, ..., 0}: outcome 0 always fires."""
    povms = []
    for d in dims:
        eye = np.eye(d, dtype=complex)
        zero = np.zeros((d, d), dtype=complex)
        povm = Povm((eye,) + (zero,) * (K - 1))
        povms.append((povm,) * n_inputs)
    return MeasurementAssemblage(tuple(povms))


def optimize_fourier_phases(
    expr,
    K: int,
    n_starts: int = 8,
    seed: int = 0,
    grid_step: float | None = None,
    max_rounds: int = 40,
):
    """Phase search for Fourier measurements: coordinate grid + refinement.

    Minimizes (for >=-type) the smallest Bell-operator eigenvalue over the
    per-party per-input phases.  Returns (best phases, best eigenvalue).
    """
    from scipy.optimize import minimize_scalar

    sc = expr.scenario
    n = sc.parties
    n_inputs = sc.inputs_per_party[0]
    sign = 1.0 if expr.comparator == GE else -1.0
    # phases live in outcome units with period K; the angle step pi/(8K)
    # corresponds to a phase step K/(2 pi) * pi/(8K) = 1/16
    step = grid_step if grid_step is not None else 1 / 16

    def objective(phases):
        B = bell_operator(expr, fourier_assemblage(K, phases.reshape(n, n_inputs)))
        return sign * float(np.linalg.eigvalsh(B)[0 if sign > 0 else -1])

    rng = np.random.default_rng(seed)
    best_phases, best_val = None, np.inf
    starts = [np.zeros(n * n_inputs)]
    # the CGLMP-style alternating offsets are a known good starting point
    cglmp = np.array([[0.0, 0.5]] * n).reshape(-1)
    starts.append(cglmp)
    while len(starts) < n_starts:
        starts.append(rng.uniform(0, K, size=n * n_inputs))
    for x0 in starts:
        x = np.array(x0, dtype=float)
        val = objective(x)
        for _ in range(max_rounds):
            improved = False
            for i in range(x.size):
                grid = np.arange(0, K, step)
                vals = []
                for g in grid:
                    x[i] = g
                    vals.append(objective(x))
                gi = int(np.argmin(vals))
                lo, hi = grid[gi] - step, grid[gi] + step

                def f(t, i=i):
                    x[i] = t
                    return objective(x)

                res = minimize_scalar(f, bounds=(lo, hi), method="bounded")
                x[i] = float(res.x)
                new_val = float(res.fun)
                if new_val < val - 1e-12:
                    val = new_val
                    improved = True
            if not improved:
                break
        if val < best_val:
            best_val, best_phases = val, x.copy()
    return best_phases.reshape(n, n_inputs), sign * best_val


def haar_random_ket(dims: tuple[int, ...], rng: np.random.Generator) -> Ket:
    D = math.prod(dims)
    v = rng.normal(size=D) + 1j * rng.normal(size=D)
    return Ket(tuple(dims), v / np.linalg.norm(v))


def random_povm(
    d: int, K: int, rng: np.random.Generator, rank_profile=None
) -> Povm:
    """Projective POVM with a random rank profile and Haar-random basis.

    The rank profile is sampled uniformly over compositions of d into K
    nonnegative parts unless given.
    """
    if rank_profile is None:
        bars = np.sort(rng.choice(d + K - 1, size=K - 1, replace=False))
        edges = np.concatenate([[-1], bars, [d + K - 1]])
        rank_profile = tuple(int(edges[i + 1] - edges[i] - 1) for i in range(K))
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    elems, pos = [], 0
    for rk in rank_profile:
        block = q[:, pos:pos + rk]
        elems.append(block @ block.conj().T)
        pos += rk
    return Povm(tuple(elems))
