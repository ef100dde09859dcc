"""Interior-penalty DG machinery on a uniform 1D mesh.

Contains the finite element space with its evaluation caches, discrete
functions with two-sided traces, the nonsymmetric interior penalty bilinear
form split into its volume part B1, flux part B2 and penalty part B3, the
load vector with fractional history terms, L2 projection of initial data,
and a block-tridiagonal direct solver.

Boundary conditions are homogeneous Dirichlet, enforced weakly through the
one-sided jump and average conventions at the domain endpoints, so the space
has the full broken dimension M*(k+1).
"""

from __future__ import annotations

import numpy as np

from .errors import ArgumentContractError, CoefficientError, SolverError
from .meshes import SpatialMesh
from .quadrature import basis_eval, basis_eval_many, gauss_rule, lagrange_basis


def _sample(fn, y: np.ndarray) -> np.ndarray:
    """Evaluate a coefficient callable on an array, accepting scalar returns."""
    out = fn(y)
    arr = np.asarray(out, dtype=float)
    if arr.shape == y.shape:
        return arr
    if arr.ndim == 0:
        return np.full(y.shape, float(arr))
    raise ArgumentContractError(
        f"coefficient returned shape {arr.shape}, expected scalar or {y.shape}"
    )


class DGSpace:
    """Discontinuous piecewise-polynomial space of degree k on a uniform mesh.

    Basis functions are nodal Lagrange polynomials on the mapped Lobatto
    points of each element.  Volume integrals use a Gauss rule with
    q >= k+2 points (default k+3); the k-point Gauss rule drives the
    discrete energy-norm.  sigma holds the M+1 nodal penalty values.
    """

    def __init__(self, mesh: SpatialMesh, k: int, sigma=1.0, volume_points: int | None = None):
        if not (isinstance(k, (int, np.integer)) and k >= 1):
            raise ArgumentContractError(f"DGSpace requires degree k >= 1, got {k!r}")
        k = int(k)
        q = k + 3 if volume_points is None else int(volume_points)
        if q < k + 2:
            raise ArgumentContractError(f"volume rule needs at least k+2 points, got {q}")
        sig = np.asarray(sigma, dtype=float)
        if sig.ndim == 0:
            sig = np.full(mesh.M + 1, float(sig))
        if sig.shape != (mesh.M + 1,):
            raise ArgumentContractError(
                f"sigma must be a scalar or have length M+1={mesh.M + 1}, got shape {sig.shape}"
            )
        if np.any(sig < 0.0):
            raise ArgumentContractError("penalty values must be nonnegative")

        self.mesh = mesh
        self.k = k
        self.sigma = sig
        self.basis = lagrange_basis(k)
        self.volume_rule = gauss_rule(q)
        self.gauss_rule = gauss_rule(k)

        # Evaluation caches on the reference element.
        self.phi_vol, self.dphi_vol = basis_eval_many(self.basis, self.volume_rule.nodes)
        _, self.dphi_gauss = basis_eval_many(self.basis, self.gauss_rule.nodes)
        self.phi_left, self.dphi_left = basis_eval(self.basis, -1.0)
        self.phi_right, self.dphi_right = basis_eval(self.basis, 1.0)

        h = mesh.h
        mids = mesh.midpoints
        # Physical coordinates of quadrature and interpolation nodes, (M, npts).
        self.volume_points_phys = mids[:, None] + 0.5 * h * self.volume_rule.nodes[None, :]
        self.gauss_points_phys = mids[:, None] + 0.5 * h * self.gauss_rule.nodes[None, :]
        self.element_nodes = mids[:, None] + 0.5 * h * self.basis.nodes[None, :]

        w = self.volume_rule.weights
        self.mass_block = 0.5 * h * np.einsum("q,qi,qj->ij", w, self.phi_vol, self.phi_vol)

    @property
    def dim(self) -> int:
        return self.mesh.M * (self.k + 1)

    def map_to_reference(self, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Element indices and reference coordinates of physical points."""
        y = np.asarray(y, dtype=float)
        h = self.mesh.h
        idx = np.clip(np.floor(y / h).astype(int), 0, self.mesh.M - 1)
        z = 2.0 * (y - self.mesh.nodes[idx]) / h - 1.0
        return idx, np.clip(z, -1.0, 1.0)


class DGFunction:
    """Member of a DG space stored as nodal values per element.

    coeffs has shape (M, k+1); row m holds the values at the mapped Lobatto
    points of element m, so evaluation at those points is exact by
    construction.
    """

    def __init__(self, space: DGSpace, coeffs: np.ndarray):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (space.mesh.M, space.k + 1):
            raise ArgumentContractError(
                f"coefficient shape {coeffs.shape} does not match space "
                f"({space.mesh.M}, {space.k + 1})"
            )
        self.space = space
        self.coeffs = coeffs

    def sample_reference(self, z) -> np.ndarray:
        """Values at the same reference points z of every element, (M, len(z))."""
        phi, _ = basis_eval_many(self.space.basis, z)
        return self.coeffs @ phi.T

    def derivative_reference(self, z) -> np.ndarray:
        """Spatial derivative at reference points z of every element."""
        _, dphi = basis_eval_many(self.space.basis, z)
        return (2.0 / self.space.mesh.h) * (self.coeffs @ dphi.T)

    def eval(self, y) -> np.ndarray:
        """Point evaluation at arbitrary physical coordinates.

        Points on interior element boundaries take the value of the element
        to their right, matching the floor-based element lookup.
        """
        y = np.asarray(y, dtype=float)
        flat = np.ravel(y)
        idx, z = self.space.map_to_reference(flat)
        phi, _ = basis_eval_many(self.space.basis, z)
        values = np.einsum("pi,pi->p", self.coeffs[idx], phi)
        return values.reshape(y.shape)

    def left_traces(self) -> np.ndarray:
        return self.coeffs[:, 0]

    def right_traces(self) -> np.ndarray:
        return self.coeffs[:, -1]

    def interior_jumps(self) -> np.ndarray:
        """[v] = v+ - v- at the M-1 interior nodes."""
        return self.coeffs[1:, 0] - self.coeffs[:-1, -1]


def trace_ops(v: DGFunction, m: int) -> tuple[float, float]:
    """Jump and average of v at node m (1-based, 1 <= m <= M+1).

    Interior nodes use [v] = v+ - v- and {v} = (v+ + v-)/2; the boundary
    conventions are [v(y_1)] = {v(y_1)} = v(y_1+) and
    [v(y_{M+1})] = -v(y_{M+1}-), {v(y_{M+1})} = v(y_{M+1}-).
    """
    M = v.space.mesh.M
    if not 1 <= m <= M + 1:
        raise ArgumentContractError(f"node index {m} outside 1..{M + 1}")
    if m == 1:
        val = float(v.coeffs[0, 0])
        return val, val
    if m == M + 1:
        val = float(v.coeffs[-1, -1])
        return -val, val
    vminus = float(v.coeffs[m - 2, -1])
    vplus = float(v.coeffs[m - 1, 0])
    return vplus - vminus, 0.5 * (vplus + vminus)


class BlockTridiagonalMatrix:
    """Block-tridiagonal operator with M diagonal blocks of size s = k+1."""

    def __init__(self, diag: np.ndarray, sub: np.ndarray, sup: np.ndarray):
        self.diag = diag
        self.sub = sub
        self.sup = sup
        self.nblocks = diag.shape[0]
        self.block_size = diag.shape[1]

    @classmethod
    def zeros(cls, nblocks: int, block_size: int) -> "BlockTridiagonalMatrix":
        s = block_size
        return cls(
            np.zeros((nblocks, s, s)),
            np.zeros((max(nblocks - 1, 0), s, s)),
            np.zeros((max(nblocks - 1, 0), s, s)),
        )

    def __add__(self, other: "BlockTridiagonalMatrix") -> "BlockTridiagonalMatrix":
        return BlockTridiagonalMatrix(
            self.diag + other.diag, self.sub + other.sub, self.sup + other.sup
        )

    def __sub__(self, other: "BlockTridiagonalMatrix") -> "BlockTridiagonalMatrix":
        return BlockTridiagonalMatrix(
            self.diag - other.diag, self.sub - other.sub, self.sup - other.sup
        )

    def transpose(self) -> "BlockTridiagonalMatrix":
        swap = (0, 2, 1)
        return BlockTridiagonalMatrix(
            self.diag.transpose(swap),
            self.sup.transpose(swap),
            self.sub.transpose(swap),
        )

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """Apply to x of shape (M, s) or the flat equivalent."""
        flat = x.ndim == 1
        xb = x.reshape(self.nblocks, self.block_size)
        y = np.einsum("mij,mj->mi", self.diag, xb)
        if self.nblocks > 1:
            y[:-1] += np.einsum("mij,mj->mi", self.sup, xb[1:])
            y[1:] += np.einsum("mij,mj->mi", self.sub, xb[:-1])
        return y.ravel() if flat else y

    def to_dense(self) -> np.ndarray:
        s, M = self.block_size, self.nblocks
        dense = np.zeros((M * s, M * s))
        for e in range(M):
            dense[e * s : (e + 1) * s, e * s : (e + 1) * s] = self.diag[e]
            if e + 1 < M:
                dense[(e + 1) * s : (e + 2) * s, e * s : (e + 1) * s] = self.sub[e]
                dense[e * s : (e + 1) * s, (e + 1) * s : (e + 2) * s] = self.sup[e]
        return dense

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return solve_block_tridiagonal(self, rhs)


def solve_block_tridiagonal(matrix: BlockTridiagonalMatrix, rhs: np.ndarray) -> np.ndarray:
    """Block Thomas elimination with partially pivoted block solves.

    One step of iterative refinement is applied if the first pass leaves a
    residual above 1e-10 relative to the right-hand side.
    """
    flat = rhs.ndim == 1
    b = rhs.reshape(matrix.nblocks, matrix.block_size)

    def sweep(b_in: np.ndarray) -> np.ndarray:
        M = matrix.nblocks
        diag_mod = matrix.diag.copy()
        rhs_mod = b_in.copy()
        for e in range(1, M):
            try:
                # W = sub[e-1] @ inv(diag_mod[e-1]) via a transposed solve.
                w = np.linalg.solve(diag_mod[e - 1].T, matrix.sub[e - 1].T).T
            except np.linalg.LinAlgError:
                raise SolverError(f"singular diagonal block at element {e}") from None
            diag_mod[e] -= w @ matrix.sup[e - 1]
            rhs_mod[e] -= w @ rhs_mod[e - 1]
        x = np.empty_like(rhs_mod)
        try:
            x[M - 1] = np.linalg.solve(diag_mod[M - 1], rhs_mod[M - 1])
            for e in range(M - 2, -1, -1):
                x[e] = np.linalg.solve(diag_mod[e], rhs_mod[e] - matrix.sup[e] @ x[e + 1])
        except np.linalg.LinAlgError:
            raise SolverError("singular diagonal block in back substitution") from None
        return x

    x = sweep(b)
    bnorm = np.linalg.norm(b)
    residual = np.linalg.norm(matrix.matvec(x) - b)
    if residual > 1e-10 * max(bnorm, 1e-300):
        x = x + sweep(b - matrix.matvec(x))
        residual = np.linalg.norm(matrix.matvec(x) - b)
        if residual > 1e-10 * max(bnorm, 1e-300):
            raise SolverError(
                f"block solve residual {residual:.3e} exceeds 1e-10 * |rhs| = {1e-10 * bnorm:.3e}"
            )
    return x.ravel() if flat else x


def assemble_B1(space: DGSpace, Kcoef, ccoef) -> BlockTridiagonalMatrix:
    """Volume part: sum over elements of (K u_y v_y + c u v).

    K must be strictly positive and c nonnegative at every volume quadrature
    point; violations raise CoefficientError.
    """
    yq = space.volume_points_phys
    Kv = _sample(Kcoef, yq)
    cv = _sample(ccoef, yq)
    if not np.all(Kv > 0.0):
        bad = yq[Kv <= 0.0].ravel()[0]
        raise CoefficientError(f"diffusion coefficient not positive at y={bad:.6g}")
    if not np.all(cv >= 0.0):
        bad = yq[cv < 0.0].ravel()[0]
        raise CoefficientError(f"reaction coefficient negative at y={bad:.6g}")
    h = space.mesh.h
    w = space.volume_rule.weights
    stiff = (2.0 / h) * np.einsum("mq,qi,qj->mij", w * Kv, space.dphi_vol, space.dphi_vol)
    mass = (0.5 * h) * np.einsum("mq,qi,qj->mij", w * cv, space.phi_vol, space.phi_vol)
    out = BlockTridiagonalMatrix.zeros(space.mesh.M, space.k + 1)
    out.diag += stiff + mass
    return out


def assemble_B2(space: DGSpace, Kcoef) -> BlockTridiagonalMatrix:
    """Flux part: sum over nodes of {K u_y}[v], trial derivative against test jump."""
    M = space.mesh.M
    two_h = 2.0 / space.mesh.h
    e0, ek = space.phi_left, space.phi_right
    dL, dR = space.dphi_left, space.dphi_right
    nodes = space.mesh.nodes
    Kn = _sample(Kcoef, nodes)
    out = BlockTridiagonalMatrix.zeros(M, space.k + 1)

    out.diag[0] += Kn[0] * two_h * np.outer(e0, dL)
    out.diag[M - 1] -= Kn[M] * two_h * np.outer(ek, dR)
    for m in range(2, M + 1):
        eL, eR = m - 2, m - 1
        scale = 0.5 * two_h * Kn[m - 1]
        out.diag[eR] += scale * np.outer(e0, dL)
        out.sub[eL] += scale * np.outer(e0, dR)
        out.sup[eL] -= scale * np.outer(ek, dL)
        out.diag[eL] -= scale * np.outer(ek, dR)
    return out


def assemble_B3(space: DGSpace) -> BlockTridiagonalMatrix:
    """Penalty part: sum over nodes of sigma_m [u][v]."""
    M = space.mesh.M
    e0, ek = space.phi_left, space.phi_right
    sig = space.sigma
    out = BlockTridiagonalMatrix.zeros(M, space.k + 1)
    out.diag[0] += sig[0] * np.outer(e0, e0)
    out.diag[M - 1] += sig[M] * np.outer(ek, ek)
    for m in range(2, M + 1):
        eL, eR = m - 2, m - 1
        s = sig[m - 1]
        out.diag[eR] += s * np.outer(e0, e0)
        out.diag[eL] += s * np.outer(ek, ek)
        out.sub[eL] -= s * np.outer(e0, ek)
        out.sup[eL] -= s * np.outer(ek, e0)
    return out


def assemble_full(space: DGSpace, Kcoef, ccoef) -> BlockTridiagonalMatrix:
    """The complete operator B1 + B2(u,v) - B2(v,u) + B3.

    The flux part enters antisymmetrically, so B(v,v) = B1(v,v) + B3(v,v)
    and coercivity holds for any nonnegative penalty.
    """
    b2 = assemble_B2(space, Kcoef)
    return assemble_B1(space, Kcoef, ccoef) + (b2 - b2.transpose()) + assemble_B3(space)


def load_vector(space: DGSpace, fsource, history=()) -> np.ndarray:
    """Source and weighted history integrated against every test function.

    history is a sequence of (weight, DGFunction) pairs on the same space;
    each contributes weight * (mass action on its coefficients).
    """
    yq = space.volume_points_phys
    fv = _sample(fsource, yq)
    w = space.volume_rule.weights
    rhs = (0.5 * space.mesh.h) * np.einsum("mq,qi->mi", fv * w[None, :], space.phi_vol)
    for weight, func in history:
        if func.space is not space:
            raise ArgumentContractError("history function lives on a different space")
        rhs += weight * (func.coeffs @ space.mass_block)
    return rhs


def project_initial(space: DGSpace, g) -> DGFunction:
    """Element-wise L2 projection of initial data onto the space."""
    edge = max(abs(float(g(0.0))), abs(float(g(space.mesh.ell))))
    if edge > 1e-9:
        raise CoefficientError(f"initial data must vanish at the boundary, got {edge:.3e}")
    yq = space.volume_points_phys
    gv = _sample(g, yq)
    w = space.volume_rule.weights
    rhs = (0.5 * space.mesh.h) * np.einsum("mq,qi->mi", gv * w[None, :], space.phi_vol)
    try:
        coeffs = np.linalg.solve(space.mass_block, rhs.T).T
    except np.linalg.LinAlgError as exc:
        raise SolverError("singular element mass matrix") from exc
    return DGFunction(space, coeffs)
