"""State-vector layouts, structured unitary operators, and measurements.

Quantum states are numpy complex128 vectors. A query algorithm's register
layout is (index, answer, workspace) with the index axis outermost inside a
flat vector; a machine built by the compiler prepends a cache register (the
gadget work qubits) as the new outermost axis, so lifting an algorithm
operator to the machine space is a per-block application and stays
numerically identical block by block.

Structured operators are applied analytically (O(changed amplitudes), never
via dense matrices); every operator can still materialize itself densely for
unitarity checks on small dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SpecError

UNITARY_ATOL = 1e-9     # max-norm tolerance for U^dagger U - I
NORM_ATOL = 1e-9        # state-norm drift tolerance
BRANCH_PRUNE = 1e-12    # measurement branches below this probability are dropped
DENSE_CHECK_LIMIT = 512   # to_dense() validation cap (structured ops above this
                          # are unitary by construction; runtime norm checks guard)


@dataclass(frozen=True)
class RegisterLayout:
    """Index register of dimension `index_dim`, answer bit, workspace of
    dimension `work_dim`. flat = (i * 2 + b) * work_dim + w."""

    index_dim: int
    work_dim: int = 1

    @property
    def dim(self) -> int:
        return self.index_dim * 2 * self.work_dim

    def flat(self, i: int, b: int, w: int = 0) -> int:
        return (i * 2 + b) * self.work_dim + w

    def unpack(self, flat: int) -> tuple[int, int, int]:
        w = flat % self.work_dim
        rest = flat // self.work_dim
        return rest // 2, rest % 2, w

    def basis_state(self, i: int = 0, b: int = 0, w: int = 0) -> np.ndarray:
        psi = np.zeros(self.dim, dtype=np.complex128)
        psi[self.flat(i, b, w)] = 1.0
        return psi


class Op:
    """Base operator: unitary action on a flat state vector."""

    dim: int

    def apply(self, psi: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def to_dense(self) -> np.ndarray:
        if self.dim > DENSE_CHECK_LIMIT:
            raise SpecError(f"dimension {self.dim} too large to materialize")
        out = np.zeros((self.dim, self.dim), dtype=np.complex128)
        basis = np.zeros(self.dim, dtype=np.complex128)
        for j in range(self.dim):
            basis[:] = 0.0
            basis[j] = 1.0
            out[:, j] = self.apply(basis.copy())
        return out

    def describe(self) -> dict:
        raise NotImplementedError


def check_unitary(op: Op) -> None:
    """Assert ||U^dagger U - I||_max <= 1e-9 by materializing the operator."""
    u = op.to_dense()
    gram = u.conj().T @ u
    dev = np.abs(gram - np.eye(op.dim)).max()
    if dev > UNITARY_ATOL:
        raise SpecError(f"operator {op.describe()} deviates from unitary by {dev:.3e}")


class DenseOp(Op):
    def __init__(self, matrix: np.ndarray, name: str = "dense"):
        matrix = np.asarray(matrix, dtype=np.complex128)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise SpecError("dense operator must be square")
        self.matrix = matrix
        self.dim = matrix.shape[0]
        self.name = name

    def apply(self, psi: np.ndarray) -> np.ndarray:
        return self.matrix @ psi

    def to_dense(self) -> np.ndarray:
        return self.matrix.copy()

    def describe(self) -> dict:
        return {"op": "dense", "matrix": [[ [float(z.real), float(z.imag)] for z in row ] for row in self.matrix]}


class IdentityOp(Op):
    def __init__(self, dim: int):
        self.dim = dim

    def apply(self, psi: np.ndarray) -> np.ndarray:
        return psi

    def describe(self) -> dict:
        return {"op": "identity", "dim": self.dim}


class ComposeOp(Op):
    """Applies the listed operators in order (ops[0] first)."""

    def __init__(self, ops: list[Op]):
        if not ops:
            raise SpecError("empty composition")
        if len({op.dim for op in ops}) != 1:
            raise SpecError("composition mixes dimensions")
        self.ops = tuple(ops)
        self.dim = ops[0].dim

    def apply(self, psi: np.ndarray) -> np.ndarray:
        for op in self.ops:
            psi = op.apply(psi)
        return psi

    def describe(self) -> dict:
        return {"op": "compose", "ops": [op.describe() for op in self.ops]}


class OnIndexOp(Op):
    """Lift a dense matrix on the index register: M (x) I_answer (x) I_work."""

    def __init__(self, layout: RegisterLayout, matrix: np.ndarray, name: str):
        self.layout = layout
        self.matrix = np.asarray(matrix, dtype=np.complex128)
        if self.matrix.shape != (layout.index_dim, layout.index_dim):
            raise SpecError("index operator has wrong shape")
        self.dim = layout.dim
        self.name = name

    def apply(self, psi: np.ndarray) -> np.ndarray:
        cols = psi.reshape(self.layout.index_dim, 2 * self.layout.work_dim)
        return (self.matrix @ cols).reshape(-1)

    def describe(self) -> dict:
        return {
            "op": "on-index",
            "name": self.name,
            "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in self.matrix],
        }


class OnAnswerOp(Op):
    """Lift a 2x2 matrix on the answer bit."""

    def __init__(self, layout: RegisterLayout, matrix: np.ndarray, name: str):
        self.layout = layout
        self.matrix = np.asarray(matrix, dtype=np.complex128)
        if self.matrix.shape != (2, 2):
            raise SpecError("answer operator must be 2x2")
        self.dim = layout.dim
        self.name = name

    def apply(self, psi: np.ndarray) -> np.ndarray:
        grid = psi.reshape(self.layout.index_dim, 2, self.layout.work_dim)
        out = np.einsum("ab,ibw->iaw", self.matrix, grid)
        return out.reshape(-1)

    def describe(self) -> dict:
        return {"op": "on-answer", "name": self.name}


class DiffusionOp(Op):
    """Reflection about the uniform index superposition: 2|u><u| - I."""

    def __init__(self, layout: RegisterLayout):
        self.layout = layout
        self.dim = layout.dim

    def apply(self, psi: np.ndarray) -> np.ndarray:
        grid = psi.reshape(self.layout.index_dim, 2 * self.layout.work_dim)
        mean = grid.mean(axis=0)
        return (2.0 * mean - grid).reshape(-1)

    def describe(self) -> dict:
        return {"op": "diffusion", "n": self.layout.index_dim}


class PrepReflectOp(Op):
    """Real reflection on the index register exchanging e_src with the
    uniform superposition (Householder through their bisector). Self-inverse."""

    def __init__(self, layout: RegisterLayout, src: int = 0):
        self.layout = layout
        self.dim = layout.dim
        self.src = src
        n = layout.index_dim
        u = np.full(n, 1.0 / np.sqrt(n))
        v = -u
        v[src] += 1.0          # v = e_src - u
        norm = np.linalg.norm(v)
        if norm < 1e-15:       # n == 1: e_src already uniform
            self.w = None
        else:
            self.w = v / norm

    def apply(self, psi: np.ndarray) -> np.ndarray:
        if self.w is None:
            return psi
        grid = psi.reshape(self.layout.index_dim, 2 * self.layout.work_dim)
        coeff = self.w @ grid
        return (grid - 2.0 * np.outer(self.w, coeff)).reshape(-1)

    def describe(self) -> dict:
        return {"op": "uniform-prep", "n": self.layout.index_dim, "src": self.src}


class IndexPairHOp(Op):
    """Hadamard mix of two index values a, b (identity elsewhere):
    |a> -> (|a>+|b>)/sqrt2, |b> -> (|a>-|b>)/sqrt2. Self-inverse."""

    def __init__(self, layout: RegisterLayout, a: int, b: int):
        self.layout = layout
        self.dim = layout.dim
        self.a, self.b = a, b

    def apply(self, psi: np.ndarray) -> np.ndarray:
        grid = psi.reshape(self.layout.index_dim, 2 * self.layout.work_dim)
        va = grid[self.a].copy()
        vb = grid[self.b].copy()
        r = 1.0 / np.sqrt(2.0)
        grid[self.a] = r * (va + vb)
        grid[self.b] = r * (va - vb)
        return grid.reshape(-1)

    def describe(self) -> dict:
        return {"op": "index-pair-h", "a": self.a, "b": self.b}


class IndexPermOp(Op):
    """Permutation of index values given as disjoint transpositions."""

    def __init__(self, layout: RegisterLayout, swaps: list[tuple[int, int]]):
        self.layout = layout
        self.dim = layout.dim
        seen: set[int] = set()
        for a, b in swaps:
            if a in seen or b in seen or a == b:
                raise SpecError("swaps must be disjoint transpositions")
            seen.update((a, b))
        self.swaps = tuple(swaps)

    def apply(self, psi: np.ndarray) -> np.ndarray:
        grid = psi.reshape(self.layout.index_dim, 2 * self.layout.work_dim)
        for a, b in self.swaps:
            grid[[a, b]] = grid[[b, a]]
        return grid.reshape(-1)

    def describe(self) -> dict:
        return {"op": "index-swap", "swaps": [list(s) for s in self.swaps]}


class BasisSwapOp(Op):
    """Transposition of two flat basis vectors of the full space."""

    def __init__(self, dim: int, a: int, b: int):
        self.dim = dim
        self.a, self.b = a, b

    def apply(self, psi: np.ndarray) -> np.ndarray:
        if self.a != self.b:
            psi[self.a], psi[self.b] = psi[self.b], psi[self.a]
        return psi

    def describe(self) -> dict:
        return {"op": "basis-swap", "a": self.a, "b": self.b}


class LiftedOp(Op):
    """op (x) I on a prepended outermost register: apply per contiguous block.

    Block b of the lifted space is exactly the original space, so the float
    work inside each block is identical to applying `op` directly.
    """

    def __init__(self, op: Op, blocks: int):
        self.op = op
        self.blocks = blocks
        self.dim = op.dim * blocks

    def apply(self, psi: np.ndarray) -> np.ndarray:
        d = self.op.dim
        for blk in range(self.blocks):
            seg = psi[blk * d : (blk + 1) * d]
            psi[blk * d : (blk + 1) * d] = self.op.apply(seg)
        return psi

    def describe(self) -> dict:
        return {"op": "lifted", "blocks": self.blocks, "inner": self.op.describe()}


class CacheFlipOp(Op):
    """XOR a cache-register bit on one index branch. MUTATES psi.

    The vector is laid out as (cache, index, answer, work). For every cache
    value c the (c, block) row is swapped with (c ^ mask, block); other index
    branches are untouched. Self-inverse, so a second application unloads
    what the first loaded.
    """

    def __init__(self, cache_dim: int, p_pad: int, d_w: int, block: int, mask: int):
        self.cache_dim = cache_dim
        self.p_pad = p_pad
        self.d_w = d_w
        self.block = block
        self.mask = mask
        self.dim = cache_dim * p_pad * 2 * d_w
        self._perm = np.arange(cache_dim) ^ mask

    def apply(self, psi: np.ndarray) -> np.ndarray:
        view = psi.reshape(self.cache_dim, self.p_pad, 2, self.d_w)
        view[:, self.block] = view[self._perm, self.block]
        return psi

    def describe(self) -> dict:
        return {
            "op": "cache-flip", "cache_dim": self.cache_dim, "p_pad": self.p_pad,
            "d_w": self.d_w, "block": self.block, "mask": self.mask,
        }


class GadgetFlipOp(Op):
    """Controlled answer flip on one index branch. MUTATES psi.

    Swaps answer 0 <-> 1 on (c, block) rows for every cache value c in
    `flips`: the gadget value of (cache contents, remembered y block) decides
    which branches get the oracle flip.
    """

    def __init__(self, cache_dim: int, p_pad: int, d_w: int, block: int,
                 flips: tuple[int, ...]):
        self.cache_dim = cache_dim
        self.p_pad = p_pad
        self.d_w = d_w
        self.block = block
        self.flips = tuple(flips)
        self.dim = cache_dim * p_pad * 2 * d_w
        self._sel = np.array(self.flips, dtype=np.intp)

    def apply(self, psi: np.ndarray) -> np.ndarray:
        if self.flips:
            view = psi.reshape(self.cache_dim, self.p_pad, 2, self.d_w)
            tmp = view[self._sel, self.block, 0].copy()
            view[self._sel, self.block, 0] = view[self._sel, self.block, 1]
            view[self._sel, self.block, 1] = tmp
        return psi

    def describe(self) -> dict:
        return {
            "op": "controlled-flip", "cache_dim": self.cache_dim,
            "p_pad": self.p_pad, "d_w": self.d_w, "block": self.block,
            "flips": list(self.flips),
        }


# --- answer-bit constants ----------------------------------------------------

_R = 1.0 / np.sqrt(2.0)
MINUS_PREP = np.array([[_R, _R], [-_R, _R]])   # |0> -> |->  (X then H)
UNMINUS = np.array([[_R, -_R], [_R, _R]])      # |-> -> |0>  (H then X)


def minus_prep_op(layout: RegisterLayout) -> Op:
    return OnAnswerOp(layout, MINUS_PREP, "minus-prep")


def unminus_op(layout: RegisterLayout) -> Op:
    return OnAnswerOp(layout, UNMINUS, "unminus")


# --- measurements ------------------------------------------------------------


class Measurement:
    """Orthogonal measurement given as a partition of the computational basis.

    outcomes maps a label to a sorted array of flat basis indices; the groups
    must be disjoint and cover the space (projectors are then automatically
    idempotent, pairwise orthogonal, and sum to the identity).
    """

    def __init__(self, dim: int, outcomes: dict[object, np.ndarray], name: str = "basis"):
        self.dim = dim
        self.name = name
        self.outcomes = {
            label: np.asarray(idx, dtype=np.int64) for label, idx in outcomes.items()
        }
        self.validate()

    def validate(self) -> None:
        seen = np.zeros(self.dim, dtype=bool)
        for label, idx in self.outcomes.items():
            if idx.size and (idx.min() < 0 or idx.max() >= self.dim):
                raise SpecError(f"outcome {label!r} indexes outside the space")
            if seen[idx].any():
                raise SpecError(f"outcome {label!r} overlaps another projector")
            seen[idx] = True
        if not seen.all():
            raise SpecError("projectors do not sum to the identity")

    def branches(self, psi: np.ndarray):
        """Yield (label, probability, collapsed renormalized state) for every
        outcome with probability above the pruning threshold."""
        weights = np.abs(psi) ** 2
        for label, idx in self.outcomes.items():
            p = float(weights[idx].sum())
            if p <= BRANCH_PRUNE:
                continue
            collapsed = np.zeros_like(psi)
            collapsed[idx] = psi[idx] / np.sqrt(p)
            yield label, p, collapsed

    def describe(self) -> dict:
        return {
            "measure": self.name,
            "outcomes": {str(k): [int(i) for i in v] for k, v in self.outcomes.items()},
        }


class CompleteMeasurement(Measurement):
    """Complete computational-basis measurement: one outcome per basis index."""

    def __init__(self, dim: int):
        self.dim = dim
        self.name = "complete"
        self.outcomes = None  # generated lazily; validation is structural

    def validate(self) -> None:
        pass

    def branches(self, psi: np.ndarray):
        weights = np.abs(psi) ** 2
        for flat in np.nonzero(weights > BRANCH_PRUNE)[0]:
            p = float(weights[flat])
            collapsed = np.zeros_like(psi)
            collapsed[flat] = psi[flat] / np.sqrt(p)
            yield int(flat), p, collapsed

    def describe(self) -> dict:
        return {"measure": "complete", "dim": self.dim}


def check_norm(psi: np.ndarray, where: str = "") -> None:
    drift = abs(float(np.vdot(psi, psi).real) - 1.0)
    if drift > NORM_ATOL:
        raise SpecError(f"state norm drifted by {drift:.3e} {where}".rstrip())
