"""Fully-connected tensor network (FCTN) factors and contraction.

An order-n tensor is represented by n order-n factors. Factor ``k`` carries
the physical mode on its own axis ``k``; every other axis ``j`` holds a link
(rank) mode shared with factor ``j``, of size ``rank.link(j, k)``. Each entry
of the represented tensor is the sum, over all joint link index tuples, of
the product of one entry from every factor.

``contract_all`` evaluates this by sequential pairwise contraction with
symbolic mode labels. ``eval_element`` and ``eval_full_naive`` evaluate the
defining sum literally by enumerating link tuples; they have exponential cost
and exist as independent reference oracles for testing.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import prod

import numpy as np

from .tensors import ModeSplit, gen_unfold

__all__ = [
    "FctnRank",
    "FctnFactors",
    "LooComposite",
    "contract_all",
    "eval_element",
    "eval_full_naive",
    "leave_one_out",
    "unfold_leave_one_out",
    "validate_factors",
]

ORACLE_TUPLE_LIMIT = 10**6


class FctnRank:
    """Strictly upper-triangular table of link sizes ``R[j, k]`` for j < k."""

    def __init__(self, links):
        links = np.asarray(links, dtype=int)
        if links.ndim != 2 or links.shape[0] != links.shape[1]:
            raise ValueError(f"links must be a square matrix, got shape {links.shape}")
        order = int(links.shape[0])
        if order < 1:
            raise ValueError("order must be at least 1")
        for j in range(order):
            for k in range(j + 1, order):
                if links[j, k] < 1:
                    raise ValueError(f"link size R[{j},{k}]={links[j, k]} must be >= 1")
        # canonical storage keeps only the used triangle
        self.links = np.triu(links, 1)
        self.order = order

    @classmethod
    def uniform(cls, order: int, size: int) -> "FctnRank":
        return cls(np.full((order, order), int(size)))

    @classmethod
    def capped(cls, dims, cap: int) -> "FctnRank":
        """Heuristic table ``R[j, k] = min(I_j, I_k, cap)``."""
        if cap < 1:
            raise ValueError("cap must be >= 1")
        n = len(dims)
        m = np.zeros((n, n), dtype=int)
        for j in range(n):
            for k in range(j + 1, n):
                m[j, k] = min(int(dims[j]), int(dims[k]), int(cap))
        return cls(m)

    def link(self, j: int, k: int) -> int:
        if j == k or not (0 <= j < self.order and 0 <= k < self.order):
            raise ValueError(f"invalid link pair ({j}, {k}) for order {self.order}")
        a, b = (j, k) if j < k else (k, j)
        return int(self.links[a, b])

    def factor_shape(self, k: int, dims) -> tuple[int, ...]:
        """Shape of factor ``k`` for physical sizes ``dims``."""
        if len(dims) != self.order:
            raise ValueError(f"dims length {len(dims)} != order {self.order}")
        return tuple(
            int(dims[k]) if m == k else self.link(m, k) for m in range(self.order)
        )

    def __eq__(self, other):
        return isinstance(other, FctnRank) and np.array_equal(self.links, other.links)

    def __repr__(self):
        return f"FctnRank(order={self.order}, links={self.links.tolist()})"


class FctnFactors:
    """Ordered list of FCTN factors, stored as float arrays."""

    def __init__(self, factors):
        factors = [np.asarray(g, dtype=float) for g in factors]
        if not factors:
            raise ValueError("need at least one factor")
        n = len(factors)
        for k, g in enumerate(factors):
            if g.ndim != n:
                raise ValueError(f"factor {k} has order {g.ndim}, expected {n}")
        self.factors = factors

    @property
    def order(self) -> int:
        return len(self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(g.shape[k] for k, g in enumerate(self.factors))

    def rank(self) -> FctnRank:
        """Link table read off the factor shapes."""
        n = self.order
        m = np.zeros((n, n), dtype=int)
        for j in range(n):
            for k in range(j + 1, n):
                m[j, k] = self.factors[k].shape[j]
        return FctnRank(m)

    def copy(self) -> "FctnFactors":
        return FctnFactors([g.copy() for g in self.factors])

    def __getitem__(self, k: int) -> np.ndarray:
        return self.factors[k]

    def __len__(self) -> int:
        return len(self.factors)


def validate_factors(f: FctnFactors, rank: FctnRank) -> list[str]:
    """Check factor shapes against a rank table; returns one message per
    violation, empty when consistent."""
    problems: list[str] = []
    n = f.order
    if rank.order != n:
        return [f"rank table has order {rank.order}, factors have order {n}"]
    for k, g in enumerate(f.factors):
        for m in range(n):
            actual = g.shape[m]
            if m == k:
                if actual < 1:
                    problems.append(
                        f"factor {k} axis {m} (physical): size {actual} must be >= 1"
                    )
                continue
            expected = rank.link(m, k)
            if actual != expected:
                problems.append(
                    f"factor {k} axis {m} (link to factor {m}): "
                    f"expected {expected}, got {actual}"
                )
    return problems


def _labels(k: int, order: int) -> tuple:
    return tuple(
        ("phys", k) if m == k else ("link", min(m, k), max(m, k))
        for m in range(order)
    )


def _check_links(f: FctnFactors) -> None:
    n = f.order
    bad = []
    for j in range(n):
        for k in range(j + 1, n):
            a, b = f.factors[j].shape[k], f.factors[k].shape[j]
            if a != b:
                bad.append(f"link ({j},{k}): factor {j} axis {k} has {a}, factor {k} axis {j} has {b}")
    if bad:
        raise ValueError("inconsistent link sizes: " + "; ".join(bad))


def _contract(a, la, b, lb):
    shared = [lab for lab in la if lab in lb]
    ax_a = [la.index(lab) for lab in shared]
    ax_b = [lb.index(lab) for lab in shared]
    out = np.tensordot(a, b, axes=(ax_a, ax_b))
    keep = [lab for lab in la if lab not in shared] + [lab for lab in lb if lab not in shared]
    return out, tuple(keep)


def contract_all(f: FctnFactors) -> np.ndarray:
    """Contract the whole network into the dense order-n tensor it represents.

    Factors are absorbed left to right; every pair shares exactly one link
    mode, so each step sums over all links between the running composite and
    the incoming factor.
    """
    _check_links(f)
    n = f.order
    if n == 1:
        return f.factors[0].copy()
    w, lw = f.factors[0], _labels(0, n)
    for k in range(1, n):
        w, lw = _contract(w, lw, f.factors[k], _labels(k, n))
    order_ix = sorted(range(n), key=lambda a: lw[a][1])
    return np.ascontiguousarray(np.transpose(w, order_ix))


def _link_axes(f: FctnFactors):
    n = f.order
    pairs = [(j, k) for j in range(n) for k in range(j + 1, n)]
    sizes = [f.factors[k].shape[j] for j, k in pairs]
    return pairs, sizes


def eval_element(f: FctnFactors, idx) -> float:
    """Single-entry reference evaluation by explicit link enumeration.

    Exponential in the number of links; refuses instances with more than
    ``ORACLE_TUPLE_LIMIT`` link tuples.
    """
    _check_links(f)
    n = f.order
    idx = tuple(int(i) for i in idx)
    if len(idx) != n:
        raise ValueError(f"index has length {len(idx)}, tensor has order {n}")
    dims = f.dims
    for m, i in enumerate(idx):
        if not 0 <= i < dims[m]:
            raise ValueError(f"index {i} out of range for mode {m} of size {dims[m]}")
    pairs, sizes = _link_axes(f)
    total = prod(sizes)
    if total > ORACLE_TUPLE_LIMIT:
        raise ValueError(
            f"{total} link tuples exceed the oracle limit {ORACLE_TUPLE_LIMIT}"
        )
    acc = 0.0
    for assignment in itertools.product(*(range(s) for s in sizes)):
        links = dict(zip(pairs, assignment))
        term = 1.0
        for k in range(n):
            pos = tuple(
                idx[k] if m == k else links[(min(m, k), max(m, k))] for m in range(n)
            )
            term *= f.factors[k][pos]
        acc += term
    return acc


def eval_full_naive(f: FctnFactors) -> np.ndarray:
    """Dense reference reconstruction by the same link enumeration as
    :func:`eval_element`, vectorized only over the physical fibers."""
    _check_links(f)
    n = f.order
    pairs, sizes = _link_axes(f)
    total = prod(sizes)
    if total > ORACLE_TUPLE_LIMIT:
        raise ValueError(
            f"{total} link tuples exceed the oracle limit {ORACLE_TUPLE_LIMIT}"
        )
    out = np.zeros(f.dims)
    for assignment in itertools.product(*(range(s) for s in sizes)):
        links = dict(zip(pairs, assignment))
        term = None
        for k in range(n):
            sel = tuple(
                slice(None) if m == k else links[(min(m, k), max(m, k))]
                for m in range(n)
            )
            fiber = f.factors[k][sel]
            term = fiber if term is None else np.multiply.outer(term, fiber)
        out += term
    return out


@dataclass(frozen=True)
class LooComposite:
    """Contraction of every factor except one, with symbolic mode labels.

    Canonical mode order walks the remaining factors ascending; for a factor
    below the excluded index the mode pair is (physical, link to excluded),
    above it the pair is (link to excluded, physical).
    """

    values: np.ndarray
    labels: tuple
    excluded: int


def leave_one_out(f: FctnFactors, i: int) -> LooComposite:
    """Contract all factors except factor ``i``.

    The links to the excluded factor stay open, so the composite has order
    2*(n-1): one physical and one open link mode per remaining factor.
    """
    n = f.order
    if n < 2:
        raise ValueError("leave_one_out needs order >= 2")
    if not 0 <= i < n:
        raise ValueError(f"factor index {i} out of range for order {n}")
    _check_links(f)
    rest = [k for k in range(n) if k != i]
    w, lw = f.factors[rest[0]], _labels(rest[0], n)
    for k in rest[1:]:
        w, lw = _contract(w, lw, f.factors[k], _labels(k, n))
    target = []
    for k in rest:
        link = ("link", min(i, k), max(i, k))
        phys = ("phys", k)
        target.extend((phys, link) if k < i else (link, phys))
    w = np.transpose(w, [lw.index(lab) for lab in target])
    return LooComposite(np.ascontiguousarray(w), tuple(target), i)


def unfold_leave_one_out(comp: LooComposite, i: int) -> np.ndarray:
    """Matricize a leave-one-out composite.

    Rows run over the open link modes toward the excluded factor, ordered by
    ascending partner; columns run over the physical modes in ascending
    order. With this layout the represented tensor's mode-``i`` unfolding
    equals the mode-``i`` unfolding of factor ``i`` times this matrix.
    """
    if comp.excluded != i:
        raise ValueError(
            f"label mismatch: composite excludes factor {comp.excluded}, not {i}"
        )
    if comp.values.ndim != len(comp.labels):
        raise ValueError("label mismatch: label count differs from composite order")
    links = sorted(
        (lab for lab in comp.labels if lab[0] == "link"),
        key=lambda lab: lab[1] + lab[2] - i,
    )
    phys = sorted((lab for lab in comp.labels if lab[0] == "phys"), key=lambda lab: lab[1])
    if len(links) != len(phys) or len(links) + len(phys) != len(comp.labels):
        raise ValueError("label mismatch: composite labels are not link/physical pairs")
    perm = tuple(comp.labels.index(lab) for lab in links + phys)
    return gen_unfold(comp.values, ModeSplit(perm, len(links)))
