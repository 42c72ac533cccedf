"""K-theory shadow of the model: classes, Euler pairing, reflections.

K_0 is free on the projectives; a summand ``P_v[s]`` contributes
``(-1)^s`` at position ``v``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .algebra import AlgebraSpec
from .complexes import ComplexError, TwistedComplex, ext_table, projective


@dataclass(frozen=True)
class LatticeModel:
    labels: tuple
    gram: tuple  # gram[i][j] = chi(P_i, P_j)
    cy_dimension: int
    algebra: AlgebraSpec | None = None

    @classmethod
    def of_algebra(cls, algebra: AlgebraSpec) -> "LatticeModel":
        ps = [projective(algebra, v) for v in algebra.idempotents]
        gram = tuple(tuple(ext_table(a, b).euler() for b in ps) for a in ps)
        return cls(tuple(algebra.idempotents), gram, algebra.cy_dimension, algebra)

    @property
    def rank(self) -> int:
        return len(self.labels)

    def basis_vector(self, i: int) -> tuple:
        return tuple(1 if j == i else 0 for j in range(self.rank))

    def invariant_violations(self) -> list[str]:
        out = []
        sgn = (-1) ** self.cy_dimension
        for i in range(self.rank):
            for j in range(self.rank):
                if self.gram[i][j] != sgn * self.gram[j][i]:
                    out.append(f"gram[{i}][{j}] != (-1)^d gram[{j}][{i}]")
        return out


def class_of(x: TwistedComplex, m: LatticeModel) -> tuple:
    if m.algebra is not None and x.algebra is not m.algebra:
        raise ComplexError("object is not over the lattice model's algebra")
    pos = {v: i for i, v in enumerate(m.labels)}
    out = [0] * m.rank
    for v, s in x.summands:
        out[pos[v]] += -1 if s % 2 else 1
    return tuple(out)


def euler_pairing(m: LatticeModel, u, v) -> int:
    return sum(u[i] * m.gram[i][j] * v[j]
               for i in range(m.rank) if u[i] for j in range(m.rank) if v[j])


def reflect(m: LatticeModel, e, v) -> tuple:
    """v - chi(e, v) e."""
    c = euler_pairing(m, e, v)
    return tuple(vi - c * ei for vi, ei in zip(v, e))


def lattice_commute(m: LatticeModel, e, f) -> bool:
    for i in range(m.rank):
        b = m.basis_vector(i)
        if reflect(m, e, reflect(m, f, b)) != reflect(m, f, reflect(m, e, b)):
            return False
    return True
