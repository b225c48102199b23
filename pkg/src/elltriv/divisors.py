"""Matrix null/pole divisors and base divisors on the torus."""
from __future__ import annotations

from dataclasses import dataclass, field

from .config import DEFAULT
from .nullpole import adjoint, is_admissible
from .torus import EllipticCurve, TorusPoint, lattice_equivalent, reduce


def _point(curve, p) -> TorusPoint:
    return p if isinstance(p, TorusPoint) else reduce(curve, complex(p))


@dataclass
class MatrixDivisor:
    """Finite assignment point -> nontrivial admissible Sylvester data set of rank r."""

    curve: EllipticCurve
    r: int
    entries: list = field(default_factory=list)  # [(TorusPoint, SylvesterDataSet)]
    check: bool = True

    def __post_init__(self):
        cleaned = []
        for p, T in self.entries:
            p = _point(self.curve, p)
            if T.r != self.r:
                raise ValueError(f"triple of rank {T.r} in a rank {self.r} divisor")
            if T.nz == 0 and T.npi == 0:
                continue
            if self.check:
                ok, why = is_admissible(T)
                if not ok:
                    raise ValueError(f"triple at {p.rep} is not admissible: {', '.join(why)}")
            for q, _ in cleaned:
                if q.same_as(p):
                    raise ValueError(f"support point {p.rep} listed twice")
            cleaned.append((p, T))
        self.entries = cleaned

    @property
    def support(self) -> list[TorusPoint]:
        return [p for p, _ in self.entries]

    def __len__(self):
        return len(self.entries)


@dataclass
class IndexPartition:
    """I: poles only, II: both, III: zeros only."""

    I: list
    II: list
    III: list

    @property
    def n_inf(self) -> int:
        return len(self.I)

    @property
    def n_c(self) -> int:
        return len(self.II)

    @property
    def n_0(self) -> int:
        return len(self.III)

    @property
    def nP(self) -> int:
        return self.n_inf + self.n_c

    @property
    def nZ(self) -> int:
        return self.n_0 + self.n_c


def degree(D: MatrixDivisor) -> int:
    return sum(T.nz - T.npi for _, T in D.entries)


def partition(D: MatrixDivisor) -> IndexPartition:
    I, II, III = [], [], []
    for idx, (_, T) in enumerate(D.entries):
        if T.npi and T.nz:
            II.append(idx)
        elif T.npi:
            I.append(idx)
        else:
            III.append(idx)
    return IndexPartition(I, II, III)


def adjoint_divisor(D: MatrixDivisor) -> MatrixDivisor:
    return MatrixDivisor(D.curve, D.r, [(p, adjoint(T)) for p, T in D.entries], check=False)


@dataclass
class BaseDivisor:
    """D0 = p1 - p0 at genus one: one simple pole p1 and the base point p0."""

    curve: EllipticCurve
    p1: TorusPoint
    p0: TorusPoint

    def __post_init__(self):
        self.p1 = _point(self.curve, self.p1)
        self.p0 = _point(self.curve, self.p0)
        if self.p1.same_as(self.p0):
            raise ValueError("base point and pole of D0 must differ")

    @property
    def poles(self) -> list:
        return [(self.p1, 1)]


def is_cd_admissible(D0: BaseDivisor, D: MatrixDivisor, tol: float = DEFAULT.lattice_tol) -> bool:
    for p in D.support:
        for q in (D0.p0, D0.p1):
            if lattice_equivalent(D.curve, p.rep, q.rep, tol):
                return False
    return True
