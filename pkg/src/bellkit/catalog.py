"""Built-in inequality catalog.

Names:
  mermin-cglmp    the four-bracket family S^(K), classical bound K-1
  cglmp-bipartite its bipartite reduction (the CGLMP family in bracket form)
  mermin-sym      fully symmetric Mermin generalization, K = 2, 3, bound 2
  symm-A1..A9     the nine symmetric two-input three-output facet classes
  sliwa7-gen      symmetric K-outcome generalization of Sliwa's 7th
                  inequality, classical bound 6(K-1)
"""
from __future__ import annotations

from fractions import Fraction

from .expressions import (
    GE,
    LE,
    BellExpression,
    BracketTerm,
    SymmetricSumExpression,
    orbit_complete,
    orbit_complete_symmetric_sum,
)
from .scenario import Scenario, tripartite

F1 = Fraction(1)

# (coefficient map {(input combo, residue): weight}, written with one
# representative per input-combo orbit; completion adds the permutations)
_SYMM_323 = {
    "symm-A1": {((0, 0, 0), 2): 1, ((0, 0, 1), 1): -1, ((0, 1, 1), 1): -1,
                ((0, 1, 1), 2): -1, ((1, 1, 1), 2): 2},
    "symm-A2": {((0, 0, 0), 1): -2, ((0, 0, 1), 1): -1, ((0, 1, 1), 1): -2,
                ((1, 1, 1), 1): 2},
    "symm-A3": {((0, 0, 0), 1): -8, ((0, 0, 0), 2): -2, ((0, 0, 1), 1): -1,
                ((0, 0, 1), 2): 2, ((0, 1, 1), 1): -2, ((0, 1, 1), 2): -2,
                ((1, 1, 1), 1): 2, ((1, 1, 1), 2): -1},
    "symm-A4": {((0, 0, 0), 1): -2, ((0, 0, 0), 2): -1, ((0, 0, 1), 1): -1,
                ((0, 0, 1), 2): -2, ((0, 1, 1), 1): -2, ((0, 1, 1), 2): -1,
                ((1, 1, 1), 1): 5, ((1, 1, 1), 2): 4},
    "symm-A5": {((0, 0, 0), 1): -2, ((0, 0, 0), 2): -2, ((0, 0, 1), 1): -1,
                ((0, 0, 1), 2): -1, ((0, 1, 1), 1): -2, ((0, 1, 1), 2): -2,
                ((1, 1, 1), 1): 5, ((1, 1, 1), 2): 5},
    "symm-A6": {((0, 0, 0), 1): -1, ((0, 0, 1), 1): -1, ((0, 0, 1), 2): -1,
                ((0, 1, 1), 1): -3, ((0, 1, 1), 2): -1, ((1, 1, 1), 1): 4,
                ((1, 1, 1), 2): 3},
    "symm-A7": {((0, 0, 0), 1): -3, ((0, 0, 0), 2): -1, ((0, 0, 1), 1): -1,
                ((0, 0, 1), 2): -1, ((0, 1, 1), 1): -1, ((1, 1, 1), 1): 3,
                ((1, 1, 1), 2): 1},
    "symm-A8": {((0, 0, 0), 1): -6, ((0, 0, 0), 2): -3, ((0, 0, 1), 1): -1,
                ((0, 0, 1), 2): -2, ((0, 1, 1), 1): -1, ((0, 1, 1), 2): 1,
                ((1, 1, 1), 1): 3},
    "symm-A9": {((0, 0, 0), 1): -3, ((0, 0, 0), 2): 1, ((0, 0, 1), 1): -1,
                ((0, 1, 1), 1): -4, ((0, 1, 1), 2): -1, ((1, 1, 1), 1): 3,
                ((1, 1, 1), 2): 2},
}

CATALOG_NAMES = (
    "mermin-cglmp",
    "cglmp-bipartite",
    "mermin-sym",
    "sliwa7-gen",
) + tuple(sorted(_SYMM_323))


class UnknownInequalityError(KeyError):
    pass


def _term(weight, settings, offset=0):
    return BracketTerm(Fraction(weight), settings, offset)


def mermin_cglmp(K: int) -> BellExpression:
    """S^(K): cyclic four-bracket inequality with classical bound K-1."""
    sc = tripartite(K)
    terms = (
        _term(1, ((1, 1), (0, -1), (0, 1))),          # [ A2 - B1 + C1 ]
        _term(1, ((0, 1), (1, 1), (0, -1))),          # [ A1 + B2 - C1 ]
        _term(1, ((0, -1), (0, 1), (1, 1))),          # [-A1 + B1 + C2 ]
        _term(1, ((1, -1), (1, -1), (1, -1)), -1),    # [-A2 - B2 - C2 - 1]
    )
    return BellExpression(sc, terms, GE, Fraction(K - 1))


def cglmp_bipartite(K: int) -> BellExpression:
    """The bipartite reduction of S^(K) (CGLMP in bracket form)."""
    sc = Scenario(2, (2, 2), K)
    terms = (
        _term(1, ((1, 1), (0, -1))),          # [ A2 - B1 ]
        _term(1, ((0, 1), (1, -1))),          # [ A1 - B2 ]
        _term(1, ((0, -1), (0, 1))),          # [-A1 + B1 ]
        _term(1, ((1, -1), (1, 1)), -1),      # [ B2 - A2 - 1 ]
    )
    return BellExpression(sc, terms, GE, Fraction(K - 1))


def mermin_sym_structure(K: int, bound=0) -> BellExpression:
    """The symmetric family's bracket structure at any K.

    The certified bound 2 is only known for K = 2, 3; for other K pass the
    enumerated local bound explicitly (see local_bound).
    """
    sc = tripartite(K)
    sym = lambda x, y, z, off=0, w=1: _term(w, ((x, 1), (y, 1), (z, 1)), off)
    listed = (
        sym(1, 1, 1), sym(1, 1, 1, 1),
        sym(1, 0, 0), sym(1, 0, 0, 1),
        sym(0, 0, 0, 0, -3), sym(0, 0, 0, 1, -2),
        sym(1, 1, 0),
    )
    expr = BellExpression(sc, listed, GE, Fraction(bound))
    return orbit_complete(expr, "full")


def mermin_sym(K: int) -> BellExpression:
    """Fully symmetric Mermin generalization; facet-defining for K = 2, 3."""
    if K not in (2, 3):
        raise UnknownInequalityError(f"mermin-sym is defined for K=2,3, got {K}")
    return mermin_sym_structure(K, 2)


def sliwa7_gen(K: int) -> BellExpression:
    """Symmetric K-outcome generalization of Sliwa's 7th inequality."""
    sc = tripartite(K)
    listed = (
        _term(2, ((0, 1), (0, 1), (0, 1))),            # 2[ A1+B1+C1 ]
        _term(2, ((0, -1), (0, -1), (0, -1)), -1),     # 2[-A1-B1-C1-1]
        _term(1, ((0, -1), (0, -1), (0, -1))),         #  [-A1-B1-C1]
        _term(3, ((1, -1), (1, -1), (1, -1)), -1),     # 3[-A2-B2-C2-1]
        _term(1, ((1, 1), (1, 1), (1, 1)), -1),        #  [ A2+B2+C2-1]
        _term(1, ((1, 1), (1, 1), (1, 1))),            #  [ A2+B2+C2]
        _term(1, ((1, -1), (0, 1), (0, 1))),           #  [-A2+B1+C1]
        _term(1, ((0, -1), (1, 1), (1, 1))),           #  [-A1+B2+C2]
    )
    expr = BellExpression(sc, listed, GE, Fraction(6 * (K - 1)))
    return orbit_complete(expr, "full")


def symm_323(name: str) -> SymmetricSumExpression:
    coeffs = tuple(
        (inputs, j, Fraction(w)) for (inputs, j), w in _SYMM_323[name].items()
    )
    expr = SymmetricSumExpression(tripartite(3), coeffs, LE, Fraction(0))
    return orbit_complete_symmetric_sum(expr, "full")


def catalog(name: str, K: int):
    """Look up a catalog inequality; K is ignored by the fixed-K entries."""
    if name == "mermin-cglmp":
        return mermin_cglmp(K)
    if name == "cglmp-bipartite":
        return cglmp_bipartite(K)
    if name == "mermin-sym":
        return mermin_sym(K)
    if name == "sliwa7-gen":
        return sliwa7_gen(K)
    if name in _SYMM_323:
        if K != 3:
            raise UnknownInequalityError(f"{name} is fixed at K=3, got {K}")
        return symm_323(name)
    raise UnknownInequalityError(name)
