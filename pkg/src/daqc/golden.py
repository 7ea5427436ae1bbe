"""Reference coefficient tables for the 8-qubit conjugated ZZ chains.

Each entry lists the tabulated Pauli word and coefficient together with the
value the exact expansion produces.  Coefficients are encoded as
``(bond, factors)`` meaning ``g_bond * prod f(2 theta_i)`` over ``factors``
of the form ``("cos" | "sin", i)``.

Two conventions are fixed by these tables and recorded as constants:

* the tabulated expansions are reproduced by ``exp(-i O) H exp(+i O)`` with every
  generator phase ``Phi_j = PHASE_SIGN * theta_j`` (one global sign);
* the table labelled ``H1`` uses generators on ``(2,3), (4,5), (6,7)`` and the
  one labelled ``H2`` uses ``(1,2), (3,4), (5,6), (7,8)``.

Entries whose tabulated form differs from the expansion carry ``tabulated`` values
that the checks confirm to be wrong, so a regression in either direction shows up.
"""
from __future__ import annotations

import numpy as np

from .mbody import conjugated_block
from .models import two_body_word
from .pauli import SpinHamiltonian

N_SITES = 8
PHASE_SIGN = -1
H1_GENERATORS = (2, 4, 6)
H2_GENERATORS = (1, 3, 5, 7)


def _w(spec: str) -> str:
    """``'Z1 Y2 X3'`` -> 8-site word."""
    chars = ["I"] * N_SITES
    for tok in spec.split():
        chars[int(tok[1:]) - 1] = tok[0]
    return "".join(chars)


# (tabulated word, tabulated coefficient, corrected word, corrected coefficient)
H1_TABLE = [
    ("Z1 Z2", (1, [("cos", 2)]), None, None),
    ("Z1 Y2 X3", (1, [("sin", 2)]), None, None),
    ("Z2 Z3", (2, []), None, None),
    ("Z3 Z4", (3, [("cos", 2), ("cos", 4)]), None, None),
    ("X2 Y3 Z4", (3, [("sin", 2), ("cos", 4)]), None, None),
    ("Z2 Y3 X4", (3, [("cos", 2), ("sin", 4)]), "Z3 Y4 X5", None),
    ("X2 Y3 Y4 X5", (3, [("sin", 2), ("sin", 4)]), None, None),
    ("Z4 Z5", (4, []), None, None),
    ("Z5 Z6", (5, [("cos", 4), ("cos", 6)]), None, None),
    ("X4 Y5 Z6", (5, [("sin", 4), ("cos", 6)]), None, None),
    ("Z4 Y5 X6", (5, [("cos", 4), ("sin", 6)]), "Z5 Y6 X7", None),
    ("X4 Y5 Y6 X7", (5, [("sin", 4), ("sin", 6)]), None, None),
    ("Z6 Z7", (6, []), None, None),
    ("Z7 Z8", (7, [("cos", 6)]), None, None),
    ("X6 Y7 Z8", (7, [("sin", 6)]), None, None),
]

H2_TABLE = [
    ("Z1 Z2", (1, []), None, None),
    ("Z2 Z3", (2, [("cos", 1), ("cos", 3)]), None, None),
    ("X1 Y2 Z3", (2, [("sin", 1), ("cos", 3)]), None, None),
    ("Z2 Y3 X4", (2, [("cos", 1), ("sin", 3)]), None, None),
    ("X1 Y2 Y3 X4", (2, [("cos", 1), ("cos", 3)]), None, (2, [("sin", 1), ("sin", 3)])),
    ("Z3 Z4", (3, []), None, None),
    ("Z4 Z5", (4, [("cos", 3), ("cos", 5)]), None, None),
    ("X3 Y4 Z5", (4, [("sin", 3), ("cos", 5)]), None, None),
    ("Z4 Y5 X6", (4, [("cos", 3), ("sin", 5)]), None, None),
    ("X3 Y4 Y5 X6", (4, [("cos", 3), ("cos", 5)]), None, (4, [("sin", 3), ("sin", 5)])),
    ("Z5 Z6", (5, []), None, None),
    ("Z6 Z7", (6, [("cos", 5), ("cos", 7)]), None, None),
    ("X5 Y6 Z7", (6, [("sin", 5), ("cos", 7)]), None, None),
    ("Z6 Y7 X8", (6, [("cos", 5), ("sin", 7)]), None, None),
    ("X5 Y6 Y7 X8", (6, [("sin", 5), ("sin", 7)]), None, None),
    ("Y7 Z8", (7, []), "Z7 Z8", None),
]


def _value(coeff, theta: np.ndarray, g: np.ndarray) -> float:
    bond, factors = coeff
    v = g[bond - 1]
    for f, i in factors:
        v *= np.cos(2 * theta[i - 1]) if f == "cos" else np.sin(2 * theta[i - 1])
    return float(v)


def expansion(theta: np.ndarray, g: np.ndarray, generators) -> SpinHamiltonian:
    """Exact expansion of the chain ZZ model ``g`` conjugated by the given generator sites."""
    H = SpinHamiltonian(N_SITES, {two_body_word(N_SITES, j, j + 1): float(g[j - 1]) for j in range(1, N_SITES)})
    return conjugated_block(H, {j: PHASE_SIGN * float(theta[j - 1]) for j in generators})


def compare_table(table, theta, g, generators) -> dict:
    """Deviations of the corrected table from the expansion, plus how far off each tabulated typo is."""
    H = expansion(theta, g, generators)
    expected: dict[str, float] = {}
    typos = []
    for tabulated_word, tabulated_coeff, fixed_word, fixed_coeff in table:
        word = _w(fixed_word or tabulated_word)
        coeff = fixed_coeff or tabulated_coeff
        expected[word] = expected.get(word, 0.0) + _value(coeff, theta, g)
        if fixed_word or fixed_coeff:
            pw = _w(tabulated_word)
            typos.append({
                "tabulated": tabulated_word,
                "tabulated_value": _value(tabulated_coeff, theta, g),
                "expansion_value": H.coefficient(pw),
                "corrected": fixed_word or tabulated_word,
            })
    words = set(expected) | {w for w, c in H.items() if abs(c) > 1e-14}
    max_dev = max(abs(expected.get(w, 0.0) - H.coefficient(w)) for w in words)
    return {"max_deviation": max_dev, "n_terms": len(expected), "typos": typos}


def check_golden_tables(seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0, 2 * np.pi, N_SITES)
    g1 = rng.uniform(-1, 1, N_SITES - 1)
    g2 = rng.uniform(-1, 1, N_SITES - 1)
    return {
        "H1": compare_table(H1_TABLE, theta, g1, H1_GENERATORS),
        "H2": compare_table(H2_TABLE, theta, g2, H2_GENERATORS),
    }
