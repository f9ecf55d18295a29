"""Verification checks grouped into suites; each check returns report records."""

from __future__ import annotations

import functools
import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from . import tableaux
from .cochain import (
    FOCK, SCHRODINGER, NilCochain, apply_D, apply_T, hom_differential, hom_mul, hom_to_fock,
    k_invariance_defect, nilpotent_differential, phi_0k, phi_nq, primitive_pair, product_rule_defect,
    sk_equivariance_defect, tau_split, verify_restriction_theorem,
)
from .liegeom import ParabolicData, QuadSpace
from .multitensor import SparseTensor, coordinate_space, pair, schur_image
from .polys import mono_degree
from .scalars import I, Scalar, sqrt2_power
from .theta import LatticeCoset, nonvanishing_search, poisson_check, theta_eval
from .weil import GaussPoly, fourier_1d, hermite

CLAIMS = {
    "closedness": "the special form is closed under the relative Lie algebra differential",
    "fock-intertwiner": "the Schroedinger construction maps to the Fock construction",
    "summation-vs-operator": "the summation formula agrees with the operator formula",
    "k-invariance": "the form is K-invariant",
    "sk-equivariance": "the form is equivariant for permutations of its tensor slots",
    "local-restriction": "the restriction to the face equals the inserted lower-rank form",
    "vanishing-range": "the restriction vanishes when n > p - l",
    "product-rule": "phi_{0,B} . phi_{0,A} = phi_{0,B|A}",
    "first-product-rule": "phi_{nq,l'} = phi_{nq,0} . phi_{0,l'}",
    "symmetrizer-idempotent": "s(A) and its dual are idempotent",
    "highest-weight-pairing": "the pairing of s(A) e_A with its dual equals |R(A)| / h(A)",
    "abut-constant": "s(B) e_B (x) s(A) e_A = c(A, B) s(B|A) e_{B|A}",
    "schur-weyl-dimension": "sum over shapes of #SYT times dim S_lambda(C^n) equals n^k",
    "schur-image-product": "s(B) T (x) s(A) T equals s(B|A) T",
    "hermite-fourier": "the Fourier transform of H_k(-y/sqrt2) e^{-pi y^2} is (sqrt2 i xi)^k e^{-pi xi^2}",
    "hermite-eigenfunction": "H_k e^{-pi y^2} has Fourier eigenvalue (-i)^k",
    "nilpotent-square-zero": "the nilpotent differential squares to zero",
    "nilpotent-cocycle": "tau(s_{B|A} w) is a cocycle of the nilpotent complex",
    "nilpotent-primitive": "the explicit primitive differentiates to the explicit target",
    "poisson": "Poisson summation holds for random one-dimensional cosets",
    "theta-nonzero-example": "sum over Z + 1/4 of x e^{-4 pi x^2} is nonzero with certified tail",
    "nonvanishing-certificate": "a certified coset with nonzero theta value exists",
    "theta-value": "theta value with certified tail bound",
}

CLOSED_GRID = [(1, 1), (2, 1), (2, 2), (3, 1), (3, 2)]
RESTRICTION_GRID = [(2, 2, 1), (3, 1, 1), (3, 2, 1), (3, 2, 2)]


@dataclass(frozen=True)
class Check:
    """One unit of work: claim id, parameters, and a zero-argument callable producing records."""

    suite: str
    claim: str
    params: dict
    run: Callable = field(compare=False)


def record(claim: str, params: dict, ok: bool | None, witness=None, **extra) -> dict:
    outcome = "skipped-out-of-range" if ok is None else ("pass" if ok else "fail")
    out = {"claim": claim, "params": params, "outcome": outcome, "witness": witness}
    out.update(extra)
    return out


def _shape(lam) -> tableaux.Filling | None:
    return tableaux.Filling.canonical(list(lam)) if lam else None


# ---------------------------------------------------------------- closedness and intertwiner

def check_closed(p: int, q: int, n: int, lprime: int) -> list[dict]:
    params = {"p": p, "q": q, "n": n, "lprime": lprime}
    if not (1 <= q and 1 <= n <= p):
        return [record("closedness", params, None, reason="need q >= 1 and 1 <= n <= p")]
    V = QuadSpace(p, q)
    h = phi_nq(V, n, lprime, SCHRODINGER)
    d = hom_differential(h)
    out = [record("closedness", params, d.is_zero(), None if d.is_zero() else repr(d.first_difference(d - d)))]
    hf = phi_nq(V, n, lprime, FOCK)
    conv = hom_to_fock(h)
    diff = conv.first_difference(hf)
    out.append(record("fock-intertwiner", params, diff is None, None if diff is None else repr(diff)))
    hD = apply_D(V, n)
    bad = next((I for I in h.indices() if apply_T(I, hD) != h(I)), None)
    out.append(record("summation-vs-operator", params, bad is None, None if bad is None else {"I": list(bad)}))
    bad = next((I for I in h.indices() if k_invariance_defect(h(I))), None)
    out.append(record("k-invariance", params, bad is None, None if bad is None else {"I": list(bad)}))
    sk = sk_equivariance_defect(h)
    out.append(record("sk-equivariance", params, not sk, repr(sk[0]) if sk else None))
    return out


def closed_checks(cfg: dict) -> list[Check]:
    grid = [(cfg["p"], cfg["q"])] if "p" in cfg and "q" in cfg else CLOSED_GRID
    checks = []
    for p, q in grid:
        ns = [cfg["n"]] if "n" in cfg else range(1, min(p, 2) + 1)
        lps = [cfg["lprime"]] if "lprime" in cfg else range(cfg.get("max_degree", 2) + 1)
        for n in ns:
            for lp in lps:
                checks.append(Check("closed", "closedness", {"p": p, "q": q, "n": n, "lprime": lp},
                                    _bind(check_closed, p, q, n, lp)))
    return checks


# ---------------------------------------------------------------- restriction

def check_restriction(p: int, q: int, n: int, ell: int, lam=None, lprime: int = 0) -> list[dict]:
    params = {"p": p, "q": q, "n": n, "l": ell, "shape": list(lam) if lam else None,
              "lprime": sum(lam) if lam else lprime}
    res = verify_restriction_theorem(p, q, n, ell, shape=list(lam) if lam else None,
                                     ell_prime=None if lam else lprime)
    if not res["claims"]:
        return [record("local-restriction", params, None, reason=res.get("reason", "outside the parameter range"))]
    out = []
    for c in res["claims"]:
        extra = {k: v for k, v in c.items() if k not in ("claim", "outcome", "witness")}
        rec = record(c["claim"], dict(params, **({"level": extra.pop("level")} if "level" in extra else {})),
                     c["outcome"] == "pass", c.get("witness"), **extra)
        out.append(rec)
    return out


def restriction_checks(cfg: dict) -> list[Check]:
    if all(k in cfg for k in ("p", "q", "l")):
        grid = [(cfg["p"], cfg["q"], cfg["l"])]
    else:
        grid = RESTRICTION_GRID
    checks = []
    for p, q, ell in grid:
        ns = [cfg["n"]] if "n" in cfg else (1, 2)
        for n in ns:
            if "shape" in cfg:
                lams = [tuple(cfg["shape"])]
            elif "lprime" in cfg:
                lams = [None]
            else:
                lams = [None] + [tuple(lam.parts) for k in range(1, cfg.get("max_degree", 2) + 1)
                                 for lam in tableaux.partitions(k, max_rows=n)]
            lps = [cfg["lprime"]] if "lprime" in cfg else range(cfg.get("max_degree", 2) + 1)
            for lam in lams:
                for lp in (lps if lam is None else [0]):
                    params = {"p": p, "q": q, "n": n, "l": ell, "shape": list(lam) if lam else None,
                              "lprime": sum(lam) if lam else lp}
                    checks.append(Check("restriction", "local-restriction", params,
                                        _bind(check_restriction, p, q, n, ell, lam, lp)))
    return checks


# ---------------------------------------------------------------- product rules

def check_product_rule(n: int, ell: int, lam, w_p: int = 2, w_q: int = 1) -> list[dict]:
    params = {"W": [w_p, w_q], "n": n, "l": ell, "shape": list(lam) if lam else None}
    out = []
    fillings = tableaux.standard_fillings(list(lam)) if lam else [None]
    for A in fillings:
        d = product_rule_defect(QuadSpace(w_p, w_q), n, ell, A)
        out.append(record("product-rule", dict(params, filling=str(A) if A else None), d is None, d))
    return out


def check_first_product_rule(p: int, q: int, n: int, lprime: int) -> list[dict]:
    params = {"p": p, "q": q, "n": n, "lprime": lprime}
    V = QuadSpace(p, q)
    lhs = hom_mul(phi_nq(V, n, 0), phi_0k(V, n, lprime))
    rhs = phi_nq(V, n, lprime)
    diff = lhs.first_difference(rhs)
    return [record("first-product-rule", params, diff is None, None if diff is None else repr(diff))]


def product_checks(cfg: dict) -> list[Check]:
    checks = []
    maxd = cfg.get("max_degree", 2)
    ns = [cfg["n"]] if "n" in cfg else (1, 2)
    ells = [cfg["l"]] if "l" in cfg else (1, 2)
    for n in ns:
        for ell in ells:
            lams = [tuple(cfg["shape"])] if "shape" in cfg else [None] + [
                tuple(lam.parts) for k in range(1, maxd + 1) for lam in tableaux.partitions(k, max_rows=n)]
            for lam in lams:
                checks.append(Check("product", "product-rule",
                                    {"W": [2, 1], "n": n, "l": ell, "shape": list(lam) if lam else None},
                                    _bind(check_product_rule, n, ell, lam)))
    grid = [(cfg["p"], cfg["q"])] if "p" in cfg and "q" in cfg else [(2, 1), (2, 2), (3, 2)]
    for p, q in grid:
        for n in ns:
            if n > p:
                continue
            for lp in ([cfg["lprime"]] if "lprime" in cfg else range(maxd + 1)):
                checks.append(Check("product", "first-product-rule", {"p": p, "q": q, "n": n, "lprime": lp},
                                    _bind(check_first_product_rule, p, q, n, lp)))
    return checks


# ---------------------------------------------------------------- tableaux

def _random_tensor(dim: int, k: int, rng: random.Random, terms: int = 4) -> SparseTensor:
    space = coordinate_space(dim)
    out = SparseTensor(space, k, {})
    for _ in range(terms):
        idx = tuple(rng.randint(1, dim) for _ in range(k))
        out = out + SparseTensor.basis(space, *idx) * Fraction(rng.randint(-5, 5), rng.randint(1, 4))
    return out


def check_idempotent(shape) -> list[dict]:
    rng = random.Random(hash(tuple(shape)) & 0xFFFF)
    out = []
    for A in tableaux.standard_fillings(list(shape)):
        t = _random_tensor(3, A.size, rng)
        once = tableaux.apply_symmetrizer(A, t)
        ok = tableaux.apply_symmetrizer(A, once) == once
        dual_once = tableaux.apply_symmetrizer(A, t, dual=True)
        ok = ok and tableaux.apply_symmetrizer(A, dual_once, dual=True) == dual_once
        out.append(record("symmetrizer-idempotent", {"filling": str(A)}, ok))
    return out


def check_highest_weight_value(shape) -> list[dict]:
    out = []
    for A in tableaux.standard_fillings(list(shape)):
        n = A.shape.rows
        space = coordinate_space(max(n, 1))
        eA = SparseTensor.basis(space, *tableaux.highest_weight_index(A))
        value = pair(tableaux.apply_symmetrizer(A, eA, dual=True), tableaux.apply_symmetrizer(A, eA))
        expected = Fraction(tableaux.row_group_order(A), tableaux.hook_product(A.shape))
        out.append(record("highest-weight-pairing", {"filling": str(A)}, value == Scalar.coerce(expected),
                          None if value == Scalar.coerce(expected) else {"value": str(value), "expected": str(expected)}))
    return out


def check_abut_constant(B_rows: int, B_cols: int, lam) -> list[dict]:
    B = tableaux.Filling.rectangle(B_rows, B_cols)
    out = []
    for A in tableaux.standard_fillings(list(lam)) if lam else [None]:
        params = {"B": [B_rows, B_cols], "filling": str(A) if A else None}
        if A is None:
            out.append(record("abut-constant", params, True))
            continue
        BA = tableaux.abut(B, A)
        space = coordinate_space(B_rows)
        eB = SparseTensor.basis(space, *tableaux.highest_weight_index(B))
        eA = SparseTensor.basis(space, *tableaux.highest_weight_index(A))
        eBA = SparseTensor.basis(space, *tableaux.highest_weight_index(BA))
        lhs = tableaux.apply_symmetrizer(B, eB).tensor(tableaux.apply_symmetrizer(A, eA))
        c = tableaux.abut_constant(A, B)
        rhs = tableaux.apply_symmetrizer(BA, eBA) * c
        out.append(record("abut-constant", dict(params, constant=str(c)), lhs == rhs))
    return out


def check_schur_weyl(k: int, n: int) -> list[dict]:
    total = 0
    mismatch = []
    for lam in tableaux.partitions(k):
        A = tableaux.Filling.canonical(lam.parts)
        rank = schur_image(A, coordinate_space(n)).dim if lam.rows <= n else 0
        oracle = tableaux.hook_content_dimension(lam, n)
        if rank != oracle:
            mismatch.append({"shape": list(lam.parts), "rank": rank, "hook_content": oracle})
        total += tableaux.count_standard_fillings(lam) * rank
    ok = total == n ** k and not mismatch
    return [record("schur-weyl-dimension", {"k": k, "n": n}, ok,
                   None if ok else {"sum": total, "expected": n ** k, "mismatch": mismatch})]


def check_subspace_coincide(n: int, ell: int, lam) -> list[dict]:
    """s(B) T (x) s(A) T and s(B|A) T span the same subspace of T(C^n)."""
    from .multitensor import TensorSubspace
    B = tableaux.Filling.rectangle(n, ell)
    out = []
    for A in tableaux.standard_fillings(list(lam)) if lam else [None]:
        space = coordinate_space(n)
        if A is None:
            continue
        BA = tableaux.abut(B, A)
        left = [b.tensor(a) for b in schur_image(B, space).basis() for a in schur_image(A, space).basis()]
        L = TensorSubspace(space, BA.size, left)
        R = schur_image(BA, space)
        ok = L.dim == R.dim and all(L.contains(v) for v in R.basis())
        out.append(record("schur-image-product", {"n": n, "l": ell, "filling": str(A)}, ok))
    return out


def tableaux_checks(cfg: dict) -> list[Check]:
    checks = []
    for k in range(1, 7):
        for lam in tableaux.partitions(k):
            checks.append(Check("tableaux", "symmetrizer-idempotent", {"shape": list(lam.parts)},
                                _bind(check_idempotent, lam.parts)))
    for k in range(1, 6):
        for lam in tableaux.partitions(k):
            checks.append(Check("tableaux", "highest-weight-pairing", {"shape": list(lam.parts)},
                                _bind(check_highest_weight_value, lam.parts)))
    for r, c in [(1, 1), (2, 1), (2, 2)]:
        for k in range(0, 3):
            for lam in tableaux.partitions(k, max_rows=r) if k else [None]:
                parts = lam.parts if lam else None
                checks.append(Check("tableaux", "abut-constant", {"B": [r, c], "shape": list(parts) if parts else None},
                                    _bind(check_abut_constant, r, c, parts)))
    for k in range(1, 6):
        for n in range(1, 4):
            checks.append(Check("tableaux", "schur-weyl-dimension", {"k": k, "n": n}, _bind(check_schur_weyl, k, n)))
    for n in (1, 2):
        for ell in (1, 2):
            for k in (1, 2):
                for lam in tableaux.partitions(k, max_rows=n):
                    checks.append(Check("tableaux", "schur-image-product",
                                        {"n": n, "l": ell, "shape": list(lam.parts)},
                                        _bind(check_subspace_coincide, n, ell, lam.parts)))
    return checks


# ---------------------------------------------------------------- Hermite and Fourier

def g_k(k: int) -> GaussPoly:
    """H_k(-y / sqrt 2) as a one-variable GaussPoly."""
    out = {}
    for mono, c in hermite(k, (1, 1), GaussPoly).terms.items():
        e = mono_degree(mono)
        out[mono] = c * sqrt2_power(-e) * (-1) ** e
    return GaussPoly(out)


def check_hermite(k: int) -> list[dict]:
    params = {"k": k}
    y = GaussPoly.variable((1, 1))
    target = GaussPoly.constant(1)
    for _ in range(k):
        target = target * y.scale(sqrt2_power(1) * I)
    got = fourier_1d(g_k(k))
    out = [record("hermite-fourier", params, got == target, None if got == target else repr(got - target))]
    H = hermite(k, (1, 1), GaussPoly)
    eig = fourier_1d(H) == H.scale((-I) ** k if k else Scalar.coerce(1))
    out.append(record("hermite-eigenfunction", params, eig))
    return out


def hermite_checks(cfg: dict) -> list[Check]:
    top = cfg.get("max_degree", 8)
    return [Check("hermite", "hermite-fourier", {"k": k}, _bind(check_hermite, k)) for k in range(top + 1)]


# ---------------------------------------------------------------- nilpotent complex

def check_nil_square(p: int, q: int, ell: int) -> list[dict]:
    P = ParabolicData(QuadSpace(p, q), ell)
    labels = sorted((lab for lab, _ in P.n_basis()), key=repr)
    bad = None
    for r in range(len(labels) + 1):
        for combo in itertools.combinations(labels, r):
            for idx in [(), (1,), (P.m,), (1, P.m)]:
                c = NilCochain.from_unsorted(P, r, len(idx), [(combo, idx, 1)])
                if c and nilpotent_differential(nilpotent_differential(c)):
                    bad = {"labels": [str(x) for x in combo], "index": list(idx)}
                    break
            if bad:
                break
        if bad:
            break
    return [record("nilpotent-square-zero", {"p": p, "q": q, "l": ell}, bad is None, bad)]


def check_nil_closed(p: int, q: int, ell: int, lam) -> list[dict]:
    P = ParabolicData(QuadSpace(p, q), ell)
    V = P.space.space
    A = _shape(lam)
    B = tableaux.Filling.canonical([ell])
    BA = tableaux.abut(B, A) if A else B
    bad, count = None, 0
    for idx in itertools.product(P.w_indices(), repeat=BA.size):
        w = tableaux.apply_symmetrizer(BA, SparseTensor.basis(V, *idx))
        if not w.terms:
            continue
        c = tau_split(P, w, ell)
        count += 1
        d = nilpotent_differential(c)
        if d:
            bad = {"input": list(idx), "d": repr(d)}
            break
    params = {"p": p, "q": q, "n": 1, "l": ell, "shape": list(lam) if lam else None}
    if not count:
        return [record("nilpotent-cocycle", params, None, reason="W = 0")]
    return [record("nilpotent-cocycle", params, bad is None, bad, inputs=count)]


def check_nil_primitive(p: int = 3, q: int = 2, ell: int = 2) -> list[dict]:
    P = ParabolicData(QuadSpace(p, q), ell)
    target, prim = primitive_pair(P, SparseTensor.scalar(P.space.space))
    d = nilpotent_differential(prim)
    return [record("nilpotent-primitive", {"p": p, "q": q, "n": 1, "l": ell, "lprime": 0}, d == target and bool(target),
                   None if d == target else {"target": repr(target), "d_primitive": repr(d)},
                   target=repr(target), primitive=repr(prim))]


def nilpotent_checks(cfg: dict) -> list[Check]:
    checks = []
    for p, q, ell in [(2, 2, 1), (2, 2, 2), (3, 2, 1), (3, 2, 2)]:
        checks.append(Check("nilpotent", "nilpotent-square-zero", {"p": p, "q": q, "l": ell},
                            _bind(check_nil_square, p, q, ell)))
        for lam in (None, (1,)):
            checks.append(Check("nilpotent", "nilpotent-cocycle",
                                {"p": p, "q": q, "l": ell, "shape": list(lam) if lam else None},
                                _bind(check_nil_closed, p, q, ell, lam)))
    checks.append(Check("nilpotent", "nilpotent-primitive", {"p": 3, "q": 2, "l": 2}, _bind(check_nil_primitive)))
    return checks


# ---------------------------------------------------------------- theta

def theta_value(scale=1, shift=0, degree: int = 0, t: float = 1.0, tol: float = 1e-12) -> dict:
    phi = GaussPoly.monomial((((1, 1), degree),)) if degree else GaussPoly.constant(1)
    tv = theta_eval(LatticeCoset.standard(1, scale, [shift]), phi, t, tol=tol)
    return {"value": [tv.value.real, tv.value.imag], "tail_bound": tv.tail_bound, "terms": tv.terms,
            "radius": tv.radius}


def check_theta_value(params: dict, scale, shift, degree, t, tol) -> list[dict]:
    return [record("theta-value", params, True, theta_value(scale, shift, degree, t, tol))]


def check_poisson(seed: int, count: int = 20) -> list[dict]:
    rng = random.Random(seed)
    worst, worst_case = 0.0, None
    for _ in range(count):
        scale = Fraction(rng.randint(2, 12), rng.randint(2, 8))
        shift = Fraction(rng.randint(0, 7), 8)
        phi = GaussPoly.constant(Fraction(rng.randint(1, 3), rng.randint(1, 3)))
        for e in range(1, rng.randint(0, 3) + 1):
            phi = phi + GaussPoly.monomial((((1, 1), e),), Fraction(rng.randint(-3, 3), rng.randint(1, 3)))
        r = poisson_check(LatticeCoset.standard(1, scale, [shift]), phi)
        if r >= worst:
            worst, worst_case = r, {"scale": str(scale), "shift": str(shift), "phi": repr(phi)}
    return [record("poisson", {"seed": seed, "cases": count}, worst < 1e-10,
                   None if worst < 1e-10 else worst_case, max_residual=worst)]


def check_closing_example() -> list[dict]:
    x = GaussPoly.variable((1, 1))
    tv = theta_eval(LatticeCoset.standard(1, 1, [Fraction(1, 4)]), x, t=4.0, tol=1e-15)
    ok = abs(tv.value) > 10 * tv.tail_bound and tv.tail_bound < 1e-12
    return [record("theta-nonzero-example", {"coset": "Z+1/4", "phi": "x", "t": 4}, ok,
                   {"value": tv.value.real, "tail_bound": tv.tail_bound})]


def check_nonvanishing(dps: int = 50) -> list[dict]:
    out = []
    x = GaussPoly.variable((1, 1))
    for h in (None, [Fraction(1, 4)]):
        cert = nonvanishing_search(x, h=h, dps=dps)
        out.append(record("nonvanishing-certificate", {"phi": "x", "h": None if h is None else "1/4"},
                          cert["reverified"] and cert["margin"] > 0, cert))
    return out


def theta_checks(cfg: dict) -> list[Check]:
    if any(k in cfg for k in ("scale", "shift", "degree", "t")):
        params = {k: cfg[k] for k in ("scale", "shift", "degree", "t") if k in cfg}
        args = (params, cfg.get("scale", 1), cfg.get("shift", 0), cfg.get("degree", 0), cfg.get("t", 1.0),
                cfg.get("tol", 1e-12))
        return [Check("theta", "theta-value", params, _bind(check_theta_value, *args))]
    return [
        Check("theta", "poisson", {"seed": cfg.get("seed", 0)}, _bind(check_poisson, cfg.get("seed", 0))),
        Check("theta", "theta-nonzero-example", {}, check_closing_example),
        Check("theta", "nonvanishing-certificate", {}, _bind(check_nonvanishing, _dps(cfg))),
    ]


def _dps(cfg: dict) -> int:
    return max(15, int(cfg.get("precision", 166) * 0.30103) + 1)


def _bind(f, *args):
    return functools.partial(f, *args)


SUITES = {
    "verify-closed": closed_checks,
    "verify-restriction": restriction_checks,
    "verify-product": product_checks,
    "verify-tableaux": tableaux_checks,
    "verify-hermite": hermite_checks,
    "verify-nilpotent": nilpotent_checks,
    "theta-eval": theta_checks,
}
