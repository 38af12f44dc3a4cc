"""Randomised property suites, one per acceptance criterion.

Every suite takes a ``numpy`` Generator and a trial count and returns a
:class:`SuiteResult`.  Reference values come from :mod:`liftchar.oracles` or from
constructions whose answer is known, never from the routine under test.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import _linalg as la
from . import random_instances as ri
from .charfunc import (
    char_symbol,
    compose_symbols,
    lifting_from_symbol,
    symbols_equivalent,
)
from .cpmaps import (
    CPMap,
    fixed_points,
    is_ergodic,
    kappa,
    kappa_inverse,
    moment_matrix,
    subisometric_equivalences,
)
from .lifting import (
    Lifting,
    b_star_from_gamma,
    gamma_from_lifting,
    is_coisometric_lifting,
    is_reduced,
    is_resolving,
    lifting_from_gamma,
)
from .oracles import resolving_bruteforce, symbol_via_embedding
from .rowcon import RowContraction, is_star_stable, validate_row_contraction


@dataclass
class SuiteResult:
    number: int
    name: str
    trials: int
    failures: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        detail = ", ".join(f"{k}={_fmt(v)}" for k, v in self.stats.items())
        extra = f"; first failure: {self.failures[0]}" if self.failures else ""
        return f"{tag} [{self.number}] {self.name} ({self.trials} trials, {self.seconds:.1f}s; {detail}){extra}"

    def worst(self, key: str, value: float):
        self.stats[key] = max(self.stats.get(key, 0.0), float(value))


def _fmt(v):
    return f"{v:.2e}" if isinstance(v, float) else str(v)


def _dims(rng, d_max=3, total=4):
    d = int(rng.integers(1, d_max + 1))
    p = int(rng.integers(1, total))
    q = int(rng.integers(1, total - p + 1))
    return d, p, q


# ---------------------------------------------------------------------------


def suite_gamma_parametrisation(rng, trials: int = 200) -> SuiteResult:
    """Assembled liftings are contractive; extracted gammas are contractive and exact."""
    res = SuiteResult(1, "gamma parametrisation of contractive liftings", 2 * trials)
    for t in range(trials):
        d, p, q = _dims(rng)
        C = ri.random_row_contraction(d, p, rng, rng.uniform(0.2, 1.0))
        A = ri.random_row_contraction(d, q, rng, rng.uniform(0.2, 1.0))
        g = ri.random_gamma(C, A, rng, norm=rng.uniform(0.0, 1.0))
        L = lifting_from_gamma(C, A, g, tol=1e-10)
        lam = validate_row_contraction(L.E, 1e-10).lambda_max
        res.worst("lambda_max", lam)
        if lam > 1 + 1e-10:
            res.failures.append(f"forward trial {t}: lambda_max {lam:.3e}")
    for t in range(trials):
        d, p, q = _dims(rng)
        E = ri.random_block_lower(d, p, q, rng)
        L = Lifting.from_blocks(E, p)
        gd = gamma_from_lifting(L, strict=False)
        res.worst("gamma_norm", gd.norm)
        res.worst("b_residual", gd.residual)
        if gd.norm > 1 + 1e-8 or gd.residual > 1e-8:
            res.failures.append(f"converse trial {t}: |gamma| {gd.norm:.3e}, residual {gd.residual:.3e}")
    return res


def _coisometric_block_lower(d, p, q, rng):
    """Coisometric block-lower-triangular ``E`` built without any gamma: ``C`` is a
    random row coisometry and the ``H_A`` rows are orthonormal rows orthogonal to
    the ``C`` rows inside the ambient ``(+)^d (H_C (+) H_A)``."""
    C = ri.random_coisometry(d, p, rng)
    n = p + q
    top = np.zeros((p, d * n), complex)
    for i in range(d):
        top[:, i * n:i * n + p] = C[i]
    comp = la.null_space(top).basis  # columns orthogonal to the C rows
    pick = comp @ la.random_isometry(comp.shape[1], q, rng)
    bottom = la.dagger(pick)
    row = np.vstack([top, bottom])
    return [row[:, i * n:(i + 1) * n] for i in range(d)]


def suite_coisometric_gamma(rng, trials: int = 100) -> SuiteResult:
    """Coisometric liftings have isometric gamma; gamma -> B is injective; the scalar fixture."""
    res = SuiteResult(2, "coisometric liftings have isometric gamma", trials)
    for t in range(trials):
        d = int(rng.integers(2, 4))
        p = int(rng.integers(1, 3))
        q = int(rng.integers(1, 5 - p))
        L = Lifting.from_blocks(_coisometric_block_lower(d, p, q, rng), p, zero_tol=1e-14)
        if not is_coisometric_lifting(L, 1e-10):
            res.failures.append(f"trial {t}: construction not coisometric")
            continue
        g = gamma_from_lifting(L, strict=False)
        res.worst("isometry_defect", g.isometry_defect)
        if g.isometry_defect > 1e-8:
            res.failures.append(f"trial {t}: |gamma* gamma - 1| = {g.isometry_defect:.3e}")
        # distinct gammas give distinct B, quantitatively
        C, A = L.C, L.A
        rc, rs = C.defects.rank, A.defects.rank_star
        if rs <= rc and rs > 0:
            g1, g2 = la.random_isometry(rc, rs, rng), la.random_isometry(rc, rs, rng)
            db = la.opnorm(b_star_from_gamma(C, A, g1) - b_star_from_gamma(C, A, g2))
            low = (C.defects.sigma.min() if rc else 1.0) * (A.defects.sigma_star.min()) * la.opnorm(g1 - g2)
            res.worst("b_gap_bound_ratio", low / db if db else np.inf)
            if db < 0.999 * low or db == 0:
                res.failures.append(f"trial {t}: |B - B'| = {db:.3e} below {low:.3e}")
    # scalar fixture: c = (1, 0), b = (0, e^{i theta} sqrt(1 - |a|^2))
    worst = 0.0
    for _ in range(20):
        a = ri.random_contraction(1, 2, rng, rng.uniform(0.0, 0.99))[0]
        th = rng.uniform(0, 2 * np.pi)
        c = np.array([1.0, 0.0])
        b = np.array([0.0, np.exp(1j * th) * np.sqrt(1 - np.vdot(a, a).real)])
        worst = max(worst, abs(np.vdot(c, b)), abs(np.vdot(a, a).real + np.vdot(b, b).real - 1))
        L = Lifting([[[c[0]]], [[c[1]]]], [[[a[0]]], [[a[1]]]], [[[b[0]]], [[b[1]]]])
        cr = is_coisometric_lifting(L, 1e-12)
        worst = max(worst, cr.cross_norm, cr.row_defect)
    res.worst("fixture", worst)
    if worst > 1e-12:
        res.failures.append(f"scalar fixture residual {worst:.3e}")
    return res


def _depth_for(A: RowContraction, target: float = 1e-8, N_max: int = 8) -> int:
    X = np.eye(A.h, dtype=complex)
    for n in range(1, N_max + 2):
        X = A.phi(X)
        if la.opnorm(X) <= target:
            return n - 1
    return N_max


def suite_symbol_oracle(rng, trials: int = 50, perturbation: float = 0.0) -> SuiteResult:
    """Characteristic function coefficients against the dilation/Poisson embedding."""
    res = SuiteResult(3, "symbol formulas vs embedding oracle", trials)
    norms = {1: 0.3, 2: 0.2, 3: 0.1}
    for t in range(trials):
        d = int(rng.integers(1, 4))
        p = int(rng.integers(1, 3))
        q = int(rng.integers(1, min(2, d * p) + 1))  # isometric gamma needs q <= rank D_C
        L = ri.random_subisometric_lifting(d, p, q, rng, a_norm=rng.uniform(0.05, norms[d]))
        N = _depth_for(L.A)
        if la.opnorm(L.A.phi_power_identity(N + 1)) > 1e-8:
            res.failures.append(f"trial {t}: depth {N} insufficient")
            continue
        S = char_symbol(L, N)
        O = symbol_via_embedding(L, N)
        err = max(la.opnorm(S[w] + (perturbation if w == () else 0.0) - O[w]) for w in O)
        res.worst("max_coefficient_error", err)
        res.stats["max_depth"] = max(res.stats.get("max_depth", 0), N)
        if err > 1e-6:
            res.failures.append(f"trial {t}: coefficient error {err:.3e}")
    return res


def suite_factorisation(rng, trials: int = 50, N: int = 4) -> SuiteResult:
    """Two-step liftings: the symbol of the composite equals the product of symbols."""
    res = SuiteResult(4, "factorisation through intermediate liftings", trials)
    done = 0
    attempts = 0
    while done < trials and attempts < 10 * trials:
        attempts += 1
        d = int(rng.integers(1, 3))
        q1 = int(rng.integers(1, 3))
        L1, L2, Lt = ri.random_two_step(d, 1, q1, 1, rng)
        if not (is_reduced(L1) and is_reduced(L2) and is_reduced(Lt)):
            continue
        done += 1
        lhs = char_symbol(Lt, N)
        rhs = compose_symbols(char_symbol(L1, N), char_symbol(L2, N))
        err = max(la.opnorm(lhs[w] - rhs[w]) for w in lhs.idx.words)
        res.worst("max_coefficient_error", err)
        if err > 1e-8:
            res.failures.append(f"trial {done}: error {err:.3e}")
    res.stats["skipped_non_reduced"] = attempts - done
    if done < trials:
        res.failures.append(f"only {done} reduced two-step instances found")
    return res


def suite_equivalence(rng, trials: int = 50, N: int = 4) -> SuiteResult:
    """Conjugation fixing ``H_C`` keeps the symbol class; rescaling gamma changes it."""
    res = SuiteResult(5, "unitary invariance and separation of symbols", 2 * trials)
    for t in range(trials):
        d, p, q = _dims(rng, 2, 4)
        L = ri.random_lifting(d, p, q, rng, a_norm=rng.uniform(0.3, 0.8), g_norm=rng.uniform(0.5, 1.0))
        if not is_reduced(L):
            continue
        u = la.random_unitary(q, rng)
        S = char_symbol(L, N)
        rep = symbols_equivalent(S, char_symbol(L.conjugate(u), N), tol=1e-8)
        res.worst("conjugate_residual", rep.residual)
        if not rep.equivalent:
            res.failures.append(f"trial {t}: conjugate residual {rep.residual:.3e}")
        g = gamma_from_lifting(L).gamma
        L9 = lifting_from_gamma(L.C, L.A, 0.9 * g)
        rep9 = symbols_equivalent(S, char_symbol(L9, N), tol=1e-8)
        res.stats["min_rescaled_residual"] = min(res.stats.get("min_rescaled_residual", np.inf), rep9.residual)
        if rep9.residual <= 1e-3:
            res.failures.append(f"trial {t}: rescaled residual {rep9.residual:.3e}")
    return res


def _random_coisometric_for_fixed_points(rng):
    d = int(rng.integers(2, 4))
    p = int(rng.integers(1, 3))
    q = int(rng.integers(1, 3))
    if p == 2 and rng.random() < 0.5:
        C = ri.block_diagonal(ri.random_coisometry(d, 1, rng), ri.random_coisometry(d, 1, rng))
    else:
        C = ri.random_coisometry(d, p, rng)
    stable = rng.random() < 0.5
    A = (ri.random_row_contraction(d, q, rng, rng.uniform(0.3, 0.9)) if stable
         else ri.non_stable(d, 1, q - 1, rng, rng.uniform(0.3, 0.9)))
    if A.defects.rank_star > C.defects.rank:
        return None
    return lifting_from_gamma(C, A, ri.random_gamma(C, A, rng, "isometry"))


def suite_four_conditions(rng, trials: int = 100) -> SuiteResult:
    """Coisometric liftings: (a)..(d) agree; kappa is a norm-preserving bijection when true."""
    res = SuiteResult(6, "four equivalent conditions for coisometric liftings", trials)
    done = 0
    while done < trials:
        L = _random_coisometric_for_fixed_points(rng)
        if L is None:
            continue
        done += 1
        rep = subisometric_equivalences(L)
        res.stats["true_cases"] = res.stats.get("true_cases", 0) + int(rep.a is True)
        if not rep.agree:
            res.failures.append(f"trial {done}: flags {rep.flags}")
            continue
        if not rep.a:
            continue
        phi = CPMap(L.E)
        fE = fixed_points(phi)
        fC = fixed_points(CPMap(L.C))
        if fE.dimension != fC.dimension:
            res.failures.append(f"trial {done}: dims {fE.dimension} vs {fC.dimension}")
            continue
        for X in fE.selfadjoint_basis:
            k = kappa(X, phi, L.p)
            gap = abs(la.opnorm(X) - la.opnorm(k))
            res.worst("norm_gap", gap)
            if gap > 1e-8:
                res.failures.append(f"trial {done}: | |X| - |kX| | = {gap:.3e}")
        for x in fC.selfadjoint_basis:
            ki = kappa_inverse(x, phi, L.p, tol=1e-13)
            back = kappa(ki.X, phi, L.p)
            err = la.opnorm(back - x)
            res.worst("kappa_inverse_error", err)
            if err > 1e-8:
                res.failures.append(f"trial {done}: kappa(kappa^-1 x) error {err:.3e}")
    return res


def suite_decay_and_ergodicity(rng, trials: int = 100, max_iter: int = 10000) -> SuiteResult:
    """Zero-corner matrices decay under ``Phi_E`` for *-stable ``A``; ergodicity splits."""
    res = SuiteResult(7, "decay off the corner and ergodicity of liftings", 2 * trials)
    for t in range(trials):
        d, p, q = _dims(rng)
        L = ri.random_lifting(d, p, q, rng, c_norm=rng.uniform(0.5, 1.0), a_norm=rng.uniform(0.2, 0.9))
        n = p + q
        X = ri._gauss(rng, n, n)
        X[:p, :p] = 0.0
        phi = CPMap(L.E)
        for it in range(1, max_iter + 1):
            X = phi.kraus.phi(X)
            if la.opnorm(X) <= 1e-8:
                break
        else:
            res.failures.append(f"decay trial {t}: |Phi^n X| = {la.opnorm(X):.3e}")
        res.stats["max_decay_steps"] = max(res.stats.get("max_decay_steps", 0), it)
    done = 0
    while done < trials:
        L = _random_coisometric_for_fixed_points(rng)
        if L is None:
            continue
        done += 1
        lhs = is_ergodic(CPMap(L.E))
        rhs = is_ergodic(CPMap(L.C)) and bool(is_star_stable(L.A).stable)
        res.stats["ergodic_cases"] = res.stats.get("ergodic_cases", 0) + int(lhs)
        if lhs != rhs:
            res.failures.append(f"ergodicity trial {done}: E {lhs}, C and stable A {rhs}")
    return res


def _resolving_instance(rng, kind: int):
    d = int(rng.integers(1, 4))
    q = int(rng.integers(1, 5))
    p = int(rng.integers(1, 3))
    C = ri.random_row_contraction(d, p, rng)
    if kind == 0 or q == 1:
        A = ri.random_row_contraction(d, q, rng)
        g = ri.random_gamma(C, A, rng)
        if kind == 2 and g.shape[1] > 1:
            g = g[:, :1] @ ri.random_contraction(1, g.shape[1], rng, 1.0)  # rank one
        return C, A, g
    q1 = int(rng.integers(1, q))
    A1 = ri.random_row_contraction(d, q1, rng)
    A2 = (ri.random_coisometry(d, q - q1, rng) if kind == 3
          else ri.random_row_contraction(d, q - q1, rng))
    A = ri.block_diagonal(A1, A2)
    # gamma that ignores the defect directions coming from the second block
    da = A.defects
    P1 = np.zeros((q, q))
    P1[:q1, :q1] = np.eye(q1)
    Q = la.dagger(da.iota_star) @ P1 @ da.iota_star
    g = ri.random_contraction(C.defects.rank, da.rank_star, rng) @ Q
    return C, A, g


def suite_resolving(rng, trials: int = 200) -> SuiteResult:
    """Subspace iteration for resolving gammas against explicit word stacking."""
    res = SuiteResult(8, "resolving test vs brute force over words", trials)
    counts = [0, 0]
    for t in range(trials):
        C, A, g = _resolving_instance(rng, t % 4)
        fast = is_resolving(g, A).ok
        slow = resolving_bruteforce(g, A)
        counts[int(slow)] += 1
        if fast != slow:
            res.failures.append(f"trial {t}: subspace iteration {fast}, brute force {slow}")
    res.stats["resolving"] = counts[1]
    res.stats["not_resolving"] = counts[0]
    return res


def suite_symbol_liftings(rng, trials: int = 50) -> SuiteResult:
    """Liftings built from symbols are reduced; symbols of reduced liftings round-trip."""
    res = SuiteResult(9, "liftings associated to symbols", 2 * trials)
    for t in range(trials):
        d = int(rng.integers(1, 3))
        C = ri.random_row_contraction(d, 1, rng)
        r = C.defects.rank
        N = 3 if d == 2 else 6
        if t % 2:
            M = ri.random_constant_symbol(d, N, r, rng, rng.uniform(0.1, 0.9))
        else:
            M = ri.random_symbol(d, N, int(rng.integers(1, 3)), r, rng, depth=int(rng.integers(1, 3)))
        L, rep = lifting_from_symbol(C, M, report=True)
        res.worst("removed_dim", rep.removed_dim)
        res.stats["exact_models"] = res.stats.get("exact_models", 0) + int(rep.exact)
        if not is_reduced(L):
            res.failures.append(f"symbol trial {t}: output not reduced")
    for t in range(trials):
        d, p, q = _dims(rng, 2, 4)
        L = ri.random_lifting(d, p, q, rng, a_norm=rng.uniform(0.2, 0.8))
        if not is_reduced(L):
            continue
        N = max(q + 1, 3) if d == 2 else 6
        N = min(N, 4) if d == 2 else N
        S = char_symbol(L, N)
        L2, rep = lifting_from_symbol(L.C, S, report=True)
        eq = symbols_equivalent(S, char_symbol(L2, N), tol=1e-8)
        res.worst("round_trip_residual", eq.residual)
        if not (rep.exact and eq.equivalent and L2.q == q):
            res.failures.append(
                f"round trip {t}: exact {rep.exact}, residual {eq.residual:.3e}, q {L2.q} vs {q}")
    return res


def suite_moments(rng, trials: int = 50, k: int = 2) -> SuiteResult:
    """Moment matrices of fixed points are positive semidefinite."""
    res = SuiteResult(10, "moment matrices of fixed points", trials)
    res.stats["min_eigenvalue"] = np.inf
    for t in range(trials):
        d = int(rng.integers(1, 4))
        if rng.random() < 0.5:
            R = ri.block_diagonal(ri.random_coisometry(d, 1, rng), ri.random_coisometry(d, int(rng.integers(1, 3)), rng))
        else:
            R = ri.random_coisometry(d, int(rng.integers(1, 4)), rng)
        fp = fixed_points(CPMap(R))
        coef = rng.normal(size=len(fp.selfadjoint_basis))
        X = sum(c * B for c, B in zip(coef, fp.selfadjoint_basis))
        w = np.linalg.eigvalsh(X)
        if w[-1] - w[0] > 1e-9:
            D = (X - w[0] * np.eye(R.h)) / (w[-1] - w[0])
        else:
            D = rng.uniform(0, 1) * np.eye(R.h)
        mm = moment_matrix(D, R, k)
        res.stats["min_eigenvalue"] = min(res.stats["min_eigenvalue"], mm.min_eigenvalue)
        res.worst("level_residual", mm.level_residual)
        if mm.min_eigenvalue < -1e-10:
            res.failures.append(f"trial {t}: min eigenvalue {mm.min_eigenvalue:.3e}")
    return res


SUITES = (
    suite_gamma_parametrisation,
    suite_coisometric_gamma,
    suite_symbol_oracle,
    suite_factorisation,
    suite_equivalence,
    suite_four_conditions,
    suite_decay_and_ergodicity,
    suite_resolving,
    suite_symbol_liftings,
    suite_moments,
)

FULL_TRIALS = (200, 100, 50, 50, 50, 100, 100, 200, 50, 50)


def run_suite(number: int, seed: int = 0, trials=None, **kw) -> SuiteResult:
    fn = SUITES[number - 1]
    trials = FULL_TRIALS[number - 1] if trials is None else trials
    rng = np.random.default_rng([seed, number])
    t0 = time.perf_counter()
    out = fn(rng, trials, **kw)
    out.seconds = time.perf_counter() - t0
    return out


def run_all(seed: int = 0, trials=None, perturbation: float = 0.0) -> list:
    """Run every suite; ``trials`` overrides all per-suite counts, 0 runs nothing."""
    if trials == 0:
        return []
    out = []
    for n in range(1, len(SUITES) + 1):
        kw = {"perturbation": perturbation} if n == 3 else {}
        out.append(run_suite(n, seed, trials, **kw))
    return out
