"""Half-signature classes, graded projections, and homotopy certificates.

A difference class here is one half of a signature difference between an
invertible reference and an invertible variation.  The localizer index is the
class of the pair (-gamma, L): one half of sign(L) - sign(-gamma), which the
admissibility certificate makes a well-defined integer.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    AdmissibilityError,
    ClassInconsistencyError,
    ContractionViolationError,
    InternalConsistencyError,
    NotInvertibleError,
    ParityError,
)
from .grading import (
    GradedOperator,
    GradedSpace,
    func_calc,
    gap,
    lipschitz_derivative,
    operator_norm,
    sqrt_positive,
)
from .localizer import (
    LocalizerBundle,
    LocalizerParams,
    assemble_localizer,
    choose_params,
    make_params,
    support_residual,
)
from .localizing import LocalizingFunction

TAU_SIG = 1e-8


@dataclass(frozen=True)
class Inertia:
    """Counts of positive, negative, and near-zero eigenvalues."""

    n_pos: int
    n_neg: int
    n_zero: int
    tau: float

    @property
    def signature(self) -> int:
        return self.n_pos - self.n_neg

    @property
    def invertible(self) -> bool:
        return self.n_zero == 0


def _values_of(op) -> np.ndarray:
    if isinstance(op, GradedOperator):
        return op.eigenvalues()
    arr = np.asarray(op)
    if arr.ndim == 2:
        return np.linalg.eigvalsh(arr)
    return arr.astype(float)


def signature(op, tau_sig: float | None = None) -> Inertia:
    """Spectral inertia with a zero band of half-width tau_sig (default 1e-8 ||T||)."""
    w = _values_of(op)
    scale = float(np.abs(w).max(initial=0.0))
    tau = TAU_SIG * scale if tau_sig is None else tau_sig
    n_pos = int((w > tau).sum())
    n_neg = int((w < -tau).sum())
    return Inertia(n_pos=n_pos, n_neg=n_neg, n_zero=len(w) - n_pos - n_neg, tau=tau)


def inertia_ldl(matrix, tau_sig: float | None = None) -> Inertia:
    """Inertia through a symmetric-pivoting triangular factorization.

    Independent of the eigensolver route; congruence preserves inertia, so the
    block-diagonal middle factor carries the same counts.
    """
    m = np.asarray(matrix, dtype=complex)
    if isinstance(matrix, GradedOperator):
        m = matrix.matrix
    _, d, _ = scipy.linalg.ldl(m, hermitian=True)
    scale = float(np.abs(d).max(initial=0.0))
    tau = TAU_SIG * scale if tau_sig is None else tau_sig
    n_pos = n_neg = n_zero = 0
    i, n = 0, d.shape[0]
    while i < n:
        if i + 1 < n and (d[i, i + 1] != 0 or d[i + 1, i] != 0):
            w = np.linalg.eigvalsh(d[i:i + 2, i:i + 2])
            for v in w:
                if v > tau:
                    n_pos += 1
                elif v < -tau:
                    n_neg += 1
                else:
                    n_zero += 1
            i += 2
        else:
            v = d[i, i].real
            if v > tau:
                n_pos += 1
            elif v < -tau:
                n_neg += 1
            else:
                n_zero += 1
            i += 1
    return Inertia(n_pos=n_pos, n_neg=n_neg, n_zero=n_zero, tau=tau)


# ----------------------------------------------------------------------------
# difference classes
# ----------------------------------------------------------------------------


@dataclass
class RelativeClass:
    """An ordered pair of invertible operators representing a difference class.

    coefficient records the algebra the entries live over: "C" for plain
    complex matrices, or ("M_k", k) when the space is secretly k copies and
    the class value counts rank over the subdivided algebra times k.
    """

    h_ref: GradedOperator
    h_var: GradedOperator
    coefficient: object = "C"


def half_signature_class(h_ref, h_var, tau_sig: float | None = None) -> int:
    """One half of sign(h_var) - sign(h_ref); both must be invertible."""
    s_ref = signature(h_ref, tau_sig)
    s_var = signature(h_var, tau_sig)
    if not s_ref.invertible:
        raise NotInvertibleError(
            f"reference operator has {s_ref.n_zero} eigenvalues inside the "
            f"zero band of width {s_ref.tau:.3e}"
        )
    if not s_var.invertible:
        raise NotInvertibleError(
            f"variation operator has {s_var.n_zero} eigenvalues inside the "
            f"zero band of width {s_var.tau:.3e}"
        )
    diff = s_var.signature - s_ref.signature
    if diff % 2 != 0:
        raise ClassInconsistencyError(
            f"signature difference {diff} is odd; the pair cannot bound a "
            "difference class"
        )
    return diff // 2


def class_of(rel: RelativeClass, tau_sig: float | None = None) -> int:
    return half_signature_class(rel.h_ref, rel.h_var, tau_sig)


def positive_projection(H: GradedOperator, tau_sig: float | None = None) -> GradedOperator:
    """Spectral projection onto the positive part of an invertible hermitian H."""
    s = signature(H, tau_sig)
    if not s.invertible:
        raise NotInvertibleError(
            f"{s.n_zero} eigenvalues inside the zero band; positive projection "
            "is ill-defined"
        )
    proj = func_calc(lambda x: (x > 0).astype(float), H)
    pm = proj.matrix
    idem = operator_norm(pm @ pm - pm)
    if idem > 1e-10:
        raise InternalConsistencyError(f"projection defect {idem:.3e} exceeds 1e-10")
    return proj


# ----------------------------------------------------------------------------
# the localizer index
# ----------------------------------------------------------------------------


@dataclass
class LocalizerIndexReport:
    """Index value together with the certificate that backs it."""

    value: int
    signature_ref: int
    signature_var: int
    admissible: bool
    kappa: float
    rho: float
    c_phi: float
    C_kr: float
    min_gap: float
    certified_bound: float
    gap_h: float
    dH_norm: float
    support_defect: float | None = None
    bundle: LocalizerBundle | None = field(default=None, repr=False)

    def to_json_dict(self) -> dict:
        return {
            "signature_ref": self.signature_ref,
            "signature_var": self.signature_var,
            "class": self.value,
            "admissible": self.admissible,
            "kappa": self.kappa,
            "rho": self.rho,
            "c_phi": self.c_phi,
            "C_kr": self.C_kr,
            "min_gap": self.min_gap,
        }


def localizer_index(H: GradedOperator, D: GradedOperator, phi: LocalizingFunction,
                    params: LocalizerParams | None = None, margin: float = 1.1,
                    rho_max: float | None = None,
                    tau_sig: float | None = None,
                    keep_bundle: bool = False,
                    check_support: bool = True) -> LocalizerIndexReport:
    """Class of the pair (-gamma, L), refused unless the parameters are admissible."""
    if params is None:
        params = choose_params(H, D, phi, margin=margin, rho_max=rho_max)
    if not params.admissible:
        raise AdmissibilityError(
            "parameters are not admissible: " + (params.violated_inequality() or "")
        )
    bundle = assemble_localizer(H, D, phi, params)
    return index_from_bundle(bundle, D, tau_sig=tau_sig, keep_bundle=keep_bundle,
                             check_support=check_support)


def index_from_bundle(bundle: LocalizerBundle, D: GradedOperator,
                      tau_sig: float | None = None, keep_bundle: bool = False,
                      check_support: bool = True) -> LocalizerIndexReport:
    """Index extraction for an already assembled (smooth or sharp) localizer."""
    params = bundle.params
    if not params.admissible:
        raise AdmissibilityError(
            "parameters are not admissible: " + (params.violated_inequality() or "")
        )
    space = bundle.space
    s_l = signature(bundle.eigenvalues, tau_sig)
    if not s_l.invertible:
        raise NotInvertibleError(
            f"localizer has {s_l.n_zero} eigenvalues in the zero band despite "
            "an admissibility certificate; numerical contradiction"
        )
    sig_ref = space.n_minus - space.n_plus  # signature of -gamma, exact
    diff = s_l.signature - sig_ref
    if diff % 2 != 0:
        raise ClassInconsistencyError(
            f"sign(L) - sign(-gamma) = {diff} is odd"
        )
    defect = None
    if check_support and bundle.style == "smooth":
        defect = support_residual(bundle, D)
        if defect > 1e-9:
            raise InternalConsistencyError(
                f"localizer differs from -gamma off the truncation range by "
                f"{defect:.3e} (limit 1e-9)"
            )
    return LocalizerIndexReport(
        value=diff // 2,
        signature_ref=sig_ref,
        signature_var=s_l.signature,
        admissible=True,
        kappa=params.kappa,
        rho=params.rho,
        c_phi=params.c_phi,
        C_kr=params.C_kr,
        min_gap=bundle.min_abs_eigenvalue,
        certified_bound=params.certified_lower_bound(),
        gap_h=params.gap,
        dH_norm=params.dH_norm,
        support_defect=defect,
        bundle=bundle if keep_bundle else None,
    )


# ----------------------------------------------------------------------------
# index-class projection from an odd contraction
# ----------------------------------------------------------------------------


def index_class_projection(F: GradedOperator, eps_contraction: float = 1e-8) -> GradedOperator:
    """Projection gamma_+(1 - F^2) ... built from an odd hermitian contraction F.

    Q = gamma (1 - F^2) + F sqrt(1 - F^2) + gamma_minus, which equals
    U gamma_plus U for the odd symmetry U = F + gamma sqrt(1 - F^2); both the
    idempotency and the conjugation form are verified to 1e-9.
    """
    space = F.space
    nrm = operator_norm(F)
    if nrm > 1.0 + eps_contraction:
        raise ContractionViolationError(
            f"||F|| = {nrm:.12g} exceeds 1 + {eps_contraction:.1e}"
        )
    if F.parity != "odd":
        raise ClassInconsistencyError("index-class projection needs an odd F")
    fm = F.matrix
    eye = np.eye(space.n, dtype=complex)
    fsq = fm @ fm
    one_minus = GradedOperator.snapped(eye - fsq, space, "even", hermitian=True)
    root = sqrt_positive(one_minus)
    gdiag = space.gamma_diag
    gamma_minus = np.diag(((1.0 - gdiag) / 2.0)).astype(complex)
    qm = (gdiag[:, None] * one_minus.matrix) + fm @ root.matrix + gamma_minus
    q = GradedOperator(qm, space, parity="none", hermitian=True)

    idem = operator_norm(q.matrix @ q.matrix - q.matrix)
    if idem > 1e-9:
        raise InternalConsistencyError(
            f"index-class projection defect ||Q^2 - Q|| = {idem:.3e} exceeds 1e-9"
        )
    u = fm + (gdiag[:, None] * root.matrix)
    gamma_plus = np.diag(((1.0 + gdiag) / 2.0)).astype(complex)
    conj_defect = operator_norm(q.matrix - u @ gamma_plus @ u)
    if conj_defect > 1e-9:
        raise InternalConsistencyError(
            f"conjugation form of the index-class projection off by {conj_defect:.3e}"
        )
    return q


# ----------------------------------------------------------------------------
# homotopies
# ----------------------------------------------------------------------------


def phase_path(H: GradedOperator, steps: int) -> list[GradedOperator]:
    """Homotopy H |H|^(-t) from H to its unitary phase, t on [0, 1]."""
    out = []
    for t in np.linspace(0.0, 1.0, steps):
        out.append(func_calc(lambda x, p=t: np.sign(x) * np.abs(x) ** (1.0 - p), H))
    return out


@dataclass
class HomotopyStep:
    index: int
    signature: int
    min_abs_eig: float
    step_norm: float | None
    no_crossing: bool | None


@dataclass
class HomotopyReport:
    kappa: float
    rho: float
    constant: bool
    values: list[int]
    steps: list[HomotopyStep]
    failing_step: int | None

    @property
    def value(self) -> int:
        return self.values[0]


def common_params(path: list[GradedOperator], D: GradedOperator,
                  phi: LocalizingFunction, margin: float = 1.1) -> LocalizerParams:
    """One admissible (kappa, rho) that works for every operator on the path.

    Built from the worst constants along the path: smallest gap, largest
    derivative norm, largest operator norm.
    """
    gaps = [gap(h) for h in path]
    dhs = [operator_norm(lipschitz_derivative(D, h)) for h in path]
    norms = [operator_norm(h) for h in path]
    g_min = min(gaps)
    dh_max = max(dhs)
    h_max = max(norms)
    d_eigs = D.eigenvalues()

    if dh_max <= 1e-14 * max(1.0, h_max) * max(1.0, float(np.abs(d_eigs).max(initial=0.0))):
        kappa = 1.0
        rho = max(1.0, float(np.abs(d_eigs).max(initial=0.0))) / 2.0
        min_abs_d = float(np.abs(d_eigs).min())
        if min_abs_d >= phi.support_radius * rho:
            rho = min_abs_d / phi.plateau_radius
        return make_params(kappa, rho, g_min, 0.0, phi.c_phi, h_max)

    kappa = g_min**2 / (2.0 * dh_max)
    # The final admissibility check pairs the worst constants even when they
    # come from different steps, so rho must cover that combination too, not
    # just each step's own triple.
    rho = phi.c_phi * h_max * dh_max / (g_min**2 - kappa * dh_max)
    for g_t, dh_t, n_t in zip(gaps, dhs, norms):
        denom = g_t**2 - kappa * dh_t
        if denom <= 0:
            raise AdmissibilityError(
                "no common scale: kappa from the worst gap already saturates "
                f"a step with gap^2 = {g_t**2:.4g}, dH = {dh_t:.4g}"
            )
        rho = max(rho, 2.0 * g_t / kappa, phi.c_phi * n_t * dh_t / denom)
    rho *= margin
    params = make_params(kappa, rho, g_min, dh_max, phi.c_phi, h_max)
    if not params.admissible:
        raise AdmissibilityError(
            "worst-case constants over the path admit no common scale: "
            + (params.violated_inequality() or "")
        )
    return params


def homotopy_stability(path: list[GradedOperator], D: GradedOperator,
                       phi: LocalizingFunction, margin: float = 1.1,
                       tau_sig: float | None = None,
                       params: LocalizerParams | None = None) -> HomotopyReport:
    """Track the localizer class along a path at one common admissible scale.

    Each consecutive pair is certified by a no-crossing argument: when the
    operator-norm step is smaller than both endpoint gaps no eigenvalue can
    reach zero in between, so the signature cannot jump unseen.  A failure
    pinpoints the first step where the class moves or the certificate breaks.
    """
    if params is None:
        params = common_params(path, D, phi, margin=margin)
    reports = []
    bundles = []
    for h_t in path:
        pt = make_params(params.kappa, params.rho, gap(h_t),
                         operator_norm(lipschitz_derivative(D, h_t)),
                         phi.c_phi, operator_norm(h_t))
        if not pt.admissible:
            raise AdmissibilityError(
                "common scale is not admissible at a path step: "
                + (pt.violated_inequality() or "")
            )
        bundle = assemble_localizer(h_t, D, phi, pt)
        reports.append(index_from_bundle(bundle, D, tau_sig=tau_sig,
                                         check_support=False))
        bundles.append(bundle)
    return _certified_report(params, reports, bundles)


def _certified_report(params: LocalizerParams, reports: list[LocalizerIndexReport],
                      bundles: list[LocalizerBundle]) -> HomotopyReport:
    """Weyl no-crossing certification of a list of localizers along a path."""
    steps = []
    values = [r.value for r in reports]
    failing = None
    for i, (r, b) in enumerate(zip(reports, bundles)):
        if i == 0:
            steps.append(HomotopyStep(i, r.signature_var, b.min_abs_eigenvalue,
                                      None, None))
            continue
        delta = operator_norm(b.L.matrix - bundles[i - 1].L.matrix)
        ok = delta < min(b.min_abs_eigenvalue, bundles[i - 1].min_abs_eigenvalue)
        steps.append(HomotopyStep(i, r.signature_var, b.min_abs_eigenvalue,
                                  float(delta), bool(ok)))
        if failing is None and (values[i] != values[i - 1] or not ok):
            failing = i
    return HomotopyReport(
        kappa=params.kappa, rho=params.rho,
        constant=all(v == values[0] for v in values) and failing is None,
        values=values, steps=steps, failing_step=failing,
    )


def dirac_path(D: GradedOperator, T: GradedOperator, steps: int) -> list[GradedOperator]:
    """Straight-line path D + tT for an odd bounded perturbation T, t on [0, 1]."""
    if T.parity != "odd" or not T.hermitian:
        raise ParityError("Dirac perturbations must be odd hermitian")
    if T.space != D.space:
        raise ParityError("Dirac perturbation lives on a different graded space")
    return [GradedOperator(D.matrix + t * T.matrix, D.space, parity="odd",
                           hermitian=True)
            for t in np.linspace(0.0, 1.0, steps)]


def dirac_path_stability(H: GradedOperator, path: list[GradedOperator],
                         phi: LocalizingFunction, margin: float = 1.1,
                         tau_sig: float | None = None,
                         params: LocalizerParams | None = None) -> HomotopyReport:
    """Track the localizer class while the Dirac operator moves along a path.

    The dual of homotopy_stability: H is fixed, D varies.  One common
    admissible scale is built from the worst derivative norm along the path
    and each consecutive localizer pair is certified by the same no-crossing
    argument.
    """
    if params is None:
        g = gap(H)
        h_norm = operator_norm(H)
        dhs = [operator_norm(lipschitz_derivative(d_t, H)) for d_t in path]
        dh_max = max(dhs)
        d_norm_max = max(operator_norm(d_t) for d_t in path)
        if dh_max <= 1e-14 * max(1.0, h_norm) * max(1.0, d_norm_max):
            params = make_params(1.0, max(1.0, d_norm_max) / 2.0, g, 0.0,
                                 phi.c_phi, h_norm)
        else:
            kappa = g**2 / (2.0 * dh_max)
            rho = 0.0
            for dh_t in dhs:
                denom = g**2 - kappa * dh_t
                if denom <= 0:
                    raise AdmissibilityError(
                        "no common scale along the Dirac path: a step has "
                        f"kappa * dH = {kappa * dh_t:.4g} at gap^2 = {g**2:.4g}"
                    )
                rho = max(rho, 2.0 * g / kappa, phi.c_phi * h_norm * dh_t / denom)
            rho *= margin
            params = make_params(kappa, rho, g, dh_max, phi.c_phi, h_norm)
            if not params.admissible:
                raise AdmissibilityError(
                    "worst-case constants along the Dirac path admit no "
                    "common scale: " + (params.violated_inequality() or "")
                )
    reports = []
    bundles = []
    for d_t in path:
        pt = make_params(params.kappa, params.rho, params.gap,
                         operator_norm(lipschitz_derivative(d_t, H)),
                         phi.c_phi, params.h_norm)
        if not pt.admissible:
            raise AdmissibilityError(
                "common scale is not admissible at a Dirac-path step: "
                + (pt.violated_inequality() or "")
            )
        bundle = assemble_localizer(H, d_t, phi, pt)
        reports.append(index_from_bundle(bundle, d_t, tau_sig=tau_sig,
                                         check_support=False))
        bundles.append(bundle)
    return _certified_report(params, reports, bundles)


# ----------------------------------------------------------------------------
# direct sums
# ----------------------------------------------------------------------------


def space_sum(a: GradedSpace, b: GradedSpace) -> GradedSpace:
    return GradedSpace(a.n_plus + b.n_plus, a.n_minus + b.n_minus)


def direct_sum(a: GradedOperator, b: GradedOperator) -> GradedOperator:
    """Graded direct sum: sectors concatenate, so gamma stays diag(+..+,-..-)."""
    sa, sb = a.space, b.space
    space = space_sum(sa, sb)
    m = np.zeros((space.n, space.n), dtype=complex)
    rows_a = list(range(sa.n_plus)) + \
        list(range(space.n_plus, space.n_plus + sa.n_minus))
    rows_b = list(range(sa.n_plus, space.n_plus)) + \
        list(range(space.n_plus + sa.n_minus, space.n))
    m[np.ix_(rows_a, rows_a)] = a.matrix
    m[np.ix_(rows_b, rows_b)] = b.matrix
    parity = a.parity if a.parity == b.parity else "none"
    return GradedOperator(m, space, parity=parity,
                          hermitian=a.hermitian and b.hermitian)
