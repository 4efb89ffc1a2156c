"""
Análise de sensibilidade a um confundidor binário não observado U

Para (α̃, κ̃₀, κ̃₁) fixos, o modelo de mistura é ajustado separadamente em
cada braço de tratamento (α̃ compartilhado, κ̃ por braço) e o ATME ajustado
é δ̃ = γ̃₁ − γ̃₀. A curva de nível reúne os pares (α̃, κ̃₁ − κ̃₀) em que δ̃
atinge uma fração c do δ̂ da regressão paralela.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.core.config import get_settings
from src.core.errors import (
    LevelCurveError,
    MixtureConvergenceError,
    NumericalError,
    SeparationError,
    UsageError,
)
from src.core.models.dataset import Dataset, split_by_treatment
from src.services.estimators.regression import parallel_regression
from src.services.numeric.logistic import logistic_fit
from src.services.numeric.mixture import MixtureMLEResult, mixture_mle
from src.services.simulation import resolve_threads

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("alpha_tilde", "kappa_diff", "delta_adjusted", "converged", "residual")
COLD_CHECK_TOLERANCE = 1e-4
BISECTION_MAX_STEPS = 100


class KappaSplit(str, Enum):
    """Como repartir κ_diff entre os braços"""

    SYMMETRIC = "symmetric"  # κ̃₀ = −d/2, κ̃₁ = +d/2
    ANCHORED = "anchored"  # κ̃₀ = 0, κ̃₁ = d

    def resolve(self, kappa_diff: float) -> Tuple[float, float]:
        if self is KappaSplit.ANCHORED:
            return 0.0, float(kappa_diff)
        return -0.5 * kappa_diff, 0.5 * kappa_diff


@dataclass(frozen=True)
class SensitivitySpec:
    alpha_tilde: float
    kappa0_tilde: float
    kappa1_tilde: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.alpha_tilde, self.kappa0_tilde, self.kappa1_tilde)):
            raise UsageError("parâmetros de sensibilidade devem ser finitos")

    @property
    def kappa_diff(self) -> float:
        return self.kappa1_tilde - self.kappa0_tilde

    @classmethod
    def from_kappa_diff(cls, alpha: float, kappa_diff: float, split: KappaSplit = KappaSplit.SYMMETRIC) -> "SensitivitySpec":
        k0, k1 = KappaSplit(split).resolve(kappa_diff)
        return cls(float(alpha), k0, k1)


@dataclass(frozen=True)
class SensitivityPoint:
    spec: SensitivitySpec
    delta_adjusted: float
    subset_results: Optional[Tuple[MixtureMLEResult, MixtureMLEResult]]
    converged: bool
    error: Optional[str] = None

    def to_row(self, residual: float, kappa_diff: Optional[float] = None) -> Dict[str, Any]:
        return {
            "alpha_tilde": self.spec.alpha_tilde,
            "kappa_diff": self.spec.kappa_diff if kappa_diff is None else kappa_diff,
            "delta_adjusted": self.delta_adjusted,
            "converged": self.converged,
            "residual": residual,
        }

    def to_dict(self) -> Dict[str, Any]:
        return {
            "alpha_tilde": self.spec.alpha_tilde,
            "kappa0_tilde": self.spec.kappa0_tilde,
            "kappa1_tilde": self.spec.kappa1_tilde,
            "kappa_diff": self.spec.kappa_diff,
            "delta_adjusted": self.delta_adjusted,
            "converged": self.converged,
            "error": self.error,
            "subsets": None if self.subset_results is None else [r.summary() for r in self.subset_results],
        }


# ==============================================================================
# PONTO
# ==============================================================================
def sensitivity_point(
    ds: Dataset,
    spec: SensitivitySpec,
    init: Optional[Tuple[MixtureMLEResult, MixtureMLEResult]] = None,
    require_convergence: bool = True,
) -> SensitivityPoint:
    """
    Ajusta a mistura em T=0 com (α̃, κ̃₀) e em T=1 com (α̃, κ̃₁); δ̃ = γ̃₁ − γ̃₀.

    Raises:
        MixtureConvergenceError: EM sem convergência em algum braço (com require_convergence)
    """
    results = []
    for level, subset in enumerate(split_by_treatment(ds)):
        kappa = spec.kappa1_tilde if level == 1 else spec.kappa0_tilde
        res = mixture_mle(subset, spec.alpha_tilde, kappa, init=None if init is None else init[level])
        if require_convergence and not res.converged:
            raise MixtureConvergenceError(level, res.iterations)
        results.append(res)
    r0, r1 = results
    return SensitivityPoint(
        spec=spec,
        delta_adjusted=r1.gamma - r0.gamma,
        subset_results=(r0, r1),
        converged=r0.converged and r1.converged,
    )


def _safe_point(ds, spec, init=None) -> SensitivityPoint:
    try:
        return sensitivity_point(ds, spec, init=init, require_convergence=False)
    except NumericalError as e:
        logger.warning(f"⚠️ Sensibilidade falhou em α̃={spec.alpha_tilde:g}, κ_diff={spec.kappa_diff:g}: {e}")
        return SensitivityPoint(spec, math.nan, None, False, error=str(e))


# ==============================================================================
# GRADE
# ==============================================================================
@dataclass(frozen=True)
class SensitivityGrid:
    alpha_grid: Tuple[float, ...]
    kappa_diff_grid: Tuple[float, ...]
    split: KappaSplit
    delta_hat: float
    points: Tuple[Tuple[SensitivityPoint, ...], ...]
    cold_check_gap: float

    def point(self, i: int, j: int) -> SensitivityPoint:
        return self.points[i][j]

    def rows(self) -> List[Dict[str, Any]]:
        """Linhas planas; residual = δ̃ − δ̂"""
        return [
            p.to_row(p.delta_adjusted - self.delta_hat, kappa_diff=d)
            for row in self.points
            for p, d in zip(row, self.kappa_diff_grid)
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": "sensitivity_grid",
            "split": self.split.value,
            "delta_hat": self.delta_hat,
            "alpha_grid": list(self.alpha_grid),
            "kappa_diff_grid": list(self.kappa_diff_grid),
            "cold_check_gap": self.cold_check_gap,
            "points": self.rows(),
        }


def _grid_row(ds: Dataset, alpha: float, kappa_grid: Sequence[float], split: KappaSplit) -> Tuple[SensitivityPoint, ...]:
    """Uma linha da grade em ordem, cada célula partindo da solução da anterior"""
    row = []
    previous = None
    for d in kappa_grid:
        point = _safe_point(ds, SensitivitySpec.from_kappa_diff(alpha, d, split), init=previous)
        previous = point.subset_results if point.subset_results is not None else previous
        row.append(point)
    return tuple(row)


def _cold_check_cells(n_rows: int, n_cols: int) -> List[Tuple[int, int]]:
    cells = {(0, 0), (n_rows // 2, n_cols // 2), (n_rows - 1, n_cols - 1)}
    return sorted(cells)


def sensitivity_grid(
    ds: Dataset,
    alpha_grid: Sequence[float],
    kappa_diff_grid: Sequence[float],
    split_rule: KappaSplit = KappaSplit.SYMMETRIC,
    threads: Optional[int] = None,
) -> SensitivityGrid:
    """
    Varredura cartesiana α̃ × κ_diff.

    Linhas (α̃ fixo) rodam em paralelo; dentro da linha as células seguem em
    ordem com warm start. Células sem convergência ficam marcadas. Algumas
    células são refeitas a frio para conferir que o warm start não muda o
    ponto fixo.
    """
    alphas = tuple(float(a) for a in alpha_grid)
    kappas = tuple(float(d) for d in kappa_diff_grid)
    if not alphas or not kappas:
        raise UsageError("grades de sensibilidade não podem ser vazias")
    split = KappaSplit(split_rule)
    delta_hat = parallel_regression(ds).estimate
    logger.info(f"🚀 Grade de sensibilidade {len(alphas)}×{len(kappas)} ({split.value})")

    with ThreadPoolExecutor(max_workers=resolve_threads(threads)) as executor:
        points = tuple(executor.map(lambda a: _grid_row(ds, a, kappas, split), alphas))

    gap = 0.0
    for i, j in _cold_check_cells(len(alphas), len(kappas)):
        warm = points[i][j]
        if not warm.converged:
            continue
        cold = _safe_point(ds, warm.spec)
        if cold.converged:
            gap = max(gap, abs(cold.delta_adjusted - warm.delta_adjusted))
    if gap > COLD_CHECK_TOLERANCE:
        logger.warning(f"⚠️ Warm start e solução a frio diferem em {gap:.3g} na grade")

    failed = sum(1 for row in points for p in row if not p.converged)
    if failed:
        logger.warning(f"⚠️ {failed} célula(s) da grade sem convergência")
    return SensitivityGrid(alphas, kappas, split, delta_hat, points, gap)


# ==============================================================================
# REFERÊNCIAS
# ==============================================================================
@dataclass(frozen=True)
class BenchmarkReferences:
    max_observed_selection: Optional[float]
    selection_covariate: Optional[str]
    atme_reference: float
    flags: Tuple[str, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "max_observed_selection": self.max_observed_selection,
            "selection_covariate": self.selection_covariate,
            "atme_reference": self.atme_reference,
            "flags": list(self.flags),
        }


def binary_covariates(ds: Dataset) -> List[int]:
    return [
        j for j in range(ds.k)
        if np.all((ds.x[:, j] == 0.0) | (ds.x[:, j] == 1.0)) and np.unique(ds.x[:, j]).size == 2
    ]


def benchmark_references(ds: Dataset) -> BenchmarkReferences:
    """
    Referências da curva de nível.

    - Seleção: maior |coeficiente| de covariável binária observada na logística
      S ~ 1 + X agrupada entre os braços (α̃ é comum aos dois).
    - ATME: estimativa da regressão paralela.
    """
    atme = parallel_regression(ds).estimate
    binaries = binary_covariates(ds)
    if not binaries:
        logger.info("ℹ️ Sem covariável binária: referência de seleção ausente")
        return BenchmarkReferences(None, None, atme, ("no_binary_covariate",))

    design = np.hstack([np.ones((ds.n, 1)), ds.x])
    try:
        fit = logistic_fit(design, ds.s, column_names=("const", *ds.covariate_names))
    except SeparationError as e:
        logger.warning(f"⚠️ Separação na logística de seleção: {e}")
        return BenchmarkReferences(None, None, atme, ("separation",))

    coefs = {ds.covariate_names[j]: float(fit.coefficients[j + 1]) for j in binaries}
    name = max(coefs, key=lambda c: abs(coefs[c]))
    flags = () if fit.converged else ("selection_fit_not_converged",)
    return BenchmarkReferences(abs(coefs[name]), name, atme, flags)


# ==============================================================================
# CURVA DE NÍVEL
# ==============================================================================
@dataclass(frozen=True)
class LevelCurvePoint:
    alpha_tilde: float
    kappa_diff: float
    delta_adjusted: float
    converged: bool
    residual: float

    def to_row(self) -> Dict[str, Any]:
        return {column: getattr(self, column) for column in CSV_COLUMNS}


@dataclass(frozen=True)
class LevelCurve:
    fraction: float
    delta_hat: float
    tolerance: float
    split: KappaSplit
    points: Tuple[LevelCurvePoint, ...]
    omitted_alphas: Tuple[float, ...] = ()
    references: Optional[BenchmarkReferences] = None

    @property
    def target(self) -> float:
        return self.fraction * self.delta_hat

    def enters_danger_zone(self) -> Optional[bool]:
        """
        Se algum ponto da curva cai na caixa |α̃| ≤ seleção observada e
        |κ_diff| ≤ |ATME de referência|. None sem referência de seleção.
        """
        if self.references is None or self.references.max_observed_selection is None:
            return None
        max_alpha = abs(self.references.max_observed_selection)
        max_kappa = abs(self.references.atme_reference)
        return any(abs(p.alpha_tilde) <= max_alpha and abs(p.kappa_diff) <= max_kappa for p in self.points)

    def rows(self) -> List[Dict[str, Any]]:
        return [p.to_row() for p in self.points]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": "level_curve",
            "fraction": self.fraction,
            "delta_hat": self.delta_hat,
            "target": self.target,
            "tolerance": self.tolerance,
            "split": self.split.value,
            "points": self.rows(),
            "omitted_alphas": list(self.omitted_alphas),
            "references": None if self.references is None else self.references.to_dict(),
            "enters_danger_zone": self.enters_danger_zone(),
        }


def _solve_alpha(
    ds: Dataset, alpha: float, target: float, delta_hat: float, split: KappaSplit, tolerance: float, max_kappa: float
) -> Optional[LevelCurvePoint]:
    """
    Raiz de δ̃(α̃, d) − alvo em d por expansão geométrica do intervalo + bissecção.

    Só ajustes com EM convergido entram na busca: um ponto sem convergência
    conta como δ̃ indefinido e o α̃ acaba omitido.
    """

    def evaluate(d: float) -> SensitivityPoint:
        p = _safe_point(ds, SensitivitySpec.from_kappa_diff(alpha, d, split))
        if not p.converged and math.isfinite(p.delta_adjusted):
            logger.debug(f"🔍 α̃={alpha:g}, κ_diff={d:g}: EM sem convergência, ponto descartado")
            return replace(p, delta_adjusted=math.nan)
        return p

    def as_point(d: float, p: SensitivityPoint) -> LevelCurvePoint:
        return LevelCurvePoint(alpha, d, p.delta_adjusted, p.converged, p.delta_adjusted - target)

    origin = evaluate(0.0)
    f0 = origin.delta_adjusted - target
    if abs(f0) <= tolerance:
        return as_point(0.0, origin)
    if not math.isfinite(f0):
        return None

    step = max(abs(delta_hat), tolerance) / 4.0
    preferred = math.copysign(1.0, delta_hat) * (1.0 if alpha >= 0 else -1.0)
    for direction in (preferred, -preferred):
        lo, f_lo = 0.0, f0
        d = direction * step
        while abs(d) <= max_kappa:
            p = evaluate(d)
            f = p.delta_adjusted - target
            if not math.isfinite(f):
                break
            if abs(f) <= tolerance:
                return as_point(d, p)
            if math.copysign(1.0, f) != math.copysign(1.0, f_lo):
                return _bisect(evaluate, as_point, lo, f_lo, d, target, tolerance)
            lo, f_lo = d, f
            d *= 2.0
    return None


def _bisect(evaluate, as_point, a: float, f_a: float, b: float, target: float, tolerance: float) -> Optional[LevelCurvePoint]:
    for _ in range(BISECTION_MAX_STEPS):
        mid = 0.5 * (a + b)
        p = evaluate(mid)
        f = p.delta_adjusted - target
        if not math.isfinite(f):
            return None
        if abs(f) <= tolerance:
            return as_point(mid, p)
        if math.copysign(1.0, f) == math.copysign(1.0, f_a):
            a, f_a = mid, f
        else:
            b = mid
    return None


def level_curve(
    ds: Dataset,
    fraction: float,
    alpha_grid: Sequence[float],
    split_rule: KappaSplit = KappaSplit.SYMMETRIC,
    tolerance: Optional[float] = None,
    max_kappa: Optional[float] = None,
    threads: Optional[int] = None,
    with_references: bool = True,
) -> LevelCurve:
    """
    Para cada α̃, encontra κ_diff com δ̃(α̃, κ_diff) = fraction·δ̂.

    Pontos sem intervalo com troca de sinal até `max_kappa` são omitidos e
    registrados em `omitted_alphas`.

    Raises:
        UsageError: fraction fora de (0, 1] ou grade vazia
        LevelCurveError: δ̂ = 0 ou nenhum ponto encontrado
    """
    if not 0.0 < fraction <= 1.0:
        raise UsageError(f"fraction deve estar em (0, 1]: {fraction}")
    alphas = sorted(float(a) for a in alpha_grid)
    if not alphas:
        raise UsageError("grade de α̃ vazia")
    settings = get_settings()
    tolerance = settings.LEVEL_CURVE_TOLERANCE if tolerance is None else float(tolerance)
    max_kappa = settings.LEVEL_CURVE_MAX_KAPPA if max_kappa is None else float(max_kappa)
    split = KappaSplit(split_rule)

    delta_hat = parallel_regression(ds).estimate
    if delta_hat == 0.0:
        raise LevelCurveError("δ̂ = 0: curva de nível indefinida")
    target = fraction * delta_hat
    logger.info(f"🚀 Curva de nível: c={fraction:g}, δ̂={delta_hat:.6g}, {len(alphas)} valor(es) de α̃")

    with ThreadPoolExecutor(max_workers=resolve_threads(threads)) as executor:
        solved = list(executor.map(
            lambda a: _solve_alpha(ds, a, target, delta_hat, split, tolerance, max_kappa), alphas
        ))

    points = tuple(p for p in solved if p is not None)
    omitted = tuple(a for a, p in zip(alphas, solved) if p is None)
    if omitted:
        logger.warning(f"⚠️ Sem intervalo de raiz para α̃ = {', '.join(f'{a:g}' for a in omitted)}")
    if not points:
        raise LevelCurveError("nenhum ponto da curva de nível encontrado na grade de α̃")

    references = benchmark_references(ds) if with_references else None
    logger.info(f"✅ Curva de nível com {len(points)} ponto(s)")
    return LevelCurve(fraction, delta_hat, tolerance, split, points, omitted, references)
