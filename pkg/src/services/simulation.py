"""
Simulação do DGP estrutural, harness de Monte Carlo e oráculos de população

    Y = α + τT + ωS + βX + δTS + ξTX + κ_T·U + ε

Gerador: numpy PCG64. Ordem fixa dos sorteios em cada réplica:
X, covariáveis de ruído, T, U (só com confundidor), S, ε.

Semente da réplica r: `SeedSequence(seed, spawn_key=(r,))`, primeiro
inteiro de 64 bits do estado gerado (ver `replication_seed`).
"""

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg
from scipy.special import expit

from src.core.config import get_settings
from src.core.errors import ModerationError, MonteCarloError
from src.core.models.dataset import Dataset, Roles, bind_dataset
from src.core.models.dgp import DgpConfig, DiscreteX, UniformX
from src.core.models.results import Method
from src.services.estimators import EstimatorOptions, run_estimator

logger = logging.getLogger(__name__)

SEED_RULE = "seed_r = SeedSequence(seed, spawn_key=(r,)).generate_state(1, uint64)[0]; PCG64(seed_r)"
# fluxo separado dos sorteios do oráculo (nunca coincide com um índice de réplica)
ORACLE_STREAM = 2**63 - 1


def replication_seed(master: int, r: int) -> int:
    """Semente de 64 bits da réplica r derivada da semente mestre"""
    state = np.random.SeedSequence(master, spawn_key=(r,)).generate_state(1, np.uint64)
    return int(state[0])


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


# ==============================================================================
# GERAÇÃO
# ==============================================================================
@dataclass(frozen=True, eq=False)
class SimulatedDraw:
    x: np.ndarray
    noise: np.ndarray
    t: np.ndarray
    u: np.ndarray
    s: np.ndarray
    eps: np.ndarray


def _draw_x(cfg: DgpConfig, rng: np.random.Generator, n: int) -> np.ndarray:
    xm = cfg.x_model
    if isinstance(xm, UniformX):
        return rng.uniform(xm.lo, xm.hi, size=n)
    if isinstance(xm, DiscreteX):
        return rng.choice(np.asarray(xm.levels, dtype=np.float64), size=n, p=np.asarray(xm.probs))
    return rng.standard_normal(n)


def _selection_index(cfg: DgpConfig, x: np.ndarray, u: np.ndarray) -> np.ndarray:
    alpha_u = cfg.confounder.alpha if cfg.confounder is not None else 0.0
    return cfg.s_intercept + cfg.s_slope * x + alpha_u * u


def draw_units(cfg: DgpConfig) -> SimulatedDraw:
    rng = make_rng(cfg.seed)
    n = cfg.n
    x = _draw_x(cfg, rng, n)
    noise = rng.standard_normal((n, cfg.noise_covariates)) if cfg.noise_covariates else np.empty((n, 0))
    t = (rng.random(n) < cfg.p_treat).astype(np.int64)
    u = (rng.random(n) < 0.5).astype(np.float64) if cfg.confounder is not None else np.zeros(n)
    s = (rng.random(n) < expit(_selection_index(cfg, x, u))).astype(np.int64)
    eps = rng.normal(0.0, cfg.sigma_eps, size=n)
    return SimulatedDraw(x=x, noise=noise, t=t, u=u, s=s, eps=eps)


def structural_mean(cfg: DgpConfig, t, s, x, u) -> np.ndarray:
    """E[Y | T, S, X, U] do modelo estrutural"""
    kappa0 = cfg.confounder.kappa0 if cfg.confounder is not None else 0.0
    kappa1 = cfg.confounder.kappa1 if cfg.confounder is not None else 0.0
    kappa_t = np.where(np.asarray(t) == 1, kappa1, kappa0)
    return (
        cfg.alpha + cfg.tau * t + cfg.omega * s + cfg.beta * x
        + cfg.delta * t * s + cfg.xi * t * x + kappa_t * u
    )


def generate(cfg: DgpConfig, reveal_confounder: bool = False) -> Dataset:
    """
    Sorteia um Dataset do DGP; determinístico dado `cfg.seed`.

    Células (T,S) vazias em n pequeno são devolvidas como estão; um braço
    inteiro vazio é rejeitado pela validação do Dataset.
    """
    draw = draw_units(cfg)
    y = structural_mean(cfg, draw.t, draw.s, draw.x, draw.u) + draw.eps
    names = cfg.covariate_names(reveal_confounder)
    columns: Dict[str, np.ndarray] = {"y": y, "t": draw.t, "s": draw.s, "x": draw.x}
    for j in range(cfg.noise_covariates):
        columns[f"noise{j + 1}"] = draw.noise[:, j]
    if "u" in names:
        columns["u"] = draw.u
    return bind_dataset(columns, Roles("y", "t", "s", tuple(names)))


def true_atme(cfg: DgpConfig) -> float:
    """Neste modelo o ATME é o próprio δ (não depende de semente nem de n)"""
    return float(cfg.delta)


def simulate_potential_outcomes(cfg: DgpConfig) -> Dict[str, np.ndarray]:
    """Os quatro desfechos potenciais Y(t,s) por unidade, com o mesmo ε compartilhado"""
    draw = draw_units(cfg)
    outcomes = {
        f"y{t}{s}": structural_mean(cfg, t, s, draw.x, draw.u) + draw.eps
        for t in (1, 0)
        for s in (1, 0)
    }
    outcomes.update({"s": draw.s, "t": draw.t, "x": draw.x, "u": draw.u})
    return outcomes


def _unit_moderation(outcomes: Dict[str, np.ndarray]) -> np.ndarray:
    return (outcomes["y11"] - outcomes["y01"]) - (outcomes["y10"] - outcomes["y00"])


def brute_force_atme(cfg: DgpConfig) -> float:
    """Média de [Y(1,1) − Y(0,1)] − [Y(1,0) − Y(0,0)] sobre todas as unidades"""
    return math.fsum(_unit_moderation(simulate_potential_outcomes(cfg))) / cfg.n


def moderated_atme(cfg: DgpConfig) -> float:
    """ATME entre as unidades com S=1 (alvo do pareamento paralelo)"""
    outcomes = simulate_potential_outcomes(cfg)
    effects = _unit_moderation(outcomes)[outcomes["s"] == 1]
    if effects.size == 0:
        raise MonteCarloError("nenhuma unidade moderada no sorteio")
    return math.fsum(effects) / effects.size


def true_propensity(cfg: DgpConfig) -> Callable[[np.ndarray], np.ndarray]:
    """π(X) verdadeiro (U integrado quando há confundidor); lê a primeira coluna de X"""

    def pi(x: np.ndarray) -> np.ndarray:
        x0 = np.asarray(x, dtype=np.float64)
        x0 = x0[:, 0] if x0.ndim == 2 else x0
        base = cfg.s_intercept + cfg.s_slope * x0
        if cfg.confounder is None:
            return expit(base)
        return 0.5 * expit(base) + 0.5 * expit(base + cfg.confounder.alpha)

    return pi


# ==============================================================================
# ORÁCULO DO VIÉS DA INTERAÇÃO CONTROLADA
# ==============================================================================
def oracle_path(cfg: DgpConfig) -> str:
    return "enumeration" if isinstance(cfg.x_model, DiscreteX) else "simulation"


def _oracle_support(cfg: DgpConfig, draws: int) -> Tuple[np.ndarray, np.ndarray]:
    if isinstance(cfg.x_model, DiscreteX):
        return np.asarray(cfg.x_model.levels, dtype=np.float64), np.asarray(cfg.x_model.probs, dtype=np.float64)
    rng = make_rng(replication_seed(cfg.seed, ORACLE_STREAM))
    x = _draw_x(cfg, rng, draws)
    return x, np.full(draws, 1.0 / draws)


def oracle_controlled_interaction_bias(cfg: DgpConfig, draws: Optional[int] = None) -> float:
    """
    Limite em probabilidade do coeficiente de T·S em Y ~ 1 + T + S + X + T·S, menos δ.

    T, S e U são integrados exatamente pelas probabilidades conhecidas; X é
    enumerado (Discrete) ou sorteado em `draws` pontos (≥ 10⁶ por padrão).
    Covariáveis de ruído são independentes de média zero e não alteram a projeção.
    """
    draws = get_settings().ORACLE_DRAWS if draws is None else int(draws)
    path = oracle_path(cfg)
    x, wx = _oracle_support(cfg, draws)
    u_levels = ((0.0, 0.5), (1.0, 0.5)) if cfg.confounder is not None else ((0.0, 1.0),)

    gram = np.zeros((5, 5))
    cross = np.zeros(5)
    for t, pt in ((0.0, 1.0 - cfg.p_treat), (1.0, cfg.p_treat)):
        for u, pu in u_levels:
            p_s1 = expit(_selection_index(cfg, x, u))
            for s, ps in ((0.0, 1.0 - p_s1), (1.0, p_s1)):
                w = wx * pt * pu * ps
                z = np.column_stack([np.ones_like(x), np.full_like(x, t), np.full_like(x, s), x, np.full_like(x, t * s)])
                zw = z * w[:, None]
                gram += zw.T @ z
                cross += zw.T @ structural_mean(cfg, t, s, x, u)

    coef = linalg.solve(gram, cross, assume_a="pos")
    bias = float(coef[4] - cfg.delta)
    logger.info(f"🔍 Oráculo da interação controlada ({path}, {x.size} pontos de X): viés = {bias:.6g}")
    return bias


# ==============================================================================
# MONTE CARLO
# ==============================================================================
@dataclass(frozen=True)
class EstimatorSummary:
    method: Method
    reps_ok: int
    failures: int
    mean_estimate: float
    bias: float
    empirical_sd: float
    mean_se: float
    coverage: float
    mc_se: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "method": self.method.value,
            "reps_ok": self.reps_ok,
            "failures": self.failures,
            "mean_estimate": self.mean_estimate,
            "bias": self.bias,
            "empirical_sd": self.empirical_sd,
            "mean_se": self.mean_se,
            "coverage": self.coverage,
            "mc_se": self.mc_se,
        }


@dataclass(frozen=True)
class MonteCarloReport:
    config: DgpConfig
    reps: int
    seed: int
    true_atme: float
    summaries: Tuple[EstimatorSummary, ...]
    seed_rule: str = SEED_RULE
    oracle_bias: Optional[float] = None
    oracle_path: Optional[str] = None
    level: float = 0.95

    def summary(self, method: Method) -> EstimatorSummary:
        for s in self.summaries:
            if s.method == method:
                return s
        raise KeyError(method.value)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "reps": self.reps,
            "seed": self.seed,
            "seed_rule": self.seed_rule,
            "true_atme": self.true_atme,
            "level": self.level,
            "oracle_controlled_interaction_bias": self.oracle_bias,
            "oracle_path": self.oracle_path,
            "dgp": self.config.model_dump(mode="json"),
            "estimators": [s.to_dict() for s in self.summaries],
        }

    def csv_rows(self) -> List[Dict[str, Any]]:
        return [{**s.to_dict(), "true_atme": self.true_atme, "seed": self.seed} for s in self.summaries]


def _summarize(method: Method, outcomes: Sequence[Optional[Tuple[float, float, bool]]], truth: float) -> EstimatorSummary:
    ok = [o for o in outcomes if o is not None]
    failures = len(outcomes) - len(ok)
    n = len(ok)
    if n == 0:
        nan = math.nan
        return EstimatorSummary(method, 0, failures, nan, nan, nan, nan, nan, nan)
    estimates = [o[0] for o in ok]
    mean = math.fsum(estimates) / n
    sd = math.sqrt(math.fsum((e - mean) ** 2 for e in estimates) / (n - 1)) if n > 1 else math.nan
    return EstimatorSummary(
        method=method,
        reps_ok=n,
        failures=failures,
        mean_estimate=mean,
        bias=mean - truth,
        empirical_sd=sd,
        mean_se=math.fsum(o[1] for o in ok) / n,
        coverage=sum(1 for o in ok if o[2]) / n,
        mc_se=sd / math.sqrt(n) if n > 1 else math.nan,
    )


def _replicate(
    cfg: DgpConfig, r: int, methods: Sequence[Method], options: EstimatorOptions, truth: float
) -> List[Optional[Tuple[float, float, bool]]]:
    seed_r = replication_seed(cfg.seed, r)
    try:
        ds = generate(cfg.model_copy(update={"seed": seed_r}))
    except ModerationError as e:
        logger.debug(f"⚠️ Réplica {r}: geração falhou ({e})")
        return [None] * len(methods)
    rep_options = replace(options, seed=seed_r)
    results: List[Optional[Tuple[float, float, bool]]] = []
    for method in methods:
        try:
            res = run_estimator(ds, method, rep_options)
        except ModerationError as e:
            logger.debug(f"⚠️ Réplica {r}, {method.slug}: {e}")
            results.append(None)
            continue
        if not res.variance_defined:
            logger.debug(f"⚠️ Réplica {r}, {method.slug}: variância indefinida")
            results.append(None)
            continue
        results.append((res.estimate, res.std_error, res.covers(truth)))
    return results


def resolve_threads(threads: Optional[int]) -> int:
    threads = threads or get_settings().DEFAULT_THREADS or os.cpu_count() or 1
    return max(1, int(threads))


def monte_carlo(
    cfg: DgpConfig,
    reps: int,
    estimators: Sequence[Method],
    options: Optional[EstimatorOptions] = None,
    threads: Optional[int] = None,
    oracle: bool = True,
    oracle_draws: Optional[int] = None,
) -> MonteCarloReport:
    """
    Repete geração + estimação `reps` vezes e agrega por estimador.

    Falhas (células vazias em n pequeno, etc.) são contadas, nunca imputadas.
    O resultado não depende do número de threads: cada réplica tem semente
    própria e a agregação é feita na ordem das réplicas com soma compensada.

    Raises:
        MonteCarloError: todos os estimadores falharam em todas as réplicas
    """
    if reps < 1:
        raise MonteCarloError("reps deve ser ≥ 1")
    methods = list(estimators)
    if not methods:
        raise MonteCarloError("nenhum estimador solicitado")
    options = options or EstimatorOptions()
    truth = true_atme(cfg)
    workers = resolve_threads(threads)
    logger.info(f"🚀 Monte Carlo: {reps} réplicas, {len(methods)} estimador(es), {workers} thread(s)")

    with ThreadPoolExecutor(max_workers=workers) as executor:
        per_rep = list(executor.map(lambda r: _replicate(cfg, r, methods, options, truth), range(reps)))

    summaries = tuple(_summarize(m, [rep[i] for rep in per_rep], truth) for i, m in enumerate(methods))
    if all(s.reps_ok == 0 for s in summaries):
        raise MonteCarloError(f"todos os estimadores falharam em todas as {reps} réplicas")
    for s in summaries:
        if s.failures:
            logger.warning(f"⚠️ {s.method.slug}: {s.failures} réplica(s) falharam")

    bias = path = None
    if oracle and Method.CONTROLLED_INTERACTION in methods:
        bias = oracle_controlled_interaction_bias(cfg, oracle_draws)
        path = oracle_path(cfg)

    logger.info("✅ Monte Carlo concluído")
    return MonteCarloReport(
        config=cfg,
        reps=reps,
        seed=cfg.seed,
        true_atme=truth,
        summaries=summaries,
        oracle_bias=bias,
        oracle_path=path,
        level=options.resolve_level(),
    )
