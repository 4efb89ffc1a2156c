"""
Handlers dos comandos da CLI: estimate, simulate, sensitivity, diagnose

Cada handler recebe um RunConfig validado, executa e grava o relatório.
Exceções de domínio sobem até `app.run`, que as traduz em código de saída.
"""

import logging
from typing import Any, Callable, Dict, List, Optional, Tuple

from src.core.config.dgp_loader import load_dgp_file, parse_dgp_values
from src.core.config.run_config import RunConfig
from src.core.models.dataset import Dataset, Roles
from src.core.models.dgp import DgpConfig
from src.core.models.results import EstimateResult
from src.services.estimators import EstimatorOptions, KnownP, KnownPi, balance_table, run_estimators
from src.services.sensitivity import CSV_COLUMNS, KappaSplit, level_curve, sensitivity_grid
from src.services.simulation import monte_carlo, true_propensity
from src.services.support import check_common_support
from .io import parse_grid, read_csv, read_grouped_csv, stamp, write_report

logger = logging.getLogger(__name__)

DEFAULT_ALPHA_GRID = "0.25:2:0.25"

# flag -> campo do DgpConfig
DGP_FLAGS = {
    "intercept": "alpha",
    "tau": "tau",
    "omega": "omega",
    "beta": "beta",
    "delta": "delta",
    "xi": "xi",
    "sigma": "sigma_eps",
    "p_treat": "p_treat",
    "n": "n",
    "noise_covariates": "noise_covariates",
}


# ==============================================================================
# MONTAGEM
# ==============================================================================
def roles_from(cfg: RunConfig) -> Roles:
    return Roles(
        outcome=cfg.outcome,
        treatment=cfg.treatment,
        moderator=cfg.moderator,
        covariates=tuple(cfg.covariates),
        cluster=cfg.cluster,
    )


def load_groups(cfg: RunConfig) -> List[Tuple[Optional[str], Dataset]]:
    """Um único Dataset, ou um por grupo com `--by`"""
    roles = roles_from(cfg)
    if cfg.by is None:
        return [(None, read_csv(cfg.data, roles, drop_missing=cfg.drop_missing))]
    return read_grouped_csv(cfg.data, roles, cfg.by, drop_missing=cfg.drop_missing)


def build_options(cfg: RunConfig, seed: int, pi_function: Optional[Callable] = None) -> EstimatorOptions:
    kwargs: Dict[str, Any] = {
        "variance_mode": cfg.variance_mode,
        "level": cfg.level,
        "trim": not cfg.no_trim,
        "bootstrap_reps": cfg.bootstrap_reps,
        "seed": seed,
    }
    if cfg.p_treat_known is not None:
        kwargs["p_spec"] = KnownP(cfg.p_treat_known)
    if pi_function is not None:
        kwargs["pi_spec"] = KnownPi(pi_function)
    return EstimatorOptions(**kwargs)


def build_dgp(cfg: RunConfig) -> DgpConfig:
    """DgpConfig do arquivo `--dgp-config` (ou padrão) com as flags por cima"""
    base = load_dgp_file(cfg.dgp_config) if cfg.dgp_config is not None else DgpConfig()
    values = base.model_dump()
    for flag, key in DGP_FLAGS.items():
        value = getattr(cfg, flag)
        if value is not None:
            values[key] = value
    if cfg.sa is not None or cfg.sb is not None:
        a, b = values["s_model"]
        values["s_model"] = (a if cfg.sa is None else cfg.sa, b if cfg.sb is None else cfg.sb)
    values["seed"] = cfg.resolved_seed(base.seed)
    return parse_dgp_values(values, "flags")


def estimate_rows(results: List[Tuple[Optional[str], EstimateResult]]) -> List[Dict[str, Any]]:
    rows = []
    for group, res in results:
        sc = res.subset_components
        row = {
            "group": group,
            "method": res.method.value,
            "estimate": res.estimate,
            "variance": res.variance,
            "std_error": res.std_error,
            "ci_lower": res.ci_lower,
            "ci_upper": res.ci_upper,
            "level": res.level,
            "gamma0": None if sc is None else sc.gamma0,
            "var0": None if sc is None else sc.var0,
            "gamma1": None if sc is None else sc.gamma1,
            "var1": None if sc is None else sc.var1,
        }
        row.update(res.cell_counts)
        rows.append(row)
    return rows


# ==============================================================================
# COMANDOS
# ==============================================================================
def estimate_command(cfg: RunConfig) -> int:
    seed = cfg.resolved_seed()
    options = build_options(cfg, seed)
    methods = cfg.methods()
    results: List[Tuple[Optional[str], EstimateResult]] = []
    for group, ds in load_groups(cfg):
        for res in run_estimators(ds, methods, options):
            logger.info(
                f"✅ {res.method.slug}{'' if group is None else f' [{group}]'}: "
                f"δ̂ = {res.estimate:.6g} (EP {res.std_error:.3g})"
            )
            results.append((group, res))

    if len(results) == 1 and cfg.by is None:
        payload = results[0][1].to_dict()
    else:
        payload = {"results": [{"group": g, **r.to_dict()} for g, r in results]}
    write_report(stamp(payload, seed), estimate_rows(results), cfg.out, cfg.output_format())
    return 0


def simulate_command(cfg: RunConfig) -> int:
    dgp = build_dgp(cfg)
    options = build_options(cfg, dgp.seed, true_propensity(dgp) if cfg.known_propensity else None)
    report = monte_carlo(dgp, cfg.reps, cfg.methods(), options, threads=cfg.threads)
    for s in report.summaries:
        logger.info(f"📋 {s.method.slug}: viés = {s.bias:.4g} (EP-MC {s.mc_se:.3g}), cobertura = {s.coverage:.3f}")
    write_report(stamp(report.to_dict(), dgp.seed), report.csv_rows(), cfg.out, cfg.output_format())
    return 0


def sensitivity_command(cfg: RunConfig) -> int:
    seed = cfg.resolved_seed()
    split = KappaSplit(cfg.split)
    alphas = parse_grid(cfg.alpha_grid if cfg.alpha_grid is not None else DEFAULT_ALPHA_GRID)
    payloads, rows = [], []
    for group, ds in load_groups(cfg):
        if cfg.kappa_grid is not None:
            result = sensitivity_grid(ds, alphas, parse_grid(cfg.kappa_grid), split, threads=cfg.threads)
        else:
            result = level_curve(ds, cfg.fraction, alphas, split, tolerance=cfg.tolerance, threads=cfg.threads)
        payloads.append({"group": group, **result.to_dict()} if group is not None else result.to_dict())
        rows += result.rows()

    if cfg.by is not None and cfg.output_format() == "csv":
        # o cabeçalho CSV é fixo; grupos só cabem no JSON
        logger.warning("⚠️ Saída CSV com --by concatena os grupos sem coluna de grupo")
    payload = payloads[0] if cfg.by is None else {"results": payloads}
    write_report(stamp(payload, seed), rows, cfg.out, cfg.output_format(), columns=CSV_COLUMNS)
    return 0


def diagnose_command(cfg: RunConfig) -> int:
    """Suporte comum e balanço pré-pareamento; relatórios, nunca barreiras"""
    reports = []
    for group, ds in load_groups(cfg):
        support = check_common_support(ds, cfg.epsilon)
        entry: Dict[str, Any] = {"support": support.to_dict()}
        if ds.k > 0:
            entry["balance"] = balance_table(ds).to_dict()
        if group is not None:
            entry["group"] = group
        for message in support.messages:
            logger.warning(f"⚠️ {message}")
        reports.append(entry)

    payload = reports[0] if cfg.by is None else {"results": reports}
    rows = [
        {"group": r.get("group"), **{k: v for k, v in r["support"].items() if k in ("epsilon", "empty_cell", "within_bounds")},
         **r["support"]["cell_counts"]}
        for r in reports
    ]
    write_report(stamp(payload, cfg.resolved_seed()), rows, cfg.out, cfg.output_format())
    return 0


COMMANDS: Dict[str, Callable[[RunConfig], int]] = {
    "estimate": estimate_command,
    "simulate": simulate_command,
    "sensitivity": sensitivity_command,
    "diagnose": diagnose_command,
}
