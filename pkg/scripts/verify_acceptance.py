#!/usr/bin/env python3
"""
Script de Verificação de Aceitação
Roda o checklist de aceitação com os orçamentos completos de Monte Carlo

Uso:
    python scripts/verify_acceptance.py [--threads N] [--only 1,2,9]
"""

import argparse
import math
import sys
import tempfile
import time
from pathlib import Path
from typing import Callable, Dict, List, Tuple

import numpy as np
import pandas as pd

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from src.cli import run  # noqa: E402
from src.core.models.dataset import Roles, bind_dataset  # noqa: E402
from src.core.models.dgp import ConfounderConfig, DgpConfig, DiscreteX  # noqa: E402
from src.core.models.results import Method  # noqa: E402
from src.services.estimators import (  # noqa: E402
    EstimatorOptions,
    KnownP,
    KnownPi,
    full_interaction,
    parallel_matching,
    parallel_regression,
    propensity_weighting,
)
from src.services.sensitivity import SensitivitySpec, level_curve, sensitivity_point  # noqa: E402
from src.services.simulation import (  # noqa: E402
    generate,
    moderated_atme,
    monte_carlo,
    replication_seed,
    true_propensity,
)

REPS = 2000
N = 1000
BASELINE = DgpConfig(
    delta=2.0, xi=1.5, omega=1.0, tau=1.0, beta=1.0, s_model=(0.0, 1.0), sigma_eps=1.0, p_treat=0.5, n=N, seed=7
)

Check = Tuple[bool, str]


class Colors:
    """Cores ANSI para output colorido"""
    GREEN = '\033[92m'
    RED = '\033[91m'
    YELLOW = '\033[93m'
    BLUE = '\033[94m'
    RESET = '\033[0m'
    BOLD = '\033[1m'


def check_mark(passed: bool) -> str:
    return f"{Colors.GREEN}✓{Colors.RESET}" if passed else f"{Colors.RED}✗{Colors.RESET}"


def print_header(text: str):
    print(f"\n{Colors.BOLD}{Colors.BLUE}{'='*60}{Colors.RESET}")
    print(f"{Colors.BOLD}{Colors.BLUE}{text:^60}{Colors.RESET}")
    print(f"{Colors.BOLD}{Colors.BLUE}{'='*60}{Colors.RESET}\n")


def within(mean: float, target: float, mc_se: float, k: float = 3.0) -> bool:
    return abs(mean - target) <= k * mc_se


# ==============================================================================
# CHECKS
# ==============================================================================
def check_identity(threads: int) -> List[Check]:
    """Interação completa = regressão paralela em 200 datasets aleatórios"""
    rng = np.random.default_rng(1)
    worst = 0.0
    start = time.perf_counter()
    for _ in range(200):
        n, k = int(rng.integers(50, 501)), int(rng.integers(0, 5))
        x = rng.normal(size=(n, k))
        t = rng.integers(0, 2, size=n)
        s = (rng.random(n) < 1.0 / (1.0 + np.exp(-(x[:, 0] if k else 0.0)))).astype(int)
        t[:4], s[:4] = [1, 1, 0, 0], [1, 0, 1, 0]
        y = t + s + 2.0 * t * s + (x @ rng.normal(size=k) if k else 0.0) + rng.normal(size=n)
        columns = {"y": y, "t": t, "s": s, **{f"x{j}": x[:, j] for j in range(k)}}
        ds = bind_dataset(columns, Roles("y", "t", "s", tuple(f"x{j}" for j in range(k))))
        pr = parallel_regression(ds).estimate
        worst = max(worst, abs(full_interaction(ds).estimate - pr) / max(1.0, abs(pr)))
    elapsed = time.perf_counter() - start
    return [
        (worst <= 1e-8, f"maior discrepância relativa {worst:.2e} (≤ 1e-8)"),
        (elapsed < 10.0, f"tempo {elapsed:.1f}s (< 10s)"),
    ]


def check_bias_separation(threads: int) -> List[Check]:
    start = time.perf_counter()
    report = monte_carlo(BASELINE, REPS, [Method.PARALLEL_REGRESSION, Method.CONTROLLED_INTERACTION], threads=threads)
    elapsed = time.perf_counter() - start
    pr = report.summary(Method.PARALLEL_REGRESSION)
    ci = report.summary(Method.CONTROLLED_INTERACTION)
    return [
        (within(pr.mean_estimate, 2.0, pr.mc_se), f"ParallelRegression média {pr.mean_estimate:.4f} (EP-MC {pr.mc_se:.4f})"),
        (within(ci.mean_estimate, 2.0 + report.oracle_bias, ci.mc_se),
         f"ControlledInteraction média {ci.mean_estimate:.4f} vs oráculo {2.0 + report.oracle_bias:.4f}"),
        (abs(report.oracle_bias) > 0.05, f"viés do oráculo {report.oracle_bias:.4f} (|·| > 0.05)"),
        (0.92 <= pr.coverage <= 0.97, f"cobertura IC 95% da ParallelRegression {pr.coverage:.3f} ∈ [0.92, 0.97]"),
        (elapsed < 120.0, f"tempo {elapsed:.1f}s (< 2min)"),
    ]


def check_bias_nulls(threads: int) -> List[Check]:
    results = []
    for label, update in (("ξ=0", {"xi": 0.0}), ("b=0", {"s_model": (0.0, 0.0)})):
        report = monte_carlo(BASELINE.model_copy(update=update), REPS, [Method.CONTROLLED_INTERACTION], threads=threads)
        s = report.summary(Method.CONTROLLED_INTERACTION)
        results.append((within(s.mean_estimate, 2.0, s.mc_se), f"{label}: média {s.mean_estimate:.4f} (EP-MC {s.mc_se:.4f})"))
    return results


def check_weighting(threads: int) -> List[Check]:
    options = EstimatorOptions(p_spec=KnownP(0.5), pi_spec=KnownPi(true_propensity(BASELINE)))
    report = monte_carlo(BASELINE, REPS, [Method.PROPENSITY_WEIGHTING], options, threads=threads)
    s = report.summary(Method.PROPENSITY_WEIGHTING)

    hand = bind_dataset({"y": [5.0, 2.0, 3.0, 1.0], "t": [1, 1, 0, 0], "s": [1, 0, 1, 0]}, Roles("y", "t", "s"))
    half = EstimatorOptions(p_spec=KnownP(0.5), pi_spec=KnownPi(lambda x: np.full(x.shape[0], 0.5)))
    hand_value = propensity_weighting(hand, half).estimate
    return [
        (within(s.mean_estimate, 2.0, s.mc_se), f"π(X) verdadeiro: média {s.mean_estimate:.4f} (EP-MC {s.mc_se:.4f})"),
        (hand_value == 1.0, f"exemplo de 4 unidades = {hand_value!r}"),
    ]


def check_matching(threads: int) -> List[Check]:
    cfg = BASELINE.model_copy(update={"x_model": DiscreteX(levels=(-1.0, 0.0, 1.0), probs=(0.3, 0.4, 0.3))})
    truth = moderated_atme(cfg)
    report = monte_carlo(cfg, REPS, [Method.PARALLEL_MATCHING], threads=threads)
    s = report.summary(Method.PARALLEL_MATCHING)
    balance = parallel_matching(generate(cfg)).diagnostics["balance"]["covariates"]
    worst_smd = max(math.inf if row["smd_after"] is None else abs(row["smd_after"]) for row in balance)
    return [
        (within(s.mean_estimate, truth, s.mc_se), f"média {s.mean_estimate:.4f} vs ATME dos moderados {truth:.4f}"),
        (worst_smd == 0.0, f"maior |SMD| após o pareamento = {worst_smd:g}"),
    ]


def check_sensitivity(threads: int) -> List[Check]:
    ds = generate(BASELINE)
    collapse = abs(sensitivity_point(ds, SensitivitySpec(0.0, 0.0, 0.0)).delta_adjusted - parallel_regression(ds).estimate)

    planted = DgpConfig(delta=1.0, n=2000, seed=17, confounder=ConfounderConfig(alpha=3.0, kappa0=-1.0, kappa1=1.0))
    spec = SensitivitySpec.from_kappa_diff(3.0, 2.0)
    naive, adjusted = [], []
    for r in range(200):
        sample = generate(planted.model_copy(update={"seed": replication_seed(planted.seed, r)}))
        naive.append(parallel_regression(sample).estimate)
        adjusted.append(sensitivity_point(sample, spec).delta_adjusted)

    def mean_se(values):
        arr = np.asarray(values)
        return float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(arr.size))

    naive_mean, naive_se = mean_se(naive)
    adj_mean, adj_se = mean_se(adjusted)
    return [
        (collapse <= 1e-4, f"(α̃, κ̃) = 0 reproduz δ̂ (|diferença| = {collapse:.2e})"),
        (within(adj_mean, 1.0, adj_se), f"δ̃ no valor verdadeiro: {adj_mean:.4f} (EP-MC {adj_se:.4f})"),
        (not within(naive_mean, 1.0, naive_se), f"δ̂ ingênuo viesado: {naive_mean:.4f} (EP-MC {naive_se:.4f})"),
    ]


def check_level_curve(threads: int) -> List[Check]:
    ds = generate(BASELINE)
    grid = [0.25 * i for i in range(1, 9)]
    curve = level_curve(ds, 0.5, grid, threads=threads)
    worst = max(
        abs(sensitivity_point(ds, SensitivitySpec.from_kappa_diff(p.alpha_tilde, p.kappa_diff)).delta_adjusted - curve.target)
        for p in curve.points
    )
    full = level_curve(ds, 1.0, grid, threads=threads, with_references=False)
    worst_kappa = max(abs(p.kappa_diff) for p in full.points)
    return [
        (worst <= curve.tolerance, f"{len(curve.points)} ponto(s) reavaliados, maior |δ̃ − c·δ̂| = {worst:.2e}"),
        (worst_kappa <= curve.tolerance, f"fraction=1: maior |κ_diff| = {worst_kappa:.2e}"),
    ]


def check_determinism(threads: int) -> List[Check]:
    results = []
    with tempfile.TemporaryDirectory() as tmp:
        tmp_path = Path(tmp)
        data = tmp_path / "data.csv"
        pd.DataFrame(generate(BASELINE).to_columns()).to_csv(data, index=False, float_format="%.17g")
        commands = {
            "simulate": ["simulate", "--n", "500", "--reps", "200", "--seed", "7",
                         "--methods", "parallel-regression,controlled-interaction"],
            "sensitivity": ["sensitivity", "--data", str(data), "--outcome", "y", "--treatment", "t",
                            "--moderator", "s", "--covariates", "x", "--alpha-grid", "0.5:2:0.5"],
        }
        for name, argv in commands.items():
            outputs = []
            for n_threads in (1, max(2, threads)):
                out = tmp_path / f"{name}_{n_threads}.json"
                code = run(argv + ["--threads", str(n_threads), "--out", str(out), "-q"])
                outputs.append(out.read_bytes() if code == 0 else None)
            same = outputs[0] is not None and outputs[0] == outputs[1]
            results.append((same, f"{name}: saída idêntica byte a byte com 1 e {max(2, threads)} threads"))
    return results


CHECKS: Dict[str, Tuple[str, Callable[[int], List[Check]]]] = {
    "1": ("Identidade interação completa = regressão paralela", check_identity),
    "2": ("Separação de viés e cobertura", check_bias_separation),
    "3": ("Canais de viés anulados", check_bias_nulls),
    "4": ("Ponderação por propensão", check_weighting),
    "6": ("Pareamento paralelo", check_matching),
    "7": ("Sensibilidade: colapso e confundidor plantado", check_sensitivity),
    "8": ("Curva de nível autoconsistente", check_level_curve),
    "9": ("Determinismo", check_determinism),
}


def main():
    parser = argparse.ArgumentParser(description="Checklist de aceitação com orçamentos completos")
    parser.add_argument("--threads", type=int, default=4)
    parser.add_argument("--only", default=None, help="Checks separados por vírgula (ex.: 1,2,9)")
    args = parser.parse_args()
    selected = args.only.split(",") if args.only else list(CHECKS)

    print_header("Verificação de Aceitação - ATME")
    all_passed = True
    for key in selected:
        title, check = CHECKS[key]
        print(f"{Colors.BOLD}{key}. {title}...{Colors.RESET}")
        try:
            results = check(args.threads)
        except Exception as e:
            results = [(False, f"{type(e).__name__}: {e}")]
        for passed, msg in results:
            print(f"   {check_mark(passed)} {msg}")
            all_passed &= passed
        print()

    print_header("Resumo da Verificação")
    if all_passed:
        print(f"{Colors.GREEN}{Colors.BOLD}✓ TODOS OS CRITÉRIOS ATENDIDOS{Colors.RESET}\n")
    else:
        print(f"{Colors.RED}{Colors.BOLD}✗ EXISTEM CRITÉRIOS NÃO ATENDIDOS{Colors.RESET}\n")
    sys.exit(0 if all_passed else 1)


if __name__ == "__main__":
    try:
        main()
    except KeyboardInterrupt:
        print(f"\n\n{Colors.YELLOW}Verificação cancelada pelo usuário{Colors.RESET}")
        sys.exit(1)
