"""
CLI em lote: parsing de argumentos, mescla com `--config` e códigos de saída

Códigos: 0 sucesso, 1 uso inválido, 2 dados/validação, 3 falha numérica.
"""

import argparse
import logging
import sys
from typing import Any, Dict, List, Optional, Sequence, TextIO

from src import __version__
from src.core.config import RunConfig, get_settings, load_config_file
from src.core.errors import ModerationError, UsageError
from src.core.logging import get_user_friendly_error, setup_logging
from src.core.models.results import Method, VarianceMode
from .commands import COMMANDS

logger = logging.getLogger(__name__)

EXIT_IO_ERROR = 2
EXIT_UNEXPECTED = 3


class ArgumentParser(argparse.ArgumentParser):
    """argparse que levanta UsageError em vez de encerrar o processo"""

    def error(self, message: str):
        raise UsageError(message)


def _comma_list(text: str) -> List[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _flag(parser: argparse.ArgumentParser, *names: str, **kwargs):
    """Flags sem padrão próprio: None significa 'não informado' (o arquivo de config vale)"""
    kwargs.setdefault("default", None)
    parser.add_argument(*names, **kwargs)


def _switch(parser: argparse.ArgumentParser, name: str, help: str):
    parser.add_argument(name, action="store_const", const=True, default=None, help=help)


# ==============================================================================
# PARSER
# ==============================================================================
def _common_parent() -> argparse.ArgumentParser:
    p = ArgumentParser(add_help=False)
    _flag(p, "--config", help="Arquivo JSON com os mesmos campos das flags")
    _flag(p, "--out", help="Arquivo de saída (padrão: stdout)")
    _flag(p, "--format", choices=("json", "csv"), help="Formato do relatório (padrão: pela extensão de --out)")
    _flag(p, "--seed", type=int, help="Semente mestre (inteiro sem sinal de 64 bits)")
    _flag(p, "--threads", type=int, help="Threads de trabalho (padrão: núcleos disponíveis)")
    _flag(p, "--method", "--methods", dest="method", type=_comma_list,
          help=f"Lista separada por vírgulas ou 'all' ({', '.join(m.slug for m in Method)})")
    _flag(p, "--variance-mode", choices=[m.value for m in VarianceMode])
    _flag(p, "--level", type=float, help="Nível de confiança dos intervalos")
    _flag(p, "--p-treat-known", type=float, help="Probabilidade de tratamento conhecida pelo desenho")
    _switch(p, "--no-trim", "Desativa o trimming das propensões")
    _flag(p, "--bootstrap-reps", type=int, help="Réplicas de bootstrap (0 = variância analítica)")
    p.add_argument("-v", "--verbose", action="count", default=0)
    p.add_argument("-q", "--quiet", action="count", default=0)
    return p


def _data_parent() -> argparse.ArgumentParser:
    p = ArgumentParser(add_help=False)
    _flag(p, "--data", help="CSV de entrada")
    _flag(p, "--outcome")
    _flag(p, "--treatment")
    _flag(p, "--moderator")
    _flag(p, "--covariates", type=_comma_list, help="Covariáveis separadas por vírgula")
    _flag(p, "--cluster", help="Coluna de rótulos de cluster")
    _flag(p, "--by", help="Estima separadamente por valor desta coluna")
    _switch(p, "--drop-missing", "Descarta linhas com valores ausentes")
    return p


def _dgp_arguments(p: argparse.ArgumentParser):
    _flag(p, "--dgp-config", help="Arquivo DGP (chave = valor, ou .json)")
    for name in ("--intercept", "--tau", "--omega", "--beta", "--delta", "--xi", "--sigma", "--p-treat", "--sa", "--sb"):
        _flag(p, name, type=float)
    _flag(p, "--n", type=int, help="Tamanho da amostra por réplica")
    _flag(p, "--noise-covariates", type=int)
    _flag(p, "--reps", type=int, help="Réplicas de Monte Carlo")
    _switch(p, "--known-propensity", "Usa o π(X) verdadeiro do DGP nos estimadores ponderados")


def build_parser() -> ArgumentParser:
    common, data = _common_parent(), _data_parent()
    parser = ArgumentParser(prog="atme", description="Estimação do efeito médio de moderação do tratamento (ATME)")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    sub.add_parser("estimate", parents=[common, data], help="Estima o ATME a partir de um CSV")

    simulate = sub.add_parser("simulate", parents=[common], help="Monte Carlo sobre o DGP estrutural")
    _dgp_arguments(simulate)

    sensitivity = sub.add_parser("sensitivity", parents=[common, data], help="Sensibilidade a confundidor não observado")
    _flag(sensitivity, "--fraction", type=float, help="Fração c de δ̂ da curva de nível (padrão 0.5)")
    _flag(sensitivity, "--alpha-grid", help="Grade de α̃: start:stop:step ou a,b,c")
    _flag(sensitivity, "--kappa-grid", help="Grade de κ_diff; quando informada, varre a grade completa")
    _flag(sensitivity, "--split", choices=("symmetric", "anchored"))
    _flag(sensitivity, "--tolerance", type=float)

    diagnose = sub.add_parser("diagnose", parents=[common, data], help="Suporte comum e balanço de covariáveis")
    _flag(diagnose, "--epsilon", type=float, help="Limite ε dos flags de propensão (padrão 0.01)")
    return parser


def _flag_values(args: argparse.Namespace) -> Dict[str, Any]:
    values = {k: v for k, v in vars(args).items() if k not in ("config", "verbose", "quiet")}
    verbosity = args.verbose - args.quiet
    values["verbosity"] = verbosity if verbosity else None
    return values


def parse_config(argv: Sequence[str]) -> RunConfig:
    """
    Flags + arquivo `--config` -> RunConfig validado

    Raises:
        UsageError: flag desconhecida, valor inválido ou campos obrigatórios ausentes
    """
    args = build_parser().parse_args(list(argv))
    file_values: Optional[Dict[str, Any]] = None
    if args.config is not None:
        file_values = load_config_file(args.config)
        if file_values.get("command", args.command) != args.command:
            raise UsageError(f"--config é de '{file_values['command']}', não de '{args.command}'")
    return RunConfig.from_sources(file_values, _flag_values(args))


# ==============================================================================
# ENTRADA
# ==============================================================================
def run(argv: Sequence[str], log_stream: Optional[TextIO] = None) -> int:
    """
    Executa um comando e devolve o código de saída (nunca chama sys.exit)
    """
    settings = get_settings()
    try:
        cfg = parse_config(argv)
        setup_logging(settings, cfg.verbosity, stream=log_stream)
        logger.info(f"🚀 {cfg.command} (versão {__version__})")
        return COMMANDS[cfg.command](cfg)
    except SystemExit as e:
        # --help / --version
        return int(e.code or 0)
    except ModerationError as e:
        print(get_user_friendly_error(e, settings.APP_ENV), file=log_stream or sys.stderr)
        return e.exit_code
    except OSError as e:
        print(get_user_friendly_error(e, settings.APP_ENV), file=log_stream or sys.stderr)
        return EXIT_IO_ERROR
    except Exception as e:
        logger.exception(f"❌ Erro inesperado: {e}")
        print(get_user_friendly_error(e, settings.APP_ENV), file=log_stream or sys.stderr)
        return EXIT_UNEXPECTED
