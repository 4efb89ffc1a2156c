"""
Módulo de configuração de logging amigável
Fornece formatação limpa, cores e filtros para os logs da CLI
"""

import logging
import re
import sys
from typing import Optional, TextIO

from src.core.errors import (
    DataValidationError,
    ModerationError,
    NumericalError,
    UsageError,
)


class Colors:
    """Cores ANSI para terminal"""
    BLUE = '\033[94m'
    YELLOW = '\033[93m'
    RED = '\033[91m'
    CYAN = '\033[96m'
    BOLD = '\033[1m'
    RESET = '\033[0m'

    _ANSI = re.compile(r'\x1B(?:[@-Z\\-_]|\[[0-?]*[ -/]*[@-~])')

    @classmethod
    def strip_colors(cls, text: str) -> str:
        """Remove códigos de cor de uma string"""
        return cls._ANSI.sub('', text)


class CustomFormatter(logging.Formatter):
    """
    Formatter customizado para logs amigáveis
    - Development: Colorido com emojis
    - Staging: Emojis sem cores
    - Production: Mínimo sem cores
    """

    EMOJI_MAP = {
        'DEBUG': '🔍',
        'INFO': 'ℹ️ ',
        'WARNING': '⚠️ ',
        'ERROR': '❌',
        'CRITICAL': '🚨'
    }

    COLOR_MAP = {
        'DEBUG': Colors.CYAN,
        'INFO': Colors.BLUE,
        'WARNING': Colors.YELLOW,
        'ERROR': Colors.RED,
        'CRITICAL': Colors.RED + Colors.BOLD
    }

    def __init__(self, use_colors: bool = True, use_emoji: bool = True, detailed: bool = True):
        """
        Args:
            use_colors: Se deve usar cores ANSI
            use_emoji: Se deve usar emojis
            detailed: Se deve incluir nível e nome do logger
        """
        self.use_colors = use_colors
        self.use_emoji = use_emoji
        self.detailed = detailed

        if detailed:
            fmt = '%(emoji)s%(asctime)s | %(levelname)-8s | %(name)s | %(message)s'
        else:
            fmt = '[%(asctime)s] %(message)s'

        super().__init__(fmt, datefmt='%Y-%m-%d %H:%M:%S')

    def format(self, record: logging.LogRecord) -> str:
        record.emoji = self.EMOJI_MAP.get(record.levelname, '  ') if (self.use_emoji and self.detailed) else ''
        formatted = super().format(record)

        if self.use_colors and self.detailed:
            color = self.COLOR_MAP.get(record.levelname, '')
            return f"{color}{formatted}{Colors.RESET}"
        # Mensagens de bibliotecas podem trazer escapes ANSI próprios
        return Colors.strip_colors(formatted)


class NumericWarningFilter(logging.Filter):
    """
    Filtra avisos capturados do numpy/scipy (logger 'py.warnings')
    Em staging/production, só passam se o nível for ERROR ou acima
    Em development, passam todos
    """

    def __init__(self, environment: str):
        super().__init__()
        self.environment = environment

    def filter(self, record: logging.LogRecord) -> bool:
        if record.name != 'py.warnings':
            return True
        if self.environment == 'development':
            return True
        return record.levelno >= logging.ERROR


def resolve_level(base_level: str, verbosity: int = 0) -> int:
    """
    Desloca o nível base conforme -v/-q

    Args:
        base_level: Nível derivado do APP_ENV ('DEBUG', 'INFO', 'WARNING')
        verbosity: +1 por -v, -1 por -q

    Returns:
        Nível numérico do logging, limitado a [DEBUG, ERROR]
    """
    level = getattr(logging, base_level) - 10 * verbosity
    return max(logging.DEBUG, min(logging.ERROR, level))


def setup_logging(settings, verbosity: int = 0, stream: Optional[TextIO] = None) -> logging.Logger:
    """
    Configura o sistema de logging baseado no ambiente

    Args:
        settings: Objeto Settings com configurações do app
        verbosity: Ajuste de verbosidade vindo da CLI
        stream: Destino dos logs (padrão: stderr, stdout fica livre para relatórios)

    Returns:
        Logger configurado para a aplicação
    """
    env = settings.APP_ENV

    root_logger = logging.getLogger()
    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)

    log_level = resolve_level(settings.get_log_level(), verbosity)
    root_logger.setLevel(log_level)

    console_handler = logging.StreamHandler(stream or sys.stderr)
    console_handler.setLevel(log_level)

    if settings.is_development():
        formatter = CustomFormatter(use_colors=True, use_emoji=True, detailed=True)
    elif settings.is_staging():
        formatter = CustomFormatter(use_colors=False, use_emoji=True, detailed=True)
    else:
        formatter = CustomFormatter(use_colors=False, use_emoji=False, detailed=False)

    console_handler.setFormatter(formatter)
    console_handler.addFilter(NumericWarningFilter(env))
    root_logger.addHandler(console_handler)

    configure_third_party_loggers(env)

    return logging.getLogger("src")


def configure_third_party_loggers(environment: str):
    """
    Configura níveis de log para bibliotecas terceiras
    """
    # RuntimeWarning do numpy/scipy (overflow em exp, divisão por zero) vira log
    logging.captureWarnings(True)
    if environment == 'development':
        logging.getLogger('py.warnings').setLevel(logging.WARNING)
    else:
        logging.getLogger('py.warnings').setLevel(logging.ERROR)

    # Pool de threads do Monte Carlo e da grade de sensibilidade
    logging.getLogger('concurrent.futures').setLevel(logging.WARNING)


def get_user_friendly_error(exception: Exception, environment: str) -> str:
    """
    Converte exceções técnicas em mensagens amigáveis

    Args:
        exception: A exceção capturada
        environment: Ambiente atual (development, staging, production)

    Returns:
        Mensagem de erro amigável
    """
    if isinstance(exception, UsageError):
        return f'❌ Uso inválido: {exception}\n💡 Consulte --help do comando'
    if isinstance(exception, DataValidationError):
        return f'❌ Dados inválidos: {exception}\n💡 Verifique o CSV e o mapeamento de colunas'
    if isinstance(exception, NumericalError):
        return f'❌ Falha numérica: {exception}\n💡 Verifique colinearidade, suporte comum e tamanhos das células'
    if isinstance(exception, ModerationError):
        return f'❌ Erro: {exception}'
    if isinstance(exception, FileNotFoundError):
        return f'❌ Arquivo não encontrado\n💡 Verifique se o arquivo existe: {exception.filename}'
    if isinstance(exception, OSError):
        return f'❌ Falha de leitura/escrita: {exception}'

    if environment == 'development':
        return f'❌ Erro: {type(exception).__name__}\n🔍 Detalhes: {exception}'
    return '❌ Erro inesperado\n💡 Consulte os logs para mais detalhes'
