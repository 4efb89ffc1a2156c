"""
ATME Toolkit - Entry Point

Uso: python -m src.main <estimate|simulate|sensitivity|diagnose> [flags]
"""

import sys

from pydantic import ValidationError

from src.core.config import get_settings
from src.core.logging import setup_logging

# ==============================================================================
# SETUP INICIAL
# ==============================================================================
try:
    settings = get_settings()
except ValidationError as e:
    print(f"❌ Erro de Configuração (config/defaults.json): {e}", file=sys.stderr)
    sys.exit(1)

logger = setup_logging(settings)

# Import da CLI após logging estar configurado
from src.cli import run


# ==============================================================================
# ENTRY POINT
# ==============================================================================
def main() -> int:
    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
