"""
Configuration Package

Gerenciamento de configurações:
- Settings da ferramenta (config/defaults.json)
- Configuração de execução da CLI (--config JSON)
- DgpConfig em arquivo texto/JSON (--dgp-config)
"""

from .settings import get_settings, Settings
from .run_config import RunConfig, load_config_file
from .dgp_loader import dump_dgp_file, load_dgp_file

__all__ = ["get_settings", "Settings", "RunConfig", "load_config_file", "dump_dgp_file", "load_dgp_file"]
