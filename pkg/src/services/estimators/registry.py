"""
Registro de estimadores

Todos os estimadores têm a assinatura `(ds, options) -> EstimateResult`;
novas estratégias de identificação dentro dos subconjuntos (ex.: variável
instrumental) entram com `@register(...)` sem alterar o núcleo.
"""

import logging
from typing import Callable, Dict, Iterable, List, Optional

from src.core.models.dataset import Dataset
from src.core.models.results import EstimateResult, Method
from .common import DEFAULT_OPTIONS, EstimatorOptions

logger = logging.getLogger(__name__)

Estimator = Callable[[Dataset, EstimatorOptions], EstimateResult]

_REGISTRY: Dict[Method, Estimator] = {}


def register(method: Method) -> Callable[[Estimator], Estimator]:
    def decorator(fn: Estimator) -> Estimator:
        if method in _REGISTRY:
            raise ValueError(f"estimador já registrado: {method.value}")
        _REGISTRY[method] = fn
        return fn

    return decorator


def get_estimator(method: Method) -> Estimator:
    try:
        return _REGISTRY[method]
    except KeyError:
        raise KeyError(f"nenhum estimador registrado para {method.value}") from None


def registered_methods() -> List[Method]:
    return [m for m in Method if m in _REGISTRY]


def run_estimator(ds: Dataset, method: Method, options: Optional[EstimatorOptions] = None) -> EstimateResult:
    logger.debug(f"🔍 Estimando {method.slug} (n={ds.n}, k={ds.k})")
    return get_estimator(method)(ds, options or DEFAULT_OPTIONS)


def run_estimators(
    ds: Dataset, methods: Iterable[Method], options: Optional[EstimatorOptions] = None
) -> List[EstimateResult]:
    return [run_estimator(ds, m, options) for m in methods]
