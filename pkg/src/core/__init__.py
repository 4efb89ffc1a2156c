"""
Core Package

Contém componentes de infraestrutura core:
- Configurações (settings, RunConfig, arquivos de DGP)
- Sistema de logging
- Modelos de dados (Dataset e tipos de resultado)
- Hierarquia de erros com códigos de saída
"""
