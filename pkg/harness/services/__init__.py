from .export import export_service
from .report import report_service
from .sweep import sweep_service

__all__ = ["export_service", "report_service", "sweep_service"]
