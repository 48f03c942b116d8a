from .html import export_html
from .pptx import export_pptx

__all__ = ["export_html", "export_pptx"]
