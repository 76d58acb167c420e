"""Paper-style figure rendering for the signature random access simulator."""

from .render import KINDS, RenderError, render

__all__ = ["KINDS", "RenderError", "render"]
